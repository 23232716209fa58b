//! Ready-made functions and seeded random generators for demos and tests.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::baire::{add, compose_continuous, truncate, BaireSeq, Family, Modulus, SeqError, SeriesBounds};
use crate::continuous::{ContinuousExpr, StdFn};
use crate::domain::{Domain, Region};

fn x() -> ContinuousExpr {
    ContinuousExpr::var()
}

fn c(v: f64) -> ContinuousExpr {
    ContinuousExpr::constant(v)
}

/// `x^n` on `[0, 1]`: limit `0` on `[0, 1)` and `1` at `1`.
pub fn powers(domain: &Domain) -> BaireSeq {
    BaireSeq::from_sequence(domain.clone(), |n| x().power(n), None, Some(1.0))
}

/// `1 - x^n`: limit `1` on `[0, 1)` and `0` at `1`.
pub fn co_powers(domain: &Domain) -> BaireSeq {
    BaireSeq::from_sequence(domain.clone(), |n| c(1.0) - x().power(n), None, Some(1.0))
}

/// `min(n a |x - c|, 1)`: limit `0` at `c` and `1` elsewhere.
pub fn spike(domain: &Domain, a: f64, at: f64) -> BaireSeq {
    BaireSeq::from_sequence(
        domain.clone(),
        move |n| (c(n as f64 * a) * (x() - c(at)).abs()).min(&c(1.0)),
        None,
        Some(1.0),
    )
}

/// `dist(x, [-1/n, 1/n])`.
pub fn band(domain: &Domain, n: u64) -> BaireSeq {
    let r = 1.0 / n.max(1) as f64;
    let e = ContinuousExpr::dist_to(Region::interval(-r, r).expect("r > 0"));
    BaireSeq::from_sequence(domain.clone(), move |_| e.clone(), Some(Modulus::Exact(1)), None)
}

pub fn band_family(domain: &Domain) -> Family {
    let d = domain.clone();
    Family::new(move |n| Ok(band(&d, n)))
}

/// Small catalogue of functions used by the randomized checks. Parameters
/// `c`, `lo`, `hi` are usually sample points of the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LibFn {
    Linear { a: f64, c: f64 },
    Dist { a: f64, lo: f64, hi: f64 },
    PositivePart { a: f64, c: f64 },
    Powers,
    CoPowers,
    Spike { a: f64, c: f64 },
    Const(f64),
    TruncatedLinear { a: f64, c: f64 },
    ArctanLinear { a: f64, c: f64 },
}

impl LibFn {
    pub fn build(&self, domain: &Domain) -> Result<BaireSeq, SeqError> {
        let d = domain.clone();
        Ok(match *self {
            LibFn::Linear { a, c: at } => BaireSeq::continuous(d, c(a) * (x() - c(at))),
            LibFn::Dist { a, lo, hi } => {
                let e = c(a) * ContinuousExpr::dist_to(Region::interval(lo, hi).map_err(crate::continuous::ExprError::from)?);
                BaireSeq::continuous(d, e)
            }
            LibFn::PositivePart { a, c: at } => BaireSeq::continuous(d, (c(a) * (x() - c(at))).max(&c(0.0))),
            LibFn::Powers => powers(&d),
            LibFn::CoPowers => co_powers(&d),
            LibFn::Spike { a, c: at } => spike(&d, a, at),
            LibFn::Const(v) => BaireSeq::constant(d, v),
            LibFn::TruncatedLinear { a, c: at } => truncate(&BaireSeq::continuous(d, c(a) * (x() - c(at))), 1.0)?,
            LibFn::ArctanLinear { a, c: at } => {
                compose_continuous(StdFn::Arctan, &BaireSeq::continuous(d, c(a) * (x() - c(at))))?
            }
        })
    }

    /// A random member whose zeros fall on samples of `grid` and whose
    /// nonzero values on the grid are at least `2 * step` in size, with
    /// `step` the grid spacing. Keeps every zero-set identity decidable at
    /// `eps = 1e-9` for products and cubes.
    pub fn random<R: Rng>(grid: &[f64], rng: &mut R) -> LibFn {
        let pick = |rng: &mut R| *grid.choose(rng).expect("nonempty grid");
        let a = rng.gen_range(2.0..4.0);
        match rng.gen_range(0..9) {
            0 => LibFn::Linear { a, c: pick(rng) },
            1 => {
                let (p, q) = (pick(rng), pick(rng));
                LibFn::Dist { a, lo: p.min(q), hi: p.max(q) }
            }
            2 => LibFn::PositivePart { a, c: pick(rng) },
            3 => LibFn::Powers,
            4 => LibFn::CoPowers,
            5 => LibFn::Spike { a, c: pick(rng) },
            6 => {
                let v = [0.0, 0.5, -0.75, 1.0, -2.0];
                LibFn::Const(*v.choose(rng).unwrap())
            }
            7 => LibFn::TruncatedLinear { a, c: pick(rng) },
            _ => LibFn::ArctanLinear { a, c: pick(rng) },
        }
    }
}

/// Strictly positive functions on `[0, 1]`, continuous and not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PositiveFn {
    ShiftedAbs { floor: f64, a: f64, c: f64 },
    ShiftedPowers { floor: f64 },
    ShiftedSpike { floor: f64, a: f64, c: f64 },
    ArctanLift { a: f64, c: f64 },
    Const(f64),
}

impl PositiveFn {
    pub fn build(&self, domain: &Domain) -> Result<BaireSeq, SeqError> {
        let d = domain.clone();
        Ok(match *self {
            PositiveFn::ShiftedAbs { floor, a, c: at } => {
                BaireSeq::continuous(d, c(floor) + c(a) * (x() - c(at)).abs())
            }
            PositiveFn::ShiftedPowers { floor } => add(&BaireSeq::constant(d.clone(), floor), &powers(&d))?,
            PositiveFn::ShiftedSpike { floor, a, c: at } => {
                add(&BaireSeq::constant(d.clone(), floor), &spike(&d, a, at))?
            }
            PositiveFn::ArctanLift { a, c: at } => add(
                &BaireSeq::constant(d.clone(), 2.0),
                &compose_continuous(StdFn::Arctan, &BaireSeq::continuous(d, c(a) * (x() - c(at))))?,
            )?,
            PositiveFn::Const(v) => BaireSeq::constant(d, v),
        })
    }

    pub fn random<R: Rng>(rng: &mut R) -> PositiveFn {
        let floor = rng.gen_range(0.25..2.0);
        let a = rng.gen_range(0.5..4.0);
        let at = rng.gen_range(0.0..1.0);
        match rng.gen_range(0..5) {
            0 => PositiveFn::ShiftedAbs { floor, a, c: at },
            1 => PositiveFn::ShiftedPowers { floor },
            2 => PositiveFn::ShiftedSpike { floor, a, c: at },
            3 => PositiveFn::ArctanLift { a, c: at },
            _ => PositiveFn::Const(floor),
        }
    }
}

/// Unit-bounded shapes scaled into series members.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UnitShape {
    Arctan { a: f64, c: f64 },
    Powers,
    Clamp { a: f64, c: f64 },
    Dist { lo: f64, hi: f64 },
}

impl UnitShape {
    pub fn random<R: Rng>(rng: &mut R) -> UnitShape {
        let a = rng.gen_range(-4.0..4.0);
        let at = rng.gen_range(0.0..1.0);
        match rng.gen_range(0..4) {
            0 => UnitShape::Arctan { a, c: at },
            1 => UnitShape::Powers,
            2 => UnitShape::Clamp { a, c: at },
            _ => {
                let (p, q) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
                UnitShape::Dist { lo: f64::min(p, q), hi: f64::max(p, q) }
            }
        }
    }

    /// `scale` times the shape; the result is bounded by `|scale|`.
    pub fn build(&self, domain: &Domain, scale: f64) -> Result<BaireSeq, SeqError> {
        let d = domain.clone();
        let unit = match *self {
            UnitShape::Arctan { a, c: at } => {
                let e = (c(a) * (x() - c(at))).compose(StdFn::Arctan);
                BaireSeq::continuous(d.clone(), c(2.0 / std::f64::consts::PI) * e)
            }
            UnitShape::Powers => powers(&d),
            UnitShape::Clamp { a, c: at } => {
                BaireSeq::continuous(d.clone(), crate::continuous::clamp_expr(&(c(a) * (x() - c(at))), 1.0)?)
            }
            UnitShape::Dist { lo, hi } => BaireSeq::continuous(
                d.clone(),
                ContinuousExpr::dist_to(Region::interval(lo, hi).map_err(crate::continuous::ExprError::from)?),
            ),
        };
        let scaled = compose_continuous(StdFn::Affine { a: scale, b: 0.0 }, &unit)?;
        Ok(scaled.with_bound(Some(scale.abs())))
    }
}

/// A series `sum_k s q^k shape_k` with its geometric majorants.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricFamily {
    pub scale: f64,
    pub ratio: f64,
    pub shapes: Vec<UnitShape>,
    pub signs: Vec<f64>,
}

impl GeometricFamily {
    pub fn random<R: Rng>(rng: &mut R) -> GeometricFamily {
        let period = rng.gen_range(1..=4);
        GeometricFamily {
            scale: rng.gen_range(0.5..2.0),
            ratio: rng.gen_range(0.3..0.7),
            shapes: (0..period).map(|_| UnitShape::random(rng)).collect(),
            signs: (0..period).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect(),
        }
    }

    pub fn bound(&self, k: u64) -> f64 {
        self.scale * self.ratio.powi(k as i32)
    }

    pub fn member(&self, domain: &Domain, k: u64) -> Result<BaireSeq, SeqError> {
        let i = (k as usize - 1) % self.shapes.len();
        self.shapes[i].build(domain, self.signs[i] * self.bound(k))
    }

    pub fn family(&self, domain: &Domain) -> Family {
        let me = self.clone();
        let d = domain.clone();
        Family::new(move |k| me.member(&d, k))
    }

    pub fn bounds(&self) -> SeriesBounds {
        SeriesBounds::geometric(self.scale, self.ratio)
    }

    /// Members needed so the neglected tail is below `tail`.
    pub fn cutoff(&self, tail: f64) -> u64 {
        let mut k = 1;
        while self.bound(k + 1) / (1.0 - self.ratio) >= tail {
            k += 1;
        }
        k
    }
}

/// A uniformly convergent family `f_m = base + amp * q^m * shape` or
/// `base + amp * shape / m` together with its error bound.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformFamily {
    pub base: UnitShape,
    pub wobble: UnitShape,
    pub amp: f64,
    pub rate: Option<f64>,
}

impl UniformFamily {
    pub fn random<R: Rng>(rng: &mut R) -> UniformFamily {
        UniformFamily {
            base: UnitShape::random(rng),
            wobble: UnitShape::random(rng),
            amp: rng.gen_range(0.5..3.0),
            rate: rng.gen_bool(0.5).then(|| rng.gen_range(0.4..0.9)),
        }
    }

    pub fn err(&self, m: u64) -> f64 {
        match self.rate {
            Some(q) => self.amp * q.powi(m.min(i32::MAX as u64) as i32),
            None => self.amp / m.max(1) as f64,
        }
    }

    pub fn member(&self, domain: &Domain, m: u64) -> Result<BaireSeq, SeqError> {
        add(&self.base.build(domain, 1.0)?, &self.wobble.build(domain, self.err(m))?)
    }

    pub fn family(&self, domain: &Domain) -> Family {
        let me = self.clone();
        let d = domain.clone();
        Family::new(move |m| me.member(&d, m))
    }

    pub fn err_fn(&self) -> impl Fn(u64) -> f64 + Send + Sync + 'static {
        let me = self.clone();
        move |m| me.err(m)
    }
}

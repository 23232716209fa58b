//! Continuous real functions as immutable expression trees.
//!
//! Every node evaluates totally on its domain except the two partial
//! standard functions (`TanRestricted`, `ReciprocalNonzero`), which check
//! their argument at evaluation time and fail instead of returning garbage.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::ops;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::domain::{Domain, DomainError, Region};
use crate::zero_sets::SampledSet;

/// Smallest magnitude a reciprocal node accepts when its argument carries
/// only a sampled (not declared) nonvanishing certificate.
pub const NONZERO_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("point {x} is outside the domain")]
    OutsideDomain { x: f64 },
    #[error("reciprocal argument {value} is below its certified bound {bound}")]
    CertificateViolated { value: f64, bound: f64 },
    #[error("tangent argument {value} is outside (-pi/2, pi/2)")]
    TanOutOfRange { value: f64 },
    #[error("bound must be positive and finite, got {0}")]
    NonPositiveBound(f64),
    #[error("value {value} at x = {x} is outside [{lo}, {hi}]")]
    RangeViolation { x: f64, value: f64, lo: f64, hi: f64 },
    #[error("sets are not separated at sample resolution (gap {gap})")]
    TouchingSets { gap: f64 },
    #[error("term index must be at least 1")]
    ZeroIndex,
    #[error("{0}")]
    Domain(#[from] DomainError),
    #[error("{0}")]
    Invalid(String),
}

/// How a reciprocal node knows its argument stays away from zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Certificate {
    /// Caller asserts `|arg| >= delta` everywhere it will be evaluated.
    Declared(f64),
    /// Only checked at evaluation time against [`NONZERO_TOL`].
    Sampled,
}

impl Certificate {
    fn floor(&self) -> f64 {
        match *self {
            Certificate::Declared(d) => d * (1.0 - 1e-12),
            Certificate::Sampled => NONZERO_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum StdFn {
    Arctan,
    /// `tan` on the open interval (-pi/2, pi/2).
    TanRestricted,
    Affine { a: f64, b: f64 },
    Power(u64),
    ReciprocalNonzero(Certificate),
}

impl StdFn {
    pub fn apply(&self, v: f64) -> Result<f64, ExprError> {
        match *self {
            StdFn::Arctan => Ok(v.atan()),
            StdFn::TanRestricted => {
                if v.abs() < FRAC_PI_2 {
                    Ok(v.tan())
                } else {
                    Err(ExprError::TanOutOfRange { value: v })
                }
            }
            StdFn::Affine { a, b } => Ok(a * v + b),
            StdFn::Power(k) => Ok(powu(v, k)),
            StdFn::ReciprocalNonzero(cert) => {
                let floor = cert.floor();
                if v.abs() < floor || !v.is_finite() {
                    Err(ExprError::CertificateViolated { value: v, bound: floor })
                } else {
                    Ok(1.0 / v)
                }
            }
        }
    }
}

pub(crate) fn powu(v: f64, k: u64) -> f64 {
    if k <= i32::MAX as u64 {
        v.powi(k as i32)
    } else {
        v.powf(k as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var,
    Add(ContinuousExpr, ContinuousExpr),
    Sum(Vec<ContinuousExpr>),
    Mul(ContinuousExpr, ContinuousExpr),
    Neg(ContinuousExpr),
    Abs(ContinuousExpr),
    Min(ContinuousExpr, ContinuousExpr),
    Max(ContinuousExpr, ContinuousExpr),
    Clamp(ContinuousExpr, f64),
    /// `1 / (|e| + 1/n)`, total for every `n >= 1`.
    RecipShifted(ContinuousExpr, u64),
    DistToSet(Arc<Region>),
    /// `n^2 f` where `f <= 1/n`, `1/f` where `f >= 1/n`.
    ReciprocalRamp { f: ContinuousExpr, n: u64 },
    Compose(StdFn, ContinuousExpr),
}

/// A continuous real-valued function, cheap to clone and share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousExpr(Arc<Node>);

impl ContinuousExpr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    fn wrap(node: Node) -> Self {
        ContinuousExpr(Arc::new(node))
    }

    pub fn constant(c: f64) -> Self {
        Self::wrap(Node::Const(c))
    }

    pub fn var() -> Self {
        Self::wrap(Node::Var)
    }

    pub fn sum(terms: Vec<ContinuousExpr>) -> Self {
        match terms.len() {
            0 => Self::constant(0.0),
            1 => terms.into_iter().next().unwrap(),
            _ => Self::wrap(Node::Sum(terms)),
        }
    }

    pub fn abs(&self) -> Self {
        Self::wrap(Node::Abs(self.clone()))
    }

    pub fn min(&self, other: &Self) -> Self {
        Self::wrap(Node::Min(self.clone(), other.clone()))
    }

    pub fn max(&self, other: &Self) -> Self {
        Self::wrap(Node::Max(self.clone(), other.clone()))
    }

    pub fn compose(&self, g: StdFn) -> Self {
        Self::wrap(Node::Compose(g, self.clone()))
    }

    pub fn power(&self, k: u64) -> Self {
        self.compose(StdFn::Power(k))
    }

    pub fn recip_shifted(&self, n: u64) -> Result<Self, ExprError> {
        if n == 0 {
            return Err(ExprError::ZeroIndex);
        }
        Ok(Self::wrap(Node::RecipShifted(self.clone(), n)))
    }

    pub fn dist_to(region: Region) -> Self {
        Self::wrap(Node::DistToSet(Arc::new(region)))
    }

    pub fn as_const(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64, ExprError> {
        Ok(match &*self.0 {
            Node::Const(c) => *c,
            Node::Var => x,
            Node::Add(l, r) => l.eval(x)? + r.eval(x)?,
            Node::Sum(ts) => {
                let mut acc = 0.0;
                for t in ts {
                    acc += t.eval(x)?;
                }
                acc
            }
            Node::Mul(l, r) => l.eval(x)? * r.eval(x)?,
            Node::Neg(e) => -e.eval(x)?,
            Node::Abs(e) => e.eval(x)?.abs(),
            Node::Min(l, r) => l.eval(x)?.min(r.eval(x)?),
            Node::Max(l, r) => l.eval(x)?.max(r.eval(x)?),
            Node::Clamp(e, m) => e.eval(x)?.clamp(-m, *m),
            Node::RecipShifted(e, n) => 1.0 / (e.eval(x)?.abs() + 1.0 / *n as f64),
            Node::DistToSet(region) => region.distance(x),
            Node::ReciprocalRamp { f, n } => {
                let v = f.eval(x)?;
                let n = *n as f64;
                if v <= 1.0 / n {
                    n * n * v
                } else {
                    1.0 / v
                }
            }
            Node::Compose(g, e) => g.apply(e.eval(x)?)?,
        })
    }

    /// Conservative enclosure of the values taken on `[lo, hi]`, or `None`
    /// when some node has no usable enclosure there.
    pub fn range_on(&self, lo: f64, hi: f64) -> Option<(f64, f64)> {
        enclose(self, Iv::new(lo, hi)).map(|iv| (iv.lo, iv.hi))
    }

    /// Certified `(min, max)` of the expression over a whole domain.
    ///
    /// Finite domains are enumerated exactly. Continuum pieces are cut into
    /// `pieces` subintervals and enclosed with interval arithmetic.
    pub fn certified_range(&self, domain: &Domain, pieces: usize) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (a, b) in domain.pieces() {
            if a == b {
                let v = self.eval(a).ok()?;
                lo = lo.min(v);
                hi = hi.max(v);
                continue;
            }
            let w = (b - a) / pieces as f64;
            for i in 0..pieces {
                let s = a + w * i as f64;
                let t = if i + 1 == pieces { b } else { a + w * (i + 1) as f64 };
                let (l, h) = self.range_on(s, t)?;
                lo = lo.min(l);
                hi = hi.max(h);
            }
        }
        (lo.is_finite() && hi.is_finite()).then_some((lo, hi))
    }
}

impl ops::Add for ContinuousExpr {
    type Output = ContinuousExpr;
    fn add(self, rhs: Self) -> Self {
        Self::wrap(Node::Add(self, rhs))
    }
}

impl ops::Sub for ContinuousExpr {
    type Output = ContinuousExpr;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl ops::Mul for ContinuousExpr {
    type Output = ContinuousExpr;
    fn mul(self, rhs: Self) -> Self {
        Self::wrap(Node::Mul(self, rhs))
    }
}

impl ops::Neg for ContinuousExpr {
    type Output = ContinuousExpr;
    fn neg(self) -> Self {
        Self::wrap(Node::Neg(self))
    }
}

impl fmt::Display for ContinuousExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Node::Const(c) => write!(f, "{c}"),
            Node::Var => write!(f, "x"),
            Node::Add(l, r) => write!(f, "({l} + {r})"),
            Node::Sum(ts) => {
                write!(f, "sum(")?;
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")
            }
            Node::Mul(l, r) => write!(f, "({l} * {r})"),
            Node::Neg(e) => write!(f, "-{e}"),
            Node::Abs(e) => write!(f, "|{e}|"),
            Node::Min(l, r) => write!(f, "min({l}, {r})"),
            Node::Max(l, r) => write!(f, "max({l}, {r})"),
            Node::Clamp(e, m) => write!(f, "clamp({e}, {m})"),
            Node::RecipShifted(e, n) => write!(f, "1/(|{e}| + 1/{n})"),
            Node::DistToSet(_) => write!(f, "dist(x, S)"),
            Node::ReciprocalRamp { f: g, n } => write!(f, "ramp{n}({g})"),
            Node::Compose(g, e) => write!(f, "{g:?}({e})"),
        }
    }
}

/// Evaluate `e` at `x`, refusing points outside `domain`.
pub fn eval_cont(e: &ContinuousExpr, domain: &Domain, x: f64) -> Result<f64, ExprError> {
    if !domain.contains(x) {
        return Err(ExprError::OutsideDomain { x });
    }
    e.eval(x)
}

/// Saturate `g` into `[-m, m]`.
pub fn clamp_expr(g: &ContinuousExpr, m: f64) -> Result<ContinuousExpr, ExprError> {
    if !(m.is_finite() && m > 0.0) {
        return Err(ExprError::NonPositiveBound(m));
    }
    Ok(ContinuousExpr::wrap(Node::Clamp(g.clone(), m)))
}

/// The continuous ramp `n^2 f` below `f = 1/n` and `1/f` above it.
///
/// `f` must take values in `[0, 1]` at every sample of `domain`. The ramps
/// converge pointwise to `0` on the zero set of `f` and to `1/f` elsewhere.
pub fn reciprocal_ramp(
    f: &ContinuousExpr,
    n: u64,
    domain: &Domain,
) -> Result<ContinuousExpr, ExprError> {
    if n == 0 {
        return Err(ExprError::ZeroIndex);
    }
    for x in domain.samples() {
        let v = f.eval(x)?;
        if !(-1e-12..=1.0 + 1e-12).contains(&v) {
            return Err(ExprError::RangeViolation { x, value: v, lo: 0.0, hi: 1.0 });
        }
    }
    Ok(ContinuousExpr::wrap(Node::ReciprocalRamp { f: f.clone(), n }))
}

/// Smallest distance between a sample of `a` and a sample of `b`.
pub fn sample_gap(a: &[f64], b: &[f64]) -> f64 {
    let mut sorted = b.to_vec();
    sorted.sort_by(f64::total_cmp);
    a.iter()
        .map(|&p| {
            let i = sorted.partition_point(|&q| q < p);
            let right = sorted.get(i).map_or(f64::INFINITY, |q| q - p);
            let left = if i > 0 { p - sorted[i - 1] } else { f64::INFINITY };
            left.min(right)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Distance-based separator: `-r` on `a`, `r` on `b`, values in `[-r, r]`.
///
/// `r (d(x,a) - d(x,b)) / (d(x,a) + d(x,b))`. When either set is empty the
/// zero constant is returned.
pub fn urysohn_separator(
    a: &SampledSet,
    b: &SampledSet,
    r: f64,
) -> Result<ContinuousExpr, ExprError> {
    if !(r.is_finite() && r > 0.0) {
        return Err(ExprError::NonPositiveBound(r));
    }
    if a.is_empty() || b.is_empty() {
        return Ok(ContinuousExpr::constant(0.0));
    }
    let gap = sample_gap(a.samples(), b.samples());
    if gap <= crate::domain::POINT_TOL {
        return Err(ExprError::TouchingSets { gap });
    }
    let da = ContinuousExpr::dist_to(Region::points(a.samples().to_vec())?);
    let db = ContinuousExpr::dist_to(Region::points(b.samples().to_vec())?);
    // d(x,a) + d(x,b) >= gap everywhere on the line
    let denom = (da.clone() + db.clone()).compose(StdFn::ReciprocalNonzero(Certificate::Declared(gap)));
    Ok(ContinuousExpr::constant(r) * ((da - db) * denom))
}

#[derive(Debug, Clone, Copy)]
struct Iv {
    lo: f64,
    hi: f64,
}

impl Iv {
    fn new(lo: f64, hi: f64) -> Self {
        Iv { lo, hi }
    }

    fn point(v: f64) -> Self {
        Iv { lo: v, hi: v }
    }

    /// Outward rounding by a few ulps.
    fn widen(self) -> Option<Self> {
        let pad = |v: f64| 4.0 * f64::EPSILON * v.abs() + f64::MIN_POSITIVE;
        let out = Iv { lo: self.lo - pad(self.lo), hi: self.hi + pad(self.hi) };
        (out.lo.is_finite() && out.hi.is_finite()).then_some(out)
    }

    fn abs(self) -> Self {
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            Iv::new(-self.hi, -self.lo)
        } else {
            Iv::new(0.0, self.hi.max(-self.lo))
        }
    }

    fn mul(self, o: Self) -> Self {
        let p = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        Iv::new(
            p.iter().copied().fold(f64::INFINITY, f64::min),
            p.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )
    }
}

fn enclose(e: &ContinuousExpr, x: Iv) -> Option<Iv> {
    let out = match e.node() {
        Node::Const(c) => Iv::point(*c),
        Node::Var => x,
        Node::Add(l, r) => {
            let (a, b) = (enclose(l, x)?, enclose(r, x)?);
            Iv::new(a.lo + b.lo, a.hi + b.hi)
        }
        Node::Sum(ts) => {
            let mut acc = Iv::point(0.0);
            for t in ts {
                let b = enclose(t, x)?;
                acc = Iv::new(acc.lo + b.lo, acc.hi + b.hi);
            }
            acc
        }
        Node::Mul(l, r) => enclose(l, x)?.mul(enclose(r, x)?),
        Node::Neg(e) => {
            let a = enclose(e, x)?;
            Iv::new(-a.hi, -a.lo)
        }
        Node::Abs(e) => enclose(e, x)?.abs(),
        Node::Min(l, r) => {
            let (a, b) = (enclose(l, x)?, enclose(r, x)?);
            Iv::new(a.lo.min(b.lo), a.hi.min(b.hi))
        }
        Node::Max(l, r) => {
            let (a, b) = (enclose(l, x)?, enclose(r, x)?);
            Iv::new(a.lo.max(b.lo), a.hi.max(b.hi))
        }
        Node::Clamp(e, m) => {
            let a = enclose(e, x)?;
            Iv::new(a.lo.clamp(-m, *m), a.hi.clamp(-m, *m))
        }
        Node::RecipShifted(e, n) => {
            let a = enclose(e, x)?.abs();
            let s = 1.0 / *n as f64;
            Iv::new(1.0 / (a.hi + s), 1.0 / (a.lo + s))
        }
        Node::DistToSet(region) => {
            // 1-Lipschitz
            let mid = 0.5 * (x.lo + x.hi);
            let half = 0.5 * (x.hi - x.lo);
            let d = region.distance(mid);
            Iv::new((d - half).max(0.0), d + half)
        }
        Node::ReciprocalRamp { f, n } => {
            let a = enclose(f, x)?;
            let n = *n as f64;
            let knee = 1.0 / n;
            if a.hi <= knee {
                Iv::new(n * n * a.lo, n * n * a.hi)
            } else if a.lo >= knee {
                Iv::new(1.0 / a.hi, 1.0 / a.lo)
            } else {
                Iv::new((n * n * a.lo).min(1.0 / a.hi), n)
            }
        }
        Node::Compose(g, e) => {
            let a = enclose(e, x)?;
            match *g {
                StdFn::Arctan => Iv::new(a.lo.atan(), a.hi.atan()),
                StdFn::TanRestricted => {
                    if a.lo <= -FRAC_PI_2 || a.hi >= FRAC_PI_2 {
                        return None;
                    }
                    Iv::new(a.lo.tan(), a.hi.tan())
                }
                StdFn::Affine { a: s, b } => {
                    let (p, q) = (s * a.lo + b, s * a.hi + b);
                    Iv::new(p.min(q), p.max(q))
                }
                StdFn::Power(k) => {
                    if k == 0 {
                        Iv::point(1.0)
                    } else if k % 2 == 1 {
                        Iv::new(powu(a.lo, k), powu(a.hi, k))
                    } else {
                        let m = a.abs();
                        Iv::new(powu(m.lo, k), powu(m.hi, k))
                    }
                }
                StdFn::ReciprocalNonzero(_) => {
                    if a.lo > 0.0 || a.hi < 0.0 {
                        Iv::new(1.0 / a.hi, 1.0 / a.lo)
                    } else {
                        return None;
                    }
                }
            }
        }
    };
    out.widen()
}

//! Sampled zero sets and the zero-set algebra.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::baire::{
    abs, add, compose_continuous, join, meet, mul, neg, reciprocal_positive_with, series_sum_with,
    BaireSeq, EvalConfig, Family, SeqError, SeriesBounds,
};
use crate::continuous::StdFn;
use crate::domain::{Domain, DomainError, POINT_TOL};

pub const DEFAULT_EPS: f64 = 1e-9;
/// Number of factors checked directly when verifying a countable intersection.
pub const N_INTER: u64 = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZeroSetError {
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("eps must be positive, got {0}")]
    BadEps(f64),
    #[error("need r < s, got r = {r}, s = {s}")]
    BadRange { r: f64, s: f64 },
    #[error("zero sets are not disjoint at sample resolution: {0}")]
    NotDisjoint(String),
    #[error("witness takes {value} at x = {x}, expected {expected}")]
    WitnessViolated { x: f64, value: f64, expected: String },
}

type Predicate = Arc<dyn Fn(f64) -> bool + Send + Sync>;

/// A subset of a domain known through its member samples.
///
/// `excluded` lists samples whose membership could not be decided (the
/// limit evaluation never stabilized). `eps = 0` marks exact sets.
#[derive(Clone, Serialize)]
pub struct SampledSet {
    domain: Domain,
    eps: f64,
    samples: Vec<f64>,
    excluded: Vec<f64>,
    #[serde(skip)]
    predicate: Option<Predicate>,
}

impl fmt::Debug for SampledSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SampledSet")
            .field("domain", &self.domain.to_string())
            .field("eps", &self.eps)
            .field("samples", &self.samples)
            .field("excluded", &self.excluded)
            .finish()
    }
}

impl PartialEq for SampledSet {
    fn eq(&self, other: &Self) -> bool {
        self.domain == other.domain
            && self.eps == other.eps
            && self.samples == other.samples
            && self.excluded == other.excluded
    }
}

impl SampledSet {
    /// An exact set given by its points, all of which must lie in `domain`.
    pub fn from_points(domain: &Domain, mut points: Vec<f64>) -> Result<Self, DomainError> {
        for &p in &points {
            if !domain.contains(p) {
                return Err(DomainError::SampleOutside(p));
            }
        }
        points.sort_by(f64::total_cmp);
        points.dedup_by(|a, b| (*a - *b).abs() <= POINT_TOL);
        Ok(SampledSet { domain: domain.clone(), eps: 0.0, samples: points, excluded: Vec::new(), predicate: None })
    }

    pub fn empty(domain: &Domain) -> Self {
        SampledSet { domain: domain.clone(), eps: 0.0, samples: Vec::new(), excluded: Vec::new(), predicate: None }
    }

    /// The samples of `domain` satisfying `pred`.
    pub fn from_predicate(
        domain: &Domain,
        pred: impl Fn(f64) -> bool + Send + Sync + 'static,
    ) -> Self {
        let samples = domain.samples().into_iter().filter(|&x| pred(x)).collect();
        SampledSet {
            domain: domain.clone(),
            eps: 0.0,
            samples,
            excluded: Vec::new(),
            predicate: Some(Arc::new(pred)),
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn excluded(&self) -> &[f64] {
        &self.excluded
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Membership: the predicate when there is one, else the sample list.
    pub fn contains(&self, x: f64) -> bool {
        match &self.predicate {
            Some(p) => self.domain.contains(x) && p(x),
            None => self.samples.iter().any(|s| (s - x).abs() <= POINT_TOL),
        }
    }

    /// The same points regarded as a set in another domain.
    pub fn reembed(&self, domain: &Domain) -> Result<Self, DomainError> {
        let mut s = SampledSet::from_points(domain, self.samples.clone())?;
        s.eps = self.eps;
        Ok(s)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("sampled sets serialize")
    }

    /// Members of `self` missing from `other` and vice versa, ignoring
    /// points excluded by either.
    pub fn difference(&self, other: &SampledSet) -> Vec<f64> {
        let skip = |x: f64| {
            self.excluded.iter().chain(&other.excluded).any(|e| (e - x).abs() <= POINT_TOL)
        };
        let has = |set: &[f64], x: f64| set.iter().any(|s| (s - x).abs() <= POINT_TOL);
        let mut out: Vec<f64> = self
            .samples
            .iter()
            .filter(|&&x| !has(&other.samples, x))
            .chain(other.samples.iter().filter(|&&x| !has(&self.samples, x)))
            .copied()
            .filter(|&x| !skip(x))
            .collect();
        out.sort_by(f64::total_cmp);
        out
    }

    fn combine(&self, other: &SampledSet, keep_both: bool) -> SampledSet {
        let has = |set: &[f64], x: f64| set.iter().any(|s| (s - x).abs() <= POINT_TOL);
        let mut samples: Vec<f64> = if keep_both {
            self.samples.iter().copied().filter(|&x| has(&other.samples, x)).collect()
        } else {
            self.samples.iter().chain(&other.samples).copied().collect()
        };
        samples.sort_by(f64::total_cmp);
        samples.dedup_by(|a, b| (*a - *b).abs() <= POINT_TOL);
        let mut excluded: Vec<f64> = self.excluded.iter().chain(&other.excluded).copied().collect();
        excluded.sort_by(f64::total_cmp);
        excluded.dedup();
        SampledSet {
            domain: self.domain.clone(),
            eps: self.eps.max(other.eps),
            samples,
            excluded,
            predicate: None,
        }
    }

    pub fn union(&self, other: &SampledSet) -> SampledSet {
        self.combine(other, false)
    }

    pub fn intersection(&self, other: &SampledSet) -> SampledSet {
        self.combine(other, true)
    }
}

/// `{x : |f(x)| <= eps}` over the samples of `f`'s domain.
pub fn zero_set(f: &BaireSeq, eps: f64) -> Result<SampledSet, ZeroSetError> {
    zero_set_with(f, eps, &EvalConfig::default())
}

pub fn zero_set_with(f: &BaireSeq, eps: f64, cfg: &EvalConfig) -> Result<SampledSet, ZeroSetError> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(ZeroSetError::BadEps(eps));
    }
    let verdicts: Vec<(f64, Option<bool>)> = f
        .domain()
        .samples()
        .into_par_iter()
        .map(|x| {
            let (v, rep) = f.eval_limit_with(x, eps / 10.0, cfg)?;
            Ok((x, rep.stable.then_some(v.abs() <= eps)))
        })
        .collect::<Result<_, SeqError>>()?;
    let mut samples = Vec::new();
    let mut excluded = Vec::new();
    for (x, v) in verdicts {
        match v {
            Some(true) => samples.push(x),
            Some(false) => {}
            None => excluded.push(x),
        }
    }
    let g = f.clone();
    let c = *cfg;
    Ok(SampledSet {
        domain: f.domain().clone(),
        eps,
        samples,
        excluded,
        predicate: Some(Arc::new(move |x| {
            matches!(g.eval_limit_with(x, eps / 10.0, &c), Ok((v, rep)) if rep.stable && v.abs() <= eps)
        })),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub pass: bool,
    pub offending: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroIdentityReport {
    pub eps: f64,
    pub checks: Vec<IdentityCheck>,
}

impl ZeroIdentityReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn identity(name: String, a: &SampledSet, b: &SampledSet) -> IdentityCheck {
    let offending = a.difference(b);
    IdentityCheck { name, pass: offending.is_empty(), offending }
}

/// Check `Z(f) u Z(g) = Z(fg)`, `Z(f) n Z(g) = Z(f^2 + g^2) = Z(|f| + |g|)`
/// and `Z(f) = Z(|f|) = Z(f^k)` for each `k` in `powers`, on samples.
pub fn check_zero_identities(
    f: &BaireSeq,
    g: &BaireSeq,
    eps: f64,
    powers: &[u64],
) -> Result<ZeroIdentityReport, ZeroSetError> {
    check_zero_identities_with(f, g, eps, powers, &EvalConfig::default())
}

pub fn check_zero_identities_with(
    f: &BaireSeq,
    g: &BaireSeq,
    eps: f64,
    powers: &[u64],
    cfg: &EvalConfig,
) -> Result<ZeroIdentityReport, ZeroSetError> {
    let zf = zero_set_with(f, eps, cfg)?;
    let zg = zero_set_with(g, eps, cfg)?;
    let union = zf.union(&zg);
    let inter = zf.intersection(&zg);
    let z = |h: &BaireSeq| zero_set_with(h, eps, cfg);
    let mut checks = vec![
        identity("Z(f) u Z(g) = Z(f*g)".into(), &union, &z(&mul(f, g)?)?),
        identity(
            "Z(f) n Z(g) = Z(f^2+g^2)".into(),
            &inter,
            &z(&add(&compose_continuous(StdFn::Power(2), f)?, &compose_continuous(StdFn::Power(2), g)?)?)?,
        ),
        identity("Z(f) n Z(g) = Z(|f|+|g|)".into(), &inter, &z(&add(&abs(f), &abs(g))?)?),
        identity("Z(f) = Z(|f|)".into(), &zf, &z(&abs(f))?),
        identity("Z(g) = Z(|g|)".into(), &zg, &z(&abs(g))?),
    ];
    for &k in powers {
        checks.push(identity(
            format!("Z(f) = Z(f^{k})"),
            &zf,
            &z(&compose_continuous(StdFn::Power(k), f)?)?,
        ));
        checks.push(identity(
            format!("Z(g) = Z(g^{k})"),
            &zg,
            &z(&compose_continuous(StdFn::Power(k), g)?)?,
        ));
    }
    Ok(ZeroIdentityReport { eps, checks })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LevelDirection {
    /// Zero exactly where `f >= r`.
    AtLeast,
    /// Zero exactly where `f <= r`.
    AtMost,
}

/// A function whose zero set is the level set `{f >= r}` or `{f <= r}`:
/// `(f - r) - |f - r|` or `(f - r) + |f - r|` respectively.
pub fn level_zero_witness(
    f: &BaireSeq,
    r: f64,
    direction: LevelDirection,
) -> Result<BaireSeq, ZeroSetError> {
    let shifted = compose_continuous(StdFn::Affine { a: 1.0, b: -r }, f)?;
    let folded = match direction {
        LevelDirection::AtLeast => add(&shifted, &neg(&abs(&shifted)))?,
        LevelDirection::AtMost => add(&shifted, &abs(&shifted))?,
    };
    Ok(folded)
}

/// `g = sum_n (|f_n| ^ 2^-n)`, whose zero set is the intersection of the
/// zero sets of the `f_n`.
pub fn countable_intersection(domain: &Domain, fs: Family) -> Result<BaireSeq, ZeroSetError> {
    countable_intersection_with(domain, fs, &EvalConfig::default())
}

pub fn countable_intersection_with(
    domain: &Domain,
    fs: Family,
    cfg: &EvalConfig,
) -> Result<BaireSeq, ZeroSetError> {
    let d = domain.clone();
    let members = fs.map(move |n, f| {
        let cap = 0.5f64.powi(n.min(1074) as i32);
        let c = BaireSeq::constant(d.clone(), cap);
        Ok(meet(&abs(&f.restrict(d.clone())), &c)?.with_bound(Some(cap)))
    });
    Ok(series_sum_with(domain, members, SeriesBounds::geometric(1.0, 0.5), cfg)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntersectionReport {
    pub zero_set: SampledSet,
    pub depth: u64,
    pub disagreements: Vec<f64>,
}

/// Compare `Z(g)` against direct membership in `Z(f_1), ..., Z(f_depth)`.
pub fn verify_countable_intersection(
    g: &BaireSeq,
    fs: &Family,
    eps: f64,
    depth: u64,
    cfg: &EvalConfig,
) -> Result<IntersectionReport, ZeroSetError> {
    let zg = zero_set_with(g, eps, cfg)?;
    let depth = fs.len().map_or(depth, |l| l.min(depth));
    let mut factors = Vec::with_capacity(depth as usize);
    for n in 1..=depth {
        factors.push(zero_set_with(&fs.get(n)?.restrict(g.domain().clone()), eps, cfg)?);
    }
    let mut disagreements = Vec::new();
    for x in g.domain().samples() {
        if zg.excluded.contains(&x) || factors.iter().any(|z| z.excluded.contains(&x)) {
            continue;
        }
        let direct = factors.iter().all(|z| z.samples.contains(&x));
        let built = zg.samples.contains(&x);
        if direct != built {
            disagreements.push(x);
        }
    }
    Ok(IntersectionReport { zero_set: zg, depth, disagreements })
}

/// `h` equal to `low_val` on `low_set`, `high_val` on `high_set`, and
/// between the two everywhere.
#[derive(Debug, Clone)]
pub struct SeparationWitness {
    pub h: BaireSeq,
    pub low_set: SampledSet,
    pub high_set: SampledSet,
    pub low_val: f64,
    pub high_val: f64,
}

impl SeparationWitness {
    /// Check the witness clauses at every sample within `tol`.
    pub fn verify(&self, tol: f64, cfg: &EvalConfig) -> Result<(), ZeroSetError> {
        let (r, s) = (self.low_val, self.high_val);
        for x in self.h.domain().samples() {
            let (v, _) = self.h.eval_limit_with(x, tol / 10.0, cfg)?;
            if v < r - tol || v > s + tol {
                return Err(ZeroSetError::WitnessViolated { x, value: v, expected: format!("[{r}, {s}]") });
            }
            if self.low_set.contains(x) && (v - r).abs() > tol {
                return Err(ZeroSetError::WitnessViolated { x, value: v, expected: r.to_string() });
            }
            if self.high_set.contains(x) && (v - s).abs() > tol {
                return Err(ZeroSetError::WitnessViolated { x, value: v, expected: s.to_string() });
            }
        }
        Ok(())
    }
}

/// `h = |f| / (|f| + |g|)`: `0` on `Z(f)`, `1` on `Z(g)`.
///
/// `delta` is a lower bound for `|f| + |g|`; without it the bound is
/// certified or sampled (see [`reciprocal_positive_with`]).
pub fn separation_witness(
    f: &BaireSeq,
    g: &BaireSeq,
    delta: Option<f64>,
    eps: f64,
) -> Result<SeparationWitness, ZeroSetError> {
    separation_witness_with(f, g, delta, eps, &EvalConfig::default())
}

pub fn separation_witness_with(
    f: &BaireSeq,
    g: &BaireSeq,
    delta: Option<f64>,
    eps: f64,
    cfg: &EvalConfig,
) -> Result<SeparationWitness, ZeroSetError> {
    let af = abs(f);
    let denom = add(&af, &abs(g))?;
    let recip = reciprocal_positive_with(&denom, delta, cfg).map_err(|e| match e {
        SeqError::NotPositive { x, value } => {
            ZeroSetError::NotDisjoint(format!("|f|+|g| = {value:e} at x = {x}"))
        }
        other => other.into(),
    })?;
    let h = mul(&af, &recip)?.with_bound(Some(1.0));
    let low_set = zero_set_with(f, eps, cfg)?;
    let high_set = zero_set_with(g, eps, cfg)?;
    let both = low_set.intersection(&high_set);
    if !both.is_empty() {
        return Err(ZeroSetError::NotDisjoint(format!("common zeros {:?}", both.samples())));
    }
    Ok(SeparationWitness { h, low_set, high_set, low_val: 0.0, high_val: 1.0 })
}

/// `((r v g) ^ s - r) / (s - r)`: clamp into `[r, s]`, then map onto `[0, 1]`.
pub fn normalize_separation(g: &BaireSeq, r: f64, s: f64) -> Result<BaireSeq, ZeroSetError> {
    if !r.is_finite() || !s.is_finite() || r >= s {
        return Err(ZeroSetError::BadRange { r, s });
    }
    let d = g.domain().clone();
    let clamped = meet(&join(&BaireSeq::constant(d.clone(), r), g)?, &BaireSeq::constant(d, s))?;
    let w = s - r;
    Ok(compose_continuous(StdFn::Affine { a: 1.0 / w, b: -r / w }, &clamped)?.with_bound(Some(1.0)))
}

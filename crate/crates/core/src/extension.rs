//! Extending Baire-one functions from a sampled subset `Y` to the whole
//! space `X`.
//!
//! [`extend_bounded`] runs the geometric separation loop: at round `n` with
//! `r_n = (m/2)(2/3)^n`, the residual's low and high parts
//! `A_n = {f_n <= -r_n}`, `B_n = {f_n >= r_n}` are separated by `g_n` with
//! values in `[-r_n, r_n]`, and `f_{n+1} = f_n - g_n` on `Y` satisfies
//! `|f_{n+1}| <= 2 r_n = 3 r_{n+1}`. The extension is `sum g_n`.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::baire::{
    abs, add, compose_continuous, join, meet, mul, reciprocal_positive_with, series_sum_with,
    BaireSeq, EvalConfig, Family, Modulus, SeqError, SeriesBounds,
};
use crate::continuous::{urysohn_separator, ContinuousExpr, ExprError, StdFn};
use crate::domain::{Domain, DomainError};
use crate::zero_sets::{
    level_zero_witness, normalize_separation, zero_set_with, LevelDirection, SampledSet,
    SeparationWitness, ZeroSetError,
};

pub const DEFAULT_ROUNDS: u64 = 40;
/// Slack when thresholding residuals against `r_n`.
const THRESHOLD_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtensionError {
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error(transparent)]
    ZeroSet(#[from] ZeroSetError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("round {round}: oracle failed: {reason}")]
    OracleFailed { round: u64, reason: String },
    #[error("round {round}: separator takes {value} at x = {x}, expected {expected}")]
    OracleOutput { round: u64, x: f64, value: f64, expected: String },
    #[error("round {round}: sup |f_n| = {sup} exceeds {bound}")]
    Invariant { round: u64, sup: f64, bound: f64 },
    #[error("limit of f at y = {y} did not stabilize")]
    Unstable { y: f64 },
    #[error("bound m = {m} is smaller than sup |f| = {sup} on Y")]
    BoundTooSmall { m: f64, sup: f64 },
    #[error("point {y} of Y is outside the domain of f")]
    NotOnY { y: f64 },
    #[error("Y is empty")]
    EmptyY,
    #[error("level set meets Y at x = {x}")]
    ZeroSetMeetsY { x: f64 },
    #[error("the metric oracle needs a metric domain")]
    NotMetric,
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
}

/// Produces a Baire-one function on `x` equal to `-r` on `a`, `r` on `b`,
/// with values in `[-r, r]`. Either set may be empty, not both.
pub trait SeparationOracle: Send + Sync {
    fn separate(
        &self,
        a: &SampledSet,
        b: &SampledSet,
        r: f64,
        x: &Domain,
    ) -> Result<BaireSeq, ExtensionError>;
}

/// Distance-based separator for metric domains. One-sided requests are
/// answered with the constant `-r` or `r`.
#[derive(Debug, Clone, Copy, Default)]
pub struct MetricOracle;

impl SeparationOracle for MetricOracle {
    fn separate(
        &self,
        a: &SampledSet,
        b: &SampledSet,
        r: f64,
        x: &Domain,
    ) -> Result<BaireSeq, ExtensionError> {
        if !x.is_metric() {
            return Err(ExtensionError::NotMetric);
        }
        let e = match (a.is_empty(), b.is_empty()) {
            (false, false) => urysohn_separator(a, b, r)?,
            (true, false) => ContinuousExpr::constant(r),
            (false, true) => ContinuousExpr::constant(-r),
            (true, true) => ContinuousExpr::constant(0.0),
        };
        Ok(BaireSeq::from_sequence(x.clone(), move |_| e.clone(), Some(Modulus::Exact(1)), Some(r)))
    }
}

type OracleFn =
    dyn Fn(&SampledSet, &SampledSet, f64, &Domain) -> Result<BaireSeq, ExtensionError> + Send + Sync;

/// An oracle given by a closure.
#[derive(Clone)]
pub struct FnOracle(Arc<OracleFn>);

impl FnOracle {
    pub fn new(
        f: impl Fn(&SampledSet, &SampledSet, f64, &Domain) -> Result<BaireSeq, ExtensionError>
            + Send
            + Sync
            + 'static,
    ) -> Self {
        FnOracle(Arc::new(f))
    }
}

impl SeparationOracle for FnOracle {
    fn separate(
        &self,
        a: &SampledSet,
        b: &SampledSet,
        r: f64,
        x: &Domain,
    ) -> Result<BaireSeq, ExtensionError> {
        (self.0)(a, b, r, x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtensionConfig {
    pub rounds: u64,
    /// Slack for the per-round checks and evaluation tolerance.
    pub tol: f64,
    /// Bound on `|f|` over `Y`; defaults to the declared bound of `f`.
    pub m: Option<f64>,
    pub eps: f64,
    pub eval: EvalConfig,
}

impl Default for ExtensionConfig {
    fn default() -> Self {
        ExtensionConfig {
            rounds: DEFAULT_ROUNDS,
            tol: 1e-6,
            m: None,
            eps: 1e-9,
            eval: EvalConfig::default(),
        }
    }
}

/// One line of the extension trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub n: u64,
    pub r_n: f64,
    pub a_n: usize,
    pub b_n: usize,
    /// `sup |f_n|` over `Y` at the start of the round.
    pub sup_residual: f64,
}

#[derive(Debug, Clone)]
pub struct ExtensionState {
    pub round: u64,
    pub m: f64,
    pub r_n: f64,
    /// `r_1, r_2, ...` as used.
    pub radii: Vec<f64>,
    /// Values of the current residual at the `Y` samples.
    pub residual: Vec<f64>,
    pub g_list: Vec<BaireSeq>,
    pub history: Vec<RoundRecord>,
}

impl ExtensionState {
    fn new(m: f64, residual: Vec<f64>) -> Self {
        ExtensionState {
            round: 0,
            m,
            r_n: m / 2.0,
            radii: Vec::new(),
            residual,
            g_list: Vec::new(),
            history: Vec::new(),
        }
    }

    pub fn sup_residual(&self) -> f64 {
        self.residual.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// `3 r_{N+1}`, the guaranteed distance to `f` on `Y` after `N` rounds.
    pub fn final_bound(&self) -> f64 {
        2.0 * self.radii.last().copied().unwrap_or(self.m / 2.0)
    }

    pub fn trace_json(&self) -> serde_json::Value {
        serde_json::json!({
            "m": self.m,
            "rounds": self.history,
            "final_sup_residual": self.sup_residual(),
            "final_bound": self.final_bound(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct Extension {
    pub g: BaireSeq,
    pub state: ExtensionState,
}

fn limits_at(f: &BaireSeq, pts: &[f64], tol: f64, cfg: &EvalConfig) -> Result<Vec<f64>, ExtensionError> {
    pts.par_iter()
        .map(|&y| {
            let (v, rep) = f.eval_limit_with(y, tol, cfg)?;
            if rep.stable {
                Ok(v)
            } else {
                Err(ExtensionError::Unstable { y })
            }
        })
        .collect()
}

/// Smallest round count `N` with `3 r_{N+1} <= tol`.
pub fn solve_rounds(m: f64, tol: f64) -> Result<u64, ExtensionError> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(ExtensionError::BadTolerance(tol));
    }
    let mut r = m / 2.0 * (2.0 / 3.0);
    let mut n = 1u64;
    while 2.0 * r > tol {
        r *= 2.0 / 3.0;
        n += 1;
    }
    Ok(n)
}

/// Extend `f`, a bounded Baire-one function whose domain contains the
/// samples of `y`, to all of `x`.
pub fn extend_bounded(
    f: &BaireSeq,
    y: &SampledSet,
    x: &Domain,
    oracle: &dyn SeparationOracle,
    cfg: &ExtensionConfig,
) -> Result<Extension, ExtensionError> {
    if y.is_empty() {
        return Err(ExtensionError::EmptyY);
    }
    let ys = y.samples().to_vec();
    if let Some(&bad) = ys.iter().find(|&&p| !f.domain().contains(p) || !x.contains(p)) {
        return Err(ExtensionError::NotOnY { y: bad });
    }
    let values = limits_at(f, &ys, cfg.tol / 10.0, &cfg.eval)?;
    let sup = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let m = match cfg.m.or(f.bound().filter(|&b| b > 0.0)) {
        Some(m) => m,
        None if sup > 0.0 => sup,
        None => 1.0,
    };
    if !(m.is_finite() && m > 0.0) || sup > m + cfg.tol {
        return Err(ExtensionError::BoundTooSmall { m, sup });
    }

    let mut xs = x.samples();
    xs.extend_from_slice(&ys);
    let mut st = ExtensionState::new(m, values);
    for n in 1..=cfg.rounds {
        let r = st.r_n * (2.0 / 3.0);
        let before = st.sup_residual();
        if before > 3.0 * r + cfg.tol {
            return Err(ExtensionError::Invariant { round: n, sup: before, bound: 3.0 * r });
        }
        let low: Vec<f64> = ys
            .iter()
            .zip(&st.residual)
            .filter(|(_, &v)| v <= -r + THRESHOLD_TOL)
            .map(|(&p, _)| p)
            .collect();
        let high: Vec<f64> = ys
            .iter()
            .zip(&st.residual)
            .filter(|(_, &v)| v >= r - THRESHOLD_TOL)
            .map(|(&p, _)| p)
            .collect();
        let g = if low.is_empty() && high.is_empty() {
            BaireSeq::constant(x.clone(), 0.0).with_bound(Some(r))
        } else {
            let a = SampledSet::from_points(x, low.clone())?;
            let b = SampledSet::from_points(x, high.clone())?;
            let g = oracle
                .separate(&a, &b, r, x)
                .map_err(|e| ExtensionError::OracleFailed { round: n, reason: e.to_string() })?;
            check_separator(&g, &a, &b, r, &xs, n, cfg)?;
            g.with_bound(Some(r))
        };
        let gy = limits_at(&g, &ys, cfg.tol / 10.0, &cfg.eval)?;
        for (v, d) in st.residual.iter_mut().zip(&gy) {
            *v -= d;
        }
        let after = st.sup_residual();
        if after > 2.0 * r + cfg.tol {
            return Err(ExtensionError::Invariant { round: n, sup: after, bound: 2.0 * r });
        }
        st.history.push(RoundRecord { n, r_n: r, a_n: low.len(), b_n: high.len(), sup_residual: before });
        st.g_list.push(g);
        st.radii.push(r);
        st.r_n = r;
        st.round = n;
    }

    let radii = Arc::new(st.radii.clone());
    let r1 = m / 3.0;
    let rk = move |k: u64| radii.get((k as usize).wrapping_sub(1)).copied().unwrap_or(r1 * (2.0f64 / 3.0).powi(k as i32 - 1));
    let rk2 = rk.clone();
    let bounds = SeriesBounds::new(rk).with_tail(move |k| 3.0 * rk2(k + 1));
    let g = if st.g_list.is_empty() {
        BaireSeq::constant(x.clone(), 0.0)
    } else {
        series_sum_with(x, Family::finite(st.g_list.clone()), bounds, &cfg.eval)?
    };
    Ok(Extension { g, state: st })
}

fn check_separator(
    g: &BaireSeq,
    a: &SampledSet,
    b: &SampledSet,
    r: f64,
    xs: &[f64],
    round: u64,
    cfg: &ExtensionConfig,
) -> Result<(), ExtensionError> {
    let bad = |x: f64, value: f64, expected: String| ExtensionError::OracleOutput { round, x, value, expected };
    let tol = cfg.tol;
    for &p in a.samples() {
        let v = g.eval_limit_with(p, tol / 10.0, &cfg.eval)?.0;
        if (v + r).abs() > tol {
            return Err(bad(p, v, (-r).to_string()));
        }
    }
    for &p in b.samples() {
        let v = g.eval_limit_with(p, tol / 10.0, &cfg.eval)?.0;
        if (v - r).abs() > tol {
            return Err(bad(p, v, r.to_string()));
        }
    }
    let values = limits_at(g, xs, tol / 10.0, &cfg.eval)?;
    for (&p, &v) in xs.iter().zip(&values) {
        if v.abs() > r + tol {
            return Err(bad(p, v, format!("[{}, {r}]", -r)));
        }
    }
    Ok(())
}

/// `(-n v g) ^ n`: bounded by `n` and equal to `g` wherever `|g| <= n`.
/// `n` must dominate `|f|` on the samples of `y`.
pub fn clamp_extension(
    g: &BaireSeq,
    f: &BaireSeq,
    y: &SampledSet,
    n: f64,
    cfg: &EvalConfig,
) -> Result<BaireSeq, ExtensionError> {
    let vals = limits_at(f, y.samples(), 1e-9, cfg)?;
    let sup = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if !(n.is_finite() && n > 0.0) || sup > n {
        return Err(ExtensionError::BoundTooSmall { m: n, sup });
    }
    let d = g.domain().clone();
    let lo = BaireSeq::constant(d.clone(), -n);
    let hi = BaireSeq::constant(d, n);
    Ok(meet(&join(&lo, g)?, &hi)?.with_bound(Some(n)))
}

#[derive(Debug, Clone)]
pub struct UnboundedExtension {
    pub h: BaireSeq,
    /// The extension of `arctan o f`.
    pub bounded: Extension,
    /// Where the bounded extension reaches `pi/2` in absolute value.
    pub z: SampledSet,
    /// Largest `|h - f|` seen on the samples of `Y`.
    pub max_deviation: f64,
}

/// Extend a possibly unbounded `f`: extend `arctan o f`, push the result
/// away from `+-pi/2` off `Y`, and apply `tan`.
pub fn extend_unbounded(
    f: &BaireSeq,
    y: &SampledSet,
    x: &Domain,
    oracle: &dyn SeparationOracle,
    cfg: &ExtensionConfig,
) -> Result<UnboundedExtension, ExtensionError> {
    let bent = compose_continuous(StdFn::Arctan, f)?;
    let bounded = extend_bounded(&bent, y, x, oracle, &ExtensionConfig { m: Some(FRAC_PI_2), ..*cfg })?;
    let (h, z) = tan_of_separated(&bounded.g, y, x, oracle, cfg)?;
    let fy = limits_at(f, y.samples(), cfg.tol / 10.0, &cfg.eval)?;
    let hy = limits_at(&h, y.samples(), cfg.tol / 10.0, &cfg.eval)?;
    let max_deviation = fy.iter().zip(&hy).fold(0.0f64, |a, (p, q)| a.max((p - q).abs()));
    Ok(UnboundedExtension { h, bounded, z, max_deviation })
}

/// `tan(g k)` where `k` is `0` on `Z = {|g| >= pi/2}` and `1` on `Y`.
pub fn tan_of_separated(
    g: &BaireSeq,
    y: &SampledSet,
    x: &Domain,
    oracle: &dyn SeparationOracle,
    cfg: &ExtensionConfig,
) -> Result<(BaireSeq, SampledSet), ExtensionError> {
    let witness = level_zero_witness(&abs(g), FRAC_PI_2, LevelDirection::AtLeast)?;
    let z = zero_set_with(&witness, cfg.eps, &cfg.eval)?;
    if let Some(&p) = z.samples().iter().find(|&&p| y.contains(p)) {
        return Err(ExtensionError::ZeroSetMeetsY { x: p });
    }
    let yx = y.reembed(x)?;
    let k = if z.is_empty() {
        BaireSeq::constant(x.clone(), 1.0)
    } else {
        let s = oracle.separate(&z, &yx, 0.5, x)?;
        add(&s, &BaireSeq::constant(x.clone(), 0.5))?.with_bound(Some(1.0))
    };
    let damped = mul(g, &k)?;
    Ok((compose_continuous(StdFn::TanRestricted, &damped)?, z))
}

/// A witness separating `Z(f)` from `Y` when `Y` can take extensions:
/// extend `1/|f|` from `Y` to `g` and take `|f| g`, clamped into `[0, 1]`.
pub fn separate_embedded_from_zeroset(
    y: &SampledSet,
    f: &BaireSeq,
    oracle: &dyn SeparationOracle,
    cfg: &ExtensionConfig,
) -> Result<SeparationWitness, ExtensionError> {
    let x = f.domain().clone();
    if y.is_empty() {
        return Err(ExtensionError::EmptyY);
    }
    let fy = limits_at(f, y.samples(), cfg.eps / 10.0, &cfg.eval)?;
    let mut floor = f64::INFINITY;
    for (&p, v) in y.samples().iter().zip(&fy) {
        if v.abs() <= cfg.eps {
            return Err(ExtensionError::ZeroSetMeetsY { x: p });
        }
        floor = floor.min(v.abs());
    }
    let ydom = Domain::finite_metric(y.samples().to_vec())?;
    let af = abs(f);
    let inv = reciprocal_positive_with(&af.restrict(ydom), Some(0.5 * floor), &cfg.eval)?;
    let ext = extend_unbounded(&inv, y, &x, oracle, cfg)?;
    let w = mul(&af, &ext.h)?;
    let h = normalize_separation(&w, 0.0, 1.0)?;
    Ok(SeparationWitness {
        h,
        low_set: zero_set_with(f, cfg.eps, &cfg.eval)?,
        high_set: y.reembed(&x)?,
        low_val: 0.0,
        high_val: 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Domain {
        Domain::interval(0.0, 1.0).unwrap()
    }

    fn two_point() -> (BaireSeq, SampledSet) {
        let ydom = Domain::finite_metric(vec![0.0, 1.0]).unwrap();
        let f = BaireSeq::continuous(ydom, ContinuousExpr::var());
        (f, SampledSet::from_points(&unit(), vec![0.0, 1.0]).unwrap())
    }

    #[test]
    fn two_point_extension() {
        let (f, y) = two_point();
        let ext = extend_bounded(&f, &y, &unit(), &MetricOracle, &ExtensionConfig::default()).unwrap();
        let r41 = 0.5 * (2.0f64 / 3.0).powi(41);
        for t in [0.0, 1.0] {
            let v = ext.g.eval_limit(t, 1e-9).unwrap().0;
            assert!((v - t).abs() <= 3.0 * r41 + 1e-6, "{v}");
        }
        assert_eq!(ext.state.history.len(), 40);
        for rec in &ext.state.history {
            assert!(rec.sup_residual <= 3.0 * rec.r_n + 1e-9);
        }
    }

    #[test]
    fn zero_function_extends_to_zero() {
        let ydom = Domain::finite_metric(vec![0.0, 1.0]).unwrap();
        let f = BaireSeq::constant(ydom, 0.0);
        let y = SampledSet::from_points(&unit(), vec![0.0, 1.0]).unwrap();
        let ext = extend_bounded(&f, &y, &unit(), &MetricOracle, &ExtensionConfig::default()).unwrap();
        assert!(ext.state.history.iter().all(|r| r.a_n == 0 && r.b_n == 0));
        for t in unit().samples() {
            assert_eq!(ext.g.eval_limit(t, 1e-9).unwrap().0, 0.0);
        }
    }

    #[test]
    fn radii_are_geometric() {
        let (f, y) = two_point();
        let ext = extend_bounded(&f, &y, &unit(), &MetricOracle, &ExtensionConfig::default()).unwrap();
        for w in ext.state.radii.windows(2) {
            assert_eq!(w[0] * (2.0 / 3.0), w[1]);
            assert!((2.0 * w[0] - 3.0 * w[1]).abs() <= 4.0 * f64::EPSILON * w[0]);
        }
    }

    #[test]
    fn bad_oracle_is_caught() {
        let (f, y) = two_point();
        let liar = FnOracle::new(|_, _, r, x| Ok(BaireSeq::constant(x.clone(), 2.0 * r)));
        let err = extend_bounded(&f, &y, &unit(), &liar, &ExtensionConfig::default()).unwrap_err();
        assert!(matches!(err, ExtensionError::OracleOutput { round: 1, .. }));
    }

    #[test]
    fn touching_sets_fail_the_oracle() {
        let ydom = Domain::finite_metric(vec![0.5]).unwrap();
        let f = BaireSeq::constant(ydom, 1.0);
        let y = SampledSet::from_points(&unit(), vec![0.5]).unwrap();
        let a = SampledSet::from_points(&unit(), vec![0.5]).unwrap();
        assert!(MetricOracle.separate(&a, &y, 0.1, &unit()).is_err());
        assert!(extend_bounded(&f, &y, &unit(), &MetricOracle, &ExtensionConfig::default()).is_ok());
    }

    #[test]
    fn clamp_examples() {
        let (f, y) = two_point();
        let big = BaireSeq::continuous(unit(), ContinuousExpr::constant(10.0) * ContinuousExpr::var());
        let h = clamp_extension(&big, &f, &y, 5.0, &EvalConfig::default()).unwrap();
        for t in unit().samples() {
            assert!(h.eval_limit(t, 1e-9).unwrap().0.abs() <= 5.0);
        }
        let ext = extend_bounded(&f, &y, &unit(), &MetricOracle, &ExtensionConfig::default()).unwrap();
        let h = clamp_extension(&ext.g, &f, &y, 1.0, &EvalConfig::default()).unwrap();
        assert!((h.eval_limit(1.0, 1e-9).unwrap().0 - 1.0).abs() < 1e-6);
        assert!(clamp_extension(&ext.g, &f, &y, 0.5, &EvalConfig::default()).is_err());
    }

    #[test]
    fn unbounded_extension() {
        let pts: Vec<f64> = (1..=5).map(|k| 1.0 / k as f64).collect();
        let ydom = Domain::finite_metric(pts.clone()).unwrap();
        let inv = ContinuousExpr::var().compose(StdFn::ReciprocalNonzero(crate::continuous::Certificate::Declared(0.2)));
        let f = BaireSeq::continuous(ydom, inv);
        let y = SampledSet::from_points(&unit(), pts.clone()).unwrap();
        let cfg = ExtensionConfig { rounds: 60, ..Default::default() };
        let ext = extend_unbounded(&f, &y, &unit(), &MetricOracle, &cfg).unwrap();
        assert!(ext.z.is_empty());
        for (k, p) in pts.iter().enumerate() {
            let v = ext.h.eval_limit(*p, 1e-9).unwrap().0;
            assert!((v - (k + 1) as f64).abs() < 1e-3, "{v}");
        }
    }

    #[test]
    fn level_set_meeting_y_is_rejected() {
        let y = SampledSet::from_points(&unit(), vec![1.0]).unwrap();
        let g = BaireSeq::constant(unit(), FRAC_PI_2);
        let err = tan_of_separated(&g, &y, &unit(), &MetricOracle, &ExtensionConfig::default()).unwrap_err();
        assert!(matches!(err, ExtensionError::ZeroSetMeetsY { .. }));
    }

    #[test]
    fn embedded_separation() {
        let f = BaireSeq::continuous(unit(), ContinuousExpr::var());
        let y = SampledSet::from_points(&unit(), vec![1.0]).unwrap();
        let w = separate_embedded_from_zeroset(&y, &f, &MetricOracle, &ExtensionConfig::default()).unwrap();
        assert!(w.h.eval_limit(0.0, 1e-9).unwrap().0.abs() < 1e-9);
        assert!((w.h.eval_limit(1.0, 1e-9).unwrap().0 - 1.0).abs() < 1e-6);
        w.verify(1e-6, &EvalConfig::default()).unwrap();

        let one = BaireSeq::constant(unit(), 2.0);
        let w = separate_embedded_from_zeroset(&y, &one, &MetricOracle, &ExtensionConfig::default()).unwrap();
        assert!(w.low_set.is_empty());
        assert!((w.h.eval_limit(1.0, 1e-9).unwrap().0 - 1.0).abs() < 1e-6);

        let y0 = SampledSet::from_points(&unit(), vec![0.0, 1.0]).unwrap();
        assert!(matches!(
            separate_embedded_from_zeroset(&y0, &f, &MetricOracle, &ExtensionConfig::default()),
            Err(ExtensionError::ZeroSetMeetsY { .. })
        ));
    }

    #[test]
    fn rounds_for_tolerance() {
        let n = solve_rounds(1.0, 1e-6).unwrap();
        let r = |k: i32| 0.5 * (2.0f64 / 3.0).powi(k);
        assert!(3.0 * r(n as i32 + 1) <= 1e-6 * (1.0 + 1e-12));
        assert!(3.0 * r(n as i32) > 1e-6);
    }
}

//! Baire-one functions as sequences of continuous expressions.
//!
//! A [`BaireSeq`] wraps a term generator `n -> f_n` (memoized), the domain it
//! lives on, and optionally a modulus of convergence and a declared bound on
//! the limit. Limits are evaluated by [`BaireSeq::eval_limit`]: with a modulus
//! the depth is read off directly, otherwise depths `1, 2, 4, ...` are probed
//! until three consecutive values agree to within `tol / 2`.
//!
//! Convergence is only semi-decidable; evaluations that hit the depth cap are
//! returned with `stable = false` and a warning rather than trusted.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::Serialize;
use thiserror::Error;

use crate::continuous::{clamp_expr, ContinuousExpr, ExprError, StdFn};
use crate::domain::Domain;

pub const DEFAULT_DEPTH_CAP: u64 = 1 << 20;
pub const DEFAULT_WINDOW: usize = 3;

/// Subintervals per domain piece when certifying ranges of continuous terms.
const CERTIFY_PIECES: usize = 512;
/// How many leading family members are checked against their series bounds.
const BOUND_CHECK_MEMBERS: u64 = 8;
/// Samples per member used by that check.
const BOUND_CHECK_SAMPLES: usize = 64;
/// Largest finite family whose whole length is folded into every term.
const FINITE_FAMILY_LIMIT: u64 = 1 << 16;
/// Moduli asking for deeper series terms than this are treated as unknown.
const SERIES_DEPTH_LIMIT: u64 = 1 << 22;
/// Relative size of a series tail that is dropped from every term.
const NEGLIGIBLE_TAIL: f64 = 1.0 / (1u64 << 40) as f64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeqError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("operands live on different domains ({0} vs {1})")]
    DomainMismatch(String, String),
    #[error("point {x} is outside the domain")]
    OutsideDomain { x: f64 },
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("limit is not bounded away from zero: value {value} at x = {x}")]
    NotPositive { x: f64, value: f64 },
    #[error("limit changes sign: {a} at one sample, {b} at another")]
    SignChange { a: f64, b: f64 },
    #[error("{0} is partial and no range certificate is available")]
    MissingCertificate(String),
    #[error("bound M_{k} = {value} must be positive and finite")]
    InvalidBound { k: u64, value: f64 },
    #[error("member {k} exceeds its bound {bound}: |{value}| at x = {x}")]
    BoundViolated { k: u64, x: f64, value: f64, bound: f64 },
    #[error("series bounds do not look summable: {0}")]
    SeriesDiverges(String),
    #[error("error bound does not decrease to zero: {0}")]
    ErrNotDecreasing(String),
    #[error("family index {0} is beyond the family length")]
    FamilyIndex(u64),
}

/// Evaluation knobs shared by everything that computes limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub depth_cap: u64,
    pub window: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { depth_cap: DEFAULT_DEPTH_CAP, window: DEFAULT_WINDOW }
    }
}

/// Telemetry of a single limit evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub depth_used: u64,
    pub window: Vec<f64>,
    pub stable: bool,
    pub tol: f64,
    pub warning: Option<String>,
}

/// Modulus of convergence.
#[derive(Clone)]
pub enum Modulus {
    /// Every term from this index on equals the limit.
    Exact(u64),
    /// Uniform modulus: `depth(tol)` gives `N` with `|f_n - f| < tol` for
    /// all `n >= N` and all `x`. `None` means no usable depth for that `tol`.
    Uniform(Arc<dyn Fn(f64) -> Option<u64> + Send + Sync>),
}

impl Modulus {
    pub fn uniform(f: impl Fn(f64) -> Option<u64> + Send + Sync + 'static) -> Self {
        Modulus::Uniform(Arc::new(f))
    }

    pub fn depth(&self, tol: f64) -> Option<u64> {
        match self {
            Modulus::Exact(d) => Some(*d),
            Modulus::Uniform(f) => f(tol).map(|d| d.max(1)),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Modulus::Exact(_))
    }

    /// Modulus of `phi(f_n)` for a `lipschitz`-Lipschitz `phi`.
    fn scaled(&self, lipschitz: f64) -> Modulus {
        match self {
            Modulus::Exact(d) => Modulus::Exact(*d),
            Modulus::Uniform(f) => {
                let f = f.clone();
                let l = lipschitz.max(f64::MIN_POSITIVE);
                Modulus::uniform(move |t| f(t / l))
            }
        }
    }
}

impl fmt::Debug for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modulus::Exact(d) => write!(f, "Exact({d})"),
            Modulus::Uniform(_) => write!(f, "Uniform(..)"),
        }
    }
}

pub type TermFn = Arc<dyn Fn(u64) -> Result<ContinuousExpr, SeqError> + Send + Sync>;

struct Inner {
    gen: TermFn,
    domain: Domain,
    modulus: Option<Modulus>,
    bound: Option<f64>,
    tag: String,
    warnings: Vec<String>,
    memo: Mutex<HashMap<u64, ContinuousExpr>>,
}

/// A Baire-one function on a domain, represented by an approximating
/// sequence of continuous functions. Cheap to clone; safe to share.
#[derive(Clone)]
pub struct BaireSeq(Arc<Inner>);

impl fmt::Debug for BaireSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BaireSeq")
            .field("tag", &self.0.tag)
            .field("domain", &self.0.domain.to_string())
            .field("modulus", &self.0.modulus)
            .field("bound", &self.0.bound)
            .finish()
    }
}

struct Parts {
    domain: Domain,
    modulus: Option<Modulus>,
    bound: Option<f64>,
    tag: String,
    warnings: Vec<String>,
}

impl BaireSeq {
    fn build(parts: Parts, gen: TermFn) -> Self {
        let Parts { domain, modulus, bound, tag, warnings } = parts;
        BaireSeq(Arc::new(Inner {
            gen,
            domain,
            modulus,
            bound,
            tag,
            warnings,
            memo: Mutex::new(HashMap::new()),
        }))
    }

    /// Wrap a term generator. Nothing about convergence is checked here.
    pub fn from_sequence(
        domain: Domain,
        gen: impl Fn(u64) -> ContinuousExpr + Send + Sync + 'static,
        modulus: Option<Modulus>,
        bound: Option<f64>,
    ) -> Self {
        Self::from_fallible(domain, move |n| Ok(gen(n)), modulus, bound, "sequence")
    }

    pub fn from_fallible(
        domain: Domain,
        gen: impl Fn(u64) -> Result<ContinuousExpr, SeqError> + Send + Sync + 'static,
        modulus: Option<Modulus>,
        bound: Option<f64>,
        tag: &str,
    ) -> Self {
        Self::build(
            Parts { domain, modulus, bound, tag: tag.to_string(), warnings: Vec::new() },
            Arc::new(gen),
        )
    }

    /// The constant sequence `n -> e`; its declared bound is certified from
    /// the expression's range over the domain when possible.
    pub fn continuous(domain: Domain, e: ContinuousExpr) -> Self {
        let bound = e
            .certified_range(&domain, CERTIFY_PIECES)
            .map(|(lo, hi)| lo.abs().max(hi.abs()));
        Self::from_sequence(domain, move |_| e.clone(), Some(Modulus::Exact(1)), bound)
            .retag("continuous")
    }

    pub fn constant(domain: Domain, c: f64) -> Self {
        Self::from_sequence(
            domain,
            move |_| ContinuousExpr::constant(c),
            Some(Modulus::Exact(1)),
            Some(c.abs()),
        )
        .retag("constant")
    }

    fn derive(&self, parts: Parts, gen: TermFn) -> Self {
        Self::build(parts, gen)
    }

    fn parts(&self) -> Parts {
        Parts {
            domain: self.0.domain.clone(),
            modulus: self.0.modulus.clone(),
            bound: self.0.bound,
            tag: self.0.tag.clone(),
            warnings: self.0.warnings.clone(),
        }
    }

    fn retag(self, tag: &str) -> Self {
        let mut parts = self.parts();
        parts.tag = tag.to_string();
        let gen = self.0.gen.clone();
        Self::build(parts, gen)
    }

    /// Copy with a different declared bound. The caller vouches for it.
    pub fn with_bound(&self, bound: Option<f64>) -> Self {
        let mut parts = self.parts();
        parts.bound = bound;
        let me = self.clone();
        self.derive(parts, Arc::new(move |n| me.term(n)))
    }

    pub fn with_warning(&self, warning: impl Into<String>) -> Self {
        let mut parts = self.parts();
        parts.warnings.push(warning.into());
        let me = self.clone();
        self.derive(parts, Arc::new(move |n| me.term(n)))
    }

    /// Same terms viewed on another domain (typically a subset, or the same
    /// space with a different sampler).
    pub fn restrict(&self, domain: Domain) -> Self {
        let mut parts = self.parts();
        parts.domain = domain;
        let me = self.clone();
        self.derive(parts, Arc::new(move |n| me.term(n)))
    }

    pub fn domain(&self) -> &Domain {
        &self.0.domain
    }

    pub fn modulus(&self) -> Option<&Modulus> {
        self.0.modulus.as_ref()
    }

    pub fn bound(&self) -> Option<f64> {
        self.0.bound
    }

    pub fn tag(&self) -> &str {
        &self.0.tag
    }

    pub fn warnings(&self) -> &[String] {
        &self.0.warnings
    }

    /// The `n`-th continuous approximant (`n >= 1`; `0` is read as `1`).
    pub fn term(&self, n: u64) -> Result<ContinuousExpr, SeqError> {
        let n = n.max(1);
        if let Some(e) = self.0.memo.lock().unwrap().get(&n) {
            return Ok(e.clone());
        }
        let e = (self.0.gen)(n)?;
        self.0.memo.lock().unwrap().entry(n).or_insert_with(|| e.clone());
        Ok(e)
    }

    pub fn eval_term(&self, n: u64, x: f64) -> Result<f64, SeqError> {
        Ok(self.term(n)?.eval(x)?)
    }

    pub fn eval_limit(&self, x: f64, tol: f64) -> Result<(f64, ConvergenceReport), SeqError> {
        self.eval_limit_with(x, tol, &EvalConfig::default())
    }

    pub fn eval_limit_with(
        &self,
        x: f64,
        tol: f64,
        cfg: &EvalConfig,
    ) -> Result<(f64, ConvergenceReport), SeqError> {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(SeqError::BadTolerance(tol));
        }
        if !self.0.domain.contains(x) {
            return Err(SeqError::OutsideDomain { x });
        }
        let inherited = (!self.0.warnings.is_empty()).then(|| self.0.warnings.join("; "));
        if let Some(depth) = self.0.modulus.as_ref().and_then(|m| m.depth(tol)) {
            let v = self.eval_term(depth, x)?;
            return Ok((
                v,
                ConvergenceReport {
                    depth_used: depth,
                    window: vec![v],
                    stable: true,
                    tol,
                    warning: inherited,
                },
            ));
        }
        let w = cfg.window.max(2);
        let mut window: Vec<f64> = Vec::with_capacity(w + 1);
        let mut depth = 1u64;
        let mut last_depth = 1u64;
        loop {
            let v = self.eval_term(depth, x)?;
            window.push(v);
            if window.len() > w {
                window.remove(0);
            }
            last_depth = last_depth.max(depth);
            if window.len() == w && spread(&window) <= tol / 2.0 {
                return Ok((
                    v,
                    ConvergenceReport {
                        depth_used: depth,
                        window,
                        stable: true,
                        tol,
                        warning: inherited,
                    },
                ));
            }
            match depth.checked_mul(2) {
                Some(next) if next <= cfg.depth_cap => depth = next,
                _ => break,
            }
        }
        let mut warning = format!(
            "no stable window within depth cap {} (spread {:.3e})",
            cfg.depth_cap,
            spread(&window)
        );
        if let Some(w) = inherited {
            warning = format!("{w}; {warning}");
        }
        Ok((
            *window.last().unwrap(),
            ConvergenceReport {
                depth_used: last_depth,
                window,
                stable: false,
                tol,
                warning: Some(warning),
            },
        ))
    }
}

fn spread(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s = hi - lo;
    if s.is_nan() {
        f64::INFINITY
    } else {
        s
    }
}

fn require_same(f: &BaireSeq, g: &BaireSeq) -> Result<(), SeqError> {
    if f.domain().same_space(g.domain()) {
        Ok(())
    } else {
        Err(SeqError::DomainMismatch(f.domain().to_string(), g.domain().to_string()))
    }
}

fn merged_warnings(f: &BaireSeq, g: &BaireSeq) -> Vec<String> {
    let mut w = f.warnings().to_vec();
    for x in g.warnings() {
        if !w.contains(x) {
            w.push(x.clone());
        }
    }
    w
}

fn pair_modulus(
    f: Option<&Modulus>,
    g: Option<&Modulus>,
    split: f64,
) -> Option<Modulus> {
    match (f?, g?) {
        (Modulus::Exact(a), Modulus::Exact(b)) => Some(Modulus::Exact((*a).max(*b))),
        (mf, mg) => {
            let (mf, mg) = (mf.clone(), mg.clone());
            Some(Modulus::uniform(move |t| {
                Some(mf.depth(t / split)?.max(mg.depth(t / split)?))
            }))
        }
    }
}

fn binary(
    f: &BaireSeq,
    g: &BaireSeq,
    tag: &str,
    modulus: Option<Modulus>,
    bound: Option<f64>,
    op: impl Fn(ContinuousExpr, ContinuousExpr) -> ContinuousExpr + Send + Sync + 'static,
) -> Result<BaireSeq, SeqError> {
    require_same(f, g)?;
    let (a, b) = (f.clone(), g.clone());
    Ok(BaireSeq::build(
        Parts {
            domain: f.domain().clone(),
            modulus,
            bound,
            tag: tag.to_string(),
            warnings: merged_warnings(f, g),
        },
        Arc::new(move |n| Ok(op(a.term(n)?, b.term(n)?))),
    ))
}

fn unary(
    f: &BaireSeq,
    tag: &str,
    modulus: Option<Modulus>,
    bound: Option<f64>,
    op: impl Fn(ContinuousExpr, u64) -> Result<ContinuousExpr, SeqError> + Send + Sync + 'static,
) -> BaireSeq {
    let a = f.clone();
    let mut parts = f.parts();
    parts.modulus = modulus;
    parts.bound = bound;
    parts.tag = tag.to_string();
    BaireSeq::build(parts, Arc::new(move |n| op(a.term(n)?, n)))
}

/// Termwise sum.
pub fn add(f: &BaireSeq, g: &BaireSeq) -> Result<BaireSeq, SeqError> {
    let m = pair_modulus(f.modulus(), g.modulus(), 2.0);
    let b = f.bound().zip(g.bound()).map(|(a, b)| a + b);
    binary(f, g, "add", m, b, |a, b| a + b)
}

pub fn sub(f: &BaireSeq, g: &BaireSeq) -> Result<BaireSeq, SeqError> {
    add(f, &neg(g))
}

/// Termwise product.
pub fn mul(f: &BaireSeq, g: &BaireSeq) -> Result<BaireSeq, SeqError> {
    let b = f.bound().zip(g.bound()).map(|(a, b)| a * b);
    binary(f, g, "mul", mul_modulus(f, g), b, |a, b| a * b)
}

// |f_n g_n - f g| <= |f_n| |g_n - g| + |g| |f_n - f|
fn mul_modulus(f: &BaireSeq, g: &BaireSeq) -> Option<Modulus> {
    let (mf, mg) = (f.modulus()?.clone(), g.modulus()?.clone());
    if let (Modulus::Exact(a), Modulus::Exact(b)) = (&mf, &mg) {
        return Some(Modulus::Exact((*a).max(*b)));
    }
    let (bf, bg) = (f.bound()?, g.bound()?);
    Some(Modulus::uniform(move |t| {
        let tf = (t / (2.0 * (bg + 1.0))).min(1.0);
        let tg = (t / (2.0 * (bf + 1.0))).min(1.0);
        Some(mf.depth(tf)?.max(mg.depth(tg)?))
    }))
}

pub fn neg(f: &BaireSeq) -> BaireSeq {
    let m = f.modulus().map(|m| m.scaled(1.0));
    unary(f, "neg", m, f.bound(), |e, _| Ok(-e))
}

pub fn abs(f: &BaireSeq) -> BaireSeq {
    let m = f.modulus().map(|m| m.scaled(1.0));
    unary(f, "abs", m, f.bound(), |e, _| Ok(e.abs()))
}

/// Pointwise maximum, `((f + g) + |f - g|) / 2` termwise.
pub fn join(f: &BaireSeq, g: &BaireSeq) -> Result<BaireSeq, SeqError> {
    let m = pair_modulus(f.modulus(), g.modulus(), 1.0);
    let b = f.bound().zip(g.bound()).map(|(a, b)| a.max(b));
    binary(f, g, "join", m, b, |a, b| a.max(&b))
}

/// Pointwise minimum, `((f + g) - |f - g|) / 2` termwise.
pub fn meet(f: &BaireSeq, g: &BaireSeq) -> Result<BaireSeq, SeqError> {
    let m = pair_modulus(f.modulus(), g.modulus(), 1.0);
    let b = f.bound().zip(g.bound()).map(|(a, b)| a.max(b));
    binary(f, g, "meet", m, b, |a, b| a.min(&b))
}

/// Where a positivity certificate came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PositivitySource {
    Declared,
    Certified,
    Sampled,
}

/// Lower bound on `|f|` and its provenance: a declared `delta`, an interval
/// certificate for continuous `f`, or the sampled minimum of the limit.
pub fn positivity_floor(
    f: &BaireSeq,
    delta: Option<f64>,
    cfg: &EvalConfig,
) -> Result<(f64, PositivitySource), SeqError> {
    if let Some(d) = delta {
        if !(d.is_finite() && d > 0.0) {
            return Err(SeqError::BadTolerance(d));
        }
        return Ok((d, PositivitySource::Declared));
    }
    if let Some(Modulus::Exact(d)) = f.modulus() {
        let e = f.term(*d)?;
        if let Some((lo, hi)) = e.certified_range(f.domain(), CERTIFY_PIECES) {
            if lo > 0.0 {
                return Ok((lo, PositivitySource::Certified));
            }
            if hi < 0.0 {
                return Ok((-hi, PositivitySource::Certified));
            }
        }
    }
    let tol = 1e-9;
    let mut min = f64::INFINITY;
    let mut first_sign = 0.0f64;
    for x in f.domain().samples() {
        let (v, rep) = f.eval_limit_with(x, tol, cfg)?;
        if !rep.stable {
            continue;
        }
        if v.abs() <= tol {
            return Err(SeqError::NotPositive { x, value: v });
        }
        if first_sign == 0.0 {
            first_sign = v;
        } else if first_sign.signum() != v.signum() {
            return Err(SeqError::SignChange { a: first_sign, b: v });
        }
        min = min.min(v.abs());
    }
    if !min.is_finite() {
        return Err(SeqError::NotPositive { x: f64::NAN, value: f64::NAN });
    }
    Ok((min, PositivitySource::Sampled))
}

/// `1/f` for a limit bounded away from zero, via terms `1 / (|f_n| + 1/n)`.
///
/// Negative limits are handled by reciprocating `-f` and negating. Without
/// a declared `delta` the floor is certified for continuous inputs, else
/// taken from samples and recorded as a warning.
pub fn reciprocal_positive(f: &BaireSeq, delta: Option<f64>) -> Result<BaireSeq, SeqError> {
    reciprocal_positive_with(f, delta, &EvalConfig::default())
}

pub fn reciprocal_positive_with(
    f: &BaireSeq,
    delta: Option<f64>,
    cfg: &EvalConfig,
) -> Result<BaireSeq, SeqError> {
    let (floor, source) = positivity_floor(f, delta, cfg)?;
    let negative = match source {
        PositivitySource::Declared | PositivitySource::Sampled => {
            // sign of the limit from a single stable probe
            let sample = f.domain().samples().into_iter().next();
            match sample {
                Some(x) => f.eval_limit_with(x, 1e-9, cfg)?.0 < 0.0,
                None => false,
            }
        }
        PositivitySource::Certified => {
            let e = f.term(f.modulus().and_then(|m| m.depth(1.0)).unwrap_or(1))?;
            e.certified_range(f.domain(), CERTIFY_PIECES).is_some_and(|(_, hi)| hi < 0.0)
        }
    };
    let base = if negative { neg(f) } else { f.clone() };
    let modulus = match (source, base.modulus()) {
        (PositivitySource::Sampled, _) | (_, None) => None,
        (_, Some(m)) => Some(reciprocal_modulus(m.clone(), floor)),
    };
    let r = unary(&base, "reciprocal", modulus, Some(1.0 / floor), |e, n| {
        Ok(e.recip_shifted(n)?)
    });
    let r = if source == PositivitySource::Sampled {
        r.with_warning(format!("positivity only sampled (min |f| = {floor:.3e})"))
    } else {
        r
    };
    Ok(if negative { neg(&r).retag("reciprocal") } else { r })
}

// With g_N = |f_N| + 1/N and e = |f_N - f| + 1/N <= delta/2:
// |1/g_N - 1/f| <= 2e / delta^2.
fn reciprocal_modulus(m: Modulus, delta: f64) -> Modulus {
    let d2 = delta * delta;
    match m {
        Modulus::Exact(d) => Modulus::uniform(move |t| {
            let shift = (1.0 / (t * d2)).ceil() + 1.0;
            (shift < u64::MAX as f64).then(|| d.max(shift as u64))
        }),
        m => Modulus::uniform(move |t| {
            let t1 = (delta / 4.0).min(t * d2 / 4.0);
            let shift = (4.0 / (t * d2)).ceil().max((4.0 / delta).ceil()) + 1.0;
            if shift >= u64::MAX as f64 {
                return None;
            }
            Some(m.depth(t1)?.max(shift as u64))
        }),
    }
}

/// `g o f` for a standard continuous `g`. Partial `g` need a certificate:
/// `tan` requires a declared bound below pi/2, the reciprocal a declared floor.
pub fn compose_continuous(g: StdFn, f: &BaireSeq) -> Result<BaireSeq, SeqError> {
    let (modulus, bound) = match g {
        StdFn::Arctan => (f.modulus().map(|m| m.scaled(1.0)), Some(FRAC_PI_2)),
        StdFn::Affine { a, b } => (
            f.modulus().map(|m| m.scaled(a.abs())),
            f.bound().map(|m| a.abs() * m + b.abs()),
        ),
        StdFn::Power(k) => {
            let bound = f.bound().map(|m| m.powi(k.min(i32::MAX as u64) as i32));
            let modulus = match (f.modulus(), f.bound()) {
                (Some(Modulus::Exact(d)), _) => Some(Modulus::Exact(*d)),
                (Some(m), Some(b)) => {
                    let lip = k as f64 * (b + 1.0).powi(k.saturating_sub(1).min(i32::MAX as u64) as i32);
                    let m = m.clone();
                    Some(Modulus::uniform(move |t| {
                        Some(m.depth(1.0)?.max(m.depth(t / lip.max(1.0))?))
                    }))
                }
                _ => None,
            };
            (modulus, bound)
        }
        StdFn::TanRestricted => match f.bound() {
            Some(b) if b < FRAC_PI_2 => {
                // near the limit, terms stay within `margin` of [-b, b]
                let margin = (FRAC_PI_2 - b) / 2.0;
                let lip = 1.0 / (b + margin).cos().powi(2);
                (local_modulus(f.modulus(), margin, lip), Some(b.tan()))
            }
            _ => return Err(SeqError::MissingCertificate("tan".into())),
        },
        StdFn::ReciprocalNonzero(cert) => match cert {
            crate::continuous::Certificate::Declared(d) => {
                (local_modulus(f.modulus(), d / 2.0, 4.0 / (d * d)), Some(1.0 / d))
            }
            crate::continuous::Certificate::Sampled => {
                return Err(SeqError::MissingCertificate("reciprocal".into()))
            }
        },
    };
    Ok(unary(f, "compose", modulus, bound, move |e, _| Ok(e.compose(g))))
}

/// Modulus of `phi(f_n)` where `phi` is `lip`-Lipschitz within `margin` of
/// the range of `f`.
fn local_modulus(m: Option<&Modulus>, margin: f64, lip: f64) -> Option<Modulus> {
    match m? {
        Modulus::Exact(d) => Some(Modulus::Exact(*d)),
        m => {
            let m = m.clone();
            Some(Modulus::uniform(move |t| m.depth((t / lip).min(margin))))
        }
    }
}

/// Clamp every term into `[-m, m]`; the limit is unchanged wherever `|f| <= m`.
pub fn truncate(f: &BaireSeq, m: f64) -> Result<BaireSeq, SeqError> {
    clamp_expr(&ContinuousExpr::constant(0.0), m)?;
    let modulus = f.modulus().map(|md| md.scaled(1.0));
    let bound = Some(f.bound().map_or(m, |b| b.min(m)));
    Ok(unary(f, "truncate", modulus, bound, move |e, _| Ok(clamp_expr(&e, m)?)))
}

type MemberFn = Arc<dyn Fn(u64) -> Result<BaireSeq, SeqError> + Send + Sync>;

/// An indexed family `k -> f_k` (`k >= 1`) of Baire-one functions, memoized.
#[derive(Clone)]
pub struct Family {
    len: Option<u64>,
    member: MemberFn,
    cache: Arc<Mutex<HashMap<u64, BaireSeq>>>,
}

impl Family {
    pub fn new(member: impl Fn(u64) -> Result<BaireSeq, SeqError> + Send + Sync + 'static) -> Self {
        Family { len: None, member: Arc::new(member), cache: Arc::default() }
    }

    /// A family that is zero past its last member.
    pub fn finite(members: Vec<BaireSeq>) -> Self {
        let len = members.len() as u64;
        let members = Arc::new(members);
        Family {
            len: Some(len),
            member: Arc::new(move |k| {
                members.get((k - 1) as usize).cloned().ok_or(SeqError::FamilyIndex(k))
            }),
            cache: Arc::default(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len == Some(0)
    }

    pub fn len(&self) -> Option<u64> {
        self.len
    }

    pub fn get(&self, k: u64) -> Result<BaireSeq, SeqError> {
        if self.len.is_some_and(|l| k > l) || k == 0 {
            return Err(SeqError::FamilyIndex(k));
        }
        if let Some(f) = self.cache.lock().unwrap().get(&k) {
            return Ok(f.clone());
        }
        let f = (self.member)(k)?;
        self.cache.lock().unwrap().entry(k).or_insert_with(|| f.clone());
        Ok(f)
    }

    /// Apply `op` to every member.
    pub fn map(
        &self,
        op: impl Fn(u64, BaireSeq) -> Result<BaireSeq, SeqError> + Send + Sync + 'static,
    ) -> Family {
        let base = self.clone();
        Family {
            len: self.len,
            member: Arc::new(move |k| op(k, base.get(k)?)),
            cache: Arc::default(),
        }
    }
}

type BoundFn = Arc<dyn Fn(u64) -> f64 + Send + Sync>;

/// The majorants `M_k` of a series, with an optional closed form for the
/// tail `sum_{k > K} M_k`.
#[derive(Clone)]
pub struct SeriesBounds {
    term: BoundFn,
    tail: Option<BoundFn>,
}

impl SeriesBounds {
    pub fn new(term: impl Fn(u64) -> f64 + Send + Sync + 'static) -> Self {
        SeriesBounds { term: Arc::new(term), tail: None }
    }

    pub fn with_tail(mut self, tail: impl Fn(u64) -> f64 + Send + Sync + 'static) -> Self {
        self.tail = Some(Arc::new(tail));
        self
    }

    /// `M_k = scale * ratio^k` with its exact tail.
    pub fn geometric(scale: f64, ratio: f64) -> Self {
        SeriesBounds::new(move |k| scale * ratio.powf(k as f64))
            .with_tail(move |k| scale * ratio.powf((k + 1) as f64) / (1.0 - ratio))
    }

    pub fn term(&self, k: u64) -> f64 {
        (self.term)(k)
    }

    pub fn tail(&self, k: u64) -> Option<f64> {
        self.tail.as_ref().map(|t| t(k))
    }
}

/// Partial sums at `2^15` and `2^16` must be close.
fn cauchy_check(bounds: &SeriesBounds) -> Result<f64, SeqError> {
    let mut sum = 0.0;
    let mut half = 0.0;
    for k in 1..=(1u64 << 16) {
        sum += bounds.term(k);
        if k == 1 << 15 {
            half = sum;
        }
    }
    let gap = sum - half;
    if !sum.is_finite() || gap > 1e-3 * sum.max(1.0) {
        return Err(SeqError::SeriesDiverges(format!(
            "partial sums move by {gap:.3e} between 2^15 and 2^16 terms"
        )));
    }
    Ok(sum)
}

/// Diagonal sum `h_n = g_{1n} + ... + g_{nn}` of a family with summable
/// bounds, where `g_{kn}` is term `n` of member `k` clamped to `[-M_k, M_k]`.
pub fn series_sum(
    domain: &Domain,
    family: Family,
    bounds: SeriesBounds,
) -> Result<BaireSeq, SeqError> {
    series_sum_with(domain, family, bounds, &EvalConfig::default())
}

pub fn series_sum_with(
    domain: &Domain,
    family: Family,
    bounds: SeriesBounds,
    cfg: &EvalConfig,
) -> Result<BaireSeq, SeqError> {
    let check_upto = family.len.map_or(BOUND_CHECK_MEMBERS, |l| l.min(BOUND_CHECK_MEMBERS));
    for k in 1..=check_upto.max(1) {
        let m = bounds.term(k);
        if !(m.is_finite() && m > 0.0) {
            return Err(SeqError::InvalidBound { k, value: m });
        }
    }
    let mut warnings = Vec::new();
    let total = match (family.len, bounds.tail(0)) {
        (Some(l), _) if l <= FINITE_FAMILY_LIMIT => Some((1..=l).map(|k| bounds.term(k)).sum()),
        (_, Some(t)) => Some(t),
        (_, None) => {
            let s = cauchy_check(&bounds)?;
            warnings.push("series summability checked heuristically (no closed-form tail)".into());
            Some(s)
        }
    };

    let mut first = None;
    for k in 1..=check_upto {
        let member = family.get(k)?;
        if !member.domain().same_space(domain) {
            return Err(SeqError::DomainMismatch(
                member.domain().to_string(),
                domain.to_string(),
            ));
        }
        let m = bounds.term(k);
        if member.bound().is_none_or(|b| b > m * (1.0 + 1e-12)) {
            check_member_bound(&member, k, m, domain, cfg)?;
        }
        for w in member.warnings() {
            if !warnings.contains(w) {
                warnings.push(w.clone());
            }
        }
        first.get_or_insert(member);
    }

    let modulus = series_modulus(&family, &bounds);
    let cut = total.and_then(|t| negligible_cut(&bounds, t));
    let fam = family.clone();
    let bnds = bounds.clone();
    let gen: TermFn = Arc::new(move |n| {
        let upto = fam.len.map_or(n, |l| n.min(l)).min(cut.unwrap_or(u64::MAX));
        let mut parts = Vec::with_capacity(upto as usize);
        for k in 1..=upto {
            let m = bnds.term(k);
            if m == 0.0 {
                continue;
            }
            let t = fam.get(k)?.term(n)?;
            parts.push(clamp_expr(&t, m)?);
        }
        Ok(ContinuousExpr::sum(parts))
    });
    Ok(BaireSeq::build(
        Parts {
            domain: domain.clone(),
            modulus,
            bound: total,
            tag: "series_sum".into(),
            warnings,
        },
        gen,
    ))
}

/// First `K` whose remaining tail is below `NEGLIGIBLE_TAIL` of `total`.
/// Members past it cannot move the sum by more than that, so they are not
/// evaluated.
fn negligible_cut(bounds: &SeriesBounds, total: f64) -> Option<u64> {
    let eps = total * NEGLIGIBLE_TAIL;
    let mut hi = 1u64;
    while bounds.tail(hi)? > eps {
        hi = hi.checked_mul(2).filter(|&h| h <= SERIES_DEPTH_LIMIT)?;
    }
    let mut lo = hi / 2;
    while lo + 1 < hi {
        let mid = (lo + hi) / 2;
        if bounds.tail(mid)? > eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(hi)
}

fn check_member_bound(
    member: &BaireSeq,
    k: u64,
    m: f64,
    domain: &Domain,
    cfg: &EvalConfig,
) -> Result<(), SeqError> {
    let samples = domain.samples();
    let stride = samples.len().div_ceil(BOUND_CHECK_SAMPLES).max(1);
    for &x in samples.iter().step_by(stride) {
        let (v, rep) = member.eval_limit_with(x, 1e-9, cfg)?;
        if rep.stable && v.abs() > m + 1e-9 {
            return Err(SeqError::BoundViolated { k, x, value: v, bound: m });
        }
    }
    Ok(())
}

// |h_N - f| <= sum_{k<=K} |g_kN - f_k| + 2 sum_{k>K} M_k
fn series_modulus(family: &Family, bounds: &SeriesBounds) -> Option<Modulus> {
    if let Some(l) = family.len.filter(|&l| l <= FINITE_FAMILY_LIMIT) {
        let mut depth = l.max(1);
        let mut all_exact = true;
        for k in 1..=l {
            match family.get(k).ok()?.modulus() {
                Some(Modulus::Exact(d)) => depth = depth.max(*d),
                Some(_) => all_exact = false,
                None => return None,
            }
        }
        if all_exact {
            return Some(Modulus::Exact(depth));
        }
        let fam = family.clone();
        return Some(Modulus::uniform(move |t| {
            let mut depth = l.max(1);
            for k in 1..=l {
                depth = depth.max(fam.get(k).ok()?.modulus()?.depth(t / l as f64)?);
            }
            (depth <= SERIES_DEPTH_LIMIT).then_some(depth)
        }));
    }
    bounds.tail.as_ref()?;
    let fam = family.clone();
    let bnds = bounds.clone();
    Some(Modulus::uniform(move |t| {
        let mut cut = 1u64;
        while bnds.tail(cut)? >= t / 3.0 {
            cut = cut.checked_mul(2)?;
            if cut > SERIES_DEPTH_LIMIT {
                return None;
            }
        }
        // shrink back to the first K that works
        let (mut lo, mut hi) = (cut / 2, cut);
        while lo + 1 < hi {
            let mid = (lo + hi) / 2;
            if bnds.tail(mid)? < t / 3.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let cut = hi.max(1);
        let share = t / (3.0 * cut as f64);
        let mut depth = cut;
        for k in 1..=cut {
            depth = depth.max(fam.get(k).ok()?.modulus()?.depth(share)?);
        }
        (depth <= SERIES_DEPTH_LIMIT).then_some(depth)
    }))
}

/// Greedy subsequence `n_k = min { m >= n_{k-1} : err(m) < 2^-k }`.
struct Subsequence {
    err: Arc<dyn Fn(u64) -> f64 + Send + Sync>,
    picks: Mutex<Vec<u64>>,
}

const SUBSEQUENCE_CAP: u64 = 1 << 48;

impl Subsequence {
    fn pick(&self, k: u64) -> Result<u64, SeqError> {
        let mut picks = self.picks.lock().unwrap();
        while (picks.len() as u64) < k {
            let level = picks.len() as u64 + 1;
            let start = picks.last().copied().unwrap_or(1);
            let target = 0.5f64.powi(level as i32);
            picks.push(self.first_below(start, target)?);
        }
        Ok(picks[(k - 1) as usize])
    }

    fn first_below(&self, start: u64, target: f64) -> Result<u64, SeqError> {
        let err = &self.err;
        if err(start) < target {
            return Ok(start);
        }
        let mut prev = start;
        let mut step = 1u64;
        loop {
            let probe = start.checked_add(step).filter(|&p| p <= SUBSEQUENCE_CAP).ok_or_else(|| {
                SeqError::ErrNotDecreasing(format!("err stays >= {target:e} up to m = 2^48"))
            })?;
            let e = err(probe);
            if !e.is_finite() || e > err(prev) * (1.0 + 1e-12) + 1e-300 {
                return Err(SeqError::ErrNotDecreasing(format!(
                    "err({probe}) = {e:e} exceeds err({prev}) = {:e}",
                    err(prev)
                )));
            }
            if e < target {
                let (mut lo, mut hi) = (prev, probe);
                while lo + 1 < hi {
                    let mid = lo + (hi - lo) / 2;
                    if err(mid) < target {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                return Ok(hi);
            }
            prev = probe;
            step *= 2;
        }
    }
}

/// Pointwise realization of a uniform limit `f = lim f_m`, given
/// `sup |f_m - f| <= err(m)` with `err` decreasing to zero.
///
/// Picks `n_k` with `err(n_k) < 2^-k`, then sums the telescoping family
/// `f_{n_{k+1}} - f_{n_k}` (majorants `(3/2) 2^-k`) on top of `f_{n_1}`.
pub fn uniform_limit(
    domain: &Domain,
    fs: Family,
    err: impl Fn(u64) -> f64 + Send + Sync + 'static,
) -> Result<BaireSeq, SeqError> {
    let sub = Arc::new(Subsequence { err: Arc::new(err), picks: Mutex::new(Vec::new()) });
    // validate the first few picks eagerly
    sub.pick(BOUND_CHECK_MEMBERS + 1)?;
    let head = fs.get(sub.pick(1)?)?;
    let (s, f) = (sub.clone(), fs.clone());
    let diffs = Family::new(move |k| {
        let hi = f.get(s.pick(k + 1)?)?;
        let lo = f.get(s.pick(k)?)?;
        let d = sub_seq_bounded(&hi, &lo, 1.5 * 0.5f64.powi(k as i32))?;
        Ok(d)
    });
    let tail = series_sum(domain, diffs, SeriesBounds::geometric(1.5, 0.5))?;
    Ok(add(&head.restrict(domain.clone()), &tail)?.retag("uniform_limit"))
}

fn sub_seq_bounded(a: &BaireSeq, b: &BaireSeq, m: f64) -> Result<BaireSeq, SeqError> {
    Ok(sub(a, b)?.with_bound(Some(m)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuous::Certificate;

    fn unit() -> Domain {
        Domain::interval(0.0, 1.0).unwrap()
    }

    fn x() -> ContinuousExpr {
        ContinuousExpr::var()
    }

    fn xn() -> BaireSeq {
        BaireSeq::from_sequence(unit(), |n| x().power(n), None, Some(1.0))
    }

    #[test]
    fn constant_sequence_settles_in_first_window() {
        let f = BaireSeq::from_sequence(unit(), |_| ContinuousExpr::constant(3.0), None, None);
        let (v, rep) = f.eval_limit(0.4, 1e-6).unwrap();
        assert_eq!(v, 3.0);
        assert!(rep.stable);
        assert_eq!(rep.depth_used, 4);
    }

    #[test]
    fn powers_converge_to_step() {
        let f = xn();
        let (v, rep) = f.eval_limit(0.5, 1e-6).unwrap();
        assert!(v.abs() <= 1e-6 && rep.stable);
        let (v, rep) = f.eval_limit(1.0, 1e-6).unwrap();
        assert_eq!(v, 1.0);
        assert!(rep.stable);
    }

    #[test]
    fn decaying_sequence() {
        let f = BaireSeq::from_sequence(
            unit(),
            |n| ContinuousExpr::constant(1.0 / n as f64) * x(),
            None,
            None,
        );
        for t in [0.0, 0.5, 1.0] {
            let (v, rep) = f.eval_limit(t, 1e-4).unwrap();
            assert!(v.abs() < 1e-4 && rep.stable);
        }
    }

    #[test]
    fn divergent_sequence_is_flagged() {
        let f = BaireSeq::from_sequence(
            unit(),
            |n| ContinuousExpr::constant(if n.trailing_zeros() % 2 == 0 { 1.0 } else { 0.0 }),
            None,
            None,
        );
        let cfg = EvalConfig { depth_cap: 64, window: 3 };
        let (_, rep) = f.eval_limit_with(0.5, 1e-6, &cfg).unwrap();
        assert!(!rep.stable);
        assert!(rep.warning.is_some());
    }

    #[test]
    fn eval_rejects_bad_input() {
        assert!(matches!(xn().eval_limit(1.5, 1e-6), Err(SeqError::OutsideDomain { .. })));
        assert!(matches!(xn().eval_limit(0.5, 0.0), Err(SeqError::BadTolerance(_))));
    }

    #[test]
    fn complementary_sum_is_one() {
        let co = BaireSeq::from_sequence(
            unit(),
            |n| ContinuousExpr::constant(1.0) - x().power(n),
            None,
            None,
        );
        let s = add(&xn(), &co).unwrap();
        for t in [0.0, 0.3, 0.99, 1.0] {
            assert!((s.eval_limit(t, 1e-9).unwrap().0 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn domain_mismatch() {
        let other = BaireSeq::constant(Domain::interval(0.0, 2.0).unwrap(), 1.0);
        assert!(matches!(add(&xn(), &other), Err(SeqError::DomainMismatch(..))));
    }

    #[test]
    fn lattice_examples() {
        let half = BaireSeq::constant(unit(), 0.5);
        let j = join(&xn(), &half).unwrap();
        assert_eq!(j.eval_limit(1.0, 1e-9).unwrap().0, 1.0);
        assert!((j.eval_limit(0.3, 1e-9).unwrap().0 - 0.5).abs() < 1e-12);
        let m = meet(&xn(), &xn()).unwrap();
        assert_eq!(m.eval_limit(1.0, 1e-9).unwrap().0, 1.0);
        let f = BaireSeq::continuous(
            Domain::interval(-1.0, 1.0).unwrap(),
            x() - ContinuousExpr::constant(0.2),
        );
        let j = join(&f, &neg(&f)).unwrap();
        let a = abs(&f);
        for t in [-1.0, -0.3, 0.2, 0.9] {
            assert_eq!(j.eval_limit(t, 1e-9).unwrap().0, a.eval_limit(t, 1e-9).unwrap().0);
        }
    }

    #[test]
    fn reciprocal_examples() {
        let two = BaireSeq::constant(unit(), 2.0);
        let r = reciprocal_positive(&two, None).unwrap();
        assert!((r.eval_limit(0.4, 1e-9).unwrap().0 - 0.5).abs() < 1e-9);

        let one = BaireSeq::constant(unit(), 1.0);
        let f = add(&one, &xn()).unwrap();
        let r = reciprocal_positive(&f, Some(1.0)).unwrap();
        assert!((r.eval_limit(1.0, 1e-5).unwrap().0 - 0.5).abs() < 1e-5);
        assert!((r.eval_limit(0.5, 1e-5).unwrap().0 - 1.0).abs() < 1e-5);

        let g = BaireSeq::continuous(unit(), x() - ContinuousExpr::constant(0.3));
        assert!(reciprocal_positive(&g, None).is_err());

        let neg_two = BaireSeq::constant(unit(), -2.0);
        let r = reciprocal_positive(&neg_two, None).unwrap();
        assert!((r.eval_limit(0.1, 1e-9).unwrap().0 + 0.5).abs() < 1e-9);
    }

    #[test]
    fn reciprocal_of_continuous_has_modulus() {
        let f = BaireSeq::continuous(unit(), x() + ContinuousExpr::constant(0.5));
        let r = reciprocal_positive(&f, None).unwrap();
        assert!(r.modulus().is_some());
        assert!(r.warnings().is_empty());
        let (v, rep) = r.eval_limit(1.0, 1e-10).unwrap();
        assert!((v - 1.0 / 1.5).abs() < 1e-10, "{v}");
        assert!(rep.stable);
    }

    #[test]
    fn compose_examples() {
        let a = compose_continuous(StdFn::Arctan, &xn()).unwrap();
        assert!((a.eval_limit(1.0, 1e-9).unwrap().0 - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        let id = compose_continuous(StdFn::Affine { a: 1.0, b: 0.0 }, &xn()).unwrap();
        assert_eq!(id.eval_limit(1.0, 1e-9).unwrap().0, 1.0);
        let three = BaireSeq::constant(unit(), 3.0);
        let sq = compose_continuous(StdFn::Power(2), &three).unwrap();
        assert_eq!(sq.eval_limit(0.2, 1e-9).unwrap().0, 9.0);
        let unbounded = BaireSeq::from_sequence(unit(), |n| x().power(n), None, None);
        assert!(compose_continuous(StdFn::TanRestricted, &unbounded).is_err());
        assert!(compose_continuous(StdFn::ReciprocalNonzero(Certificate::Sampled), &xn()).is_err());
    }

    #[test]
    fn truncate_examples() {
        let t = truncate(&xn(), 1.0).unwrap();
        for x in unit().samples() {
            assert_eq!(t.eval_limit(x, 1e-9).unwrap().0, xn().eval_limit(x, 1e-9).unwrap().0);
        }
        let five = BaireSeq::constant(unit(), 5.0);
        assert_eq!(truncate(&five, 3.0).unwrap().eval_limit(0.5, 1e-9).unwrap().0, 3.0);
        let lin = BaireSeq::continuous(unit(), ContinuousExpr::constant(2.0) * x());
        assert_eq!(truncate(&lin, 1.0).unwrap().eval_limit(0.75, 1e-9).unwrap().0, 1.0);
        assert!(truncate(&lin, 0.0).is_err());
    }

    #[test]
    fn geometric_series_of_constants() {
        let d = unit();
        let dd = d.clone();
        let fam = Family::new(move |k| Ok(BaireSeq::constant(dd.clone(), 0.5f64.powi(k as i32))));
        let s = series_sum(&d, fam, SeriesBounds::geometric(1.0, 0.5)).unwrap();
        let (v, rep) = s.eval_limit(0.3, 1e-9).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
        assert!(rep.stable);
    }

    #[test]
    fn series_closed_form() {
        let d = unit();
        let dd = d.clone();
        let fam = Family::new(move |k| {
            let e = (ContinuousExpr::constant(0.5) * x()).power(k);
            Ok(BaireSeq::continuous(dd.clone(), e))
        });
        let s = series_sum(&d, fam, SeriesBounds::geometric(1.0, 0.5)).unwrap();
        for t in d.samples() {
            let want = t / (2.0 - t);
            assert!((s.eval_limit(t, 1e-8).unwrap().0 - want).abs() < 1e-6);
        }
    }

    #[test]
    fn single_member_series() {
        let d = unit();
        let s = series_sum(&d, Family::finite(vec![xn()]), SeriesBounds::new(|_| 1.0)).unwrap();
        for t in [0.2, 1.0] {
            let a = s.eval_limit(t, 1e-9).unwrap().0;
            let b = xn().eval_limit(t, 1e-9).unwrap().0;
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn series_rejects_bad_bounds() {
        let d = unit();
        let dd = d.clone();
        let fam = Family::new(move |_| Ok(BaireSeq::constant(dd.clone(), 1.0)));
        assert!(matches!(
            series_sum(&d, fam.clone(), SeriesBounds::new(|_| 0.0)),
            Err(SeqError::InvalidBound { .. })
        ));
        assert!(matches!(
            series_sum(&d, fam.clone(), SeriesBounds::new(|k| 1.0 / k as f64)),
            Err(SeqError::SeriesDiverges(_))
        ));
        assert!(matches!(
            series_sum(&d, fam, SeriesBounds::geometric(0.5, 0.5)),
            Err(SeqError::BoundViolated { .. })
        ));
    }

    #[test]
    fn heuristic_series_carries_warning() {
        let d = unit();
        let dd = d.clone();
        let fam = Family::new(move |k| {
            Ok(BaireSeq::constant(dd.clone(), 1.0 / (k * k) as f64))
        });
        let s = series_sum(&d, fam, SeriesBounds::new(|k| 1.0 / (k * k) as f64)).unwrap();
        assert!(!s.warnings().is_empty());
    }

    #[test]
    fn uniform_limit_examples() {
        let d = unit();
        let dd = d.clone();
        let fam = Family::new(move |m| Ok(BaireSeq::constant(dd.clone(), 2.0 + 1.0 / m as f64)));
        let u = uniform_limit(&d, fam, |m| 1.0 / m as f64).unwrap();
        assert!((u.eval_limit(0.5, 1e-9).unwrap().0 - 2.0).abs() < 1e-8);

        let dd = d.clone();
        let fam = Family::new(move |m| {
            let c = 1.0 - 0.5f64.powi(m as i32);
            Ok(BaireSeq::continuous(dd.clone(), ContinuousExpr::constant(c) * x()))
        });
        let u = uniform_limit(&d, fam, |m| 0.5f64.powi(m as i32)).unwrap();
        for t in d.samples() {
            assert!((u.eval_limit(t, 1e-9).unwrap().0 - t).abs() < 1e-8);
        }

        let dd = d.clone();
        let same = Family::new(move |_| {
            Ok(BaireSeq::continuous(dd.clone(), x() * x()))
        });
        let u = uniform_limit(&d, same, |m| 1.0 / m as f64).unwrap();
        assert!((u.eval_limit(0.5, 1e-9).unwrap().0 - 0.25).abs() < 1e-9);
    }

    #[test]
    fn uniform_limit_rejects_bad_error_bound() {
        let d = unit();
        let dd = d.clone();
        let fam = Family::new(move |_| Ok(BaireSeq::constant(dd.clone(), 1.0)));
        assert!(matches!(
            uniform_limit(&d, fam.clone(), |m| m as f64),
            Err(SeqError::ErrNotDecreasing(_))
        ));
        assert!(matches!(
            uniform_limit(&d, fam, |_| 0.7),
            Err(SeqError::ErrNotDecreasing(_))
        ));
    }

    #[test]
    fn memo_is_shared_across_threads() {
        let f = xn();
        std::thread::scope(|s| {
            for _ in 0..4 {
                let f = f.clone();
                s.spawn(move || {
                    for t in [0.1, 0.5, 0.9] {
                        f.eval_limit(t, 1e-6).unwrap();
                    }
                });
            }
        });
        assert!(f.0.memo.lock().unwrap().len() > 3);
    }
}

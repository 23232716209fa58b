//! Executes a parsed script against the core library.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::SeedableRng;
use rayon::prelude::*;

use super::ast::*;
use super::parse;
use super::report::{Format, Report, Row, YValue};
use crate::baire::{
    self, BaireSeq, EvalConfig, Family, SeqError, SeriesBounds, DEFAULT_DEPTH_CAP, DEFAULT_WINDOW,
};
use crate::continuous::{Certificate, ContinuousExpr, ExprError, StdFn};
use crate::domain::{Domain, DomainKind, POINT_TOL};
use crate::extension::{
    extend_bounded, extend_unbounded, solve_rounds, ExtensionConfig, MetricOracle, DEFAULT_ROUNDS,
};
use crate::finite_space::{check_fsigma_characterization, is_continuous, FiniteRealFn, FiniteTopology};
use crate::zero_sets::{
    check_zero_identities_with, countable_intersection_with, separation_witness_with, zero_set_with,
    IdentityCheck, SampledSet,
};

/// Largest number of grid points a domain or table may ask for.
pub const MAX_SAMPLES: f64 = 1e6;
/// Largest round count accepted by `extend`.
pub const MAX_ROUNDS: u64 = 10_000;
/// Points probed by `check ring`.
pub const RING_SAMPLES: usize = 100;
/// Leading bounds inspected when recognising a geometric series bound.
const GEOMETRIC_PROBE: u64 = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub tol: f64,
    pub depth_cap: u64,
    pub step: f64,
    pub seed: u64,
    pub format: Format,
    /// Directory that `finite "path"` domains are resolved against.
    pub base_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tol: 1e-6,
            depth_cap: DEFAULT_DEPTH_CAP,
            step: crate::domain::DEFAULT_STEP,
            seed: 0,
            format: Format::Json,
            base_dir: PathBuf::from("."),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(format!("tol must be positive, got {}", self.tol));
        }
        if self.depth_cap < 8 {
            return Err(format!("depth cap must be at least 8, got {}", self.depth_cap));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(format!("step must be positive, got {}", self.step));
        }
        Ok(())
    }

    pub fn eval(&self) -> EvalConfig {
        EvalConfig { depth_cap: self.depth_cap, window: DEFAULT_WINDOW }
    }
}

/// An error tied to the source position of the construct that caused it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunError {
    pub pos: Pos,
    pub message: String,
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.pos, self.message)
    }
}

impl std::error::Error for RunError {}

fn err(span: Span, message: impl Into<String>) -> RunError {
    RunError { pos: span.start, message: message.into() }
}

fn at<E: fmt::Display>(span: Span) -> impl Fn(E) -> RunError {
    move |e| err(span, e.to_string())
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub reports: Vec<Report>,
}

impl RunOutput {
    pub fn ok(&self) -> bool {
        !self.reports.iter().any(Report::is_error)
    }

    pub fn render(&self, format: Format) -> String {
        super::report::render(&self.reports, format)
    }
}

/// Parse and run; a syntax error yields a single error report.
pub fn run_source(src: &str, cfg: &RunConfig) -> RunOutput {
    match parse(src) {
        Ok(script) => run(&script, cfg),
        Err(e) => RunOutput {
            reports: vec![Report::Error {
                line: e.pos.line,
                col: e.pos.col,
                command: "parse".into(),
                message: e.message,
            }],
        },
    }
}

/// Execute statements in order. A failing statement produces an error
/// report and execution continues with the next one.
pub fn run(script: &Script, cfg: &RunConfig) -> RunOutput {
    let mut reports = Vec::new();
    if let Err(m) = cfg.validate() {
        reports.push(Report::Error { line: 0, col: 0, command: "config".into(), message: m });
        return RunOutput { reports };
    }
    let mut rt = Runtime { cfg: cfg.clone(), bindings: HashMap::new(), failed: HashMap::new() };
    for stmt in &script.stmts {
        match stmt {
            Stmt::Let { name, value, domain, span } => {
                if let Err(e) = rt.bind(name, value, domain) {
                    rt.failed.insert(name.name.clone(), *span);
                    rt.bindings.remove(&name.name);
                    reports.push(error_report("let", e));
                } else {
                    rt.failed.remove(&name.name);
                }
            }
            Stmt::Command(c) => match rt.command(c) {
                Ok(r) => reports.push(r),
                Err(e) => reports.push(error_report(c.name(), e)),
            },
        }
    }
    RunOutput { reports }
}

fn error_report(command: &str, e: RunError) -> Report {
    Report::Error { line: e.pos.line, col: e.pos.col, command: command.into(), message: e.message }
}

struct Runtime {
    cfg: RunConfig,
    bindings: HashMap<String, BaireSeq>,
    failed: HashMap<String, Span>,
}

impl Runtime {
    fn bind(&mut self, name: &Ident, value: &SeqExpr, domain: &DomainLit) -> Result<(), RunError> {
        let d = self.domain(domain)?;
        let env = Env { bindings: Arc::new(self.bindings.clone()), binders: Vec::new(), eval: self.cfg.eval() };
        let f = env.build(value, &d)?;
        self.bindings.insert(name.name.clone(), f);
        Ok(())
    }

    fn domain(&self, d: &DomainLit) -> Result<Domain, RunError> {
        match d {
            DomainLit::Interval { lo, hi, span } => {
                if (hi - lo) / self.cfg.step > MAX_SAMPLES {
                    return Err(err(*span, format!("grid of [{lo}, {hi}] at step {} is too large", self.cfg.step)));
                }
                Domain::interval(*lo, *hi).and_then(|d| d.with_step(self.cfg.step)).map_err(at(*span))
            }
            DomainLit::Points { points, span } => Domain::finite_metric(points.clone()).map_err(at(*span)),
            DomainLit::Finite { path, span } => {
                let full = self.cfg.base_dir.join(path);
                let text = std::fs::read_to_string(&full)
                    .map_err(|e| err(*span, format!("cannot read {}: {e}", full.display())))?;
                let v: serde_json::Value = serde_json::from_str(&text)
                    .map_err(|e| err(*span, format!("{}: {e}", full.display())))?;
                let t = FiniteTopology::from_json(&v).map_err(at(*span))?;
                t.validate().map_err(|v| err(*span, format!("not a topology: {v}")))?;
                Ok(Domain::finite_topology(Arc::new(t)))
            }
        }
    }

    fn get(&self, id: &Ident) -> Result<&BaireSeq, RunError> {
        self.bindings.get(&id.name).ok_or_else(|| {
            let why = match self.failed.get(&id.name) {
                Some(s) => format!("`{}` failed to build at {}", id.name, s.start),
                None => format!("unbound identifier `{}`", id.name),
            };
            err(id.span, why)
        })
    }

    fn command(&self, c: &Command) -> Result<Report, RunError> {
        let line = c.span().start.line;
        let span = c.span();
        let eval = self.cfg.eval();
        match c {
            Command::Eval { target, at: x, tol, .. } => {
                let f = self.get(target)?;
                let tol = tol.unwrap_or(self.cfg.tol);
                let (value, rep) = f.eval_limit_with(*x, tol, &eval).map_err(at(span))?;
                let mut warnings = f.warnings().to_vec();
                warnings.extend(rep.warning);
                Ok(Report::Eval {
                    line,
                    target: target.name.clone(),
                    x: *x,
                    value,
                    stable: rep.stable,
                    depth: rep.depth_used,
                    tol,
                    window: rep.window,
                    warnings,
                })
            }
            Command::Table { target, from, to, step, .. } => {
                let f = self.get(target)?;
                if !(step.is_finite() && *step > 0.0) || from.is_nan() || to.is_nan() || from > to {
                    return Err(err(span, "table needs from <= to and a positive step"));
                }
                let count = ((to - from) / step + 1e-9).floor();
                if count > MAX_SAMPLES {
                    return Err(err(span, "table has too many rows"));
                }
                let exact = ((to - from) / step - count).abs() <= 1e-9 * count.max(1.0);
                let xs: Vec<f64> = if exact && count >= 1.0 {
                    crate::domain::linspace(*from, *to, count as usize)
                } else {
                    (0..=count as u64).map(|i| from + i as f64 * step).collect()
                };
                let rows = self.rows(f, &xs).map_err(at(span))?;
                Ok(Report::Table { line, target: target.name.clone(), rows, warnings: f.warnings().to_vec() })
            }
            Command::ZeroSet { target, eps, .. } => {
                let f = self.get(target)?;
                let z = zero_set_with(f, *eps, &eval).map_err(at(span))?;
                Ok(Report::Zeroset {
                    line,
                    target: target.name.clone(),
                    domain: f.domain().to_string(),
                    eps: *eps,
                    samples: z.samples().to_vec(),
                    excluded: z.excluded().to_vec(),
                })
            }
            Command::Separate { f: fi, g: gi, .. } => {
                let (f, g) = (self.get(fi)?, self.get(gi)?);
                let w = separation_witness_with(f, g, None, self.cfg.tol, &eval).map_err(at(span))?;
                w.verify(10.0 * self.cfg.tol, &eval).map_err(at(span))?;
                let rows = self.rows(&w.h, &w.h.domain().samples()).map_err(at(span))?;
                Ok(Report::Separate {
                    line,
                    f: fi.name.clone(),
                    g: gi.name.clone(),
                    verified: true,
                    low_set: w.low_set.samples().to_vec(),
                    high_set: w.high_set.samples().to_vec(),
                    rows,
                })
            }
            Command::Extend { target, y, space, stop, .. } => self.extend(line, span, target, y, space, *stop),
            Command::Check { kind, args, .. } => {
                let names: Vec<String> = args.iter().map(|a| a.name.clone()).collect();
                let (pass, details) = match kind {
                    CheckKind::Ring => self.check_ring(args, span)?,
                    CheckKind::ZeroIdentities => {
                        let (f, g) = (self.get(&args[0])?, self.get(&args[1])?);
                        let r = check_zero_identities_with(f, g, self.cfg.tol, &[2, 3], &eval).map_err(at(span))?;
                        (r.pass(), serde_json::to_value(&r).expect("serializable"))
                    }
                    CheckKind::Fsigma => self.check_fsigma(&args[0], span)?,
                };
                Ok(Report::Check { line, kind: kind.keyword().into(), args: names, pass, details })
            }
        }
    }

    fn rows(&self, f: &BaireSeq, xs: &[f64]) -> Result<Vec<Row>, SeqError> {
        let eval = self.cfg.eval();
        xs.par_iter()
            .map(|&x| {
                let (value, rep) = f.eval_limit_with(x, self.cfg.tol, &eval)?;
                Ok(Row { x, value, stable: rep.stable, depth: rep.depth_used })
            })
            .collect()
    }

    fn extend(
        &self,
        line: usize,
        span: Span,
        target: &Ident,
        y: &[f64],
        space: &Ident,
        stop: Option<Stop>,
    ) -> Result<Report, RunError> {
        let f = self.get(target)?;
        let x = self.get(space)?.domain().clone();
        let ys = SampledSet::from_points(&x, y.to_vec()).map_err(at(span))?;
        let bounded = f.bound().is_some_and(|b| b > 0.0);
        let m = if bounded { f.bound().unwrap_or(1.0) } else { std::f64::consts::FRAC_PI_2 };
        let rounds = match stop {
            None => DEFAULT_ROUNDS,
            Some(Stop::Rounds(r)) => r,
            Some(Stop::Tol(t)) => solve_rounds(m, t).map_err(at(span))?,
        };
        if rounds == 0 || rounds > MAX_ROUNDS {
            return Err(err(span, format!("rounds must be between 1 and {MAX_ROUNDS}, got {rounds}")));
        }
        let cfg = ExtensionConfig { rounds, tol: self.cfg.tol, eval: self.cfg.eval(), ..Default::default() };
        let (g, state, mode) = if bounded {
            let ext = extend_bounded(f, &ys, &x, &MetricOracle, &cfg).map_err(at(span))?;
            (ext.g, ext.state, "bounded")
        } else {
            let ext = extend_unbounded(f, &ys, &x, &MetricOracle, &cfg).map_err(at(span))?;
            (ext.h, ext.bounded.state, "unbounded")
        };
        let eval = self.cfg.eval();
        let mut values = Vec::new();
        let mut max_deviation = 0.0f64;
        for &p in ys.samples() {
            let (fv, _) = f.eval_limit_with(p, self.cfg.tol / 10.0, &eval).map_err(at(span))?;
            let (gv, _) = g.eval_limit_with(p, self.cfg.tol / 10.0, &eval).map_err(at(span))?;
            max_deviation = max_deviation.max((fv - gv).abs());
            values.push(YValue { y: p, f: fv, g: gv });
        }
        Ok(Report::Extend {
            line,
            target: target.name.clone(),
            space: space.name.clone(),
            mode: mode.into(),
            m: state.m,
            trace: state.history.clone(),
            final_sup_residual: state.sup_residual(),
            final_bound: state.final_bound(),
            values,
            max_deviation,
        })
    }

    fn check_ring(&self, args: &[Ident], span: Span) -> Result<(bool, serde_json::Value), RunError> {
        let (f, g, h) = (self.get(&args[0])?, self.get(&args[1])?, self.get(&args[2])?);
        let e = at(span);
        let d = f.domain().clone();
        let zero = BaireSeq::constant(d.clone(), 0.0);
        let one = BaireSeq::constant(d.clone(), 1.0);
        let (add, mul) = (baire::add, baire::mul);
        let sides: Vec<(&str, BaireSeq, BaireSeq)> = vec![
            ("f+g = g+f", add(f, g).map_err(&e)?, add(g, f).map_err(&e)?),
            ("(f+g)+h = f+(g+h)", add(&add(f, g).map_err(&e)?, h).map_err(&e)?, add(f, &add(g, h).map_err(&e)?).map_err(&e)?),
            ("f*g = g*f", mul(f, g).map_err(&e)?, mul(g, f).map_err(&e)?),
            ("(f*g)*h = f*(g*h)", mul(&mul(f, g).map_err(&e)?, h).map_err(&e)?, mul(f, &mul(g, h).map_err(&e)?).map_err(&e)?),
            (
                "f*(g+h) = f*g+f*h",
                mul(f, &add(g, h).map_err(&e)?).map_err(&e)?,
                add(&mul(f, g).map_err(&e)?, &mul(f, h).map_err(&e)?).map_err(&e)?,
            ),
            ("f+0 = f", add(f, &zero).map_err(&e)?, f.clone()),
            ("f*1 = f", mul(f, &one).map_err(&e)?, f.clone()),
            ("f+(-f) = 0", add(f, &baire::neg(f)).map_err(&e)?, zero.clone()),
        ];
        let mut xs = d.samples();
        if xs.len() > RING_SAMPLES {
            let mut rng = StdRng::seed_from_u64(self.cfg.seed);
            let mut idx = rand::seq::index::sample(&mut rng, xs.len(), RING_SAMPLES).into_vec();
            idx.sort_unstable();
            xs = idx.into_iter().map(|i| xs[i]).collect();
        }
        let tol = self.cfg.tol;
        let eval = self.cfg.eval();
        let mut skipped = 0usize;
        let mut checks = Vec::new();
        for (name, lhs, rhs) in &sides {
            let verdicts: Vec<Option<bool>> = xs
                .par_iter()
                .map(|&x| {
                    let (a, ra) = lhs.eval_limit_with(x, tol, &eval)?;
                    let (b, rb) = rhs.eval_limit_with(x, tol, &eval)?;
                    if !(ra.stable && rb.stable) {
                        return Ok(None);
                    }
                    Ok(Some((a - b).abs() <= 10.0 * tol * a.abs().max(b.abs()).max(1.0)))
                })
                .collect::<Result<_, SeqError>>()
                .map_err(&e)?;
            skipped += verdicts.iter().filter(|v| v.is_none()).count();
            let offending: Vec<f64> =
                xs.iter().zip(&verdicts).filter(|(_, v)| **v == Some(false)).map(|(x, _)| *x).collect();
            checks.push(IdentityCheck { name: name.to_string(), pass: offending.is_empty(), offending });
        }
        let pass = checks.iter().all(|c| c.pass);
        Ok((pass, serde_json::json!({ "samples": xs.len(), "skipped": skipped, "identities": checks })))
    }

    fn check_fsigma(&self, id: &Ident, span: Span) -> Result<(bool, serde_json::Value), RunError> {
        let f = self.get(id)?;
        let DomainKind::FiniteTopology { space } = f.domain().kind() else {
            return Err(err(span, format!("`{}` must live on a finite topological space", id.name)));
        };
        let tol = self.cfg.tol;
        let eval = self.cfg.eval();
        let mut values = Vec::with_capacity(space.len());
        let mut depth = 1;
        for i in 0..space.len() {
            let (v, rep) = f.eval_limit_with(i as f64, tol, &eval).map_err(at(span))?;
            if !rep.stable {
                return Err(err(span, format!("limit at point {} did not stabilise", space.points()[i])));
            }
            depth = depth.max(rep.depth_used);
            values.push((v / tol).round() * tol + 0.0);
        }
        // the limit is only Baire-one if the terms themselves are continuous
        let mut probes: Vec<u64> = (1..=8).collect();
        probes.push(depth);
        for n in probes {
            let term: Vec<f64> = (0..space.len())
                .map(|i| f.eval_term(n, i as f64))
                .collect::<Result<_, _>>()
                .map_err(at(span))?;
            let term = FiniteRealFn::new(term).map_err(at(span))?;
            if !is_continuous(&term, space) {
                return Err(err(span, format!("term {n} of `{}` is not continuous on the space", id.name)));
            }
        }
        let limit = FiniteRealFn::new(values.clone()).map_err(at(span))?;
        let report = check_fsigma_characterization(&limit, space);
        Ok((report.pass, serde_json::json!({ "values": values, "intervals": report.intervals })))
    }
}

/// Everything needed to turn a sequence expression into a [`BaireSeq`].
#[derive(Clone)]
struct Env {
    bindings: Arc<HashMap<String, BaireSeq>>,
    /// Family indices in scope, innermost last.
    binders: Vec<(String, f64)>,
    eval: EvalConfig,
}

fn family_error(e: RunError) -> SeqError {
    SeqError::Expr(ExprError::Invalid(e.to_string()))
}

impl Env {
    fn build(&self, e: &SeqExpr, d: &Domain) -> Result<BaireSeq, RunError> {
        match e {
            SeqExpr::Seq { body, .. } => {
                let first = compile(body, 1, &self.binders)?;
                if !body.mentions("n") {
                    return Ok(BaireSeq::continuous(d.clone(), first));
                }
                let body = body.clone();
                let binders = self.binders.clone();
                Ok(BaireSeq::from_fallible(
                    d.clone(),
                    move |n| compile(&body, n, &binders).map_err(family_error),
                    None,
                    None,
                    "seq",
                ))
            }
            SeqExpr::Ref(id) => {
                let f = self.bindings.get(&id.name).ok_or_else(|| err(id.span, format!("`{}` is not available", id.name)))?;
                if f.domain().same_space(d) || subdomain(d, f.domain()) {
                    Ok(f.restrict(d.clone()))
                } else {
                    Err(err(id.span, format!("`{}` is defined on {}, which does not contain {}", id.name, f.domain(), d)))
                }
            }
            SeqExpr::Binary { op, lhs, rhs, span } => {
                let (a, b) = (self.build(lhs, d)?, self.build(rhs, d)?);
                let r = match op {
                    SeqBinOp::Add => baire::add(&a, &b),
                    SeqBinOp::Mul => baire::mul(&a, &b),
                    SeqBinOp::Join => baire::join(&a, &b),
                    SeqBinOp::Meet => baire::meet(&a, &b),
                };
                r.map_err(at(*span))
            }
            SeqExpr::Unary { op, arg, .. } => {
                let a = self.build(arg, d)?;
                Ok(match op {
                    SeqUnOp::Abs => baire::abs(&a),
                    SeqUnOp::Neg => baire::neg(&a),
                })
            }
            SeqExpr::Recip { arg, delta, span } => {
                let a = self.build(arg, d)?;
                baire::reciprocal_positive_with(&a, *delta, &self.eval).map_err(at(*span))
            }
            SeqExpr::Compose { func, arg, span } => {
                let a = self.build(arg, d)?;
                let g = match *func {
                    StdName::Arctan => StdFn::Arctan,
                    StdName::Tan => StdFn::TanRestricted,
                    StdName::Affine(a, b) => StdFn::Affine { a, b },
                    StdName::Power(k) => StdFn::Power(k),
                    StdName::Reciprocal(delta) => StdFn::ReciprocalNonzero(Certificate::Declared(delta)),
                };
                baire::compose_continuous(g, &a).map_err(at(*span))
            }
            SeqExpr::Truncate { arg, bound, span } => {
                let a = self.build(arg, d)?;
                baire::truncate(&a, *bound).map_err(at(*span))
            }
            SeqExpr::Series { binder, body, bound, span } => {
                let family = self.family(binder, body, d)?;
                let bounds = self.series_bounds(binder, bound)?;
                baire::series_sum_with(d, family, bounds, &self.eval).map_err(at(*span))
            }
            SeqExpr::IntersectZ { binder, body, span } => {
                let family = self.family(binder, body, d)?;
                countable_intersection_with(d, family, &self.eval).map_err(at(*span))
            }
        }
    }

    /// `k -> body[binder := k]`; the first member is built eagerly so that
    /// errors surface with a position.
    fn family(&self, binder: &Ident, body: &SeqExpr, d: &Domain) -> Result<Family, RunError> {
        let mut first = self.clone();
        first.binders.push((binder.name.clone(), 1.0));
        first.build(body, d)?;
        let env = self.clone();
        let name = binder.name.clone();
        let body = body.clone();
        let d = d.clone();
        Ok(Family::new(move |k| {
            let mut env = env.clone();
            env.binders.push((name.clone(), k as f64));
            env.build(&body, &d).map_err(family_error)
        }))
    }

    fn series_bounds(&self, binder: &Ident, bound: &Expr) -> Result<SeriesBounds, RunError> {
        let value = |k: u64| {
            let mut b = self.binders.clone();
            b.push((binder.name.clone(), k as f64));
            compile(bound, 1, &b).and_then(|e| {
                e.as_const().ok_or_else(|| err(bound.span(), "series bound must be a number for each k"))
            })
        };
        let mut ms = Vec::with_capacity(GEOMETRIC_PROBE as usize);
        for k in 1..=GEOMETRIC_PROBE {
            let m = value(k)?;
            if !(m.is_finite() && m > 0.0) {
                return Err(err(bound.span(), format!("series bound at k = {k} is {m}, must be positive")));
            }
            ms.push(m);
        }
        let ratio = ms[1] / ms[0];
        let geometric = ratio < 1.0
            && ms.windows(2).all(|w| (w[1] / w[0] - ratio).abs() <= 1e-9 * ratio);
        if geometric {
            return Ok(SeriesBounds::geometric(ms[0] / ratio, ratio));
        }
        let bound = bound.clone();
        let binders = self.binders.clone();
        let name = binder.name.clone();
        Ok(SeriesBounds::new(move |k| {
            let mut b = binders.clone();
            b.push((name.clone(), k as f64));
            compile(&bound, 1, &b).ok().and_then(|e| e.as_const()).unwrap_or(f64::NAN)
        }))
    }
}

/// Whether every point of `inner` lies in `outer`.
fn subdomain(inner: &Domain, outer: &Domain) -> bool {
    if !inner.is_metric() || !outer.is_metric() {
        return inner.same_space(outer);
    }
    inner.pieces().iter().all(|&(lo, hi)| {
        if lo == hi {
            outer.contains(lo)
        } else {
            outer.pieces().iter().any(|&(a, b)| a - POINT_TOL <= lo && hi <= b + POINT_TOL && a < b)
        }
    })
}

fn constant_op(op: BinOp, a: f64, b: f64, span: Span) -> Result<f64, RunError> {
    let v = match op {
        BinOp::Add => a + b,
        BinOp::Sub => a - b,
        BinOp::Mul => a * b,
        BinOp::Div if b == 0.0 => return Err(err(span, "division by zero")),
        BinOp::Div => a / b,
        BinOp::Pow => a.powf(b),
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(err(span, format!("{a} {} {b} is not a finite number", op.symbol())))
    }
}

fn nonzero_recip(e: ContinuousExpr) -> ContinuousExpr {
    e.compose(StdFn::ReciprocalNonzero(Certificate::Sampled))
}

/// Lower a scalar expression to a continuous function of `x` for term `n`,
/// folding constant subexpressions.
fn compile(e: &Expr, n: u64, binders: &[(String, f64)]) -> Result<ContinuousExpr, RunError> {
    match e {
        Expr::Num(v, _) => Ok(ContinuousExpr::constant(*v)),
        Expr::Var(id) => match id.name.as_str() {
            "x" => Ok(ContinuousExpr::var()),
            "n" => Ok(ContinuousExpr::constant(n as f64)),
            name => binders
                .iter()
                .rev()
                .find(|(b, _)| b == name)
                .map(|(_, v)| ContinuousExpr::constant(*v))
                .ok_or_else(|| err(id.span, format!("unbound variable `{name}`"))),
        },
        Expr::Neg(inner, _) => {
            let c = compile(inner, n, binders)?;
            Ok(match c.as_const() {
                Some(v) => ContinuousExpr::constant(-v),
                None => -c,
            })
        }
        Expr::Bin { op, lhs, rhs, span } => {
            let l = compile(lhs, n, binders)?;
            let r = compile(rhs, n, binders)?;
            if let (Some(a), Some(b)) = (l.as_const(), r.as_const()) {
                return Ok(ContinuousExpr::constant(constant_op(*op, a, b, *span)?));
            }
            Ok(match op {
                BinOp::Add => l + r,
                BinOp::Sub => l - r,
                BinOp::Mul => l * r,
                BinOp::Div => match r.as_const() {
                    Some(0.0) => return Err(err(*span, "division by zero")),
                    Some(b) => l * ContinuousExpr::constant(1.0 / b),
                    None => l * nonzero_recip(r),
                },
                BinOp::Pow => {
                    let Some(k) = r.as_const() else {
                        return Err(err(rhs.span(), "exponent must not depend on x"));
                    };
                    if k.fract() != 0.0 || k.abs() > i32::MAX as f64 {
                        return Err(err(rhs.span(), format!("exponent {k} must be an integer when the base depends on x")));
                    }
                    if k >= 0.0 {
                        l.power(k as u64)
                    } else {
                        nonzero_recip(l.power((-k) as u64))
                    }
                }
            })
        }
        Expr::Call { func, args, span } => {
            let cs: Vec<ContinuousExpr> = args.iter().map(|a| compile(a, n, binders)).collect::<Result<_, _>>()?;
            if cs.len() != func.arity() {
                return Err(err(*span, format!("`{}` takes {} argument(s)", func.name(), func.arity())));
            }
            let consts: Option<Vec<f64>> = cs.iter().map(|c| c.as_const()).collect();
            if let Some(v) = consts {
                return Ok(ContinuousExpr::constant(match func {
                    Func::Abs => v[0].abs(),
                    Func::Min => v[0].min(v[1]),
                    Func::Max => v[0].max(v[1]),
                }));
            }
            Ok(match func {
                Func::Abs => cs[0].abs(),
                Func::Min => cs[0].min(&cs[1]),
                Func::Max => cs[0].max(&cs[1]),
            })
        }
    }
}

//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any failed.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use b1calc_core::baire::{
    mul, reciprocal_positive, series_sum, uniform_limit, BaireSeq, EvalConfig, Family, SeriesBounds,
};
use b1calc_core::continuous::ContinuousExpr;
use b1calc_core::domain::Domain;
use b1calc_core::dsl::{parse, pretty};
use b1calc_core::extension::{extend_bounded, ExtensionConfig, MetricOracle};
use b1calc_core::finite_space::{
    check_fsigma_characterization, enumerate_topologies, exact_zero_identities, is_f_sigma, value_grid,
    FiniteRealFn, FiniteSequence, FiniteTopology,
};
use b1calc_core::library::{band_family, powers, GeometricFamily, LibFn, PositiveFn, UniformFamily};
use b1calc_core::zero_sets::{
    check_zero_identities, countable_intersection, separation_witness, verify_countable_intersection,
    SampledSet,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;
type Criterion = fn() -> Outcome;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let d = Domain::interval(0.0, 1.0).map_err(e)?;
    let f = powers(&d);
    let (v, rep) = f.eval_limit(1.0, 1e-6).map_err(e)?;
    ensure(v == 1.0 && rep.stable, || format!("f(1) = {v}, stable = {}", rep.stable))?;
    let mut worst = 0.0f64;
    for i in 0..10 {
        let x = i as f64 / 10.0;
        let (v, rep) = f.eval_limit(x, 1e-6).map_err(e)?;
        ensure(rep.stable, || format!("unstable at x = {x}"))?;
        worst = worst.max(v.abs());
    }
    ensure(worst <= 1e-6, || format!("max |f(x)| on grid = {worst:e}"))?;
    let took = start.elapsed();
    ensure(took < Duration::from_secs(1), || format!("took {took:?}"))?;
    Ok(format!("f(1) = 1 exactly, max |f| on [0, 0.9] grid = {worst:.1e}, {took:.1?}"))
}

fn criterion_2() -> Outcome {
    let d = Domain::interval(0.0, 1.0).map_err(e)?.with_count(1000).map_err(e)?;
    let grid = d.samples();
    let mut rng = StdRng::seed_from_u64(2);
    let mut checks = 0;
    for pair in 0..50 {
        let (a, b) = (LibFn::random(&grid, &mut rng), LibFn::random(&grid, &mut rng));
        let f = a.build(&d).map_err(e)?;
        let g = b.build(&d).map_err(e)?;
        let rep = check_zero_identities(&f, &g, 1e-9, &[2, 3]).map_err(e)?;
        for c in &rep.checks {
            ensure(c.pass, || format!("pair {pair} ({a:?}, {b:?}): {} fails at {:?}", c.name, c.offending))?;
            checks += 1;
        }
    }
    let grid = value_grid();
    let mut exact = 0;
    for n in 0..=4 {
        for t in enumerate_topologies(n) {
            for _ in 0..5 {
                let f = FiniteSequence::random(&t, &grid, 3, &mut rng).limit();
                let g = FiniteSequence::random(&t, &grid, 3, &mut rng).limit();
                for c in exact_zero_identities(&f, &g, &[2, 3]) {
                    ensure(c.pass, || format!("finite space {:?}: {} fails", t.opens(), c.name))?;
                    exact += 1;
                }
            }
        }
    }
    Ok(format!("{checks} sampled identity checks at eps = 1e-9 and {exact} exact finite checks agree"))
}

fn criterion_3() -> Outcome {
    let d = Domain::interval(0.0, 1.0).map_err(e)?.with_count(51).map_err(e)?;
    let mut rng = StdRng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let fam = GeometricFamily::random(&mut rng);
        let s = series_sum(&d, fam.family(&d), fam.bounds()).map_err(e)?;
        let cut = fam.cutoff(1e-8);
        for x in d.samples() {
            let (v, _) = s.eval_limit(x, 1e-8).map_err(e)?;
            let mut oracle = 0.0;
            for k in 1..=cut {
                oracle += fam.member(&d, k).map_err(e)?.eval_limit(x, 1e-10).map_err(e)?.0;
            }
            worst = worst.max((v - oracle).abs());
            ensure((v - oracle).abs() <= 1e-6, || format!("family {i} at x = {x}: {v} vs oracle {oracle}"))?;
        }
    }
    let members = Family::new({
        let d = d.clone();
        move |k| {
            let e = (ContinuousExpr::var() * ContinuousExpr::constant(0.5)).power(k);
            Ok(BaireSeq::continuous(d.clone(), e))
        }
    });
    let s = series_sum(&d, members, SeriesBounds::geometric(1.0, 0.5)).map_err(e)?;
    let mut closed = 0.0f64;
    for x in d.samples() {
        let (v, _) = s.eval_limit(x, 1e-8).map_err(e)?;
        let want = x / (2.0 - x);
        closed = closed.max((v - want).abs());
        ensure((v - want).abs() <= 1e-6, || format!("x/(2-x) at {x}: {v} vs {want}"))?;
    }
    Ok(format!("max oracle gap {worst:.1e} over 20 families, max gap to x/(2-x) {closed:.1e}"))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let y_dom = Domain::finite_metric(vec![0.0, 1.0]).map_err(e)?;
    let f = BaireSeq::continuous(y_dom, ContinuousExpr::var());
    let x = Domain::interval(0.0, 1.0).map_err(e)?;
    let y = SampledSet::from_points(&x, vec![0.0, 1.0]).map_err(e)?;
    let cfg = ExtensionConfig { rounds: 40, m: Some(1.0), ..Default::default() };
    let ext = extend_bounded(&f, &y, &x, &MetricOracle, &cfg).map_err(e)?;
    let hist = &ext.state.history;
    ensure(hist.len() == 40, || format!("{} rounds recorded", hist.len()))?;
    for rec in hist {
        let r_n = 0.5 * (2.0f64 / 3.0).powi(rec.n as i32);
        ensure((rec.r_n - r_n).abs() <= 1e-15, || format!("round {}: r_n = {} vs {r_n}", rec.n, rec.r_n))?;
        ensure(rec.sup_residual <= 3.0 * r_n + 1e-9, || {
            format!("round {}: sup residual {} > 3 r_n = {}", rec.n, rec.sup_residual, 3.0 * r_n)
        })?;
    }
    let r41 = 0.5 * (2.0f64 / 3.0).powi(41);
    let mut worst = 0.0f64;
    for (yv, want) in [(0.0, 0.0), (1.0, 1.0)] {
        let (g, _) = ext.g.eval_limit(yv, 1e-9).map_err(e)?;
        worst = worst.max((g - want).abs());
        ensure((g - want).abs() <= 3.0 * r41 + 1e-6, || format!("g({yv}) = {g}"))?;
    }
    let trace = ext.state.trace_json();
    let column: Vec<f64> = trace["rounds"]
        .as_array()
        .ok_or("trace has no rounds")?
        .iter()
        .map(|r| r["sup_residual"].as_f64().unwrap_or(f64::NAN))
        .collect();
    for (i, w) in column.windows(2).enumerate() {
        let bound = 3.0 * 0.5 * (2.0f64 / 3.0).powi(i as i32 + 2);
        ensure(w[1] <= w[0] || w[1] <= bound + 1e-9, || format!("trace rises at round {}", i + 2))?;
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(5), || format!("took {took:?}"))?;
    Ok(format!("invariant held for 40 rounds, max |g - f| on Y = {worst:.1e} (bound {:.1e}), {took:.1?}", 3.0 * r41 + 1e-6))
}

fn criterion_5() -> Outcome {
    let d = Domain::interval(-1.0, 1.0).map_err(e)?.with_step(0.01).map_err(e)?;
    ensure(d.samples().len() == 201, || "grid is not 201 points".into())?;
    let fs = band_family(&d);
    let g = countable_intersection(&d, fs.clone()).map_err(e)?;
    let report = verify_countable_intersection(&g, &fs, 1e-6, 20, &EvalConfig::default()).map_err(e)?;
    let oracle = if report.disagreements.is_empty() {
        "per-factor oracle (n <= 20) agrees at all 201 samples".to_string()
    } else {
        format!("per-factor oracle disagrees at {:?}", report.disagreements)
    };
    let z = report.zero_set.samples();
    let exact = z.len() == 1 && z[0] == 0.0 && report.zero_set.excluded().is_empty();
    if exact && report.disagreements.is_empty() {
        Ok(format!("Z(g) = {{0}}; {oracle}"))
    } else {
        Err(format!("Z(g) at eps = 1e-6 has {} samples {:?} instead of {{0}}; {oracle}", z.len(), z))
    }
}

fn criterion_6() -> Outcome {
    let d = Domain::interval(0.0, 1.0).map_err(e)?;
    let f = BaireSeq::continuous(d.clone(), ContinuousExpr::var());
    let g = BaireSeq::continuous(d.clone(), ContinuousExpr::var() - ContinuousExpr::constant(1.0));
    let w = separation_witness(&f, &g, None, 1e-9).map_err(e)?;
    let mut worst = 0.0f64;
    for x in d.samples() {
        let (h, _) = w.h.eval_limit(x, 1e-8).map_err(e)?;
        ensure((0.0..=1.0).contains(&h), || format!("h({x}) = {h} outside [0, 1]"))?;
        worst = worst.max((h - x).abs());
    }
    ensure(worst <= 1e-6, || format!("max |h - x| = {worst:e}"))?;
    let (h0, _) = w.h.eval_limit(0.0, 1e-10).map_err(e)?;
    let (h1, _) = w.h.eval_limit(1.0, 1e-10).map_err(e)?;
    ensure(h0.abs() <= 1e-9 && (h1 - 1.0).abs() <= 1e-9, || format!("h(0) = {h0}, h(1) = {h1}"))?;
    Ok(format!("max |h - x| = {worst:.1e}, h(0) = {h0:e}, |h(1) - 1| = {:.1e}", (h1 - 1.0).abs()))
}

fn criterion_7() -> Outcome {
    let d = Domain::interval(0.0, 1.0).map_err(e)?.with_count(21).map_err(e)?;
    let mut rng = StdRng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for i in 0..10 {
        let fam = UniformFamily::random(&mut rng);
        let f = uniform_limit(&d, fam.family(&d), fam.err_fn()).map_err(e)?;
        for m in [2u64, 5, 10, 40] {
            let fm = fam.member(&d, m).map_err(e)?;
            for x in d.samples() {
                let (v, _) = f.eval_limit(x, 1e-8).map_err(e)?;
                let (w, _) = fm.eval_limit(x, 1e-9).map_err(e)?;
                let slack = fam.err(m) + 1e-6;
                worst = worst.max((v - w).abs() / slack);
                ensure((v - w).abs() <= slack, || format!("family {i}, m = {m}, x = {x}: |{v} - {w}| > {slack}"))?;
            }
        }
    }
    Ok(format!("10 families, worst gap / (err(m) + 1e-6) = {worst:.3}"))
}

fn criterion_8() -> Outcome {
    let grid = value_grid();
    let mut rng = StdRng::seed_from_u64(8);
    let mut spaces = 0;
    let mut limits = 0;
    for n in 0..=4 {
        for t in enumerate_topologies(n) {
            spaces += 1;
            for _ in 0..1000 {
                let burn = rng.gen_range(0..4);
                let f = FiniteSequence::random(&t, &grid, burn, &mut rng).limit();
                let rep = check_fsigma_characterization(&f, &t);
                ensure(rep.pass, || format!("space {:?}, f = {:?} fails", t.opens(), f.values))?;
                limits += 1;
            }
        }
    }
    let s = FiniteTopology::sierpinski();
    let a = s.subset_of(&["a"]).ok_or("no point a")?;
    ensure(!is_f_sigma(a, &s), || "{a} reported F-sigma".into())?;
    let f = FiniteRealFn::new(vec![0.0, 1.0]).map_err(e)?;
    let rep = check_fsigma_characterization(&f, &s);
    let failing: Vec<_> = rep.failures().map(|v| v.preimage.clone()).collect();
    ensure(!rep.pass && failing == vec![vec!["a".to_string()]], || format!("Sierpinski failures {failing:?}"))?;
    Ok(format!("{limits} limits over {spaces} spaces pass; Sierpinski indicator fails exactly on {{a}}"))
}

fn criterion_9() -> Outcome {
    let d = Domain::interval(0.0, 1.0).map_err(e)?;
    let mut rng = StdRng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let p = PositiveFn::random(&mut rng);
        let f = p.build(&d).map_err(e)?;
        let prod = mul(&f, &reciprocal_positive(&f, None).map_err(e)?).map_err(e)?;
        for x in d.samples() {
            let (v, _) = prod.eval_limit(x, 1e-7).map_err(e)?;
            worst = worst.max((v - 1.0).abs());
            ensure((v - 1.0).abs() <= 1e-5, || format!("{p:?} at {x}: f * (1/f) = {v}"))?;
        }
    }
    Ok(format!("max |f * (1/f) - 1| = {worst:.1e} over 20 functions"))
}

fn criterion_10() -> Outcome {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus");
    let mut scripts = 0;
    let mut entries: Vec<_> = std::fs::read_dir(&dir).map_err(e)?.filter_map(Result::ok).map(|d| d.path()).collect();
    entries.sort();
    for path in entries.iter().filter(|p| p.extension().is_some_and(|x| x == "b1")) {
        let src = std::fs::read_to_string(path).map_err(e)?;
        let a = parse(&src).map_err(|err| format!("{}: {err}", path.display()))?;
        let b = parse(&pretty(&a)).map_err(|err| format!("{} reprinted: {err}", path.display()))?;
        ensure(a == b, || format!("{} does not round-trip", path.display()))?;
        scripts += 1;
    }
    ensure(scripts >= 20, || format!("only {scripts} corpus scripts"))?;
    let mut rng = StdRng::seed_from_u64(10);
    let mut errors = 0;
    for _ in 0..10_000 {
        let len = rng.gen_range(0..200);
        let bytes: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
        let src = String::from_utf8_lossy(&bytes);
        let outcome = catch_unwind(AssertUnwindSafe(|| parse(&src)));
        match outcome {
            Err(_) => return Err(format!("parser panicked on {bytes:?}")),
            Ok(Err(err)) => {
                ensure(err.pos.line >= 1 && err.pos.col >= 1, || format!("unpositioned error {err:?}"))?;
                errors += 1;
            }
            Ok(Ok(_)) => {}
        }
    }
    Ok(format!("{scripts} corpus scripts round-trip; 10^4 random inputs gave {errors} positioned errors, no panics"))
}

fn main() {
    std::panic::set_hook(Box::new(|_| {}));
    let criteria: [(&str, Criterion); 10] = [
        ("x^n pointwise limit", criterion_1),
        ("zero-set algebra", criterion_2),
        ("diagonal series vs oracle", criterion_3),
        ("extension decay", criterion_4),
        ("countable intersection", criterion_5),
        ("separation witness", criterion_6),
        ("uniform-limit closure", criterion_7),
        ("finite backend soundness", criterion_8),
        ("reciprocal identity", criterion_9),
        ("parser round-trip and fuzz", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(run).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

use std::fs;
use std::path::{Path, PathBuf};

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use b1calc_core::dsl::ast::*;
use b1calc_core::dsl::report::CSV_HEADER;
use b1calc_core::dsl::{parse, pretty, run_source, Format, RunConfig};

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus")
}

fn corpus() -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "b1"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap()))
        .collect();
    out.sort();
    out
}

fn config() -> RunConfig {
    RunConfig { base_dir: corpus_dir(), ..RunConfig::default() }
}

#[test]
fn corpus_has_twenty_scripts() {
    assert_eq!(corpus().len(), 20);
}

#[test]
fn corpus_round_trips() {
    for (name, src) in corpus() {
        let ast = parse(&src).unwrap_or_else(|e| panic!("{name}: {e}"));
        let printed = pretty(&ast);
        let again = parse(&printed).unwrap_or_else(|e| panic!("{name} reprinted: {e}\n{printed}"));
        assert_eq!(ast, again, "{name}");
        assert_eq!(printed, pretty(&again), "{name} is not canonical");
    }
}

#[test]
fn corpus_runs_cleanly_and_deterministically() {
    for (name, src) in corpus() {
        let cfg = RunConfig { seed: 7, ..config() };
        let a = run_source(&src, &cfg);
        assert!(a.ok(), "{name}: {}", a.render(Format::Json));
        let b = run_source(&src, &cfg);
        assert_eq!(a.render(Format::Json), b.render(Format::Json), "{name}");
        assert_eq!(a.render(Format::Csv), b.render(Format::Csv), "{name}");
    }
}

#[test]
fn json_lines_and_csv_shapes() {
    let src = fs::read_to_string(corpus_dir().join("02_table.b1")).unwrap();
    let out = run_source(&src, &config());
    let json = out.render(Format::Json);
    for line in json.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["cmd"].is_string());
        assert!(v["line"].as_u64().is_some_and(|l| l >= 1));
    }
    let csv = out.render(Format::Csv);
    let mut rdr = csv::Reader::from_reader(csv.as_bytes());
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), CSV_HEADER);
    assert!(rdr.records().all(|r| r.unwrap().len() == CSV_HEADER.len()));
}

#[test]
fn runtime_errors_are_positioned_and_do_not_stop_the_script() {
    let src = "let f = seq(n, x) on [0, 1];\nlet g = recip(f) on [0, 1];\neval f at 0.5;\neval g at 0.5;\n";
    let out = run_source(src, &config());
    let lines: Vec<serde_json::Value> =
        out.render(Format::Json).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines[0]["cmd"], "error");
    assert_eq!(lines[0]["line"], 2);
    assert_eq!(lines[1]["cmd"], "eval");
    assert_eq!(lines[1]["value"], 0.5);
    assert_eq!(lines[2]["cmd"], "error");
    assert!(lines[2]["message"].as_str().unwrap().contains("failed to build at 2:"));
}

// -- randomized syntax trees --

struct Gen {
    rng: StdRng,
    names: Vec<String>,
    binders: Vec<String>,
    fresh: usize,
}

impl Gen {
    fn num(&mut self) -> f64 {
        match self.rng.gen_range(0..4) {
            0 => self.rng.gen_range(0..100) as f64,
            1 => self.rng.gen_range(0..10_000) as f64 / 100.0,
            2 => self.rng.gen_range(1e-9..1e9),
            _ => 0.5f64.powi(self.rng.gen_range(1..40)),
        }
    }

    fn signed(&mut self) -> f64 {
        let v = self.num();
        if self.rng.gen_bool(0.3) {
            -v
        } else {
            v
        }
    }

    fn fresh(&mut self) -> String {
        self.fresh += 1;
        format!("v{}", self.fresh)
    }

    fn expr(&mut self, depth: u32, in_seq: bool) -> Expr {
        let sp = Span::default();
        if depth == 0 || self.rng.gen_bool(0.3) {
            let mut vars: Vec<String> = self.binders.clone();
            if in_seq {
                vars.push("x".into());
                vars.push("n".into());
            }
            return match vars.choose(&mut self.rng) {
                Some(v) if self.rng.gen_bool(0.5) => Expr::Var(Ident::new(v.clone())),
                _ => Expr::Num(self.num(), sp),
            };
        }
        match self.rng.gen_range(0..4) {
            0 => Expr::Neg(Box::new(self.expr(depth - 1, in_seq)), sp),
            1 => {
                let func = *[Func::Abs, Func::Min, Func::Max].choose(&mut self.rng).unwrap();
                let args = (0..func.arity()).map(|_| self.expr(depth - 1, in_seq)).collect();
                Expr::Call { func, args, span: sp }
            }
            _ => {
                let op = *[BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow].choose(&mut self.rng).unwrap();
                let lhs = Box::new(self.expr(depth - 1, in_seq));
                let rhs = Box::new(self.expr(depth - 1, in_seq));
                Expr::Bin { op, lhs, rhs, span: sp }
            }
        }
    }

    fn std_name(&mut self) -> StdName {
        match self.rng.gen_range(0..5) {
            0 => StdName::Arctan,
            1 => StdName::Tan,
            2 => StdName::Affine(self.signed(), self.signed()),
            3 => StdName::Power(self.rng.gen_range(0..10)),
            _ => StdName::Reciprocal(self.num().max(1e-3)),
        }
    }

    fn seq(&mut self, depth: u32) -> SeqExpr {
        let sp = Span::default();
        if depth == 0 || self.rng.gen_bool(0.25) {
            if !self.names.is_empty() && self.rng.gen_bool(0.5) {
                return SeqExpr::Ref(Ident::new(self.names.choose(&mut self.rng).unwrap().clone()));
            }
            return SeqExpr::Seq { body: self.expr(3, true), span: sp };
        }
        let d = depth - 1;
        match self.rng.gen_range(0..8) {
            0 => {
                let op = *[SeqBinOp::Add, SeqBinOp::Mul, SeqBinOp::Join, SeqBinOp::Meet].choose(&mut self.rng).unwrap();
                SeqExpr::Binary { op, lhs: Box::new(self.seq(d)), rhs: Box::new(self.seq(d)), span: sp }
            }
            1 => {
                let op = *[SeqUnOp::Abs, SeqUnOp::Neg].choose(&mut self.rng).unwrap();
                SeqExpr::Unary { op, arg: Box::new(self.seq(d)), span: sp }
            }
            2 => {
                let delta = self.rng.gen_bool(0.5).then(|| self.num());
                SeqExpr::Recip { arg: Box::new(self.seq(d)), delta, span: sp }
            }
            3 => SeqExpr::Compose { func: self.std_name(), arg: Box::new(self.seq(d)), span: sp },
            4 => SeqExpr::Truncate { arg: Box::new(self.seq(d)), bound: self.num(), span: sp },
            5 | 6 => {
                let binder = self.fresh();
                self.binders.push(binder.clone());
                let body = Box::new(self.seq(d));
                let bound = self.expr(2, false);
                self.binders.pop();
                SeqExpr::Series { binder: Ident::new(binder), body, bound, span: sp }
            }
            _ => {
                let binder = self.fresh();
                self.binders.push(binder.clone());
                let body = Box::new(self.seq(d));
                self.binders.pop();
                SeqExpr::IntersectZ { binder: Ident::new(binder), body, span: sp }
            }
        }
    }

    fn domain(&mut self) -> DomainLit {
        let sp = Span::default();
        match self.rng.gen_range(0..3) {
            0 => DomainLit::Interval { lo: self.signed(), hi: self.signed(), span: sp },
            1 => DomainLit::Points { points: (0..self.rng.gen_range(1..5)).map(|_| self.signed()).collect(), span: sp },
            _ => {
                let path = ["space.json", "a b/\"q\".json", "dir\\f.json"].choose(&mut self.rng).unwrap();
                DomainLit::Finite { path: path.to_string(), span: sp }
            }
        }
    }

    fn target(&mut self) -> Ident {
        Ident::new(self.names.choose(&mut self.rng).unwrap().clone())
    }

    fn command(&mut self) -> Command {
        let sp = Span::default();
        match self.rng.gen_range(0..6) {
            0 => Command::Eval {
                target: self.target(),
                at: self.signed(),
                tol: self.rng.gen_bool(0.5).then(|| self.num()),
                span: sp,
            },
            1 => Command::Table { target: self.target(), from: self.signed(), to: self.signed(), step: self.num(), span: sp },
            2 => Command::ZeroSet { target: self.target(), eps: self.num(), span: sp },
            3 => Command::Separate { f: self.target(), g: self.target(), span: sp },
            4 => Command::Extend {
                target: self.target(),
                y: (0..self.rng.gen_range(1..4)).map(|_| self.signed()).collect(),
                space: self.target(),
                stop: match self.rng.gen_range(0..3) {
                    0 => None,
                    1 => Some(Stop::Rounds(self.rng.gen_range(0..100))),
                    _ => Some(Stop::Tol(self.num())),
                },
                span: sp,
            },
            _ => {
                let kind = *[CheckKind::Ring, CheckKind::ZeroIdentities, CheckKind::Fsigma].choose(&mut self.rng).unwrap();
                let args = (0..kind.arity()).map(|_| self.target()).collect();
                Command::Check { kind, args, span: sp }
            }
        }
    }

    fn script(&mut self) -> Script {
        let mut stmts = Vec::new();
        for _ in 0..self.rng.gen_range(1..6) {
            if self.names.is_empty() || self.rng.gen_bool(0.5) {
                let value = self.seq(3);
                let domain = self.domain();
                let name = self.fresh();
                stmts.push(Stmt::Let { name: Ident::new(name.clone()), value, domain, span: Span::default() });
                self.names.push(name);
            } else {
                stmts.push(Stmt::Command(self.command()));
            }
        }
        Script { stmts }
    }
}

fn random_script(seed: u64) -> Script {
    Gen { rng: StdRng::seed_from_u64(seed), names: Vec::new(), binders: Vec::new(), fresh: 0 }.script()
}

fn mutate(src: &str, rng: &mut StdRng) -> String {
    let mut chars: Vec<char> = src.chars().collect();
    let alphabet: Vec<char> = "();,=[]{}+-*/^.\"# \nxneq0123456789letseqadd".chars().collect();
    for _ in 0..rng.gen_range(1..6) {
        if chars.is_empty() {
            break;
        }
        let i = rng.gen_range(0..chars.len());
        match rng.gen_range(0..3) {
            0 => {
                chars.remove(i);
            }
            1 => chars.insert(i, *alphabet.choose(rng).unwrap()),
            _ => chars[i] = *alphabet.choose(rng).unwrap(),
        }
    }
    chars.into_iter().collect()
}

fn assert_positioned(src: &str) {
    match parse(src) {
        Ok(ast) => assert_eq!(parse(&pretty(&ast)).as_ref(), Ok(&ast)),
        Err(e) => {
            let lines = src.split('\n').count();
            assert!(e.pos.line >= 1 && e.pos.line <= lines, "{e} for {src:?}");
            assert!(e.pos.col >= 1, "{e} for {src:?}");
            assert!(!e.message.is_empty());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 512, ..ProptestConfig::default() })]

    #[test]
    fn random_trees_round_trip(seed: u64) {
        let ast = random_script(seed);
        let printed = pretty(&ast);
        let back = parse(&printed);
        prop_assert!(back.is_ok(), "{:?}\n{}", back, printed);
        prop_assert_eq!(back.unwrap(), ast);
    }

    #[test]
    fn arbitrary_text_never_panics(src in "\\PC{0,200}") {
        assert_positioned(&src);
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
        assert_positioned(&String::from_utf8_lossy(&bytes));
    }

    #[test]
    fn mutated_corpus_never_panics(seed: u64) {
        let mut rng = StdRng::seed_from_u64(seed);
        let all = corpus();
        let (_, src) = all.choose(&mut rng).unwrap();
        assert_positioned(&mutate(src, &mut rng));
    }
}

//! Canonical printing. `parse(pretty(s))` reproduces `s` up to spans.

use std::fmt::Write;

use super::ast::*;

pub fn pretty(script: &Script) -> String {
    let mut out = String::new();
    for s in &script.stmts {
        out.push_str(&stmt(s));
        out.push('\n');
    }
    out
}

pub fn stmt(s: &Stmt) -> String {
    match s {
        Stmt::Let { name, value, domain: d, .. } => {
            format!("let {} = {} on {};", name.name, seq_expr(value), domain(d))
        }
        Stmt::Command(c) => format!("{};", command(c)),
    }
}

/// Shortest text that reads back as exactly `v`.
pub fn num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v)
    } else {
        format!("{:?}", v)
    }
}

fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

pub fn domain(d: &DomainLit) -> String {
    match d {
        DomainLit::Interval { lo, hi, .. } => format!("[{}, {}]", num(*lo), num(*hi)),
        DomainLit::Points { points, .. } => set(points),
        DomainLit::Finite { path, .. } => format!("finite {}", quote(path)),
    }
}

fn set(points: &[f64]) -> String {
    let items: Vec<String> = points.iter().map(|p| num(*p)).collect();
    format!("{{{}}}", items.join(", "))
}

fn std_name(s: &StdName) -> String {
    match s {
        StdName::Arctan => "arctan".into(),
        StdName::Tan => "tan".into(),
        StdName::Affine(a, b) => format!("affine({}, {})", num(*a), num(*b)),
        StdName::Power(k) => format!("power({k})"),
        StdName::Reciprocal(d) => format!("reciprocal({})", num(*d)),
    }
}

pub fn seq_expr(e: &SeqExpr) -> String {
    match e {
        SeqExpr::Seq { body, .. } => format!("seq(n, {})", expr(body)),
        SeqExpr::Ref(i) => i.name.clone(),
        SeqExpr::Binary { op, lhs, rhs, .. } => {
            format!("{}({}, {})", op.keyword(), seq_expr(lhs), seq_expr(rhs))
        }
        SeqExpr::Unary { op, arg, .. } => format!("{}({})", op.keyword(), seq_expr(arg)),
        SeqExpr::Recip { arg, delta: None, .. } => format!("recip({})", seq_expr(arg)),
        SeqExpr::Recip { arg, delta: Some(d), .. } => {
            format!("recip({}, delta = {})", seq_expr(arg), num(*d))
        }
        SeqExpr::Compose { func, arg, .. } => format!("compose({}, {})", std_name(func), seq_expr(arg)),
        SeqExpr::Truncate { arg, bound, .. } => format!("truncate({}, {})", seq_expr(arg), num(*bound)),
        SeqExpr::Series { binder, body, bound, .. } => {
            format!("series({}, {}, bound = {})", binder.name, seq_expr(body), expr(bound))
        }
        SeqExpr::IntersectZ { binder, body, .. } => {
            format!("intersectz({}, {})", binder.name, seq_expr(body))
        }
    }
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Bin { op: BinOp::Add | BinOp::Sub, .. } => 1,
        Expr::Bin { op: BinOp::Mul | BinOp::Div, .. } => 2,
        Expr::Neg(..) => 3,
        Expr::Num(v, _) if v.is_sign_negative() => 3,
        Expr::Bin { op: BinOp::Pow, .. } => 4,
        _ => 5,
    }
}

fn wrap(e: &Expr, parens: bool) -> String {
    if parens {
        format!("({})", expr(e))
    } else {
        expr(e)
    }
}

pub fn expr(e: &Expr) -> String {
    match e {
        Expr::Num(v, _) => num(*v),
        Expr::Var(i) => i.name.clone(),
        Expr::Neg(inner, _) => format!("-{}", wrap(inner, prec(inner) < 3)),
        Expr::Bin { op: BinOp::Pow, lhs, rhs, .. } => {
            format!("{} ^ {}", wrap(lhs, prec(lhs) < 5), wrap(rhs, prec(rhs) < 3))
        }
        Expr::Bin { op, lhs, rhs, .. } => {
            let p = prec(e);
            format!("{} {} {}", wrap(lhs, prec(lhs) < p), op.symbol(), wrap(rhs, prec(rhs) <= p))
        }
        Expr::Call { func, args, .. } => {
            let args: Vec<String> = args.iter().map(expr).collect();
            format!("{}({})", func.name(), args.join(", "))
        }
    }
}

pub fn command(c: &Command) -> String {
    let mut s = String::from(c.name());
    match c {
        Command::Eval { target, at, tol, .. } => {
            let _ = write!(s, " {} at {}", target.name, num(*at));
            if let Some(t) = tol {
                let _ = write!(s, " tol {}", num(*t));
            }
        }
        Command::Table { target, from, to, step, .. } => {
            let _ = write!(s, " {} from {} to {} step {}", target.name, num(*from), num(*to), num(*step));
        }
        Command::ZeroSet { target, eps, .. } => {
            let _ = write!(s, " {} eps {}", target.name, num(*eps));
        }
        Command::Separate { f, g, .. } => {
            let _ = write!(s, " {} {}", f.name, g.name);
        }
        Command::Extend { target, y, space, stop, .. } => {
            let _ = write!(s, " {} on {} in {}", target.name, set(y), space.name);
            match stop {
                Some(Stop::Rounds(r)) => {
                    let _ = write!(s, " rounds {r}");
                }
                Some(Stop::Tol(t)) => {
                    let _ = write!(s, " tol {}", num(*t));
                }
                None => {}
            }
        }
        Command::Check { kind, args, .. } => {
            let _ = write!(s, " {}", kind.keyword());
            for a in args {
                let _ = write!(s, " {}", a.name);
            }
        }
    }
    s
}

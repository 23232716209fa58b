//! Syntax tree for scripts. Every node carries the span it was parsed from;
//! spans never take part in equality, so trees compare structurally.

use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, Default, Serialize, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct Span {
    pub start: Pos,
    pub end: Pos,
}

impl Span {
    pub fn new(start: Pos, end: Pos) -> Self {
        Span { start, end }
    }

    pub fn to(self, other: Span) -> Span {
        Span { start: self.start, end: other.end }
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

impl Ident {
    pub fn new(name: impl Into<String>) -> Self {
        Ident { name: name.into(), span: Span::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Script {
    pub stmts: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Let { name: Ident, value: SeqExpr, domain: DomainLit, span: Span },
    Command(Command),
}

impl Stmt {
    pub fn span(&self) -> Span {
        match self {
            Stmt::Let { span, .. } => *span,
            Stmt::Command(c) => c.span(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeqBinOp {
    Add,
    Mul,
    Join,
    Meet,
}

impl SeqBinOp {
    pub fn keyword(self) -> &'static str {
        match self {
            SeqBinOp::Add => "add",
            SeqBinOp::Mul => "mul",
            SeqBinOp::Join => "join",
            SeqBinOp::Meet => "meet",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeqUnOp {
    Abs,
    Neg,
}

impl SeqUnOp {
    pub fn keyword(self) -> &'static str {
        match self {
            SeqUnOp::Abs => "abs",
            SeqUnOp::Neg => "neg",
        }
    }
}

/// Standard continuous functions usable in `compose`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StdName {
    Arctan,
    Tan,
    Affine(f64, f64),
    Power(u64),
    /// Reciprocal with a declared lower bound on `|t|`.
    Reciprocal(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SeqExpr {
    Seq { body: Expr, span: Span },
    Ref(Ident),
    Binary { op: SeqBinOp, lhs: Box<SeqExpr>, rhs: Box<SeqExpr>, span: Span },
    Unary { op: SeqUnOp, arg: Box<SeqExpr>, span: Span },
    Recip { arg: Box<SeqExpr>, delta: Option<f64>, span: Span },
    Compose { func: StdName, arg: Box<SeqExpr>, span: Span },
    Truncate { arg: Box<SeqExpr>, bound: f64, span: Span },
    Series { binder: Ident, body: Box<SeqExpr>, bound: Expr, span: Span },
    IntersectZ { binder: Ident, body: Box<SeqExpr>, span: Span },
}

impl SeqExpr {
    pub fn span(&self) -> Span {
        match self {
            SeqExpr::Ref(i) => i.span,
            SeqExpr::Seq { span, .. }
            | SeqExpr::Binary { span, .. }
            | SeqExpr::Unary { span, .. }
            | SeqExpr::Recip { span, .. }
            | SeqExpr::Compose { span, .. }
            | SeqExpr::Truncate { span, .. }
            | SeqExpr::Series { span, .. }
            | SeqExpr::IntersectZ { span, .. } => *span,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Abs,
    Min,
    Max,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Abs => 1,
            Func::Min | Func::Max => 2,
        }
    }
}

/// Scalar expressions in `x`, the term index `n` and family binders.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64, Span),
    Var(Ident),
    Neg(Box<Expr>, Span),
    Bin { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr>, span: Span },
    Call { func: Func, args: Vec<Expr>, span: Span },
}

impl Expr {
    pub fn span(&self) -> Span {
        match self {
            Expr::Var(i) => i.span,
            Expr::Num(_, span) | Expr::Neg(_, span) | Expr::Bin { span, .. } | Expr::Call { span, .. } => *span,
        }
    }

    /// Whether the variable `name` occurs.
    pub fn mentions(&self, name: &str) -> bool {
        match self {
            Expr::Num(..) => false,
            Expr::Var(i) => i.name == name,
            Expr::Neg(e, _) => e.mentions(name),
            Expr::Bin { lhs, rhs, .. } => lhs.mentions(name) || rhs.mentions(name),
            Expr::Call { args, .. } => args.iter().any(|a| a.mentions(name)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomainLit {
    Interval { lo: f64, hi: f64, span: Span },
    Points { points: Vec<f64>, span: Span },
    Finite { path: String, span: Span },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stop {
    Rounds(u64),
    Tol(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    Ring,
    ZeroIdentities,
    Fsigma,
}

impl CheckKind {
    pub fn keyword(self) -> &'static str {
        match self {
            CheckKind::Ring => "ring",
            CheckKind::ZeroIdentities => "zero-identities",
            CheckKind::Fsigma => "fsigma",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            CheckKind::Ring => 3,
            CheckKind::ZeroIdentities => 2,
            CheckKind::Fsigma => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Eval { target: Ident, at: f64, tol: Option<f64>, span: Span },
    Table { target: Ident, from: f64, to: f64, step: f64, span: Span },
    ZeroSet { target: Ident, eps: f64, span: Span },
    Separate { f: Ident, g: Ident, span: Span },
    Extend { target: Ident, y: Vec<f64>, space: Ident, stop: Option<Stop>, span: Span },
    Check { kind: CheckKind, args: Vec<Ident>, span: Span },
}

impl Command {
    pub fn span(&self) -> Span {
        match self {
            Command::Eval { span, .. }
            | Command::Table { span, .. }
            | Command::ZeroSet { span, .. }
            | Command::Separate { span, .. }
            | Command::Extend { span, .. }
            | Command::Check { span, .. } => *span,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Eval { .. } => "eval",
            Command::Table { .. } => "table",
            Command::ZeroSet { .. } => "zeroset",
            Command::Separate { .. } => "separate",
            Command::Extend { .. } => "extend",
            Command::Check { .. } => "check",
        }
    }
}

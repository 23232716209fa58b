//! Recursive-descent parser with one token of lookahead. Name resolution
//! happens while parsing: identifiers must be bound before use.

use std::collections::HashSet;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;

/// Deepest nesting accepted before giving up with an error.
pub const MAX_DEPTH: usize = 256;

pub const RESERVED: &[&str] = &[
    "let", "on", "seq", "add", "mul", "join", "meet", "abs", "neg", "recip", "compose", "truncate",
    "series", "intersectz", "bound", "delta", "finite", "eval", "at", "tol", "table", "from", "to",
    "step", "zeroset", "eps", "separate", "extend", "in", "rounds", "check", "min", "max", "x", "n",
    "arctan", "tan", "affine", "power", "reciprocal",
];

pub fn parse(src: &str) -> Result<Script, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser {
        toks,
        i: 0,
        depth: 0,
        names: HashSet::new(),
        binders: Vec::new(),
        allow_x: false,
        allow_n: false,
    };
    let mut stmts = Vec::new();
    while p.peek() != &Tok::Eof {
        stmts.push(p.stmt()?);
    }
    Ok(Script { stmts })
}

struct Parser {
    toks: Vec<Token>,
    i: usize,
    depth: usize,
    names: HashSet<String>,
    binders: Vec<String>,
    allow_x: bool,
    allow_n: bool,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn here(&self) -> Span {
        self.toks[self.i].span
    }

    fn prev_span(&self) -> Span {
        self.toks[self.i.saturating_sub(1)].span
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        if t.tok != Tok::Eof {
            self.i += 1;
        }
        t
    }

    fn from(&self, start: Span) -> Span {
        start.to(self.prev_span())
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        let list = expected.iter().map(|e| format!("`{e}`")).collect::<Vec<_>>().join(", ");
        let what = if expected.len() == 1 { list } else { format!("one of {list}") };
        ParseError {
            pos: self.here().start,
            message: format!("expected {what}, found {}", self.peek()),
            expected: expected.iter().map(|e| e.to_string()).collect(),
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<Span> {
        if self.peek() == &tok {
            Ok(self.advance().span)
        } else {
            Err(self.unexpected(&[tok.symbol()]))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<Span> {
        if self.is_kw(kw) {
            Ok(self.advance().span)
        } else {
            Err(self.unexpected(&[kw]))
        }
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseError::new(self.here().start, format!("nesting deeper than {MAX_DEPTH}")));
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    /// A fresh name for a binding or binder.
    fn new_name(&mut self, what: &str) -> PResult<Ident> {
        match self.peek().clone() {
            Tok::Ident(s) if RESERVED.contains(&s.as_str()) => Err(ParseError::new(
                self.here().start,
                format!("`{s}` is reserved and cannot name a {what}"),
            )),
            Tok::Ident(s) => {
                let span = self.advance().span;
                Ok(Ident { name: s, span })
            }
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    /// A reference to an existing binding.
    fn bound_name(&mut self) -> PResult<Ident> {
        match self.peek().clone() {
            Tok::Ident(s) if self.names.contains(&s) => {
                let span = self.advance().span;
                Ok(Ident { name: s, span })
            }
            Tok::Ident(s) => Err(ParseError::new(self.here().start, format!("unbound identifier `{s}`"))),
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    fn num(&mut self) -> PResult<f64> {
        let neg = self.eat(&Tok::Minus);
        match *self.peek() {
            Tok::Num(v) => {
                self.advance();
                Ok(if neg { -v } else { v })
            }
            _ => Err(self.unexpected(&["number"])),
        }
    }

    fn count(&mut self) -> PResult<u64> {
        let at = self.here().start;
        let v = self.num()?;
        if v >= 0.0 && v.fract() == 0.0 && v <= 9_007_199_254_740_992.0 {
            Ok(v as u64)
        } else {
            Err(ParseError::new(at, format!("expected a nonnegative integer, found {v}")))
        }
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let start = self.here();
        if self.is_kw("let") {
            self.advance();
            let name = self.new_name("binding")?;
            self.expect(Tok::Eq)?;
            let value = self.seqexpr()?;
            self.expect_kw("on")?;
            let domain = self.domain()?;
            self.expect(Tok::Semi)?;
            self.names.insert(name.name.clone());
            return Ok(Stmt::Let { name, value, domain, span: self.from(start) });
        }
        let cmd = self.command()?;
        self.expect(Tok::Semi)?;
        Ok(Stmt::Command(cmd))
    }

    fn domain(&mut self) -> PResult<DomainLit> {
        let start = self.here();
        match self.peek() {
            Tok::LBracket => {
                self.advance();
                let lo = self.num()?;
                self.expect(Tok::Comma)?;
                let hi = self.num()?;
                self.expect(Tok::RBracket)?;
                Ok(DomainLit::Interval { lo, hi, span: self.from(start) })
            }
            Tok::LBrace => {
                let points = self.set_lit()?;
                Ok(DomainLit::Points { points, span: self.from(start) })
            }
            Tok::Ident(s) if s == "finite" => {
                self.advance();
                match self.peek().clone() {
                    Tok::Str(path) => {
                        self.advance();
                        Ok(DomainLit::Finite { path, span: self.from(start) })
                    }
                    _ => Err(self.unexpected(&["string"])),
                }
            }
            _ => Err(self.unexpected(&["[", "{", "finite"])),
        }
    }

    fn set_lit(&mut self) -> PResult<Vec<f64>> {
        self.expect(Tok::LBrace)?;
        let mut pts = vec![self.num()?];
        while self.eat(&Tok::Comma) {
            pts.push(self.num()?);
        }
        self.expect(Tok::RBrace)?;
        Ok(pts)
    }

    fn arity_error(&self, what: &str, want: usize, got: usize) -> ParseError {
        let s = if want == 1 { "" } else { "s" };
        ParseError::new(self.here().start, format!("`{what}` takes {want} argument{s}, found {got}"))
    }

    fn close_args(&mut self, what: &str, want: usize) -> PResult<()> {
        if self.peek() == &Tok::Comma {
            return Err(self.arity_error(what, want, want + 1));
        }
        self.expect(Tok::RParen)?;
        Ok(())
    }

    fn seqexpr(&mut self) -> PResult<SeqExpr> {
        self.enter()?;
        let r = self.seqexpr_inner();
        self.leave();
        r
    }

    fn seqexpr_inner(&mut self) -> PResult<SeqExpr> {
        let start = self.here();
        let Tok::Ident(word) = self.peek().clone() else {
            return Err(self.unexpected(&["seq", "identifier", "combinator"]));
        };
        match word.as_str() {
            "add" => self.seq_binary(SeqBinOp::Add, start),
            "mul" => self.seq_binary(SeqBinOp::Mul, start),
            "join" => self.seq_binary(SeqBinOp::Join, start),
            "meet" => self.seq_binary(SeqBinOp::Meet, start),
            "abs" => self.seq_unary(SeqUnOp::Abs, start),
            "neg" => self.seq_unary(SeqUnOp::Neg, start),
            "seq" => self.seq_lit(start),
            "recip" => self.seq_recip(start),
            "compose" => self.seq_compose(start),
            "truncate" => self.seq_truncate(start),
            "series" => self.seq_family(true, start),
            "intersectz" => self.seq_family(false, start),
            w if RESERVED.contains(&w) => Err(self.unexpected(&["seq", "identifier", "combinator"])),
            _ => Ok(SeqExpr::Ref(self.bound_name()?)),
        }
    }

    #[inline(never)]
    fn seq_binary(&mut self, op: SeqBinOp, start: Span) -> PResult<SeqExpr> {
        self.advance();
        self.expect(Tok::LParen)?;
        let lhs = Box::new(self.seqexpr()?);
        if self.peek() == &Tok::RParen {
            return Err(self.arity_error(op.keyword(), 2, 1));
        }
        self.expect(Tok::Comma)?;
        let rhs = Box::new(self.seqexpr()?);
        self.close_args(op.keyword(), 2)?;
        Ok(SeqExpr::Binary { op, lhs, rhs, span: self.from(start) })
    }

    #[inline(never)]
    fn seq_unary(&mut self, op: SeqUnOp, start: Span) -> PResult<SeqExpr> {
        self.advance();
        self.expect(Tok::LParen)?;
        let arg = Box::new(self.seqexpr()?);
        self.close_args(op.keyword(), 1)?;
        Ok(SeqExpr::Unary { op, arg, span: self.from(start) })
    }

    #[inline(never)]
    fn seq_lit(&mut self, start: Span) -> PResult<SeqExpr> {
        self.advance();
        self.expect(Tok::LParen)?;
        self.expect_kw("n")?;
        self.expect(Tok::Comma)?;
        let body = self.scoped_expr(true)?;
        self.expect(Tok::RParen)?;
        Ok(SeqExpr::Seq { body, span: self.from(start) })
    }

    #[inline(never)]
    fn seq_recip(&mut self, start: Span) -> PResult<SeqExpr> {
        self.advance();
        self.expect(Tok::LParen)?;
        let arg = Box::new(self.seqexpr()?);
        let delta = if self.eat(&Tok::Comma) {
            self.expect_kw("delta")?;
            self.expect(Tok::Eq)?;
            Some(self.num()?)
        } else {
            None
        };
        self.expect(Tok::RParen)?;
        Ok(SeqExpr::Recip { arg, delta, span: self.from(start) })
    }

    #[inline(never)]
    fn seq_compose(&mut self, start: Span) -> PResult<SeqExpr> {
        self.advance();
        self.expect(Tok::LParen)?;
        let func = self.std_name()?;
        self.expect(Tok::Comma)?;
        let arg = Box::new(self.seqexpr()?);
        self.close_args("compose", 2)?;
        Ok(SeqExpr::Compose { func, arg, span: self.from(start) })
    }

    #[inline(never)]
    fn seq_truncate(&mut self, start: Span) -> PResult<SeqExpr> {
        self.advance();
        self.expect(Tok::LParen)?;
        let arg = Box::new(self.seqexpr()?);
        self.expect(Tok::Comma)?;
        let bound = self.num()?;
        self.close_args("truncate", 2)?;
        Ok(SeqExpr::Truncate { arg, bound, span: self.from(start) })
    }

    #[inline(never)]
    fn seq_family(&mut self, series: bool, start: Span) -> PResult<SeqExpr> {
        self.advance();
        self.expect(Tok::LParen)?;
        let binder = self.new_name("family index")?;
        self.expect(Tok::Comma)?;
        self.binders.push(binder.name.clone());
        let rest = self.family_rest(series);
        self.binders.pop();
        let (body, bound) = rest?;
        self.expect(Tok::RParen)?;
        let span = self.from(start);
        Ok(match bound {
            Some(bound) => SeqExpr::Series { binder, body, bound, span },
            None => SeqExpr::IntersectZ { binder, body, span },
        })
    }

    fn family_rest(&mut self, series: bool) -> PResult<(Box<SeqExpr>, Option<Expr>)> {
        let body = Box::new(self.seqexpr()?);
        if !series {
            return Ok((body, None));
        }
        self.expect(Tok::Comma)?;
        self.expect_kw("bound")?;
        self.expect(Tok::Eq)?;
        Ok((body, Some(self.scoped_expr(false)?)))
    }

    /// Parses an expression with `x` and `n` in scope or out of scope.
    fn scoped_expr(&mut self, inside_seq: bool) -> PResult<Expr> {
        let saved = (self.allow_x, self.allow_n);
        (self.allow_x, self.allow_n) = (inside_seq, inside_seq);
        let e = self.expr();
        (self.allow_x, self.allow_n) = saved;
        e
    }

    fn std_name(&mut self) -> PResult<StdName> {
        let Tok::Ident(w) = self.peek().clone() else {
            return Err(self.unexpected(&["arctan", "tan", "affine", "power", "reciprocal"]));
        };
        match w.as_str() {
            "arctan" => {
                self.advance();
                Ok(StdName::Arctan)
            }
            "tan" => {
                self.advance();
                Ok(StdName::Tan)
            }
            "affine" => {
                self.advance();
                self.expect(Tok::LParen)?;
                let a = self.num()?;
                self.expect(Tok::Comma)?;
                let b = self.num()?;
                self.close_args("affine", 2)?;
                Ok(StdName::Affine(a, b))
            }
            "power" => {
                self.advance();
                self.expect(Tok::LParen)?;
                let k = self.count()?;
                self.close_args("power", 1)?;
                Ok(StdName::Power(k))
            }
            "reciprocal" => {
                self.advance();
                self.expect(Tok::LParen)?;
                let at = self.here().start;
                let d = self.num()?;
                if d <= 0.0 {
                    return Err(ParseError::new(at, "reciprocal needs a positive lower bound"));
                }
                self.close_args("reciprocal", 1)?;
                Ok(StdName::Reciprocal(d))
            }
            _ => Err(self.unexpected(&["arctan", "tan", "affine", "power", "reciprocal"])),
        }
    }

    fn command(&mut self) -> PResult<Command> {
        let start = self.here();
        let Tok::Ident(word) = self.peek().clone() else {
            return Err(self.unexpected(&["let", "eval", "table", "zeroset", "separate", "extend", "check"]));
        };
        match word.as_str() {
            "eval" => {
                self.advance();
                let target = self.bound_name()?;
                self.expect_kw("at")?;
                let at = self.num()?;
                let tol = if self.is_kw("tol") {
                    self.advance();
                    Some(self.num()?)
                } else {
                    None
                };
                Ok(Command::Eval { target, at, tol, span: self.from(start) })
            }
            "table" => {
                self.advance();
                let target = self.bound_name()?;
                self.expect_kw("from")?;
                let from = self.num()?;
                self.expect_kw("to")?;
                let to = self.num()?;
                self.expect_kw("step")?;
                let step = self.num()?;
                Ok(Command::Table { target, from, to, step, span: self.from(start) })
            }
            "zeroset" => {
                self.advance();
                let target = self.bound_name()?;
                self.expect_kw("eps")?;
                let eps = self.num()?;
                Ok(Command::ZeroSet { target, eps, span: self.from(start) })
            }
            "separate" => {
                self.advance();
                let f = self.bound_name()?;
                let g = self.bound_name()?;
                Ok(Command::Separate { f, g, span: self.from(start) })
            }
            "extend" => {
                self.advance();
                let target = self.bound_name()?;
                self.expect_kw("on")?;
                let y = self.set_lit()?;
                self.expect_kw("in")?;
                let space = self.bound_name()?;
                let stop = if self.is_kw("rounds") {
                    self.advance();
                    Some(Stop::Rounds(self.count()?))
                } else if self.is_kw("tol") {
                    self.advance();
                    Some(Stop::Tol(self.num()?))
                } else {
                    None
                };
                Ok(Command::Extend { target, y, space, stop, span: self.from(start) })
            }
            "check" => {
                self.advance();
                let kind = if self.is_kw("ring") {
                    self.advance();
                    CheckKind::Ring
                } else if self.is_kw("fsigma") {
                    self.advance();
                    CheckKind::Fsigma
                } else if self.is_kw("zero") {
                    self.advance();
                    self.expect(Tok::Minus)?;
                    self.expect_kw("identities")?;
                    CheckKind::ZeroIdentities
                } else {
                    return Err(self.unexpected(&["ring", "zero-identities", "fsigma"]));
                };
                let mut args = Vec::new();
                while matches!(self.peek(), Tok::Ident(_)) {
                    args.push(self.bound_name()?);
                }
                if args.len() != kind.arity() {
                    return Err(self.arity_error(&format!("check {}", kind.keyword()), kind.arity(), args.len()));
                }
                Ok(Command::Check { kind, args, span: self.from(start) })
            }
            _ => Err(self.unexpected(&["let", "eval", "table", "zeroset", "separate", "extend", "check"])),
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.enter()?;
        let r = self.sum();
        self.leave();
        r
    }

    fn sum(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.term()?;
            let span = lhs.span().to(rhs.span());
            lhs = Expr::Bin { op, lhs: Box::new(lhs), rhs: Box::new(rhs), span };
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.unary()?;
            let span = lhs.span().to(rhs.span());
            lhs = Expr::Bin { op, lhs: Box::new(lhs), rhs: Box::new(rhs), span };
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        self.enter()?;
        let r = if self.peek() == &Tok::Minus {
            let start = self.advance().span;
            self.unary().map(|e| {
                let span = start.to(e.span());
                Expr::Neg(Box::new(e), span)
            })
        } else {
            self.power()
        };
        self.leave();
        r
    }

    fn power(&mut self) -> PResult<Expr> {
        let base = self.atom()?;
        if self.eat(&Tok::Caret) {
            let exp = self.unary()?;
            let span = base.span().to(exp.span());
            return Ok(Expr::Bin { op: BinOp::Pow, lhs: Box::new(base), rhs: Box::new(exp), span });
        }
        Ok(base)
    }

    fn atom(&mut self) -> PResult<Expr> {
        let start = self.here();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.advance();
                Ok(Expr::Num(v, start))
            }
            Tok::LParen => {
                self.advance();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(w) => {
                let func = match w.as_str() {
                    "abs" => Some(Func::Abs),
                    "min" => Some(Func::Min),
                    "max" => Some(Func::Max),
                    _ => None,
                };
                if let Some(func) = func {
                    self.advance();
                    self.expect(Tok::LParen)?;
                    let mut args = vec![self.expr()?];
                    while self.eat(&Tok::Comma) {
                        args.push(self.expr()?);
                    }
                    if args.len() != func.arity() {
                        return Err(ParseError::new(
                            start.start,
                            format!("`{}` takes {} argument(s), found {}", func.name(), func.arity(), args.len()),
                        ));
                    }
                    self.expect(Tok::RParen)?;
                    return Ok(Expr::Call { func, args, span: self.from(start) });
                }
                let ok = match w.as_str() {
                    "x" => self.allow_x,
                    "n" => self.allow_n,
                    _ => self.binders.contains(&w),
                };
                if !ok {
                    let msg = match w.as_str() {
                        "x" => "`x` is not available here".to_string(),
                        "n" => "`n` is only available inside seq(n, ...)".to_string(),
                        _ => format!("unbound variable `{w}`"),
                    };
                    return Err(ParseError::new(start.start, msg));
                }
                self.advance();
                Ok(Expr::Var(Ident { name: w, span: start }))
            }
            _ => Err(self.unexpected(&["number", "identifier", "("])),
        }
    }
}

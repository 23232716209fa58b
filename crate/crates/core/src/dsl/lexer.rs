//! Tokens for the script language.

use std::fmt;

use super::ast::{Pos, Span};
use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Num(f64),
    Str(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Eq,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Num(v) => write!(f, "number `{v}`"),
            Tok::Str(s) => write!(f, "string {s:?}"),
            Tok::Eof => write!(f, "end of input"),
            other => write!(f, "`{}`", other.symbol()),
        }
    }
}

impl Tok {
    pub fn symbol(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Eq => "=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Caret => "^",
            Tok::Ident(_) => "identifier",
            Tok::Num(_) => "number",
            Tok::Str(_) => "string",
            Tok::Eof => "end of input",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut cur = Cursor { chars: src.chars().peekable(), pos: Pos { line: 1, col: 1 } };
    let mut out = Vec::new();
    loop {
        while let Some(c) = cur.peek() {
            if c.is_whitespace() {
                cur.bump();
            } else if c == '#' {
                while cur.peek().is_some_and(|c| c != '\n') {
                    cur.bump();
                }
            } else {
                break;
            }
        }
        let start = cur.pos;
        let Some(c) = cur.peek() else {
            out.push(Token { tok: Tok::Eof, span: Span::new(start, start) });
            return Ok(out);
        };
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(c) = cur.peek().filter(|c| c.is_ascii_alphanumeric() || *c == '_') {
                s.push(c);
                cur.bump();
            }
            Tok::Ident(s)
        } else if c.is_ascii_digit() {
            number(&mut cur, start)?
        } else if c == '"' {
            cur.bump();
            let mut s = String::new();
            loop {
                match cur.bump() {
                    Some('"') => break,
                    Some('\\') => match cur.bump() {
                        Some(e @ ('"' | '\\')) => s.push(e),
                        _ => return Err(ParseError::new(start, "bad escape in string; only \\\" and \\\\ are allowed")),
                    },
                    Some('\n') | None => return Err(ParseError::new(start, "unterminated string")),
                    Some(c) => s.push(c),
                }
            }
            Tok::Str(s)
        } else {
            cur.bump();
            match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                ',' => Tok::Comma,
                ';' => Tok::Semi,
                '=' => Tok::Eq,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '^' => Tok::Caret,
                other => return Err(ParseError::new(start, format!("unexpected character {other:?}"))),
            }
        };
        out.push(Token { tok, span: Span::new(start, cur.pos) });
    }
}

fn number(cur: &mut Cursor<'_>, start: Pos) -> Result<Tok, ParseError> {
    let mut s = String::new();
    let digits = |cur: &mut Cursor<'_>, s: &mut String| {
        let mut any = false;
        while let Some(d) = cur.peek().filter(char::is_ascii_digit) {
            s.push(d);
            cur.bump();
            any = true;
        }
        any
    };
    digits(cur, &mut s);
    if cur.peek() == Some('.') {
        s.push('.');
        cur.bump();
        if !digits(cur, &mut s) {
            return Err(ParseError::new(start, "expected digits after decimal point"));
        }
    }
    if matches!(cur.peek(), Some('e' | 'E')) {
        s.push('e');
        cur.bump();
        if let Some(sign @ ('+' | '-')) = cur.peek() {
            s.push(sign);
            cur.bump();
        }
        if !digits(cur, &mut s) {
            return Err(ParseError::new(start, "expected digits in exponent"));
        }
    }
    if cur.peek().is_some_and(|c| c.is_ascii_alphabetic() || c == '_') {
        return Err(ParseError::new(start, "identifier cannot start with a digit"));
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Tok::Num(v)),
        _ => Err(ParseError::new(start, format!("number `{s}` is out of range"))),
    }
}

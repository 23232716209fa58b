//! A small scripting language over sequences of continuous functions.
//!
//! ```text
//! let f = seq(n, x ^ n) on [0, 1];
//! eval f at 0.5;
//! ```

pub mod ast;
pub mod demos;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod report;
pub mod run;

use std::fmt;

pub use ast::{Pos, Script, Span};
pub use parser::parse;
pub use pretty::pretty;
pub use report::{Format, Report};
pub use run::{run, run_source, RunConfig, RunOutput};

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub pos: Pos,
    pub message: String,
    /// Tokens that would have been accepted at `pos`, when known.
    pub expected: Vec<String>,
}

impl ParseError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        ParseError { pos, message: message.into(), expected: Vec::new() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.pos, self.message)
    }
}

impl std::error::Error for ParseError {}

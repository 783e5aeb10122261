//! Concrete syntax, AST, labelling and printing for the program language.
//!
//! ```text
//! sampling r;
//!
//! g(n) {
//!   if n >= 1 then
//!     n := n + r;
//!     f(n)
//!   else
//!     skip
//!   fi
//! }
//! ```
//!
//! Statements are `skip`, `x := e`, `x := bernoulli(p)`, `if φ then S else S fi`,
//! `if star then S else S fi` (also `if * ...`), `while φ do S od` and calls
//! `f(e, ...)`, separated by `;`. Expressions use `+ - *`, floor division `/`
//! by a positive literal, and `^` with a nonnegative integer exponent.
//! Predicates combine `< <= > >=` with `not`, `and`, `or`.

mod ast;
mod eval;
mod label;
mod lexer;
mod parser;
mod pretty;

use std::fmt;

pub use ast::{CmpOp, Expr, FunctionEntity, InlineDist, Label, Pred, Program, Stmt};
pub use eval::{EvalError, MAX_EXPONENT};
pub use label::label;
pub use lexer::{tokenize, Tok, Token};
pub use parser::{parse, parse_expr, parse_pred, Parser};
pub use pretty::{fmt_rational, listing, pretty_print};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl ParseError {
    pub fn new(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Self { line, col, msg: msg.into() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.msg)
    }
}

/// Parses and labels in one go.
pub fn parse_labelled(src: &str) -> Result<Program, ParseError> {
    parse(src).map(label)
}

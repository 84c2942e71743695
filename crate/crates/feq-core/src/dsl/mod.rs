//! Text format for operator/bound specs.
//!
//! A `.feq` document has an `operator` block of signed terms
//! `coef*f(lin, lin)` (each `lin` a rational-coefficient linear combination
//! of the slot symbols `x` and `y`), a `bound` block of terms
//! `coef*|x|^e1*|y|^e2`, and an optional `params` block of `name = value`
//! lines. `#` starts a line comment. Map coefficients — rationals like
//! `-1/5` or decimals like `-0.2` — are converted to exact rationals from
//! their literal digits, so argument maps compose exactly no matter how
//! they were written; bound coefficients and exponents stay floating
//! point.

mod format;
mod lexer;
mod parser;

pub use format::format_spec;
pub use parser::parse_spec;

use std::collections::BTreeMap;
use std::fmt;

use crate::domain::{BoundSpec, OperatorSpec};

/// Source position (1-based) of a construct, for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

/// A parsed spec: operator, bound, named parameters, and the source
/// positions of the terms (parallel to the canonical term order). Two
/// documents compare equal when their operator, bound, and parameters
/// agree; spans are diagnostic only.
#[derive(Debug, Clone)]
pub struct SpecDocument {
    pub operator: OperatorSpec,
    pub bound: BoundSpec,
    pub params: BTreeMap<String, f64>,
    pub term_spans: Vec<Span>,
    pub bound_spans: Vec<Span>,
}

impl PartialEq for SpecDocument {
    fn eq(&self, other: &Self) -> bool {
        self.operator == other.operator
            && self.bound == other.bound
            && self.params == other.params
    }
}

impl SpecDocument {
    /// Assemble a document from already-built parts (no source positions).
    pub fn from_parts(
        operator: OperatorSpec,
        bound: BoundSpec,
        params: BTreeMap<String, f64>,
    ) -> Self {
        SpecDocument {
            operator,
            bound,
            params,
            term_spans: Vec::new(),
            bound_spans: Vec::new(),
        }
    }
}

/// Parse failure: message, 1-based source position, and (for syntax
/// errors) the token classes that would have been accepted.
#[derive(Debug, Clone)]
pub struct ParseError {
    pub message: String,
    pub line: usize,
    pub col: usize,
    pub expected: Vec<String>,
}

impl ParseError {
    pub(crate) fn syntax(message: impl Into<String>, span: Span, expected: &[&str]) -> Self {
        ParseError {
            message: message.into(),
            line: span.line,
            col: span.col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub(crate) fn semantic(message: impl Into<String>, span: Span) -> Self {
        ParseError {
            message: message.into(),
            line: span.line,
            col: span.col,
            expected: Vec::new(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}, column {}: {}",
            self.line, self.col, self.message
        )?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

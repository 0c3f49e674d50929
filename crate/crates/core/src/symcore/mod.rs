//! Exact expression algebra over real coordinate symbols with complex
//! rational coefficients.
//!
//! Expressions are built from constants, symbols, sums, products, integer
//! powers, `sin`/`cos`/`exp` and conjugation. Every symbol denotes a real
//! coordinate, so complex quantities such as `z = x + i·y` are ordinary
//! expressions and conjugation only ever acts on coefficients.
//!
//! [`normalize`] produces a canonical sum of monomials: sums and products are
//! flattened, like monomials are collected with exact rational arithmetic,
//! symbols are ordered by name and constants are folded. Trigonometric
//! identities are deliberately not applied.

mod coef;
mod eval;
mod expr;
mod grid;
mod parse;
pub(crate) mod poly;

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

pub use coef::Coef;
pub use eval::{evaluate, CompiledExpr, Point};
pub use expr::{Expr, Func, Node, Symbol};
pub use grid::{Axis, GridSpec};
pub use parse::parse;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymError {
    #[error("unknown coordinate symbol '{0}'")]
    UnknownSymbol(String),
    #[error("symbol '{0}' has no value at the evaluation point")]
    UnboundSymbol(String),
    #[error("evaluation produced a non-finite value")]
    NonFinite,
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

/// Exact partial derivative of `e` with respect to the declared coordinate `x`.
pub fn differentiate(e: &Expr, x: &Symbol, coords: &[Symbol]) -> Result<Expr, SymError> {
    if !coords.contains(x) {
        return Err(SymError::UnknownSymbol(x.name().to_string()));
    }
    Ok(e.diff(x))
}

/// Simultaneous substitution; symbols without a binding are left alone.
pub fn substitute(e: &Expr, bindings: &BTreeMap<Symbol, Expr>) -> Expr {
    e.subs(bindings)
}

pub fn normalize(e: &Expr) -> Expr {
    e.normalize()
}

pub fn conjugate(e: &Expr) -> Expr {
    e.conj()
}

/// Evaluates `e` at a point given as parallel coordinate/value slices.
pub fn evaluate_at(e: &Expr, coords: &[Symbol], values: &[f64]) -> Result<Complex64, SymError> {
    evaluate(e, &Point::from_coords(coords, values))
}

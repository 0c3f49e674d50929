//! Numerical evaluation of expressions, either by walking the tree or
//! through a compiled stack program for repeated evaluation on grids.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::expr::{Expr, Func, Node, Symbol};
use super::SymError;

/// Assignment of values to coordinate symbols. Values are complex so the
/// same expressions can be evaluated off the real locus.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Point {
    values: BTreeMap<Symbol, Complex64>,
}

impl Point {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn real<'a, I: IntoIterator<Item = (&'a str, f64)>>(entries: I) -> Self {
        Self {
            values: entries
                .into_iter()
                .map(|(k, v)| (Symbol::new(k), Complex64::new(v, 0.0)))
                .collect(),
        }
    }

    pub fn from_coords(coords: &[Symbol], values: &[f64]) -> Self {
        Self {
            values: coords
                .iter()
                .cloned()
                .zip(values.iter().map(|&v| Complex64::new(v, 0.0)))
                .collect(),
        }
    }

    pub fn with(mut self, name: &str, value: Complex64) -> Self {
        self.values.insert(Symbol::new(name), value);
        self
    }

    pub fn set(&mut self, s: Symbol, value: Complex64) {
        self.values.insert(s, value);
    }

    pub fn get(&self, s: &Symbol) -> Option<Complex64> {
        self.values.get(s).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, &Complex64)> {
        self.values.iter()
    }
}

fn check(v: Complex64) -> Result<Complex64, SymError> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(SymError::NonFinite)
    }
}

fn apply_func(f: Func, v: Complex64) -> Complex64 {
    match f {
        Func::Sin => v.sin(),
        Func::Cos => v.cos(),
        Func::Exp => v.exp(),
    }
}

fn powi(v: Complex64, n: i32) -> Complex64 {
    if n >= 0 {
        v.powu(n as u32)
    } else {
        Complex64::new(1.0, 0.0) / v.powu(n.unsigned_abs())
    }
}

/// Evaluates `e` at `p`; every free symbol must be bound and every
/// intermediate value must stay finite.
pub fn evaluate(e: &Expr, p: &Point) -> Result<Complex64, SymError> {
    let v = match e.node() {
        Node::Const(c) => c.to_complex64(),
        Node::Sym(s) => p
            .get(s)
            .ok_or_else(|| SymError::UnboundSymbol(s.name().to_string()))?,
        Node::Sum(xs) => {
            let mut acc = Complex64::new(0.0, 0.0);
            for x in xs {
                acc += evaluate(x, p)?;
            }
            acc
        }
        Node::Product(xs) => {
            let mut acc = Complex64::new(1.0, 0.0);
            for x in xs {
                acc *= evaluate(x, p)?;
            }
            acc
        }
        Node::Pow(b, n) => powi(evaluate(b, p)?, *n),
        Node::Apply(f, a) => apply_func(*f, evaluate(a, p)?),
        Node::Conj(a) => evaluate(a, p)?.conj(),
    };
    check(v)
}

#[derive(Clone, Debug)]
enum Op {
    Const(Complex64),
    Var(usize),
    Add(usize),
    Mul(usize),
    Pow(i32),
    Apply(Func),
    Conj,
}

/// Stack program for an expression with symbols bound to slice positions.
#[derive(Clone, Debug)]
pub struct CompiledExpr {
    ops: Vec<Op>,
    depth: usize,
}

impl CompiledExpr {
    /// Compiles `e` against the ordered variable list `vars`.
    pub fn new(e: &Expr, vars: &[Symbol]) -> Result<Self, SymError> {
        let mut ops = Vec::new();
        let mut depth = 0;
        let mut max_depth = 0;
        emit(e, vars, &mut ops, &mut depth, &mut max_depth)?;
        Ok(Self {
            ops,
            depth: max_depth,
        })
    }

    /// Evaluates with complex variable values; no finiteness check.
    pub fn eval_raw(&self, vals: &[Complex64]) -> Complex64 {
        let mut stack: Vec<Complex64> = Vec::with_capacity(self.depth);
        for op in &self.ops {
            match op {
                Op::Const(c) => stack.push(*c),
                Op::Var(i) => stack.push(vals[*i]),
                Op::Add(n) => {
                    let start = stack.len() - n;
                    let s = stack[start..].iter().sum();
                    stack.truncate(start);
                    stack.push(s);
                }
                Op::Mul(n) => {
                    let start = stack.len() - n;
                    let s = stack[start..]
                        .iter()
                        .fold(Complex64::new(1.0, 0.0), |a, b| a * b);
                    stack.truncate(start);
                    stack.push(s);
                }
                Op::Pow(n) => {
                    let v = stack.pop().unwrap();
                    stack.push(powi(v, *n));
                }
                Op::Apply(f) => {
                    let v = stack.pop().unwrap();
                    stack.push(apply_func(*f, v));
                }
                Op::Conj => {
                    let v = stack.pop().unwrap();
                    stack.push(v.conj());
                }
            }
        }
        stack.pop().unwrap_or_default()
    }

    pub fn eval(&self, vals: &[Complex64]) -> Result<Complex64, SymError> {
        check(self.eval_raw(vals))
    }

    pub fn eval_real(&self, vals: &[f64]) -> Result<Complex64, SymError> {
        let vals: Vec<Complex64> = vals.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.eval(&vals)
    }
}

fn emit(
    e: &Expr,
    vars: &[Symbol],
    ops: &mut Vec<Op>,
    depth: &mut usize,
    max_depth: &mut usize,
) -> Result<(), SymError> {
    match e.node() {
        Node::Const(c) => {
            ops.push(Op::Const(c.to_complex64()));
            *depth += 1;
        }
        Node::Sym(s) => {
            let idx = vars
                .iter()
                .position(|v| v == s)
                .ok_or_else(|| SymError::UnboundSymbol(s.name().to_string()))?;
            ops.push(Op::Var(idx));
            *depth += 1;
        }
        Node::Sum(xs) | Node::Product(xs) => {
            for x in xs {
                emit(x, vars, ops, depth, max_depth)?;
            }
            *depth -= xs.len();
            let op = if matches!(e.node(), Node::Sum(_)) {
                Op::Add(xs.len())
            } else {
                Op::Mul(xs.len())
            };
            ops.push(op);
            *depth += 1;
        }
        Node::Pow(b, n) => {
            emit(b, vars, ops, depth, max_depth)?;
            ops.push(Op::Pow(*n));
        }
        Node::Apply(f, a) => {
            emit(a, vars, ops, depth, max_depth)?;
            ops.push(Op::Apply(*f));
        }
        Node::Conj(a) => {
            emit(a, vars, ops, depth, max_depth)?;
            ops.push(Op::Conj);
        }
    }
    *max_depth = (*max_depth).max(*depth);
    Ok(())
}

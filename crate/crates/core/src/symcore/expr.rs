//! Immutable expression trees over real coordinate symbols.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use super::coef::Coef;
use super::poly::Poly;

/// A real coordinate symbol. Symbols compare by name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

/// Elementary functions allowed inside expressions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Sin,
    Cos,
    Exp,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Const(Coef),
    Sym(Symbol),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Pow(Expr, i32),
    Apply(Func, Expr),
    Conj(Expr),
}

/// Expression tree node handle. Cloning is cheap; trees are never mutated.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Expr(Arc<Node>);

impl Expr {
    pub fn from_node(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(c: Coef) -> Self {
        Expr::from_node(Node::Const(c))
    }

    pub fn int(n: i64) -> Self {
        Expr::constant(Coef::from_int(n))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Expr::constant(Coef::from_ratio(num, den))
    }

    pub fn zero() -> Self {
        Expr::int(0)
    }

    pub fn one() -> Self {
        Expr::int(1)
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        Expr::constant(Coef::i())
    }

    /// Exact binary value of a finite float; panics on NaN or infinity.
    pub fn real(x: f64) -> Self {
        Expr::constant(Coef::from_f64(x).expect("finite constant"))
    }

    pub fn complex(re: f64, im: f64) -> Self {
        Expr::constant(
            Coef::from_complex64(num_complex::Complex64::new(re, im)).expect("finite constant"),
        )
    }

    pub fn sym(name: &str) -> Self {
        Expr::from_node(Node::Sym(Symbol::new(name)))
    }

    pub fn symbol(s: &Symbol) -> Self {
        Expr::from_node(Node::Sym(s.clone()))
    }

    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Self {
        let terms: Vec<Expr> = terms.into_iter().collect();
        match terms.len() {
            0 => Expr::zero(),
            1 => terms.into_iter().next().unwrap(),
            _ => Expr::from_node(Node::Sum(terms)),
        }
    }

    pub fn product<I: IntoIterator<Item = Expr>>(factors: I) -> Self {
        let factors: Vec<Expr> = factors.into_iter().collect();
        match factors.len() {
            0 => Expr::one(),
            1 => factors.into_iter().next().unwrap(),
            _ => Expr::from_node(Node::Product(factors)),
        }
    }

    pub fn powi(&self, n: i32) -> Self {
        Expr::from_node(Node::Pow(self.clone(), n))
    }

    pub fn sin(&self) -> Self {
        Expr::from_node(Node::Apply(Func::Sin, self.clone()))
    }

    pub fn cos(&self) -> Self {
        Expr::from_node(Node::Apply(Func::Cos, self.clone()))
    }

    pub fn exp(&self) -> Self {
        Expr::from_node(Node::Apply(Func::Exp, self.clone()))
    }

    pub fn conj(&self) -> Self {
        Expr::from_node(Node::Conj(self.clone()))
    }

    pub fn as_const(&self) -> Option<&Coef> {
        match self.node() {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    /// Canonical form; see [`super::normalize`].
    pub fn normalize(&self) -> Expr {
        Poly::from_expr(self).to_expr()
    }

    /// True when the expression normalizes to the constant zero.
    pub fn is_zero(&self) -> bool {
        Poly::from_expr(self).is_zero()
    }

    /// Exact partial derivative, returned in canonical form.
    pub fn diff(&self, x: &Symbol) -> Expr {
        Poly::from_expr(self).derivative(x).to_expr()
    }

    /// Simultaneous substitution of symbols, returned in canonical form.
    pub fn subs(&self, bindings: &BTreeMap<Symbol, Expr>) -> Expr {
        let polys: BTreeMap<Symbol, Poly> = bindings
            .iter()
            .map(|(k, v)| (k.clone(), Poly::from_expr(v)))
            .collect();
        Poly::from_expr(self).substitute(&polys).to_expr()
    }

    /// Real part, exact because every symbol is real.
    pub fn re(&self) -> Expr {
        (self + &self.conj()) * Expr::ratio(1, 2)
    }

    /// Imaginary part, exact because every symbol is real.
    pub fn im(&self) -> Expr {
        (self - &self.conj()) * Expr::constant(Coef::from_ratio(-1, 2) * Coef::i())
    }

    /// Free symbols in sorted order.
    pub fn free_symbols(&self) -> Vec<Symbol> {
        let mut out = std::collections::BTreeSet::new();
        self.collect_symbols(&mut out);
        out.into_iter().collect()
    }

    fn collect_symbols(&self, out: &mut std::collections::BTreeSet<Symbol>) {
        match self.node() {
            Node::Const(_) => {}
            Node::Sym(s) => {
                out.insert(s.clone());
            }
            Node::Sum(xs) | Node::Product(xs) => xs.iter().for_each(|x| x.collect_symbols(out)),
            Node::Pow(b, _) => b.collect_symbols(out),
            Node::Apply(_, a) | Node::Conj(a) => a.collect_symbols(out),
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

// Precedence levels: 0 sum, 1 product, 2 power/atom.
fn write_expr(e: &Expr, f: &mut fmt::Formatter<'_>, parent: u8) -> fmt::Result {
    match e.node() {
        Node::Const(c) => {
            let plain_natural = c.is_real() && c.re.is_integer() && c.re >= num_rational::BigRational::from_integer(0.into());
            if parent >= 2 && !plain_natural && c.is_real() || parent >= 2 && !c.is_real() && num_traits::Zero::is_zero(&c.re) {
                write!(f, "({c})")
            } else {
                write!(f, "{c}")
            }
        }
        Node::Sym(s) => write!(f, "{s}"),
        Node::Sum(xs) => {
            if parent > 0 {
                write!(f, "(")?;
            }
            for (k, x) in xs.iter().enumerate() {
                if k > 0 {
                    write!(f, " + ")?;
                }
                write_expr(x, f, 0)?;
            }
            if parent > 0 {
                write!(f, ")")?;
            }
            Ok(())
        }
        Node::Product(xs) => {
            if parent > 1 {
                write!(f, "(")?;
            }
            for (k, x) in xs.iter().enumerate() {
                if k > 0 {
                    write!(f, "*")?;
                }
                write_expr(x, f, 1)?;
            }
            if parent > 1 {
                write!(f, ")")?;
            }
            Ok(())
        }
        Node::Pow(b, n) => {
            write_expr(b, f, 2)?;
            if *n < 0 {
                write!(f, "^({n})")
            } else {
                write!(f, "^{n}")
            }
        }
        Node::Apply(func, a) => {
            write!(f, "{}(", func.name())?;
            write_expr(a, f, 0)?;
            write!(f, ")")
        }
        Node::Conj(a) => {
            write!(f, "conj(")?;
            write_expr(a, f, 0)?;
            write!(f, ")")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self, f, 0)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl From<Coef> for Expr {
    fn from(c: Coef) -> Self {
        Expr::constant(c)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
        impl<'a> $trait<&'a Expr> for &'a Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), rhs.clone())
            }
        }
        impl<'a> $trait<&'a Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs.clone())
            }
        }
        impl<'a> $trait<Expr> for &'a Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| Expr::from_node(Node::Sum(vec![a, b])));
binop!(Sub, sub, |a, b| Expr::from_node(Node::Sum(vec![a, -b])));
binop!(Mul, mul, |a, b| Expr::from_node(Node::Product(vec![a, b])));
binop!(Div, div, |a, b| {
    match b.as_const().and_then(Coef::recip) {
        Some(r) => Expr::from_node(Node::Product(vec![a, Expr::constant(r)])),
        None => Expr::from_node(Node::Product(vec![a, b.powi(-1)])),
    }
});

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self.node() {
            Node::Const(c) => Expr::constant(-c),
            _ => Expr::from_node(Node::Product(vec![Expr::int(-1), self])),
        }
    }
}

impl<'a> Neg for &'a Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -(self.clone())
    }
}

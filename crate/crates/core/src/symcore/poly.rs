//! Canonical sum-of-monomials form used for normalization, exact
//! differentiation and substitution.
//!
//! A [`Poly`] is a finite sum of `coef · Π atomᵉ` with nonzero exact
//! coefficients. Atoms are real symbols, elementary functions of canonical
//! arguments, or (only under negative exponents) non-monomial sums.
//! Conjugation is pushed down to coefficients, so no conjugate node
//! survives normalization.

use std::collections::BTreeMap;

use super::coef::Coef;
use super::expr::{Expr, Func, Node, Symbol};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum Atom {
    Sym(Symbol),
    Apply(Func, Poly),
    /// A sum with at least two terms; only ever carries negative exponents.
    Opaque(Poly),
}

/// Sorted atom powers with nonzero exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct Monomial(Vec<(Atom, i32)>);

impl Monomial {
    fn one() -> Self {
        Monomial(Vec::new())
    }

    fn atom(a: Atom, e: i32) -> Self {
        if e == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(a, e)])
        }
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let e = a[i].1 + b[j].1;
                    if e != 0 {
                        out.push((a[i].0.clone(), e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    fn powi(&self, n: i32) -> Monomial {
        if n == 0 {
            return Monomial::one();
        }
        Monomial(self.0.iter().map(|(a, e)| (a.clone(), e * n)).collect())
    }

    fn is_one(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct Poly {
    terms: BTreeMap<Monomial, Coef>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: Coef) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Monomial::one(), c);
        }
        p
    }

    pub fn one() -> Self {
        Poly::constant(Coef::one())
    }

    pub fn symbol(s: &Symbol) -> Self {
        Poly::from_atom(Atom::Sym(s.clone()), 1)
    }

    fn from_atom(a: Atom, e: i32) -> Self {
        let mut p = Poly::zero();
        p.terms.insert(Monomial::atom(a, e), Coef::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant value when the polynomial has no non-constant term.
    fn add_term(&mut self, m: Monomial, c: Coef) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let sum = &*existing + &c;
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let (big, small) = if self.terms.len() >= other.terms.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Coef) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    /// Integer power. Negative powers of a single term invert it exactly;
    /// negative powers of a genuine sum become an opaque atom.
    /// Returns `None` for a negative power of zero.
    pub fn powi(&self, n: i32) -> Option<Poly> {
        if n == 0 {
            return Some(Poly::one());
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            let mut out = Poly::zero();
            out.terms.insert(m.powi(n), c.powi(n)?);
            return Some(out);
        }
        if n < 0 {
            if self.is_zero() {
                return None;
            }
            return Some(Poly::from_atom(Atom::Opaque(self.clone()), n));
        }
        let mut acc = Poly::one();
        let mut sq = self.clone();
        let mut k = n as u32;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&sq);
            }
            k >>= 1;
            if k > 0 {
                sq = sq.mul(&sq);
            }
        }
        Some(acc)
    }

    pub fn apply(f: Func, arg: Poly) -> Poly {
        if arg.is_zero() {
            return match f {
                Func::Sin => Poly::zero(),
                Func::Cos | Func::Exp => Poly::one(),
            };
        }
        Poly::from_atom(Atom::Apply(f, arg), 1)
    }

    /// Complex conjugate under the convention that every symbol is real.
    pub fn conj(&self) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut term = Poly::constant(c.conj());
            for (a, e) in &m.0 {
                let atom = match a {
                    Atom::Sym(_) => Poly::from_atom(a.clone(), *e),
                    Atom::Apply(f, p) => Poly::apply(*f, p.conj())
                        .powi(*e)
                        .expect("elementary atom powers are nonnegative"),
                    Atom::Opaque(p) => Poly::from_atom(Atom::Opaque(p.conj()), *e),
                };
                term = term.mul(&atom);
            }
            out = out.add(&term);
        }
        out
    }

    fn atom_derivative(a: &Atom, x: &Symbol) -> Poly {
        match a {
            Atom::Sym(s) => {
                if s == x {
                    Poly::one()
                } else {
                    Poly::zero()
                }
            }
            Atom::Apply(f, p) => {
                let inner = p.derivative(x);
                if inner.is_zero() {
                    return Poly::zero();
                }
                let outer = match f {
                    Func::Sin => Poly::apply(Func::Cos, p.clone()),
                    Func::Cos => Poly::apply(Func::Sin, p.clone()).scale(&Coef::from_int(-1)),
                    Func::Exp => Poly::apply(Func::Exp, p.clone()),
                };
                outer.mul(&inner)
            }
            Atom::Opaque(p) => p.derivative(x),
        }
    }

    pub fn derivative(&self, x: &Symbol) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            for (idx, (a, e)) in m.0.iter().enumerate() {
                let da = Poly::atom_derivative(a, x);
                if da.is_zero() {
                    continue;
                }
                let mut rest = m.0.clone();
                if *e == 1 {
                    rest.remove(idx);
                } else {
                    rest[idx].1 = e - 1;
                }
                let mut head = Poly::zero();
                head.terms.insert(Monomial(rest), c * &Coef::from_int(*e as i64));
                out = out.add(&head.mul(&da));
            }
        }
        out
    }

    pub fn substitute(&self, bindings: &BTreeMap<Symbol, Poly>) -> Poly {
        if bindings.is_empty() {
            return self.clone();
        }
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut term = Poly::constant(c.clone());
            for (a, e) in &m.0 {
                let base = match a {
                    Atom::Sym(s) => match bindings.get(s) {
                        Some(p) => p.clone(),
                        None => Poly::symbol(s),
                    },
                    Atom::Apply(f, p) => Poly::apply(*f, p.substitute(bindings)),
                    Atom::Opaque(p) => p.substitute(bindings),
                };
                // A substituted opaque sum may have collapsed to zero; the
                // resulting division by zero is represented as an opaque
                // atom of zero, which evaluation reports as non-finite.
                let factor = base
                    .powi(*e)
                    .unwrap_or_else(|| Poly::from_atom(Atom::Opaque(Poly::zero()), *e));
                term = term.mul(&factor);
            }
            out = out.add(&term);
        }
        out
    }

    pub fn from_expr(e: &Expr) -> Poly {
        match e.node() {
            Node::Const(c) => Poly::constant(c.clone()),
            Node::Sym(s) => Poly::symbol(s),
            Node::Sum(xs) => xs
                .iter()
                .fold(Poly::zero(), |acc, x| acc.add(&Poly::from_expr(x))),
            Node::Product(xs) => {
                let mut acc = Poly::one();
                for x in xs {
                    acc = acc.mul(&Poly::from_expr(x));
                    if acc.is_zero() {
                        break;
                    }
                }
                acc
            }
            Node::Pow(b, n) => {
                let base = Poly::from_expr(b);
                base.powi(*n)
                    .unwrap_or_else(|| Poly::from_atom(Atom::Opaque(Poly::zero()), *n))
            }
            Node::Apply(f, a) => Poly::apply(*f, Poly::from_expr(a)),
            Node::Conj(a) => Poly::from_expr(a).conj(),
        }
    }

    fn atom_expr(a: &Atom) -> Expr {
        match a {
            Atom::Sym(s) => Expr::symbol(s),
            Atom::Apply(f, p) => Expr::from_node(Node::Apply(*f, p.to_expr())),
            Atom::Opaque(p) => p.to_expr(),
        }
    }

    pub fn to_expr(&self) -> Expr {
        let terms: Vec<Expr> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut factors = Vec::with_capacity(m.0.len() + 1);
                if !c.is_one() || m.is_one() {
                    factors.push(Expr::constant(c.clone()));
                }
                for (a, e) in &m.0 {
                    let base = Poly::atom_expr(a);
                    factors.push(if *e == 1 { base } else { base.powi(*e) });
                }
                Expr::product(factors)
            })
            .collect();
        Expr::sum(terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Expr {
        Expr::sym("x")
    }
    fn y() -> Expr {
        Expr::sym("y")
    }

    #[test]
    fn opaque_reciprocal_is_stable() {
        let e = (x() + y()).powi(-2) * x();
        let n = e.normalize();
        assert_eq!(n.normalize(), n);
        let d = n.diff(&Symbol::new("x"));
        assert_eq!(d.normalize(), d);
    }

    #[test]
    fn monomial_inverse_cancels() {
        let e = x().powi(-1) * x() * Expr::int(3);
        assert_eq!(e.normalize(), Expr::int(3));
    }

    #[test]
    fn elementary_functions_fold_at_zero() {
        let z = x() - x();
        assert_eq!(z.sin().normalize(), Expr::zero());
        assert_eq!(z.cos().normalize(), Expr::one());
        assert_eq!(z.exp().normalize(), Expr::one());
    }
}

use num_complex::Complex64;

use super::{Derivation, LieError};
use crate::symcore::{evaluate, CompiledExpr, Expr, Point, SymError, Symbol};

pub const DEFAULT_ORDER: usize = 12;

/// Which flow-time variable a series is written in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SeriesVar {
    Tau,
    TauBar,
}

impl SeriesVar {
    pub fn flip(self) -> Self {
        match self {
            SeriesVar::Tau => SeriesVar::TauBar,
            SeriesVar::TauBar => SeriesVar::Tau,
        }
    }

    fn apply(self, tau: Complex64) -> Complex64 {
        match self {
            SeriesVar::Tau => tau,
            SeriesVar::TauBar => tau.conj(),
        }
    }
}

/// Truncated power series `Σ_{k≤N} c_k τᵏ` with expression coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TauSeries {
    var: SeriesVar,
    coeffs: Vec<Expr>,
}

impl TauSeries {
    pub fn new(var: SeriesVar, coeffs: Vec<Expr>) -> Self {
        assert!(!coeffs.is_empty(), "a series has at least one coefficient");
        Self {
            var,
            coeffs: coeffs.iter().map(Expr::normalize).collect(),
        }
    }

    pub fn constant(f: &Expr, order: usize) -> Self {
        let mut coeffs = vec![Expr::zero(); order + 1];
        coeffs[0] = f.normalize();
        Self {
            var: SeriesVar::Tau,
            coeffs,
        }
    }

    pub fn var(&self) -> SeriesVar {
        self.var
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Expr] {
        &self.coeffs
    }

    pub fn coefficient(&self, k: usize) -> &Expr {
        &self.coeffs[k]
    }

    /// Index of the last nonzero coefficient, if any.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> TauSeries {
        TauSeries {
            var: self.var,
            coeffs: self.coeffs.iter().map(|c| f(c).normalize()).collect(),
        }
    }

    pub fn add(&self, other: &TauSeries) -> Result<TauSeries, LieError> {
        if self.var != other.var {
            return Err(LieError::TagMismatch);
        }
        let n = self.order().min(other.order());
        Ok(TauSeries {
            var: self.var,
            coeffs: (0..=n)
                .map(|k| (&self.coeffs[k] + &other.coeffs[k]).normalize())
                .collect(),
        })
    }

    /// The series as a polynomial expression in the symbol `t`.
    pub fn to_expr(&self, t: &Expr) -> Expr {
        Expr::sum(
            self.coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(k, c)| c * t.powi(k as i32)),
        )
        .normalize()
    }

    pub fn compile(&self, vars: &[Symbol]) -> Result<CompiledSeries, SymError> {
        CompiledSeries::new(self, vars)
    }
}

/// `c_k = Xᵏ(f)/k!` for `k ≤ N`.
pub fn lie_exp(x: &Derivation, f: &Expr, order: usize) -> TauSeries {
    let mut coeffs = Vec::with_capacity(order + 1);
    let mut c = f.normalize();
    coeffs.push(c.clone());
    for k in 0..order {
        c = if c.is_zero() {
            c
        } else {
            (x.apply(&c) * Expr::ratio(1, k as i64 + 1)).normalize()
        };
        coeffs.push(c.clone());
    }
    TauSeries {
        var: SeriesVar::Tau,
        coeffs,
    }
}

/// Horner evaluation of the partial sum at `τ` (or `τ̄` for conjugate-tagged
/// series).
pub fn eval_series(s: &TauSeries, tau: Complex64, p: &Point) -> Result<Complex64, SymError> {
    let t = s.var.apply(tau);
    let mut acc = Complex64::new(0.0, 0.0);
    for c in s.coeffs.iter().rev() {
        acc = acc * t + evaluate(c, p)?;
    }
    if acc.re.is_finite() && acc.im.is_finite() {
        Ok(acc)
    } else {
        Err(SymError::NonFinite)
    }
}

/// Conjugates the coefficients and flips the series variable.
pub fn conjugate_series(s: &TauSeries) -> TauSeries {
    TauSeries {
        var: s.var.flip(),
        coeffs: s.coeffs.iter().map(|c| c.conj().normalize()).collect(),
    }
}

/// Cauchy product truncated to the shorter order.
pub fn series_product(a: &TauSeries, b: &TauSeries) -> Result<TauSeries, LieError> {
    if a.var != b.var {
        return Err(LieError::TagMismatch);
    }
    let n = a.order().min(b.order());
    let coeffs = (0..=n)
        .map(|k| {
            Expr::sum(
                (0..=k)
                    .filter(|&j| !a.coeffs[j].is_zero() && !b.coeffs[k - j].is_zero())
                    .map(|j| &a.coeffs[j] * &b.coeffs[k - j]),
            )
            .normalize()
        })
        .collect();
    Ok(TauSeries { var: a.var, coeffs })
}

/// Root-test estimate of the convergence radius in the series variable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Radius {
    /// The series terminates, or its trailing coefficients decay faster
    /// than any geometric sequence.
    Infinite,
    Finite(f64),
    /// The trailing coefficients vanish at the point but not identically.
    Inconclusive,
}

/// Estimates the radius from the trailing `⌈N/2⌉` coefficients at `p`.
///
/// With `r_k = |c_k(p)|^{1/k}`, the estimate is `1 / max r_k`. When `r_k`
/// falls off like a power of `k` (slope of `log r_k` against `log k` below
/// `-1/2`, as for the `1/k!` decay of entire series) the radius is reported
/// as infinite.
pub fn estimate_radius(s: &TauSeries, p: &Point) -> Result<Radius, SymError> {
    let n = s.order();
    assert!(n >= 4, "radius estimate needs order at least 4");
    let first = n + 1 - n.div_ceil(2);
    let tail = &s.coeffs[first..];
    if tail.iter().all(Expr::is_zero) {
        return Ok(Radius::Infinite);
    }
    let mut samples = Vec::new();
    for (j, c) in tail.iter().enumerate() {
        let k = (first + j) as f64;
        let m = evaluate(c, p)?.norm();
        if m > 0.0 {
            samples.push((k, m.powf(1.0 / k)));
        }
    }
    if samples.is_empty() || samples.iter().all(|&(_, r)| r < 1e-300) {
        return Ok(Radius::Inconclusive);
    }
    let rmax = samples.iter().map(|&(_, r)| r).fold(0.0, f64::max);
    if samples.len() >= 3 {
        let m = samples.len() as f64;
        let (sx, sy) = samples
            .iter()
            .fold((0.0, 0.0), |(a, b), &(k, r)| (a + k.ln(), b + r.ln()));
        let (mx, my) = (sx / m, sy / m);
        let (num, den) = samples.iter().fold((0.0, 0.0), |(a, b), &(k, r)| {
            let dx = k.ln() - mx;
            (a + dx * (r.ln() - my), b + dx * dx)
        });
        if den > 0.0 && num / den < -0.5 {
            return Ok(Radius::Infinite);
        }
    }
    Ok(Radius::Finite(1.0 / rmax))
}

/// A series with coefficients compiled for repeated numerical evaluation.
#[derive(Clone, Debug)]
pub struct CompiledSeries {
    var: SeriesVar,
    coeffs: Vec<Option<CompiledExpr>>,
}

impl CompiledSeries {
    pub fn new(s: &TauSeries, vars: &[Symbol]) -> Result<Self, SymError> {
        let coeffs = s
            .coeffs
            .iter()
            .map(|c| {
                if c.is_zero() {
                    Ok(None)
                } else {
                    CompiledExpr::new(c, vars).map(Some)
                }
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { var: s.var, coeffs })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Partial sum at `τ` for complex variable values, no finiteness check.
    pub fn eval_raw(&self, tau: Complex64, vals: &[Complex64]) -> Complex64 {
        let t = self.var.apply(tau);
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc *= t;
            if let Some(c) = c {
                acc += c.eval_raw(vals);
            }
        }
        acc
    }

    pub fn eval(&self, tau: Complex64, vals: &[Complex64]) -> Result<Complex64, SymError> {
        let v = self.eval_raw(tau, vals);
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(SymError::NonFinite)
        }
    }

    pub fn eval_real(&self, tau: Complex64, vals: &[f64]) -> Result<Complex64, SymError> {
        let vals: Vec<Complex64> = vals.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.eval(tau, &vals)
    }
}

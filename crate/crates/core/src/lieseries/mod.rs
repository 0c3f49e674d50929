//! Vector fields as derivations of the expression algebra and truncated
//! Lie series `e^{τX}·f = Σ τᵏ Xᵏ(f)/k!`.

mod series;

use num_complex::Complex64;
use thiserror::Error;

use crate::symcore::{evaluate, Coef, CompiledExpr, Expr, Point, SymError, Symbol};

pub use series::{
    conjugate_series, estimate_radius, eval_series, lie_exp, series_product, CompiledSeries,
    Radius, SeriesVar, TauSeries, DEFAULT_ORDER,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LieError {
    #[error("{what}: expected {expected} entries, got {got}")]
    Shape {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("symplectic form is not antisymmetric at ({0}, {1})")]
    NotAntisymmetric(usize, usize),
    #[error("symplectic form entry ({0}, {1}) is not constant")]
    NonConstantForm(usize, usize),
    #[error("symplectic form is singular")]
    SingularForm,
    #[error("series variables differ (tau vs conjugate tau)")]
    TagMismatch,
    #[error(transparent)]
    Sym(#[from] SymError),
}

/// A vector field `X = Σ aᵏ ∂/∂xᵏ` acting on expressions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    coords: Vec<Symbol>,
    comps: Vec<Expr>,
}

impl Derivation {
    pub fn new(coords: Vec<Symbol>, comps: Vec<Expr>) -> Result<Self, LieError> {
        if coords.len() != comps.len() {
            return Err(LieError::Shape {
                what: "derivation components",
                expected: coords.len(),
                got: comps.len(),
            });
        }
        let comps = comps.iter().map(Expr::normalize).collect();
        Ok(Self { coords, comps })
    }

    pub fn zero(coords: Vec<Symbol>) -> Self {
        let comps = vec![Expr::zero(); coords.len()];
        Self { coords, comps }
    }

    pub fn coords(&self) -> &[Symbol] {
        &self.coords
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Expr::is_zero)
    }

    /// `X(f)`, normalized.
    pub fn apply(&self, f: &Expr) -> Expr {
        Expr::sum(
            self.coords
                .iter()
                .zip(&self.comps)
                .filter(|(_, a)| !a.is_zero())
                .map(|(x, a)| a * f.diff(x)),
        )
        .normalize()
    }

    /// Lie bracket `[X, Y]`, i.e. the Lie derivative `L_X Y`.
    pub fn bracket(&self, other: &Derivation) -> Derivation {
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| (self.apply(b) - other.apply(a)).normalize())
            .collect();
        Derivation {
            coords: self.coords.clone(),
            comps,
        }
    }

    pub fn scale(&self, c: &Expr) -> Derivation {
        Derivation {
            coords: self.coords.clone(),
            comps: self.comps.iter().map(|a| (c * a).normalize()).collect(),
        }
    }

    pub fn sub(&self, other: &Derivation) -> Derivation {
        Derivation {
            coords: self.coords.clone(),
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| (a - b).normalize())
                .collect(),
        }
    }

    pub fn eval(&self, p: &Point) -> Result<Vec<Complex64>, SymError> {
        self.comps.iter().map(|a| evaluate(a, p)).collect()
    }

    pub fn compile(&self) -> Result<Vec<CompiledExpr>, SymError> {
        self.comps
            .iter()
            .map(|a| CompiledExpr::new(a, &self.coords))
            .collect()
    }
}

/// A symplectic form `ω = ½ Σ ω_{jk} dxʲ∧dxᵏ` given by its antisymmetric
/// coefficient matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymplecticForm {
    coords: Vec<Symbol>,
    matrix: Vec<Vec<Expr>>,
}

impl SymplecticForm {
    pub fn new(coords: Vec<Symbol>, matrix: Vec<Vec<Expr>>) -> Result<Self, LieError> {
        let d = coords.len();
        if matrix.len() != d {
            return Err(LieError::Shape {
                what: "symplectic form rows",
                expected: d,
                got: matrix.len(),
            });
        }
        for row in &matrix {
            if row.len() != d {
                return Err(LieError::Shape {
                    what: "symplectic form columns",
                    expected: d,
                    got: row.len(),
                });
            }
        }
        let matrix: Vec<Vec<Expr>> = matrix
            .iter()
            .map(|r| r.iter().map(Expr::normalize).collect())
            .collect();
        for j in 0..d {
            for k in j..d {
                if !(&matrix[j][k] + &matrix[k][j]).is_zero() {
                    return Err(LieError::NotAntisymmetric(j, k));
                }
            }
        }
        Ok(Self { coords, matrix })
    }

    /// `Σ dxʲ∧dyʲ` on coordinates ordered `(x¹, y¹, x², y², …)`.
    pub fn canonical(coords: Vec<Symbol>) -> Result<Self, LieError> {
        let d = coords.len();
        if d % 2 != 0 {
            return Err(LieError::Shape {
                what: "canonical coordinates (even count)",
                expected: d + 1,
                got: d,
            });
        }
        let mut m = vec![vec![Expr::zero(); d]; d];
        for j in (0..d).step_by(2) {
            m[j][j + 1] = Expr::one();
            m[j + 1][j] = -Expr::one();
        }
        Self::new(coords, m)
    }

    pub fn coords(&self) -> &[Symbol] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn entry(&self, j: usize, k: usize) -> &Expr {
        &self.matrix[j][k]
    }

    /// `ω(u, v) = Σ uʲ ω_{jk} vᵏ`.
    pub fn pair(&self, u: &[Expr], v: &[Expr]) -> Expr {
        let mut terms = Vec::new();
        for (j, uj) in u.iter().enumerate() {
            for (k, vk) in v.iter().enumerate() {
                if !self.matrix[j][k].is_zero() {
                    terms.push(uj * &self.matrix[j][k] * vk);
                }
            }
        }
        Expr::sum(terms).normalize()
    }

    fn constant_matrix(&self) -> Result<Vec<Vec<Coef>>, LieError> {
        let mut out = Vec::with_capacity(self.dim());
        for (j, row) in self.matrix.iter().enumerate() {
            let mut r = Vec::with_capacity(row.len());
            for (k, e) in row.iter().enumerate() {
                match e.normalize().as_const() {
                    Some(c) => r.push(c.clone()),
                    None if e.is_zero() => r.push(Coef::zero()),
                    None => return Err(LieError::NonConstantForm(j, k)),
                }
            }
            out.push(r);
        }
        Ok(out)
    }

    /// Numerical coefficient matrix at `p`.
    pub fn matrix_at(&self, p: &Point) -> Result<Vec<Vec<f64>>, SymError> {
        self.matrix
            .iter()
            .map(|r| r.iter().map(|e| evaluate(e, p).map(|v| v.re)).collect())
            .collect()
    }

    /// Exact inverse of a constant form, by Gaussian elimination over the
    /// Gaussian rationals.
    pub fn inverse(&self) -> Result<Vec<Vec<Coef>>, LieError> {
        let d = self.dim();
        let mut a = self.constant_matrix()?;
        let mut inv: Vec<Vec<Coef>> = (0..d)
            .map(|j| {
                (0..d)
                    .map(|k| if j == k { Coef::one() } else { Coef::zero() })
                    .collect()
            })
            .collect();
        for col in 0..d {
            let pivot = (col..d)
                .find(|&r| !a[r][col].is_zero())
                .ok_or(LieError::SingularForm)?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            let pinv = a[col][col].recip().ok_or(LieError::SingularForm)?;
            for k in 0..d {
                a[col][k] = &a[col][k] * &pinv;
                inv[col][k] = &inv[col][k] * &pinv;
            }
            for r in 0..d {
                if r != col && !a[r][col].is_zero() {
                    let f = a[r][col].clone();
                    for k in 0..d {
                        a[r][k] = &a[r][k] - &(&f * &a[col][k]);
                        inv[r][k] = &inv[r][k] - &(&f * &inv[col][k]);
                    }
                }
            }
        }
        Ok(inv)
    }
}

/// The field `X_h` with `i_{X_h} ω = dh`, i.e. `X_h = −ω⁻¹ ∇h`.
pub fn hamiltonian_field(h: &Expr, omega: &SymplecticForm) -> Result<Derivation, LieError> {
    let inv = omega.inverse()?;
    let grad: Vec<Expr> = omega.coords.iter().map(|x| h.diff(x)).collect();
    let comps = inv
        .iter()
        .map(|row| {
            Expr::sum(
                row.iter()
                    .zip(&grad)
                    .filter(|(c, g)| !c.is_zero() && !g.is_zero())
                    .map(|(c, g)| -(Expr::constant(c.clone()) * g)),
            )
            .normalize()
        })
        .collect();
    Derivation::new(omega.coords.clone(), comps)
}

/// Poisson bracket `{f, g} = ω(X_f, X_g)`.
pub fn poisson_bracket(f: &Expr, g: &Expr, omega: &SymplecticForm) -> Result<Expr, LieError> {
    let xf = hamiltonian_field(f, omega)?;
    let xg = hamiltonian_field(g, omega)?;
    Ok(omega.pair(xf.components(), xg.components()))
}

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::chart::{ChartMap, EvolvedStructure};
use super::metric::metric_at;
use super::KahlerError;
use crate::lieseries::{hamiltonian_field, Derivation, SymplecticForm};
use crate::symcore::{CompiledExpr, Expr, GridSpec, Symbol};

/// A Hamiltonian system with an initial Kähler structure in one chart.
#[derive(Clone, Debug)]
pub struct HamSystem {
    name: String,
    omega: SymplecticForm,
    h: Expr,
    theta: Vec<Expr>,
    chart: Vec<Expr>,
    kappa0: Expr,
    domain: Vec<(f64, f64)>,
    field: Derivation,
}

/// Outcome of the grid checks on a system's analytic hypotheses.
#[derive(Clone, Debug, PartialEq)]
pub struct HypothesisReport {
    /// max |θ^{(0,1)} + (i/2) ∂̄κ₀| over the grid.
    pub theta_defect: f64,
    /// max norm of the (2,0) part of ω in the initial chart.
    pub type_defect: f64,
    /// Smallest metric eigenvalue seen; positive means ω is positive.
    pub min_eigenvalue: f64,
}

impl HypothesisReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.theta_defect <= tol && self.type_defect <= tol && self.min_eigenvalue > 0.0
    }
}

impl HamSystem {
    /// Builds and validates a system. Checks shapes, that `dθ + ω = 0`
    /// exactly, and that `ω` is a constant invertible form.
    pub fn new(
        name: &str,
        omega: SymplecticForm,
        h: Expr,
        theta: Vec<Expr>,
        chart: Vec<Expr>,
        kappa0: Expr,
        domain: Vec<(f64, f64)>,
    ) -> Result<Self, KahlerError> {
        let d = omega.dim();
        if theta.len() != d {
            return Err(KahlerError::Invalid(format!(
                "symplectic potential has {} components for {d} coordinates",
                theta.len()
            )));
        }
        if 2 * chart.len() != d {
            return Err(KahlerError::Invalid(format!(
                "{} chart functions for {d} real coordinates",
                chart.len()
            )));
        }
        if domain.len() != d || domain.iter().any(|&(lo, hi)| !(lo < hi)) {
            return Err(KahlerError::Invalid(
                "domain needs one interval lo < hi per coordinate".into(),
            ));
        }
        let coords = omega.coords().to_vec();
        let all: Vec<&Expr> = std::iter::once(&h)
            .chain(&theta)
            .chain(&chart)
            .chain(std::iter::once(&kappa0))
            .collect();
        for e in all {
            if let Some(s) = e.free_symbols().into_iter().find(|s| !coords.contains(s)) {
                return Err(KahlerError::Invalid(format!(
                    "expression uses '{}', which is not a coordinate",
                    s.name()
                )));
            }
        }
        for j in 0..d {
            for k in 0..d {
                let dtheta = theta[k].diff(&coords[j]) - theta[j].diff(&coords[k]);
                if !(dtheta + omega.entry(j, k)).is_zero() {
                    return Err(KahlerError::Invalid(format!(
                        "d(theta) + omega does not vanish in component ({}, {})",
                        coords[j].name(),
                        coords[k].name()
                    )));
                }
            }
        }
        let field = hamiltonian_field(&h, &omega)?;
        Ok(Self {
            name: name.to_string(),
            h: h.normalize(),
            theta: theta.iter().map(Expr::normalize).collect(),
            chart: chart.iter().map(Expr::normalize).collect(),
            kappa0: kappa0.normalize(),
            omega,
            domain,
            field,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn coords(&self) -> &[Symbol] {
        self.omega.coords()
    }

    /// Complex dimension `n`.
    pub fn n(&self) -> usize {
        self.chart.len()
    }

    pub fn omega(&self) -> &SymplecticForm {
        &self.omega
    }

    pub fn hamiltonian(&self) -> &Expr {
        &self.h
    }

    pub fn theta(&self) -> &[Expr] {
        &self.theta
    }

    pub fn chart(&self) -> &[Expr] {
        &self.chart
    }

    pub fn kappa0(&self) -> &Expr {
        &self.kappa0
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn field(&self) -> &Derivation {
        &self.field
    }

    /// `θ(X_h)`.
    pub fn theta_of_field(&self) -> Expr {
        Expr::sum(
            self.theta
                .iter()
                .zip(self.field.components())
                .map(|(t, a)| t * a),
        )
        .normalize()
    }

    /// Uniform grid on the domain box.
    pub fn domain_grid(&self, count: usize) -> Result<GridSpec, KahlerError> {
        let axes = self
            .coords()
            .iter()
            .zip(&self.domain)
            .map(|(s, &(lo, hi))| crate::symcore::Axis::new(s.name(), lo, hi, count))
            .collect();
        Ok(GridSpec::new(axes)?)
    }

    /// Grid checks of `θ^{(0,1)} = −(i/2) ∂̄₀κ₀` and of `ω` being a positive
    /// (1,1)-form in the initial chart.
    pub fn check_hypotheses(&self, grid: &GridSpec) -> Result<HypothesisReport, KahlerError> {
        let es = EvolvedStructure::new(self, 0)?;
        let coords = self.coords().to_vec();
        let theta: Vec<CompiledExpr> = self
            .theta
            .iter()
            .map(|t| CompiledExpr::new(t, &coords))
            .collect::<Result<_, _>>()?;
        let dk: Vec<CompiledExpr> = coords
            .iter()
            .map(|x| CompiledExpr::new(&self.kappa0.diff(x), &coords))
            .collect::<Result<_, _>>()?;
        let n = self.n();
        let zero = Complex64::new(0.0, 0.0);
        let reports: Vec<Result<(f64, f64, f64), KahlerError>> = grid
            .points()
            .collect::<Vec<_>>()
            .par_iter()
            .map(|p| {
                let a = es.jacobian(zero, p)?;
                let b = stack_conj(&a);
                let binv = b
                    .clone()
                    .try_inverse()
                    .ok_or(KahlerError::Degenerate { rank: 0, dim: 2 * n })?;
                let th: Vec<f64> = theta
                    .iter()
                    .map(|c| c.eval_real(p).map(|v| v.re))
                    .collect::<Result<_, _>>()?;
                let gk: Vec<f64> = dk
                    .iter()
                    .map(|c| c.eval_real(p).map(|v| v.re))
                    .collect::<Result<_, _>>()?;
                let mut defect: f64 = 0.0;
                for k in 0..n {
                    let col = binv.column(n + k);
                    let th_k: Complex64 = th.iter().zip(col.iter()).map(|(t, c)| c * t).sum();
                    let dk_k: Complex64 = gk.iter().zip(col.iter()).map(|(g, c)| c * g).sum();
                    defect = defect.max((th_k + Complex64::new(0.0, 0.5) * dk_k).norm());
                }
                let m = metric_at(&es, zero, p)?;
                let lam = m.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
                Ok((defect, m.type_defect, lam))
            })
            .collect();
        let mut out = HypothesisReport {
            theta_defect: 0.0,
            type_defect: 0.0,
            min_eigenvalue: f64::INFINITY,
        };
        for r in reports {
            let (d, t, l) = r?;
            out.theta_defect = out.theta_defect.max(d);
            out.type_defect = out.type_defect.max(t);
            out.min_eigenvalue = out.min_eigenvalue.min(l);
        }
        Ok(out)
    }
}

/// `B = [A; Ā]` for an `n × 2n` holomorphic Jacobian `A`.
pub(crate) fn stack_conj(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let (n, d) = a.shape();
    DMatrix::from_fn(2 * n, d, |r, c| {
        if r < n {
            a[(r, c)]
        } else {
            a[(r - n, c)].conj()
        }
    })
}

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::metric::rank_of;
use super::system::HamSystem;
use super::KahlerError;
use crate::lieseries::{conjugate_series, lie_exp, CompiledSeries, TauSeries};
use crate::symcore::{CompiledExpr, Symbol};

/// A family of charts `z_τ : ℝ^{2n} → ℂⁿ` on a symplectic domain.
pub trait ChartMap: Send + Sync {
    /// Real dimension `2n`.
    fn real_dim(&self) -> usize;

    fn chart(&self, tau: Complex64, p: &[f64]) -> Result<Vec<Complex64>, KahlerError>;

    /// Holomorphic Jacobian `∂z_τ/∂x`, an `n × 2n` matrix.
    fn jacobian(&self, tau: Complex64, p: &[f64]) -> Result<DMatrix<Complex64>, KahlerError>;

    /// Matrix of `ω` at `p`, with `ω(u, v) = uᵀ W v`.
    fn omega(&self, p: &[f64]) -> Result<DMatrix<f64>, KahlerError>;

    fn complex_dim(&self) -> usize {
        self.real_dim() / 2
    }
}

/// The chart of a [`HamSystem`] evolved by the Lie series of `X_h`.
#[derive(Clone, Debug)]
pub struct EvolvedStructure {
    sys: HamSystem,
    order: usize,
    z: Vec<TauSeries>,
    zbar: Vec<TauSeries>,
    z_c: Vec<CompiledSeries>,
    dz_c: Vec<Vec<CompiledSeries>>,
    omega_c: Vec<Vec<CompiledExpr>>,
}

impl EvolvedStructure {
    /// `z_τ^i = e^{τX_h}·zⁱ` truncated at `order`, with `z̄_τ` its conjugate.
    pub fn new(sys: &HamSystem, order: usize) -> Result<Self, KahlerError> {
        let coords = sys.coords().to_vec();
        let x = sys.field();
        let z: Vec<TauSeries> = sys.chart().iter().map(|zi| lie_exp(x, zi, order)).collect();
        let zbar = z.iter().map(conjugate_series).collect();
        let z_c = z
            .iter()
            .map(|s| s.compile(&coords))
            .collect::<Result<_, _>>()?;
        let dz_c = z
            .iter()
            .map(|s| {
                coords
                    .iter()
                    .map(|xj| s.map(|c| c.diff(xj)).compile(&coords))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<_, _>>()?;
        let d = coords.len();
        let omega_c = (0..d)
            .map(|j| {
                (0..d)
                    .map(|k| CompiledExpr::new(sys.omega().entry(j, k), &coords))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<_, _>>()?;
        Ok(Self {
            sys: sys.clone(),
            order,
            z,
            zbar,
            z_c,
            dz_c,
            omega_c,
        })
    }

    pub fn system(&self) -> &HamSystem {
        &self.sys
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coords(&self) -> &[Symbol] {
        self.sys.coords()
    }

    pub fn chart_series(&self) -> &[TauSeries] {
        &self.z
    }

    pub fn conj_chart_series(&self) -> &[TauSeries] {
        &self.zbar
    }

    /// Evaluates the chart at complex coordinate values, as needed on the
    /// complexification.
    pub fn chart_complex(&self, tau: Complex64, xi: &[Complex64]) -> Vec<Complex64> {
        self.z_c.iter().map(|s| s.eval_raw(tau, xi)).collect()
    }
}

impl ChartMap for EvolvedStructure {
    fn real_dim(&self) -> usize {
        self.sys.coords().len()
    }

    fn chart(&self, tau: Complex64, p: &[f64]) -> Result<Vec<Complex64>, KahlerError> {
        self.z_c
            .iter()
            .map(|s| s.eval_real(tau, p).map_err(Into::into))
            .collect()
    }

    fn jacobian(&self, tau: Complex64, p: &[f64]) -> Result<DMatrix<Complex64>, KahlerError> {
        let n = self.z_c.len();
        let d = self.real_dim();
        let mut a = DMatrix::zeros(n, d);
        for i in 0..n {
            for j in 0..d {
                a[(i, j)] = self.dz_c[i][j].eval_real(tau, p)?;
            }
        }
        Ok(a)
    }

    fn omega(&self, p: &[f64]) -> Result<DMatrix<f64>, KahlerError> {
        let d = self.real_dim();
        let mut w = DMatrix::zeros(d, d);
        for j in 0..d {
            for k in 0..d {
                w[(j, k)] = self.omega_c[j][k].eval_real(p)?.re;
            }
        }
        Ok(w)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    /// Required residual, max-norm in chart values.
    pub tolerance: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            tolerance: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonSolve {
    pub point: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

fn residual_vector(z: &[Complex64], target: &[Complex64]) -> DVector<f64> {
    let n = z.len();
    DVector::from_fn(2 * n, |r, _| {
        if r < n {
            z[r].re - target[r].re
        } else {
            z[r - n].im - target[r - n].im
        }
    })
}

/// Solves `z_τ(p) = target` for real `p` by Newton's method from `seed`.
///
/// Once the required tolerance is met, a few more steps are taken while
/// the residual keeps shrinking, so results sit at rounding level.
pub fn invert_chart<M: ChartMap + ?Sized>(
    map: &M,
    tau: Complex64,
    target: &[Complex64],
    seed: &[f64],
    opts: NewtonOptions,
) -> Result<NewtonSolve, KahlerError> {
    let d = map.real_dim();
    let n = d / 2;
    let mut p = seed.to_vec();
    let mut f = residual_vector(&map.chart(tau, &p)?, target);
    let mut res = f.amax();
    let mut polish = 0;
    for it in 0..opts.max_iterations {
        if res <= opts.tolerance {
            if polish >= 2 || res == 0.0 {
                return Ok(NewtonSolve {
                    point: p,
                    residual: res,
                    iterations: it,
                });
            }
            polish += 1;
        }
        let a = map.jacobian(tau, &p)?;
        let j = DMatrix::from_fn(d, d, |r, c| {
            if r < n {
                a[(r, c)].re
            } else {
                a[(r - n, c)].im
            }
        });
        let step = match j.clone().lu().solve(&(-&f)) {
            Some(s) if s.iter().all(|v| v.is_finite()) => s,
            _ => {
                let sv: Vec<f64> = j.singular_values().iter().copied().collect();
                return Err(KahlerError::Degenerate {
                    rank: rank_of(&sv),
                    dim: d,
                });
            }
        };
        let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
        let ft = residual_vector(&map.chart(tau, &trial)?, target);
        let rt = ft.amax();
        if res <= opts.tolerance && rt >= res {
            return Ok(NewtonSolve {
                point: p,
                residual: res,
                iterations: it,
            });
        }
        p = trial;
        f = ft;
        res = rt;
    }
    if res <= opts.tolerance {
        return Ok(NewtonSolve {
            point: p,
            residual: res,
            iterations: opts.max_iterations,
        });
    }
    Err(KahlerError::NewtonFailed {
        iterations: opts.max_iterations,
        residual: res,
    })
}

/// `φ_τ(p) = z₀⁻¹(z_τ(p))`, with the initial chart inverted by Newton
/// seeded at `p`.
pub fn phi_map<M: ChartMap + ?Sized>(
    map: &M,
    tau: Complex64,
    p: &[f64],
) -> Result<Vec<f64>, KahlerError> {
    let target = map.chart(tau, p)?;
    Ok(invert_chart(map, Complex64::new(0.0, 0.0), &target, p, NewtonOptions::default())?.point)
}

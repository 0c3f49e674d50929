//! Imaginary-time potentials as Mabuchi geodesics: the Moser map, the path
//! `φ_t = κ_{it} ∘ Φ_t⁻¹ − κ₀`, its velocity and the geodesic residual.
//!
//! All spatial quantities are taken in the real coordinates `(u, v)` of the
//! initial chart `w = z₀ = u + iv`, in which `J₀` is standard.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::kahler::{
    invert_chart, metric_at, riemannian_metric_at, ChartMap, EvolvedStructure, KahlerError,
    NewtonOptions, NewtonSolve, PotentialFlow,
};
use crate::symcore::{differentiate, CompiledExpr};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeodesicError {
    #[error(transparent)]
    Kahler(#[from] KahlerError),
    #[error("left Kähler region at t = {t} (metric eigenvalue {eigenvalue:e})")]
    LeftKahlerRegion { t: f64, eigenvalue: f64 },
    #[error("invalid probe: {0}")]
    InvalidProbe(String),
}

impl From<crate::symcore::SymError> for GeodesicError {
    fn from(e: crate::symcore::SymError) -> Self {
        GeodesicError::Kahler(e.into())
    }
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn imag(t: f64) -> Complex64 {
    Complex64::new(0.0, t)
}

/// Newton options used for the Moser inverse; the residual bound is `1e−10`.
pub const MOSER_OPTIONS: NewtonOptions = NewtonOptions {
    max_iterations: 50,
    tolerance: 1e-10,
};

/// Solves `φ_τ(p) = q`, i.e. `z_τ(p) = z₀(q)`, by Newton from `seed`.
pub fn moser_inverse_from(
    es: &EvolvedStructure,
    tau: Complex64,
    q: &[f64],
    seed: &[f64],
) -> Result<NewtonSolve, KahlerError> {
    let target = es.chart(zero(), q)?;
    invert_chart(es, tau, &target, seed, MOSER_OPTIONS)
}

/// [`moser_inverse_from`] seeded at `q`.
pub fn moser_inverse(es: &EvolvedStructure, tau: Complex64, q: &[f64]) -> Result<Vec<f64>, KahlerError> {
    Ok(moser_inverse_from(es, tau, q, q)?.point)
}

/// `φ_t(q) = κ_{it}(Φ_t⁻¹(q)) − κ₀(q)`.
pub fn mabuchi_path_value(
    es: &EvolvedStructure,
    pf: &PotentialFlow,
    t: f64,
    q: &[f64],
) -> Result<f64, KahlerError> {
    let p = moser_inverse(es, imag(t), q)?;
    Ok(pf.kappa(imag(t), &p)? - pf.kappa(zero(), q)?)
}

/// Pointwise evaluations of the path in initial-chart coordinates.
struct Path<'a> {
    es: &'a EvolvedStructure,
    pf: &'a PotentialFlow,
    n: usize,
    q0: Vec<f64>,
    w0: Vec<Complex64>,
}

impl<'a> Path<'a> {
    fn new(es: &'a EvolvedStructure, pf: &'a PotentialFlow, q0: &[f64]) -> Result<Self, KahlerError> {
        Ok(Self {
            es,
            pf,
            n: es.complex_dim(),
            q0: q0.to_vec(),
            w0: es.chart(zero(), q0)?,
        })
    }

    fn point(&self, offsets: &[(usize, f64)]) -> Result<Vec<f64>, KahlerError> {
        if offsets.iter().all(|&(_, d)| d == 0.0) {
            return Ok(self.q0.clone());
        }
        let mut w = self.w0.clone();
        for &(a, d) in offsets {
            if a < self.n {
                w[a].re += d;
            } else {
                w[a - self.n].im += d;
            }
        }
        Ok(invert_chart(self.es, zero(), &w, &self.q0, MOSER_OPTIONS)?.point)
    }

    /// `φ_t` at `w0 + offsets`.
    fn phi(&self, t: f64, offsets: &[(usize, f64)]) -> Result<f64, KahlerError> {
        let q = self.point(offsets)?;
        mabuchi_path_value(self.es, self.pf, t, &q)
    }
}

/// Central difference of `t ↦ φ_t(q)` against `−2h(Φ_t⁻¹(q))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VelocityReport {
    pub finite_difference: f64,
    pub expected: f64,
    pub residual: f64,
}

pub fn velocity_check(
    es: &EvolvedStructure,
    pf: &PotentialFlow,
    t: f64,
    q: &[f64],
    dt: f64,
) -> Result<VelocityReport, KahlerError> {
    let fd = (mabuchi_path_value(es, pf, t + dt, q)? - mabuchi_path_value(es, pf, t - dt, q)?)
        / (2.0 * dt);
    let h = CompiledExpr::new(es.system().hamiltonian(), es.coords())?;
    let p = moser_inverse(es, imag(t), q)?;
    let expected = -2.0 * h.eval_real(&p)?.re;
    Ok(VelocityReport {
        finite_difference: fd,
        expected,
        residual: (fd - expected).abs(),
    })
}

/// The two sides of `φ̈ = ½‖∇φ̇‖²` and their difference.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GeodesicReport {
    pub phi_tt: f64,
    pub half_gradient_norm: f64,
    pub residual: f64,
}

/// `W` (with `ω(a, b) = aᵀWb`) and `γ = W J₀` in `(u, v)` coordinates for
/// `ω = i Σ g_{jk̄} dwʲ∧dw̄ᵏ`.
fn real_forms(g: &DMatrix<Complex64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = g.nrows();
    let i = Complex64::i();
    let mut m = DMatrix::<Complex64>::zeros(2 * n, 2 * n);
    let mut b = DMatrix::<Complex64>::zeros(2 * n, 2 * n);
    for j in 0..n {
        for k in 0..n {
            m[(j, n + k)] = i * g[(j, k)];
            m[(n + k, j)] = -i * g[(j, k)];
        }
        b[(j, j)] = Complex64::new(1.0, 0.0);
        b[(j, n + j)] = i;
        b[(n + j, j)] = Complex64::new(1.0, 0.0);
        b[(n + j, n + j)] = -i;
    }
    let w = (b.transpose() * m * &b).map(|v| v.re);
    let mut j0 = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for k in 0..n {
        j0[(n + k, k)] = 1.0;
        j0[(k, n + k)] = -1.0;
    }
    let gamma = &w * j0;
    (w, gamma)
}

/// `φ̈_t(q)` by a second time difference, `∇φ̇_t` with respect to the metric
/// `γ̃` of `ω_t = ω + i∂₀∂̄₀φ_t` and `J₀`, both assembled from central
/// differences of `φ` in `(t, u, v)`.
pub fn geodesic_residual(
    es: &EvolvedStructure,
    pf: &PotentialFlow,
    t: f64,
    q: &[f64],
    dt: f64,
    dx: f64,
) -> Result<GeodesicReport, GeodesicError> {
    if !(dt > 0.0 && dx > 0.0) {
        return Err(GeodesicError::InvalidProbe("steps must be positive".into()));
    }
    let path = Path::new(es, pf, q)?;
    let n = path.n;
    let d = 2 * n;
    let f0 = path.phi(t, &[])?;
    let phi_tt = (path.phi(t + dt, &[])? - 2.0 * f0 + path.phi(t - dt, &[])?) / (dt * dt);

    let mut grad = nalgebra::DVector::<f64>::zeros(d);
    for a in 0..d {
        let plus = path.phi(t + dt, &[(a, dx)])? - path.phi(t - dt, &[(a, dx)])?;
        let minus = path.phi(t + dt, &[(a, -dx)])? - path.phi(t - dt, &[(a, -dx)])?;
        grad[a] = (plus - minus) / (4.0 * dt * dx);
    }

    let mut hess = DMatrix::<f64>::zeros(d, d);
    for a in 0..d {
        hess[(a, a)] = (path.phi(t, &[(a, dx)])? - 2.0 * f0 + path.phi(t, &[(a, -dx)])?) / (dx * dx);
        for b in 0..a {
            let v = (path.phi(t, &[(a, dx), (b, dx)])? - path.phi(t, &[(a, dx), (b, -dx)])?
                - path.phi(t, &[(a, -dx), (b, dx)])?
                + path.phi(t, &[(a, -dx), (b, -dx)])?)
                / (4.0 * dx * dx);
            hess[(a, b)] = v;
            hess[(b, a)] = v;
        }
    }
    let g0 = metric_at(es, zero(), q)?.g;
    let g = DMatrix::from_fn(n, n, |j, k| {
        g0[(j, k)]
            + Complex64::new(
                hess[(j, k)] + hess[(n + j, n + k)],
                hess[(j, n + k)] - hess[(n + j, k)],
            ) * 0.25
    });
    let (_, gamma) = real_forms(&g);
    let sym = (&gamma + gamma.transpose()) * 0.5;
    let lam = sym
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if !(lam > 0.0) {
        return Err(GeodesicError::LeftKahlerRegion { t, eigenvalue: lam });
    }
    let sol = sym
        .cholesky()
        .ok_or(GeodesicError::LeftKahlerRegion { t, eigenvalue: lam })?
        .solve(&grad);
    let half = 0.5 * grad.dot(&sol);
    Ok(GeodesicReport {
        phi_tt,
        half_gradient_norm: half,
        residual: (phi_tt - half).abs(),
    })
}

/// Geodesic residual at steps `(dt, dx)` and `(dt/2, dx/2)` with the observed
/// convergence order `log₂(r₁/r₂)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Refinement {
    pub coarse: GeodesicReport,
    pub fine: GeodesicReport,
    /// `None` when the coarse residual is exactly zero.
    pub order: Option<f64>,
}

pub fn refined_geodesic_residual(
    es: &EvolvedStructure,
    pf: &PotentialFlow,
    t: f64,
    q: &[f64],
    dt: f64,
    dx: f64,
) -> Result<Refinement, GeodesicError> {
    let coarse = geodesic_residual(es, pf, t, q, dt, dx)?;
    let fine = geodesic_residual(es, pf, t, q, dt / 2.0, dx / 2.0)?;
    let order = (coarse.residual > 0.0).then(|| (coarse.residual / fine.residual).log2());
    Ok(Refinement { coarse, fine, order })
}

/// `|‖X_h‖²_γ − ‖dh‖²_γ|` at `p` for `γ = γ_τ`.
pub fn kahler_identity_defect(
    es: &EvolvedStructure,
    tau: Complex64,
    p: &[f64],
) -> Result<f64, KahlerError> {
    let gamma = riemannian_metric_at(es, tau, p)?;
    let gamma = (&gamma + gamma.transpose()) * 0.5;
    let coords = es.coords();
    let x: Vec<f64> = es
        .system()
        .field()
        .components()
        .iter()
        .map(|c| Ok(CompiledExpr::new(c, coords)?.eval_real(p)?.re))
        .collect::<Result<_, KahlerError>>()?;
    let dh: Vec<f64> = coords
        .iter()
        .map(|s| Ok(CompiledExpr::new(&differentiate(es.system().hamiltonian(), s, coords)?, coords)?.eval_real(p)?.re))
        .collect::<Result<_, KahlerError>>()?;
    let x = nalgebra::DVector::from_vec(x);
    let dh = nalgebra::DVector::from_vec(dh);
    let xx = x.dot(&(&gamma * &x));
    let inv = gamma
        .try_inverse()
        .ok_or(KahlerError::Degenerate { rank: 0, dim: p.len() })?;
    let hh = dh.dot(&(inv * &dh));
    Ok((xx - hh).abs())
}

/// Largest entry of the (2,0) part of `ω_τ = (φ_τ⁻¹)*ω` in the initial chart
/// at `q`.
pub fn omega_tau_type_defect(
    es: &EvolvedStructure,
    tau: Complex64,
    q: &[f64],
) -> Result<f64, KahlerError> {
    let p = moser_inverse(es, tau, q)?;
    let d = es.real_dim();
    let n = es.complex_dim();
    let stack = |a: &DMatrix<Complex64>| {
        DMatrix::from_fn(d, d, |r, c| if r < n { a[(r, c)].re } else { a[(r - n, c)].im })
    };
    let l0 = stack(&es.jacobian(zero(), q)?);
    let lt = stack(&es.jacobian(tau, &p)?);
    // Dφ_τ(p) = L₀(q)⁻¹ L_τ(p).
    let dphi = l0
        .clone()
        .try_inverse()
        .ok_or(KahlerError::Degenerate { rank: 0, dim: d })?
        * lt;
    let inv = dphi
        .try_inverse()
        .ok_or(KahlerError::Degenerate { rank: 0, dim: d })?;
    let w_tau = inv.transpose() * es.omega(&p)? * &inv;
    let a0 = es.jacobian(zero(), q)?;
    let b0 = DMatrix::from_fn(d, d, |r, c| if r < n { a0[(r, c)] } else { a0[(r - n, c)].conj() });
    let b0inv = b0
        .try_inverse()
        .ok_or(KahlerError::Degenerate { rank: 0, dim: d })?;
    let m = b0inv.transpose() * w_tau.map(|v| Complex64::new(v, 0.0)) * &b0inv;
    Ok(m.view((0, 0), (n, n)).iter().map(|v| v.norm()).fold(0.0, f64::max))
}

/// A set of imaginary times and points at which the geodesic property is probed.
#[derive(Clone, Debug)]
pub struct GeodesicProbe {
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub dt: f64,
    pub dx: f64,
    /// Base step of the refinement pair used for the convergence order.
    pub refine_step: f64,
}

/// Default base step of the refinement pair. At `1e−3` the truncation error
/// of the quartic model is already at the roundoff floor of `φ̈`.
pub const DEFAULT_REFINE_STEP: f64 = 1e-2;

/// One `(t, q)` probe result.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeodesicRecord {
    pub t: f64,
    pub point: Vec<f64>,
    pub phi: f64,
    pub phidot_residual: f64,
    pub geodesic_residual: f64,
    pub coarse_residual: f64,
    pub refined_residual: f64,
    pub order: Option<f64>,
    pub phi_tt: f64,
    pub half_gradient_norm: f64,
}

impl GeodesicProbe {
    pub fn new(times: Vec<f64>, points: Vec<Vec<f64>>, dt: f64, dx: f64) -> Result<Self, GeodesicError> {
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(GeodesicError::InvalidProbe("t-samples must be strictly increasing".into()));
        }
        if !(dt > 0.0 && dx > 0.0) {
            return Err(GeodesicError::InvalidProbe("steps must be positive".into()));
        }
        Ok(Self {
            times,
            points,
            dt,
            dx,
            refine_step: DEFAULT_REFINE_STEP,
        })
    }

    pub fn with_refine_step(mut self, step: f64) -> Result<Self, GeodesicError> {
        if !(step > 0.0) {
            return Err(GeodesicError::InvalidProbe("steps must be positive".into()));
        }
        self.refine_step = step;
        Ok(self)
    }

    /// Records ordered by time, then by point index.
    pub fn run(&self, es: &EvolvedStructure, pf: &PotentialFlow) -> Result<Vec<GeodesicRecord>, GeodesicError> {
        let jobs: Vec<(f64, &Vec<f64>)> = self
            .times
            .iter()
            .flat_map(|&t| self.points.iter().map(move |p| (t, p)))
            .collect();
        jobs.par_iter()
            .map(|&(t, q)| {
                let phi = mabuchi_path_value(es, pf, t, q)?;
                let vel = velocity_check(es, pf, t, q, self.dt)?;
                let g = geodesic_residual(es, pf, t, q, self.dt, self.dx)?;
                let r = refined_geodesic_residual(es, pf, t, q, self.refine_step, self.refine_step)?;
                Ok(GeodesicRecord {
                    t,
                    point: q.clone(),
                    phi,
                    phidot_residual: vel.residual,
                    geodesic_residual: g.residual,
                    coarse_residual: r.coarse.residual,
                    refined_residual: r.fine.residual,
                    order: r.order,
                    phi_tt: g.phi_tt,
                    half_gradient_norm: g.half_gradient_norm,
                })
            })
            .collect()
    }
}

/// Quadrature of `∫ φ̇_t² ω_tⁿ/n!` over a box in initial-chart coordinates.
/// Informational only: the box is not a compact manifold, so the value is
/// not a Mabuchi norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MabuchiQuadrature {
    pub value: f64,
    pub noncompact_caveat: bool,
}

/// Midpoint rule over the given points with uniform cell volume `cell`.
pub fn mabuchi_energy(
    es: &EvolvedStructure,
    pf: &PotentialFlow,
    t: f64,
    points: &[Vec<f64>],
    cell: f64,
    dt: f64,
) -> Result<MabuchiQuadrature, GeodesicError> {
    let terms: Vec<Result<f64, GeodesicError>> = points
        .par_iter()
        .map(|q| {
            let vel = velocity_check(es, pf, t, q, dt)?.finite_difference;
            let p = moser_inverse(es, imag(t), q)?;
            // ω_t = (φ_τ⁻¹)*ω; its volume density in q equals that of ω at p
            // times |det Dφ_τ⁻¹|.
            let d = es.real_dim();
            let n = es.complex_dim();
            let stack = |a: &DMatrix<Complex64>| {
                DMatrix::from_fn(d, d, |r, c| if r < n { a[(r, c)].re } else { a[(r - n, c)].im })
            };
            let l0 = stack(&es.jacobian(zero(), q)?);
            let lt = stack(&es.jacobian(imag(t), &p)?);
            let jac = l0.determinant() / lt.determinant();
            let vol = es.omega(&p)?.determinant().abs().sqrt() * jac.abs();
            Ok(vel * vel * vol * cell)
        })
        .collect();
    let mut value = 0.0;
    for t in terms {
        value += t?;
    }
    Ok(MabuchiQuadrature {
        value,
        noncompact_caveat: true,
    })
}

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::chart::{invert_chart, ChartMap, EvolvedStructure, NewtonOptions};
use super::metric::{classify, metric_at, PolarizationKind};
use super::system::HamSystem;
use super::KahlerError;
use crate::lieseries::{lie_exp, CompiledSeries, SeriesVar, TauSeries};
use crate::symcore::{CompiledExpr, Expr, Symbol};

/// `α_τ = Σ_{k≥1} τᵏ/k! X_h^{k−1}(θ(X_h))`, truncated at `order`.
pub fn alpha_series(sys: &HamSystem, order: usize) -> TauSeries {
    let x = sys.field();
    let mut coeffs = vec![Expr::zero()];
    let mut c = sys.theta_of_field();
    for k in 1..=order {
        if k > 1 && !c.is_zero() {
            c = (x.apply(&c) * Expr::ratio(1, k as i64)).normalize();
        }
        coeffs.push(c.clone());
    }
    TauSeries::new(SeriesVar::Tau, coeffs)
}

/// Series data for `ψ_τ = −(i/2) e^{τX_h}·κ₀ + τh − α_τ` and `κ_τ = −2 Im ψ_τ`.
#[derive(Clone, Debug)]
pub struct PotentialFlow {
    sys: HamSystem,
    order: usize,
    kappa: TauSeries,
    alpha: TauSeries,
    psi: TauSeries,
    psi_c: CompiledSeries,
    dpsi_c: Vec<CompiledSeries>,
    xpsi_c: CompiledSeries,
    flow_c: Vec<CompiledSeries>,
    h_c: CompiledExpr,
    theta_x_c: CompiledExpr,
}

impl PotentialFlow {
    pub fn new(sys: &HamSystem, order: usize) -> Result<Self, KahlerError> {
        let coords = sys.coords().to_vec();
        let x = sys.field();
        let kappa = lie_exp(x, sys.kappa0(), order);
        let alpha = alpha_series(sys, order);
        let half_i = Expr::complex(0.0, -0.5);
        let psi = TauSeries::new(
            SeriesVar::Tau,
            (0..=order)
                .map(|k| {
                    let mut c = &half_i * kappa.coefficient(k) - alpha.coefficient(k);
                    if k == 1 {
                        c = c + sys.hamiltonian();
                    }
                    c
                })
                .collect(),
        );
        let xpsi = psi.map(|c| x.apply(c));
        let flow: Vec<TauSeries> = coords
            .iter()
            .map(|s| lie_exp(x, &Expr::symbol(s), order))
            .collect();
        Ok(Self {
            psi_c: psi.compile(&coords)?,
            dpsi_c: coords
                .iter()
                .map(|c| psi.map(|e| e.diff(c)).compile(&coords))
                .collect::<Result<_, _>>()?,
            xpsi_c: xpsi.compile(&coords)?,
            flow_c: flow
                .iter()
                .map(|f| f.compile(&coords))
                .collect::<Result<_, _>>()?,
            h_c: CompiledExpr::new(sys.hamiltonian(), &coords)?,
            theta_x_c: CompiledExpr::new(&sys.theta_of_field(), &coords)?,
            sys: sys.clone(),
            order,
            kappa,
            alpha,
            psi,
        })
    }

    pub fn system(&self) -> &HamSystem {
        &self.sys
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `e^{τX_h}·κ₀`.
    pub fn kappa_series(&self) -> &TauSeries {
        &self.kappa
    }

    pub fn alpha(&self) -> &TauSeries {
        &self.alpha
    }

    pub fn psi_series(&self) -> &TauSeries {
        &self.psi
    }

    pub fn psi(&self, tau: Complex64, p: &[f64]) -> Result<Complex64, KahlerError> {
        Ok(self.psi_c.eval_real(tau, p)?)
    }

    pub fn kappa(&self, tau: Complex64, p: &[f64]) -> Result<f64, KahlerError> {
        Ok(-2.0 * self.psi(tau, p)?.im)
    }

    /// `∂κ_τ/∂xʲ` from the differentiated series.
    pub fn kappa_gradient(&self, tau: Complex64, p: &[f64]) -> Result<Vec<f64>, KahlerError> {
        self.dpsi_c
            .iter()
            .map(|d| Ok(-2.0 * d.eval_real(tau, p)?.im))
            .collect()
    }

    /// Real-time flow `φ_s(p)` from the coordinate series at real `s`.
    pub fn real_flow(&self, s: f64, p: &[f64]) -> Result<Vec<f64>, KahlerError> {
        let s = Complex64::new(s, 0.0);
        self.flow_c
            .iter()
            .map(|f| Ok(f.eval_real(s, p)?.re))
            .collect()
    }

    /// `κ_τ` as an expression in the coordinates and the real symbols
    /// `tau_re`, `tau_im`, with `τ = tau_re + i·tau_im`.
    pub fn kappa_expr(&self) -> Result<Expr, KahlerError> {
        let (re, im) = self.tau_symbols()?;
        let tau = Expr::symbol(&re) + Expr::i() * Expr::symbol(&im);
        Ok((self.psi.to_expr(&tau).im() * Expr::int(-2)).normalize())
    }

    fn tau_symbols(&self) -> Result<(Symbol, Symbol), KahlerError> {
        let names = [Symbol::new("tau_re"), Symbol::new("tau_im"), Symbol::new("s")];
        if let Some(c) = self.sys.coords().iter().find(|c| names.contains(c)) {
            return Err(KahlerError::Invalid(format!(
                "coordinate name '{}' is reserved for symbolic flow times",
                c.name()
            )));
        }
        let [re, im, _] = names;
        Ok((re, im))
    }
}

pub fn kahler_potential(pf: &PotentialFlow, tau: Complex64, p: &[f64]) -> Result<f64, KahlerError> {
    pf.kappa(tau, p)
}

/// Outcome of comparing `g_{jk̄}` with the complex Hessian of `κ_τ`.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialCheck {
    pub max_residual: f64,
    pub checked: usize,
    /// Indices of points that were not Kähler or where the chart could not
    /// be inverted.
    pub skipped: Vec<usize>,
}

/// Checks `ω = i ∂_τ ∂̄_τ κ_τ` at each point: the complex Hessian of
/// `κ_τ ∘ z_τ⁻¹` in the coordinates `w = z_τ` is taken by central finite
/// differences with the given step and compared with `g_{jk̄}`.
///
/// The differences are taken of the gradient `(∂x/∂w)ᵀ ∇κ_τ`, with `∇κ_τ`
/// from the differentiated series, so rounding enters as `ε/h` rather than
/// `ε/h²`.
pub fn verify_potential(
    es: &EvolvedStructure,
    pf: &PotentialFlow,
    tau: Complex64,
    points: &[Vec<f64>],
    step: f64,
) -> Result<PotentialCheck, KahlerError> {
    if !(step > 0.0) {
        return Err(KahlerError::Invalid("finite-difference step must be positive".into()));
    }
    let results: Vec<Result<Option<f64>, KahlerError>> = points
        .par_iter()
        .map(|p| potential_residual(es, pf, tau, p, step))
        .collect();
    let mut out = PotentialCheck {
        max_residual: 0.0,
        checked: 0,
        skipped: Vec::new(),
    };
    for (i, r) in results.into_iter().enumerate() {
        match r? {
            Some(v) => {
                out.checked += 1;
                out.max_residual = out.max_residual.max(v);
            }
            None => out.skipped.push(i),
        }
    }
    Ok(out)
}

fn potential_residual(
    es: &EvolvedStructure,
    pf: &PotentialFlow,
    tau: Complex64,
    p: &[f64],
    step: f64,
) -> Result<Option<f64>, KahlerError> {
    match classify(es, tau, p) {
        Ok(c) if c.kind == PolarizationKind::Kahler => {}
        Ok(_) => return Ok(None),
        Err(e) => return Err(e),
    }
    let g = metric_at(es, tau, p)?.g;
    let n = es.complex_dim();
    let d = 2 * n;
    let w0 = es.chart(tau, p)?;
    let opts = NewtonOptions {
        max_iterations: 50,
        tolerance: 1e-12,
    };
    // Gradient of κ_τ ∘ z_τ⁻¹ with respect to (Re w, Im w) at w0 shifted by
    // `d` along real direction `a`.
    let grad = |a: usize, delta: f64| -> Result<Option<Vec<f64>>, KahlerError> {
        let mut w = w0.clone();
        if a < n {
            w[a].re += delta;
        } else {
            w[a - n].im += delta;
        }
        let q = match invert_chart(es, tau, &w, p, opts) {
            Ok(sol) => sol.point,
            Err(KahlerError::NewtonFailed { .. }) | Err(KahlerError::Degenerate { .. }) => {
                return Ok(None)
            }
            Err(e) => return Err(e),
        };
        let jac = es.jacobian(tau, &q)?;
        let real = DMatrix::from_fn(d, d, |r, c| {
            if r < n {
                jac[(r, c)].re
            } else {
                jac[(r - n, c)].im
            }
        });
        let gk = nalgebra::DVector::from_vec(pf.kappa_gradient(tau, &q)?);
        Ok(real
            .transpose()
            .lu()
            .solve(&gk)
            .map(|v| v.iter().copied().collect()))
    };
    let mut hess = DMatrix::<f64>::zeros(d, d);
    for a in 0..d {
        let (Some(gp), Some(gm)) = (grad(a, step)?, grad(a, -step)?) else {
            return Ok(None);
        };
        for b in 0..d {
            hess[(b, a)] = (gp[b] - gm[b]) / (2.0 * step);
        }
    }
    let hess = (&hess + hess.transpose()) * 0.5;
    let mut res: f64 = 0.0;
    for j in 0..n {
        for k in 0..n {
            let h = Complex64::new(
                hess[(j, k)] + hess[(n + j, n + k)],
                hess[(j, n + k)] - hess[(n + j, k)],
            ) * 0.25;
            res = res.max((g[(j, k)] - h).norm());
        }
    }
    Ok(Some(res))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CocycleReport {
    /// max |κ_{τ+s}(p) − κ_τ(φ_s(p))|.
    pub max_deviation: f64,
    pub checked: usize,
}

/// Compares `κ_{τ+s}` with `κ_τ` composed with the real-time flow `φ_s`.
pub fn real_time_cocycle_check(
    pf: &PotentialFlow,
    tau: Complex64,
    s: f64,
    points: &[Vec<f64>],
) -> Result<CocycleReport, KahlerError> {
    let shifted = tau + s;
    let devs: Vec<Result<f64, KahlerError>> = points
        .par_iter()
        .map(|p| {
            let lhs = pf.kappa(shifted, p)?;
            let q = pf.real_flow(s, p)?;
            let rhs = pf.kappa(tau, &q)?;
            Ok((lhs - rhs).abs())
        })
        .collect();
    let mut out = CocycleReport {
        max_deviation: 0.0,
        checked: 0,
    };
    for d in devs {
        out.max_deviation = out.max_deviation.max(d?);
        out.checked += 1;
    }
    Ok(out)
}

/// `κ_{τ+s} − κ_τ ∘ φ_s` as a normalized expression in the coordinates and
/// the real symbols `tau_re`, `tau_im`, `s`. It is exactly zero when every
/// series involved terminates within the truncation order.
pub fn real_time_cocycle_symbolic(pf: &PotentialFlow) -> Result<Expr, KahlerError> {
    let (re, im) = pf.tau_symbols()?;
    let s = Expr::sym("s");
    let tau = Expr::symbol(&re) + Expr::i() * Expr::symbol(&im);
    let lhs = pf.psi.to_expr(&(&tau + &s)).im() * Expr::int(-2);
    let x = pf.sys.field();
    let bindings: BTreeMap<Symbol, Expr> = pf
        .sys
        .coords()
        .iter()
        .map(|c| (c.clone(), lie_exp(x, &Expr::symbol(c), pf.order).to_expr(&s)))
        .collect();
    let rhs = pf.kappa_expr()?.subs(&bindings);
    Ok((lhs - rhs).normalize())
}

/// `e^{iψ_τ(p)}`.
pub fn prequantum_evolution(
    pf: &PotentialFlow,
    tau: Complex64,
    p: &[f64],
) -> Result<Complex64, KahlerError> {
    Ok((Complex64::i() * pf.psi(tau, p)?).exp())
}

/// Finite-difference check of the real-time evolution of `F_t = e^{iψ_t}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrequantumCheck {
    /// |dF/dt + i ĥ F| with `ĥ = iX_h − h + θ(X_h)`, the operator that
    /// `ψ_t` actually satisfies.
    pub residual: f64,
    /// The same with `ĥ = iX_h + h − θ(X_h)`.
    pub literal_residual: f64,
}

/// Compares the central difference of `t ↦ e^{iψ_t(p)}` at real `t` with the
/// prequantum operator applied to the section, where `X_h(F) = i X_h(ψ_t) F`.
pub fn prequantum_ode_check(
    pf: &PotentialFlow,
    t: f64,
    p: &[f64],
    step: f64,
) -> Result<PrequantumCheck, KahlerError> {
    let at = |s: f64| prequantum_evolution(pf, Complex64::new(s, 0.0), p);
    let deriv = (at(t + step)? - at(t - step)?) / (2.0 * step);
    let tc = Complex64::new(t, 0.0);
    let f = at(t)?;
    let xf = Complex64::i() * pf.xpsi_c.eval_real(tc, p)? * f;
    let h = pf.h_c.eval_real(p)?.re;
    let thx = pf.theta_x_c.eval_real(p)?.re;
    let i = Complex64::i();
    let hat = i * xf + (thx - h) * f;
    let literal = i * xf + (h - thx) * f;
    Ok(PrequantumCheck {
        residual: (deriv + i * hat).norm(),
        literal_residual: (deriv + i * literal).norm(),
    })
}

//! Built-in Hamiltonian systems with closed-form reference values.
//!
//! * [`LinearModel`]: the plane with `z = x + τ₀y` and `h = y²/2`.
//! * [`QuarticModel`]: the plane with `z = x + iy` and `h = (xy)²/2`.
//! * [`SeparableModel`]: `h = h(y)` with a possibly non-analytic profile.
//! * [`TStarK`]: cotangent bundles of the torus and of SU(2) with an
//!   invariant Hamiltonian.

mod separable;
mod tstark;

use num_complex::Complex64;

use crate::kahler::{HamSystem, KahlerError};
use crate::lieseries::SymplecticForm;
use crate::symcore::{Expr, Symbol};

pub use separable::{Profile, SeparableModel};
pub use tstark::{CMat, Group, InvariantHamiltonian, Representation, TStarK, TStarKChart, TStarKPoint};

/// Names accepted by [`ModelName::parse`].
pub const MODEL_NAMES: [&str; 5] = ["linear", "quartic", "separable", "tstark-torus", "tstark-su2"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelName {
    Linear,
    Quartic,
    Separable,
    TStarKTorus,
    TStarKSu2,
}

impl ModelName {
    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "linear" => ModelName::Linear,
            "quartic" => ModelName::Quartic,
            "separable" => ModelName::Separable,
            "tstark-torus" => ModelName::TStarKTorus,
            "tstark-su2" => ModelName::TStarKSu2,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelName::Linear => "linear",
            ModelName::Quartic => "quartic",
            ModelName::Separable => "separable",
            ModelName::TStarKTorus => "tstark-torus",
            ModelName::TStarKSu2 => "tstark-su2",
        }
    }
}

fn plane() -> SymplecticForm {
    SymplecticForm::canonical(vec![Symbol::new("x"), Symbol::new("y")])
        .expect("two coordinates form a canonical pair")
}

/// `θ = (y dx − x dy)/2`.
fn rotation_potential() -> Vec<Expr> {
    vec![Expr::sym("y") * Expr::ratio(1, 2), Expr::sym("x") * Expr::ratio(-1, 2)]
}

/// The plane with initial chart `z = x + τ₀y` (`Im τ₀ > 0`), `h = y²/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearModel {
    tau0: Complex64,
}

impl LinearModel {
    pub fn new(tau0: Complex64) -> Result<Self, KahlerError> {
        if !(tau0.im > 0.0 && tau0.re.is_finite() && tau0.im.is_finite()) {
            return Err(KahlerError::Invalid(
                "linear model needs Im(tau0) > 0".into(),
            ));
        }
        Ok(Self { tau0 })
    }

    pub fn tau0(&self) -> Complex64 {
        self.tau0
    }

    /// `κ₀ = ((x + r₀y)² + s₀²y²)/(2s₀)`.
    pub fn system(&self, domain: Vec<(f64, f64)>) -> Result<HamSystem, KahlerError> {
        let (r0, s0) = (self.tau0.re, self.tau0.im);
        let x = Expr::sym("x");
        let y = Expr::sym("y");
        let z = &x + Expr::complex(r0, s0) * &y;
        let shifted = &x + Expr::real(r0) * &y;
        let kappa0 = (shifted.powi(2) + Expr::real(s0 * s0) * y.powi(2)) * Expr::real(0.5 / s0);
        HamSystem::new(
            "linear",
            plane(),
            y.powi(2) * Expr::ratio(1, 2),
            rotation_potential(),
            vec![z],
            kappa0,
            domain,
        )
    }

    pub fn chart(&self, tau: Complex64, x: f64, y: f64) -> Complex64 {
        x + (self.tau0 + tau) * y
    }

    /// `g = 1/(2(s₀ + s))`.
    pub fn metric(&self, tau: Complex64) -> f64 {
        0.5 / (self.tau0.im + tau.im)
    }

    /// Coefficients of `γ_τ` as a symmetric matrix in `(dx, dy)`.
    pub fn riemannian_metric(&self, tau: Complex64) -> [[f64; 2]; 2] {
        let r = self.tau0.re + tau.re;
        let s = self.tau0.im + tau.im;
        [[1.0 / s, r / s], [r / s, (s * s + r * r) / s]]
    }

    /// `κ_τ = ((x + (r₀+r)y)² + (s₀² − s²)y²)/(2s₀)`.
    pub fn kappa(&self, tau: Complex64, x: f64, y: f64) -> f64 {
        let (r0, s0) = (self.tau0.re, self.tau0.im);
        let u = x + (r0 + tau.re) * y;
        (u * u + (s0 * s0 - tau.im * tau.im) * y * y) / (2.0 * s0)
    }

    /// `φ_τ = z₀⁻¹ ∘ z_τ`, a linear map.
    pub fn phi(&self, tau: Complex64, x: f64, y: f64) -> [f64; 2] {
        let (r0, s0) = (self.tau0.re, self.tau0.im);
        let w = self.chart(tau, x, y);
        let yy = w.im / s0;
        [w.re - r0 * yy, yy]
    }
}

/// The plane with `z = x + iy`, `h = (xy)²/2`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QuarticModel;

impl QuarticModel {
    pub fn system(&self, domain: Vec<(f64, f64)>) -> Result<HamSystem, KahlerError> {
        let x = Expr::sym("x");
        let y = Expr::sym("y");
        HamSystem::new(
            "quartic",
            plane(),
            (&x * &y).powi(2) * Expr::ratio(1, 2),
            rotation_potential(),
            vec![&x + Expr::i() * &y],
            (x.powi(2) + y.powi(2)) * Expr::ratio(1, 2),
            domain,
        )
    }

    /// `z_{it} = e^{itxy}x + i e^{−itxy}y`.
    pub fn chart_it(&self, t: f64, x: f64, y: f64) -> Complex64 {
        let ph = Complex64::new(0.0, t * x * y).exp();
        ph * x + Complex64::i() * y / ph
    }

    /// `1/g_{it} = 2t(x² + y² − 2xy sin(2txy)) + 2cos(2txy)`.
    pub fn inv_metric_it(&self, t: f64, x: f64, y: f64) -> f64 {
        let a = 2.0 * t * x * y;
        2.0 * t * (x * x + y * y - 2.0 * x * y * a.sin()) + 2.0 * a.cos()
    }

    /// `κ_{it} = ½cos(2txy)(x² + y²) + t x²y²`.
    pub fn kappa_it(&self, t: f64, x: f64, y: f64) -> f64 {
        0.5 * (2.0 * t * x * y).cos() * (x * x + y * y) + t * x * x * y * y
    }

    /// `∂z_{it}/∂x` and `∂z_{it}/∂y` from the closed form.
    pub fn chart_it_gradient(&self, t: f64, x: f64, y: f64) -> [Complex64; 2] {
        let i = Complex64::i();
        let ph = Complex64::new(0.0, t * x * y).exp();
        let dx = ph * (1.0 + i * t * x * y) + i * y * (-i * t * y) / ph;
        let dy = ph * (i * t * x * x) + i * (1.0 - i * t * x * y) / ph;
        [dx, dy]
    }
}

/// Default square domain `[-1, 1]^{d}`.
pub fn unit_box(d: usize) -> Vec<(f64, f64)> {
    vec![(-1.0, 1.0); d]
}

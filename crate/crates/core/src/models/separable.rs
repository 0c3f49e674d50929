use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::kahler::{ChartMap, KahlerError};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// One-variable profile `f` with `h(y) = Σ_j f(y_j)`; only `f′` and `f″`
/// enter the chart.
#[derive(Clone)]
pub enum Profile {
    /// `f = y²/2`.
    Quadratic,
    /// `f′(y) = y(1 + e^{−1/y²})`: smooth, strictly convex and not analytic at 0.
    Flat,
    Custom {
        name: String,
        derivative: ScalarFn,
        second_derivative: ScalarFn,
    },
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Quadratic => f.write_str("Quadratic"),
            Profile::Flat => f.write_str("Flat"),
            Profile::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

fn flat_bump(y: f64) -> f64 {
    if y == 0.0 {
        0.0
    } else {
        (-1.0 / (y * y)).exp()
    }
}

impl Profile {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "quadratic" => Some(Profile::Quadratic),
            "flat" => Some(Profile::Flat),
            _ => None,
        }
    }

    pub fn derivative(&self, y: f64) -> f64 {
        match self {
            Profile::Quadratic => y,
            Profile::Flat => y * (1.0 + flat_bump(y)),
            Profile::Custom { derivative, .. } => derivative(y),
        }
    }

    pub fn second_derivative(&self, y: f64) -> f64 {
        match self {
            Profile::Quadratic => 1.0,
            Profile::Flat => {
                if y == 0.0 {
                    1.0
                } else {
                    1.0 + flat_bump(y) * (1.0 + 2.0 / (y * y))
                }
            }
            Profile::Custom {
                second_derivative, ..
            } => second_derivative(y),
        }
    }
}

/// `ℝ^{2n}` with `ω = Σ dxʲ∧dyʲ`, `z = x + iy` and `h = Σ f(yʲ)`. The Lie
/// series of `z` stops after the linear term, so the chart is evaluated
/// directly: `z_τ = x + τ f′(y) + iy`. Points are ordered `(x¹, y¹, x², …)`.
#[derive(Clone, Debug)]
pub struct SeparableModel {
    n: usize,
    profile: Profile,
}

impl SeparableModel {
    pub fn new(n: usize, profile: Profile) -> Result<Self, KahlerError> {
        if n == 0 {
            return Err(KahlerError::Invalid("separable model needs n >= 1".into()));
        }
        Ok(Self { n, profile })
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    /// `φ_τ(x, y) = (x + r f′(y), y + s f′(y))`.
    pub fn phi(&self, tau: Complex64, p: &[f64]) -> Vec<f64> {
        let mut out = p.to_vec();
        for j in 0..self.n {
            let d = self.profile.derivative(p[2 * j + 1]);
            out[2 * j] += tau.re * d;
            out[2 * j + 1] += tau.im * d;
        }
        out
    }

    /// `Π_j (1 + s f″(yʲ))`, the Jacobian determinant of `φ_τ`.
    pub fn jacobian_det(&self, tau: Complex64, p: &[f64]) -> f64 {
        (0..self.n)
            .map(|j| 1.0 + tau.im * self.profile.second_derivative(p[2 * j + 1]))
            .product()
    }

    /// `φ_τ` is a local diffeomorphism at `p`.
    pub fn is_diffeomorphic_at(&self, tau: Complex64, p: &[f64]) -> bool {
        self.jacobian_det(tau, p) > 0.0
    }

    /// `g_{jj̄} = 1/(2(1 + s f″(yʲ)))`, diagonal.
    pub fn metric_diagonal(&self, tau: Complex64, p: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|j| 0.5 / (1.0 + tau.im * self.profile.second_derivative(p[2 * j + 1])))
            .collect()
    }
}

impl ChartMap for SeparableModel {
    fn real_dim(&self) -> usize {
        2 * self.n
    }

    fn chart(&self, tau: Complex64, p: &[f64]) -> Result<Vec<Complex64>, KahlerError> {
        check_len(p, 2 * self.n)?;
        Ok((0..self.n)
            .map(|j| {
                let (x, y) = (p[2 * j], p[2 * j + 1]);
                x + tau * self.profile.derivative(y) + Complex64::new(0.0, y)
            })
            .collect())
    }

    fn jacobian(&self, tau: Complex64, p: &[f64]) -> Result<DMatrix<Complex64>, KahlerError> {
        check_len(p, 2 * self.n)?;
        let mut a = DMatrix::zeros(self.n, 2 * self.n);
        for j in 0..self.n {
            a[(j, 2 * j)] = Complex64::new(1.0, 0.0);
            a[(j, 2 * j + 1)] =
                tau * self.profile.second_derivative(p[2 * j + 1]) + Complex64::i();
        }
        Ok(a)
    }

    fn omega(&self, p: &[f64]) -> Result<DMatrix<f64>, KahlerError> {
        check_len(p, 2 * self.n)?;
        let mut w = DMatrix::zeros(2 * self.n, 2 * self.n);
        for j in 0..self.n {
            w[(2 * j, 2 * j + 1)] = 1.0;
            w[(2 * j + 1, 2 * j)] = -1.0;
        }
        Ok(w)
    }
}

fn check_len(p: &[f64], d: usize) -> Result<(), KahlerError> {
    if p.len() != d {
        return Err(KahlerError::Invalid(format!(
            "point has {} coordinates, model has {d}",
            p.len()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kahler::{classify, metric_at, PolarizationKind};

    #[test]
    fn quadratic_chart_specializes() {
        let m = SeparableModel::new(1, Profile::Quadratic).unwrap();
        let tau = Complex64::new(0.3, 0.2);
        let z = m.chart(tau, &[0.5, 2.0]).unwrap()[0];
        assert!((z - Complex64::new(0.5 + 0.3 * 2.0, 1.2 * 2.0)).norm() < 1e-15);
        assert_eq!(m.chart(Complex64::new(0.0, 0.0), &[0.5, 2.0]).unwrap()[0], Complex64::new(0.5, 2.0));
    }

    #[test]
    fn flat_profile_derivatives_agree_with_differences() {
        let p = Profile::Flat;
        for y in [-1.3, -0.4, 0.2, 0.7, 2.0] {
            let h = 1e-5;
            let fd = (p.derivative(y + h) - p.derivative(y - h)) / (2.0 * h);
            assert!((fd - p.second_derivative(y)).abs() < 1e-8, "y={y}");
        }
        assert_eq!(p.second_derivative(0.0), 1.0);
    }

    #[test]
    fn convex_profiles_are_diffeomorphic_for_nonnegative_s() {
        let m = SeparableModel::new(2, Profile::Flat).unwrap();
        for s in [0.0, 0.5, 3.0] {
            let tau = Complex64::new(-0.7, s);
            assert!(m.is_diffeomorphic_at(tau, &[0.1, 0.9, -0.3, -0.2]));
        }
    }

    #[test]
    fn metric_and_class_follow_jacobian_sign() {
        let m = SeparableModel::new(1, Profile::Quadratic).unwrap();
        let p = [0.2, 0.4];
        let g = metric_at(&m, Complex64::new(0.1, 0.5), &p).unwrap().g[(0, 0)];
        assert!((g.re - 0.5 / 1.5).abs() < 1e-14 && g.im.abs() < 1e-14);
        let kind = |s: f64| classify(&m, Complex64::new(0.1, s), &p).unwrap().kind;
        assert_eq!(kind(0.5), PolarizationKind::Kahler);
        assert_eq!(kind(-1.0), PolarizationKind::Real);
        assert_eq!(kind(-1.5), PolarizationKind::PseudoKahler);
    }
}

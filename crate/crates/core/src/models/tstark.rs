use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::kahler::{ChartMap, HamSystem, KahlerError};
use crate::lieseries::SymplecticForm;
use crate::symcore::{Expr, Symbol};

pub type CMat = DMatrix<Complex64>;

const fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Compact group for the cotangent-bundle model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Group {
    /// `U(1)ⁿ`, Lie algebra basis `E_k = i e_k e_kᵀ`.
    Torus(usize),
    /// `SU(2)`, Lie algebra basis `E_k = (i/2) σ_k`.
    Su2,
}

impl Group {
    /// Dimension of the group, i.e. the number of `y` coordinates.
    pub fn dim(self) -> usize {
        match self {
            Group::Torus(n) => n,
            Group::Su2 => 3,
        }
    }

    /// Size of the defining matrices.
    pub fn matrix_size(self) -> usize {
        match self {
            Group::Torus(n) => n,
            Group::Su2 => 2,
        }
    }

    /// Lie algebra basis in the defining representation.
    pub fn basis(self) -> Vec<CMat> {
        match self {
            Group::Torus(n) => (0..n)
                .map(|k| {
                    let mut m = CMat::zeros(n, n);
                    m[(k, k)] = c(0.0, 1.0);
                    m
                })
                .collect(),
            Group::Su2 => {
                let h = 0.5;
                vec![
                    CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, h), c(0.0, h), c(0.0, 0.0)]),
                    CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(h, 0.0), c(-h, 0.0), c(0.0, 0.0)]),
                    CMat::from_row_slice(2, 2, &[c(0.0, h), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -h)]),
                ]
            }
        }
    }

    /// Structure constants `[E_j, E_k] = Σ_l c_{jk}^l E_l`.
    pub fn structure_constant(self, j: usize, k: usize, l: usize) -> f64 {
        match self {
            Group::Torus(_) => 0.0,
            Group::Su2 => -levi_civita(j, k, l),
        }
    }

    /// `Σ_k a_k E_k` in the defining representation.
    pub fn algebra_element(self, coeffs: &[Complex64]) -> CMat {
        let n = self.matrix_size();
        self.basis()
            .iter()
            .zip(coeffs)
            .fold(CMat::zeros(n, n), |acc, (e, &a)| acc + e * a)
    }
}

fn levi_civita(j: usize, k: usize, l: usize) -> f64 {
    match (j, k, l) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// `h(Y) = a|Y|²/2 + b|Y|⁴/4`, invariant under the adjoint action; strictly
/// convex for `a > 0`, `b ≥ 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvariantHamiltonian {
    pub a: f64,
    pub b: f64,
}

impl Default for InvariantHamiltonian {
    fn default() -> Self {
        Self { a: 1.0, b: 0.0 }
    }
}

impl InvariantHamiltonian {
    pub fn value(&self, y: &[f64]) -> f64 {
        let r2: f64 = y.iter().map(|v| v * v).sum();
        self.a * r2 / 2.0 + self.b * r2 * r2 / 4.0
    }

    /// `u(Y) = ∂h/∂y = (a + b|Y|²) Y`.
    pub fn gradient(&self, y: &[f64]) -> Vec<f64> {
        let r2: f64 = y.iter().map(|v| v * v).sum();
        y.iter().map(|v| (self.a + self.b * r2) * v).collect()
    }

    pub fn hessian(&self, y: &[f64]) -> DMatrix<f64> {
        let n = y.len();
        let r2: f64 = y.iter().map(|v| v * v).sum();
        DMatrix::from_fn(n, n, |i, j| {
            let d = if i == j { self.a + self.b * r2 } else { 0.0 };
            d + 2.0 * self.b * y[i] * y[j]
        })
    }

    /// Symbolic `h` in the given `y` symbols.
    pub fn expr(&self, ys: &[Expr]) -> Expr {
        let r2 = Expr::sum(ys.iter().map(|y| y.powi(2)));
        Expr::real(self.a / 2.0) * &r2 + Expr::real(self.b / 4.0) * r2.powi(2)
    }

    /// Symbolic `u_k`.
    pub fn gradient_expr(&self, ys: &[Expr]) -> Vec<Expr> {
        let r2 = Expr::sum(ys.iter().map(|y| y.powi(2)));
        let f = Expr::real(self.a) + Expr::real(self.b) * r2;
        ys.iter().map(|y| &f * y).collect()
    }
}

/// Finite-dimensional representation used in `tr(E π(·))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    Defining,
    /// Spin `j = m/2` representation of SU(2), realized on homogeneous
    /// polynomials of degree `m` in two variables.
    Spin(u32),
}

/// A point of `T*K ≅ K × Lie(K)`: group element `x` (defining matrix) and
/// Lie algebra coordinates `y` in the basis of [`Group::basis`].
#[derive(Clone, Debug, PartialEq)]
pub struct TStarKPoint {
    pub x: CMat,
    pub y: Vec<f64>,
}

impl TStarKPoint {
    /// Checks that `x` is unitary to `1e−12` and the shapes agree.
    pub fn new(group: Group, x: CMat, y: Vec<f64>) -> Result<Self, KahlerError> {
        let n = group.matrix_size();
        if x.shape() != (n, n) || y.len() != group.dim() {
            return Err(KahlerError::Invalid("point shape does not match the group".into()));
        }
        let defect = (x.adjoint() * &x - CMat::identity(n, n))
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        if defect > 1e-12 {
            return Err(KahlerError::Invalid(format!(
                "group element is not unitary (defect {defect:e})"
            )));
        }
        Ok(Self { x, y })
    }

    /// `x = exp(Σ a_k E_k)`.
    pub fn from_exponential(group: Group, a: &[f64], y: Vec<f64>) -> Result<Self, KahlerError> {
        let coeffs: Vec<Complex64> = a.iter().map(|&v| c(v, 0.0)).collect();
        Self::new(group, group.algebra_element(&coeffs).exp(), y)
    }
}

/// The cotangent bundle of a torus or of SU(2) with an invariant Hamiltonian.
#[derive(Clone, Debug, PartialEq)]
pub struct TStarK {
    group: Group,
    h: InvariantHamiltonian,
    rep: Representation,
}

impl TStarK {
    pub fn new(group: Group, h: InvariantHamiltonian, rep: Representation) -> Result<Self, KahlerError> {
        if !(h.a > 0.0 && h.b >= 0.0) {
            return Err(KahlerError::Invalid(
                "invariant Hamiltonian needs a > 0 and b >= 0".into(),
            ));
        }
        match (group, rep) {
            (Group::Torus(0), _) => {
                return Err(KahlerError::Invalid("torus needs dimension >= 1".into()))
            }
            (Group::Torus(_), Representation::Spin(_)) => {
                return Err(KahlerError::Invalid(
                    "spin representations are defined for SU(2) only".into(),
                ))
            }
            (Group::Su2, Representation::Spin(0)) => {
                return Err(KahlerError::Invalid("spin representation needs m >= 1".into()))
            }
            _ => {}
        }
        Ok(Self { group, h, rep })
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn hamiltonian(&self) -> &InvariantHamiltonian {
        &self.h
    }

    pub fn representation(&self) -> Representation {
        self.rep
    }

    /// Dimension of the representation space.
    pub fn rep_dim(&self) -> usize {
        match self.rep {
            Representation::Defining => self.group.matrix_size(),
            Representation::Spin(m) => m as usize + 1,
        }
    }

    /// `π(g)` for `g` in the complexified group (defining matrix).
    pub fn rep_group(&self, g: &CMat) -> CMat {
        match self.rep {
            Representation::Defining => g.clone(),
            Representation::Spin(m) => sym_power_group(g, m as usize),
        }
    }

    /// `π(U)` for `U` in the complexified Lie algebra (defining matrix).
    pub fn rep_algebra(&self, u: &CMat) -> CMat {
        match self.rep {
            Representation::Defining => u.clone(),
            Representation::Spin(m) => sym_power_algebra(u, m as usize),
        }
    }

    fn u_matrix(&self, y: &[f64]) -> CMat {
        let u: Vec<Complex64> = self.h.gradient(y).iter().map(|&v| c(v, 0.0)).collect();
        self.group.algebra_element(&u)
    }

    /// `tr(E π(x e^{(i+τ)u(Y)}))`, with the matrix exponential taken in the
    /// defining representation.
    pub fn closed_form(&self, pt: &TStarKPoint, tau: Complex64, e: &CMat) -> Complex64 {
        let u = self.u_matrix(&pt.y);
        let g = &pt.x * (u * (c(0.0, 1.0) + tau)).exp();
        (e * self.rep_group(&g)).trace()
    }

    /// `Σ_{k≤N} τᵏ/k! tr(E π(x) π(u)ᵏ π(e^{iu}))`: the Lie series of
    /// `X_h = Σ uⁱ Xᵢ` applied to `tr(E π(x e^{iu}))`, each left-invariant
    /// derivative acting as right multiplication by `π(u)`.
    pub fn lie_series(&self, pt: &TStarKPoint, tau: Complex64, e: &CMat, order: usize) -> Complex64 {
        let u = self.u_matrix(&pt.y);
        let pu = self.rep_algebra(&u);
        let tail = self.rep_group(&(&u * c(0.0, 1.0)).exp());
        let mut left = e * self.rep_group(&pt.x);
        let mut sum = c(0.0, 0.0);
        let mut coef = c(1.0, 0.0);
        for k in 0..=order {
            sum += coef * (&left * &tail).trace();
            left = &left * &pu;
            coef *= tau / (k as f64 + 1.0);
        }
        sum
    }

    /// `κ₀ = 2(Y·u − h)`.
    pub fn kappa0(&self, y: &[f64]) -> f64 {
        let u = self.h.gradient(y);
        2.0 * (dot(y, &u) - self.h.value(y))
    }

    /// `κ_τ = 2(s + 1)(Y·u − h)`.
    pub fn kappa_closed_form(&self, y: &[f64], tau: Complex64) -> f64 {
        (tau.im + 1.0) * self.kappa0(y)
    }

    /// Difference between the closed-form `κ_τ` and
    /// `−2 Im(−(i/2)κ₀ + τh − τ u·Y)`, which uses `X_h(κ₀) = 0` and
    /// `α_τ = τ u·Y`.
    pub fn potential_check(&self, y: &[f64], tau: Complex64) -> f64 {
        let k0 = self.kappa0(y);
        let uy = dot(y, &self.h.gradient(y));
        let psi = c(0.0, -0.5) * k0 + tau * self.h.value(y) - tau * uy;
        (self.kappa_closed_form(y, tau) + 2.0 * psi.im).abs()
    }

    /// The torus model as a [`HamSystem`]: coordinates `(a¹, y¹, a², y², …)`,
    /// `ω = Σ daᵏ∧dyᵏ`, `θ = Σ yᵏ daᵏ`, chart `zᵏ = aᵏ + i uᵏ(y)`,
    /// `κ₀ = 2(Y·u − h)`. The angles live on a fundamental-domain box.
    pub fn torus_system(&self, domain: Vec<(f64, f64)>) -> Result<HamSystem, KahlerError> {
        let Group::Torus(n) = self.group else {
            return Err(KahlerError::Invalid(
                "only the torus model has a polynomial single-chart system".into(),
            ));
        };
        let names = torus_coordinate_names(n);
        let coords: Vec<Symbol> = names.iter().map(|s| Symbol::new(s)).collect();
        let a: Vec<Expr> = (0..n).map(|k| Expr::symbol(&coords[2 * k])).collect();
        let y: Vec<Expr> = (0..n).map(|k| Expr::symbol(&coords[2 * k + 1])).collect();
        let u = self.h.gradient_expr(&y);
        let h = self.h.expr(&y);
        let uy = Expr::sum(u.iter().zip(&y).map(|(u, y)| u * y));
        let kappa0 = (uy - &h) * Expr::int(2);
        let mut theta = Vec::with_capacity(2 * n);
        for yk in &y {
            theta.push(yk.clone());
            theta.push(Expr::zero());
        }
        let chart = a
            .iter()
            .zip(&u)
            .map(|(a, u)| a + Expr::i() * u)
            .collect();
        HamSystem::new(
            "tstark-torus",
            SymplecticForm::canonical(coords)?,
            h,
            theta,
            chart,
            kappa0,
            domain,
        )
    }
}

/// `["a", "y"]` for the circle, `["a1", "y1", "a2", "y2", …]` otherwise.
pub fn torus_coordinate_names(n: usize) -> Vec<String> {
    if n == 1 {
        return vec!["a".into(), "y".into()];
    }
    (1..=n)
        .flat_map(|k| [format!("a{k}"), format!("y{k}")])
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Multiplies polynomials in `ξ₂` (dehomogenized) given by coefficient vectors.
fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![c(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `π(g)` on degree-`m` polynomials, `(π(g)p)(ξ) = p(gᵀξ)`, basis
/// `ξ₁^{m−k} ξ₂^k`.
fn sym_power_group(g: &CMat, m: usize) -> CMat {
    let first = [g[(0, 0)], g[(1, 0)]];
    let second = [g[(0, 1)], g[(1, 1)]];
    let mut out = CMat::zeros(m + 1, m + 1);
    for k in 0..=m {
        let mut p = vec![c(1.0, 0.0)];
        for _ in 0..m - k {
            p = poly_mul(&p, &first);
        }
        for _ in 0..k {
            p = poly_mul(&p, &second);
        }
        for (r, v) in p.into_iter().enumerate() {
            out[(r, k)] = v;
        }
    }
    out
}

/// Derivative of [`sym_power_group`] at the identity in direction `u`.
fn sym_power_algebra(u: &CMat, m: usize) -> CMat {
    let mut out = CMat::zeros(m + 1, m + 1);
    for k in 0..=m {
        let a = (m - k) as f64;
        let b = k as f64;
        out[(k, k)] += u[(0, 0)] * a + u[(1, 1)] * b;
        if k < m {
            out[(k + 1, k)] += u[(1, 0)] * a;
        }
        if k > 0 {
            out[(k - 1, k)] += u[(0, 1)] * b;
        }
    }
    out
}

/// Chart map on `T*K` near a base element `x₀`. A point
/// `p = (a¹…aⁿ, y¹…yⁿ)` stands for `(x₀ e^{Σ aᵏ Eₖ}, Y)`, and the chart
/// consists of entries of `x e^{(i+τ)u(Y)}` in the defining representation
/// (all `n` diagonal phases for the torus, three of the four entries for
/// SU(2), dropping the one with the largest cofactor).
///
/// Jacobians and `ω` are expressed in the frame of left-invariant fields
/// `Xₖ` along `K` and `∂/∂yᵏ` along `Lie(K)`. In that frame
/// `θ = Σ yᵏ wₖ` gives `ω(Xⱼ, ∂_{yᵏ}) = δⱼₖ` and
/// `ω(Xⱼ, Xₖ) = Σ_l y^l c_{jk}^l`; the metric and classification are
/// frame-independent.
#[derive(Clone, Debug)]
pub struct TStarKChart {
    model: TStarK,
    base: CMat,
}

impl TStarKChart {
    pub fn new(model: TStarK, base: CMat) -> Result<Self, KahlerError> {
        let n = model.group.matrix_size();
        TStarKPoint::new(model.group, base.clone(), vec![0.0; model.group.dim()])?;
        debug_assert_eq!(base.nrows(), n);
        Ok(Self { model, base })
    }

    pub fn model(&self) -> &TStarK {
        &self.model
    }

    pub fn base(&self) -> &CMat {
        &self.base
    }

    fn split<'a>(&self, p: &'a [f64]) -> Result<(&'a [f64], &'a [f64]), KahlerError> {
        let d = self.model.group.dim();
        if p.len() != 2 * d {
            return Err(KahlerError::Invalid(format!(
                "point has {} coordinates, model has {}",
                p.len(),
                2 * d
            )));
        }
        Ok(p.split_at(d))
    }

    fn group_element(&self, a: &[f64]) -> CMat {
        let coeffs: Vec<Complex64> = a.iter().map(|&v| c(v, 0.0)).collect();
        &self.base * self.model.group.algebra_element(&coeffs).exp()
    }

    /// `x e^{(i+τ)u(Y)}` and its derivatives along `Xⱼ` and `∂/∂yᵏ`.
    fn evolved(&self, tau: Complex64, p: &[f64]) -> Result<(CMat, Vec<CMat>), KahlerError> {
        let (a, y) = self.split(p)?;
        let group = self.model.group;
        let x = self.group_element(a);
        let w = c(0.0, 1.0) + tau;
        let u = self.model.u_matrix(y) * w;
        let ex = u.exp();
        let g = &x * &ex;
        let basis = group.basis();
        let mut derivs: Vec<CMat> = basis.iter().map(|e| &x * e * &ex).collect();
        let hess = self.model.h.hessian(y);
        let m = u.nrows();
        for j in 0..group.dim() {
            let du: Vec<Complex64> = (0..group.dim()).map(|k| c(hess[(k, j)], 0.0) * w).collect();
            let du = group.algebra_element(&du);
            let mut block = CMat::zeros(2 * m, 2 * m);
            block.view_mut((0, 0), (m, m)).copy_from(&u);
            block.view_mut((m, m), (m, m)).copy_from(&u);
            block.view_mut((0, m), (m, m)).copy_from(&du);
            let dex = block.exp().view((0, m), (m, m)).into_owned();
            derivs.push(&x * dex);
        }
        Ok((g, derivs))
    }

    fn entries(&self, g: &CMat) -> Vec<(usize, usize)> {
        match self.model.group {
            Group::Torus(n) => (0..n).map(|k| (k, k)).collect(),
            Group::Su2 => {
                let all = [(0, 0), (0, 1), (1, 0), (1, 1)];
                let drop = all
                    .iter()
                    .copied()
                    .max_by(|&(r, s), &(r2, s2)| {
                        g[(1 - r, 1 - s)]
                            .norm()
                            .total_cmp(&g[(1 - r2, 1 - s2)].norm())
                    })
                    .expect("four entries");
                all.into_iter().filter(|&e| e != drop).collect()
            }
        }
    }
}

impl ChartMap for TStarKChart {
    fn real_dim(&self) -> usize {
        2 * self.model.group.dim()
    }

    fn chart(&self, tau: Complex64, p: &[f64]) -> Result<Vec<Complex64>, KahlerError> {
        let (g, _) = self.evolved(tau, p)?;
        Ok(self.entries(&g).into_iter().map(|e| g[e]).collect())
    }

    fn jacobian(&self, tau: Complex64, p: &[f64]) -> Result<CMat, KahlerError> {
        let (g, derivs) = self.evolved(tau, p)?;
        let entries = self.entries(&g);
        Ok(CMat::from_fn(entries.len(), derivs.len(), |r, col| {
            derivs[col][entries[r]]
        }))
    }

    fn omega(&self, p: &[f64]) -> Result<DMatrix<f64>, KahlerError> {
        let (_, y) = self.split(p)?;
        let group = self.model.group;
        let n = group.dim();
        let mut w = DMatrix::zeros(2 * n, 2 * n);
        for j in 0..n {
            w[(j, n + j)] = 1.0;
            w[(n + j, j)] = -1.0;
            for k in 0..n {
                w[(j, k)] = (0..n).map(|l| y[l] * group.structure_constant(j, k, l)).sum();
            }
        }
        Ok(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kahler::{classify, metric_at, EvolvedStructure, PolarizationKind, PotentialFlow};

    fn su2() -> TStarK {
        TStarK::new(Group::Su2, InvariantHamiltonian::default(), Representation::Defining).unwrap()
    }

    fn sample_e() -> CMat {
        CMat::from_row_slice(2, 2, &[c(0.3, 0.1), c(-0.2, 0.5), c(0.7, 0.0), c(0.1, -0.4)])
    }

    #[test]
    fn su2_basis_brackets() {
        let b = Group::Su2.basis();
        for j in 0..3 {
            for k in 0..3 {
                let lhs = &b[j] * &b[k] - &b[k] * &b[j];
                let rhs = (0..3).fold(CMat::zeros(2, 2), |acc, l| {
                    acc + &b[l] * c(Group::Su2.structure_constant(j, k, l), 0.0)
                });
                assert!((lhs - rhs).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn closed_form_at_zero_is_seed() {
        let m = su2();
        let pt = TStarKPoint::from_exponential(Group::Su2, &[0.2, -0.1, 0.4], vec![0.3, 0.1, -0.5]).unwrap();
        let e = sample_e();
        let u = m.u_matrix(&pt.y);
        let seed = (&e * (&pt.x * (u * c(0.0, 1.0)).exp())).trace();
        assert!((m.closed_form(&pt, c(0.0, 0.0), &e) - seed).norm() < 1e-15);
        assert!((m.lie_series(&pt, c(0.0, 0.0), &e, 10) - seed).norm() < 1e-15);
    }

    #[test]
    fn lie_series_converges_to_closed_form() {
        let m = su2();
        let pt = TStarKPoint::from_exponential(Group::Su2, &[0.5, 0.2, -0.3], vec![0.6, -0.4, 0.5]).unwrap();
        let e = sample_e();
        let tau = c(0.3, -0.35);
        let diff = (m.lie_series(&pt, tau, &e, 14) - m.closed_form(&pt, tau, &e)).norm();
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn spin_representation_is_homomorphic() {
        let m = TStarK::new(Group::Su2, InvariantHamiltonian { a: 1.0, b: 0.5 }, Representation::Spin(3)).unwrap();
        let g1 = Group::Su2.algebra_element(&[c(0.3, 0.2), c(-0.1, 0.4), c(0.5, -0.3)]).exp();
        let g2 = Group::Su2.algebra_element(&[c(-0.2, 0.1), c(0.6, 0.0), c(0.1, 0.7)]).exp();
        let lhs = m.rep_group(&(&g1 * &g2));
        let rhs = m.rep_group(&g1) * m.rep_group(&g2);
        assert!((lhs - rhs).norm() < 1e-12);
        let u = Group::Su2.algebra_element(&[c(0.3, 0.0), c(-0.2, 0.1), c(0.4, 0.0)]);
        let a = m.rep_group(&(&u * c(1e-6, 0.0)).exp());
        let b = m.rep_group(&(&u * c(-1e-6, 0.0)).exp());
        let fd = (a - b) / c(2e-6, 0.0);
        assert!((fd - m.rep_algebra(&u)).norm() < 1e-8);
    }

    #[test]
    fn spin_lie_series_matches_closed_form() {
        let m = TStarK::new(Group::Su2, InvariantHamiltonian { a: 1.0, b: 0.3 }, Representation::Spin(2)).unwrap();
        let pt = TStarKPoint::from_exponential(Group::Su2, &[0.1, 0.7, -0.2], vec![-0.3, 0.2, 0.4]).unwrap();
        let e = CMat::from_fn(3, 3, |r, s| c((r + 2 * s) as f64 * 0.1, (r as f64 - s as f64) * 0.2));
        let tau = c(-0.2, 0.3);
        assert!((m.lie_series(&pt, tau, &e, 16) - m.closed_form(&pt, tau, &e)).norm() < 1e-11);
    }

    #[test]
    fn potential_identity_and_boundary() {
        let m = su2();
        let y = [0.3, -0.5, 0.4];
        assert!(m.potential_check(&y, c(0.3, 0.4)) < 1e-14);
        assert!((m.kappa_closed_form(&y, c(0.7, 0.0)) - m.kappa0(&y)).abs() < 1e-15);
        assert!(m.kappa_closed_form(&y, c(0.2, -1.0)).abs() < 1e-15);
    }

    #[test]
    fn su2_classification_across_s() {
        let chart = TStarKChart::new(su2(), Group::Su2.algebra_element(&[c(0.3, 0.0), c(0.1, 0.0), c(-0.2, 0.0)]).exp()).unwrap();
        let p = [0.0, 0.0, 0.0, 0.4, -0.3, 0.5];
        let kind = |s: f64| classify(&chart, c(0.2, s), &p).unwrap().kind;
        assert_eq!(kind(0.0), PolarizationKind::Kahler);
        assert_eq!(kind(0.5), PolarizationKind::Kahler);
        assert_eq!(kind(-1.0), PolarizationKind::Real);
        assert_eq!(kind(-1.5), PolarizationKind::PseudoKahler);
    }

    #[test]
    fn su2_chart_jacobian_matches_differences() {
        let chart = TStarKChart::new(su2(), CMat::identity(2, 2)).unwrap();
        let tau = c(0.1, 0.2);
        let p = [0.1, -0.2, 0.05, 0.3, 0.2, -0.4];
        let a = chart.jacobian(tau, &p).unwrap();
        // y-columns are coordinate derivatives; compare with central differences.
        for j in 3..6 {
            let mut pp = p;
            let mut pm = p;
            pp[j] += 1e-6;
            pm[j] -= 1e-6;
            let zp = chart.chart(tau, &pp).unwrap();
            let zm = chart.chart(tau, &pm).unwrap();
            for r in 0..3 {
                let fd = (zp[r] - zm[r]) / 2e-6;
                assert!((fd - a[(r, j)]).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn torus_system_matches_closed_forms() {
        let m = TStarK::new(Group::Torus(1), InvariantHamiltonian { a: 1.0, b: 0.5 }, Representation::Defining).unwrap();
        let sys = m.torus_system(vec![(-3.0, 3.0), (-1.0, 1.0)]).unwrap();
        let rep = sys.check_hypotheses(&sys.domain_grid(5).unwrap()).unwrap();
        assert!(rep.holds(1e-12), "{rep:?}");
        let es = EvolvedStructure::new(&sys, 8).unwrap();
        let pf = PotentialFlow::new(&sys, 8).unwrap();
        let tau = c(0.3, 0.4);
        let p = [0.7, 0.6];
        let k = pf.kappa(tau, &p).unwrap();
        assert!((k - m.kappa_closed_form(&[0.6], tau)).abs() < 1e-13);
        let pt = TStarKPoint::from_exponential(Group::Torus(1), &[0.7], vec![0.6]).unwrap();
        let e = CMat::identity(1, 1);
        let z = crate::kahler::ChartMap::chart(&es, tau, &p).unwrap()[0];
        assert!(((c(0.0, 1.0) * z).exp() - m.closed_form(&pt, tau, &e)).norm() < 1e-13);
        let g = metric_at(&es, tau, &p).unwrap().g[(0, 0)].re;
        let u1 = 1.0 + 1.5 * 0.36;
        assert!((g - 1.0 / (2.0 * 1.4 * u1)).abs() < 1e-13);
        assert_eq!(classify(&es, c(0.3, -1.0), &p).unwrap().kind, PolarizationKind::Real);
    }

    #[test]
    fn bi_invariance_for_quadratic_h() {
        let m = su2();
        let pt = TStarKPoint::from_exponential(Group::Su2, &[0.4, -0.3, 0.2], vec![0.5, 0.1, -0.6]).unwrap();
        let e = sample_e();
        let tau = c(0.2, 0.3);
        let k1 = Group::Su2.algebra_element(&[c(0.9, 0.0), c(-0.4, 0.0), c(0.3, 0.0)]).exp();
        let k2 = Group::Su2.algebra_element(&[c(-0.2, 0.0), c(0.7, 0.0), c(0.5, 0.0)]).exp();
        let y = Group::Su2.algebra_element(&pt.y.iter().map(|&v| c(v, 0.0)).collect::<Vec<_>>());
        let y2 = k2.adjoint() * y * &k2;
        // Coordinates of the conjugated element: ⟨E_k, ·⟩ = −2 tr(E_k ·).
        let coords: Vec<f64> = Group::Su2
            .basis()
            .iter()
            .map(|b| (-2.0 * (b * &y2).trace()).re)
            .collect();
        let moved = TStarKPoint::new(Group::Su2, &k1 * &pt.x * &k2, coords).unwrap();
        let e2 = k2.adjoint() * &e * k1.adjoint();
        let a = m.closed_form(&pt, tau, &e);
        let b = m.closed_form(&moved, tau, &e2);
        assert!((a - b).norm() < 1e-10);
    }
}

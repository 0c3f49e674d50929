use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::chart::ChartMap;
use super::system::stack_conj;
use super::KahlerError;

/// Relative threshold on singular values and metric eigenvalues.
pub const RANK_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolarizationKind {
    Kahler,
    PseudoKahler,
    Real,
    Mixed,
    Degenerate,
}

impl PolarizationKind {
    pub fn tag(self) -> &'static str {
        match self {
            PolarizationKind::Kahler => "kahler",
            PolarizationKind::PseudoKahler => "pseudo_kahler",
            PolarizationKind::Real => "real",
            PolarizationKind::Mixed => "mixed",
            PolarizationKind::Degenerate => "degenerate",
        }
    }
}

impl std::fmt::Display for PolarizationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// Polarization type at a point, with the rank data it was decided from.
#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub kind: PolarizationKind,
    /// Rank of the real Jacobian of `(z_τ, z̄_τ)`.
    pub rank: usize,
    pub singular_values: Vec<f64>,
    /// Eigenvalues of `g_{jk̄}` when the Jacobian has full rank.
    pub eigenvalues: Option<Vec<f64>>,
    /// Null directions of the Jacobian in real coordinates (complex
    /// combinations), without any choice of preferred frame.
    pub kernel: Vec<Vec<Complex64>>,
}

/// Hermitian coefficients `g_{jk̄}` with `ω = i Σ g_{jk̄} dz_τʲ ∧ dz̄_τᵏ`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMetric {
    pub g: DMatrix<Complex64>,
    /// Largest entry of the (2,0) part of `ω` in the evolved chart.
    pub type_defect: f64,
}

impl HermitianMetric {
    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.g + self.g.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// max |g_{jk̄} − conj(g_{kj̄})|.
    pub fn hermitian_defect(&self) -> f64 {
        (&self.g - self.g.adjoint())
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }
}

fn singular_values(b: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let svd = b.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    (svd.singular_values.iter().copied().collect(), v_t)
}

pub(crate) fn rank_of(sv: &[f64]) -> usize {
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOLERANCE * smax).count()
}

/// Solves the 2-form identity `ω = i Σ g_{jk̄} dz_τʲ ∧ dz̄_τᵏ` at `p`.
///
/// Writing `B = [A; Ā]` for the Jacobian of `(z_τ, z̄_τ)`, the coefficients
/// of `ω` in the basis `dz_τ, dz̄_τ` are `B⁻ᵀ W B⁻¹`; its mixed block
/// times `−i` is `g`. For `n = 1` this is `g = ω₁₂ / (i (z_x z̄_y − z_y z̄_x))`.
pub fn metric_at<M: ChartMap + ?Sized>(
    map: &M,
    tau: Complex64,
    p: &[f64],
) -> Result<HermitianMetric, KahlerError> {
    let n = map.complex_dim();
    let d = map.real_dim();
    let b = stack_conj(&map.jacobian(tau, p)?);
    let (sv, _) = singular_values(&b);
    let rank = rank_of(&sv);
    if rank < d {
        return Err(KahlerError::Degenerate { rank, dim: d });
    }
    let binv = b
        .try_inverse()
        .ok_or(KahlerError::Degenerate { rank, dim: d })?;
    let w = map.omega(p)?.map(|v| Complex64::new(v, 0.0));
    let m = binv.transpose() * w * &binv;
    let g = DMatrix::from_fn(n, n, |j, k| -Complex64::i() * m[(j, n + k)]);
    let type_defect = m
        .view((0, 0), (n, n))
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    Ok(HermitianMetric { g, type_defect })
}

/// `γ_τ = ω(·, J_τ ·)` as a real symmetric matrix, with `J_τ = B⁻¹ diag(i, −i) B`.
pub fn riemannian_metric_at<M: ChartMap + ?Sized>(
    map: &M,
    tau: Complex64,
    p: &[f64],
) -> Result<DMatrix<f64>, KahlerError> {
    let n = map.complex_dim();
    let d = map.real_dim();
    let b = stack_conj(&map.jacobian(tau, p)?);
    let (sv, _) = singular_values(&b);
    let rank = rank_of(&sv);
    if rank < d {
        return Err(KahlerError::Degenerate { rank, dim: d });
    }
    let binv = b
        .clone()
        .try_inverse()
        .ok_or(KahlerError::Degenerate { rank, dim: d })?;
    let diag = DMatrix::from_fn(d, d, |r, c| {
        if r != c {
            Complex64::new(0.0, 0.0)
        } else if r < n {
            Complex64::i()
        } else {
            -Complex64::i()
        }
    });
    let j = (binv * diag * b).map(|v| v.re);
    Ok(map.omega(p)? * j)
}

/// Decides the polarization type from the rank of the Jacobian of
/// `(z_τ, z̄_τ)` and, at full rank, the signs of the metric eigenvalues.
///
/// Rank `2n` gives `kahler` (positive definite) or `pseudo_kahler`; rank
/// `n` means the span of the `dz_τʲ` is closed under conjugation, i.e.
/// `real`; ranks strictly between are `mixed`; anything below `n` is
/// `degenerate`.
pub fn classify<M: ChartMap + ?Sized>(
    map: &M,
    tau: Complex64,
    p: &[f64],
) -> Result<Classification, KahlerError> {
    let n = map.complex_dim();
    let d = map.real_dim();
    let b = stack_conj(&map.jacobian(tau, p)?);
    let (sv, v_t) = singular_values(&b);
    let rank = rank_of(&sv);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let kernel: Vec<Vec<Complex64>> = sv
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= RANK_TOLERANCE * smax)
        .map(|(i, _)| v_t.row(i).iter().map(|v| v.conj()).collect())
        .collect();
    let (kind, eigenvalues) = if rank == d {
        let ev = metric_at(map, tau, p)?.eigenvalues();
        let scale = ev.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let kind = if ev.iter().all(|&l| l > RANK_TOLERANCE * scale) {
            PolarizationKind::Kahler
        } else if ev.iter().all(|&l| l.abs() > RANK_TOLERANCE * scale) {
            PolarizationKind::PseudoKahler
        } else {
            PolarizationKind::Mixed
        };
        (kind, Some(ev))
    } else if rank == n {
        (PolarizationKind::Real, None)
    } else if rank > n {
        (PolarizationKind::Mixed, None)
    } else {
        (PolarizationKind::Degenerate, None)
    };
    Ok(Classification {
        kind,
        rank,
        singular_values: sv,
        eigenvalues,
        kernel,
    })
}

/// Coefficients of `Ω_τ = dz_τ¹ ∧ … ∧ dz_τⁿ` against `dx^{i₁} ∧ … ∧ dx^{iₙ}`
/// for increasing index sets, i.e. the `n × n` minors of the Jacobian.
pub fn evolve_canonical_form<M: ChartMap + ?Sized>(
    map: &M,
    tau: Complex64,
    p: &[f64],
) -> Result<Vec<(Vec<usize>, Complex64)>, KahlerError> {
    let a = map.jacobian(tau, p)?;
    let (n, d) = a.shape();
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let minor = DMatrix::from_fn(n, n, |r, c| a[(r, idx[c])]);
        out.push((idx.clone(), minor.determinant()));
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            if idx[k] < d - n + k {
                break;
            }
        }
        idx[k] += 1;
        for j in k + 1..n {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

//! The complexification `M_ℂ` of a real-analytic system: doubled charts,
//! the flow `η_t` of `−(τX_{h_ℂ} + τ̄X̄_{h̄_ℂ})`, the leaf projections `π₀`
//! and `π_t`, and the diagrams relating them to the series map `φ_{tτ}`.
//!
//! Internally a point of `M_ℂ` is a vector `ξ ∈ ℂ^{2n}` of continued real
//! coordinates; `M` is the locus `ξ ∈ ℝ^{2n}` and `σ(ξ) = ξ̄`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::kahler::{
    classify, invert_chart, phi_map, ChartMap, EvolvedStructure, HamSystem, KahlerError,
    NewtonOptions, PolarizationKind,
};
use crate::symcore::{CompiledExpr, Expr, Node, SymError, Symbol};

mod rk45;

pub use rk45::{integrate, FlowOptions};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ComplexError {
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error(transparent)]
    Kahler(#[from] KahlerError),
    #[error("conj of `{0}` has no continuation in the doubled chart")]
    IrreducibleConj(String),
    #[error("doubled chart needs an even number of coordinates, got {0}")]
    OddDimension(usize),
    #[error("integrator step underflow at t = {reached}")]
    StepUnderflow { reached: f64 },
    #[error("integrator exceeded {steps} steps at t = {reached}")]
    TooManySteps { steps: usize, reached: f64 },
    #[error("non-finite state at t = {reached}")]
    NonFinite { reached: f64 },
    #[error("projection undefined: leaf does not meet M (real/mixed regime) at tτ = {tau}")]
    ProjectionUndefined { tau: Complex64 },
}

/// A point of `M_ℂ` in the holomorphic coordinates `(z_ℂ, w_ℂ)` continuing
/// `(z, z̄)` with `z = xʲ + iyʲ` for each coordinate pair `(xʲ, yʲ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DoubledPoint {
    pub z: Vec<Complex64>,
    pub w: Vec<Complex64>,
}

impl DoubledPoint {
    /// `ι(p)`.
    pub fn from_real(p: &[f64]) -> Result<Self, ComplexError> {
        let xi: Vec<Complex64> = p.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Self::from_coords(&xi)
    }

    pub fn from_coords(xi: &[Complex64]) -> Result<Self, ComplexError> {
        if xi.len() % 2 != 0 {
            return Err(ComplexError::OddDimension(xi.len()));
        }
        let i = Complex64::i();
        let (z, w) = xi
            .chunks(2)
            .map(|c| (c[0] + i * c[1], c[0] - i * c[1]))
            .unzip();
        Ok(Self { z, w })
    }

    /// Continued real coordinates `x = (z+w)/2`, `y = (z−w)/(2i)`.
    pub fn coords(&self) -> Vec<Complex64> {
        let two_i = Complex64::new(0.0, 2.0);
        self.z
            .iter()
            .zip(&self.w)
            .flat_map(|(&z, &w)| [(z + w) / 2.0, (z - w) / two_i])
            .collect()
    }

    /// `σ(z_ℂ, w_ℂ) = (w̄_ℂ, z̄_ℂ)`.
    pub fn sigma(&self) -> Self {
        Self {
            z: self.w.iter().map(|v| v.conj()).collect(),
            w: self.z.iter().map(|v| v.conj()).collect(),
        }
    }

    /// `max |w_ℂ − z̄_ℂ|`; zero exactly on `M`.
    pub fn real_locus_defect(&self) -> f64 {
        self.z
            .iter()
            .zip(&self.w)
            .map(|(z, w)| (w - z.conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Real parts of the continued coordinates.
    pub fn real_part(&self) -> Vec<f64> {
        self.coords().iter().map(|v| v.re).collect()
    }
}

/// Rewrites `e` without conj nodes so that it continues holomorphically off
/// the real locus. Coordinates are real there and sin, cos and exp have real
/// Taylor coefficients, so conj moves down to constants; conj of any other
/// symbol is rejected.
fn strip_conj(e: &Expr, coords: &[Symbol], conj: bool) -> Result<Expr, ComplexError> {
    Ok(match e.node() {
        Node::Const(c) => Expr::constant(if conj { c.conj() } else { c.clone() }),
        Node::Sym(s) => {
            if conj && !coords.contains(s) {
                return Err(ComplexError::IrreducibleConj(s.name().to_string()));
            }
            e.clone()
        }
        Node::Sum(ts) => Expr::sum(
            ts.iter()
                .map(|t| strip_conj(t, coords, conj))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        Node::Product(fs) => Expr::product(
            fs.iter()
                .map(|f| strip_conj(f, coords, conj))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        Node::Pow(b, k) => strip_conj(b, coords, conj)?.powi(*k),
        Node::Apply(f, a) => Expr::from_node(Node::Apply(*f, strip_conj(a, coords, conj)?)),
        Node::Conj(a) => strip_conj(a, coords, !conj)?,
    })
}

/// An expression continued to `M_ℂ`.
#[derive(Clone, Debug)]
pub struct Complexified {
    expr: Expr,
    compiled: CompiledExpr,
}

impl Complexified {
    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn eval(&self, p: &DoubledPoint) -> Complex64 {
        self.compiled.eval_raw(&p.coords())
    }

    pub fn eval_coords(&self, xi: &[Complex64]) -> Complex64 {
        self.compiled.eval_raw(xi)
    }
}

/// Continues `e` in the doubled chart of `coords`, paired as `(x¹, y¹, x², …)`.
pub fn complexify(e: &Expr, coords: &[Symbol]) -> Result<Complexified, ComplexError> {
    if coords.len() % 2 != 0 {
        return Err(ComplexError::OddDimension(coords.len()));
    }
    let expr = strip_conj(e, coords, false)?;
    let compiled = CompiledExpr::new(&expr, coords)?;
    Ok(Complexified { expr, compiled })
}

/// `(z_ℂ, w_ℂ)` as expressions in `coords`, for substitution into other
/// expressions.
pub fn doubled_substitution(coords: &[Symbol], z: &[Symbol], w: &[Symbol]) -> BTreeMap<Symbol, Expr> {
    let half = Expr::ratio(1, 2);
    let minus_half_i = Expr::complex(0.0, -0.5);
    let mut out = BTreeMap::new();
    for j in 0..coords.len() / 2 {
        let (zs, ws) = (Expr::symbol(&z[j]), Expr::symbol(&w[j]));
        out.insert(
            coords[2 * j].clone(),
            Expr::product([half.clone(), Expr::sum([zs.clone(), ws.clone()])]),
        );
        out.insert(
            coords[2 * j + 1].clone(),
            Expr::product([
                minus_half_i.clone(),
                Expr::sum([zs, Expr::product([Expr::int(-1), ws])]),
            ]),
        );
    }
    out
}

/// The generator of `η_t`: in continued coordinates `ξ̇ = −τ X_h(ξ)`, the
/// holomorphic part of `−(τX_{h_ℂ} + τ̄X̄_{h̄_ℂ})`.
#[derive(Clone, Debug)]
pub struct ComplexFlowField {
    tau: Complex64,
    field: Vec<Complexified>,
    hamiltonian: Complexified,
}

impl ComplexFlowField {
    pub fn new(sys: &HamSystem, tau: Complex64) -> Result<Self, ComplexError> {
        let coords = sys.coords();
        let field = sys
            .field()
            .components()
            .iter()
            .map(|c| complexify(c, coords))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            tau,
            field,
            hamiltonian: complexify(sys.hamiltonian(), coords)?,
        })
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    pub fn dim(&self) -> usize {
        self.field.len()
    }

    pub fn rhs(&self, xi: &[Complex64]) -> Vec<Complex64> {
        self.field.iter().map(|c| -self.tau * c.eval_coords(xi)).collect()
    }

    /// `h_ℂ`, conserved along the flow.
    pub fn hamiltonian(&self, p: &DoubledPoint) -> Complex64 {
        self.hamiltonian.eval(p)
    }

    /// Largest imaginary part of the field at a point of `M`.
    pub fn tangency_defect(&self, p: &[f64]) -> f64 {
        let xi: Vec<Complex64> = p.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.rhs(&xi).iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }
}

/// `η_t(p0)` by embedded Runge–Kutta 4(5).
pub fn flow_eta(
    field: &ComplexFlowField,
    p0: &DoubledPoint,
    t: f64,
    opts: &FlowOptions,
) -> Result<DoubledPoint, ComplexError> {
    let xi = integrate(|x| field.rhs(x), &p0.coords(), t, opts)?;
    DoubledPoint::from_coords(&xi)
}

/// Controls for the leaf solves.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BluOptions {
    pub flow: FlowOptions,
    pub newton: NewtonOptions,
    /// Maximum number of halvings of `t` when continuing the Newton seed.
    pub continuation_depth: usize,
}

impl Default for BluOptions {
    fn default() -> Self {
        Self {
            flow: FlowOptions::default(),
            newton: NewtonOptions {
                max_iterations: 50,
                tolerance: 1e-12,
            },
            continuation_depth: 6,
        }
    }
}

fn leaf_solve(
    es: &EvolvedStructure,
    tau: Complex64,
    t: f64,
    target: &[Complex64],
    p: &[f64],
    opts: &BluOptions,
) -> Result<Vec<f64>, KahlerError> {
    // The leaf constant at intermediate times is z₀(p) exactly.
    let z0 = es.chart(Complex64::new(0.0, 0.0), p)?;
    let mut seed = p.to_vec();
    let mut depth = 0;
    loop {
        match invert_chart(es, tau * t, target, &seed, opts.newton) {
            Ok(s) => return Ok(s.point),
            Err(e) if depth >= opts.continuation_depth => return Err(e),
            Err(_) => {
                depth += 1;
                seed = p.to_vec();
                let k = 1usize << depth;
                for j in 1..k {
                    let tj = t * j as f64 / k as f64;
                    match invert_chart(es, tau * tj, &z0, &seed, opts.newton) {
                        Ok(s) => seed = s.point,
                        Err(_) => break,
                    }
                }
            }
        }
    }
}

/// `π_t(η_t(ι(p)))`: the leaf constant is read off `η_t(ι(p))` through the
/// doubled Lie series `e^{tτX_{h_ℂ}}·z_ℂ`, then the leaf is intersected with
/// `M` by Newton.
pub fn blu_forward(
    es: &EvolvedStructure,
    tau: Complex64,
    t: f64,
    p: &[f64],
    opts: &BluOptions,
) -> Result<Vec<f64>, ComplexError> {
    let field = ComplexFlowField::new(es.system(), tau)?;
    let moved = flow_eta(&field, &DoubledPoint::from_real(p)?, t, &opts.flow)?;
    let target = es.chart_complex(tau * t, &moved.coords());
    leaf_solve(es, tau, t, &target, p, opts).map_err(|e| match e {
        KahlerError::Degenerate { .. } | KahlerError::NewtonFailed { .. } => {
            ComplexError::ProjectionUndefined { tau: tau * t }
        }
        other => other.into(),
    })
}

/// `π₀(η_{−t}(ι(p)))`, defined whenever the flow is; `π₀` reads off the
/// initial chart and returns the point of `M` with that chart value.
pub fn varphi_via_pi0(
    es: &EvolvedStructure,
    tau: Complex64,
    t: f64,
    p: &[f64],
    opts: &BluOptions,
) -> Result<Vec<f64>, ComplexError> {
    let field = ComplexFlowField::new(es.system(), tau)?;
    let moved = flow_eta(&field, &DoubledPoint::from_real(p)?, -t, &opts.flow)?;
    let target = es.chart_complex(Complex64::new(0.0, 0.0), &moved.coords());
    Ok(invert_chart(es, Complex64::new(0.0, 0.0), &target, &moved.real_part(), opts.newton)?.point)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiagramReport {
    pub max_deviation: f64,
    pub checked: usize,
}

/// `max ‖φ_{tτ}(blu_forward(p)) − p‖` over `points`.
pub fn diagram_check(
    es: &EvolvedStructure,
    tau: Complex64,
    t: f64,
    points: &[Vec<f64>],
    opts: &BluOptions,
) -> Result<DiagramReport, ComplexError> {
    let devs: Vec<Result<f64, ComplexError>> = points
        .par_iter()
        .map(|p| {
            let m = blu_forward(es, tau, t, p, opts)?;
            let back = phi_map(es, tau * t, &m)?;
            Ok(back
                .iter()
                .zip(p)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt())
        })
        .collect();
    let mut max_deviation = 0.0f64;
    for d in devs {
        max_deviation = max_deviation.max(d?);
    }
    Ok(DiagramReport {
        max_deviation,
        checked: points.len(),
    })
}

/// Differentials of `φ_{tτ}^* z₀ = z_{tτ}` at a point and the rank of the
/// real span they define together with their conjugates. No frame is chosen
/// in the mixed regime.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarizationFrame {
    pub differentials: DMatrix<Complex64>,
    pub rank: usize,
    pub kind: PolarizationKind,
}

pub fn polarization_frame(
    es: &EvolvedStructure,
    tau: Complex64,
    p: &[f64],
) -> Result<PolarizationFrame, ComplexError> {
    let c = classify(es, tau, p)?;
    Ok(PolarizationFrame {
        differentials: es.jacobian(tau, p)?,
        rank: c.rank,
        kind: c.kind,
    })
}

/// One point of a `blu-check` run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BluRecord {
    pub point: Vec<f64>,
    pub blu_image: Option<Vec<f64>>,
    pub series_roundtrip_error: Option<f64>,
    pub regime_tag: PolarizationKind,
    pub diagnostic: Option<String>,
}

/// Per-point pipeline results, in input order. Projection failures are
/// recorded as diagnostics; other failures abort.
pub fn blu_check(
    es: &EvolvedStructure,
    tau: Complex64,
    t: f64,
    points: &[Vec<f64>],
    opts: &BluOptions,
) -> Result<Vec<BluRecord>, ComplexError> {
    points
        .par_iter()
        .map(|p| {
            let regime_tag = classify(es, tau * t, p)?.kind;
            match blu_forward(es, tau, t, p, opts) {
                Ok(m) => {
                    let back = phi_map(es, tau * t, &m)?;
                    let err = back
                        .iter()
                        .zip(p)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max);
                    Ok(BluRecord {
                        point: p.clone(),
                        blu_image: Some(m),
                        series_roundtrip_error: Some(err),
                        regime_tag,
                        diagnostic: None,
                    })
                }
                Err(e @ ComplexError::ProjectionUndefined { .. }) => Ok(BluRecord {
                    point: p.clone(),
                    blu_image: None,
                    series_roundtrip_error: None,
                    regime_tag,
                    diagnostic: Some(e.to_string()),
                }),
                Err(e) => Err(e),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kahler::PotentialFlow;
    use crate::models::{unit_box, LinearModel, QuarticModel};
    use crate::symcore::parse;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn xy() -> Vec<Symbol> {
        vec![Symbol::new("x"), Symbol::new("y")]
    }

    fn linear(tau0: Complex64) -> (LinearModel, EvolvedStructure) {
        let m = LinearModel::new(tau0).unwrap();
        let sys = m.system(unit_box(2)).unwrap();
        (m, EvolvedStructure::new(&sys, 4).unwrap())
    }

    fn quartic() -> EvolvedStructure {
        let sys = QuarticModel.system(vec![(-0.5, 0.5); 2]).unwrap();
        EvolvedStructure::new(&sys, 12).unwrap()
    }

    #[test]
    fn complexify_substitutes() {
        let h = complexify(&parse("y^2/2").unwrap(), &xy()).unwrap();
        let p = DoubledPoint { z: vec![c(0.3, 1.1)], w: vec![c(-0.7, 0.2)] };
        let y = (p.z[0] - p.w[0]) / c(0.0, 2.0);
        assert!((h.eval(&p) - y * y / 2.0).norm() < 1e-15);
        let k = complexify(&parse("7/3").unwrap(), &xy()).unwrap();
        assert!((k.eval(&p) - c(7.0 / 3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn restriction_recovers_real_values() {
        let sys = QuarticModel.system(unit_box(2)).unwrap();
        let h = complexify(sys.hamiltonian(), sys.coords()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let (x, y): (f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let v = h.eval(&DoubledPoint::from_real(&[x, y]).unwrap());
            assert!((v - c((x * y).powi(2) / 2.0, 0.0)).norm() <= 1e-13);
        }
    }

    #[test]
    fn conj_is_continued_or_rejected() {
        let e = parse("conj(i*x + exp(i*y))").unwrap();
        let f = complexify(&e, &xy()).unwrap();
        let xi = [c(0.3, 0.4), c(-0.2, 0.1)];
        let want = c(0.0, -1.0) * xi[0] + (c(0.0, -1.0) * xi[1]).exp();
        assert!((f.eval_coords(&xi) - want).norm() < 1e-15);
        let bad = parse("conj(a)*x").unwrap();
        assert!(matches!(complexify(&bad, &xy()), Err(ComplexError::IrreducibleConj(_))));
        assert!(matches!(complexify(&e, &[Symbol::new("x")]), Err(ComplexError::OddDimension(1))));
    }

    #[test]
    fn substitution_map_matches_coordinates() {
        let z = [Symbol::new("zc")];
        let w = [Symbol::new("wc")];
        let map = doubled_substitution(&xy(), &z, &w);
        let e = parse("x^2 + 3*x*y").unwrap().subs(&map);
        let pt = DoubledPoint { z: vec![c(0.5, 0.2)], w: vec![c(-0.1, 0.3)] };
        let v = CompiledExpr::new(&e, &[z[0].clone(), w[0].clone()]).unwrap().eval_raw(&[pt.z[0], pt.w[0]]);
        let xi = pt.coords();
        assert!((v - (xi[0] * xi[0] + 3.0 * xi[0] * xi[1])).norm() < 1e-15);
    }

    #[test]
    fn doubled_point_round_trip_and_sigma() {
        let p = DoubledPoint::from_real(&[0.3, -1.2]).unwrap();
        assert_eq!(p.real_locus_defect(), 0.0);
        assert_eq!(p.sigma(), p);
        let q = DoubledPoint::from_coords(&[c(0.3, 0.1), c(0.2, -0.4)]).unwrap();
        assert!(q.real_locus_defect() > 0.1);
        let back = q.coords();
        assert!((back[0] - c(0.3, 0.1)).norm() < 1e-15 && (back[1] - c(0.2, -0.4)).norm() < 1e-15);
    }

    #[test]
    fn real_tau_field_is_tangent() {
        let sys = QuarticModel.system(unit_box(2)).unwrap();
        let f = ComplexFlowField::new(&sys, c(0.7, 0.0)).unwrap();
        assert!(f.tangency_defect(&[0.4, -0.9]) <= 1e-10);
        let g = ComplexFlowField::new(&sys, c(0.0, 1.0)).unwrap();
        assert!(g.tangency_defect(&[0.4, -0.9]) > 1e-3);
    }

    #[test]
    fn linear_flow_is_the_real_flow() {
        let (_, es) = linear(c(0.0, 1.0));
        let tau = 0.8;
        let f = ComplexFlowField::new(es.system(), c(tau, 0.0)).unwrap();
        let p0 = DoubledPoint::from_real(&[0.3, -0.6]).unwrap();
        let t = 0.5;
        let back = flow_eta(&f, &p0, -t, &FlowOptions::default()).unwrap();
        assert!(back.real_locus_defect() < 1e-12);
        let xi = back.coords();
        assert!((xi[0].re - (0.3 + t * tau * -0.6)).abs() < 1e-10);
        assert!((xi[1].re + 0.6).abs() < 1e-12);
        assert_eq!(flow_eta(&f, &p0, 0.0, &FlowOptions::default()).unwrap(), p0);
    }

    #[test]
    fn quartic_flow_conserves_energy_and_commutes_with_sigma() {
        let sys = QuarticModel.system(unit_box(2)).unwrap();
        let f = ComplexFlowField::new(&sys, c(0.0, 1.0)).unwrap();
        let p0 = DoubledPoint::from_real(&[0.6, 0.4]).unwrap();
        let pt = flow_eta(&f, &p0, 0.3, &FlowOptions::default()).unwrap();
        assert!((f.hamiltonian(&pt) - f.hamiltonian(&p0)).norm() <= 1e-8);

        let fr = ComplexFlowField::new(&sys, c(1.3, 0.0)).unwrap();
        let q0 = DoubledPoint::from_coords(&[c(0.5, 0.2), c(-0.3, 0.4)]).unwrap();
        let a = flow_eta(&fr, &q0, 0.4, &FlowOptions::default()).unwrap().sigma();
        let b = flow_eta(&fr, &q0.sigma(), 0.4, &FlowOptions::default()).unwrap();
        for (u, v) in a.z.iter().chain(&a.w).zip(b.z.iter().chain(&b.w)) {
            assert!((u - v).norm() < 1e-8);
        }
    }

    #[test]
    fn linear_blu_forward_inverts_the_linear_map() {
        let (m, es) = linear(c(0.0, 1.0));
        let (tau, t) = (c(1.0, 1.0), 0.1);
        let p = [0.4, -0.3];
        let q = blu_forward(&es, tau, t, &p, &BluOptions::default()).unwrap();
        let back = m.phi(tau * t, q[0], q[1]);
        assert!((back[0] - p[0]).abs() < 1e-9 && (back[1] - p[1]).abs() < 1e-9);
        let id = blu_forward(&es, tau, 0.0, &p, &BluOptions::default()).unwrap();
        assert!((id[0] - p[0]).abs() < 1e-14 && (id[1] - p[1]).abs() < 1e-14);
    }

    #[test]
    fn degenerate_leaf_has_no_projection() {
        let (_, es) = linear(c(0.2, 1.0));
        // Im(τ₀ + tτ) = 0.
        let r = blu_forward(&es, c(0.0, -2.0), 0.5, &[0.3, 0.4], &BluOptions::default());
        assert!(matches!(r, Err(ComplexError::ProjectionUndefined { .. })), "{r:?}");
        let msg = r.unwrap_err().to_string();
        assert!(msg.contains("projection undefined"));
    }

    #[test]
    fn real_tau_blu_is_the_backward_real_flow() {
        let sys = QuarticModel.system(unit_box(2)).unwrap();
        let es = EvolvedStructure::new(&sys, 12).unwrap();
        let pf = PotentialFlow::new(&sys, 12).unwrap();
        let (tau, t) = (c(0.5, 0.0), 0.3);
        let p = [0.5, -0.4];
        let q = blu_forward(&es, tau, t, &p, &BluOptions::default()).unwrap();
        let want = pf.real_flow(-t * tau.re, &p).unwrap();
        assert!((q[0] - want[0]).abs() < 1e-8 && (q[1] - want[1]).abs() < 1e-8);
    }

    #[test]
    fn pi0_gives_the_rank_one_map_at_collapse() {
        let (r0, s0) = (0.3, 0.8);
        let (_, es) = linear(c(r0, s0));
        let p = [0.4, -0.5];
        let q = varphi_via_pi0(&es, c(0.0, -1.0), s0, &p, &BluOptions::default()).unwrap();
        assert!(q[1].abs() < 1e-10);
        assert!((q[0] - (p[0] + r0 * p[1])).abs() < 1e-10);
        let id = varphi_via_pi0(&es, c(0.0, -1.0), 0.0, &p, &BluOptions::default()).unwrap();
        assert!((id[0] - p[0]).abs() < 1e-14 && (id[1] - p[1]).abs() < 1e-14);
    }

    #[test]
    fn pi0_agrees_with_series_map_on_quartic() {
        let es = quartic();
        let tau = c(0.0, 1.0);
        let p = [0.3, -0.25];
        let q = varphi_via_pi0(&es, tau, 0.05, &p, &BluOptions::default()).unwrap();
        let want = phi_map(&es, tau * 0.05, &p).unwrap();
        assert!((q[0] - want[0]).abs() < 1e-6 && (q[1] - want[1]).abs() < 1e-6);
    }

    #[test]
    fn diagrams_commute() {
        let (_, es) = linear(c(0.0, 1.0));
        let pts: Vec<Vec<f64>> = vec![vec![0.1, 0.2], vec![-0.5, 0.7], vec![0.9, -0.4]];
        let r = diagram_check(&es, c(1.0, 1.0), 0.1, &pts, &BluOptions::default()).unwrap();
        assert!(r.max_deviation <= 1e-8, "{r:?}");
        assert_eq!(diagram_check(&es, c(1.0, 1.0), 0.0, &pts, &BluOptions::default()).unwrap().max_deviation, 0.0);
        let es = quartic();
        let pts: Vec<Vec<f64>> = vec![vec![0.3, 0.3], vec![-0.2, 0.1], vec![0.25, -0.3]];
        let r = diagram_check(&es, c(0.0, 1.0), 0.05, &pts, &BluOptions::default()).unwrap();
        assert!(r.max_deviation <= 1e-6, "{r:?}");
    }

    #[test]
    fn blu_check_records_diagnostics() {
        let (_, es) = linear(c(0.0, 1.0));
        let recs = blu_check(&es, c(0.0, -1.0), 1.0, &[vec![0.2, 0.3]], &BluOptions::default()).unwrap();
        assert!(recs[0].blu_image.is_none());
        assert_eq!(recs[0].regime_tag, PolarizationKind::Real);
        let frame = polarization_frame(&es, c(0.0, -1.0), &[0.2, 0.3]).unwrap();
        assert_eq!(frame.rank, 1);
    }
}

//! Generators and property checks shared by the property and acceptance suites.
#![allow(dead_code)]

use std::sync::OnceLock;

use kahlerflow::kahler::{classify, metric_at, EvolvedStructure, HamSystem, KahlerError, PolarizationKind};
use kahlerflow::lieseries::{hamiltonian_field, lie_exp, poisson_bracket, series_product, SymplecticForm, TauSeries};
use kahlerflow::models::{unit_box, Group, InvariantHamiltonian, LinearModel, QuarticModel, Representation, TStarK};
use kahlerflow::symcore::{evaluate_at, Expr, Symbol};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, RngSeed, TestCaseError};

pub const CASES: u32 = 200;
pub const SEED: u64 = 0x6b61_686c_6572;

pub fn config() -> Config {
    Config {
        cases: CASES,
        rng_algorithm: RngAlgorithm::ChaCha,
        rng_seed: RngSeed::Fixed(SEED),
        failure_persistence: None,
        ..Config::default()
    }
}

/// `Σ c · Π xᵢ^eᵢ` as (coefficient, exponents) pairs.
pub type Poly = Vec<(i64, Vec<u32>)>;

/// Random polynomial in `vars` variables with at most `max_terms` terms of
/// total degree at most `max_deg`.
pub fn poly(vars: usize, max_terms: usize, max_deg: usize) -> impl Strategy<Value = Poly> {
    let monomial = prop::collection::vec(0..vars, 0..=max_deg).prop_map(move |picks| {
        let mut e = vec![0u32; vars];
        for v in picks {
            e[v] += 1;
        }
        e
    });
    prop::collection::vec((prop_oneof![-3i64..=-1, 1i64..=3], monomial), 1..=max_terms)
}

pub fn poly_expr(p: &Poly, coords: &[Symbol]) -> Expr {
    Expr::sum(p.iter().map(|(c, e)| {
        Expr::product(
            std::iter::once(Expr::int(*c)).chain(
                coords
                    .iter()
                    .zip(e)
                    .filter(|(_, &k)| k > 0)
                    .map(|(s, &k)| Expr::symbol(s).powi(k as i32)),
            ),
        )
    }))
}

fn syms(names: &[&str]) -> Vec<Symbol> {
    names.iter().map(|n| Symbol::new(n)).collect()
}

/// Built-in planar systems: linear (τ₀ = 0.3 + 0.8i), quartic, and the
/// one-dimensional torus with `h = y²/2 + y⁴/4`.
pub fn builtin(which: usize) -> &'static HamSystem {
    static SYSTEMS: OnceLock<Vec<HamSystem>> = OnceLock::new();
    &SYSTEMS.get_or_init(|| {
        let linear = LinearModel::new(Complex64::new(0.3, 0.8)).unwrap();
        let torus = TStarK::new(
            Group::Torus(1),
            InvariantHamiltonian { a: 1.0, b: 1.0 },
            Representation::Defining,
        )
        .unwrap();
        vec![
            linear.system(unit_box(2)).unwrap(),
            QuarticModel.system(unit_box(2)).unwrap(),
            torus.torus_system(unit_box(2)).unwrap(),
        ]
    })[which]
}

pub const BUILTIN_COUNT: usize = 3;

fn nonzero_coefficients(s: &TauSeries, from: usize) -> Option<usize> {
    (from..=s.order()).find(|&k| !s.coefficient(k).normalize().is_zero())
}

/// `e^{τX}(fg)` and `(e^{τX}f)(e^{τX}g)` agree coefficient-wise through `order`.
pub fn automorphism_law(which: usize, f: &Poly, g: &Poly, order: usize) -> Result<(), String> {
    let sys = builtin(which);
    let (f, g) = (poly_expr(f, sys.coords()), poly_expr(g, sys.coords()));
    let x = sys.field();
    let lhs = lie_exp(x, &(&f * &g), order);
    let rhs = series_product(&lie_exp(x, &f, order), &lie_exp(x, &g, order)).map_err(|e| e.to_string())?;
    for k in 0..=order {
        let d = (lhs.coefficient(k) - rhs.coefficient(k)).normalize();
        if !d.is_zero() {
            return Err(format!("{}: coefficient {k} differs by {d} for f = {f}, g = {g}", sys.name()));
        }
    }
    Ok(())
}

fn compose(p: &Poly, series: &[TauSeries], order: usize) -> Result<TauSeries, String> {
    let mut total = TauSeries::constant(&Expr::zero(), order);
    for (c, e) in p {
        let mut term = TauSeries::constant(&Expr::int(*c), order);
        for (s, &k) in series.iter().zip(e) {
            for _ in 0..k {
                term = series_product(&term, s).map_err(|e| e.to_string())?;
            }
        }
        total = total.add(&term).map_err(|e| e.to_string())?;
    }
    Ok(total)
}

/// `e^{τX}F(x¹, …)` against `F(e^{τX}x¹, …)`, coefficient values on a grid.
pub fn substitution_law(which: usize, p: &Poly, order: usize) -> Result<(), String> {
    let sys = builtin(which);
    let coords = sys.coords();
    let x = sys.field();
    let lhs = lie_exp(x, &poly_expr(p, coords), order);
    let coord_series: Vec<TauSeries> = coords.iter().map(|c| lie_exp(x, &Expr::symbol(c), order)).collect();
    let rhs = compose(p, &coord_series, order)?;
    for u in [-0.9, -0.3, 0.4, 1.0] {
        for v in [-0.7, 0.2, 0.8] {
            for k in 0..=order {
                let a = evaluate_at(lhs.coefficient(k), coords, &[u, v]).map_err(|e| e.to_string())?;
                let b = evaluate_at(rhs.coefficient(k), coords, &[u, v]).map_err(|e| e.to_string())?;
                if (a - b).norm() > 1e-10 * (1.0 + a.norm()) {
                    return Err(format!("{}: coefficient {k} at ({u}, {v}): {a} vs {b}", sys.name()));
                }
            }
        }
    }
    Ok(())
}

pub fn plane() -> (Vec<Symbol>, SymplecticForm) {
    let c = syms(&["x", "y"]);
    (c.clone(), SymplecticForm::canonical(c).unwrap())
}

pub fn two_dof() -> (Vec<Symbol>, SymplecticForm) {
    let c = syms(&["x1", "y1", "x2", "y2"]);
    (c.clone(), SymplecticForm::canonical(c).unwrap())
}

/// All coefficients `k ≥ 1` of `e^{τX_h}h` vanish.
pub fn conservation(h: &Poly, dof: usize, order: usize) -> Result<(), String> {
    let (coords, omega) = if dof == 1 { plane() } else { two_dof() };
    let h = poly_expr(h, &coords);
    let x = hamiltonian_field(&h, &omega).map_err(|e| e.to_string())?;
    let s = lie_exp(&x, &h, order);
    match nonzero_coefficients(&s, 1) {
        None => Ok(()),
        Some(k) => Err(format!("h = {h}: coefficient {k} is {}", s.coefficient(k))),
    }
}

/// `{z_τ¹, z_τ²} = 0` as a series through `order` for `z^j = x_j + i y_j`.
pub fn coordinates_commute(h: &Poly, order: usize) -> Result<(), String> {
    let (coords, omega) = two_dof();
    let h = poly_expr(h, &coords);
    let x = hamiltonian_field(&h, &omega).map_err(|e| e.to_string())?;
    let i = Expr::i();
    let z1 = Expr::symbol(&coords[0]) + &i * Expr::symbol(&coords[1]);
    let z2 = Expr::symbol(&coords[2]) + &i * Expr::symbol(&coords[3]);
    let (s1, s2) = (lie_exp(&x, &z1, order), lie_exp(&x, &z2, order));
    for k in 0..=order {
        let mut terms = Vec::new();
        for a in 0..=k {
            terms.push(poisson_bracket(s1.coefficient(a), s2.coefficient(k - a), &omega).map_err(|e| e.to_string())?);
        }
        let total = Expr::sum(terms).normalize();
        if !total.is_zero() {
            return Err(format!("h = {h}: order {k} bracket is {total}"));
        }
    }
    Ok(())
}

fn quartic_structure() -> &'static EvolvedStructure {
    static ES: OnceLock<EvolvedStructure> = OnceLock::new();
    ES.get_or_init(|| EvolvedStructure::new(builtin(1), 16).unwrap())
}

/// One metric/classification instance on the linear or quartic model.
#[derive(Clone, Debug)]
pub struct MetricCase {
    pub quartic: bool,
    pub tau0: Complex64,
    pub tau: Complex64,
    pub point: [f64; 2],
}

pub fn metric_case() -> impl Strategy<Value = MetricCase> {
    let linear = (-1.0..1.0f64, 0.2..1.5f64, -1.0..1.0f64, -2.0..1.0f64, any::<bool>(), -1.0..1.0f64, -1.0..1.0f64)
        .prop_map(|(r0, s0, r, s, collapse, x, y)| MetricCase {
            quartic: false,
            tau0: Complex64::new(r0, s0),
            tau: Complex64::new(r, if collapse { -s0 } else { s }),
            point: [x, y],
        });
    let quartic = (-0.5..0.5f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(t, x, y)| MetricCase {
        quartic: true,
        tau0: Complex64::new(0.0, 1.0),
        tau: Complex64::new(0.0, t),
        point: [x, y],
    });
    prop_oneof![linear, quartic]
}

/// Hermitian metric and trichotomy invariants, with the class checked against
/// the sign of the closed-form `1/g`.
pub fn metric_invariants(case: &MetricCase) -> Result<(), String> {
    let linear_es;
    let es: &EvolvedStructure = if case.quartic {
        quartic_structure()
    } else {
        let m = LinearModel::new(case.tau0).map_err(|e| e.to_string())?;
        linear_es = EvolvedStructure::new(&m.system(unit_box(2)).map_err(|e| e.to_string())?, 2)
            .map_err(|e| e.to_string())?;
        &linear_es
    };
    let p = case.point;
    let class = classify(es, case.tau, &p).map_err(|e| e.to_string())?;
    // Closed-form 1/g up to a positive factor.
    let inv_g = if case.quartic {
        QuarticModel.inv_metric_it(case.tau.im, p[0], p[1])
    } else {
        case.tau0.im + case.tau.im
    };
    let expected = if inv_g.abs() < 1e-9 {
        PolarizationKind::Real
    } else if inv_g > 0.0 {
        PolarizationKind::Kahler
    } else {
        PolarizationKind::PseudoKahler
    };
    if inv_g.abs() > 1e-6 || expected == PolarizationKind::Real {
        if class.kind != expected {
            return Err(format!("{case:?}: class {:?}, closed form says {expected:?}", class.kind));
        }
    }
    match class.kind {
        PolarizationKind::Kahler | PolarizationKind::PseudoKahler => {
            if class.rank != 2 {
                return Err(format!("{case:?}: rank {} for a nondegenerate class", class.rank));
            }
            let m = metric_at(es, case.tau, &p).map_err(|e| e.to_string())?;
            let scale = m.g.iter().map(|v| v.norm()).fold(0.0, f64::max);
            if m.hermitian_defect() > 1e-12 * scale.max(1.0) {
                return Err(format!("{case:?}: hermitian defect {}", m.hermitian_defect()));
            }
            let eig = m.eigenvalues();
            let tol = 1e-10 * scale;
            let ok = match class.kind {
                PolarizationKind::Kahler => eig.iter().all(|&l| l > tol),
                _ => eig.iter().any(|&l| l < -tol),
            };
            if !ok {
                return Err(format!("{case:?}: class {:?} with eigenvalues {eig:?}", class.kind));
            }
        }
        PolarizationKind::Real => {
            if class.rank != 1 {
                return Err(format!("{case:?}: real class with rank {}", class.rank));
            }
            if !matches!(metric_at(es, case.tau, &p), Err(KahlerError::Degenerate { .. })) {
                return Err(format!("{case:?}: real class with a nondegenerate metric"));
            }
        }
        other => return Err(format!("{case:?}: unexpected class {other:?} in one complex dimension")),
    }
    Ok(())
}

/// Runs `check` on `CASES` seeded instances of `strategy`.
pub fn run_seeded<S, F>(strategy: S, check: F) -> Result<u32, String>
where
    S: Strategy,
    S::Value: std::fmt::Debug,
    F: Fn(S::Value) -> Result<(), String>,
{
    let mut runner = proptest::test_runner::TestRunner::new(config());
    runner
        .run(&strategy, |v| check(v).map_err(TestCaseError::fail))
        .map(|_| CASES)
        .map_err(|e| e.to_string())
}

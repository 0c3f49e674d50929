//! Complex structures, metrics, Kähler potentials and prequantum data
//! evolved by the complex-time Lie series of a Hamiltonian field.

mod chart;
mod metric;
mod potential;
mod sweep;
mod system;

use thiserror::Error;

use crate::lieseries::LieError;
use crate::symcore::SymError;

pub use chart::{invert_chart, phi_map, ChartMap, EvolvedStructure, NewtonOptions, NewtonSolve};
pub use metric::{
    classify, evolve_canonical_form, metric_at, riemannian_metric_at, Classification,
    HermitianMetric, PolarizationKind, RANK_TOLERANCE,
};
pub use potential::{
    alpha_series, kahler_potential, prequantum_evolution, prequantum_ode_check,
    real_time_cocycle_check, real_time_cocycle_symbolic, verify_potential, CocycleReport,
    PotentialCheck, PotentialFlow, PrequantumCheck,
};
pub use sweep::{sweep, sweep_points, KappaFn, SweepRecord};
pub use system::{HamSystem, HypothesisReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KahlerError {
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error("{0}")]
    Invalid(String),
    #[error("Jacobian of the evolved chart is degenerate (rank {rank} of {dim})")]
    Degenerate { rank: usize, dim: usize },
    #[error("Newton iteration did not converge in {iterations} steps (residual {residual:e})")]
    NewtonFailed { iterations: usize, residual: f64 },
}

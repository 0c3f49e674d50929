use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::chart::ChartMap;
use super::metric::{classify, metric_at, PolarizationKind};
use super::system::stack_conj;
use super::KahlerError;
use crate::symcore::GridSpec;

/// One grid point of a chart/metric/classification sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRecord {
    pub index: usize,
    pub point: Vec<f64>,
    pub z_re: Vec<f64>,
    pub z_im: Vec<f64>,
    /// `1/g = i (z_x z̄_y − z_y z̄_x) / ω₁₂`, one complex dimension only;
    /// finite across the degeneration locus, where it vanishes.
    pub inv_g: Option<f64>,
    /// `g_{jk̄}` row-major as `[re, im]` pairs; absent at degenerate points.
    pub metric: Option<Vec<[f64; 2]>>,
    pub class: PolarizationKind,
    pub rank: usize,
    pub kappa: Option<f64>,
}

/// `κ_τ` at a point, for sweeps that report the potential.
pub type KappaFn<'a> = dyn Fn(Complex64, &[f64]) -> Result<f64, KahlerError> + Sync + 'a;

/// Evaluates chart, metric, class and (optionally) `κ_τ` on every grid point.
/// Records come back in grid order regardless of scheduling.
pub fn sweep<M: ChartMap + ?Sized>(
    es: &M,
    kappa: Option<&KappaFn<'_>>,
    tau: Complex64,
    grid: &GridSpec,
) -> Result<Vec<SweepRecord>, (usize, KahlerError)> {
    let points: Vec<Vec<f64>> = grid.points().collect();
    sweep_points(es, kappa, tau, &points)
}

/// [`sweep`] over an explicit point list.
pub fn sweep_points<M: ChartMap + ?Sized>(
    es: &M,
    kappa: Option<&KappaFn<'_>>,
    tau: Complex64,
    points: &[Vec<f64>],
) -> Result<Vec<SweepRecord>, (usize, KahlerError)> {
    points
        .par_iter()
        .enumerate()
        .map(|(index, p)| record(es, kappa, tau, index, p).map_err(|e| (index, e)))
        .collect()
}

fn record<M: ChartMap + ?Sized>(
    es: &M,
    kappa: Option<&KappaFn<'_>>,
    tau: Complex64,
    index: usize,
    p: &[f64],
) -> Result<SweepRecord, KahlerError> {
    let z = es.chart(tau, p)?;
    let class = classify(es, tau, p)?;
    let inv_g = if es.complex_dim() == 1 {
        let b = stack_conj(&es.jacobian(tau, p)?);
        let det = b[(0, 0)] * b[(1, 1)] - b[(0, 1)] * b[(1, 0)];
        let w12 = es.omega(p)?[(0, 1)];
        Some((Complex64::i() * det).re / w12)
    } else {
        None
    };
    let metric = match metric_at(es, tau, p) {
        Ok(m) => Some(m.g.iter().map(|v| [v.re, v.im]).collect()),
        Err(KahlerError::Degenerate { .. }) => None,
        Err(e) => return Err(e),
    };
    let kappa = kappa.map(|k| k(tau, p)).transpose()?;
    Ok(SweepRecord {
        index,
        point: p.to_vec(),
        z_re: z.iter().map(|v| v.re).collect(),
        z_im: z.iter().map(|v| v.im).collect(),
        inv_g,
        metric,
        class: class.kind,
        rank: class.rank,
        kappa,
    })
}

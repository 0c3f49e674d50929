//! The five subcommands. Each returns the full record set or an error;
//! nothing is written until every point has succeeded.

use kahlerflow::complexification::{blu_check, varphi_via_pi0, BluOptions, FlowOptions};
use kahlerflow::geodesic::GeodesicProbe;
use kahlerflow::kahler::{classify, sweep, verify_potential, KahlerError, KappaFn};
use kahlerflow::models::{CMat, Group, TStarK, TStarKPoint};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{ConfigError, RunConfig};
use crate::model::{Built, Model, Reference};

pub struct Report {
    pub records: Vec<Map<String, Value>>,
    pub summary: Map<String, Value>,
}

/// A failure at a specific grid point, or a failure of a whole stage.
#[derive(Debug)]
pub struct NumericalError {
    pub message: String,
    pub index: Option<usize>,
    pub point: Option<Vec<f64>>,
    pub tau: Option<Complex64>,
}

impl std::fmt::Display for NumericalError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "numerical error: {}", self.message)?;
        if let Some(i) = self.index {
            write!(f, " at grid index {i}")?;
        }
        if let Some(p) = &self.point {
            write!(f, ", point {p:?}")?;
        }
        if let Some(t) = self.tau {
            write!(f, ", tau = {} + {}i", t.re, t.im)?;
        }
        Ok(())
    }
}

pub enum CommandError {
    Config(ConfigError),
    Numerical(NumericalError),
}

impl From<ConfigError> for CommandError {
    fn from(e: ConfigError) -> Self {
        CommandError::Config(e)
    }
}

impl From<NumericalError> for CommandError {
    fn from(e: NumericalError) -> Self {
        CommandError::Numerical(e)
    }
}

fn numerical(e: impl std::fmt::Display) -> NumericalError {
    NumericalError {
        message: e.to_string(),
        index: None,
        point: None,
        tau: None,
    }
}

fn at_point(e: impl std::fmt::Display, index: usize, point: &[f64], tau: Option<Complex64>) -> NumericalError {
    NumericalError {
        message: e.to_string(),
        index: Some(index),
        point: Some(point.to_vec()),
        tau,
    }
}

fn to_map(v: impl Serialize) -> Map<String, Value> {
    match serde_json::to_value(v) {
        Ok(Value::Object(m)) => m,
        _ => Map::new(),
    }
}

fn complex(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn points(built: &Built) -> Vec<Vec<f64>> {
    built.grid.points().collect()
}

/// Collects per-point results in grid order, reporting the first failure.
fn per_point<T, F>(points: &[Vec<f64>], tau: Option<Complex64>, f: F) -> Result<Vec<T>, NumericalError>
where
    T: Send,
    F: Fn(usize, &[f64]) -> Result<T, String> + Sync,
{
    points
        .par_iter()
        .enumerate()
        .map(|(i, p)| f(i, p).map_err(|e| at_point(e, i, p, tau)))
        .collect()
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

pub fn evolve(cfg: &RunConfig, built: &Built) -> Result<Report, CommandError> {
    let grid_points = points(built);
    let kappa: Option<Box<KappaFn<'_>>> = match &built.model {
        Model::Series(s) => Some(Box::new(move |tau, p: &[f64]| s.pf.kappa(tau, p))),
        Model::Su2(c) => {
            let model = c.model().clone();
            Some(Box::new(move |tau, p: &[f64]| Ok(model.kappa_closed_form(&p[3..], tau))))
        }
        Model::Separable(_) => None,
    };
    let mut records = Vec::new();
    let mut counts: Map<String, Value> = Map::new();
    for tau in cfg.taus() {
        let rows = sweep(built.chart_map(), kappa.as_deref(), tau, &built.grid).map_err(|(i, e)| {
            CommandError::Numerical(at_point(e, i, &grid_points[i], Some(tau)))
        })?;
        for r in rows {
            let tag = r.class.tag().to_string();
            let n = counts.get(&tag).and_then(Value::as_u64).unwrap_or(0);
            counts.insert(tag, json!(n + 1));
            let mut m = Map::new();
            m.insert("tau".into(), complex(tau));
            m.extend(to_map(r));
            records.push(m);
        }
    }
    let mut summary = Map::new();
    summary.insert("tau_count".into(), json!(cfg.taus().len()));
    summary.insert("points_per_tau".into(), json!(grid_points.len()));
    summary.insert("class_counts".into(), Value::Object(counts));
    Ok(Report { records, summary })
}

pub fn potential(cfg: &RunConfig, built: &Built) -> Result<Report, CommandError> {
    let tau = cfg.tau().unwrap_or_default();
    if cfg.tau_sweep.is_some() {
        return Err(ConfigError("potential takes a single tau, not tau_sweep".into()).into());
    }
    let pts = points(built);
    let mut summary = Map::new();
    let records: Vec<Map<String, Value>> = match &built.model {
        Model::Series(s) => {
            let rows = per_point(&pts, Some(tau), |i, p| {
                let kappa = s.pf.kappa(tau, p).map_err(|e| e.to_string())?;
                let reference = s.reference.kappa(tau, p);
                Ok(json!({
                    "index": i,
                    "point": p,
                    "kappa": kappa,
                    "kappa_reference": reference,
                    "kappa_error": reference.map(|r| (kappa - r).abs()),
                }))
            })?;
            let errors: Vec<f64> = rows.iter().filter_map(|r| r["kappa_error"].as_f64()).collect();
            summary.insert(
                "max_kappa_error".into(),
                if errors.is_empty() { Value::Null } else { json!(max_of(errors)) },
            );
            let check = verify_potential(&s.es, &s.pf, tau, &pts, cfg.fd_step).map_err(numerical)?;
            summary.insert(
                "verify_potential".into(),
                json!({
                    "max_residual": check.max_residual,
                    "checked": check.checked,
                    "skipped": check.skipped.len(),
                    "fd_step": cfg.fd_step,
                }),
            );
            rows.into_iter().map(|v| to_map(v)).collect()
        }
        Model::Su2(c) => {
            let t = c.model();
            let rows: Vec<Value> = pts
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let y = &p[3..];
                    json!({
                        "index": i,
                        "point": p,
                        "kappa": t.kappa_closed_form(y, tau),
                        "kappa_residual": t.potential_check(y, tau),
                    })
                })
                .collect();
            let worst = max_of(rows.iter().filter_map(|r| r["kappa_residual"].as_f64()));
            summary.insert("max_kappa_residual".into(), json!(worst));
            rows.into_iter().map(|v| to_map(v)).collect()
        }
        Model::Separable(_) => {
            return Err(ConfigError(
                "model 'separable' has no potential series; use evolve for its chart and metric".into(),
            )
            .into())
        }
    };
    summary.insert("tau".into(), complex(tau));
    summary.insert("points".into(), json!(records.len()));
    Ok(Report { records, summary })
}

pub fn geodesic(cfg: &RunConfig, built: &Built) -> Result<Report, CommandError> {
    let s = built.series()?;
    let Some(times) = cfg.t_samples.clone() else {
        return Err(ConfigError("geodesic needs t_samples".into()).into());
    };
    let pts = points(built);
    let probe = |t: f64, p: &[f64]| {
        GeodesicProbe::new(vec![t], vec![p.to_vec()], cfg.fd_step, cfg.fd_step)
            .and_then(|g| g.with_refine_step(cfg.refine_step))
            .and_then(|g| g.run(&s.es, &s.pf))
    };
    let mut records = Vec::new();
    let mut worst = 0.0f64;
    let mut worst_refined = 0.0f64;
    let mut min_order: Option<f64> = None;
    for &t in &times {
        let rows = per_point(&pts, Some(Complex64::new(0.0, t)), |_, p| {
            probe(t, p).map_err(|e| e.to_string())
        })?;
        for (i, mut rs) in rows.into_iter().enumerate() {
            let r = rs.remove(0);
            worst = worst.max(r.geodesic_residual);
            worst_refined = worst_refined.max(r.refined_residual);
            if let Some(o) = r.order {
                min_order = Some(min_order.map_or(o, |m: f64| m.min(o)));
            }
            let mut m = Map::new();
            m.insert("index".into(), json!(i));
            m.extend(to_map(r));
            records.push(m);
        }
    }
    let mut summary = Map::new();
    summary.insert("t_samples".into(), json!(times));
    summary.insert("points".into(), json!(pts.len()));
    summary.insert("fd_step".into(), json!(cfg.fd_step));
    summary.insert(
        "refinement".into(),
        json!({
            "coarse_step": cfg.refine_step,
            "fine_step": cfg.refine_step / 2.0,
            "max_refined_residual": worst_refined,
            "min_order": min_order,
        }),
    );
    summary.insert("max_geodesic_residual".into(), json!(worst));
    Ok(Report { records, summary })
}

pub fn blu(cfg: &RunConfig, built: &Built) -> Result<Report, CommandError> {
    let s = built.series()?;
    let tau = cfg.require_tau()?;
    let Some(t) = cfg.t else {
        return Err(ConfigError("blu needs the flow time t".into()).into());
    };
    let opts = BluOptions {
        flow: FlowOptions {
            tol: cfg.ode_tol,
            ..FlowOptions::default()
        },
        ..BluOptions::default()
    };
    let pts = points(built);
    let rows = per_point(&pts, Some(tau * t), |i, p| {
        let mut r = blu_check(&s.es, tau, t, &[p.to_vec()], &opts).map_err(|e| e.to_string())?;
        let r = r.remove(0);
        // The flow-and-project pipeline applied to the image must return p.
        let ode = match &r.blu_image {
            Some(img) => {
                let back = varphi_via_pi0(&s.es, tau, t, img, &opts).map_err(|e| e.to_string())?;
                Some(max_of(back.iter().zip(p).map(|(a, b)| (a - b).abs())))
            }
            None => None,
        };
        let mut m = Map::new();
        m.insert("index".into(), json!(i));
        m.extend(to_map(r));
        m.insert("ode_roundtrip_error".into(), json!(ode));
        Ok(m)
    })?;
    let defined: Vec<&Map<String, Value>> = rows.iter().filter(|r| !r["blu_image"].is_null()).collect();
    let mut summary = Map::new();
    summary.insert("tau".into(), complex(tau));
    summary.insert("t".into(), json!(t));
    summary.insert("points".into(), json!(rows.len()));
    summary.insert("projection_defined".into(), json!(defined.len()));
    summary.insert(
        "max_series_roundtrip_error".into(),
        json!(max_of(defined.iter().filter_map(|r| r["series_roundtrip_error"].as_f64()))),
    );
    summary.insert(
        "max_ode_roundtrip_error".into(),
        json!(max_of(defined.iter().filter_map(|r| r["ode_roundtrip_error"].as_f64()))),
    );
    Ok(Report { records: rows, summary })
}

/// Unit matrices `E_ab`, so that `tr(E_ab M) = M_ba` covers every entry.
fn unit_matrices(size: usize) -> Vec<CMat> {
    let mut out = Vec::new();
    for a in 0..size {
        for b in 0..size {
            let mut e = CMat::zeros(size, size);
            e[(a, b)] = Complex64::new(1.0, 0.0);
            out.push(e);
        }
    }
    out
}

pub fn tstark(cfg: &RunConfig, built: &Built) -> Result<Report, CommandError> {
    let tau = cfg.require_tau()?;
    let (model, base): (&TStarK, Option<CMat>) = match &built.model {
        Model::Series(s) => match &s.reference {
            Reference::Torus(t) => (t, None),
            _ => return Err(ConfigError("tstark needs model tstark-torus or tstark-su2".into()).into()),
        },
        Model::Su2(c) => (c.model(), Some(c.base().clone())),
        Model::Separable(_) => {
            return Err(ConfigError("tstark needs model tstark-torus or tstark-su2".into()).into())
        }
    };
    let group = model.group();
    let d = group.dim();
    let probes = unit_matrices(model.rep_dim());
    let pts = points(built);
    let chart = built.chart_map();
    let rows = per_point(&pts, Some(tau), |i, p| {
        // Torus coordinates interleave (aᵏ, yᵏ); SU(2) lists a then y.
        let (a, y): (Vec<f64>, Vec<f64>) = match group {
            Group::Torus(_) => (p.iter().step_by(2).copied().collect(), p.iter().skip(1).step_by(2).copied().collect()),
            Group::Su2 => (p[..d].to_vec(), p[d..].to_vec()),
        };
        let pt = match &base {
            None => TStarKPoint::from_exponential(group, &a, y.clone()),
            Some(b) => {
                let coeffs: Vec<Complex64> = a.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                TStarKPoint::new(group, b * group.algebra_element(&coeffs).exp(), y.clone())
            }
        }
        .map_err(|e| e.to_string())?;
        let series_error = max_of(
            probes
                .iter()
                .map(|e| (model.lie_series(&pt, tau, e, cfg.order) - model.closed_form(&pt, tau, e)).norm()),
        );
        let class = classify(chart, tau, p).map_err(|e: KahlerError| e.to_string())?;
        Ok(json!({
            "index": i,
            "point": p,
            "series_error": series_error,
            "kappa": model.kappa_closed_form(&y, tau),
            "kappa_residual": model.potential_check(&y, tau),
            "class": class.kind,
            "rank": class.rank,
        }))
    })?;
    let mut summary = Map::new();
    summary.insert("tau".into(), complex(tau));
    summary.insert("order".into(), json!(cfg.order));
    summary.insert("points".into(), json!(rows.len()));
    summary.insert(
        "max_series_error".into(),
        json!(max_of(rows.iter().filter_map(|r| r["series_error"].as_f64()))),
    );
    summary.insert(
        "max_kappa_residual".into(),
        json!(max_of(rows.iter().filter_map(|r| r["kappa_residual"].as_f64()))),
    );
    Ok(Report {
        records: rows.into_iter().map(|v| to_map(v)).collect(),
        summary,
    })
}

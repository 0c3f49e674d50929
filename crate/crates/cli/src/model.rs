//! Model construction from a run configuration.

use kahlerflow::kahler::{ChartMap, EvolvedStructure, HamSystem, PotentialFlow};
use kahlerflow::models::{
    Group, InvariantHamiltonian, LinearModel, ModelName, Profile, QuarticModel, Representation,
    SeparableModel, TStarK, TStarKChart, MODEL_NAMES,
};
use kahlerflow::symcore::{Axis, GridSpec};
use num_complex::Complex64;

use crate::config::{cfg_err, ConfigError, ModelConfig, RunConfig};

/// A model with a polynomial system, so that every series-based check applies.
pub struct SeriesModel {
    pub sys: HamSystem,
    pub es: EvolvedStructure,
    pub pf: PotentialFlow,
    pub reference: Reference,
}

/// Closed-form potentials shipped with the series models.
pub enum Reference {
    Linear(LinearModel),
    Quartic,
    Torus(TStarK),
}

impl Reference {
    /// Closed-form `κ_τ(p)`, where one is known.
    pub fn kappa(&self, tau: Complex64, p: &[f64]) -> Option<f64> {
        match self {
            Reference::Linear(m) => Some(m.kappa(tau, p[0], p[1])),
            Reference::Quartic => (tau.re == 0.0).then(|| QuarticModel.kappa_it(tau.im, p[0], p[1])),
            Reference::Torus(t) => {
                let y: Vec<f64> = p.iter().skip(1).step_by(2).copied().collect();
                Some(t.kappa_closed_form(&y, tau))
            }
        }
    }
}

pub enum Model {
    Series(Box<SeriesModel>),
    Separable(SeparableModel),
    Su2(TStarKChart),
}

pub struct Built {
    pub name: ModelName,
    pub model: Model,
    pub grid: GridSpec,
}

fn reject(m: &ModelConfig, allowed: &[&str]) -> Result<(), ConfigError> {
    let given = [
        ("tau0", m.tau0.is_some()),
        ("profile", m.profile.is_some()),
        ("n", m.n.is_some()),
        ("a", m.a.is_some()),
        ("b", m.b.is_some()),
        ("spin", m.spin.is_some()),
        ("base", m.base.is_some()),
    ];
    for (key, present) in given {
        if present && !allowed.contains(&key) {
            return cfg_err(format!("model '{}' does not take '{key}'", m.name));
        }
    }
    Ok(())
}

fn hamiltonian(m: &ModelConfig) -> InvariantHamiltonian {
    let d = InvariantHamiltonian::default();
    InvariantHamiltonian {
        a: m.a.unwrap_or(d.a),
        b: m.b.unwrap_or(d.b),
    }
}

fn invalid(e: impl std::fmt::Display) -> ConfigError {
    ConfigError(e.to_string())
}

impl Built {
    pub fn from_config(cfg: &RunConfig) -> Result<Self, ConfigError> {
        let m = &cfg.model;
        let Some(name) = ModelName::parse(&m.name) else {
            return cfg_err(format!(
                "unknown model '{}'; expected one of {}",
                m.name,
                MODEL_NAMES.join(", ")
            ));
        };
        let domain: Vec<(f64, f64)> = cfg.grid.iter().map(|a| (a.lo, a.hi)).collect();
        let series = |sys: HamSystem, reference: Reference| -> Result<Model, ConfigError> {
            let es = EvolvedStructure::new(&sys, cfg.order).map_err(invalid)?;
            let pf = PotentialFlow::new(&sys, cfg.order).map_err(invalid)?;
            Ok(Model::Series(Box::new(SeriesModel { sys, es, pf, reference })))
        };
        let check_dim = |d: usize| {
            if domain.len() != d {
                return cfg_err(format!(
                    "model '{}' has {d} real coordinates but the grid has {} axes",
                    m.name,
                    domain.len()
                ));
            }
            Ok(())
        };
        let model = match name {
            ModelName::Linear => {
                reject(m, &["tau0"])?;
                let [re, im] = m.tau0.unwrap_or([0.0, 1.0]);
                let lin = LinearModel::new(Complex64::new(re, im)).map_err(invalid)?;
                check_dim(2)?;
                series(lin.system(domain).map_err(invalid)?, Reference::Linear(lin))?
            }
            ModelName::Quartic => {
                reject(m, &[])?;
                check_dim(2)?;
                series(QuarticModel.system(domain).map_err(invalid)?, Reference::Quartic)?
            }
            ModelName::Separable => {
                reject(m, &["profile", "n"])?;
                let profile = match &m.profile {
                    None => Profile::Quadratic,
                    Some(p) => Profile::parse(p).map_or_else(
                        || cfg_err(format!("unknown profile '{p}'; expected quadratic or flat")),
                        Ok,
                    )?,
                };
                let sep = SeparableModel::new(m.n.unwrap_or(1), profile).map_err(invalid)?;
                check_dim(sep.real_dim())?;
                Model::Separable(sep)
            }
            ModelName::TStarKTorus => {
                reject(m, &["n", "a", "b"])?;
                let t = TStarK::new(Group::Torus(m.n.unwrap_or(1)), hamiltonian(m), Representation::Defining)
                    .map_err(invalid)?;
                check_dim(2 * t.group().dim())?;
                series(t.torus_system(domain).map_err(invalid)?, Reference::Torus(t))?
            }
            ModelName::TStarKSu2 => {
                reject(m, &["a", "b", "spin", "base"])?;
                let rep = m.spin.map_or(Representation::Defining, Representation::Spin);
                let t = TStarK::new(Group::Su2, hamiltonian(m), rep).map_err(invalid)?;
                let base = m.base.clone().unwrap_or_else(|| vec![0.0; 3]);
                if base.len() != 3 {
                    return cfg_err("base needs three algebra coordinates");
                }
                let coeffs: Vec<Complex64> = base.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                let x = Group::Su2.algebra_element(&coeffs).exp();
                check_dim(6)?;
                Model::Su2(TStarKChart::new(t, x).map_err(invalid)?)
            }
        };
        let names = coordinate_names(&model);
        let axes = cfg
            .grid
            .iter()
            .zip(&names)
            .map(|(a, n)| Axis::new(n, a.lo, a.hi, a.count))
            .collect();
        let grid = GridSpec::new(axes).map_err(invalid)?;
        Ok(Self { name, model, grid })
    }

    pub fn chart_map(&self) -> &dyn ChartMap {
        match &self.model {
            Model::Series(s) => &s.es,
            Model::Separable(m) => m,
            Model::Su2(c) => c,
        }
    }

    pub fn series(&self) -> Result<&SeriesModel, ConfigError> {
        match &self.model {
            Model::Series(s) => Ok(s),
            _ => cfg_err(format!(
                "model '{}' has no polynomial system; this command needs linear, quartic or tstark-torus",
                self.name.as_str()
            )),
        }
    }
}

fn coordinate_names(model: &Model) -> Vec<String> {
    match model {
        Model::Series(s) => s.sys.coords().iter().map(|c| c.name().to_string()).collect(),
        Model::Separable(m) => {
            let n = m.real_dim() / 2;
            if n == 1 {
                vec!["x".into(), "y".into()]
            } else {
                (1..=n).flat_map(|k| [format!("x{k}"), format!("y{k}")]).collect()
            }
        }
        Model::Su2(_) => ["a1", "a2", "a3", "y1", "y2", "y3"].map(String::from).to_vec(),
    }
}

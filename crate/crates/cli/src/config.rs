//! Run configuration: JSON, unknown keys rejected.

use std::path::Path;

use clap::ValueEnum;
use num_complex::Complex64;
use serde::Deserialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: String,
    /// `[re, im]` of the initial chart parameter; linear model only.
    pub tau0: Option<[f64; 2]>,
    /// `quadratic` or `flat`; separable model only.
    pub profile: Option<String>,
    /// Degrees of freedom; separable model and torus.
    pub n: Option<usize>,
    /// Coefficients of `h = a|Y|²/2 + b|Y|⁴/4`; T*K models only.
    pub a: Option<f64>,
    pub b: Option<f64>,
    /// `2j` for the spin-`j` representation; SU(2) only.
    pub spin: Option<u32>,
    /// Algebra coordinates of the base point `exp(Σ base_k E_k)`; SU(2) only.
    pub base: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauSweep {
    pub from: [f64; 2],
    pub to: [f64; 2],
    pub count: usize,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<String>,
    pub format: Option<Format>,
}

fn default_order() -> usize {
    12
}

fn default_fd_step() -> f64 {
    1e-3
}

fn default_refine_step() -> f64 {
    1e-2
}

fn default_ode_tol() -> f64 {
    1e-10
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub tau: Option<[f64; 2]>,
    pub tau_sweep: Option<TauSweep>,
    /// Flow time of the BLU pipeline.
    pub t: Option<f64>,
    /// Imaginary times probed by the geodesic check.
    pub t_samples: Option<Vec<f64>>,
    /// One axis per real coordinate of the model.
    pub grid: Vec<AxisConfig>,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    #[serde(default = "default_refine_step")]
    pub refine_step: f64,
    #[serde(default = "default_ode_tol")]
    pub ode_tol: f64,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

pub fn cfg_err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        for (name, v) in [
            ("fd_step", self.fd_step),
            ("refine_step", self.refine_step),
            ("ode_tol", self.ode_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return cfg_err(format!("{name} must be positive, got {v}"));
            }
        }
        if self.order == 0 {
            return cfg_err("order must be at least 1");
        }
        if self.tau.is_some() && self.tau_sweep.is_some() {
            return cfg_err("give either tau or tau_sweep, not both");
        }
        if let Some(s) = &self.tau_sweep {
            if s.count < 2 {
                return cfg_err("tau_sweep.count must be at least 2");
            }
        }
        if let Some(ts) = &self.t_samples {
            if ts.is_empty() || ts.windows(2).any(|w| !(w[0] < w[1])) {
                return cfg_err("t_samples must be non-empty and strictly increasing");
            }
        }
        for a in &self.grid {
            if !(a.lo < a.hi) || a.count < 2 {
                return cfg_err(format!(
                    "grid axes need lo < hi and count >= 2, got [{}, {}] x {}",
                    a.lo, a.hi, a.count
                ));
            }
        }
        Ok(())
    }

    pub fn tau(&self) -> Option<Complex64> {
        self.tau.map(|[re, im]| Complex64::new(re, im))
    }

    /// The single `τ`, the sweep, or `τ = 0`.
    pub fn taus(&self) -> Vec<Complex64> {
        match (&self.tau_sweep, self.tau()) {
            (Some(s), _) => (0..s.count)
                .map(|k| {
                    let f = k as f64 / (s.count - 1) as f64;
                    Complex64::new(
                        s.from[0] + f * (s.to[0] - s.from[0]),
                        s.from[1] + f * (s.to[1] - s.from[1]),
                    )
                })
                .collect(),
            (None, Some(t)) => vec![t],
            (None, None) => vec![Complex64::new(0.0, 0.0)],
        }
    }

    pub fn require_tau(&self) -> Result<Complex64, ConfigError> {
        if self.tau_sweep.is_some() {
            return cfg_err("this command takes a single tau, not tau_sweep");
        }
        self.tau().map_or_else(|| cfg_err("tau is required"), Ok)
    }
}

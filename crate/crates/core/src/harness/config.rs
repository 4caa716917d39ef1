use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::afw::CheckLevel;
use crate::error::{Error, Result};
use crate::trace::Method;

/// Overrides [`ExperimentConfig::output_dir`] when set.
pub const OUTPUT_DIR_ENV: &str = "AWAYFW_OUTPUT_DIR";

/// Where the experiment's instance comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceSpec {
    /// `m` Gaussian points in `R^n` with covariance `scale·I`.
    Dopt {
        m: usize,
        n: usize,
        #[serde(default = "default_scale")]
        scale: f64,
        seed: u64,
    },
    /// A simulated `m`-dimensional Hawkes process on `[0, t)` with
    /// background rate `mu·e` and a random sparse infectivity matrix.
    Mhp {
        m: usize,
        t: f64,
        #[serde(default = "default_mu")]
        mu: f64,
        #[serde(default = "default_sparsity")]
        sparsity: f64,
        #[serde(default = "default_radius")]
        radius: f64,
        seed: u64,
        /// 1-based.
        #[serde(default = "default_dimension")]
        dimension: usize,
        #[serde(default)]
        lambda: f64,
    },
    /// D-opt points from a headerless CSV, one point per row.
    DoptFile { path: PathBuf },
    /// Arrival data from a `time,dim` CSV.
    MhpFile {
        path: PathBuf,
        horizon: f64,
        #[serde(default)]
        dims: Option<usize>,
        #[serde(default = "default_dimension")]
        dimension: usize,
        #[serde(default)]
        lambda: f64,
    },
}

fn default_scale() -> f64 {
    10.0
}

fn default_mu() -> f64 {
    0.1
}

fn default_sparsity() -> f64 {
    0.9
}

fn default_radius() -> f64 {
    0.9
}

fn default_dimension() -> usize {
    1
}

fn default_epsilon() -> f64 {
    1e-9
}

fn default_max_iterations() -> usize {
    10_000
}

fn default_reference_iterations() -> usize {
    100_000
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_checks() -> CheckLevel {
    CheckLevel::Cheap
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance: InstanceSpec,
    #[serde(default = "all_methods")]
    pub solvers: Vec<Method>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    /// Per-method wall-time budget in seconds.
    #[serde(default)]
    pub time_limit_s: Option<f64>,
    /// Iteration budget for the AFW-E reference run.
    #[serde(default = "default_reference_iterations")]
    pub reference_iterations: usize,
    /// RSGM constant `L`; 1 for D-opt and `θ` for MHP when absent.
    #[serde(default)]
    pub rsgm_smoothness: Option<f64>,
    #[serde(default = "default_checks")]
    pub checks: CheckLevel,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn all_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

impl ExperimentConfig {
    pub fn new(instance: InstanceSpec) -> Self {
        Self {
            instance,
            solvers: all_methods(),
            epsilon: default_epsilon(),
            max_iterations: default_max_iterations(),
            time_limit_s: None,
            reference_iterations: default_reference_iterations(),
            rsgm_smoothness: None,
            checks: default_checks(),
            output_dir: default_output_dir(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.solvers.is_empty() {
            return Err(Error::Config("solver list is empty".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config("epsilon must be positive".into()));
        }
        if self.max_iterations == 0 || self.reference_iterations == 0 {
            return Err(Error::Config("iteration budgets must be positive".into()));
        }
        if let Some(t) = self.time_limit_s {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::Config("time limit must be positive".into()));
            }
        }
        if let Some(l) = self.rsgm_smoothness {
            if !(l > 0.0) {
                return Err(Error::Config("rsgm_smoothness must be positive".into()));
            }
        }
        match &self.instance {
            InstanceSpec::Mhp { dimension, m, .. } if *dimension == 0 || dimension > m => {
                Err(Error::Config(format!("dimension {dimension} not in 1..={m}")))
            }
            InstanceSpec::MhpFile { dimension: 0, .. } => Err(Error::Config("dimension is 1-based".into())),
            _ => Ok(()),
        }
    }

    /// The output directory after applying the environment override.
    pub fn resolved_output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.output_dir.clone(),
        }
    }
}

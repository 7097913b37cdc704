//! Run configuration: built-in defaults, then a JSON file, then flags.

use std::fs;
use std::path::{Path, PathBuf};

use beltrami_core::analysis::{CheckTolerances, Coupling};
use beltrami_core::curlspec::CLUSTER_TOL;
use beltrami_core::flow::{
    FlowOptions, Preconditioner, DEFAULT_ANGULAR, DEFAULT_NODES, DEFAULT_PER_INTERVAL,
};
use beltrami_core::maps::MapFamily;
use beltrami_core::s3geom::GridSpec;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CouplingMode {
    Constant,
    /// Closed form for arctan suspensions, measured from the map otherwise.
    Pointwise,
    Measured,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub max_degree: u32,
    pub tol: f64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            max_degree: 3,
            tol: CLUSTER_TOL,
        }
    }
}

/// Starting profile of the flow.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FlowInit {
    /// `alpha = B s`.
    Linear,
    /// `alpha = B s + amplitude sin 2s`.
    Perturbed { amplitude: f64 },
    /// `alpha = 2 arctan(a tan(s/2))`, degree one only.
    Suspension { a: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    #[serde(rename = "B")]
    pub degree: i32,
    pub nodes: usize,
    pub per_interval: usize,
    pub n_theta: usize,
    pub n_psi: usize,
    pub init: FlowInit,
    pub step: f64,
    pub max_iter: usize,
    pub grad_tol: f64,
    pub fd_step: f64,
    pub preconditioner: Preconditioner,
    pub profile_csv: Option<PathBuf>,
    pub trace_csv: Option<PathBuf>,
}

impl Default for FlowConfig {
    fn default() -> Self {
        let o = FlowOptions::default();
        FlowConfig {
            degree: 1,
            nodes: DEFAULT_NODES,
            per_interval: DEFAULT_PER_INTERVAL,
            n_theta: DEFAULT_ANGULAR.0,
            n_psi: DEFAULT_ANGULAR.1,
            init: FlowInit::Perturbed { amplitude: 0.3 },
            step: o.step,
            max_iter: o.max_iter,
            grad_tol: o.grad_tol,
            fd_step: o.fd_step,
            preconditioner: o.preconditioner,
            profile_csv: None,
            trace_csv: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceConfig {
    /// Number of resolutions, each twice the previous; the last is `grid`.
    pub levels: usize,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig { levels: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub map: MapFamily,
    pub coupling: CouplingMode,
    pub c: f64,
    pub tolerances: CheckTolerances,
    pub seed: u64,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    /// Per-`s` samples of `|beta|^2`, `c_pt` and the strain, for suspensions.
    pub radial_csv: Option<PathBuf>,
    pub radial_samples: usize,
    pub spectrum: SpectrumConfig,
    pub flow: FlowConfig,
    pub convergence: ConvergenceConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid: GridSpec::default(),
            map: MapFamily::Identity,
            coupling: CouplingMode::Constant,
            c: 2.0,
            tolerances: CheckTolerances::default(),
            seed: 0,
            threads: None,
            out: None,
            radial_csv: None,
            radial_samples: 200,
            spectrum: SpectrumConfig::default(),
            flow: FlowConfig::default(),
            convergence: ConvergenceConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<RunConfig, CliError> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    pub fn coupling(&self) -> Result<Coupling, CliError> {
        let k = match (self.coupling, &self.map) {
            (CouplingMode::Constant, _) => Coupling::Constant { c: self.c },
            (CouplingMode::Pointwise, MapFamily::Suspension { a }) => {
                Coupling::Suspension { a: *a }
            }
            _ => Coupling::Measured,
        };
        k.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(k)
    }
}

use std::path::PathBuf;

use beltrami_core::flow::Preconditioner;
use beltrami_core::maps::MapFamily;
use beltrami_core::s3geom::GridSpec;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{CouplingMode, FlowInit, RunConfig};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "beltrami",
    version,
    about = "Beltrami maps and the contact Skyrme energy on S^3"
)]
pub struct Cli {
    /// JSON run configuration; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Curl spectrum on polynomial fields of degree <= K.
    Spectrum(SpectrumArgs),
    /// Property checks of a map.
    Check(MapArgs),
    /// Energy, degree and the topological bound.
    Energy(MapArgs),
    /// Equivariant energy minimization.
    Flow(FlowArgs),
    /// Energy and degree at three resolutions.
    Convergence(MapArgs),
    /// Exact structural invariants.
    Selftest,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long = "max-degree", short = 'K')]
    pub max_degree: Option<u32>,
    /// Clustering tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MapKind {
    Identity,
    Conjugation,
    Constant,
    Suspension,
    Fourier,
    Profile,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long = "n-s")]
    pub n_s: Option<usize>,
    #[arg(long = "n-theta")]
    pub n_theta: Option<usize>,
    #[arg(long = "n-psi")]
    pub n_psi: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MapArgs {
    #[arg(long, value_enum)]
    pub map: Option<MapKind>,
    /// Suspension parameter.
    #[arg(long)]
    pub a: Option<f64>,
    /// Fourier test map amplitude.
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long)]
    pub modes: Option<usize>,
    /// CSV table `s,alpha` for the profile map.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub coupling: Option<CouplingMode>,
    #[arg(long)]
    pub c: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long = "radial-csv")]
    pub radial_csv: Option<PathBuf>,
    #[arg(long = "radial-samples")]
    pub radial_samples: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InitKind {
    Linear,
    Perturbed,
    Suspension,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    /// Target degree (boundary value alpha(pi) = B pi).
    #[arg(long = "B", alias = "degree")]
    pub degree: Option<i32>,
    #[arg(long)]
    pub c: Option<f64>,
    /// Interior profile nodes.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Gauss-Legendre nodes in s per spline interval.
    #[arg(long = "per-interval")]
    pub per_interval: Option<usize>,
    #[arg(long = "n-theta")]
    pub n_theta: Option<usize>,
    #[arg(long = "n-psi")]
    pub n_psi: Option<usize>,
    #[arg(long, value_enum)]
    pub init: Option<InitKind>,
    /// Perturbation amplitude, or `a` for a suspension start.
    #[arg(long = "init-param")]
    pub init_param: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    #[arg(long = "grad-tol")]
    pub grad_tol: Option<f64>,
    #[arg(long, value_parser = parse_preconditioner)]
    pub preconditioner: Option<Preconditioner>,
    #[arg(long = "profile-csv")]
    pub profile_csv: Option<PathBuf>,
    #[arg(long = "trace-csv")]
    pub trace_csv: Option<PathBuf>,
}

fn parse_preconditioner(s: &str) -> Result<Preconditioner, String> {
    serde_json::from_value(serde_json::Value::String(s.to_ascii_lowercase()))
        .map_err(|_| format!("expected none, sobolev or newton, got {s:?}"))
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl GridArgs {
    fn apply(&self, g: &mut GridSpec) {
        set(&mut g.n_s, self.n_s);
        set(&mut g.n_theta, self.n_theta);
        set(&mut g.n_psi, self.n_psi);
    }
}

impl MapArgs {
    fn family(&self, current: &MapFamily, seed: u64) -> Result<MapFamily, CliError> {
        let kind = match self.map {
            Some(k) => k,
            None => {
                // Parameters alone adjust the configured map.
                let mut m = current.clone();
                match &mut m {
                    MapFamily::Suspension { a } => set(a, self.a),
                    MapFamily::FourierTest {
                        amplitude, modes, ..
                    } => {
                        set(amplitude, self.amplitude);
                        set(modes, self.modes);
                    }
                    _ => {}
                }
                return Ok(m);
            }
        };
        Ok(match kind {
            MapKind::Identity => MapFamily::Identity,
            MapKind::Conjugation => MapFamily::Conjugation,
            MapKind::Constant => MapFamily::Constant {
                target: [1.0, 0.0, 0.0, 0.0],
            },
            MapKind::Suspension => MapFamily::Suspension {
                a: self.a.unwrap_or(2.0),
            },
            MapKind::Fourier => MapFamily::FourierTest {
                seed,
                amplitude: self.amplitude.unwrap_or(0.3),
                modes: self.modes.unwrap_or(4),
            },
            MapKind::Profile => {
                let path = self
                    .table
                    .as_ref()
                    .ok_or_else(|| CliError::Usage("--map profile needs --table".into()))?;
                let table = beltrami_core::maps::suspension::ProfileTable::from_csv_path(path)
                    .map_err(|e| CliError::Usage(e.to_string()))?;
                MapFamily::ProfileSuspension { table }
            }
        })
    }

    pub fn apply(&self, cfg: &mut RunConfig) -> Result<(), CliError> {
        cfg.map = self.family(&cfg.map, cfg.seed)?;
        set(&mut cfg.coupling, self.coupling);
        set(&mut cfg.c, self.c);
        self.grid.apply(&mut cfg.grid);
        if self.radial_csv.is_some() {
            cfg.radial_csv = self.radial_csv.clone();
        }
        set(&mut cfg.radial_samples, self.radial_samples);
        Ok(())
    }
}

impl FlowArgs {
    pub fn apply(&self, cfg: &mut RunConfig) {
        set(&mut cfg.c, self.c);
        let f = &mut cfg.flow;
        set(&mut f.degree, self.degree);
        set(&mut f.nodes, self.nodes);
        set(&mut f.per_interval, self.per_interval);
        set(&mut f.n_theta, self.n_theta);
        set(&mut f.n_psi, self.n_psi);
        if let Some(kind) = self.init {
            f.init = match kind {
                InitKind::Linear => FlowInit::Linear,
                InitKind::Perturbed => FlowInit::Perturbed {
                    amplitude: self.init_param.unwrap_or(0.3),
                },
                InitKind::Suspension => FlowInit::Suspension {
                    a: self.init_param.unwrap_or(3.0),
                },
            };
        } else if let Some(p) = self.init_param {
            match &mut f.init {
                FlowInit::Perturbed { amplitude } => *amplitude = p,
                FlowInit::Suspension { a } => *a = p,
                FlowInit::Linear => {}
            }
        }
        set(&mut f.step, self.step);
        set(&mut f.max_iter, self.max_iter);
        set(&mut f.grad_tol, self.grad_tol);
        set(&mut f.preconditioner, self.preconditioner);
        if self.profile_csv.is_some() {
            f.profile_csv = self.profile_csv.clone();
        }
        if self.trace_csv.is_some() {
            f.trace_csv = self.trace_csv.clone();
        }
    }
}

impl Cli {
    /// Defaults, then `--config`, then the flags.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        set(&mut cfg.seed, self.seed);
        if self.threads.is_some() {
            cfg.threads = self.threads;
        }
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        match &self.command {
            Command::Spectrum(s) => {
                set(&mut cfg.spectrum.max_degree, s.max_degree);
                set(&mut cfg.spectrum.tol, s.tol);
            }
            Command::Check(m) | Command::Energy(m) | Command::Convergence(m) => {
                m.apply(&mut cfg)?
            }
            Command::Flow(f) => f.apply(&mut cfg),
            Command::Selftest => {}
        }
        if let (Some(s), MapFamily::FourierTest { seed, .. }) = (self.seed, &mut cfg.map) {
            *seed = s;
        }
        Ok(cfg)
    }
}

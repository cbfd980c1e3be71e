use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use flatdpp::{kernel_by_name, GroundSet, KernelSpec, PhasePoint};
use serde::Deserialize;

use crate::CliError;

/// Where the ground set comes from.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum GroundSource {
    Points(Vec<Vec<f64>>),
    Uniform { n: usize, d: usize, seed: u64 },
    Grid { per_axis: usize, d: usize },
}

impl GroundSource {
    pub fn build(&self) -> Result<GroundSet, CliError> {
        Ok(match self {
            GroundSource::Points(p) => GroundSet::new(p.clone())?,
            GroundSource::Uniform { n, d, seed } => GroundSet::uniform(*n, *d, *seed)?,
            GroundSource::Grid { per_axis, d } => GroundSet::grid(*per_axis, *d)?,
        })
    }
}

/// A single experiment. Every field can be given in the JSON config file and
/// overridden on the command line.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kernel: Option<String>,
    pub kernels: Option<Vec<String>>,
    pub ground_set: Option<GroundSource>,
    pub m: Option<usize>,
    pub scale_power: Option<u32>,
    pub alpha: Option<f64>,
    pub eps: Option<Vec<f64>>,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub draws: Option<usize>,
    pub nnp: Option<PathBuf>,
    pub condition: Option<Vec<f64>>,
    pub grid_size: Option<usize>,
    pub max_scale_power: Option<u32>,
    pub phase_eps: Option<f64>,
    pub support_threshold: Option<f64>,
    pub edges: Option<PathBuf>,
    pub vertices: Option<usize>,
    pub q: Option<f64>,
    pub basis_csv: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }

    pub fn kernel(&self) -> Result<KernelSpec, CliError> {
        let name = self.kernel.as_deref().ok_or_else(|| missing("kernel"))?;
        Ok(kernel_by_name(name)?)
    }

    pub fn ground_set(&self) -> Result<GroundSet, CliError> {
        self.ground_set.as_ref().ok_or_else(|| missing("ground set"))?.build()
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| missing("seed (required for stochastic runs)"))
    }

    pub fn output(&self) -> Result<&Path, CliError> {
        self.output.as_deref().ok_or_else(|| missing("output path"))
    }

    pub fn phase(&self) -> Result<Option<PhasePoint>, CliError> {
        match self.scale_power {
            Some(p) => Ok(Some(PhasePoint::new(p, self.alpha.unwrap_or(1.0))?)),
            None => Ok(None),
        }
    }

    /// Either a fixed size or a phase point, never both.
    pub fn target(&self) -> Result<Target, CliError> {
        match (self.m, self.phase()?) {
            (Some(m), None) => Ok(Target::Fixed(m)),
            (None, Some(phase)) => Ok(Target::Varying(phase)),
            (Some(_), Some(_)) => Err(CliError::Validation(
                "give either m or scale_power, not both".into(),
            )),
            (None, None) => Err(missing("m or scale_power")),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Target {
    Fixed(usize),
    Varying(PhasePoint),
}

fn missing(what: &str) -> CliError {
    CliError::Validation(format!("missing {what}"))
}

#[derive(Args, Debug, Clone, Default)]
pub struct CommonArgs {
    /// JSON experiment config; flags override its fields
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ProblemArgs {
    /// Builtin kernel name
    #[arg(long)]
    pub kernel: Option<String>,
    /// Inline points, e.g. "0,0;0.5,1;1,0"
    #[arg(long, conflicts_with_all = ["uniform", "grid"])]
    pub points: Option<String>,
    /// Number of uniform random points on [0,1]^d
    #[arg(long, conflicts_with = "grid")]
    pub uniform: Option<usize>,
    /// Grid with this many points per axis
    #[arg(long)]
    pub grid: Option<usize>,
    /// Dimension for --uniform and --grid
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Seed of the uniform ground set
    #[arg(long, default_value_t = 0)]
    pub ground_seed: u64,
    /// Fixed sample size
    #[arg(long)]
    pub m: Option<usize>,
    /// Exponent p of the scaling α ε^{-p}
    #[arg(long)]
    pub scale_power: Option<u32>,
    #[arg(long)]
    pub alpha: Option<f64>,
}

impl ProblemArgs {
    pub fn apply(&self, cfg: &mut ExperimentConfig) -> Result<(), CliError> {
        set(&mut cfg.kernel, self.kernel.clone());
        if let Some(text) = &self.points {
            cfg.ground_set = Some(GroundSource::Points(parse_points(text)?));
        }
        if let Some(n) = self.uniform {
            cfg.ground_set = Some(GroundSource::Uniform {
                n,
                d: self.dim,
                seed: self.ground_seed,
            });
        }
        if let Some(per_axis) = self.grid {
            cfg.ground_set = Some(GroundSource::Grid {
                per_axis,
                d: self.dim,
            });
        }
        if self.m.is_some() {
            cfg.scale_power = None;
        }
        if self.scale_power.is_some() {
            cfg.m = None;
        }
        set(&mut cfg.m, self.m);
        set(&mut cfg.scale_power, self.scale_power);
        set(&mut cfg.alpha, self.alpha);
        Ok(())
    }
}

impl CommonArgs {
    pub fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = ExperimentConfig::load(self.config.as_deref())?;
        set(&mut cfg.output, self.output.clone());
        set(&mut cfg.seed, self.seed);
        Ok(cfg)
    }
}

pub fn set<T>(slot: &mut Option<T>, value: Option<T>) {
    if value.is_some() {
        *slot = value;
    }
}

pub fn parse_list(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Validation(format!("bad number {s:?}: {e}")))
        })
        .collect()
}

pub fn parse_points(text: &str) -> Result<Vec<Vec<f64>>, CliError> {
    text.split(';').filter(|s| !s.trim().is_empty()).map(parse_list).collect()
}

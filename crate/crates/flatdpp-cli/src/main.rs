//! `flatdpp`: reproducible experiments on flat limits of kernel DPPs.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use config::{CommonArgs, ProblemArgs};

#[derive(Error, Debug)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] flatdpp::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "flatdpp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw samples and write them as CSV (draw_id,indices)
    Sample {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        problem: ProblemArgs,
        /// Sample a pair stored as JSON instead of a kernel process
        #[arg(long)]
        nnp: Option<PathBuf>,
        /// Sample the kernel L-ensemble at this ε instead of its limit
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        draws: Option<usize>,
    },
    /// Print the limiting process as JSON
    Limit {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        problem: ProblemArgs,
        /// Also write the columns of V with monomial labels
        #[arg(long)]
        basis_csv: Option<PathBuf>,
    },
    /// Distance to the limit along a sequence of ε
    Converge {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        problem: ProblemArgs,
        /// Comma-separated ε values
        #[arg(long)]
        eps: Option<String>,
        /// Comma-separated univariate points to condition on
        #[arg(long)]
        condition: Option<String>,
        #[arg(long)]
        grid_size: Option<usize>,
    },
    /// Phase diagram of the varying-size limit
    Phase {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        problem: ProblemArgs,
        /// Comma-separated kernel names
        #[arg(long)]
        kernels: Option<String>,
        #[arg(long)]
        max_scale_power: Option<u32>,
        #[arg(long)]
        phase_eps: Option<f64>,
        #[arg(long)]
        support_threshold: Option<f64>,
    },
    /// Root marginals of random spanning forests
    Forest {
        #[command(flatten)]
        common: CommonArgs,
        /// Edge list with lines `u v weight`
        #[arg(long)]
        edges: Option<PathBuf>,
        #[arg(long)]
        vertices: Option<usize>,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        draws: Option<usize>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    use config::set;
    match cli.command {
        Command::Sample {
            common,
            problem,
            nnp,
            eps,
            draws,
        } => {
            let mut cfg = common.resolve()?;
            problem.apply(&mut cfg)?;
            set(&mut cfg.nnp, nnp);
            set(&mut cfg.eps, eps.map(|e| vec![e]));
            set(&mut cfg.draws, draws);
            commands::sample(&cfg)
        }
        Command::Limit {
            common,
            problem,
            basis_csv,
        } => {
            let mut cfg = common.resolve()?;
            problem.apply(&mut cfg)?;
            set(&mut cfg.basis_csv, basis_csv);
            commands::limit(&cfg)
        }
        Command::Converge {
            common,
            problem,
            eps,
            condition,
            grid_size,
        } => {
            let mut cfg = common.resolve()?;
            problem.apply(&mut cfg)?;
            set(&mut cfg.eps, eps.as_deref().map(config::parse_list).transpose()?);
            set(&mut cfg.condition, condition.as_deref().map(config::parse_list).transpose()?);
            set(&mut cfg.grid_size, grid_size);
            commands::converge(&cfg)
        }
        Command::Phase {
            common,
            problem,
            kernels,
            max_scale_power,
            phase_eps,
            support_threshold,
        } => {
            let mut cfg = common.resolve()?;
            problem.apply(&mut cfg)?;
            set(
                &mut cfg.kernels,
                kernels.map(|k| k.split(',').map(|s| s.trim().to_string()).collect()),
            );
            set(&mut cfg.max_scale_power, max_scale_power);
            set(&mut cfg.phase_eps, phase_eps);
            set(&mut cfg.support_threshold, support_threshold);
            commands::phase(&cfg)
        }
        Command::Forest {
            common,
            edges,
            vertices,
            q,
            draws,
        } => {
            let mut cfg = common.resolve()?;
            set(&mut cfg.edges, edges);
            set(&mut cfg.vertices, vertices);
            set(&mut cfg.q, q);
            set(&mut cfg.draws, draws);
            commands::forest(&cfg)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

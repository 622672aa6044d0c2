//! `et6`: closure checks, eigenstructure scans and solver runs.
//!
//! Exit status 0 when every enabled assertion passes, 1 on an assertion
//! failure or aborted computation, 2 on usage or configuration errors.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use et6_core::Et6Error;

use commands::{CommandError, EigenArgs, RelaxArgs};
use config::{load_config, RunConfig};

#[derive(Parser)]
#[command(name = "et6", version, about = "Six-field maximum-entropy closure: checks and 1-D runs")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Coarser quadrature and sweep grids.
    #[arg(long, global = true)]
    quick: bool,
    /// Directory for CSV output (falls back to ET6_OUTPUT_DIR).
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare closed-form moments, fluxes and entropy with kinetic quadrature.
    Check,
    /// Characteristic speeds, coupling condition and entropy concavity at one state.
    Eigen {
        #[arg(long = "D")]
        dof: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long = "Pi-over-p", default_value_t = 0.0, allow_hyphen_values = true)]
        pi_over_p: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        vx: f64,
        /// Require the coupling condition on every eigenvector.
        #[arg(long)]
        strict_k: bool,
    },
    /// Run the configured scenario.
    Run {
        #[arg(long = "N")]
        cells: Option<usize>,
        #[arg(long = "CFL")]
        cfl: Option<f64>,
        #[arg(long = "t-end")]
        t_end: Option<f64>,
    },
    /// Homogeneous relaxation of the dynamic pressure.
    Relax {
        #[arg(long = "Pi0-over-p", default_value_t = 0.3, allow_hyphen_values = true)]
        pi0_over_p: f64,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long = "t-end", default_value_t = 1.0)]
        t_end: f64,
    },
    /// Compare the dynamic pressure of a smooth run with the bulk-viscosity law.
    Nslimit {
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long = "N")]
        cells: Option<usize>,
    },
    /// Property suite over a grid of degrees of freedom and Pi/p.
    Sweep,
}

enum Failure {
    Usage(String),
    Run(String),
}

fn invalid_input(e: &Et6Error) -> bool {
    matches!(e, Et6Error::Domain(_) | Et6Error::InvalidGas(_) | Et6Error::Inadmissible { .. } | Et6Error::Scenario(_))
}

fn execute(cli: Cli) -> Result<commands::Outcome, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => load_config(path).map_err(|e| Failure::Usage(e.to_string()))?,
        None => RunConfig::default(),
    };
    if cli.quick {
        cfg.quick();
    }
    match &cli.command {
        Command::Eigen { dof, strict_k, .. } => {
            if let Some(d) = dof {
                cfg.gas.dof = *d;
            }
            cfg.check.strict_k |= strict_k;
        }
        Command::Run { cells, cfl, t_end } => {
            if let Some(n) = cells {
                cfg.scenario.cells = *n;
            }
            if let Some(c) = cfl {
                cfg.scenario.cfl = *c;
            }
            if let Some(t) = t_end {
                cfg.scenario.t_end = *t;
            }
        }
        Command::Nslimit { tau, cells } => {
            if let Some(t) = tau {
                cfg.nslimit.tau = *t;
            }
            if let Some(n) = cells {
                cfg.nslimit.cells = *n;
            }
        }
        Command::Relax { tau: Some(t), .. } => cfg.gas.tau = *t,
        _ => {}
    }
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let dir = cfg.output_dir(cli.output_dir.as_deref());

    let result = match cli.command {
        Command::Check => commands::check(&cfg, &dir),
        Command::Eigen { rho, p, pi_over_p, vx, .. } => commands::eigen(&cfg, &EigenArgs { rho, p, pi_over_p, vx }, &dir),
        Command::Run { .. } => commands::run(&cfg, &dir),
        Command::Relax { pi0_over_p, t_end, .. } => {
            if !(t_end > 0.0) {
                return Err(Failure::Usage(format!("--t-end must be positive, got {t_end}")));
            }
            let tau = cfg.gas.tau;
            commands::relax(&cfg, &RelaxArgs { pi0_over_p, tau, t_end }, &dir)
        }
        Command::Nslimit { .. } => commands::nslimit(&cfg, &dir),
        Command::Sweep => commands::sweep(&cfg, &dir),
    };
    result.map_err(|e| match e {
        CommandError::Config(c) => Failure::Usage(c.to_string()),
        CommandError::Core(ref c) if invalid_input(c) => Failure::Usage(e.to_string()),
        other => Failure::Run(other.to_string()),
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(out) => {
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            if out.failures.is_empty() {
                println!("all assertions passed");
                ExitCode::SUCCESS
            } else {
                for f in &out.failures {
                    eprintln!("FAIL {f}");
                }
                if !out.files.is_empty() {
                    let paths: Vec<String> = out.files.iter().map(|p| p.display().to_string()).collect();
                    eprintln!("reports: {}", paths.join(", "));
                }
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

//! attostm: command-line driver for the laser-induced-tunneling toolkit.
//!
//! Subcommands run the direct TDSE, the flux-form amplitude, the SFA, the
//! saddle-point analysis, parameter sweeps, method comparisons and canned
//! figure-reproduction recipes. Exit codes: 0 ok, 2 configuration error,
//! 3 solver error, 4 acceptance-gate failure.

mod commands;
mod output;
mod plot;
mod recipe;

use clap::{Parser, Subcommand};
use commands::{CmdError, Method, ScanArgs, ScanAxis};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "attostm", version, about = "Ultrafast STM laser-induced tunneling toolkit")]
struct Cli {
    /// Worker-thread count; ATTOSTM_WORKERS overrides, 0 means automatic.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Direct Crank-Nicolson TDSE run: spectrum, current map, flux balance.
    Tdse {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Flux-form tunneling spectrum (forward source run + backward runs).
    Flux {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Strong-field-approximation spectrum.
    Sfa {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Complex saddle points, travel times and trajectories (CW waveform).
    Saddle {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep one parameter axis, computing the net current per point.
    Scan {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        axis: ScanAxis,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, value_enum, default_value = "tdse")]
        method: Method,
    },
    /// Run TDSE and SFA on the same grid and compare cutoffs and shapes.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reproduce a canned figure recipe and check its acceptance gate.
    Reproduce {
        /// Figure id, e.g. fig1c, fig2, fig3a, fig3c, fig4b, figS2, figS4,
        /// figS5 (any recipe file name without extension).
        #[arg(long)]
        figure: String,
        #[arg(long)]
        out: PathBuf,
        /// Directory holding the recipe TOML files.
        #[arg(long, default_value = "recipes")]
        recipes: PathBuf,
    },
}

fn configure_workers(cli_workers: Option<usize>) -> Result<(), CmdError> {
    let n = match std::env::var("ATTOSTM_WORKERS") {
        Ok(v) => Some(v.parse::<usize>().map_err(|_| {
            CmdError::Config(format!("ATTOSTM_WORKERS must be an integer, got {v:?}"))
        })?),
        Err(_) => cli_workers,
    };
    if let Some(n) = n {
        if n > 0 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CmdError::Config(format!("worker pool: {e}")))?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CmdError> {
    configure_workers(cli.workers)?;
    match cli.cmd {
        Cmd::Tdse { config, out } => commands::cmd_tdse(&config, &out),
        Cmd::Flux { config, out } => commands::cmd_flux(&config, &out),
        Cmd::Sfa { config, out } => commands::cmd_sfa(&config, &out),
        Cmd::Saddle { config, out } => commands::cmd_saddle(&config, &out),
        Cmd::Scan { config, out, axis, from, to, steps, method } => {
            commands::cmd_scan(&config, &out, &ScanArgs { axis, from, to, steps, method })
        }
        Cmd::Compare { config, out } => commands::cmd_compare(&config, &out),
        Cmd::Reproduce { figure, out, recipes } => {
            commands::cmd_reproduce(&figure, &out, &recipes)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("attostm: {}", e.message());
        std::process::exit(e.exit_code());
    }
}

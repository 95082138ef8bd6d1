//! Command-line runner: `dcm run <config> [--seed N] [--jobs K] [--dry-run]
//! [--level i]` plus config validation and checkpoint export helpers.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dcm_core::runner::{self, RunOverrides};

#[derive(Parser)]
#[command(name = "dcm", version, about = "Deep collocation PDE solver with dual-weighted-residual error estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config: train primal and adjoint networks per
    /// refinement level, estimate the goal error, and write reports.
    Run {
        /// Path to the JSON experiment config.
        config: PathBuf,
        /// Override the config's RNG seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Fan independent sweep cells across this many worker threads.
        #[arg(long)]
        jobs: Option<usize>,
        /// Validate the config and print a summary without training.
        #[arg(long)]
        dry_run: bool,
        /// Run a single schedule level.
        #[arg(long)]
        level: Option<usize>,
    },
    /// Validate a config and list every violated invariant.
    Check { config: PathBuf },
    /// Evaluate a saved network checkpoint on a grid and write a point cloud.
    Export {
        checkpoint: PathBuf,
        /// Problem name supplying the domain mask and exact solution.
        #[arg(long)]
        problem: String,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        /// Grid resolution per axis.
        #[arg(long, default_value_t = 100)]
        grid: usize,
        /// Output CSV path.
        #[arg(long, default_value = "pointcloud.csv")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> dcm_core::Result<()> {
    match cli.command {
        Command::Run { config, seed, jobs, dry_run, level } => {
            let cfg = runner::load_config(&config)?;
            let overrides = RunOverrides { seed, jobs, dry_run, level };
            let summary = runner::run(&cfg, &overrides)?;
            if dry_run {
                println!(
                    "config ok: problem '{}', {} levels, {} functionals",
                    cfg.problem.name,
                    cfg.schedule.len(),
                    cfg.functionals.len()
                );
                return Ok(());
            }
            for (cell, reports) in &summary.cells {
                if let Some((p, d)) = cell {
                    println!("cell p={p} delta={d}:");
                }
                for r in reports {
                    let ie = r.i_eff.map_or("-".into(), |v| format!("{v:.4}"));
                    let e = r.true_error.map_or("-".into(), |v| format!("{v:.4e}"));
                    println!(
                        "  level {} (N_int={}, N_bnd={}): loss {:.3e}/{:.3e}, J_c {:.6e}, eta {:.4e}, e {}, I_eff {}",
                        r.level, r.n_int, r.n_bnd, r.loss_primal, r.loss_adjoint, r.j_c_theta, r.eta, e, ie
                    );
                    for note in &r.notes {
                        println!("    note: {note}");
                    }
                }
            }
            if let Some(dir) = &summary.output_dir {
                println!("outputs written to {}", dir.display());
            }
            Ok(())
        }
        Command::Check { config } => {
            let cfg = runner::load_config(&config)?;
            println!("config ok: problem '{}', {} levels", cfg.problem.name, cfg.schedule.len());
            Ok(())
        }
        Command::Export { checkpoint, problem, p, delta, grid, out } => {
            let ck = dcm_core::network::Checkpoint::load(&checkpoint)?;
            let (net, theta) = ck.into_parts()?;
            let prob = dcm_core::problems::by_name(&problem, p, delta)?;
            runner::export_pointcloud(&net, &theta, &prob, grid, &out)?;
            println!("wrote {}", out.display());
            Ok(())
        }
    }
}

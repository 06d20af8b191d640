//! `nearsphere`: batch runs of the Dirichlet-to-Neumann experiments.
//!
//! Exit status: 0 on success, 2 for configuration errors, 3 when an
//! iteration did not converge (tables computed so far are still written),
//! 1 for any other failure.

mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use config::{Command, Overrides, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "nearsphere", version, about = "Dirichlet-to-Neumann experiments on near-spherical domains")]
struct Args {
    /// TOML run configuration.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides `out_dir`).
    #[arg(long, value_name = "DIR")]
    out: Option<String>,
    /// Seed of every random family (overrides `seed`).
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Experiment to run (overrides `command`).
    #[arg(long, value_enum, value_name = "NAME")]
    command: Option<Command>,
}

fn exit_code(err: &nearsphere::Error) -> u8 {
    use nearsphere::Error::*;
    match err {
        Parameter(_) | Dimension(_) | CoefficientLength { .. } => 2,
        NonConvergence(_) | Refinement(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let over = Overrides {
        command: args.command,
        seed: args.seed,
        out_dir: args.out,
    };
    let cfg = match RunConfig::load(args.config.as_deref(), &over) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    println!("nearsphere {} (config {})", cfg.command.name(), cfg.hash());

    let mut run = commands::Run::default();
    let result = commands::run(&cfg, &mut run);
    let dir = Path::new(&cfg.out_dir);
    for table in &run.tables {
        match table.write(dir, &cfg) {
            Ok(paths) => {
                for p in paths {
                    println!("wrote {}", p.display());
                }
            }
            Err(e) => {
                eprintln!("error: cannot write {} in {}: {e}", table.name, dir.display());
                return ExitCode::from(1);
            }
        }
    }
    for line in &run.summary {
        println!("{line}");
    }
    match result {
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Ok(()) if run.nonconverged => {
            eprintln!("error: iteration did not reach its tolerance; partial results written");
            ExitCode::from(3)
        }
        Ok(()) => ExitCode::SUCCESS,
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ledma_cli::{compare, load_config, parse_config, run_experiment, AlgoId, BackendKind, Overrides};

#[derive(Parser)]
#[command(
    name = "ledma",
    version,
    about = "Multi-UAV sensing/communication trade-off experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one optimization and write its artifacts.
    Run {
        /// JSON config; defaults apply to every omitted key.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        algo: Option<AlgoId>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        backend: Option<BackendKind>,
        /// Parent directory for the run directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare finished runs under shared normalization.
    Compare {
        #[arg(required = true, num_args = 2..)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Run {
            config,
            algo,
            seed,
            backend,
            out,
        } => {
            let overrides = Overrides {
                algo,
                seed,
                backend,
                output_dir: out,
            };
            let cfg = match config {
                Some(path) => load_config(&path, &overrides)?,
                None => parse_config("{}", &overrides)?,
            };
            let art = run_experiment(&cfg)?;
            println!("{}", art.dir.display());
            println!(
                "evaluations {}  EP size {}  HV {:.6}",
                art.summary.evaluations, art.summary.ep_size, art.summary.final_hv
            );
        }
        Command::Compare { runs, out } => {
            let cmp = compare(&runs, &out)?;
            println!("{:<4} {:<10} {:>10}  run", "rank", "algo", "hv");
            for row in &cmp.table {
                println!("{:<4} {:<10} {:>10.6}  {}", row.rank, row.algo, row.hv, row.run);
            }
        }
    }
    Ok(())
}

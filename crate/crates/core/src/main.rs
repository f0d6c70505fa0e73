use std::path::PathBuf;
use std::process::ExitCode;

use cavity_bloch::experiments::{load_config, run_experiment, ExperimentConfig, ExperimentId};
use cavity_bloch::Error;
use clap::{Parser, Subcommand};

/// Thread count for sweeps and parallel runs.
const THREADS_VAR: &str = "CAVITY_BLOCH_THREADS";

#[derive(Parser)]
#[command(name = "cavity-bloch", version, about = "Run the cavity Bloch-oscillation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its data files and manifest.
    Run {
        /// fig1, fig2, fig3, fig4, fig5, fig6, fig7, fig8, fig10 or custom
        id: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Cheaper fig8 parameters with the same detuning to coupling ratio.
        #[arg(long)]
        desk_scale: bool,
        /// Parameter override, may be repeated.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// List the experiment ids.
    List,
}

fn run(cli: Cli) -> cavity_bloch::Result<()> {
    match cli.command {
        Command::List => {
            for id in ExperimentId::ALL {
                println!("{id}");
            }
            Ok(())
        }
        Command::Run { id, config, out, desk_scale, set } => {
            let id: ExperimentId = id.parse()?;
            let mut cfg = match &config {
                Some(path) => load_config(path, id, desk_scale)?,
                None => {
                    let c = ExperimentConfig::new(id);
                    if desk_scale {
                        c.with_desk_scale()
                    } else {
                        c
                    }
                }
            };
            for s in &set {
                cfg.apply_assignment(s)?;
            }
            if let Some(dir) = out {
                cfg = cfg.with_out_dir(dir);
            }
            let manifest = run_experiment(&cfg)?;
            for f in &manifest.files {
                println!("{}  {}", f.sha256, f.path);
            }
            println!("{}", serde_json::to_string_pretty(&manifest.summary).unwrap_or_default());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Ok(n) = std::env::var(THREADS_VAR) {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    log::warn!("could not size the thread pool: {e}");
                }
            }
            _ => {
                eprintln!("error: {THREADS_VAR} must be a positive integer, got {n:?}");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_config() {
        2
    } else {
        3
    }
}

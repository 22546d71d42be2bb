//! Command-line front end: `mcf-qkd run <config.json>` and
//! `mcf-qkd validate <config.json>`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mcf_qkd::config::{has_errors, validate, Overrides, RunConfig};
use mcf_qkd::run::{run, RunOptions};

#[derive(Parser)]
#[command(name = "mcf-qkd", version, about = "QKD crosstalk, phase-noise threshold and multicore-fiber BPM runs")]
struct Cli {
    #[command(subcommand)]
    action: Action,
}

#[derive(Subcommand)]
enum Action {
    /// Execute the command named in a JSON config and write its artifacts.
    Run {
        config: PathBuf,
        /// Master seed; replaces the config's `seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; replaces the config's `output_dir`, which in
        /// turn replaces $MCF_QKD_OUTPUT_DIR.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Also write an SVG plot.
        #[arg(long)]
        plot: bool,
    },
    /// Report schema errors and physics warnings without running.
    Validate {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load(path: &PathBuf, overrides: &Overrides) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut config = RunConfig::from_json(&text).map_err(|e| e.to_string())?;
    config.apply(overrides);
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.action {
        Action::Run {
            config,
            seed,
            output_dir,
            plot,
        } => {
            let config = match load(&config, &Overrides { seed, output_dir }) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            match run(&config, &RunOptions { plot }) {
                Ok(summary) => {
                    for w in &summary.warnings {
                        eprintln!("{w}");
                    }
                    for f in &summary.files {
                        println!("{}", f.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
        Action::Validate { config, seed } => {
            let config = match load(&config, &Overrides { seed, output_dir: None }) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            let diagnostics = validate(&config);
            for d in &diagnostics {
                println!("{d}");
            }
            if has_errors(&diagnostics) {
                ExitCode::from(1)
            } else {
                println!("ok: {} config is valid", config.command());
                ExitCode::SUCCESS
            }
        }
    }
}

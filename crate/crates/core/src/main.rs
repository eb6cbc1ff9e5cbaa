use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mixed_eigen::coefficients::PRESETS;
use mixed_eigen::report::text_table;
use mixed_eigen::study::{load_config, run_study};
use mixed_eigen::Error;

#[derive(Parser)]
#[command(name = "mixed-eigen", version, about = "RT0 mixed finite element eigenvalue studies with Richardson extrapolation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the study described by a TOML configuration file.
    Run {
        config: PathBuf,
        /// Override the output directory.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Override the mesh levels, e.g. `8,16,32`.
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<usize>>,
        /// Override the number of eigenvalues.
        #[arg(long)]
        k: Option<usize>,
    },
    /// List the built-in problem presets.
    Presets,
}

const EXIT_CONFIG: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Presets => {
            let mut out = std::io::stdout().lock();
            for (name, desc) in PRESETS {
                let _ = writeln!(out, "{name:<10} {desc}");
            }
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            output_dir,
            levels,
            k,
        } => {
            let mut cfg = match load_config(&config) {
                Ok(cfg) => cfg,
                Err(e) => return fail(&e),
            };
            if let Some(dir) = output_dir {
                cfg.output_dir = dir;
            }
            if let Some(levels) = levels {
                cfg.levels = levels;
            }
            if let Some(k) = k {
                cfg.k = k;
            }
            if let Err(e) = cfg.validate() {
                return fail(&e);
            }
            match run_study(&cfg) {
                Ok(outcome) => {
                    // A closed pipe is not a study failure.
                    let mut out = std::io::stdout().lock();
                    let _ = write!(out, "{}", text_table(&outcome.report));
                    let _ = writeln!(out, "reports written to {}", cfg.output_dir.display());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_config() { EXIT_CONFIG } else { EXIT_NUMERICAL })
}

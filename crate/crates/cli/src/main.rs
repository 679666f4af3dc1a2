mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "gme-lab", version, about = "Multi-copy GME activation: thresholds, decompositions, witnesses")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,

    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override the numerical tolerance checked by the command.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct Grid {
    #[arg(long = "p-start", default_value_t = 0.0)]
    pub start: f64,
    #[arg(long = "p-stop", default_value_t = 1.0)]
    pub stop: f64,
    #[arg(long = "p-steps", default_value_t = 11)]
    pub steps: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Single-copy, k-copy and partition-separability thresholds.
    Thresholds {
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Last qubit count of the table (defaults to --n).
        #[arg(long = "n-max")]
        n_max: Option<usize>,
        #[arg(long, default_value_t = 3)]
        kmax: usize,
    },
    /// GM concurrence of isotropic GHZ states over a p grid.
    Concurrence {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[command(flatten)]
        grid: Grid,
    },
    /// Checks the biseparable two-copy decomposition over a p grid.
    VerifyDecomposition {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long = "p-start", default_value_t = 0.0)]
        start: f64,
        #[arg(long = "p-stop", default_value_t = 0.3)]
        stop: f64,
        #[arg(long = "p-steps", default_value_t = 7)]
        steps: usize,
    },
    /// Partial-transpose minimum eigenvalues across every bipartition.
    PptScan {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[command(flatten)]
        grid: Grid,
        /// Scan an imported density matrix (JSON) instead of the isotropic family.
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Closed-form and dense witness traces for triangle or wedge states.
    WitnessScan {
        #[arg(long, value_enum, default_value_t = WitnessMode::Triangle)]
        mode: WitnessMode,
        /// Fixed x; triangle defaults to 1, wedge defaults to x = y.
        #[arg(long)]
        x: Option<f64>,
        #[arg(long = "y-start", default_value_t = 0.2)]
        start: f64,
        #[arg(long = "y-stop", default_value_t = 0.6)]
        stop: f64,
        #[arg(long = "y-steps", default_value_t = 9)]
        steps: usize,
    },
    /// Runs the three-copy LOCC reduction and evaluates the witness.
    LoccDemo {
        /// Mixing probabilities p1,p2,p3.
        #[arg(long, value_delimiter = ',', default_values_t = [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0])]
        probs: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        x: f64,
        #[arg(long, default_value_t = 0.3)]
        y: f64,
        #[arg(long, default_value_t = 0.3)]
        z: f64,
        /// Write the resulting product-form state as JSON.
        #[arg(long)]
        export: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum WitnessMode {
    Triangle,
    Wedge,
}

fn run(cli: Cli) -> Result<String, commands::CliError> {
    commands::init_threads()?;
    let fmt = cli.format;
    let tol = cli.tol;
    match cli.command {
        Command::Thresholds { n, n_max, kmax } => commands::thresholds(n, n_max.unwrap_or(n), kmax, fmt),
        Command::Concurrence { n, grid } => commands::concurrence(n, &grid, tol, fmt),
        Command::VerifyDecomposition {
            n,
            start,
            stop,
            steps,
        } => commands::verify_decomposition(n, &Grid { start, stop, steps }, tol, fmt),
        Command::PptScan { n, grid, state } => match state {
            Some(path) => commands::ppt_scan_state(&path, tol, fmt),
            None => commands::ppt_scan(n, &grid, tol, fmt),
        },
        Command::WitnessScan {
            mode,
            x,
            start,
            stop,
            steps,
        } => commands::witness_scan(mode, x, &Grid { start, stop, steps }, tol, fmt),
        Command::LoccDemo {
            probs,
            x,
            y,
            z,
            export,
        } => commands::locc_demo(&probs, x, y, z, export.as_deref(), tol, fmt),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out.clone();
    match run(cli) {
        Ok(text) => {
            let written = match out {
                Some(path) => std::fs::write(&path, text)
                    .map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            match written {
                Ok(()) => ExitCode::SUCCESS,
                Err(msg) => {
                    eprintln!("error: {msg}");
                    ExitCode::from(1)
                }
            }
        }
        Err(e) => {
            if let commands::CliError::Contract { output, .. } = &e {
                print!("{output}");
            }
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

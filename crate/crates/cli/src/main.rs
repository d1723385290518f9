use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use defq_cli::{cmd_build, cmd_pair, cmd_verify, CliError, Outcome, Suite, TraceNormalization, U0Convention};

#[derive(Parser)]
#[command(name = "defq", version, about = "Fedosov constructions, cyclic suites and trace pairings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the Fedosov connection for a chart and report curvature residuals.
    Build {
        chart: PathBuf,
        #[arg(long, default_value_t = 4)]
        degree: i32,
        /// Override the chart's jet order.
        #[arg(long)]
        jet_order: Option<usize>,
    },
    /// Run a seeded exact property suite.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// hbar-scaling study of the pairing with the fundamental class.
    Pair {
        corpus: PathBuf,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value_t = 0.1)]
        hbar: f64,
        #[arg(long, default_value_t = 3)]
        halvings: usize,
        #[arg(long, value_enum, default_value_t)]
        trace_normalization: TraceNormalization,
        #[arg(long, value_enum, default_value_t)]
        u0_convention: U0Convention,
    },
}

fn read(path: &PathBuf) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Build { chart, degree, jet_order } => cmd_build(&read(chart)?, *degree, *jet_order),
        Command::Verify { suite, trials, seed } => Ok(cmd_verify(*suite, *trials, *seed)),
        Command::Pair { corpus, grid, hbar, halvings, trace_normalization, u0_convention } => {
            cmd_pair(&read(corpus)?, *grid, *hbar, *halvings, *trace_normalization, *u0_convention)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(outcome) => {
            let written = match &cli.out {
                Some(path) => std::fs::write(path, &outcome.text).map_err(|e| eprintln!("error: {}: {e}", path.display())),
                None => {
                    print!("{}", outcome.text);
                    Ok(())
                }
            };
            if written.is_err() {
                2
            } else {
                outcome.exit
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

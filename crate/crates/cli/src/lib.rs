//! Drivers behind the `defq` binary. Every command returns its report text
//! and an exit code; nothing here touches the filesystem.

pub mod build;
pub mod pair;
pub mod report;
pub mod suites;

use clap::ValueEnum;
use thiserror::Error;

pub use build::cmd_build;
pub use pair::cmd_pair;
pub use report::{Check, RunReport, Status};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("invalid chart: {0}")]
    Chart(#[from] defq::ChartError),
    #[error("invalid corpus: {0}")]
    Grid(#[from] defq::GridError),
    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Moyal,
    Cyclic,
    Charclass,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum TraceNormalization {
    #[default]
    Normalized,
    Unnormalized,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum U0Convention {
    #[default]
    Signed,
    Unsigned,
}

/// Output of one command.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub exit: i32,
}

pub fn cmd_verify(suite: Suite, trials: usize, seed: u64) -> Outcome {
    let (name, checks) = match suite {
        Suite::Moyal => ("moyal", suites::moyal(trials, seed)),
        Suite::Cyclic => ("cyclic", suites::cyclic(trials, seed)),
        Suite::Charclass => ("charclass", suites::charclass(trials, seed)),
    };
    let mut report = RunReport::new(&format!("verify {name}"), name.as_bytes()).param("trials", trials).param("seed", seed);
    report = match suite {
        Suite::Moyal => report.param("D", suites::MOYAL_DEGREE).param("fiber_degree", suites::MOYAL_FIBER_DEGREE),
        Suite::Cyclic => report
            .param("max_chain_length", suites::CHAIN_LENGTH)
            .param("chern_length", suites::CHERN_LENGTH)
            .param("projections", trials.min(suites::CHERN_PROJECTIONS)),
        Suite::Charclass => report.param("a_hat_order", suites::A_HAT_ORDER),
    };
    report.checks = checks;
    Outcome { exit: report.exit_code(), text: report.to_json() }
}

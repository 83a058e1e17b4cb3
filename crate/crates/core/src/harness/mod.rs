//! Experiment orchestration, statistics and reproducible output.
//!
//! Every replica draws from its own stream seeded by
//! [`replica_seed`](crate::rng::replica_seed)`(seed, index)`, so results do
//! not depend on how replicas are spread across worker threads.

pub mod experiments;
pub mod io;
pub mod stats;

use serde::Serialize;

pub use experiments::{run_experiment, EXPERIMENTS};
pub use io::{format_g15, read_rows, write_results};
pub use stats::{chi_square, ks_statistic, tail_cubic_fit};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub replica: u64,
    pub time: f64,
    pub observable: String,
    pub value: f64,
}

impl Row {
    pub fn new(replica: u64, time: f64, observable: impl Into<String>, value: f64) -> Self {
        Row {
            replica,
            time,
            observable: observable.into(),
            value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Verdict {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub name: String,
    pub seed: u64,
    /// Full configuration with defaults filled in; keys are sorted.
    pub config: serde_json::Value,
    pub rows: Vec<Row>,
    pub verdicts: Vec<Verdict>,
}

impl ExperimentResult {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }
}

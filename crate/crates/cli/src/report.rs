use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl Check {
    /// Exact check: passes when there is no witness.
    pub fn exact(name: &str, witness: Option<String>) -> Self {
        let status = if witness.is_some() { Status::Fail } else { Status::Pass };
        Self { name: name.into(), status, witness, error_norm: None, tolerance: None }
    }

    pub fn numeric(name: &str, error: f64, tolerance: f64) -> Self {
        let status = if error <= tolerance { Status::Pass } else { Status::Fail };
        Self { name: name.into(), status, witness: None, error_norm: Some(error), tolerance: Some(tolerance) }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub input_digest: String,
    pub parameters: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunReport {
    pub fn new(command: &str, input: &[u8]) -> Self {
        Self { command: command.into(), input_digest: digest(input), parameters: BTreeMap::new(), checks: Vec::new() }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.parameters.insert(key.into(), value.into());
        self
    }

    /// 0 when everything passed, 3 when something was inconclusive and
    /// nothing failed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.checks.iter().any(|c| c.status == Status::Fail) {
            1
        } else if self.checks.iter().any(|c| c.status == Status::Inconclusive) {
            3
        } else {
            0
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// the property being verified, in words
    pub property: String,
    pub status: Status,
    pub residual: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn within(name: &str, property: &str, residual: f64, tolerance: f64) -> Self {
        // non-finite residuals do not survive JSON
        let residual = if residual.is_finite() { residual } else { f64::MAX };
        let status = if residual <= tolerance { Status::Pass } else { Status::Fail };
        Check { name: name.into(), property: property.into(), status, residual, tolerance }
    }

    pub fn holds(name: &str, property: &str, ok: bool) -> Self {
        Check::within(name, property, if ok { 0.0 } else { 1.0 }, 0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub inputs: Vec<InputDigest>,
    pub status: Status,
    pub checks: Vec<Check>,
    /// command-specific values
    pub result: serde_json::Value,
    pub timing: Timing,
}

impl Report {
    pub fn new(command: &str, seed: Option<u64>, inputs: Vec<InputDigest>, checks: Vec<Check>, result: serde_json::Value) -> Self {
        let status = if checks.iter().all(|c| c.status == Status::Pass) { Status::Pass } else { Status::Fail };
        Report {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            inputs,
            status,
            checks,
            result,
            timing: Timing { elapsed_ms: 0.0 },
        }
    }
}

pub fn digest(path: &Path, bytes: &[u8]) -> InputDigest {
    let hash = Sha256::digest(bytes);
    InputDigest { path: path.display().to_string(), sha256: hash.iter().map(|b| format!("{:02x}", b)).collect() }
}

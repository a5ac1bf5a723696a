//! Run manifests: enough to reproduce any output of a run.

use serde::{Deserialize, Serialize};

use salem_core::ConstructionParams;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub module: String,
    /// What is being checked, in words.
    pub inequality: String,
    pub passed: bool,
    /// Smallest `1 - lhs/rhs` over the instances covered.
    pub worst_slack: Option<f64>,
    pub witness: Option<String>,
    pub detail: Option<String>,
}

impl CheckRecord {
    pub fn new(name: &str, module: &str, inequality: &str) -> Self {
        CheckRecord {
            name: name.into(),
            module: module.into(),
            inequality: inequality.into(),
            passed: true,
            worst_slack: None,
            witness: None,
            detail: None,
        }
    }

    /// Folds one instance in, keeping the smallest slack and its witness.
    pub fn record(&mut self, passed: bool, slack: f64, witness: impl FnOnce() -> String) {
        self.passed &= passed;
        if self.worst_slack.is_none_or(|s| slack < s) {
            self.worst_slack = Some(slack);
            self.witness = Some(witness());
        }
    }

    pub fn fail(&mut self, detail: impl Into<String>) {
        self.passed = false;
        self.detail = Some(detail.into());
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub salem_cli: String,
    pub salem_core: String,
}

impl Versions {
    pub fn current() -> Self {
        Versions {
            salem_cli: env!("CARGO_PKG_VERSION").into(),
            salem_core: salem_core::VERSION.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub params: ConstructionParams,
    pub started_at: String,
    pub finished_at: String,
    pub versions: Versions,
    pub checks: Vec<CheckRecord>,
    pub outputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit: Option<serde_json::Value>,
}

impl RunManifest {
    pub fn new(command: Vec<String>, params: ConstructionParams) -> Self {
        let now = timestamp();
        RunManifest {
            command,
            params,
            started_at: now.clone(),
            finished_at: now,
            versions: Versions::current(),
            checks: Vec::new(),
            outputs: Vec::new(),
            audit: None,
        }
    }

    pub fn finish(&mut self) {
        self.finished_at = timestamp();
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

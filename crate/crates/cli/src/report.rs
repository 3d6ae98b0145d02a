//! Machine-readable experiment reports.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub item: String,
    /// The statement this record exercises.
    pub anchor: String,
    pub pass: bool,
    pub values: BTreeMap<String, Value>,
    /// Grid sizes, quadrature settings, path counts: whatever reproduces the numbers.
    pub provenance: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Record {
    pub fn new(item: impl Into<String>, anchor: &str) -> Self {
        Record {
            item: item.into(),
            anchor: anchor.to_string(),
            pass: false,
            values: BTreeMap::new(),
            provenance: BTreeMap::new(),
            error: None,
        }
    }

    pub fn value(mut self, key: &str, v: impl Serialize) -> Self {
        self.values.insert(key.to_string(), serde_json::to_value(v).unwrap_or(Value::Null));
        self
    }

    pub fn prov(mut self, key: &str, v: impl Serialize) -> Self {
        self.provenance.insert(key.to_string(), serde_json::to_value(v).unwrap_or(Value::Null));
        self
    }

    pub fn with_provenance(mut self, p: &BTreeMap<String, Value>) -> Self {
        for (k, v) in p {
            self.provenance.entry(k.clone()).or_insert_with(|| v.clone());
        }
        self
    }

    pub fn pass(mut self, pass: bool) -> Self {
        self.pass = pass;
        self
    }

    pub fn failed(item: impl Into<String>, anchor: &str, err: impl std::fmt::Display) -> Self {
        let mut r = Record::new(item, anchor);
        r.error = Some(err.to_string());
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub records: Vec<Record>,
    pub artifacts: Vec<String>,
    pub summary: Summary,
    /// The only field that differs between reruns of the same config.
    pub wall_clock_seconds: f64,
}

impl Report {
    pub fn new(config: ExperimentConfig, records: Vec<Record>, artifacts: Vec<String>, wall: f64) -> Self {
        let passed = records.iter().filter(|r| r.pass).count();
        let summary = Summary { total: records.len(), passed, failed: records.len() - passed, pass: passed == records.len() };
        Report {
            tool: "bmolab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config,
            records,
            artifacts,
            summary,
            wall_clock_seconds: wall,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

//! Uniform JSON report and CSV emission for experiments.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Report {
    pub experiment: String,
    pub params: Value,
    pub seed: Option<u64>,
    pub estimates: BTreeMap<String, f64>,
    /// Confidence or acceptance intervals keyed like `estimates`.
    pub intervals: BTreeMap<String, (f64, f64)>,
    pub pass: bool,
    /// Full experiment output.
    #[serde(default)]
    pub detail: Value,
}

impl Report {
    pub fn new(experiment: &str, params: Value, seed: Option<u64>) -> Self {
        Report {
            experiment: experiment.to_string(),
            params,
            seed,
            estimates: BTreeMap::new(),
            intervals: BTreeMap::new(),
            pass: true,
            detail: Value::Null,
        }
    }

    pub fn estimate(&mut self, key: &str, value: f64, interval: Option<(f64, f64)>) -> &mut Self {
        self.estimates.insert(key.to_string(), value);
        if let Some(iv) = interval {
            self.intervals.insert(key.to_string(), iv);
        }
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Header line, then one line per row in shortest round-trip formatting.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "{}", header.join(","))?;
    for r in rows {
        let line: Vec<String> = r.iter().map(|x| format!("{x}")).collect();
        writeln!(f, "{}", line.join(","))?;
    }
    f.flush()?;
    Ok(())
}

//! Experiment reports and their JSON / CSV renderings.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Bumped whenever a CSV header changes.
pub const CSV_SCHEMA_VERSION: u32 = 1;

pub const CORRECTNESS_STRONG_HEADER: &[&str] =
    &["index", "class0", "class1", "comp", "comp_ciph", "agree"];
pub const CORRECTNESS_WEAK_HEADER: &[&str] = &["index", "m0", "m1", "expected", "got"];
pub const CORRECTNESS_DECRYPTION_HEADER: &[&str] = &["index", "message", "decrypted"];
pub const PAC_HEADER: &[&str] = &[
    "distribution",
    "trial",
    "threshold",
    "positives",
    "error",
    "exact",
    "one_sided_violations",
    "good",
];
pub const TRACE_HEADER: &[&str] = &[
    "trial",
    "well_spaced",
    "error",
    "accused",
    "good_and_untraced",
];
pub const GAMES_HEADER: &[&str] = &["game", "trials", "advantage", "ci_lo", "ci_hi"];
pub const TRANSCRIPT_HEADER: &[&str] = &["trial", "b", "guess", "win", "flagged"];
pub const HYBRID_EXHAUSTIVE_HEADER: &[&str] = &[
    "q",
    "pairs",
    "hybrids",
    "endpoint_failures",
    "ascending_failures",
    "adjacent_failures",
];
pub const HYBRID_SAMPLED_HEADER: &[&str] = &["trial", "q", "left", "right", "hybrids", "ok"];
pub const SQ_HEADER: &[&str] = &[
    "trial",
    "threshold",
    "recovered",
    "queries",
    "query_bound",
    "error",
    "params_recovered",
];
pub const VALIDSIG_LEARN_HEADER: &[&str] = &["distribution", "trial", "bottom", "error", "good"];
pub const VALIDSIG_TRACE_HEADER: &[&str] = &["trial", "dropped", "bottom", "accused"];
pub const VALIDSIG_FORGE_HEADER: &[&str] = &["learner", "trials", "attempts", "wins", "value"];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv of utf-8 fields"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub mode: String,
    pub config_hash: String,
    pub config: serde_json::Value,
    pub library_version: String,
    pub csv_schema: u32,
    pub wall_clock_secs: f64,
    /// `Some(false)` when a pass threshold for the experiment was missed.
    pub gate: Option<bool>,
    pub gate_detail: String,
    pub summary: serde_json::Value,
    pub tables: Vec<Table>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
    Both,
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    fn stem(&self) -> String {
        format!("{}_{}", self.experiment, self.mode)
    }

    /// Writes `<experiment>_<mode>.json` and one CSV per table; returns the
    /// paths written.
    pub fn write(&self, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut out = Vec::new();
        if matches!(format, OutputFormat::Json | OutputFormat::Both) {
            let p = dir.join(format!("{}.json", self.stem()));
            fs::write(&p, self.to_json()?)?;
            out.push(p);
        }
        if matches!(format, OutputFormat::Csv | OutputFormat::Both) {
            for t in &self.tables {
                let p = dir.join(format!("{}_{}.csv", self.stem(), t.name));
                fs::write(&p, t.to_csv()?)?;
                out.push(p);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_and_orders() {
        let mut t = Table::new("rows", &["a", "b"]);
        t.push(vec!["1".into(), "x,y".into()]);
        assert_eq!(t.to_csv().unwrap(), "a,b\n1,\"x,y\"\n");
    }
}

//! Result files: a full JSON record plus a flat CSV of headline numbers.

use std::path::{Path, PathBuf};

use hypermine::hypercore::GraphStats;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::{CliError, CliResult};

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// A rectangular table of already formatted cells.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("cells are UTF-8")
    }
}

/// Shortest text that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// One independently computed piece of an experiment (a fold set, a seed,
/// a β point, …).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitRecord {
    pub key: String,
    pub result: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRun {
    pub toolkit_version: String,
    pub config: ExperimentConfig,
    pub dataset_sha256: String,
    pub labels_sha256: Option<String>,
    pub graph: GraphStats,
    pub units: Vec<UnitRecord>,
    /// Task-specific aggregates.
    pub summary: serde_json::Value,
    /// Exactly the rows of the CSV file.
    pub headline: Table,
    pub wall_clock_seconds: f64,
    /// Extra CSV files written next to the main ones, by suffix.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub attachments: Vec<(String, Table)>,
}

/// Paths of the JSON and CSV files for a requested output path. A `.json`
/// or `.csv` extension picks that file and derives the other; anything else
/// is treated as a stem.
pub fn output_paths(out: &Path) -> (PathBuf, PathBuf) {
    match out.extension().and_then(|e| e.to_str()) {
        Some("json") => (out.to_path_buf(), out.with_extension("csv")),
        Some("csv") => (out.with_extension("json"), out.to_path_buf()),
        _ => {
            let mut json = out.as_os_str().to_owned();
            json.push(".json");
            let mut csv = out.as_os_str().to_owned();
            csv.push(".csv");
            (json.into(), csv.into())
        }
    }
}

/// `<stem>.<suffix>.csv` next to the CSV output.
pub fn attachment_path(out: &Path, suffix: &str) -> PathBuf {
    let (_, csv) = output_paths(out);
    csv.with_extension(format!("{suffix}.csv"))
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}

impl EvaluationRun {
    /// Writes the JSON, CSV and attachment files; returns the JSON and CSV paths.
    pub fn write(&self) -> CliResult<(PathBuf, PathBuf)> {
        let (json, csv) = output_paths(&self.config.output);
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Internal(e.to_string()))?;
        write_file(&json, &text)?;
        write_file(&csv, &self.headline.to_csv())?;
        for (suffix, table) in &self.attachments {
            write_file(&attachment_path(&self.config.output, suffix), &table.to_csv())?;
        }
        Ok((json, csv))
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: not a result file: {e}", path.display())))
    }
}

/// Hex SHA-256 of a file's bytes.
pub fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn sha256_str(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    hex::encode(h.finalize())
}

/// Outcome of re-checking a result file against the files it names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verification {
    pub problems: Vec<String>,
}

impl Verification {
    pub fn ok(&self) -> bool {
        self.problems.is_empty()
    }
}

/// Recomputes the dataset and label hashes recorded in `run` and checks that
/// the CSV next to it still matches the recorded headline.
pub fn verify(json_path: &Path) -> CliResult<Verification> {
    let run = EvaluationRun::read(json_path)?;
    let mut problems = Vec::new();
    match sha256_file(&run.config.dataset) {
        Ok(h) if h == run.dataset_sha256 => {}
        Ok(h) => problems.push(format!(
            "dataset {} hash {h} differs from recorded {}",
            run.config.dataset.display(),
            run.dataset_sha256
        )),
        Err(e) => problems.push(e.to_string()),
    }
    match (&run.config.labels, &run.labels_sha256) {
        (Some(p), Some(recorded)) => match sha256_file(p) {
            Ok(h) if &h == recorded => {}
            Ok(h) => problems.push(format!("labels {} hash {h} differs from recorded {recorded}", p.display())),
            Err(e) => problems.push(e.to_string()),
        },
        (Some(p), None) => problems.push(format!("labels {} named but no hash recorded", p.display())),
        _ => {}
    }
    let csv = json_path.with_extension("csv");
    match std::fs::read_to_string(&csv) {
        Ok(text) if text == run.headline.to_csv() => {}
        Ok(_) => problems.push(format!("{} does not match the recorded headline", csv.display())),
        Err(e) => problems.push(format!("{}: {e}", csv.display())),
    }
    Ok(Verification { problems })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sibling_paths() {
        assert_eq!(
            output_paths(Path::new("r/results.json")),
            (PathBuf::from("r/results.json"), PathBuf::from("r/results.csv"))
        );
        assert_eq!(
            output_paths(Path::new("chi.csv")),
            (PathBuf::from("chi.json"), PathBuf::from("chi.csv"))
        );
        assert_eq!(
            output_paths(Path::new("out/run1")),
            (PathBuf::from("out/run1.json"), PathBuf::from("out/run1.csv"))
        );
        assert_eq!(attachment_path(Path::new("a/r.json"), "assignments"), PathBuf::from("a/r.assignments.csv"));
    }

    #[test]
    fn csv_quotes_when_needed() {
        let mut t = Table::new(["node", "value"]);
        t.push(vec!["a,b".into(), num(0.1)]);
        t.push(vec!["c".into(), num(1.0)]);
        assert_eq!(t.to_csv(), "node,value\n\"a,b\",0.1\nc,1\n");
    }

    #[test]
    fn hashes_are_length_prefixed() {
        assert_ne!(sha256_str(&["ab", "c"]), sha256_str(&["a", "bc"]));
    }
}

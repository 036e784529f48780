//! Append-only JSONL checkpoints so interrupted experiments resume per unit.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use log::{info, warn};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::{CliError, CliResult};

#[derive(Serialize, Deserialize)]
struct Header {
    fingerprint: String,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    key: String,
    result: serde_json::Value,
}

/// Completed units of one experiment, keyed by unit name. The file is bound
/// to a configuration fingerprint; a file written for another configuration
/// is discarded.
pub struct Checkpoint {
    path: PathBuf,
    done: HashMap<String, serde_json::Value>,
    file: Mutex<File>,
}

impl Checkpoint {
    pub fn open(path: &Path, fingerprint: &str) -> CliResult<Self> {
        let mut done = HashMap::new();
        let mut fresh = true;
        if let Ok(f) = File::open(path) {
            let mut lines = BufReader::new(f).lines();
            let header: Option<Header> = lines.next().and_then(|l| l.ok()).and_then(|l| serde_json::from_str(&l).ok());
            if header.is_some_and(|h| h.fingerprint == fingerprint) {
                fresh = false;
                // A torn final line from an interrupted write is skipped.
                for line in lines.map_while(|l| l.ok()) {
                    if let Ok(e) = serde_json::from_str::<Entry>(&line) {
                        done.insert(e.key, e.result);
                    }
                }
                info!("resuming from {} with {} completed unit(s)", path.display(), done.len());
            } else {
                warn!("ignoring checkpoint {} written for a different configuration", path.display());
            }
        }
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
        }
        let ctx = || format!("opening checkpoint {}", path.display());
        let mut file = if fresh {
            File::create(path).map_err(|e| CliError::io(ctx(), e))?
        } else {
            OpenOptions::new().append(true).open(path).map_err(|e| CliError::io(ctx(), e))?
        };
        if fresh {
            let header = serde_json::to_string(&Header {
                fingerprint: fingerprint.to_string(),
            })
            .expect("header serializes");
            writeln!(file, "{header}").map_err(|e| CliError::io(ctx(), e))?;
        } else {
            // Start on a fresh line after a possibly torn entry.
            writeln!(file).map_err(|e| CliError::io(ctx(), e))?;
        }
        Ok(Self {
            path: path.to_path_buf(),
            done,
            file: Mutex::new(file),
        })
    }

    pub fn completed(&self) -> usize {
        self.done.len()
    }

    pub fn get<T: DeserializeOwned>(&self, key: &str) -> Option<T> {
        self.done.get(key).and_then(|v| serde_json::from_value(v.clone()).ok())
    }

    pub fn record<T: Serialize>(&self, key: &str, value: &T) -> CliResult<serde_json::Value> {
        let result = serde_json::to_value(value).map_err(|e| CliError::Internal(e.to_string()))?;
        let line = serde_json::to_string(&Entry {
            key: key.to_string(),
            result: result.clone(),
        })
        .map_err(|e| CliError::Internal(e.to_string()))?;
        let mut f = self.file.lock().expect("checkpoint lock");
        writeln!(f, "{line}")
            .and_then(|_| f.flush())
            .map_err(|e| CliError::io(format!("writing checkpoint {}", self.path.display()), e))?;
        Ok(result)
    }

    /// Computes every missing unit in parallel and returns all results in
    /// `keys` order.
    pub fn run_units<T, F>(&self, keys: &[String], compute: F) -> CliResult<Vec<T>>
    where
        T: Serialize + DeserializeOwned + Send,
        F: Fn(usize) -> CliResult<T> + Sync,
    {
        keys.par_iter()
            .enumerate()
            .map(|(i, key)| {
                if let Some(v) = self.get::<T>(key) {
                    return Ok(v);
                }
                let v = compute(i)?;
                self.record(key, &v)?;
                Ok(v)
            })
            .collect()
    }

    /// Removes the file once the experiment has completed.
    pub fn finish(self) -> CliResult<()> {
        drop(self.file);
        std::fs::remove_file(&self.path).map_err(|e| CliError::io(format!("removing {}", self.path.display()), e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    #[test]
    fn resumes_only_missing_units() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        let keys: Vec<String> = (0..6).map(|i| format!("u{i}")).collect();
        {
            let c = Checkpoint::open(&path, "fp").unwrap();
            c.record("u1", &10.5f64).unwrap();
            c.record("u4", &40.25f64).unwrap();
        }
        // Simulate a torn write.
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        write!(f, "{{\"key\":\"u5\",\"res").unwrap();
        drop(f);

        let calls = AtomicUsize::new(0);
        let c = Checkpoint::open(&path, "fp").unwrap();
        assert_eq!(c.completed(), 2);
        let out: Vec<f64> = c
            .run_units(&keys, |i| {
                calls.fetch_add(1, Ordering::Relaxed);
                Ok(i as f64)
            })
            .unwrap();
        assert_eq!(out, vec![0.0, 10.5, 2.0, 3.0, 40.25, 5.0]);
        assert_eq!(calls.load(Ordering::Relaxed), 4);
        drop(c);

        let c = Checkpoint::open(&path, "fp").unwrap();
        assert_eq!(c.completed(), 6);
        c.finish().unwrap();
        assert!(!path.exists());
    }

    #[test]
    fn other_fingerprint_starts_over() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        Checkpoint::open(&path, "a").unwrap().record("u", &1u32).unwrap();
        assert_eq!(Checkpoint::open(&path, "a").unwrap().completed(), 1);
        assert_eq!(Checkpoint::open(&path, "b").unwrap().completed(), 0);
    }
}

//! Run directories. Every artifact passes through one [`RunWriter`], which
//! writes nothing until the run is complete and lists each file in
//! `summary.json`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde_json::{json, Map, Value};

use crate::config::ConfigError;

pub const SUMMARY: &str = "summary.json";

pub struct RunWriter {
    dir: PathBuf,
    files: Vec<(String, String)>,
}

impl RunWriter {
    /// Refuses a non-empty `dir` unless `force`, which clears it.
    pub fn prepare(dir: &Path, force: bool) -> Result<Self> {
        if dir.exists() {
            let occupied = fs::read_dir(dir)
                .with_context(|| format!("reading {}", dir.display()))?
                .next()
                .is_some();
            if occupied && !force {
                return Err(ConfigError(format!(
                    "--out: {} is not empty; pass --force to replace it",
                    dir.display()
                ))
                .into());
            }
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn add(&mut self, name: &str, contents: String) {
        debug_assert!(name != SUMMARY && !self.files.iter().any(|(n, _)| n == name));
        self.files.push((name.to_string(), contents));
    }

    pub fn names(&self) -> Vec<String> {
        self.files.iter().map(|(n, _)| n.clone()).collect()
    }

    /// Writes all files and the summary; `summary` gains `files` and
    /// `created_unix`.
    pub fn finish(self, mut summary: Map<String, Value>) -> Result<PathBuf> {
        if self.dir.exists() {
            fs::remove_dir_all(&self.dir)
                .with_context(|| format!("clearing {}", self.dir.display()))?;
        }
        fs::create_dir_all(&self.dir)
            .with_context(|| format!("creating {}", self.dir.display()))?;
        for (name, contents) in &self.files {
            write_atomic(&self.dir.join(name), contents)?;
        }
        let created = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        summary.insert("files".into(), json!(self.names()));
        summary.insert("created_unix".into(), json!(created));
        let text = serde_json::to_string_pretty(&Value::Object(summary))?;
        write_atomic(&self.dir.join(SUMMARY), &(text + "\n"))?;
        Ok(self.dir)
    }
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("partial");
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))?;
    Ok(())
}

//! Output files with a shared header block, plus the run manifest.
//!
//! Files are buffered and only written once the command has finished, so a
//! failed run leaves nothing behind.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Overrides the default output directory when `--out` is not given.
pub const OUT_DIR_ENV: &str = "PRIMWALK_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "primwalk-out";

pub fn out_dir(flag: Option<&Path>) -> PathBuf {
    match flag {
        Some(p) => p.to_path_buf(),
        None => std::env::var_os(OUT_DIR_ENV).map_or_else(|| PathBuf::from(DEFAULT_OUT_DIR), PathBuf::from),
    }
}

pub struct Run {
    dir: PathBuf,
    command: String,
    stem: String,
    seed: Option<u64>,
    config: Value,
    threads: Option<usize>,
    files: Vec<(String, Vec<u8>)>,
}

#[derive(Serialize)]
struct ManifestEntry {
    file: String,
    sha256: String,
}

/// Record of one CLI invocation. `created_unix` is the only field that
/// changes between identical runs; it never enters an output digest.
#[derive(Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    version: &'a str,
    seed: Option<u64>,
    threads: Option<usize>,
    config: &'a Value,
    created_unix: u64,
    outputs: Vec<ManifestEntry>,
}

impl Run {
    pub fn new(dir: PathBuf, command: &str, stem: String, seed: Option<u64>, config: Value, threads: Option<usize>) -> Self {
        Self {
            dir,
            command: command.to_string(),
            stem,
            seed,
            config,
            threads,
            files: Vec::new(),
        }
    }

    pub fn stem(&self) -> &str {
        &self.stem
    }

    fn manifest_name(&self) -> String {
        format!("{}.manifest.json", self.stem)
    }

    fn header_lines(&self) -> Vec<String> {
        vec![
            format!("primwalk {}", env!("CARGO_PKG_VERSION")),
            format!("command: {}", self.command),
            format!("seed: {}", self.seed.map_or_else(|| "none".to_string(), |s| s.to_string())),
            format!("config: {}", self.config),
            format!("manifest: {}", self.manifest_name()),
        ]
    }

    /// CSV with a `#`-prefixed header block.
    pub fn csv<I>(&mut self, name: &str, columns: &[String], rows: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let mut buf = Vec::new();
        for line in self.header_lines() {
            buf.extend_from_slice(format!("# {line}\n").as_bytes());
        }
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(columns).map_err(csv_err)?;
        for row in rows {
            w.write_record(&row).map_err(csv_err)?;
        }
        let buf = w.into_inner().map_err(|e| CliError::Runtime(format!("csv: {e}")))?;
        self.files.push((name.to_string(), buf));
        Ok(())
    }

    /// JSON document `{"header": ..., "data": ...}`.
    pub fn json<T: Serialize>(&mut self, name: &str, data: &T) -> Result<(), CliError> {
        let doc = json!({
            "header": {
                "tool": "primwalk",
                "version": env!("CARGO_PKG_VERSION"),
                "command": self.command,
                "seed": self.seed,
                "config": self.config,
                "manifest": self.manifest_name(),
            },
            "data": data,
        });
        let mut buf = serde_json::to_vec_pretty(&doc).map_err(|e| CliError::Runtime(format!("json: {e}")))?;
        buf.push(b'\n');
        self.files.push((name.to_string(), buf));
        Ok(())
    }

    /// Writes every buffered file and the manifest; returns the paths written.
    pub fn finish(self) -> Result<Vec<PathBuf>, CliError> {
        std::fs::create_dir_all(&self.dir)
            .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", self.dir.display())))?;
        let mut written = Vec::new();
        let mut outputs = Vec::new();
        for (name, bytes) in &self.files {
            let path = self.dir.join(name);
            std::fs::write(&path, bytes).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
            outputs.push(ManifestEntry {
                file: name.clone(),
                sha256: hex::encode(Sha256::digest(bytes)),
            });
            written.push(path);
        }
        let created_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let manifest = RunManifest {
            command: &self.command,
            version: env!("CARGO_PKG_VERSION"),
            seed: self.seed,
            threads: self.threads,
            config: &self.config,
            created_unix,
            outputs,
        };
        let path = self.dir.join(self.manifest_name());
        let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Runtime(format!("json: {e}")))?;
        bytes.push(b'\n');
        std::fs::write(&path, bytes).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        written.push(path);
        Ok(written)
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Runtime(format!("csv: {e}"))
}

/// Column names `coord_1, ..., coord_d`.
pub fn coord_columns(d: usize) -> Vec<String> {
    (1..=d).map(|i| format!("coord_{i}")).collect()
}

pub fn cols(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

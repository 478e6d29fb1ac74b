//! Artifact files and the run manifest.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use hydrounit::{Error, Result};

/// Bumped whenever a CSV layout changes.
pub const CSV_FORMAT: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct OutputEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
    pub outputs: Vec<OutputEntry>,
}

pub struct Artifacts {
    dir: PathBuf,
    outputs: Vec<OutputEntry>,
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Config { path: path.display().to_string(), message: e.to_string() }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Shortest decimal that reads back to the same double.
pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

impl Artifacts {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        Ok(Self { dir: dir.to_path_buf(), outputs: Vec::new() })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| io_error(&path, e))?;
        self.outputs.push(OutputEntry { file: name.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() });
        Ok(())
    }

    /// CSV with a leading `# hydrounit <version> <kind> v<format>` comment line.
    pub fn csv(&mut self, name: &str, kind: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut buf = format!("# hydrounit {} {kind} v{CSV_FORMAT}\n", env!("CARGO_PKG_VERSION")).into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            let fail = |e: csv::Error| Error::Config { path: name.to_string(), message: e.to_string() };
            w.write_record(header).map_err(fail)?;
            for r in rows {
                w.write_record(r).map_err(fail)?;
            }
            w.flush().map_err(|e| Error::Config { path: name.to_string(), message: e.to_string() })?;
        }
        self.write(name, &buf)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).expect("artifact serializes");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Write `manifest.json` listing every artifact with its digest.
    pub fn finish(self, command: &str, config_sha256: String, seed: u64) -> Result<RunManifest> {
        let manifest = RunManifest {
            tool: "hydrounit",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config_sha256,
            seed,
            outputs: self.outputs,
        };
        let path = self.dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| io_error(&path, e))?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_roundtrip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(opt(None), "");
    }

    #[test]
    fn csv_has_versioned_comment_and_digest() {
        let dir = tempfile::tempdir().unwrap();
        let mut a = Artifacts::new(dir.path()).unwrap();
        a.csv("t.csv", "test", &["a", "b"], &[vec!["1".into(), "2".into()]]).unwrap();
        let text = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
        assert!(text.starts_with("# hydrounit "));
        assert!(text.contains("a,b\n1,2\n"));
        let m = a.finish("test", "abc".into(), 0).unwrap();
        assert_eq!(m.outputs[0].sha256, sha256_hex(text.as_bytes()));
        assert!(dir.path().join("manifest.json").exists());
    }
}

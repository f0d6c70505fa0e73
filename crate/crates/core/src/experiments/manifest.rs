use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, RunParameters};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileEntry {
    /// Path relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub experiment: String,
    pub tool_version: String,
    pub desk_scale: bool,
    pub parameters: RunParameters,
    pub overrides: BTreeMap<String, String>,
    pub wall_clock_seconds: f64,
    pub files: Vec<FileEntry>,
    /// Derived quantities reported by the experiment.
    pub summary: serde_json::Value,
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        let mut f = BufWriter::new(File::create(&path)?);
        serde_json::to_writer_pretty(&mut f, self).map_err(std::io::Error::from)?;
        writeln!(f)?;
        f.flush()?;
        Ok(path)
    }
}

pub fn sha256_file(path: &Path) -> Result<(String, u64)> {
    let bytes = std::fs::read(path)?;
    Ok((format!("{:x}", Sha256::digest(&bytes)), bytes.len() as u64))
}

/// Writes data files into one directory and remembers them for the
/// manifest.
pub struct OutputSink {
    dir: PathBuf,
    header: serde_json::Value,
    files: Vec<String>,
}

impl OutputSink {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        std::fs::create_dir_all(&config.out_dir)?;
        let header = serde_json::json!({
            "experiment": config.id.as_str(),
            "tool_version": env!("CARGO_PKG_VERSION"),
            "desk_scale": config.desk_scale,
            "parameters": config.params,
            "overrides": config.overrides,
        });
        Ok(OutputSink {
            dir: config.out_dir.clone(),
            header,
            files: Vec::new(),
        })
    }

    /// Single-line JSON metadata with file-specific entries added.
    pub fn metadata(&self, extra: serde_json::Value) -> String {
        let mut h = self.header.clone();
        if let (Some(obj), serde_json::Value::Object(more)) = (h.as_object_mut(), extra) {
            for (k, v) in more {
                obj.insert(k, v);
            }
        }
        h.to_string()
    }

    pub fn write<F>(&mut self, name: &str, body: F) -> Result<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> Result<()>,
    {
        let path = self.dir.join(name);
        let mut w = BufWriter::new(File::create(&path)?);
        body(&mut w)?;
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn finish(self, config: &ExperimentConfig, wall_clock_seconds: f64, summary: serde_json::Value) -> Result<RunManifest> {
        let mut files = Vec::with_capacity(self.files.len());
        for name in &self.files {
            let (sha256, bytes) = sha256_file(&self.dir.join(name))?;
            files.push(FileEntry {
                path: name.clone(),
                sha256,
                bytes,
            });
        }
        let manifest = RunManifest {
            experiment: config.id.as_str().to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            desk_scale: config.desk_scale,
            parameters: config.params.clone(),
            overrides: config.overrides.clone(),
            wall_clock_seconds,
            files,
            summary,
        };
        manifest.write(&self.dir)?;
        Ok(manifest)
    }
}

/// Filename-safe rendering of a number.
pub fn tag(x: f64) -> String {
    let s = format!("{x}");
    s.replace('-', "m").replace('.', "p")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags() {
        assert_eq!(tag(-1.0), "m1");
        assert_eq!(tag(0.7), "0p7");
        assert_eq!(tag(250.0), "250");
    }
}

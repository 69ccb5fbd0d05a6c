use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Failure;
use crate::Common;

#[derive(Debug, Clone, Serialize)]
pub struct Artifact {
    pub file: String,
    pub format: String,
    pub description: String,
}

/// Everything needed to rerun a command exactly.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<String>,
    pub seed: Option<u64>,
    pub out_dir: String,
    pub artifacts: Vec<Artifact>,
    pub version: String,
    pub config: serde_json::Value,
}

/// Output directory that records every file it writes.
pub struct Output {
    dir: PathBuf,
    artifacts: Vec<Artifact>,
}

fn out_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Output(format!("{}: {e}", path.display()))
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self, Failure> {
        fs::create_dir_all(dir).map_err(|e| out_err(dir, e))?;
        // Fail early rather than after a long computation.
        let probe = dir.join(".locinfo-write-test");
        fs::write(&probe, b"").map_err(|e| out_err(dir, e))?;
        let _ = fs::remove_file(&probe);
        Ok(Self {
            dir: dir.to_path_buf(),
            artifacts: Vec::new(),
        })
    }

    /// Writes `name` through `fill` and records it.
    pub fn write<F>(&mut self, name: &str, format: &str, description: &str, fill: F) -> Result<(), Failure>
    where
        F: FnOnce(&mut Vec<u8>) -> locinfo::Result<()>,
    {
        let mut buf = Vec::new();
        fill(&mut buf)?;
        let path = self.dir.join(name);
        fs::write(&path, &buf).map_err(|e| out_err(&path, e))?;
        self.artifacts.push(Artifact {
            file: name.to_string(),
            format: format.to_string(),
            description: description.to_string(),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, description: &str, value: &T) -> Result<(), Failure> {
        self.write(name, "json", description, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)?;
            Ok(())
        })
    }

    /// Writes `manifest.json`; always the last file of a run.
    pub fn finish<C: Serialize>(self, command: &str, common: &Common, seed: Option<u64>, config: &C) -> Result<(), Failure> {
        let manifest = RunManifest {
            command: command.to_string(),
            config_path: common.config.as_ref().map(|p| p.display().to_string()),
            seed,
            out_dir: self.dir.display().to_string(),
            artifacts: self.artifacts,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: serde_json::to_value(config).map_err(|e| Failure::Run(e.to_string()))?,
        };
        let path = self.dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| Failure::Run(e.to_string()))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| out_err(&path, e))
    }
}

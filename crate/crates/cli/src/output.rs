//! Output files stamped with the tool version and a hash of the resolved job.

use crate::error::CliError;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Scratch directory for staging outputs before they are moved into place.
pub const SCRATCH_ENV: &str = "DRIVEN_HYDROGEN_SCRATCH";

/// Shortest round-trip form of a float.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn config_hash(command: &str, job: &impl Serialize) -> Result<String, CliError> {
    let json = serde_json::to_string(job).map_err(|e| CliError::Config(e.to_string()))?;
    let mut h = Sha256::new();
    h.update(VERSION.as_bytes());
    h.update([0]);
    h.update(command.as_bytes());
    h.update([0]);
    h.update(json.as_bytes());
    Ok(h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect())
}

pub struct Output {
    dir: PathBuf,
    staging: Option<PathBuf>,
    command: String,
    hash: String,
    files: Vec<String>,
}

impl Output {
    pub fn new(dir: &Path, command: &str, job: &impl Serialize) -> Result<Self, CliError> {
        let hash = config_hash(command, job)?;
        fs::create_dir_all(dir)?;
        let staging = match std::env::var_os(SCRATCH_ENV) {
            Some(s) if !s.is_empty() => {
                let p = PathBuf::from(s).join(format!("driven-hydrogen-{command}-{hash}"));
                fs::create_dir_all(&p)?;
                Some(p)
            }
            _ => None,
        };
        let mut out = Self { dir: dir.to_path_buf(), staging, command: command.into(), hash, files: Vec::new() };
        let doc = serde_json::json!({
            "tool": "driven-hydrogen",
            "version": VERSION,
            "command": command,
            "config_hash": out.hash,
            "job": job,
        });
        let text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Config(e.to_string()))?;
        out.write_text("job.json", &(text + "\n"))?;
        Ok(out)
    }

    fn target(&self, name: &str) -> PathBuf {
        self.staging.as_ref().unwrap_or(&self.dir).join(name)
    }

    fn write_text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        fs::write(self.target(name), text)?;
        self.files.push(name.into());
        Ok(())
    }

    /// CSV with a comment line naming tool, version, config hash and schema.
    pub fn csv<I>(&mut self, name: &str, schema: &str, columns: &[&str], rows: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let mut file = fs::File::create(self.target(name))?;
        writeln!(
            file,
            "# driven-hydrogen {VERSION} command={} config={} schema={schema}",
            self.command, self.hash
        )?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(columns)?;
        for row in rows {
            debug_assert_eq!(row.len(), columns.len());
            w.write_record(&row)?;
        }
        w.flush()?;
        self.files.push(name.into());
        Ok(())
    }

    /// Move staged files into the output directory; returns their paths.
    pub fn finish(self) -> Result<Vec<PathBuf>, CliError> {
        if let Some(stage) = &self.staging {
            for f in &self.files {
                fs::copy(stage.join(f), self.dir.join(f))?;
            }
            fs::remove_dir_all(stage)?;
        }
        Ok(self.files.iter().map(|f| self.dir.join(f)).collect())
    }
}

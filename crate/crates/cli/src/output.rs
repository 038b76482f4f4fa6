use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::args::Format;
use crate::CliError;

/// Record of one run, written as `run.json` next to its outputs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    /// Arguments after the program name, as given.
    pub args: Vec<String>,
    pub params: Value,
    pub defaults: Value,
    pub seed: Option<u64>,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub outputs: Vec<String>,
    pub summary: Value,
    pub version: String,
}

pub(crate) fn now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64())
}

pub(crate) fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Collects the tables a command writes.
pub(crate) struct Output {
    dir: PathBuf,
    format: Format,
    pub files: Vec<String>,
}

impl Output {
    pub fn new(dir: &Path, format: Format) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        Ok(Output {
            dir: dir.to_path_buf(),
            format,
            files: Vec::new(),
        })
    }

    /// Writes `name.csv` from `rows`, or `name.json` from `value`.
    pub fn table<T: Serialize>(
        &mut self,
        name: &str,
        header: &[&str],
        rows: &[Vec<String>],
        value: &T,
    ) -> Result<(), CliError> {
        match self.format {
            Format::Csv => {
                let file = format!("{name}.csv");
                let path = self.dir.join(&file);
                let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
                w.write_record(header).map_err(|e| io_err(&path, e))?;
                for r in rows {
                    w.write_record(r).map_err(|e| io_err(&path, e))?;
                }
                w.flush().map_err(|e| io_err(&path, e))?;
                self.files.push(file);
            }
            Format::Json => self.json(&format!("{name}.json"), value)?,
        }
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, file: &str, value: &T) -> Result<(), CliError> {
        let path = self.dir.join(file);
        let text = serde_json::to_string_pretty(value).map_err(|e| io_err(&path, e))?;
        fs::write(&path, text + "\n").map_err(|e| io_err(&path, e))?;
        self.files.push(file.to_string());
        Ok(())
    }

    pub fn raw(
        &mut self,
        file: &str,
        write: impl FnOnce(fs::File) -> Result<(), CliError>,
    ) -> Result<(), CliError> {
        let path = self.dir.join(file);
        let f = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
        write(f)?;
        self.files.push(file.to_string());
        Ok(())
    }

    pub fn manifest(&self, manifest: &Manifest) -> Result<(), CliError> {
        let path = self.dir.join("run.json");
        let text = serde_json::to_string_pretty(manifest).map_err(|e| io_err(&path, e))?;
        fs::write(&path, text + "\n").map_err(|e| io_err(&path, e))
    }
}

pub(crate) fn num(x: f64) -> String {
    format!("{x}")
}

pub(crate) fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

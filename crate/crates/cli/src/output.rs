use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{RunConfig, FORMAT_VERSION};
use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Envelope shared by every JSON report.
#[derive(Debug, Serialize)]
pub struct Report<'a, T: Serialize> {
    pub format_version: u32,
    pub command: &'a str,
    pub version: &'a str,
    pub timestamp: String,
    pub config: &'a RunConfig,
    pub result: T,
}

pub struct Output {
    pub dir: PathBuf,
    pub written: Vec<PathBuf>,
}

impl Output {
    pub fn create(dir: PathBuf) -> Result<Output, CliError> {
        std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("output directory {}: {e}", dir.display())))?;
        Ok(Output { dir, written: Vec::new() })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.written.push(p.clone());
        p
    }

    pub fn json<T: Serialize>(&mut self, name: &str, command: &str, config: &RunConfig, result: T) -> Result<(), CliError> {
        let report = Report {
            format_version: FORMAT_VERSION,
            command,
            version: VERSION,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            config,
            result,
        };
        let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
        let p = self.path(name);
        std::fs::write(&p, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
    }

    /// Writes a CSV with a header row; numbers use the shortest exact representation.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<(), CliError> {
        let p = self.path(name);
        write_csv(&p, header, rows)
    }
}

pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|&v| fmt_num(v)))?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest round-trip representation, in scientific notation outside `[1e-3, 1e6)`.
pub fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-3..1e6).contains(&a) || !v.is_finite() {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

//! Run directories, manifests and CSV emission.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

/// Environment variable overriding the default output root.
pub const OUT_ENV: &str = "DICKMAN_OUT";
pub const DEFAULT_OUT: &str = "out";

/// Shortest decimal that parses back to the same f64.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        ryu::Buffer::new().format_finite(x).to_string()
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub subcommand: &'a str,
    pub config: &'a Value,
    pub master_seed: u64,
    pub version: &'a str,
    pub started_at: String,
    pub finished_at: String,
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// `<out>/<subcommand>-<seed>`; never overwritten.
#[derive(Debug, Clone)]
pub struct RunDir {
    path: PathBuf,
}

impl RunDir {
    pub fn path_for(out: &Path, subcommand: &str, seed: u64) -> PathBuf {
        out.join(format!("{subcommand}-{seed}"))
    }

    /// Fails early if the directory already exists.
    pub fn reserve(out: &Path, subcommand: &str, seed: u64) -> CliResult<Self> {
        let path = Self::path_for(out, subcommand, seed);
        if path.exists() {
            return Err(CliError::Io(format!("output directory {} already exists", path.display())));
        }
        Ok(RunDir { path })
    }

    /// Creates the directory. Errors if another run created it meanwhile.
    pub fn create(&self) -> CliResult<()> {
        if let Some(parent) = self.path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::create_dir(&self.path).map_err(|e| CliError::Io(format!("{}: {e}", self.path.display())))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn write_csv<I>(&self, name: &str, header: &[&str], rows: I) -> CliResult<()>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let mut w = csv::Writer::from_path(self.path.join(name))?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(self.path.join(name), text)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2.0, 1e-300, 6.02214076e23, -0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(fmt_f64(0.1), "0.1");
        assert_eq!(fmt_f64(1e-300), "1e-300");
    }
}

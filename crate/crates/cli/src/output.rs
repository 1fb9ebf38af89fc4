//! Report numbers, JSON/CSV writers and the output-directory lock.

use std::fs::{self, OpenOptions};
use std::io::ErrorKind;
use std::path::{Path, PathBuf};

use reflext::Real;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// A number as a decimal string with its binary precision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Num {
    pub value: String,
    pub precision: String,
}

/// Shortest round-tripping decimal form of a double.
pub fn decimal(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

pub fn num(x: f64) -> Num {
    Num { value: decimal(x), precision: "binary64".into() }
}

pub fn opt_num(x: Option<f64>) -> Option<Num> {
    x.map(num)
}

pub fn real(x: &Real) -> Num {
    Num { value: x.to_decimal(), precision: format!("binary{}", x.bits()) }
}

const LOCK_NAME: &str = ".reflext.lock";

/// An output directory held exclusively for one run.
#[derive(Debug)]
pub struct OutputDir {
    dir: PathBuf,
}

impl OutputDir {
    pub fn acquire(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(CliError::io(dir))?;
        let lock = dir.join(LOCK_NAME);
        match OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(_) => Ok(OutputDir { dir: dir.to_path_buf() }),
            Err(e) if e.kind() == ErrorKind::AlreadyExists => Err(CliError::Locked(dir.to_path_buf())),
            Err(e) => Err(CliError::io(lock)(e)),
        }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write_text(&self, name: &str, text: &str) -> CliResult<PathBuf> {
        let path = self.path(name);
        fs::write(&path, text).map_err(CliError::io(&path))?;
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<PathBuf> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::format(self.path(name), e))?;
        text.push('\n');
        self.write_text(name, &text)
    }

    /// Plain CSV with a header row.
    pub fn write_csv<S: AsRef<str>>(&self, name: &str, header: &[&str], rows: &[Vec<S>]) -> CliResult<PathBuf> {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::format(&path, e))?;
        w.write_record(header).map_err(|e| CliError::format(&path, e))?;
        for row in rows {
            w.write_record(row.iter().map(|s| s.as_ref())).map_err(|e| CliError::format(&path, e))?;
        }
        w.flush().map_err(CliError::io(&path))?;
        Ok(path)
    }
}

impl Drop for OutputDir {
    fn drop(&mut self) {
        let _ = fs::remove_file(self.dir.join(LOCK_NAME));
    }
}

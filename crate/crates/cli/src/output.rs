//! Atomic file output and fixed-precision CSV formatting.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Environment variable that replaces the default output directory.
pub const OUT_ENV: &str = "BURGERS_STEP_OUT";
pub const DEFAULT_OUT: &str = "out";

/// `--out` if given, else `$BURGERS_STEP_OUT`, else `./out`.
pub fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn write_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Write {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes through a temporary file in the same directory and renames it.
pub fn write_atomic(path: &Path, contents: &[u8]) -> CliResult<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(write_err(dir))?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(write_err(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// 17 significant digits, which round-trips every `f64`.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Accumulates CSV rows of numbers under a fixed header.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Csv { text }
    }

    pub fn row(&mut self, values: &[f64]) {
        for (i, v) in values.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            self.text.push_str(&fmt_num(*v));
        }
        self.text.push('\n');
    }

    /// A row whose last column is text.
    pub fn row_with_label(&mut self, values: &[f64], label: &str) {
        for v in values {
            let _ = write!(self.text, "{},", fmt_num(*v));
        }
        self.text.push_str(label);
        self.text.push('\n');
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        write_atomic(path, self.text.as_bytes())
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

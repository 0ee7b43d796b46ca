//! File writers. Every float goes out as `{:.16e}` (17 significant digits)
//! so reruns can be compared byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Collects the files a run produced, relative to the output directory.
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: PathBuf) -> Result<Self, CliError> {
        fs::create_dir_all(&root).map_err(|e| CliError::Output(format!("cannot create {}: {e}", root.display())))?;
        Ok(Self { root, written: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    fn put(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.root.join(name);
        fs::write(&path, contents).map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))?;
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_string());
        }
        Ok(())
    }

    /// Header line, then one row per record; numeric cells in `{:.16e}`.
    pub fn csv<I>(&mut self, name: &str, header: &[String], rows: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = Vec<f64>>,
    {
        let mut out = header.join(",");
        out.push('\n');
        for row in rows {
            debug_assert_eq!(row.len(), header.len());
            for (k, v) in row.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                write!(out, "{}", fmt_f64(*v)).unwrap();
            }
            out.push('\n');
        }
        self.put(name, &out)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
        text.push('\n');
        self.put(name, &text)
    }

    pub fn text(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        self.put(name, contents)
    }
}

/// `t, x1,y1,z1, …` for `n` vortices.
pub fn position_header(n: usize, prefix: &[&str]) -> Vec<String> {
    let mut h: Vec<String> = prefix.iter().map(|s| s.to_string()).collect();
    for k in 1..=n {
        for c in ["x", "y", "z"] {
            h.push(format!("{c}{k}"));
        }
    }
    h
}

//! CSV tables and the TOML metadata sidecar.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use toml::{Table, Value};

/// One output file: named columns of equal length.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    /// File stem appended to the run prefix.
    pub name: String,
    /// `(name, unit)` per column.
    pub columns: Vec<(String, String)>,
    pub rows: Vec<Vec<f64>>,
    /// `# key: value` lines written before the header.
    pub notes: Vec<(String, String)>,
}

impl CsvTable {
    pub fn new(name: &str, columns: &[(&str, &str)]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|(n, u)| (n.to_string(), u.to_string())).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn from_columns(name: &str, columns: &[(&str, &str)], data: &[&[f64]]) -> Self {
        let mut t = Self::new(name, columns);
        let n = data.first().map_or(0, |c| c.len());
        debug_assert!(data.iter().all(|c| c.len() == n));
        t.rows = (0..n).map(|k| data.iter().map(|c| c[k]).collect()).collect();
        t
    }

    pub fn note(mut self, key: &str, value: impl ToString) -> Self {
        self.notes.push((key.into(), value.to_string()));
        self
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.notes {
            let _ = writeln!(s, "# {k}: {v}");
        }
        let header: Vec<String> = self
            .columns
            .iter()
            .map(|(n, u)| if u.is_empty() { n.clone() } else { format!("{n} [{u}]") })
            .collect();
        s.push_str(&header.join(","));
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// Everything a run produces.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOutput {
    pub tables: Vec<CsvTable>,
    /// Scalar results for the sidecar's `[summary]`.
    pub summary: Table,
}

impl RunOutput {
    pub fn summary(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.insert(key.into(), value.into());
    }
}

/// Writes `<prefix>-<name>.csv` per table and `<prefix>.meta.toml`, returning
/// the paths written.
pub fn write_run(dir: &Path, prefix: &str, out: &RunOutput, mut meta: Table) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = Vec::new();
    let mut files = Vec::new();
    for t in &out.tables {
        let file = format!("{prefix}-{}.csv", t.name);
        let path = dir.join(&file);
        fs::write(&path, t.to_csv()).with_context(|| format!("writing {}", path.display()))?;
        files.push(Value::String(file));
        written.push(path);
    }
    meta.insert("files".into(), Value::Array(files));
    if !out.summary.is_empty() {
        meta.insert("summary".into(), Value::Table(out.summary.clone()));
    }
    let path = dir.join(format!("{prefix}.meta.toml"));
    fs::write(&path, meta.to_string()).with_context(|| format!("writing {}", path.display()))?;
    written.push(path);
    Ok(written)
}

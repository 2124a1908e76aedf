//! CSV reading and atomic file output.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use nmg_select::{CandidateMatrix, ObjectiveVector, SensorSet};
use tempfile::NamedTempFile;

/// Text of an output file: `# key=value` header lines, then CSV rows.
pub struct Report {
    text: String,
}

impl Report {
    pub fn new(config: &[(&str, String)]) -> Self {
        let mut text = String::new();
        for (k, v) in config {
            writeln!(text, "# {k}={v}").unwrap();
        }
        Report { text }
    }

    pub fn row<I, S>(&mut self, cells: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut first = true;
        for cell in cells {
            if !first {
                self.text.push(',');
            }
            self.text.push_str(cell.as_ref());
            first = false;
        }
        self.text.push('\n');
    }

    /// Writes to a temporary file next to `path`, then renames it into place.
    pub fn persist(self, path: &Path) -> Result<()> {
        persist_all(vec![(self, path)])
    }
}

/// Stages every report in a temporary file before renaming any, so a
/// failure leaves no partial set of outputs behind.
pub fn persist_all(reports: Vec<(Report, &Path)>) -> Result<()> {
    let mut staged = Vec::with_capacity(reports.len());
    for (report, path) in reports {
        let dir = match path.parent() {
            Some(d) if !d.as_os_str().is_empty() => d,
            _ => Path::new("."),
        };
        let mut tmp = NamedTempFile::new_in(dir)
            .with_context(|| format!("cannot create a file in {}", dir.display()))?;
        tmp.write_all(report.text.as_bytes())
            .and_then(|_| tmp.as_file().sync_all())
            .with_context(|| format!("cannot write {}", path.display()))?;
        staged.push((tmp, path));
    }
    for (tmp, path) in staged {
        tmp.persist(path)
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn objective_cells(v: &ObjectiveVector) -> [String; 3] {
    [num(v.log_det), num(v.trace_inv), num(v.lambda_min)]
}

pub fn indices_cell(set: &SensorSet) -> String {
    set.key()
        .indices()
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Parses a headerless matrix CSV, skipping `#` comment and blank lines.
pub fn read_matrix(path: &Path) -> Result<CandidateMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|cell| cell.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .with_context(|| format!("{}:{}: not a number", path.display(), lineno + 1))?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                bail!(
                    "{}:{}: expected {} columns, found {}",
                    path.display(),
                    lineno + 1,
                    first.len(),
                    row.len()
                );
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("{}: no matrix rows", path.display());
    }
    CandidateMatrix::from_rows(&rows).with_context(|| format!("invalid matrix in {}", path.display()))
}

pub fn write_matrix(u: &CandidateMatrix, config: &[(&str, String)], path: &Path) -> Result<()> {
    let mut report = Report::new(config);
    for i in 0..u.n() {
        report.row(u.row(i).iter().map(|&x| num(x)));
    }
    report.persist(path)
}

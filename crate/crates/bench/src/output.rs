//! CSV tables with a leading provenance comment.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    /// Appended to the output file stem for secondary tables.
    pub suffix: Option<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { suffix: None, header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn with_suffix(mut self, suffix: &str) -> Self {
        self.suffix = Some(suffix.to_string());
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Column `name` parsed as numbers (empty cells become NaN).
    pub fn numbers(&self, name: &str) -> Option<Vec<f64>> {
        let c = self.column(name)?;
        Some(self.rows.iter().map(|r| r[c].parse().unwrap_or(f64::NAN)).collect())
    }

    pub fn write<W: Write>(&self, w: W, provenance: &str) -> Result<()> {
        let mut w = w;
        writeln!(w, "# {provenance}")?;
        let mut csv = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        csv.write_record(&self.header)?;
        for r in &self.rows {
            csv.write_record(r)?;
        }
        csv.flush()?;
        Ok(())
    }
}

/// Shortest round-trip representation in scientific notation.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}

pub fn int(v: impl Into<u64>) -> String {
    v.into().to_string()
}

/// `out` for the primary table, `<stem>.<suffix>.csv` beside it otherwise.
pub fn table_path(out: &Path, suffix: Option<&str>) -> PathBuf {
    match suffix {
        None => out.to_path_buf(),
        Some(s) => {
            let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
            out.with_file_name(format!("{stem}.{s}.csv"))
        }
    }
}

/// Writes every table to its file, or all of them to stdout.
pub fn write_tables(tables: &[Table], out: Option<&Path>, provenance: &str) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    match out {
        None => {
            let stdout = io::stdout();
            for (i, t) in tables.iter().enumerate() {
                let mut lock = stdout.lock();
                if i > 0 {
                    writeln!(lock)?;
                }
                t.write(&mut lock, provenance)?;
            }
        }
        Some(out) => {
            for t in tables {
                let path = table_path(out, t.suffix.as_deref());
                let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                t.write(BufWriter::new(f), provenance)?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

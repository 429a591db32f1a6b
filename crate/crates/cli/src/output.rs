//! CSV and plot-data emission.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::CliError;

/// Rows already rendered to strings, in output order.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| *h == name)
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else if v == 0.0 {
        "0".into()
    } else {
        format!("{v:.16e}")
    }
}

fn header_line(hash: &str) -> String {
    format!("# config-hash: {hash}\n")
}

pub fn write_csv(dir: &Path, name: &str, hash: &str, table: &Table) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut buf = header_line(hash).into_bytes();
    {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut buf);
        w.write_record(&table.header).map_err(csv_err)?;
        for row in &table.rows {
            w.write_record(row).map_err(csv_err)?;
        }
        w.flush()?;
    }
    fs::write(&path, buf)?;
    Ok(path)
}

/// Whitespace-separated columns for gnuplot-style tools.
pub fn write_plot_data(dir: &Path, name: &str, hash: &str, table: &Table) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut f = fs::File::create(&path)?;
    f.write_all(header_line(hash).as_bytes())?;
    writeln!(f, "# {}", table.header.join(" "))?;
    for row in &table.rows {
        writeln!(f, "{}", row.join(" "))?;
    }
    Ok(path)
}

/// Contents of a file written by [`write_csv`].
#[derive(Debug, Clone, PartialEq)]
pub struct CsvFile {
    pub hash: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn read_csv(path: &Path) -> Result<CsvFile, CliError> {
    let text = fs::read_to_string(path)?;
    let (first, rest) = text.split_once('\n').unwrap_or((&text, ""));
    let hash = first.strip_prefix("# config-hash: ").unwrap_or_default().to_string();
    let mut r = csv::Reader::from_reader(rest.as_bytes());
    let header = r.headers().map_err(csv_err)?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(csv_err)?.iter().map(String::from).collect());
    }
    Ok(CsvFile { hash, header, rows })
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(std::io::Error::other(e))
}

//! Column-oriented time series with a CSV representation.
//!
//! Files start with optional `# key = value` metadata lines, then a header
//! row whose first column is `time_s`, then one row per sample. Values are
//! written with 17 significant digits.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSeries {
    /// Sample times, s.
    pub time: Vec<f64>,
    pub names: Vec<String>,
    /// One vector per name, each as long as `time`.
    pub columns: Vec<Vec<f64>>,
    pub metadata: BTreeMap<String, String>,
}

impl TimeSeries {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Self {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        Self {
            time: Vec::new(),
            columns: vec![Vec::new(); names.len()],
            names,
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<String>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn push(&mut self, t: f64, values: &[f64]) -> Result<()> {
        if values.len() != self.names.len() {
            return Err(Error::Contract(format!(
                "time series row has {} values for {} columns",
                values.len(),
                self.names.len()
            )));
        }
        self.time.push(t);
        for (col, &v) in self.columns.iter_mut().zip(values) {
            col.push(v);
        }
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
    }

    pub fn require(&self, name: &str) -> Result<&[f64]> {
        self.column(name).ok_or_else(|| {
            Error::Contract(format!(
                "time series has no column `{name}` (columns: {})",
                self.names.join(", ")
            ))
        })
    }

    /// Samples with `t0 <= t <= t1`, as `(times, values)`.
    pub fn window(&self, name: &str, t0: f64, t1: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let col = self.require(name)?;
        Ok(self
            .time
            .iter()
            .zip(col)
            .filter(|(&t, _)| t >= t0 && t <= t1)
            .map(|(&t, &v)| (t, v))
            .unzip())
    }

    pub fn to_csv(&self) -> String {
        let names: Vec<&str> = std::iter::once("time_s").chain(self.names.iter().map(String::as_str)).collect();
        let columns: Vec<&[f64]> = std::iter::once(&self.time[..]).chain(self.columns.iter().map(|c| &c[..])).collect();
        table_to_csv(&self.metadata, &names, &columns)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                fs::create_dir_all(dir)?;
            }
        }
        fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn parse_csv(text: &str, path: &Path) -> Result<Self> {
        let table = Table::parse_csv(text, path)?;
        if table.names.first().map(String::as_str) != Some("time_s") {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                message: format!("line {}: header must start with `time_s`", table.header_line),
            });
        }
        let mut columns = table.columns.into_iter();
        Ok(Self {
            time: columns.next().unwrap_or_default(),
            names: table.names[1..].to_vec(),
            columns: columns.collect(),
            metadata: table.metadata,
        })
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse_csv(&text, path)
    }
}

/// `# key = value` lines, a header row, then one row per sample, every
/// value with 17 significant digits.
pub fn table_to_csv(metadata: &BTreeMap<String, String>, names: &[&str], columns: &[&[f64]]) -> String {
    let mut out = String::new();
    for (k, v) in metadata {
        let _ = writeln!(out, "# {k} = {v}");
    }
    out.push_str(&names.join(","));
    out.push('\n');
    let rows = columns.first().map_or(0, |c| c.len());
    for i in 0..rows {
        for (j, col) in columns.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{:.16e}", col[i]);
        }
        out.push('\n');
    }
    out
}

/// A numeric CSV table with named columns.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
    pub metadata: BTreeMap<String, String>,
    /// 1-based line of the header row.
    pub header_line: usize,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|i| self.columns[i].as_slice())
    }

    pub fn parse_csv(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            message: format!("line {line}: {message}"),
        };
        let mut table: Option<Table> = None;
        let mut metadata = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                if table.is_some() {
                    return Err(err(line_no, "metadata after header".into()));
                }
                let (k, v) = meta
                    .split_once('=')
                    .ok_or_else(|| err(line_no, format!("metadata line without `=`: {line}")))?;
                metadata.insert(k.trim().to_string(), v.trim().to_string());
                continue;
            }
            match table.as_mut() {
                None => {
                    let names: Vec<String> = line.split(',').map(|c| c.trim().to_string()).collect();
                    if names.iter().any(String::is_empty) {
                        return Err(err(line_no, "empty column name in header".into()));
                    }
                    table = Some(Table {
                        columns: vec![Vec::new(); names.len()],
                        names,
                        metadata: std::mem::take(&mut metadata),
                        header_line: line_no,
                    });
                }
                Some(t) => {
                    let cells: Vec<&str> = line.split(',').collect();
                    if cells.len() != t.names.len() {
                        return Err(err(line_no, format!("{} fields, header has {}", cells.len(), t.names.len())));
                    }
                    for (c, (cell, col)) in cells.iter().zip(t.columns.iter_mut()).enumerate() {
                        let v: f64 = cell.trim().parse().map_err(|_| {
                            err(line_no, format!("column {}: `{}` is not a number", c + 1, cell.trim()))
                        })?;
                        col.push(v);
                    }
                }
            }
        }
        table.ok_or_else(|| err(0, "no header row".into()))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse_csv(&text, path)
    }

    pub fn to_csv(&self) -> String {
        let names: Vec<&str> = self.names.iter().map(String::as_str).collect();
        let columns: Vec<&[f64]> = self.columns.iter().map(|c| &c[..]).collect();
        table_to_csv(&self.metadata, &names, &columns)
    }
}

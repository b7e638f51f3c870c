//! Tables and atomic file emission.

use std::io::Write;
use std::path::Path;

use anyhow::Context;
use clap::ValueEnum;
use cposterior::io::format_f64;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// One table cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Field {
    Int(u64),
    Float(f64),
    Text(String),
}

impl Field {
    fn to_csv(&self) -> String {
        match self {
            Field::Int(v) => v.to_string(),
            Field::Float(v) => format_f64(*v),
            Field::Text(s) => s.clone(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Field::Int(v) => Value::from(*v),
            Field::Float(v) if v.is_finite() => Value::from(*v),
            Field::Float(v) => Value::from(format_f64(*v)),
            Field::Text(s) => Value::from(s.as_str()),
        }
    }
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Field::Float(v)
    }
}

impl From<usize> for Field {
    fn from(v: usize) -> Self {
        Field::Int(v as u64)
    }
}

impl From<u64> for Field {
    fn from(v: u64) -> Self {
        Field::Int(v)
    }
}

impl From<&str> for Field {
    fn from(v: &str) -> Self {
        Field::Text(v.to_string())
    }
}

impl From<String> for Field {
    fn from(v: String) -> Self {
        Field::Text(v)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Field>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Field>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self, format: Format) -> anyhow::Result<Vec<u8>> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.columns)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Field::to_csv))?;
                }
                Ok(w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)
            }
            Format::Json => {
                let rows: Vec<Value> =
                    self.rows.iter().map(|r| Value::Array(r.iter().map(Field::to_json).collect())).collect();
                let doc = serde_json::json!({ "columns": self.columns, "rows": rows });
                let mut bytes = serde_json::to_vec_pretty(&doc)?;
                bytes.push(b'\n');
                Ok(bytes)
            }
        }
    }
}

/// Writes via a temporary sibling file and a rename, so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let name = path.file_name().context("output path has no file name")?.to_string_lossy();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    {
        let mut f = std::fs::File::create(&tmp).with_context(|| format!("writing {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

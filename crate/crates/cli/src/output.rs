//! Result containers and their CSV/JSON encodings.

use std::io::{self, Write};
use std::path::Path;

use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Either a single keyed record or a table of rows.
#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Record(Vec<(String, Value)>),
    Table {
        columns: Vec<String>,
        rows: Vec<Vec<Value>>,
    },
}

impl Output {
    pub fn default_format(&self) -> Format {
        match self {
            Output::Record(_) => Format::Json,
            Output::Table { .. } => Format::Csv,
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }

    fn to_json(&self) -> String {
        let value = match self {
            Output::Record(fields) => Value::Object(fields.iter().cloned().collect::<Map<_, _>>()),
            Output::Table { columns, rows } => Value::Array(
                rows.iter()
                    .map(|r| Value::Object(columns.iter().cloned().zip(r.iter().cloned()).collect()))
                    .collect(),
            ),
        };
        let mut s = serde_json::to_string_pretty(&value).expect("values are serialisable");
        s.push('\n');
        s
    }

    fn to_csv(&self) -> String {
        let (columns, rows) = match self {
            Output::Record(fields) => {
                let (cols, vals): (Vec<_>, Vec<_>) = fields
                    .iter()
                    .flat_map(|(k, v)| flatten(k, v))
                    .unzip();
                (cols, vec![vals])
            }
            Output::Table { columns, rows } => (columns.clone(), rows.clone()),
        };
        let mut s = columns.join(",");
        s.push('\n');
        for row in rows {
            let cells: Vec<String> = row.iter().map(csv_cell).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// Arrays become `key_0, key_1, ...` columns in CSV.
fn flatten(key: &str, value: &Value) -> Vec<(String, Value)> {
    match value {
        Value::Array(items) => items
            .iter()
            .enumerate()
            .map(|(i, v)| (format!("{key}_{i}"), v.clone()))
            .collect(),
        other => vec![(key.to_string(), other.clone())],
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => {
            if n.is_f64() {
                format!("{:.16e}", n.as_f64().expect("f64 number"))
            } else {
                n.to_string()
            }
        }
        Value::String(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// JSON number for finite values; non-finite ones are spelled out as strings.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(x.to_string()))
}

pub fn opt_num(x: Option<f64>) -> Value {
    x.map(num).unwrap_or(Value::Null)
}

/// Write `contents` to `path` through a temporary file in the same
/// directory, so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

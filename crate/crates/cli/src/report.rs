//! Versioned JSON and CSV output.

use std::io::Write;

use serde_json::{Map, Number, Value};

pub const SCHEMA: &str = "clusterkit/v1";
pub const CSV_HEADER: &str = "# clusterkit v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Floats with 17 significant digits; non-finite values as strings.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        let text = format!("{x:.16e}");
        Value::Number(text.parse::<Number>().expect("formatted float parses"))
    } else if x.is_nan() {
        Value::String("nan".into())
    } else if x > 0.0 {
        Value::String("inf".into())
    } else {
        Value::String("-inf".into())
    }
}

pub fn int(x: impl Into<u128>) -> Value {
    Value::Number(x.into().to_string().parse::<Number>().expect("integer parses"))
}

pub fn text(s: impl Into<String>) -> Value {
    Value::String(s.into())
}

/// One command's output: scalar fields plus an optional table.
#[derive(Debug, Clone)]
pub struct Report {
    command: &'static str,
    fields: Vec<(String, Value)>,
    table: Option<Table>,
}

#[derive(Debug, Clone)]
struct Table {
    name: String,
    columns: Vec<String>,
    rows: Vec<Vec<Value>>,
}

impl Report {
    pub fn new(command: &'static str) -> Self {
        Self {
            command,
            fields: Vec::new(),
            table: None,
        }
    }

    pub fn field(mut self, key: &str, value: Value) -> Self {
        self.fields.push((key.to_string(), value));
        self
    }

    pub fn table(mut self, name: &str, columns: &[&str], rows: Vec<Vec<Value>>) -> Self {
        self.table = Some(Table {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows,
        });
        self
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("schema".into(), text(SCHEMA));
        m.insert("command".into(), text(self.command));
        for (k, v) in &self.fields {
            m.insert(k.clone(), v.clone());
        }
        if let Some(t) = &self.table {
            let rows = t
                .rows
                .iter()
                .map(|r| Value::Object(t.columns.iter().cloned().zip(r.iter().cloned()).collect()))
                .collect();
            m.insert(t.name.clone(), Value::Array(rows));
        }
        Value::Object(m)
    }

    pub fn write(&self, format: Format, out: &mut impl Write) -> std::io::Result<()> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, &self.to_json())?;
                writeln!(out)
            }
            Format::Csv => self.write_csv(out),
        }
    }

    fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "{CSV_HEADER} {}", self.command)?;
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
        match &self.table {
            Some(t) => {
                w.write_record(
                    std::iter::once("#".to_string()).chain(self.fields.iter().map(|(k, v)| format!("{k}={}", cell(v)))),
                )?;
                w.write_record(&t.columns)?;
                for r in &t.rows {
                    w.write_record(r.iter().map(cell))?;
                }
            }
            None => {
                w.write_record(self.fields.iter().map(|(k, _)| k.as_str()))?;
                w.write_record(self.fields.iter().map(|(_, v)| cell(v)))?;
            }
        }
        w.flush()
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        Value::Array(a) => a.iter().map(cell).collect::<Vec<_>>().join(";"),
        Value::Object(_) => v.to_string(),
        other => other.to_string(),
    }
}

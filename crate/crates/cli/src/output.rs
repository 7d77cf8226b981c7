//! Uniform CSV/JSON envelopes carrying the resolved configuration.

use std::io::{self, Write};

use erw_core::{fmt_f64, SCHEMA_VERSION};
use serde_json::{json, Map, Value};

use crate::args::Format;

/// A scalar echoed into output metadata.
#[derive(Debug, Clone, PartialEq)]
pub enum Meta {
    F(f64),
    U(u64),
    I(i64),
    S(String),
    B(bool),
    Missing,
}

impl Meta {
    fn text(&self) -> String {
        match self {
            Meta::F(x) => fmt_f64(*x),
            Meta::U(x) => x.to_string(),
            Meta::I(x) => x.to_string(),
            Meta::S(s) => s.clone(),
            Meta::B(b) => b.to_string(),
            Meta::Missing => "none".into(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Meta::F(x) => json!(x),
            Meta::U(x) => json!(x),
            Meta::I(x) => json!(x),
            Meta::S(s) => json!(s),
            Meta::B(b) => json!(b),
            Meta::Missing => Value::Null,
        }
    }
}

impl From<f64> for Meta {
    fn from(x: f64) -> Self {
        Meta::F(x)
    }
}
impl From<u64> for Meta {
    fn from(x: u64) -> Self {
        Meta::U(x)
    }
}
impl From<usize> for Meta {
    fn from(x: usize) -> Self {
        Meta::U(x as u64)
    }
}
impl From<i64> for Meta {
    fn from(x: i64) -> Self {
        Meta::I(x)
    }
}
impl From<bool> for Meta {
    fn from(b: bool) -> Self {
        Meta::B(b)
    }
}
impl From<&str> for Meta {
    fn from(s: &str) -> Self {
        Meta::S(s.to_string())
    }
}
impl From<String> for Meta {
    fn from(s: String) -> Self {
        Meta::S(s)
    }
}
impl<T: Into<Meta>> From<Option<T>> for Meta {
    fn from(v: Option<T>) -> Self {
        v.map_or(Meta::Missing, Into::into)
    }
}

/// Everything one subcommand produces.
#[derive(Debug, Default)]
pub struct Output {
    pub command: String,
    /// Resolved configuration, defaults included.
    pub config: Vec<(String, Meta)>,
    /// Scalar results reported next to the table.
    pub results: Vec<(String, Meta)>,
    pub csv: Vec<u8>,
    pub data: Value,
}

impl Output {
    pub fn new(command: &str) -> Self {
        Output {
            command: command.into(),
            data: Value::Null,
            ..Default::default()
        }
    }

    pub fn set(&mut self, key: &str, value: impl Into<Meta>) -> &mut Self {
        self.config.push((key.into(), value.into()));
        self
    }

    pub fn result(&mut self, key: &str, value: impl Into<Meta>) -> &mut Self {
        self.results.push((key.into(), value.into()));
        self
    }

    /// CSV: `# schema=1`, `# command=…`, one `# key=value` line per setting
    /// and `# result.key=value` per result, then the table.
    /// JSON: `{schema, command, config, results, data}`.
    pub fn write<W: Write>(&self, format: Format, mut w: W) -> io::Result<()> {
        match format {
            Format::Csv => {
                writeln!(w, "# schema={SCHEMA_VERSION}")?;
                writeln!(w, "# command={}", self.command)?;
                for (k, v) in &self.config {
                    writeln!(w, "# {k}={}", v.text())?;
                }
                for (k, v) in &self.results {
                    writeln!(w, "# result.{k}={}", v.text())?;
                }
                w.write_all(&self.csv)?;
            }
            Format::Json => {
                let collect = |items: &[(String, Meta)]| -> Map<String, Value> {
                    items.iter().map(|(k, v)| (k.clone(), v.json())).collect()
                };
                let doc = json!({
                    "schema": SCHEMA_VERSION,
                    "command": self.command,
                    "config": collect(&self.config),
                    "results": collect(&self.results),
                    "data": self.data,
                });
                serde_json::to_writer_pretty(&mut w, &doc)?;
                writeln!(w)?;
            }
        }
        w.flush()
    }
}

//! Report rendering. JSON and CSV are byte-stable for a fixed seed; floats
//! are pinned to 12 significant digits.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

use anyhow::Context;
use clap::ValueEnum;
use serde_json::{Map, Number, Value};
use zkqubit::estimation::{reports_to_csv, round_sig, FidelityReport};

pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Pretty,
}

/// Rounds every non-integer number in `value` to [`SIGNIFICANT_DIGITS`].
pub fn canonicalize(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().expect("f64 number"), SIGNIFICANT_DIGITS);
            Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonicalize).collect()),
        Value::Object(map) => Value::Object(
            map.into_iter()
                .map(|(k, v)| (k, canonicalize(v)))
                .collect::<Map<_, _>>(),
        ),
        other => other,
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some(String::new()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Header and one row built from the top-level scalar fields.
fn object_to_csv(value: &Value) -> String {
    let rows: Vec<&Value> = match value {
        Value::Array(items) => items.iter().collect(),
        other => vec![other],
    };
    let mut keys: Vec<&str> = Vec::new();
    if let Some(Value::Object(first)) = rows.first() {
        keys = first
            .iter()
            .filter(|(_, v)| scalar(v).is_some())
            .map(|(k, _)| k.as_str())
            .collect();
    }
    let mut out = keys.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = keys
            .iter()
            .map(|k| csv_field(&row.get(*k).and_then(scalar).unwrap_or_default()))
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn pretty(value: &Value, elapsed: Duration) -> String {
    let mut out = String::new();
    let items: Vec<&Value> = match value {
        Value::Array(items) => items.iter().collect(),
        other => vec![other],
    };
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        match item {
            Value::Object(map) => {
                for (k, v) in map {
                    let shown = scalar(v).unwrap_or_else(|| v.to_string());
                    let _ = writeln!(out, "{k:>24}: {shown}");
                }
            }
            other => {
                let _ = writeln!(out, "{other}");
            }
        }
    }
    let _ = writeln!(out, "{:>24}: {:.3}s", "elapsed", elapsed.as_secs_f64());
    out
}

/// A command result ready for rendering.
pub enum Report {
    Value(Value),
    Fidelity(Vec<FidelityReport>),
}

impl Report {
    pub fn from_serialize(v: &impl serde::Serialize) -> anyhow::Result<Self> {
        Ok(Report::Value(serde_json::to_value(v)?))
    }

    fn to_value(&self) -> anyhow::Result<Value> {
        Ok(match self {
            Report::Value(v) => v.clone(),
            Report::Fidelity(rs) if rs.len() == 1 => serde_json::to_value(&rs[0])?,
            Report::Fidelity(rs) => serde_json::to_value(rs)?,
        })
    }

    pub fn render(&self, format: Format, elapsed: Duration) -> anyhow::Result<String> {
        let value = canonicalize(self.to_value()?);
        Ok(match (format, self) {
            (Format::Json, _) => {
                let mut s = serde_json::to_string_pretty(&value)?;
                s.push('\n');
                s
            }
            (Format::Csv, Report::Fidelity(rs)) => reports_to_csv(rs),
            (Format::Csv, Report::Value(_)) => object_to_csv(&value),
            (Format::Pretty, _) => pretty(&value, elapsed),
        })
    }
}

pub fn emit(text: &str, output: Option<&Path>) -> anyhow::Result<()> {
    match output {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

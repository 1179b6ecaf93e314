//! Deterministic report emission: sorted keys and floats rounded to 12
//! significant digits.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Number, Value};

use crate::CliError;

/// Rounds to 12 significant digits. Non-finite values pass through.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Text form of a float for CSV cells.
pub fn fmt12(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        round12(x).to_string()
    }
}

/// Rounds every float in the tree. `serde_json` maps are ordered by key, so
/// the serialized form is canonical.
pub fn canonicalize(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap();
            Number::from_f64(round12(x)).map_or(Value::Null, Value::Number)
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

pub fn to_canonical<S: Serialize>(value: &S) -> Result<Value, CliError> {
    let v = serde_json::to_value(value).map_err(|e| CliError::Suite(format!("report serialization failed: {e}")))?;
    Ok(canonicalize(v))
}

pub fn canonical_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(&canonicalize(v.clone())).expect("JSON values always serialize");
    s.push('\n');
    s
}

pub fn write_json(path: &Path, v: &Value) -> Result<(), CliError> {
    fs::write(path, canonical_string(v)).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let out = |e: csv::Error| CliError::Output(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(out)?;
    w.write_record(header).map_err(out)?;
    for r in rows {
        w.write_record(r).map_err(out)?;
    }
    w.flush()
        .map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}

/// Flattens a JSON object into `key,value` rows, nested keys joined by `.`.
pub fn flatten(v: &Value) -> Vec<Vec<String>> {
    fn walk(prefix: &str, v: &Value, out: &mut Vec<Vec<String>>) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    let key = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    walk(&key, x, out);
                }
            }
            Value::String(s) => out.push(vec![prefix.to_string(), s.clone()]),
            Value::Number(n) => out.push(vec![
                prefix.to_string(),
                n.as_f64().filter(|_| n.is_f64()).map_or_else(|| n.to_string(), fmt12),
            ]),
            other => out.push(vec![prefix.to_string(), other.to_string()]),
        }
    }
    let mut out = Vec::new();
    walk("", v, &mut out);
    out
}

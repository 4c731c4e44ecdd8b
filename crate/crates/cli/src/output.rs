//! Result rendering. Floats are written in scientific notation with 17
//! significant digits; integers and strings (including exact "p/q"
//! rationals) as they are.

use std::fmt::Write as _;
use std::io::Write;

use anyhow::Result;
use serde_json::Value;
use tropibayes::sampler::SampleBatch;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

pub fn float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn number(n: &serde_json::Number) -> String {
    match (n.as_u64(), n.as_i64(), n.as_f64()) {
        (Some(u), _, _) => u.to_string(),
        (_, Some(i), _) => i.to_string(),
        (_, _, Some(f)) => float(f),
        _ => n.to_string(),
    }
}

fn write_json(out: &mut String, v: &Value, indent: usize) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Number(n) => out.push_str(&number(n)),
        Value::Array(xs) if xs.iter().all(|x| !x.is_object() && !x.is_array()) => {
            out.push('[');
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_json(out, x, indent);
            }
            out.push(']');
        }
        Value::Array(xs) => {
            out.push_str("[\n");
            for (i, x) in xs.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_json(out, x, indent + 1);
                out.push_str(if i + 1 < xs.len() { ",\n" } else { "\n" });
            }
            let _ = write!(out, "{}]", pad(indent));
        }
        Value::Object(m) if m.is_empty() => out.push_str("{}"),
        Value::Object(m) => {
            out.push_str("{\n");
            for (i, (k, x)) in m.iter().enumerate() {
                let _ = write!(out, "{}{}: ", pad(indent + 1), Value::String(k.clone()));
                write_json(out, x, indent + 1);
                out.push_str(if i + 1 < m.len() { ",\n" } else { "\n" });
            }
            let _ = write!(out, "{}}}", pad(indent));
        }
        other => out.push_str(&other.to_string()),
    }
}

pub fn json_string(v: &Value) -> String {
    let mut s = String::new();
    write_json(&mut s, v, 0);
    s.push('\n');
    s
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => number(n),
        Value::Bool(b) => b.to_string(),
        other => json_string(other).trim_end().replace('\n', "").replace("  ", ""),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        _ => out.push((prefix.to_string(), cell(v))),
    }
}

/// One header line and one row, with nested objects flattened to dotted keys.
/// A top-level array of objects becomes one row per element.
pub fn csv_string(v: &Value) -> Result<String> {
    let rows: Vec<&Value> = match v {
        Value::Array(xs) => xs.iter().collect(),
        _ => vec![v],
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    for (i, r) in rows.iter().enumerate() {
        let mut fields = Vec::new();
        flatten("", r, &mut fields);
        if i == 0 {
            w.write_record(fields.iter().map(|(k, _)| k.as_str()))?;
        }
        w.write_record(fields.iter().map(|(_, x)| x.as_str()))?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn render(v: &Value, format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(json_string(v)),
        Format::Csv => csv_string(v),
    }
}

/// Writes a sample batch as CSV with one row per draw.
pub fn write_batch<W: Write>(w: W, batch: &SampleBatch, num_vars: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    let mut header = vec!["index".to_string(), "sector".into(), "accepted".into(), "log_h".into()];
    header.extend((0..num_vars).map(|i| format!("log_x{i}")));
    w.write_record(&header)?;
    for (i, s) in batch.samples.iter().enumerate() {
        let mut row = vec![i.to_string(), s.sector.to_string(), (s.accepted as u8).to_string(), float(s.log_h)];
        row.extend(s.log_x.iter().map(|x| float(*x)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

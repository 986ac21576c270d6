//! Serialization with 17 significant digits, tables and run manifests.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::args::Format;
use crate::error::CliError;

/// `%.17g`, with a trailing `.0` on integral values so floats stay floats.
pub fn g17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{:.16e}", x);
    let (mant, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if mant.starts_with('-') { "-" } else { "" };
    let digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    let digits = digits.trim_end_matches('0');
    let body = if !(-5..17).contains(&exp) {
        let frac = if digits.len() > 1 { &digits[1..] } else { "0" };
        format!("{}.{}e{}", &digits[..1], frac, exp)
    } else if exp >= 0 {
        let e = exp as usize;
        if digits.len() > e + 1 {
            format!("{}.{}", &digits[..=e], &digits[e + 1..])
        } else {
            format!("{}{}.0", digits, "0".repeat(e + 1 - digits.len()))
        }
    } else {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    };
    format!("{sign}{body}")
}

fn write_json(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => out.push_str(&u.to_string()),
            (_, Some(i)) => out.push_str(&i.to_string()),
            _ => out.push_str(&g17(n.as_f64().expect("finite"))),
        },
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("strings serialize")),
        Value::Array(a) if a.is_empty() => out.push_str("[]"),
        Value::Array(a) if a.iter().all(|x| !x.is_array() && !x.is_object()) => {
            out.push('[');
            for (k, x) in a.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                write_json(x, indent, out);
            }
            out.push(']');
        }
        Value::Array(a) => {
            out.push_str("[\n");
            for (k, x) in a.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_json(x, indent + 1, out);
                out.push_str(if k + 1 < a.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(m) if m.is_empty() => out.push_str("{}"),
        Value::Object(m) => {
            out.push_str("{\n");
            for (k, (key, x)) in m.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&serde_json::to_string(key).expect("strings serialize"));
                out.push_str(": ");
                write_json(x, indent + 1, out);
                out.push_str(if k + 1 < m.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

/// Pretty JSON with sorted keys and `g17` floats. Non-finite floats are `null`.
pub fn to_json_text(v: &Value) -> String {
    let mut s = String::new();
    write_json(v, 0, &mut s);
    s.push('\n');
    s
}

pub fn value(x: &impl serde::Serialize) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

/// Column-major view of a result for CSV output.
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    fn cell(v: &Value) -> String {
        match v {
            Value::Null => String::new(),
            Value::String(s) => s.clone(),
            Value::Number(n) => match n.as_f64() {
                Some(_) if n.is_u64() || n.is_i64() => n.to_string(),
                Some(x) => g17(x),
                None => n.to_string(),
            },
            other => other.to_string(),
        }
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Input(format!("out: {e}"));
        w.write_record(&self.headers).map_err(io)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Table::cell)).map_err(io)?;
        }
        w.into_inner().map_err(|e| CliError::Input(format!("out: {e}")))
    }
}

/// What a subcommand hands back for writing.
pub struct Report {
    pub json: Value,
    pub table: Option<Table>,
    pub default_format: Format,
    /// Set when a self-check failed; outputs are still written.
    pub check_failure: Option<String>,
}

impl Report {
    pub fn json(json: Value) -> Self {
        Report {
            json,
            table: None,
            default_format: Format::Json,
            check_failure: None,
        }
    }

    pub fn table(json: Value, table: Table) -> Self {
        Report {
            json,
            table: Some(table),
            default_format: Format::Csv,
            check_failure: None,
        }
    }

    pub fn zero_timings(&mut self) {
        fn walk(v: &mut Value) {
            match v {
                Value::Object(m) => {
                    for (k, x) in m.iter_mut() {
                        if k == "runtime_ms" {
                            *x = json!(0);
                        } else {
                            walk(x);
                        }
                    }
                }
                Value::Array(a) => a.iter_mut().for_each(walk),
                _ => {}
            }
        }
        walk(&mut self.json);
        if let Some(t) = &mut self.table {
            if let Some(c) = t.headers.iter().position(|h| h == "runtime_ms") {
                t.rows.iter_mut().for_each(|r| r[c] = json!(0));
            }
        }
    }

    pub fn render(&self, format: Option<Format>) -> Result<Vec<u8>, CliError> {
        match (format.unwrap_or(self.default_format), &self.table) {
            (Format::Csv, Some(t)) => t.to_csv(),
            (Format::Csv, None) => Err(CliError::Input("format: this command has no tabular output; use json".into())),
            (Format::Json, _) => Ok(to_json_text(&self.json).into_bytes()),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn write_bytes(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::Input(format!("out: cannot write `{}`: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Input(format!("out: cannot write to stdout: {e}"))),
    }
}

pub fn manifest_path(manifest: Option<&Path>, out: Option<&Path>) -> Option<PathBuf> {
    match (manifest, out) {
        (Some(m), _) => Some(m.to_path_buf()),
        (None, Some(o)) => {
            let mut s = o.as_os_str().to_os_string();
            s.push(".manifest.json");
            Some(PathBuf::from(s))
        }
        (None, None) => None,
    }
}

/// Run manifest. Every field except `timestamp` is a function of argv and the
/// input files.
pub fn manifest(command: &str, config: Map<String, Value>, seed: u64, inputs: &[(String, String)], output: Option<&[u8]>) -> Value {
    let resolved = json!({ "command": command, "config": Value::Object(config) });
    let canonical = to_json_text(&resolved);
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    json!({
        "command": command,
        "config": resolved["config"],
        "config_hash": sha256_hex(canonical.as_bytes()),
        "seed": seed,
        "versions": { "maxrect": maxrect::VERSION, "maxrect-cli": env!("CARGO_PKG_VERSION") },
        "inputs": inputs.iter().map(|(p, h)| json!({ "path": p, "sha256": h })).collect::<Vec<_>>(),
        "output_sha256": output.map(sha256_hex),
        "timestamp": timestamp,
    })
}

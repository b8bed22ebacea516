//! Report assembly and byte-stable serialization.

use serde::Serialize;
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::Path;

use crate::config::{ExperimentConfig, UsageError};

/// Compact JSON with sorted keys and every float printed with 17
/// significant digits, so replays compare byte for byte.
pub fn canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v);
    out
}

fn write_value(out: &mut String, v: &Value) {
    match v {
        Value::Null | Value::Bool(_) | Value::String(_) => out.push_str(&v.to_string()),
        Value::Number(n) => match (n.as_u64(), n.as_i64(), n.as_f64()) {
            (Some(u), _, _) => write!(out, "{u}").unwrap(),
            (_, Some(i), _) => write!(out, "{i}").unwrap(),
            (_, _, Some(f)) => out.push_str(&float(f)),
            _ => out.push_str(&n.to_string()),
        },
        Value::Array(xs) => {
            out.push('[');
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(out, x);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_value(out, &map[k]);
            }
            out.push('}');
        }
    }
}

pub fn float(f: f64) -> String {
    format!("{f:.16e}")
}

/// One `metric,value` row of the human table and the summary CSV.
#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub metric: String,
    pub value: String,
}

pub struct Report {
    pub command: &'static str,
    pub config: ExperimentConfig,
    pub pass: bool,
    pub rows: Vec<Row>,
    pub data: Value,
    /// Extra files written next to the report: `(name, contents)`.
    pub files: Vec<(String, String)>,
}

impl Report {
    pub fn new(command: &'static str, config: ExperimentConfig) -> Self {
        Report { command, config, pass: true, rows: Vec::new(), data: Value::Null, files: Vec::new() }
    }

    pub fn row(&mut self, metric: &str, value: impl ToString) {
        self.rows.push(Row { metric: metric.into(), value: value.to_string() });
    }

    /// Record a checked claim; any failing claim fails the report.
    pub fn claim(&mut self, name: &str, ok: bool) {
        self.pass &= ok;
        self.row(name, if ok { "ok" } else { "VIOLATED" });
    }

    pub fn to_json(&self) -> String {
        let v = json!({
            "schema": "vbqc-report/1",
            "command": self.command,
            "seed": self.config.seed,
            "config_hash": self.config.content_hash(),
            "config": self.config,
            "pass": self.pass,
            "summary": self.rows,
            "data": self.data,
        });
        canonical_json(&v) + "\n"
    }

    pub fn summary_csv(&self) -> String {
        let mut s = String::from("metric,value\n");
        for r in &self.rows {
            writeln!(s, "{},{}", csv_field(&r.metric), csv_field(&r.value)).unwrap();
        }
        s
    }

    pub fn table(&self) -> String {
        let w = self.rows.iter().map(|r| r.metric.chars().count()).max().unwrap_or(0);
        let mut s = format!("{} (seed {}, config {})\n", self.command, self.config.seed.unwrap_or(0), &self.config.content_hash()[..12]);
        for r in &self.rows {
            let pad = w - r.metric.chars().count();
            writeln!(s, "  {}{}  {}", r.metric, " ".repeat(pad), r.value).unwrap();
        }
        s.push_str(if self.pass { "PASS\n" } else { "FAIL\n" });
        s
    }

    pub fn write_to(&self, dir: &Path) -> Result<(), UsageError> {
        std::fs::create_dir_all(dir).map_err(|e| UsageError(format!("{}: {e}", dir.display())))?;
        let put = |name: &str, body: &str| {
            std::fs::write(dir.join(name), body).map_err(|e| UsageError(format!("{}: {e}", dir.join(name).display())))
        };
        put("report.json", &self.to_json())?;
        put("summary.csv", &self.summary_csv())?;
        for (name, body) in &self.files {
            put(name, body)?;
        }
        Ok(())
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_are_pinned_and_keys_sorted() {
        let v = json!({"b": 0.1, "a": [1, -2, 2.5e-300], "c": null});
        assert_eq!(canonical_json(&v), r#"{"a":[1,-2,2.5000000000000000e-300],"b":1.0000000000000001e-1,"c":null}"#);
    }

    #[test]
    fn pinned_floats_round_trip() {
        for f in [0.1, 1.0 / 3.0, 6.02e23, -7.5e-12, 0.0] {
            let back: f64 = float(f).parse().unwrap();
            assert_eq!(back.to_bits(), f.to_bits());
        }
    }

    #[test]
    fn csv_quotes_commas() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("x"), "x");
    }
}

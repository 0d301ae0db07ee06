//! Experiment records and their JSON-lines and CSV exports.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    /// `<subcommand>/<index>`, zero-padded so that ids sort in run order.
    pub id: String,
    pub operation: String,
    pub params: BTreeMap<String, Value>,
    pub result: Value,
    pub runtime_seconds: f64,
    pub seed: Option<u64>,
    pub version: String,
    /// Set for verification records.
    pub pass: Option<bool>,
    /// The run stopped early; `result` holds the error.
    #[serde(default)]
    pub partial: bool,
}

pub fn write_jsonl(records: &[ExperimentRecord], out: &mut dyn Write) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut *out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
pub fn read_jsonl(text: &str) -> Result<Vec<ExperimentRecord>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).context("parsing a record"))
        .collect()
}

/// `%.12g`: 12 significant digits, trailing zeros dropped.
pub fn fmt_float(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let fixed = format!("{:.*}", (11 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        format!(
            "{}e{}{:02}",
            trim_zeros(mantissa),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        )
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => {
            let s = n.to_string();
            if s.contains(['.', 'e', 'E']) {
                n.as_f64().map(fmt_float).unwrap_or(s)
            } else {
                s
            }
        }
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

/// One CSV table: a header and rows of cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn from_maps(name: String, lead: &[&str], maps: &[BTreeMap<String, Value>]) -> Self {
        let mut header: Vec<String> = lead.iter().map(|s| s.to_string()).collect();
        for m in maps {
            for k in m.keys() {
                if !header.contains(k) {
                    header.push(k.clone());
                }
            }
        }
        let rows = maps
            .iter()
            .map(|m| {
                header
                    .iter()
                    .map(|h| m.get(h).map(cell).unwrap_or_default())
                    .collect()
            })
            .collect();
        Self { name, header, rows }
    }

    pub fn write(&self, out: &mut dyn Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn object(v: &Value) -> Option<&Map<String, Value>> {
    v.as_object()
}

/// CSV projection: one table per operation with the scalar parameters and
/// results, a `rows` table when results carry one, and a trend table
/// `(scale, count, slope, residual)` for every fitted trend.
pub fn csv_tables(records: &[ExperimentRecord]) -> Vec<Table> {
    let mut ops: Vec<&str> = records.iter().map(|r| r.operation.as_str()).collect();
    ops.dedup();
    let mut seen = Vec::new();
    let mut tables = Vec::new();
    for op in ops {
        if seen.contains(&op) {
            continue;
        }
        seen.push(op);
        let group: Vec<&ExperimentRecord> = records.iter().filter(|r| r.operation == op).collect();
        let mut main = Vec::new();
        let mut rows = Vec::new();
        let mut trend = Vec::new();
        for r in &group {
            let mut m = BTreeMap::new();
            m.insert("id".to_string(), Value::String(r.id.clone()));
            m.insert(
                "pass".to_string(),
                r.pass.map(Value::Bool).unwrap_or(Value::Null),
            );
            m.insert(
                "runtime_seconds".to_string(),
                serde_json::json!(r.runtime_seconds),
            );
            m.insert(
                "seed".to_string(),
                r.seed.map(Value::from).unwrap_or(Value::Null),
            );
            for (k, v) in &r.params {
                if scalar(v) {
                    m.insert(format!("param.{k}"), v.clone());
                } else {
                    m.insert(format!("param.{k}"), Value::String(v.to_string()));
                }
            }
            match &r.result {
                Value::Object(o) => {
                    for (k, v) in o {
                        if scalar(v) {
                            m.insert(k.clone(), v.clone());
                        }
                    }
                    if let Some(Value::Array(items)) = o.get("rows") {
                        for item in items.iter().filter_map(object) {
                            let mut row = BTreeMap::new();
                            row.insert("id".to_string(), Value::String(r.id.clone()));
                            for (k, v) in item {
                                row.insert(
                                    k.clone(),
                                    if scalar(v) {
                                        v.clone()
                                    } else {
                                        Value::String(v.to_string())
                                    },
                                );
                            }
                            rows.push(row);
                        }
                    }
                    if let Some(fit) = o.get("fit").and_then(object) {
                        let slope = fit.get("slope").cloned().unwrap_or(Value::Null);
                        let residual = fit.get("residual").cloned().unwrap_or(Value::Null);
                        for pt in fit
                            .get("points")
                            .and_then(Value::as_array)
                            .into_iter()
                            .flatten()
                        {
                            let (Some(lx), Some(ly)) = (
                                pt.get(0).and_then(Value::as_f64),
                                pt.get(1).and_then(Value::as_f64),
                            ) else {
                                continue;
                            };
                            let mut row = BTreeMap::new();
                            row.insert("id".to_string(), Value::String(r.id.clone()));
                            row.insert("scale".to_string(), serde_json::json!(lx.exp()));
                            row.insert("count".to_string(), serde_json::json!(ly.exp()));
                            row.insert("slope".to_string(), slope.clone());
                            row.insert("residual".to_string(), residual.clone());
                            trend.push(row);
                        }
                    }
                }
                v => {
                    m.insert("value".to_string(), v.clone());
                }
            }
            main.push(m);
        }
        let lead = ["id", "pass", "runtime_seconds", "seed"];
        tables.push(Table::from_maps(op.to_string(), &lead, &main));
        if !rows.is_empty() {
            tables.push(Table::from_maps(format!("{op}.rows"), &["id"], &rows));
        }
        if !trend.is_empty() {
            let lead = ["id", "scale", "count", "slope", "residual"];
            tables.push(Table::from_maps(format!("{op}.trend"), &lead, &trend));
        }
    }
    tables
}

/// Writes each table to `<stem>.<table>.csv` next to `out`.
pub fn write_csv_files(records: &[ExperimentRecord], out: &Path) -> Result<Vec<PathBuf>> {
    let stem = out.with_extension("");
    let mut written = Vec::new();
    for t in csv_tables(records) {
        let path = PathBuf::from(format!("{}.{}.csv", stem.display(), t.name));
        let mut f =
            std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        t.write(&mut f)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_float(0.724975), "0.724975");
        assert_eq!(fmt_float(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_float(-2.5e-9), "-2.5e-09");
        assert_eq!(fmt_float(6.02214076e23), "6.02214076e+23");
        assert_eq!(fmt_float(123456789012.0), "123456789012");
        assert_eq!(fmt_float(0.0), "0");
    }

    fn record(op: &str, result: Value) -> ExperimentRecord {
        ExperimentRecord {
            id: format!("{op}/0000"),
            operation: op.into(),
            params: BTreeMap::from([("form".to_string(), Value::from("fermat4"))]),
            result,
            runtime_seconds: 0.5,
            seed: Some(7),
            version: "0".into(),
            pass: Some(true),
            partial: false,
        }
    }

    #[test]
    fn jsonl_round_trip() {
        let recs = vec![
            record(
                "a",
                serde_json::json!({"value": 12345678901234567890123i128}),
            ),
            record("b", serde_json::json!([1.5, 2])),
        ];
        let mut buf = Vec::new();
        write_jsonl(&recs, &mut buf).unwrap();
        assert_eq!(
            read_jsonl(std::str::from_utf8(&buf).unwrap()).unwrap(),
            recs
        );
    }

    #[test]
    fn trend_table_columns() {
        let fit = serde_json::json!({
            "points": [[0.0, 1.0], [1.0, 0.5]],
            "slope": -0.5,
            "intercept": 1.0,
            "residual": 0.0,
            "window": null
        });
        let tables = csv_tables(&[record("sieve.b3", serde_json::json!({"z": 10, "fit": fit}))]);
        let names: Vec<&str> = tables.iter().map(|t| t.name.as_str()).collect();
        assert_eq!(names, ["sieve.b3", "sieve.b3.trend"]);
        assert_eq!(
            tables[1].header,
            ["id", "scale", "count", "slope", "residual"]
        );
        assert_eq!(tables[1].rows[0][1], "1");
        assert_eq!(tables[1].rows[1][3], "-0.5");
    }

    #[test]
    fn mixed_payloads_split_by_operation() {
        let recs = [
            record("expsum", serde_json::json!({"value": 3})),
            record("count", serde_json::json!({"raw": 5, "rows": [{"x": 1}]})),
        ];
        let tables = csv_tables(&recs);
        let names: Vec<&str> = tables.iter().map(|t| t.name.as_str()).collect();
        assert_eq!(names, ["expsum", "count", "count.rows"]);
        assert!(tables[0].header.contains(&"param.form".to_string()));
    }
}

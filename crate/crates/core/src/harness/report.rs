use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::numeric::ScaledReal;

pub const CSV_HEADER: &str = "N,log10_f,sign,scaled,limit,abs_err,condition,mu,nu,stderr,label";

/// One table row. `log10_f` and `sign` describe the raw (unnormalized) value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    #[serde(rename = "N")]
    pub n: u64,
    pub log10_f: f64,
    pub sign: i8,
    pub scaled: f64,
    pub limit: f64,
    pub abs_err: f64,
    pub condition: f64,
    pub mu: f64,
    pub nu: f64,
    pub stderr: f64,
    pub label: String,
}

impl Row {
    pub fn new(n: u64, raw: ScaledReal, scaled: f64, limit: f64, label: &str) -> Self {
        Self {
            n,
            log10_f: if raw.is_zero() { 0.0 } else { raw.log10_mag() },
            sign: raw.sign(),
            scaled,
            limit,
            abs_err: (scaled - limit).abs(),
            condition: 1.0,
            mu: 0.0,
            nu: 0.0,
            stderr: 0.0,
            label: label.to_string(),
        }
    }

    pub fn at(mut self, mu: f64, nu: f64) -> Self {
        self.mu = mu;
        self.nu = nu;
        self
    }

    pub fn with_condition(mut self, condition: f64) -> Self {
        self.condition = condition;
        self
    }

    pub fn with_stderr(mut self, stderr: f64) -> Self {
        self.stderr = stderr;
        self
    }

    fn floats(&self) -> [f64; 8] {
        [
            self.log10_f,
            self.scaled,
            self.limit,
            self.abs_err,
            self.condition,
            self.mu,
            self.nu,
            self.stderr,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.floats().iter().all(|x| x.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidArgument(format!("unknown format {other:?}"))),
        }
    }
}

/// Everything one command produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub params: BTreeMap<String, Value>,
    pub rows: Vec<Row>,
    pub diagnostics: BTreeMap<String, Value>,
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_clock_s: Option<f64>,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            params: BTreeMap::new(),
            rows: Vec::new(),
            diagnostics: BTreeMap::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_clock_s: None,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        self.params.insert(
            key.to_string(),
            serde_json::to_value(value).unwrap_or(Value::Null),
        );
    }

    pub fn diagnostic(&mut self, key: &str, value: impl Serialize) {
        self.diagnostics.insert(
            key.to_string(),
            serde_json::to_value(value).unwrap_or(Value::Null),
        );
    }

    /// Adds a row, or records it as flagged when it is not finite.
    pub fn push(&mut self, row: Row) {
        if row.is_finite() {
            self.rows.push(row);
        } else {
            self.flag(row.n, &row.label, "non-finite value".to_string());
        }
    }

    fn note(&mut self, key: &str, n: u64, label: &str, reason: String) {
        let entry = serde_json::json!({ "N": n, "label": label, "reason": reason });
        match self.diagnostics.get_mut(key) {
            Some(Value::Array(list)) => list.push(entry),
            _ => {
                self.diagnostics
                    .insert(key.into(), Value::Array(vec![entry]));
            }
        }
    }

    fn count(&self, key: &str) -> usize {
        match self.diagnostics.get(key) {
            Some(Value::Array(list)) => list.len(),
            _ => 0,
        }
    }

    /// Records a row that could not be produced.
    pub fn flag(&mut self, n: u64, label: &str, reason: String) {
        self.note("flagged", n, label, reason);
    }

    pub fn flagged(&self) -> usize {
        self.count("flagged")
    }

    /// Records a kept row whose value may have lost digits to cancellation.
    pub fn warn(&mut self, n: u64, label: &str, reason: String) {
        self.note("warnings", n, label, reason);
    }

    pub fn warnings(&self) -> usize {
        self.count("warnings")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{},{:e},{}", r.n, r.log10_f, r.sign);
            for x in [
                r.scaled,
                r.limit,
                r.abs_err,
                r.condition,
                r.mu,
                r.nu,
                r.stderr,
            ] {
                let _ = write!(out, ",{x:e}");
            }
            out.push(',');
            out.push_str(&csv_field(&r.label));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("malformed report: {e}")))
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Parses rows back out of [`RunReport::to_csv`] output.
pub fn parse_csv_rows(csv: &str) -> Result<Vec<Row>> {
    let mut lines = csv.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::InvalidArgument("missing CSV header".into()));
    }
    let bad = |what: &str| Error::InvalidArgument(format!("malformed CSV field {what}"));
    lines
        .map(|line| {
            let f: Vec<&str> = line.splitn(11, ',').collect();
            if f.len() != 11 {
                return Err(bad("count"));
            }
            let num = |i: usize| f[i].parse::<f64>().map_err(|_| bad(f[i]));
            Ok(Row {
                n: f[0].parse().map_err(|_| bad(f[0]))?,
                log10_f: num(1)?,
                sign: f[2].parse().map_err(|_| bad(f[2]))?,
                scaled: num(3)?,
                limit: num(4)?,
                abs_err: num(5)?,
                condition: num(6)?,
                mu: num(7)?,
                nu: num(8)?,
                stderr: num(9)?,
                label: match f[10].strip_prefix('"').and_then(|s| s.strip_suffix('"')) {
                    Some(inner) => inner.replace("\"\"", "\""),
                    None => f[10].to_string(),
                },
            })
        })
        .collect()
}

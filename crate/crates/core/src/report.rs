//! Report documents and their JSON / CSV renderings.
//!
//! JSON objects are emitted with keys in alphabetical order and every
//! floating-point number as `d.dddddddddddddddde±x` (17 significant digits);
//! non-finite values become `null`. CSV numbers use the same format, so the
//! two renderings carry identical values.

use serde::Serialize;
use serde_json::{Map, Number, Value};

use crate::bounds::BoundReport;
use crate::error::{Error, Result};
use crate::harness::{Finding, TrialBatch, TrialConfig, TrialRecord};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// The fixed CSV header.
pub const CSV_HEADER: [&str; 14] = [
    "suite",
    "trial",
    "family",
    "params",
    "a",
    "b",
    "p",
    "q",
    "lhs",
    "rhs",
    "margin",
    "hypotheses_ok",
    "sign",
    "status",
];

/// 17 significant digits in scientific notation with a signed exponent.
pub fn format_f64(x: f64) -> String {
    let s = format!("{x:.16e}");
    match s.split_once('e') {
        Some((m, e)) if !e.starts_with('-') => format!("{m}e+{e}"),
        _ => s,
    }
}

fn normalize(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            if x.is_finite() {
                Value::Number(format_f64(x).parse::<Number>().expect("valid JSON number"))
            } else {
                Value::Null
            }
        }
        Value::Array(items) => Value::Array(items.into_iter().map(normalize).collect()),
        Value::Object(map) => Value::Object(
            map.into_iter()
                .map(|(k, v)| (k, normalize(v)))
                .collect::<Map<_, _>>(),
        ),
        other => other,
    }
}

/// Deterministic pretty JSON for any serializable value.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::config(format!("serialize: {e}")))?;
    let mut s = serde_json::to_string_pretty(&normalize(v))
        .map_err(|e| Error::config(format!("serialize: {e}")))?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport<'a> {
    pub suite: String,
    pub asserted: bool,
    pub summary: &'a crate::harness::Summary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<&'a [TrialRecord]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

/// Top-level document of `verify`.
#[derive(Debug, Clone, Serialize)]
pub struct ReportDocument<'a> {
    pub version: &'static str,
    pub config: &'a TrialConfig,
    pub suites: Vec<SuiteReport<'a>>,
    pub findings: &'a [Finding],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

impl<'a> ReportDocument<'a> {
    /// `per_trial` includes every record; `timing` adds wall times and the
    /// given timestamp, which makes the output time-dependent.
    pub fn new(
        config: &'a TrialConfig,
        batches: &'a [TrialBatch],
        findings: &'a [Finding],
        per_trial: bool,
        timestamp: Option<String>,
    ) -> Self {
        let timing = timestamp.is_some();
        ReportDocument {
            version: VERSION,
            config,
            suites: batches
                .iter()
                .map(|b| SuiteReport {
                    suite: b.suite.to_string(),
                    asserted: b.asserted,
                    summary: &b.summary,
                    trials: per_trial.then_some(b.records.as_slice()),
                    wall_time_ms: timing.then_some(b.wall_time_ms as u64),
                })
                .collect(),
            findings,
            timestamp,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        to_json(self)
    }
}

/// One CSV row, in header order.
pub type CsvRow = [String; 14];

fn opt(x: Option<f64>) -> String {
    x.map(format_f64).unwrap_or_default()
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format_f64(x)
    } else {
        String::new()
    }
}

pub fn record_row(r: &TrialRecord) -> CsvRow {
    let (family, params) = match &r.instance.phi {
        Some(phi) => (
            "jensen".to_string(),
            format!("{phi} | {}", r.instance.function),
        ),
        None => (
            r.instance.function.family().to_string(),
            r.instance.function.params(),
        ),
    };
    [
        r.suite.to_string(),
        r.trial.to_string(),
        family,
        params,
        num(r.instance.a),
        num(r.instance.b),
        opt(r.instance.p),
        opt(r.instance.q),
        num(r.lhs),
        num(r.rhs),
        num(r.margin),
        r.hypotheses_ok.to_string(),
        r.sign.map(|s| s.name().to_string()).unwrap_or_default(),
        r.status.name().to_string(),
    ]
}

pub fn bound_row(r: &BoundReport, status: &str) -> CsvRow {
    [
        r.theorem.to_string(),
        "0".to_string(),
        r.function.family().to_string(),
        r.function.params(),
        num(r.a),
        num(r.b),
        opt(r.p),
        opt(r.q),
        num(r.lhs_abs),
        num(r.rhs),
        num(r.margin),
        r.hypotheses.overall.to_string(),
        r.sign_convention
            .map(|s| s.name().to_string())
            .unwrap_or_default(),
        status.to_string(),
    ]
}

pub fn write_csv<'a>(rows: impl IntoIterator<Item = &'a CsvRow>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::config(format!("csv: {e}"));
    w.write_record(CSV_HEADER).map_err(io)?;
    for row in rows {
        w.write_record(row).map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::config(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::config(format!("csv: {e}")))
}

/// Every record of every batch as CSV.
pub fn batches_csv(batches: &[TrialBatch]) -> Result<String> {
    let rows: Vec<CsvRow> = batches
        .iter()
        .flat_map(|b| b.records.iter().map(record_row))
        .collect();
    write_csv(&rows)
}

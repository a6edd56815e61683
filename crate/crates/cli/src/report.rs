//! Structured command output.
//!
//! Every report is built as one serializable value. JSON output prints it
//! directly; text output flattens the same value into `key value` lines, with
//! floating-point numbers written to 17 significant digits so both formats
//! carry the same numbers.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use dper_core::executor::SolveStats;

/// Bumped whenever a field is renamed, removed or changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Serialize)]
pub struct StatsReport {
    pub tree_nodes: usize,
    pub peak_diagram_nodes: usize,
    pub max_support: usize,
    pub store_nodes: usize,
    pub dsgn_entries: usize,
}

impl From<&SolveStats> for StatsReport {
    fn from(s: &SolveStats) -> Self {
        StatsReport {
            tree_nodes: s.tree_nodes,
            peak_diagram_nodes: s.peak_diagram_nodes,
            max_support: s.max_support,
            store_nodes: s.store_nodes,
            dsgn_entries: s.dsgn_entries,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub planning_seconds: Option<f64>,
    pub execution_seconds: Option<f64>,
    pub total_seconds: f64,
}

/// Re-evaluation of the returned maximizer by enumeration.
#[derive(Debug, Clone, Serialize)]
pub struct Verification {
    pub weighted_count: f64,
    pub agrees: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub input: String,
    /// `ok`, `deadline`, `resource`, `input-error` or `assertion`.
    pub status: String,
    pub maximum: Option<f64>,
    /// Signed literals in ascending variable order.
    pub maximizer: Option<Vec<i64>>,
    pub width: Option<usize>,
    pub heuristic: String,
    pub seed: Option<u64>,
    pub debug_assert: bool,
    pub timings: Timings,
    pub stats: Option<StatsReport>,
    pub verification: Option<Verification>,
    pub error: Option<String>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PlanReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub input: String,
    pub heuristic: String,
    pub seed: Option<u64>,
    pub width: usize,
    pub tree_nodes: usize,
    pub planning_seconds: f64,
    pub tree_out: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub input: String,
    pub maximum: f64,
    pub maximizers: Vec<Vec<i64>>,
}

/// `x` with 17 significant digits, in positional notation when that stays
/// short.
pub fn sig17(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-6..17).contains(&exp) {
        format!("{:.*}", (16 - exp) as usize, x)
    } else {
        format!("{x:.16e}")
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => "-".to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match (n.as_i64(), n.as_u64(), n.as_f64()) {
            (Some(i), _, _) => i.to_string(),
            (_, Some(u), _) => u.to_string(),
            (_, _, Some(f)) => sig17(f),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(scalar).collect::<Vec<_>>().join(" "),
        Value::Object(_) => unreachable!("objects are flattened"),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, child, out);
            }
        }
        Value::Array(items) if items.iter().any(|i| i.is_object() || i.is_array()) => {
            for (i, item) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), item, out);
            }
        }
        _ => writeln!(out, "{prefix} {}", scalar(v)).expect("string write"),
    }
}

pub fn render<T: Serialize>(report: &T, format: Format) -> String {
    let value = serde_json::to_value(report).expect("reports serialize");
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&value).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut out = String::new();
            flatten("", &value, &mut out);
            out
        }
    }
}

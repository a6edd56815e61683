//! Benchmark sweeps: PAR-2 scoring, confidence intervals and reference
//! answer checks.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::run::{run, RunOptions};
use dper_core::formula::parse_problem_with;

/// Answers further than this from the reference are disqualified.
pub const REFERENCE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub name: String,
    pub solved: bool,
    pub seconds: f64,
    pub answer: Option<f64>,
    pub width: Option<usize>,
    /// Largest intermediate diagram, in nodes.
    pub peak_nodes: Option<usize>,
    /// Total nodes created; a proxy for peak memory.
    pub store_nodes: Option<usize>,
    /// `ok`, `deadline`, `resource`, `input-error`, `assertion` or
    /// `disqualified`.
    pub status: String,
}

impl BenchRecord {
    pub fn unsolved(name: impl Into<String>, seconds: f64, status: &str) -> Self {
        BenchRecord {
            name: name.into(),
            solved: false,
            seconds,
            answer: None,
            width: None,
            peak_nodes: None,
            store_nodes: None,
            status: status.to_string(),
        }
    }
}

/// Wall time if solved, twice the deadline otherwise.
pub fn par2(record: &BenchRecord, deadline: f64) -> f64 {
    if record.solved {
        record.seconds
    } else {
        2.0 * deadline
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchSummary {
    pub records: Vec<BenchRecord>,
    pub deadline: f64,
    pub solved: usize,
    pub disqualified: usize,
    pub mean_par2: f64,
    /// 95% Student-t interval of the mean; absent with fewer than two
    /// records.
    pub ci95: Option<(f64, f64)>,
}

/// Mean and 95% Student-t confidence interval of `xs`.
pub fn mean_ci95(xs: &[f64]) -> (f64, Option<(f64, f64)>) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, None);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, None);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975);
    let half = t * (var / n as f64).sqrt();
    (mean, Some((mean - half, mean + half)))
}

pub fn summarize(records: Vec<BenchRecord>, deadline: f64) -> BenchSummary {
    let scores: Vec<f64> = records.iter().map(|r| par2(r, deadline)).collect();
    let (mean_par2, ci95) = mean_ci95(&scores);
    BenchSummary {
        solved: records.iter().filter(|r| r.solved).count(),
        disqualified: records.iter().filter(|r| r.status == "disqualified").count(),
        records,
        deadline,
        mean_par2,
        ci95,
    }
}

/// Reference answers, one `name value` pair per line; `#` and `c` start
/// comment lines.
pub fn parse_reference_answers(text: &str) -> Result<BTreeMap<String, f64>, String> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("c ") {
            continue;
        }
        let mut toks = line.split_whitespace();
        let (Some(name), Some(value), None) = (toks.next(), toks.next(), toks.next()) else {
            return Err(format!("line {}: expected `name value`", i + 1));
        };
        let value: f64 = value
            .parse()
            .map_err(|_| format!("line {}: `{value}` is not a number", i + 1))?;
        out.insert(name.to_string(), value);
    }
    Ok(out)
}

fn reference_for<'a>(refs: &'a BTreeMap<String, f64>, name: &str) -> Option<&'a f64> {
    refs.get(name).or_else(|| {
        let stem = Path::new(name).file_stem()?.to_str()?;
        refs.get(stem)
    })
}

/// Marks solved records whose answer differs from the reference by more
/// than [`REFERENCE_TOLERANCE`] as unsolved and disqualified.
pub fn apply_reference_answers(records: &mut [BenchRecord], refs: &BTreeMap<String, f64>) {
    for r in records {
        if let (true, Some(answer), Some(&expected)) = (r.solved, r.answer, reference_for(refs, &r.name)) {
            if (answer - expected).abs() > REFERENCE_TOLERANCE {
                r.solved = false;
                r.status = "disqualified".to_string();
            }
        }
    }
}

/// Regular, non-hidden files directly inside `dir`, sorted by name.
pub fn instance_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        let hidden = entry.file_name().to_string_lossy().starts_with('.');
        if entry.file_type()?.is_file() && !hidden {
            files.push(entry.path());
        }
    }
    files.sort();
    Ok(files)
}

/// Parses and solves one file; every failure becomes an unsolved record.
pub fn bench_file(path: &Path, opts: &RunOptions) -> BenchRecord {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let start = Instant::now();
    let problem = std::fs::read_to_string(path)
        .map_err(|e| e.to_string())
        .and_then(|text| parse_problem_with(&text, opts.parse).map_err(|e| e.to_string()));
    let problem = match problem {
        Ok(p) => Arc::new(p),
        Err(_) => return BenchRecord::unsolved(name, start.elapsed().as_secs_f64(), "input-error"),
    };
    let outcome = run(problem, opts);
    let seconds = start.elapsed().as_secs_f64();
    match outcome {
        Ok(report) if opts.deadline.is_none_or(|d| seconds <= d.as_secs_f64()) => BenchRecord {
            name,
            solved: true,
            seconds,
            answer: Some(report.result.maximum),
            width: Some(report.result.stats.width),
            peak_nodes: Some(report.result.stats.peak_diagram_nodes),
            store_nodes: Some(report.result.stats.store_nodes),
            status: "ok".to_string(),
        },
        Ok(_) => BenchRecord::unsolved(name, seconds, "deadline"),
        Err(e) => {
            let mut r = BenchRecord::unsolved(name, seconds, e.status());
            if let Some(stats) = e.stats() {
                r.peak_nodes = Some(stats.peak_diagram_nodes);
                r.store_nodes = Some(stats.store_nodes);
            }
            r
        }
    }
}

/// Runs every file with `jobs` workers. Records come back in file order.
pub fn bench_files(files: &[PathBuf], opts: &RunOptions, jobs: usize) -> Vec<BenchRecord> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<BenchRecord>>> = Mutex::new(vec![None; files.len()]);
    std::thread::scope(|scope| {
        for _ in 0..jobs.max(1).min(files.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(path) = files.get(i) else { break };
                let record = bench_file(path, opts);
                slots.lock().expect("no worker panics while holding the lock")[i] = Some(record);
            });
        }
    });
    slots
        .into_inner()
        .expect("workers finished")
        .into_iter()
        .map(|r| r.expect("every file benchmarked"))
        .collect()
}

/// CSV with the columns `name, solved, seconds, par2, answer, width`,
/// followed by `peak_nodes, store_nodes, status`.
pub fn to_csv(summary: &BenchSummary) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "name",
        "solved",
        "seconds",
        "par2",
        "answer",
        "width",
        "peak_nodes",
        "store_nodes",
        "status",
    ])
    .expect("in-memory write");
    let opt = |x: Option<String>| x.unwrap_or_default();
    for r in &summary.records {
        w.write_record([
            r.name.clone(),
            r.solved.to_string(),
            format!("{:.6}", r.seconds),
            format!("{:.6}", par2(r, summary.deadline)),
            opt(r.answer.map(|a| format!("{a:?}"))),
            opt(r.width.map(|x| x.to_string())),
            opt(r.peak_nodes.map(|x| x.to_string())),
            opt(r.store_nodes.map(|x| x.to_string())),
            r.status.clone(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

//! One solve under a wall-clock deadline.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Arc};
use std::thread;
use std::time::{Duration, Instant};

use dper_core::executor::{solve, solve_with_assertions, ExecError, SolveResult, SolveStats, DEFAULT_CHECKED_CAP};
use dper_core::formula::{ParseOptions, Problem};
use dper_core::pbf::{Limits, PbfError};
use dper_core::planner::{plan, Heuristic, PjTree};

/// Environment variable holding the diagram node cap.
pub const NODE_LIMIT_VAR: &str = "DPER_NODE_LIMIT";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub heuristic: Heuristic,
    pub tie_seed: Option<u64>,
    /// Covers planning and execution together.
    pub deadline: Option<Duration>,
    pub debug_assert: bool,
    pub node_limit: Option<usize>,
    /// Used by callers that parse their own input, such as the bench sweep.
    pub parse: ParseOptions,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub tree: PjTree,
    pub result: SolveResult,
    pub planning_seconds: f64,
    pub execution_seconds: f64,
}

#[derive(Debug, Clone)]
pub enum RunError {
    Input(String),
    Deadline { stats: Option<SolveStats>, elapsed: f64 },
    Resource { detail: String, stats: Option<SolveStats> },
    Assertion(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Input(msg) => write!(f, "input error: {msg}"),
            RunError::Deadline { elapsed, .. } => write!(f, "deadline exceeded after {elapsed:.3}s"),
            RunError::Resource { detail, .. } => write!(f, "resource limit: {detail}"),
            RunError::Assertion(msg) => write!(f, "assertion failed: {msg}"),
        }
    }
}

impl std::error::Error for RunError {}

impl RunError {
    /// Process exit code for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Input(_) => 1,
            RunError::Deadline { .. } => 2,
            RunError::Resource { .. } => 3,
            RunError::Assertion(_) => 4,
        }
    }

    pub fn status(&self) -> &'static str {
        match self {
            RunError::Input(_) => "input-error",
            RunError::Deadline { .. } => "deadline",
            RunError::Resource { .. } => "resource",
            RunError::Assertion(_) => "assertion",
        }
    }

    pub fn stats(&self) -> Option<&SolveStats> {
        match self {
            RunError::Deadline { stats, .. } | RunError::Resource { stats, .. } => stats.as_ref(),
            _ => None,
        }
    }
}

/// Reads [`NODE_LIMIT_VAR`]; unset or empty means no limit.
pub fn node_limit_from_env() -> Result<Option<usize>, RunError> {
    match std::env::var(NODE_LIMIT_VAR) {
        Ok(s) if !s.trim().is_empty() => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| RunError::Input(format!("{NODE_LIMIT_VAR}={s} is not a node count"))),
        _ => Ok(None),
    }
}

fn plan_and_solve(p: &Problem, opts: &RunOptions, cancel: Arc<AtomicBool>) -> Result<RunReport, RunError> {
    let start = Instant::now();
    let tree = plan(p, opts.heuristic, opts.tie_seed).map_err(|e| RunError::Input(e.to_string()))?;
    let planning_seconds = start.elapsed().as_secs_f64();
    if cancel.load(Ordering::Relaxed) {
        return Err(RunError::Deadline {
            stats: None,
            elapsed: planning_seconds,
        });
    }
    let limits = Limits {
        max_nodes: opts.node_limit,
        cancel: Some(cancel),
    };
    let exec_start = Instant::now();
    let outcome = if opts.debug_assert {
        solve_with_assertions(p, &tree, limits, DEFAULT_CHECKED_CAP)
    } else {
        solve(p, &tree, limits)
    };
    let execution_seconds = exec_start.elapsed().as_secs_f64();
    match outcome {
        Ok(result) => Ok(RunReport {
            tree,
            result,
            planning_seconds,
            execution_seconds,
        }),
        Err(ExecError::Aborted { cause, stats }) => match cause {
            PbfError::Cancelled => Err(RunError::Deadline {
                stats: Some(*stats),
                elapsed: start.elapsed().as_secs_f64(),
            }),
            other => Err(RunError::Resource {
                detail: other.to_string(),
                stats: Some(*stats),
            }),
        },
        Err(ExecError::TooLarge { vars, cap }) => Err(RunError::Resource {
            detail: format!("{vars} variables exceed the assertion-mode cap of {cap}"),
            stats: None,
        }),
        Err(ExecError::Assertion(a)) => Err(RunError::Assertion(a.to_string())),
        Err(other) => Err(RunError::Input(other.to_string())),
    }
}

/// Plans and solves `p` on a worker thread. When the deadline passes the
/// worker is cancelled and the run reports [`RunError::Deadline`].
pub fn run(p: Arc<Problem>, opts: &RunOptions) -> Result<RunReport, RunError> {
    let cancel = Arc::new(AtomicBool::new(false));
    let Some(deadline) = opts.deadline else {
        return plan_and_solve(&p, opts, cancel);
    };
    let start = Instant::now();
    let (tx, rx) = mpsc::channel();
    let worker = {
        let cancel = Arc::clone(&cancel);
        let opts = opts.clone();
        thread::spawn(move || {
            let _ = tx.send(plan_and_solve(&p, &opts, cancel));
        })
    };
    let outcome = match rx.recv_timeout(deadline) {
        Ok(outcome) => outcome,
        Err(_) => {
            cancel.store(true, Ordering::Relaxed);
            let partial = rx.recv().ok();
            let stats = partial.as_ref().and_then(|r| match r {
                Err(e) => e.stats().cloned(),
                Ok(report) => Some(report.result.stats.clone()),
            });
            Err(RunError::Deadline {
                stats,
                elapsed: start.elapsed().as_secs_f64(),
            })
        }
    };
    let _ = worker.join();
    match outcome {
        Ok(_) if start.elapsed() > deadline => Err(RunError::Deadline {
            stats: None,
            elapsed: start.elapsed().as_secs_f64(),
        }),
        other => other,
    }
}

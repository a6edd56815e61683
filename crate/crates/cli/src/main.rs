use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use dper::bench::{apply_reference_answers, bench_files, instance_files, parse_reference_answers, summarize, to_csv};
use dper::report::{render, Format, OracleReport, PlanReport, SolveReport, StatsReport, Timings, Verification, SCHEMA_VERSION};
use dper::run::{node_limit_from_env, run, RunOptions};
use dper_core::formula::{parse_problem_with, ParseOptions, Problem};
use dper_core::oracle::{enumerate_solve, weighted_count, ENUMERATION_LIMIT};
use dper_core::planner::{plan, write_tree, Heuristic};

/// Largest disagreement tolerated between the reported maximum and the
/// enumerated value of the maximizer.
const VERIFY_TOLERANCE: f64 = 1e-9;

#[derive(Parser)]
#[command(name = "dper", version, about = "Exact exist-random stochastic SAT by graded project-join trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Declared variables that are neither quantified nor used join the
    /// existential block instead of being rejected.
    #[arg(long, global = true)]
    free_as_exist: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance.
    Solve(SolveArgs),
    /// Build a graded project-join tree and write it out.
    Plan(PlanArgs),
    /// Solve every file in a directory and score the sweep.
    Bench(BenchArgs),
    /// Solve by exhaustive enumeration (small instances only).
    #[command(hide = true)]
    Oracle(OracleArgs),
}

#[derive(Args)]
struct PlanningArgs {
    /// Elimination heuristic: min-fill, min-degree or lex.
    #[arg(long, default_value = "min-fill")]
    heuristic: Heuristic,
    /// Seed for randomized tie-breaking.
    #[arg(long)]
    seed: Option<u64>,
    /// Break heuristic ties at random (seed 0 unless --seed is given).
    #[arg(long)]
    randomize_ties: bool,
}

impl PlanningArgs {
    fn tie_seed(&self) -> Option<u64> {
        self.randomize_ties.then(|| self.seed.unwrap_or(0))
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    planning: PlanningArgs,
    /// Wall-clock cap on planning plus execution, in seconds.
    #[arg(long, value_parser = positive_seconds)]
    timeout: Option<f64>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Check every step of the execution against its definition.
    #[arg(long)]
    debug_assert: bool,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    planning: PlanningArgs,
    /// Write the tree here and print a report instead of the tree.
    #[arg(long)]
    tree_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    dir: PathBuf,
    #[command(flatten)]
    planning: PlanningArgs,
    /// Per-instance cap in seconds.
    #[arg(long, value_parser = positive_seconds, default_value = "1000")]
    timeout: f64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    debug_assert: bool,
    /// File of `name value` reference answers.
    #[arg(long)]
    ref_answers: Option<PathBuf>,
    /// Instances solved in parallel.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

fn positive_seconds(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(format!("`{s}` is not a positive number of seconds")),
    }
}

/// Failure that ends the process before any report is produced.
struct Fatal {
    code: u8,
    msg: String,
}

impl Fatal {
    fn input(msg: impl Into<String>) -> Self {
        Fatal { code: 1, msg: msg.into() }
    }
}

fn load(path: &Path, opts: ParseOptions) -> Result<Problem, Fatal> {
    let text = std::fs::read_to_string(path).map_err(|e| Fatal::input(format!("{}: {e}", path.display())))?;
    parse_problem_with(&text, opts).map_err(|e| Fatal::input(format!("{}: {e}", path.display())))
}

fn print(s: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(s.as_bytes());
    let _ = out.flush();
}

fn literals(a: &dper_core::pbf::Assignment) -> Vec<i64> {
    a.to_literals()
}

fn cmd_solve(args: &SolveArgs, parse: ParseOptions) -> Result<u8, Fatal> {
    let start = Instant::now();
    let p = load(&args.input, parse)?;
    let node_limit = node_limit_from_env().map_err(|e| Fatal::input(e.to_string()))?;
    let opts = RunOptions {
        heuristic: args.planning.heuristic,
        tie_seed: args.planning.tie_seed(),
        deadline: args.timeout.map(Duration::from_secs_f64),
        debug_assert: args.debug_assert,
        node_limit,
        parse,
    };
    let randomized = p.random.len();
    let p = Arc::new(p);
    let outcome = run(Arc::clone(&p), &opts);
    let mut report = SolveReport {
        schema_version: SCHEMA_VERSION,
        command: "solve",
        input: args.input.display().to_string(),
        status: "ok".into(),
        maximum: None,
        maximizer: None,
        width: None,
        heuristic: opts.heuristic.name().into(),
        seed: opts.tie_seed,
        debug_assert: opts.debug_assert,
        timings: Timings {
            planning_seconds: None,
            execution_seconds: None,
            total_seconds: 0.0,
        },
        stats: None,
        verification: None,
        error: None,
        warnings: Vec::new(),
    };
    let code = match &outcome {
        Ok(r) => {
            report.maximum = Some(r.result.maximum);
            report.maximizer = Some(literals(&r.result.maximizer));
            report.width = Some(r.result.stats.width);
            report.timings.planning_seconds = Some(r.planning_seconds);
            report.timings.execution_seconds = Some(r.execution_seconds);
            report.stats = Some(StatsReport::from(&r.result.stats));
            if randomized <= ENUMERATION_LIMIT {
                if let Ok(wc) = weighted_count(&p, &r.result.maximizer) {
                    let agrees = (wc - r.result.maximum).abs() <= VERIFY_TOLERANCE;
                    if !agrees {
                        report.warnings.push(format!(
                            "maximizer evaluates to {wc:e} by enumeration, not {:e}",
                            r.result.maximum
                        ));
                    }
                    report.verification = Some(Verification {
                        weighted_count: wc,
                        agrees,
                    });
                }
            }
            0
        }
        Err(e) => {
            report.status = e.status().into();
            report.error = Some(e.to_string());
            report.stats = e.stats().map(StatsReport::from);
            eprintln!("dper: {e}");
            e.exit_code() as u8
        }
    };
    if let Some(w) = report.warnings.first() {
        eprintln!("dper: warning: {w}");
    }
    report.timings.total_seconds = start.elapsed().as_secs_f64();
    print(&render(&report, args.format));
    Ok(code)
}

fn cmd_plan(args: &PlanArgs, parse: ParseOptions) -> Result<u8, Fatal> {
    let p = load(&args.input, parse)?;
    let start = Instant::now();
    let tie_seed = args.planning.tie_seed();
    let tree = plan(&p, args.planning.heuristic, tie_seed).map_err(|e| Fatal::input(e.to_string()))?;
    let planning_seconds = start.elapsed().as_secs_f64();
    let w = dper_core::planner::width(&tree, &p);
    let text = write_tree(&tree, &p);
    match &args.tree_out {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| Fatal::input(format!("{}: {e}", path.display())))?;
            let report = PlanReport {
                schema_version: SCHEMA_VERSION,
                command: "plan",
                input: args.input.display().to_string(),
                heuristic: args.planning.heuristic.name().into(),
                seed: tie_seed,
                width: w,
                tree_nodes: tree.len(),
                planning_seconds,
                tree_out: Some(path.display().to_string()),
            };
            print(&render(&report, args.format));
        }
        None => {
            print(&text);
            eprintln!("width {w}");
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct BenchReport {
    schema_version: u32,
    command: &'static str,
    dir: String,
    heuristic: String,
    seed: Option<u64>,
    jobs: usize,
    #[serde(flatten)]
    summary: dper::bench::BenchSummary,
}

fn cmd_bench(args: &BenchArgs, parse: ParseOptions) -> Result<u8, Fatal> {
    let files = instance_files(&args.dir).map_err(|e| Fatal::input(format!("{}: {e}", args.dir.display())))?;
    let refs = match &args.ref_answers {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Fatal::input(format!("{}: {e}", path.display())))?;
            Some(parse_reference_answers(&text).map_err(|e| Fatal::input(format!("{}: {e}", path.display())))?)
        }
        None => None,
    };
    let opts = RunOptions {
        heuristic: args.planning.heuristic,
        tie_seed: args.planning.tie_seed(),
        deadline: Some(Duration::from_secs_f64(args.timeout)),
        debug_assert: args.debug_assert,
        node_limit: node_limit_from_env().map_err(|e| Fatal::input(e.to_string()))?,
        parse,
    };
    let mut records = bench_files(&files, &opts, args.jobs);
    if let Some(refs) = &refs {
        apply_reference_answers(&mut records, refs);
    }
    let summary = summarize(records, args.timeout);
    match args.format {
        Format::Json => {
            let report = BenchReport {
                schema_version: SCHEMA_VERSION,
                command: "bench",
                dir: args.dir.display().to_string(),
                heuristic: opts.heuristic.name().into(),
                seed: opts.tie_seed,
                jobs: args.jobs,
                summary,
            };
            print(&render(&report, Format::Json));
        }
        Format::Text => {
            let mut out = to_csv(&summary);
            out.push_str(&format!("# instances {}\n", summary.records.len()));
            out.push_str(&format!("# solved {}\n", summary.solved));
            out.push_str(&format!("# disqualified {}\n", summary.disqualified));
            out.push_str(&format!("# deadline {}\n", dper::report::sig17(summary.deadline)));
            out.push_str(&format!("# mean_par2 {}\n", dper::report::sig17(summary.mean_par2)));
            if let Some((lo, hi)) = summary.ci95 {
                out.push_str(&format!(
                    "# ci95 {} {}\n",
                    dper::report::sig17(lo),
                    dper::report::sig17(hi)
                ));
            }
            print(&out);
        }
    }
    Ok(0)
}

fn cmd_oracle(args: &OracleArgs, parse: ParseOptions) -> Result<u8, Fatal> {
    let p = load(&args.input, parse)?;
    // Too many variables to enumerate is a resource failure.
    let r = enumerate_solve(&p).map_err(|e| Fatal { code: 3, msg: e.to_string() })?;
    let report = OracleReport {
        schema_version: SCHEMA_VERSION,
        command: "oracle",
        input: args.input.display().to_string(),
        maximum: r.maximum,
        maximizers: r.maximizers.iter().map(literals).collect(),
    };
    print(&render(&report, args.format));
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let parse = ParseOptions {
        free_as_exist: cli.free_as_exist,
    };
    let outcome = match &cli.command {
        Command::Solve(a) => cmd_solve(a, parse),
        Command::Plan(a) => cmd_plan(a, parse),
        Command::Bench(a) => cmd_bench(a, parse),
        Command::Oracle(a) => cmd_oracle(a, parse),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("dper: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

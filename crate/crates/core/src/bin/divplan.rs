use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use divplan::bench::{run_bench, BenchOptions, PlannerMode};
use divplan::dimensions::behaviour_count;
use divplan::encoding::Plan;
use divplan::metrics::{oracle_enumerate_capped, validate_plan, DEFAULT_ORACLE_NODE_CAP};
use divplan::pddl::CostBoundSource;
use divplan::rational::{parse_rational, Rational};
use divplan::report::{load_task, recount_behaviours, render_grid, run_solve, DiversityReport, RunConfig};

const EXIT_INVALID: u8 = 1;
const EXIT_INPUT: u8 = 4;

#[derive(Parser)]
#[command(name = "divplan", version, about = "Diverse planning over user-defined behaviour spaces")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate plans with distinct behaviours.
    Solve(SolveArgs),
    /// Check plans (a report or a plan file) against a task.
    Validate(ValidateArgs),
    /// Enumerate every plan up to a horizon by brute force.
    Oracle(OracleArgs),
    /// Run a suite of tasks under fbi and naive planning.
    Bench(BenchArgs),
    /// Render a report as a CSV grid over two dimensions.
    Grid(GridArgs),
}

#[derive(Args)]
struct Budget {
    /// Wall-clock budget in seconds.
    #[arg(long, value_name = "SECS")]
    timeout: Option<f64>,
    /// Solver memory cap in MB.
    #[arg(long, value_name = "MB")]
    memory: Option<u64>,
    /// Solver random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Solver executable (default: $DIVPLAN_SOLVER or z3).
    #[arg(long)]
    solver: Option<PathBuf>,
}

impl Budget {
    fn timeout(&self) -> Result<Option<Duration>, String> {
        self.timeout
            .map(|t| Duration::try_from_secs_f64(t).map_err(|_| format!("invalid timeout {t}")))
            .transpose()
    }
}

#[derive(Args)]
struct SolveArgs {
    domain: PathBuf,
    problem: PathBuf,
    /// Feature configuration (JSON).
    #[arg(long)]
    features: Option<PathBuf>,
    /// Number of plans; unbounded when neither this nor the feature file sets it.
    #[arg(long)]
    k: Option<usize>,
    /// Relative quality bound q; the cost bound is round(q * optimal length).
    #[arg(long, conflicts_with = "cost_bound", value_parser = rational_arg)]
    quality: Option<Rational>,
    /// Absolute cost bound.
    #[arg(long)]
    cost_bound: Option<u32>,
    /// Known optimal length; skips the length search.
    #[arg(long)]
    optimal_length: Option<usize>,
    #[arg(long, default_value_t = divplan::encoding::DEFAULT_MAX_HORIZON)]
    max_horizon: usize,
    /// Plain plan forbidding with behaviours measured afterwards.
    #[arg(long)]
    naive: bool,
    #[command(flatten)]
    budget: Budget,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    domain: PathBuf,
    problem: PathBuf,
    /// JSON report or a plan file with one `(action args)` per line.
    plan: PathBuf,
    /// Recount behaviours under this feature configuration.
    #[arg(long)]
    features: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    domain: PathBuf,
    problem: PathBuf,
    #[arg(long)]
    horizon: usize,
    #[arg(long)]
    cost_bound: Option<usize>,
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_ORACLE_NODE_CAP)]
    node_cap: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Fbi,
    Naive,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of task files.
    suite: PathBuf,
    #[arg(long = "k", default_values_t = [5])]
    ks: Vec<usize>,
    #[arg(long = "quality", value_parser = rational_arg)]
    qs: Vec<Rational>,
    #[arg(long = "mode", value_enum)]
    modes: Vec<ModeArg>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[command(flatten)]
    budget: Budget,
    /// Per-run CSV goes here and the aggregate CSV next to it
    /// (`<stem>.aggregate.csv`); both print to stdout otherwise.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    report: PathBuf,
    /// Dimension indices, column axis first.
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [0, 1])]
    dims: Vec<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).ok_or_else(|| format!("not a number: {s}"))
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("divplan: {msg}");
    ExitCode::from(code)
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), String> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            let nl = if text.ends_with('\n') { "" } else { "\n" };
            match write!(out, "{text}{nl}").and_then(|_| out.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.to_string()),
                _ => Ok(()),
            }
        }
    }
}

fn solve(a: SolveArgs) -> ExitCode {
    let timeout = match a.budget.timeout() {
        Ok(t) => t,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    let mut cfg = RunConfig::new(a.domain, a.problem);
    cfg.features = a.features;
    cfg.k = a.k;
    cfg.bound = match (a.quality, a.cost_bound) {
        (Some(q), _) => Some(CostBoundSource::Quality(q)),
        (_, Some(c)) => Some(CostBoundSource::Explicit(c)),
        _ => None,
    };
    cfg.timeout = timeout;
    cfg.memory_mb = a.budget.memory;
    cfg.seed = a.budget.seed;
    cfg.solver = a.budget.solver;
    cfg.naive = a.naive;
    cfg.optimal_length = a.optimal_length;
    cfg.max_horizon = a.max_horizon;
    let rep = run_solve(&cfg);
    if let Some(e) = &rep.error {
        eprintln!("divplan: {}", e.message);
    }
    eprintln!(
        "divplan: {} with {} plan(s), {} behaviour(s)",
        rep.status.as_str(),
        rep.plans.len(),
        rep.behaviour_count
    );
    if let Err(e) = emit(&rep.to_json(), a.output.as_deref()) {
        return fail(EXIT_INPUT, e);
    }
    ExitCode::from(rep.exit_code() as u8)
}

/// Plain plan file: one action per line, `;` comments.
fn read_plan_file(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| l.split(';').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| l.to_string())
        .collect()
}

fn validate(a: ValidateArgs) -> ExitCode {
    let loaded = match load_task(&a.domain, &a.problem, a.features.as_deref()) {
        Ok(l) => l,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    let text = match std::fs::read_to_string(&a.plan) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_INPUT, format!("{}: {e}", a.plan.display())),
    };
    let task = &loaded.task;
    if let Ok(rep) = DiversityReport::from_json(&text) {
        let mut ok = true;
        for p in &rep.plans {
            let plan = Plan::from_names(task, &p.action_names());
            match plan.map(|pl| validate_plan(task, &pl)) {
                Some(Ok(_)) => println!("{}: valid, cost {}", p.id, p.actions.len()),
                Some(Err(e)) => {
                    ok = false;
                    println!("{}: invalid: {e}", p.id);
                }
                None => {
                    ok = false;
                    println!("{}: invalid: unknown action", p.id);
                }
            }
        }
        if ok && a.features.is_some() {
            match recount_behaviours(&rep, task, &loaded.space) {
                Ok(bc) if bc == rep.behaviour_count => println!("behaviour count {bc} (matches report)"),
                Ok(bc) => {
                    ok = false;
                    println!("behaviour count {bc}, report says {}", rep.behaviour_count);
                }
                Err(e) => return fail(EXIT_INVALID, e),
            }
        }
        return ExitCode::from(if ok { 0 } else { EXIT_INVALID });
    }
    let names = read_plan_file(&text);
    let Some(plan) = Plan::from_names(task, &names) else {
        let bad = names.iter().find(|n| task.action_by_name(n).is_none()).cloned().unwrap_or_default();
        return fail(EXIT_INVALID, format!("unknown action {bad}"));
    };
    match validate_plan(task, &plan) {
        Ok(trace) => {
            println!("valid, cost {}", plan.len());
            if a.features.is_some() {
                match divplan::dimensions::plan_behaviour(&loaded.space, task, &plan, &trace) {
                    Ok(b) => println!("behaviour {b}"),
                    Err(e) => println!("behaviour: {e}"),
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(EXIT_INVALID, format!("invalid: {e}")),
    }
}

fn oracle(a: OracleArgs) -> ExitCode {
    let loaded = match load_task(&a.domain, &a.problem, a.features.as_deref()) {
        Ok(l) => l,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    let task = &loaded.task;
    let c = a.cost_bound.unwrap_or(a.horizon);
    let plans = match oracle_enumerate_capped(task, a.horizon, c, a.node_cap) {
        Ok(p) => p,
        Err(e) => return fail(3, e),
    };
    let bc = if a.features.is_some() {
        match behaviour_count(&loaded.space, task, &plans) {
            Ok(bc) => Some(bc),
            Err(e) => return fail(EXIT_INVALID, e),
        }
    } else {
        None
    };
    let json = serde_json::json!({
        "horizon": a.horizon,
        "cost_bound": c,
        "plan_count": plans.len(),
        "behaviour_count": bc,
        "plans": plans.iter().map(|p| p.names(task)).collect::<Vec<_>>(),
    });
    match emit(&serde_json::to_string_pretty(&json).expect("json"), a.output.as_deref()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(EXIT_INPUT, e),
    }
}

fn bench(a: BenchArgs) -> ExitCode {
    let timeout = match a.budget.timeout() {
        Ok(t) => t,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    let mut opts = BenchOptions {
        ks: a.ks,
        workers: a.workers,
        memory_mb: a.budget.memory,
        seed: a.budget.seed,
        solver: a.budget.solver,
        ..BenchOptions::default()
    };
    if timeout.is_some() {
        opts.timeout = timeout;
    }
    if !a.qs.is_empty() {
        opts.qs = a.qs;
    }
    if !a.modes.is_empty() {
        opts.modes = a
            .modes
            .iter()
            .map(|m| match m {
                ModeArg::Fbi => PlannerMode::Fbi,
                ModeArg::Naive => PlannerMode::Naive,
            })
            .collect();
    }
    let res = match run_bench(&a.suite, &opts) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    let written = match &a.output {
        Some(p) => {
            let agg = p.with_extension("aggregate.csv");
            emit(&res.rows_csv(), Some(p)).and_then(|_| emit(&res.aggregate_csv(), Some(&agg)))
        }
        None => emit(&res.rows_csv(), None).and_then(|_| emit(&res.aggregate_csv(), None)),
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(EXIT_INPUT, e),
    }
}

fn grid(a: GridArgs) -> ExitCode {
    let rep = match std::fs::read_to_string(&a.report)
        .map_err(|e| e.to_string())
        .and_then(|t| DiversityReport::from_json(&t).map_err(|e| e.to_string()))
    {
        Ok(r) => r,
        Err(e) => return fail(EXIT_INPUT, format!("{}: {e}", a.report.display())),
    };
    match render_grid(&rep, (a.dims[0], a.dims[1])) {
        Ok(g) => match emit(&g.csv, a.output.as_deref()) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(EXIT_INPUT, e),
        },
        Err(e) => fail(EXIT_INPUT, e),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.cmd {
        Cmd::Solve(a) => solve(a),
        Cmd::Validate(a) => validate(a),
        Cmd::Oracle(a) => oracle(a),
        Cmd::Bench(a) => bench(a),
        Cmd::Grid(a) => grid(a),
    }
}

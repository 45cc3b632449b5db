//! Benchmark harness: every task of a suite under every (mode, k, q)
//! configuration, fanned out over a bounded worker pool.
//!
//! A suite is a directory of task files:
//!
//! ```json
//! {"name": "rovers-p01", "domain": "../rovers/domain.pddl",
//!  "problem": "../rovers/p01.pddl", "features": "rovers-p01.features.json"}
//! ```
//!
//! Paths are relative to the task file. Files ending in `.features.json`
//! are not tasks.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::pddl::CostBoundSource;
use crate::planner::{find_optimal_length, LengthSearch};
use crate::rational::{format_rational, Rational};
use crate::report::{load_task, run_solve, RunConfig};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskFile {
    pub name: String,
    pub domain: PathBuf,
    pub problem: PathBuf,
    #[serde(default)]
    pub features: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerMode {
    Fbi,
    /// Plain plan forbidding over an empty behaviour space.
    Naive,
}

impl PlannerMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PlannerMode::Fbi => "fbi",
            PlannerMode::Naive => "naive",
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub ks: Vec<usize>,
    pub qs: Vec<Rational>,
    pub modes: Vec<PlannerMode>,
    /// Wall-clock budget of each single run (and of each length search).
    pub timeout: Option<Duration>,
    pub memory_mb: Option<u64>,
    pub seed: Option<u64>,
    pub workers: usize,
    pub solver: Option<PathBuf>,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            ks: vec![5],
            qs: vec![Rational::from_integer(1)],
            modes: vec![PlannerMode::Fbi, PlannerMode::Naive],
            timeout: Some(Duration::from_secs(60)),
            memory_mb: None,
            seed: None,
            workers: 1,
            solver: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub task: String,
    pub mode: PlannerMode,
    pub k: usize,
    pub q: String,
    pub status: String,
    pub plans: usize,
    pub behaviour_count: usize,
    pub optimal_length: Option<usize>,
    pub cost_bound: Option<usize>,
    pub seconds: f64,
    pub message: String,
}

impl BenchRow {
    /// Finished with at least one plan.
    pub fn covered(&self) -> bool {
        (self.status == "solved" || self.status == "exhausted") && self.plans > 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub mode: PlannerMode,
    pub k: usize,
    pub q: String,
    pub tasks: usize,
    pub coverage: usize,
    pub behaviour_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchResult {
    pub rows: Vec<BenchRow>,
    pub aggregate: Vec<AggregateRow>,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("cannot read suite {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    TaskFile { path: PathBuf, source: serde_json::Error },
    #[error("suite {0} has no task files")]
    Empty(PathBuf),
    #[error("bench options need at least one k, one q and one mode")]
    NoConfigurations,
}

/// Task files of a suite directory, sorted by file name.
pub fn load_suite(dir: &Path) -> Result<Vec<(PathBuf, TaskFile)>, BenchError> {
    let io = |source| BenchError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let n = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            n.ends_with(".json") && !n.ends_with(".features.json")
        })
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for p in paths {
        let text = std::fs::read_to_string(&p).map_err(|source| BenchError::Io {
            path: p.clone(),
            source,
        })?;
        let mut t: TaskFile =
            serde_json::from_str(&text).map_err(|source| BenchError::TaskFile { path: p.clone(), source })?;
        let base = p.parent().unwrap_or(Path::new("."));
        t.domain = base.join(&t.domain);
        t.problem = base.join(&t.problem);
        t.features = t.features.map(|f| base.join(f));
        out.push((p, t));
    }
    if out.is_empty() {
        return Err(BenchError::Empty(dir.to_path_buf()));
    }
    Ok(out)
}

pub fn run_bench(dir: &Path, opts: &BenchOptions) -> Result<BenchResult, BenchError> {
    let tasks = load_suite(dir)?;
    let tasks: Vec<TaskFile> = tasks.into_iter().map(|(_, t)| t).collect();
    run_tasks(&tasks, opts)
}

pub fn run_tasks(tasks: &[TaskFile], opts: &BenchOptions) -> Result<BenchResult, BenchError> {
    if opts.ks.is_empty() || opts.qs.is_empty() || opts.modes.is_empty() {
        return Err(BenchError::NoConfigurations);
    }
    let slots: Vec<Mutex<Vec<BenchRow>>> = tasks.iter().map(|_| Mutex::new(Vec::new())).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..opts.workers.clamp(1, tasks.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= tasks.len() {
                    break;
                }
                let rows = catch_unwind(AssertUnwindSafe(|| bench_task(&tasks[i], opts)))
                    .unwrap_or_else(|p| failed_rows(&tasks[i], opts, &panic_message(&*p)));
                *slots[i].lock().expect("slot lock") = rows;
            });
        }
    });
    let rows: Vec<BenchRow> = slots
        .into_iter()
        .flat_map(|m| m.into_inner().expect("slot lock"))
        .collect();
    let aggregate = aggregate(&rows);
    Ok(BenchResult { rows, aggregate })
}

fn panic_message(p: &(dyn std::any::Any + Send)) -> String {
    p.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| p.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "panic".into())
}

fn configurations(opts: &BenchOptions) -> Vec<(PlannerMode, usize, Rational)> {
    let mut out = Vec::new();
    for &m in &opts.modes {
        for &k in &opts.ks {
            for &q in &opts.qs {
                out.push((m, k, q));
            }
        }
    }
    out
}

fn failed_rows(t: &TaskFile, opts: &BenchOptions, msg: &str) -> Vec<BenchRow> {
    configurations(opts)
        .into_iter()
        .map(|(mode, k, q)| BenchRow {
            task: t.name.clone(),
            mode,
            k,
            q: format_rational(&q),
            status: "error".into(),
            plans: 0,
            behaviour_count: 0,
            optimal_length: None,
            cost_bound: None,
            seconds: 0.0,
            message: msg.to_string(),
        })
        .collect()
}

fn base_config(t: &TaskFile, opts: &BenchOptions) -> RunConfig {
    let mut cfg = RunConfig::new(&t.domain, &t.problem);
    cfg.features = t.features.clone();
    cfg.timeout = opts.timeout;
    cfg.memory_mb = opts.memory_mb;
    cfg.seed = opts.seed;
    cfg.solver = opts.solver.clone();
    cfg
}

/// All configurations of one task; the optimal length is searched once.
fn bench_task(t: &TaskFile, opts: &BenchOptions) -> Vec<BenchRow> {
    let base = base_config(t, opts);
    let start = Instant::now();
    let loaded = match load_task(&t.domain, &t.problem, t.features.as_deref()) {
        Ok(l) => l,
        Err(e) => return failed_rows(t, opts, &e.0),
    };
    let search = find_optimal_length(
        loaded.hard.as_ref().unwrap_or(&loaded.task),
        base.max_horizon,
        &base.solver_config(),
    );
    let l = match search {
        Ok(LengthSearch::Found(l)) => l,
        other => {
            let (status, msg) = match other {
                Ok(LengthSearch::Exhausted) => ("exhausted", "no plan within the horizon cap".to_string()),
                Ok(LengthSearch::Budget(r)) => ("budget", r),
                Err(e) => ("error", e.to_string()),
                Ok(LengthSearch::Found(_)) => unreachable!(),
            };
            let secs = start.elapsed().as_secs_f64();
            return failed_rows(t, opts, &msg)
                .into_iter()
                .map(|mut r| {
                    r.status = status.into();
                    r.seconds = secs;
                    r
                })
                .collect();
        }
    };
    drop(loaded);
    configurations(opts)
        .into_iter()
        .map(|(mode, k, q)| {
            let mut cfg = base.clone();
            cfg.k = Some(k);
            cfg.bound = Some(CostBoundSource::Quality(q));
            cfg.naive = mode == PlannerMode::Naive;
            cfg.optimal_length = Some(l);
            let rep = run_solve(&cfg);
            BenchRow {
                task: t.name.clone(),
                mode,
                k,
                q: format_rational(&q),
                status: rep.status.as_str().into(),
                plans: rep.plans.len(),
                behaviour_count: rep.behaviour_count,
                optimal_length: rep.optimal_length,
                cost_bound: rep.cost_bound,
                seconds: rep.timings.total_ms as f64 / 1000.0,
                message: rep
                    .error
                    .map(|e| e.message)
                    .or(rep.budget_reason)
                    .unwrap_or_default(),
            }
        })
        .collect()
}

/// Coverage and summed behaviour count per (mode, k, q).
pub fn aggregate(rows: &[BenchRow]) -> Vec<AggregateRow> {
    let mut groups: BTreeMap<(PlannerMode, usize, String), AggregateRow> = BTreeMap::new();
    for r in rows {
        let g = groups
            .entry((r.mode, r.k, r.q.clone()))
            .or_insert_with(|| AggregateRow {
                mode: r.mode,
                k: r.k,
                q: r.q.clone(),
                tasks: 0,
                coverage: 0,
                behaviour_count: 0,
            });
        g.tasks += 1;
        if r.covered() {
            g.coverage += 1;
            g.behaviour_count += r.behaviour_count;
        }
    }
    groups.into_values().collect()
}

fn to_csv<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

impl BenchResult {
    pub fn rows_csv(&self) -> String {
        to_csv(&self.rows)
    }

    pub fn aggregate_csv(&self) -> String {
        to_csv(&self.aggregate)
    }

    pub fn row(&self, task: &str, mode: PlannerMode, k: usize) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.task == task && r.mode == mode && r.k == k)
    }
}

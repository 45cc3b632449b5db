//! Run configuration, the end-to-end solve pipeline, its JSON report, and
//! CSV grid rendering of a report over two dimensions.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::dimensions::{
    behaviour_count, behaviour_json, build_behaviour_space, goal_labels, order_label, Behaviour, BehaviourSpace,
    DimValue, Dimension,
};
use crate::encoding::{Plan, DEFAULT_MAX_HORIZON};
use crate::grounding::{ground, GroundTask};
use crate::metrics::{maxsum, validate_plan};
use crate::pddl::{parse_addinfo, parse_domain, parse_problem, CostBoundSource, FeatureConfig, Mode};
use crate::planner::{compute_cost_bound, fbi_k, find_optimal_length, naive, LengthSearch, Phase, RunStatus};
use crate::rational::{format_rational, Rational};
use crate::smt::SolverConfig;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub domain: PathBuf,
    pub problem: PathBuf,
    pub features: Option<PathBuf>,
    /// Overrides the feature file; `None` there too means "until exhausted".
    pub k: Option<usize>,
    /// Overrides the feature file; `q = 1` when neither gives a bound.
    pub bound: Option<CostBoundSource>,
    pub timeout: Option<Duration>,
    pub memory_mb: Option<u64>,
    pub seed: Option<u64>,
    /// Plain plan forbidding with behaviours measured afterwards.
    pub naive: bool,
    /// Skip the length search and use this optimal length.
    pub optimal_length: Option<usize>,
    pub max_horizon: usize,
    pub solver: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(domain: impl Into<PathBuf>, problem: impl Into<PathBuf>) -> Self {
        RunConfig {
            domain: domain.into(),
            problem: problem.into(),
            features: None,
            k: None,
            bound: None,
            timeout: None,
            memory_mb: None,
            seed: None,
            naive: false,
            optimal_length: None,
            max_horizon: DEFAULT_MAX_HORIZON,
            solver: None,
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        let mut s = SolverConfig::from_env();
        if let Some(p) = &self.solver {
            s.program = p.clone();
        }
        s.memory_mb = self.memory_mb;
        s.seed = self.seed;
        s.with_timeout(self.timeout)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportStatus {
    Solved,
    Exhausted,
    Budget,
    Error,
}

impl ReportStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ReportStatus::Solved => "solved",
            ReportStatus::Exhausted => "exhausted",
            ReportStatus::Budget => "budget",
            ReportStatus::Error => "error",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    /// Unreadable or malformed input files.
    Input,
    Internal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportError {
    pub kind: ErrorKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionInfo {
    pub kind: String,
    pub label: String,
    /// Goal atoms of a goal-order dimension, in matrix order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub goals: Vec<String>,
    /// Cell labels of the values taken by the report's plans, in value order.
    pub axis: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportPlan {
    pub id: String,
    /// Each action as `[schema, arg1, ...]`.
    pub actions: Vec<Vec<String>>,
    pub phase: String,
    pub cost: usize,
    pub elapsed_ms: u64,
    /// JSON behaviour, `null` when outside the space's range.
    pub behaviour: Json,
    /// Per-dimension cell labels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell: Option<Vec<String>>,
}

impl ReportPlan {
    pub fn action_names(&self) -> Vec<String> {
        self.actions.iter().map(|a| format!("({})", a.join(" "))).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub parse_ms: u64,
    pub ground_ms: u64,
    pub length_search_ms: u64,
    pub behaviour_phase_ms: u64,
    pub plan_phase_ms: u64,
    pub total_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityReport {
    pub status: ReportStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ReportError>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget_reason: Option<String>,
    pub domain: String,
    pub problem: String,
    pub naive: bool,
    pub k: Option<usize>,
    pub optimal_length: Option<usize>,
    pub cost_bound: Option<usize>,
    pub dimensions: Vec<DimensionInfo>,
    pub plans: Vec<ReportPlan>,
    pub behaviour_count: usize,
    /// MaxSum of stability distances, exact and as a float.
    pub maxsum: String,
    pub maxsum_f64: f64,
    pub timings: Timings,
}

impl DiversityReport {
    fn empty(cfg: &RunConfig) -> Self {
        DiversityReport {
            status: ReportStatus::Error,
            error: None,
            budget_reason: None,
            domain: cfg.domain.display().to_string(),
            problem: cfg.problem.display().to_string(),
            naive: cfg.naive,
            k: cfg.k,
            optimal_length: None,
            cost_bound: None,
            dimensions: Vec::new(),
            plans: Vec::new(),
            behaviour_count: 0,
            maxsum: "0".into(),
            maxsum_f64: 0.0,
            timings: Timings::default(),
        }
    }

    /// Distinct non-null behaviours among the report's own plans.
    pub fn distinct_behaviours(&self) -> usize {
        let set: BTreeSet<String> = self
            .plans
            .iter()
            .filter(|p| !p.behaviour.is_null())
            .map(|p| p.behaviour.to_string())
            .collect();
        set.len()
    }

    /// Process exit code: 0 solved, 2 exhausted, 3 budget, 4 input error,
    /// 1 any other failure.
    pub fn exit_code(&self) -> i32 {
        match (self.status, self.error.as_ref().map(|e| e.kind)) {
            (ReportStatus::Solved, _) => 0,
            (ReportStatus::Exhausted, _) => 2,
            (ReportStatus::Budget, _) => 3,
            (ReportStatus::Error, Some(ErrorKind::Input)) => 4,
            (ReportStatus::Error, _) => 1,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Debug)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn read_file(p: &Path) -> Result<String, InputError> {
    std::fs::read_to_string(p).map_err(|e| InputError(format!("{}: {e}", p.display())))
}

/// Parsed and grounded inputs of one run.
pub struct LoadedTask {
    pub task: GroundTask,
    /// The hard-goal version of a soft-goal task, for the length search.
    pub hard: Option<GroundTask>,
    pub features: FeatureConfig,
    pub space: BehaviourSpace,
    pub parse_time: Duration,
    pub ground_time: Duration,
}

pub fn load_task(domain: &Path, problem: &Path, features: Option<&Path>) -> Result<LoadedTask, InputError> {
    let t0 = Instant::now();
    let dom = parse_domain(&read_file(domain)?).map_err(|e| InputError(format!("{}: {e}", domain.display())))?;
    let mut prob =
        parse_problem(&read_file(problem)?, &dom).map_err(|e| InputError(format!("{}: {e}", problem.display())))?;
    let features = match features {
        Some(f) => parse_addinfo(&read_file(f)?).map_err(|e| InputError(format!("{}: {e}", f.display())))?,
        None => FeatureConfig::default(),
    };
    let parse_time = t0.elapsed();
    let t1 = Instant::now();
    let ground_err = |e: crate::grounding::GroundingError| InputError(format!("grounding: {e}"));
    let hard = if features.soft_goals && prob.mode == Mode::Classical {
        let hard = ground(&dom, &prob).map_err(ground_err)?;
        prob.make_soft();
        Some(hard)
    } else {
        None
    };
    let task = ground(&dom, &prob).map_err(ground_err)?;
    let space = build_behaviour_space(&features, &task).map_err(|e| InputError(format!("features: {e}")))?;
    Ok(LoadedTask {
        task,
        hard,
        features,
        space,
        parse_time,
        ground_time: t1.elapsed(),
    })
}

fn ms(d: Duration) -> u64 {
    d.as_millis() as u64
}

/// Parse, ground, search the optimal length, derive the cost bound, run
/// FBI-k (or the naive baseline), validate and report. Never panics on bad
/// input or an exhausted budget; both end up in the report.
pub fn run_solve(cfg: &RunConfig) -> DiversityReport {
    let start = Instant::now();
    let mut rep = DiversityReport::empty(cfg);
    let loaded = match load_task(&cfg.domain, &cfg.problem, cfg.features.as_deref()) {
        Ok(l) => l,
        Err(e) => {
            rep.error = Some(ReportError {
                kind: ErrorKind::Input,
                message: e.0,
            });
            rep.timings.total_ms = ms(start.elapsed());
            return rep;
        }
    };
    if let Err(e) = solve_loaded(cfg, &loaded, &mut rep) {
        rep.status = ReportStatus::Error;
        rep.error = Some(e);
    }
    rep.timings.parse_ms = ms(loaded.parse_time);
    rep.timings.ground_ms = ms(loaded.ground_time);
    rep.timings.total_ms = ms(start.elapsed());
    rep
}

fn internal(e: impl fmt::Display) -> ReportError {
    ReportError {
        kind: ErrorKind::Internal,
        message: e.to_string(),
    }
}

fn input(m: String) -> ReportError {
    ReportError {
        kind: ErrorKind::Input,
        message: m,
    }
}

fn solve_loaded(cfg: &RunConfig, l: &LoadedTask, rep: &mut DiversityReport) -> Result<(), ReportError> {
    let task = &l.task;
    let k = cfg.k.or(l.features.k);
    if k == Some(0) {
        return Err(input("k must be at least 1".into()));
    }
    rep.k = k;
    let bound = cfg
        .bound
        .or_else(|| l.features.cost_bound_source())
        .unwrap_or(CostBoundSource::Quality(Rational::from_integer(1)));
    if let CostBoundSource::Quality(q) = bound {
        if q <= Rational::from_integer(0) {
            return Err(input(format!("quality must be positive, got {}", format_rational(&q))));
        }
    }
    rep.dimensions = dimension_infos(&l.space, task);
    let solver = cfg.solver_config();

    let c = match bound {
        CostBoundSource::Explicit(c) => {
            rep.optimal_length = cfg.optimal_length;
            c as usize
        }
        CostBoundSource::Quality(q) => {
            let len = match cfg.optimal_length {
                Some(len) => len,
                None => {
                    let t = Instant::now();
                    let search = find_optimal_length(l.hard.as_ref().unwrap_or(task), cfg.max_horizon, &solver);
                    rep.timings.length_search_ms = ms(t.elapsed());
                    match search.map_err(internal)? {
                        LengthSearch::Found(n) => n,
                        LengthSearch::Exhausted => {
                            rep.status = ReportStatus::Exhausted;
                            return Ok(());
                        }
                        LengthSearch::Budget(r) => {
                            rep.status = ReportStatus::Budget;
                            rep.budget_reason = Some(r);
                            return Ok(());
                        }
                    }
                }
            };
            rep.optimal_length = Some(len);
            compute_cost_bound(q, len)
        }
    };
    rep.cost_bound = Some(c);

    let out = if cfg.naive {
        naive(task, &l.space, k, c, &solver)
    } else {
        fbi_k(task, &l.space, k, c, &solver)
    }
    .map_err(internal)?;
    rep.timings.behaviour_phase_ms = ms(out.behaviour_phase);
    rep.timings.plan_phase_ms = ms(out.plan_phase);

    let mut plans = Vec::new();
    for (i, r) in out.plans.records.iter().enumerate() {
        validate_plan(task, &r.plan).map_err(internal)?;
        plans.push(Plan(r.plan.0.clone()));
        rep.plans.push(ReportPlan {
            id: format!("P{}", i + 1),
            actions: r
                .plan
                .0
                .iter()
                .map(|&a| {
                    let a = &task.actions[a];
                    std::iter::once(a.schema.clone()).chain(a.args.iter().cloned()).collect()
                })
                .collect(),
            phase: match r.phase {
                Phase::Behaviour => "behaviour".into(),
                Phase::Plan => "plan".into(),
            },
            cost: r.plan.len(),
            elapsed_ms: ms(r.elapsed),
            behaviour: r
                .behaviour
                .as_ref()
                .map_or(Json::Null, |b| behaviour_json(&l.space, task, b)),
            cell: r.behaviour.as_ref().map(|b| cell_labels(&l.space, task, b)),
        });
    }
    let behaviours: Vec<Option<&Behaviour>> = out.plans.records.iter().map(|r| r.behaviour.as_ref()).collect();
    fill_axes(&mut rep.dimensions, &l.space, task, &behaviours);
    rep.behaviour_count = out.behaviour_count;
    let m = maxsum(&plans);
    rep.maxsum = format_rational(&m);
    rep.maxsum_f64 = *m.numer() as f64 / *m.denom() as f64;
    match out.status {
        RunStatus::Complete => rep.status = ReportStatus::Solved,
        RunStatus::Exhausted => rep.status = ReportStatus::Exhausted,
        RunStatus::Budget(r) => {
            rep.status = ReportStatus::Budget;
            rep.budget_reason = Some(r);
        }
    }
    Ok(())
}

fn dimension_infos(space: &BehaviourSpace, task: &GroundTask) -> Vec<DimensionInfo> {
    space
        .dimensions
        .iter()
        .map(|d| DimensionInfo {
            kind: d.kind().into(),
            label: d.label(task),
            goals: match d {
                Dimension::GoalOrder { goals } => goals.iter().map(|&g| task.atoms[g].to_string()).collect(),
                _ => Vec::new(),
            },
            axis: Vec::new(),
        })
        .collect()
}

fn value_label(d: &Dimension, task: &GroundTask, v: &DimValue) -> String {
    match (d, v) {
        (_, DimValue::Int(i)) => i.to_string(),
        (_, DimValue::Rat(r)) => format_rational(r),
        (Dimension::GoalOrder { goals }, DimValue::Order(m)) => order_label(m, &goal_labels(task, goals)),
        (_, DimValue::Order(m)) => format!("{m:?}"),
    }
}

pub fn cell_labels(space: &BehaviourSpace, task: &GroundTask, b: &Behaviour) -> Vec<String> {
    space
        .dimensions
        .iter()
        .zip(&b.0)
        .map(|(d, v)| value_label(d, task, v))
        .collect()
}

fn fill_axes(infos: &mut [DimensionInfo], space: &BehaviourSpace, task: &GroundTask, bs: &[Option<&Behaviour>]) {
    for (i, info) in infos.iter_mut().enumerate() {
        let values: BTreeSet<&DimValue> = bs.iter().flatten().map(|b| &b.0[i]).collect();
        let mut axis: Vec<String> = Vec::new();
        for v in values {
            let l = value_label(&space.dimensions[i], task, v);
            if !axis.contains(&l) {
                axis.push(l);
            }
        }
        info.axis = axis;
    }
}

/// Re-validate a report's plans against `task` and recount behaviours
/// under `space`.
pub fn recount_behaviours(report: &DiversityReport, task: &GroundTask, space: &BehaviourSpace) -> Result<usize, String> {
    let mut plans = Vec::new();
    for p in &report.plans {
        let names = p.action_names();
        let plan = Plan::from_names(task, &names).ok_or_else(|| format!("{}: unknown action", p.id))?;
        validate_plan(task, &plan).map_err(|e| format!("{}: {e}", p.id))?;
        if !p.behaviour.is_null() {
            plans.push(plan);
        }
    }
    behaviour_count(space, task, &plans).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GridError {
    #[error("report has no plans")]
    Empty,
    #[error("dimension index {0} out of range")]
    NoSuchDimension(usize),
    #[error("grid needs two different dimensions")]
    SameDimension,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    /// Rows are values of the second dimension, columns of the first.
    Cells,
    /// Long listing `plan,dimension,value`, goal orders expanded into
    /// their `a<=b` relations.
    Pairwise,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub kind: GridKind,
    pub csv: String,
}

/// Goal orders over more goals than this are listed pairwise rather than
/// laid out on an axis of up to |G|! orders.
pub const MAX_GRID_GOALS: usize = 4;

pub fn render_grid(report: &DiversityReport, dims: (usize, usize)) -> Result<Grid, GridError> {
    if report.plans.is_empty() {
        return Err(GridError::Empty);
    }
    let (a, b) = dims;
    for i in [a, b] {
        if i >= report.dimensions.len() {
            return Err(GridError::NoSuchDimension(i));
        }
    }
    if a == b {
        return Err(GridError::SameDimension);
    }
    let wide = |i: usize| {
        let d = &report.dimensions[i];
        d.kind == "goal_order" && d.goals.len() > MAX_GRID_GOALS
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    let kind = if wide(a) || wide(b) {
        w.write_record(["plan", "dimension", "value"]).expect("in-memory write");
        for p in &report.plans {
            let Json::Array(values) = &p.behaviour else {
                continue;
            };
            for i in [a, b] {
                let d = &report.dimensions[i];
                match &values[i] {
                    Json::Array(pairs) => {
                        for rel in pairs {
                            let rel = rel.as_str().unwrap_or_default();
                            w.write_record([p.id.as_str(), d.label.as_str(), rel]).expect("in-memory write");
                        }
                    }
                    v => {
                        let v = p.cell.as_ref().map_or_else(|| v.to_string(), |c| c[i].clone());
                        w.write_record([p.id.as_str(), d.label.as_str(), v.as_str()]).expect("in-memory write");
                    }
                }
            }
        }
        GridKind::Pairwise
    } else {
        let (da, db) = (&report.dimensions[a], &report.dimensions[b]);
        let mut header = vec![format!("{}\\{}", db.label, da.label)];
        header.extend(da.axis.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        for row in &db.axis {
            let mut rec = vec![row.clone()];
            for col in &da.axis {
                let ids: Vec<&str> = report
                    .plans
                    .iter()
                    .filter(|p| p.cell.as_ref().is_some_and(|c| &c[a] == col && &c[b] == row))
                    .map(|p| p.id.as_str())
                    .collect();
                rec.push(ids.join(" "));
            }
            w.write_record(&rec).expect("in-memory write");
        }
        GridKind::Cells
    };
    let csv = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv");
    Ok(Grid { kind, csv })
}

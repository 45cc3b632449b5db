//! Optimal-length search, cost bounds, and the behaviour-forbidding loops.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num_traits::Signed;

use crate::dimensions::{
    encode_space, forbid_behaviour, plan_behaviour, read_behaviour, Behaviour, BehaviourSpace,
    DimensionError,
};
use crate::encoding::{
    encode_task, extract_plan, forbid_plan, reconstruct_trace, EncodeOptions, EncodedTask, EncodingError, Plan,
};
use crate::grounding::{reachable_atoms, GroundTask};
use crate::pddl::Mode;
use crate::metrics::{validate_plan, ValidationError};
use crate::rational::Rational;
use crate::smt::{CheckResult, SolverConfig, SolverError};

#[derive(Debug, thiserror::Error)]
pub enum PlannerError {
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Dimension(#[from] DimensionError),
    #[error("solver produced an invalid plan: {0}")]
    InvalidPlan(#[from] ValidationError),
    #[error("encoded behaviour {model} disagrees with extracted behaviour {extracted}")]
    BehaviourMismatch { model: String, extracted: String },
}

impl From<SolverError> for PlannerError {
    fn from(e: SolverError) -> Self {
        PlannerError::Encoding(EncodingError::Solver(e))
    }
}

impl PlannerError {
    /// The failure is a solver running out of time or memory rather than a
    /// defect; loops report it as a budget stop.
    pub fn budget_reason(&self) -> Option<String> {
        let PlannerError::Encoding(EncodingError::Solver(e)) = self else {
            return None;
        };
        match e {
            SolverError::Crashed(m) | SolverError::Backend(m) => {
                let l = m.to_ascii_lowercase();
                ["memory", "timeout", "canceled", "cancelled", "resource"]
                    .iter()
                    .any(|w| l.contains(w))
                    .then(|| m.clone())
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LengthSearch {
    Found(usize),
    /// No plan up to the horizon cap.
    Exhausted,
    /// The solver gave up before an answer was found.
    Budget(String),
}

/// Least `n` such that a plan with exactly `n` actions exists.
pub fn find_optimal_length(
    task: &GroundTask,
    max_horizon: usize,
    solver: &SolverConfig,
) -> Result<LengthSearch, PlannerError> {
    let reach = reachable_atoms(task);
    if task.mode == Mode::Classical && task.goal.iter().any(|&g| !reach[g]) {
        return Ok(LengthSearch::Exhausted);
    }
    for n in 0..=max_horizon {
        match length_feasible(task, n, max_horizon, solver) {
            Ok(CheckResult::Sat) => return Ok(LengthSearch::Found(n)),
            Ok(CheckResult::Unsat) => {}
            Ok(CheckResult::Unknown(r)) => return Ok(LengthSearch::Budget(r)),
            Err(e) => return Ok(LengthSearch::Budget(e.budget_reason().ok_or(e)?)),
        }
    }
    Ok(LengthSearch::Exhausted)
}

fn length_feasible(
    task: &GroundTask,
    n: usize,
    max_horizon: usize,
    solver: &SolverConfig,
) -> Result<CheckResult, PlannerError> {
    let opts = EncodeOptions {
        exact_makespan: true,
        max_horizon,
    };
    let mut enc = encode_task(task, n, solver.open()?, opts)?;
    let r = enc.session.check_sat()?;
    if r == CheckResult::Sat {
        let plan = extract_plan(enc.session.get_model()?, &enc)?;
        validate_plan(task, &plan)?;
    }
    Ok(r)
}

/// `round(q · l)`, halves rounded away from zero.
pub fn compute_cost_bound(q: Rational, l: usize) -> usize {
    let x = q * Rational::from_integer(l as i64);
    let r = x.abs().round();
    r.to_integer().max(0) as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Behaviour,
    Plan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanRecord {
    pub plan: Plan,
    /// Behaviour under the run's space; `None` when a plan-phase plan falls
    /// outside a numeric box range.
    pub behaviour: Option<Behaviour>,
    pub phase: Phase,
    pub elapsed: Duration,
}

/// Ordered plans with their behaviours.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlanSet {
    pub records: Vec<PlanRecord>,
}

impl PlanSet {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn plans(&self) -> Vec<Plan> {
        self.records.iter().map(|r| r.plan.clone()).collect()
    }

    pub fn contains(&self, p: &Plan) -> bool {
        self.records.iter().any(|r| &r.plan == p)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunStatus {
    /// `k` plans found.
    Complete,
    /// The formula became unsatisfiable before `k` plans.
    Exhausted,
    /// The solver answered `unknown` (budget).
    Budget(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub plans: PlanSet,
    pub behaviour_count: usize,
    pub status: RunStatus,
    pub cost_bound: usize,
    pub behaviour_phase: Duration,
    pub plan_phase: Duration,
}

pub enum Generated {
    Plan(Plan, Option<Behaviour>),
    None,
    Budget(String),
}

/// Solve once on a session holding the task and space encodings; a found
/// behaviour is forbidden before returning.
pub fn behaviour_generator(
    task: &GroundTask,
    space: &BehaviourSpace,
    enc: &mut EncodedTask,
) -> Result<Generated, PlannerError> {
    match enc.session.check_sat()? {
        CheckResult::Unsat => return Ok(Generated::None),
        CheckResult::Unknown(r) => return Ok(Generated::Budget(r)),
        CheckResult::Sat => {}
    }
    let model = enc.session.get_model()?;
    reconstruct_trace(model, enc, task)?;
    let plan = extract_plan(model, enc)?;
    let trace = validate_plan(task, &plan)?;
    let from_model = read_behaviour(enc, model);
    let extracted = plan_behaviour(space, task, &plan, &trace)?;
    if from_model != extracted {
        return Err(PlannerError::BehaviourMismatch {
            model: from_model.to_string(),
            extracted: extracted.to_string(),
        });
    }
    forbid_behaviour(enc, &extracted)?;
    Ok(Generated::Plan(plan, Some(extracted)))
}

/// Solve once on a session without behaviour encodings; the found plan is
/// forbidden before returning.
pub fn plan_generator(task: &GroundTask, space: &BehaviourSpace, enc: &mut EncodedTask) -> Result<Generated, PlannerError> {
    match enc.session.check_sat()? {
        CheckResult::Unsat => return Ok(Generated::None),
        CheckResult::Unknown(r) => return Ok(Generated::Budget(r)),
        CheckResult::Sat => {}
    }
    let model = enc.session.get_model()?;
    reconstruct_trace(model, enc, task)?;
    let plan = extract_plan(model, enc)?;
    let trace = validate_plan(task, &plan)?;
    let behaviour = plan_behaviour(space, task, &plan, &trace).ok();
    forbid_plan(enc, &plan)?;
    Ok(Generated::Plan(plan, behaviour))
}

fn open_diverse(
    task: &GroundTask,
    c: usize,
    space: Option<&BehaviourSpace>,
    solver: &SolverConfig,
) -> Result<EncodedTask, PlannerError> {
    let opts = EncodeOptions {
        exact_makespan: false,
        max_horizon: c.max(crate::encoding::DEFAULT_MAX_HORIZON),
    };
    let mut enc = encode_task(task, c, solver.open()?, opts)?;
    enc.cost_bound = c;
    if let Some(space) = space {
        encode_space(space, &mut enc, task)?;
    }
    Ok(enc)
}

fn reached(k: Option<usize>, have: usize) -> bool {
    k.is_some_and(|k| have >= k)
}

/// Generate plans with pairwise-distinct behaviours at horizon `c` until
/// `k` are found (`None` = until exhaustion).
pub fn fbi(
    task: &GroundTask,
    space: &BehaviourSpace,
    k: Option<usize>,
    c: usize,
    solver: &SolverConfig,
) -> Result<RunOutcome, PlannerError> {
    let start = Instant::now();
    let mut plans = PlanSet::default();
    let mut enc = match open_diverse(task, c, Some(space), solver) {
        Ok(e) => e,
        Err(e) => {
            let r = e.budget_reason().ok_or(e)?;
            return Ok(RunOutcome {
                plans,
                behaviour_count: 0,
                status: RunStatus::Budget(r),
                cost_bound: c,
                behaviour_phase: start.elapsed(),
                plan_phase: Duration::ZERO,
            });
        }
    };
    let status = loop {
        if reached(k, plans.len()) {
            break RunStatus::Complete;
        }
        let next = match behaviour_generator(task, space, &mut enc) {
            Ok(g) => g,
            Err(e) => Generated::Budget(e.budget_reason().ok_or(e)?),
        };
        match next {
            Generated::Plan(plan, behaviour) => {
                log::debug!("behaviour phase: plan of length {}", plan.len());
                plans.records.push(PlanRecord {
                    plan,
                    behaviour,
                    phase: Phase::Behaviour,
                    elapsed: start.elapsed(),
                });
            }
            Generated::None => break RunStatus::Exhausted,
            Generated::Budget(r) => break RunStatus::Budget(r),
        }
    };
    Ok(RunOutcome {
        behaviour_count: plans.len(),
        plans,
        status,
        cost_bound: c,
        behaviour_phase: start.elapsed(),
        plan_phase: Duration::ZERO,
    })
}

/// [`fbi`], then top up to `k` with further distinct plans from a fresh
/// session that carries no behaviour encodings.
pub fn fbi_k(
    task: &GroundTask,
    space: &BehaviourSpace,
    k: Option<usize>,
    c: usize,
    solver: &SolverConfig,
) -> Result<RunOutcome, PlannerError> {
    let start = Instant::now();
    let mut out = fbi(task, space, k, c, solver)?;
    if out.status != RunStatus::Exhausted {
        return Ok(out);
    }
    let phase_start = Instant::now();
    let opened = open_diverse(task, c, None, solver).and_then(|mut enc| {
        for r in &out.plans.records {
            forbid_plan(&mut enc, &r.plan)?;
        }
        Ok(enc)
    });
    let mut enc = match opened {
        Ok(e) => e,
        Err(e) => {
            out.status = RunStatus::Budget(e.budget_reason().ok_or(e)?);
            out.plan_phase = phase_start.elapsed();
            return Ok(out);
        }
    };
    out.status = loop {
        if reached(k, out.plans.len()) {
            break RunStatus::Complete;
        }
        let next = match plan_generator(task, space, &mut enc) {
            Ok(g) => g,
            Err(e) => Generated::Budget(e.budget_reason().ok_or(e)?),
        };
        match next {
            Generated::Plan(plan, behaviour) => {
                debug_assert!(!out.plans.contains(&plan));
                out.plans.records.push(PlanRecord {
                    plan,
                    behaviour,
                    phase: Phase::Plan,
                    elapsed: start.elapsed(),
                });
            }
            Generated::None => break RunStatus::Exhausted,
            Generated::Budget(r) => break RunStatus::Budget(r),
        }
    };
    out.plan_phase = phase_start.elapsed();
    Ok(out)
}

/// Baseline: [`fbi_k`] over the empty space (one plan, then plain plan
/// forbidding), with behaviours measured afterwards under `space`.
pub fn naive(
    task: &GroundTask,
    space: &BehaviourSpace,
    k: Option<usize>,
    c: usize,
    solver: &SolverConfig,
) -> Result<RunOutcome, PlannerError> {
    let mut out = fbi_k(task, &BehaviourSpace::empty(), k, c, solver)?;
    for r in &mut out.plans.records {
        let trace = validate_plan(task, &r.plan)?;
        r.behaviour = plan_behaviour(space, task, &r.plan, &trace).ok();
    }
    out.behaviour_count = distinct_behaviours(&out.plans);
    Ok(out)
}

/// Number of distinct known behaviours in `plans`.
pub fn distinct_behaviours(plans: &PlanSet) -> usize {
    let set: BTreeSet<&Behaviour> = plans.records.iter().filter_map(|r| r.behaviour.as_ref()).collect();
    set.len()
}

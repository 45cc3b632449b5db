//! Sequential step-indexed encoding of a ground task, and decoding of
//! solver models back into plans and state traces.
//!
//! Step `i` (0-based, `i < n`) selects at most one action, which reads the
//! state at `i` and writes the state at `i + 1`. Empty steps are allowed
//! but only after the last non-empty one, so every action sequence has
//! exactly one step assignment.

use std::fmt;

use num_traits::Zero;

use crate::dimensions::{Behaviour, DimExpr};
use crate::grounding::{ActionId, GroundTask, LinExpr, NumCondition, State};
use crate::pddl::Mode;
use crate::rational::Rational;
use crate::smt::{
    and, cmp, eq, iff, implies, not, or, real, scale, sum, var, Session, SolverError, SolverModel, Sort, Term,
    Var,
};

pub const DEFAULT_MAX_HORIZON: usize = 1000;

#[derive(Debug, thiserror::Error)]
pub enum EncodingError {
    #[error("horizon {horizon} exceeds the cap of {cap}")]
    HorizonTooLarge { horizon: usize, cap: usize },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("model is inconsistent with the encoding: {0}")]
    Inconsistent(String),
}

/// A sequence of ground actions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Plan(pub Vec<ActionId>);

impl Plan {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self, task: &GroundTask) -> Vec<String> {
        self.0.iter().map(|&a| task.actions[a].name()).collect()
    }

    /// Look up actions by name, e.g. `["(move a b)", "(finish b)"]`.
    pub fn from_names<S: AsRef<str>>(task: &GroundTask, names: &[S]) -> Option<Plan> {
        names
            .iter()
            .map(|n| task.action_by_name(n.as_ref()))
            .collect::<Option<Vec<_>>>()
            .map(Plan)
    }
}

/// Per-step states, step 0 being the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateTrace {
    pub states: Vec<State>,
}

impl StateTrace {
    pub fn last(&self) -> &State {
        self.states.last().expect("trace has an initial state")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncodeOptions {
    /// Force every step to be non-empty (exact makespan queries).
    pub exact_makespan: bool,
    pub max_horizon: usize,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        EncodeOptions {
            exact_makespan: false,
            max_horizon: DEFAULT_MAX_HORIZON,
        }
    }
}

/// The formula for one horizon, living in its solver session.
pub struct EncodedTask {
    pub session: Session,
    pub horizon: usize,
    /// `action_vars[i][a]`: action `a` selected at step `i`.
    pub action_vars: Vec<Vec<Var>>,
    /// `atom_vars[i][p]` for `i` in `0..=n`.
    pub atom_vars: Vec<Vec<Var>>,
    /// `fluent_vars[i][f]` for `i` in `0..=n`.
    pub fluent_vars: Vec<Vec<Var>>,
    /// `step_vars[i]` ⇔ some action is selected at step `i`.
    pub step_vars: Vec<Var>,
    /// Cost bound `c ≤ n` used by the cost dimension.
    pub cost_bound: usize,
    /// One handle per encoded behaviour dimension, in space order.
    pub dimension_exprs: Vec<DimExpr>,
    pub forbidden_behaviours: Vec<Behaviour>,
    pub forbidden_plans: Vec<Plan>,
}

impl fmt::Debug for EncodedTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EncodedTask")
            .field("horizon", &self.horizon)
            .field("session", &self.session)
            .field("dimensions", &self.dimension_exprs.len())
            .field("forbidden_behaviours", &self.forbidden_behaviours.len())
            .field("forbidden_plans", &self.forbidden_plans.len())
            .finish()
    }
}

fn lin_term(e: &LinExpr, fluents: &[Var]) -> Term {
    let mut parts = Vec::with_capacity(e.terms.len() + 1);
    if !e.constant.is_zero() || e.terms.is_empty() {
        parts.push(real(e.constant));
    }
    for (f, c) in &e.terms {
        if *c == Rational::from_integer(1) {
            parts.push(var(fluents[*f]));
        } else {
            parts.push(scale(*c, var(fluents[*f])));
        }
    }
    sum(parts)
}

pub(crate) fn condition_term(c: &NumCondition, fluents: &[Var]) -> Term {
    cmp(c.op, lin_term(&c.expr, fluents), real(Rational::zero()))
}

/// Assert "at most one of `xs`" with a sequential counter when the set is
/// large, pairwise otherwise.
fn at_most_one(s: &mut Session, xs: &[Var], tag: &str) -> Result<(), SolverError> {
    if xs.len() <= 8 {
        for i in 0..xs.len() {
            for j in i + 1..xs.len() {
                s.assert_formula(or(vec![not(var(xs[i])), not(var(xs[j]))]))?;
            }
        }
        return Ok(());
    }
    let mut prev: Option<Var> = None;
    for (j, &x) in xs.iter().enumerate() {
        let last = j + 1 == xs.len();
        if let Some(p) = prev {
            s.assert_formula(implies(var(x), not(var(p))))?;
        }
        if !last {
            let sj = s.declare(&format!("amo_{tag}_{j}"), Sort::Bool)?;
            s.assert_formula(implies(var(x), var(sj)))?;
            if let Some(p) = prev {
                s.assert_formula(implies(var(p), var(sj)))?;
            }
            prev = Some(sj);
        }
    }
    Ok(())
}

/// Assert the horizon-`n` formula for `task` into `session`.
pub fn encode_task(
    task: &GroundTask,
    n: usize,
    mut session: Session,
    opts: EncodeOptions,
) -> Result<EncodedTask, EncodingError> {
    if n > opts.max_horizon {
        return Err(EncodingError::HorizonTooLarge {
            horizon: n,
            cap: opts.max_horizon,
        });
    }
    let s = &mut session;
    let mut atom_vars = Vec::with_capacity(n + 1);
    let mut fluent_vars = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut row = Vec::with_capacity(task.atoms.len());
        for p in &task.atoms {
            row.push(s.declare(&format!("p{i}_{}", p.underscore_name()), Sort::Bool)?);
        }
        atom_vars.push(row);
        let mut frow = Vec::with_capacity(task.fluents.len());
        for f in &task.fluents {
            frow.push(s.declare(&format!("f{i}_{}", f.underscore_name()), Sort::Real)?);
        }
        fluent_vars.push(frow);
    }
    let mut action_vars = Vec::with_capacity(n);
    let mut step_vars = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(task.actions.len());
        for a in &task.actions {
            row.push(s.declare(&format!("a{i}_{}_{}", a.schema, a.args.join("_")), Sort::Bool)?);
        }
        action_vars.push(row);
        step_vars.push(s.declare(&format!("step{i}"), Sort::Bool)?);
    }

    // Initial state.
    for (p, &v) in atom_vars[0].iter().enumerate() {
        s.assert_formula(if task.init[p] { var(v) } else { not(var(v)) })?;
    }
    for (f, &v) in fluent_vars[0].iter().enumerate() {
        s.assert_formula(eq(var(v), real(task.fluent_init[f])))?;
    }

    let mut adders = vec![Vec::new(); task.atoms.len()];
    let mut deleters = vec![Vec::new(); task.atoms.len()];
    let mut updaters = vec![Vec::new(); task.fluents.len()];
    for a in &task.actions {
        for &p in &a.add {
            adders[p].push(a.id);
        }
        for &p in &a.del {
            deleters[p].push(a.id);
        }
        for e in &a.num_eff {
            updaters[e.fluent].push(a.id);
        }
    }

    for i in 0..n {
        let acts = &action_vars[i];
        let (now, next) = (&atom_vars[i], &atom_vars[i + 1]);
        let (fnow, fnext) = (&fluent_vars[i], &fluent_vars[i + 1]);
        s.assert_formula(iff(var(step_vars[i]), or(acts.iter().map(|&v| var(v)).collect())))?;
        if opts.exact_makespan {
            s.assert_formula(var(step_vars[i]))?;
        } else if i + 1 < n {
            s.assert_formula(implies(var(step_vars[i + 1]), var(step_vars[i])))?;
        }
        at_most_one(s, acts, &i.to_string())?;
        for a in &task.actions {
            let mut parts = Vec::new();
            parts.extend(a.pre_pos.iter().map(|&p| var(now[p])));
            parts.extend(a.pre_neg.iter().map(|&p| not(var(now[p]))));
            parts.extend(a.num_pre.iter().map(|c| condition_term(c, fnow)));
            parts.extend(a.add.iter().map(|&p| var(next[p])));
            parts.extend(a.del.iter().map(|&p| not(var(next[p]))));
            for e in &a.num_eff {
                parts.push(eq(var(fnext[e.fluent]), lin_term(&e.value, fnow)));
            }
            if !parts.is_empty() {
                s.assert_formula(implies(var(acts[a.id]), and(parts)))?;
            }
        }
        for p in 0..task.atoms.len() {
            let added = or(adders[p].iter().map(|&a| var(acts[a])).collect());
            let deleted = or(deleters[p].iter().map(|&a| var(acts[a])).collect());
            s.assert_formula(implies(and(vec![not(var(now[p])), var(next[p])]), added))?;
            s.assert_formula(implies(and(vec![var(now[p]), not(var(next[p]))]), deleted))?;
        }
        for f in 0..task.fluents.len() {
            let updated = or(updaters[f].iter().map(|&a| var(acts[a])).collect());
            s.assert_formula(or(vec![updated, eq(var(fnext[f]), var(fnow[f]))]))?;
        }
    }

    if task.mode != Mode::Osp {
        for &g in &task.goal {
            s.assert_formula(var(atom_vars[n][g]))?;
        }
        for c in &task.goal_numeric {
            s.assert_formula(condition_term(c, &fluent_vars[n]))?;
        }
    }

    Ok(EncodedTask {
        session,
        horizon: n,
        action_vars,
        atom_vars,
        fluent_vars,
        step_vars,
        cost_bound: n,
        dimension_exprs: Vec::new(),
        forbidden_behaviours: Vec::new(),
        forbidden_plans: Vec::new(),
    })
}

/// Selected actions in step order, skipping empty steps.
pub fn extract_plan(model: &SolverModel, enc: &EncodedTask) -> Result<Plan, EncodingError> {
    let mut plan = Vec::new();
    for (i, row) in enc.action_vars.iter().enumerate() {
        let chosen: Vec<ActionId> = (0..row.len()).filter(|&a| model.bool(row[a])).collect();
        match chosen.as_slice() {
            [] => {}
            [a] => plan.push(*a),
            many => {
                return Err(EncodingError::Inconsistent(format!(
                    "{} actions selected at step {i}",
                    many.len()
                )))
            }
        }
    }
    Ok(Plan(plan))
}

/// Read the per-step states from the model and check them against
/// simulating the extracted plan.
pub fn reconstruct_trace(model: &SolverModel, enc: &EncodedTask, task: &GroundTask) -> Result<StateTrace, EncodingError> {
    let states: Vec<State> = (0..=enc.horizon)
        .map(|i| State {
            atoms: enc.atom_vars[i].iter().map(|&v| model.bool(v)).collect(),
            fluents: enc.fluent_vars[i].iter().map(|&v| model.num(v)).collect(),
        })
        .collect();
    let plan = extract_plan(model, enc)?;
    let sim = task
        .simulate(&plan.0)
        .map_err(|i| EncodingError::Inconsistent(format!("extracted action at position {i} is inapplicable")))?;
    for (i, st) in states.iter().enumerate() {
        let expect = &sim[i.min(sim.len() - 1)];
        if st != expect {
            return Err(EncodingError::Inconsistent(format!("state at step {i} differs from simulation")));
        }
    }
    Ok(StateTrace { states })
}

/// Exclude `plan`'s exact step assignment: some step deviates, or a step
/// beyond its length is non-empty.
pub fn forbid_plan(enc: &mut EncodedTask, plan: &Plan) -> Result<(), EncodingError> {
    if plan.len() > enc.horizon {
        // Cannot be produced at this horizon anyway.
        enc.forbidden_plans.push(plan.clone());
        return Ok(());
    }
    let mut lits: Vec<Term> = plan
        .0
        .iter()
        .enumerate()
        .map(|(i, &a)| not(var(enc.action_vars[i][a])))
        .collect();
    lits.extend((plan.len()..enc.horizon).map(|i| var(enc.step_vars[i])));
    enc.session.assert_formula(or(lits))?;
    enc.forbidden_plans.push(plan.clone());
    Ok(())
}

/// Number of non-empty steps in the model.
pub fn model_length(model: &SolverModel, enc: &EncodedTask) -> usize {
    enc.step_vars.iter().filter(|&&v| model.bool(v)).count()
}

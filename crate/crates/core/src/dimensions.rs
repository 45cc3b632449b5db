//! Behaviour dimensions: construction from the feature configuration,
//! formula encodings, value extraction from plans, and behaviour
//! forbidding.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::Zero;
use serde_json::{json, Value as Json};

use crate::encoding::{EncodedTask, EncodingError, Plan, StateTrace};
use crate::grounding::{AtomId, FluentId, GroundTask};
use crate::pddl::{DimensionSpec, FeatureConfig, GroundAtom, NumericBox};
use crate::rational::{format_rational, Rational};
use crate::smt::{
    and, eq, ge, iff, implies, indicator, int, ite, le, lt, not, or, real, sum, var, SolverError, SolverModel,
    Sort, Term, Var,
};

#[derive(Debug, thiserror::Error)]
pub enum DimensionError {
    #[error("feature configuration refers to unknown {what} `{name}`")]
    Dangling { what: &'static str, name: String },
    #[error("`{0}` is not a goal atom")]
    NotAGoal(String),
    #[error("numeric_fluent dimension needs a task with numeric fluents")]
    ModeMismatch,
    #[error("final value {value} of `{fluent}` lies outside [{min}, {max}]")]
    OutOfRange {
        fluent: String,
        value: String,
        min: String,
        max: String,
    },
    #[error("plan action at position {0} is inapplicable")]
    InvalidPlan(usize),
    #[error("behaviour has {got} values but the space has {want} dimensions")]
    Arity { got: usize, want: usize },
    #[error(transparent)]
    Solver(#[from] SolverError),
}

impl From<DimensionError> for EncodingError {
    fn from(e: DimensionError) -> Self {
        match e {
            DimensionError::Solver(s) => EncodingError::Solver(s),
            other => EncodingError::Inconsistent(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Dimension {
    CostBound,
    ResourceUtilisation { resources: Vec<String> },
    GoalOrder { goals: Vec<AtomId> },
    UtilityValue { utilities: Vec<(AtomId, Rational)> },
    NumericFluent { fluent: FluentId, spec: NumericBox },
}

impl Dimension {
    pub fn kind(&self) -> &'static str {
        match self {
            Dimension::CostBound => "cost_bound",
            Dimension::ResourceUtilisation { .. } => "resource_utilisation",
            Dimension::GoalOrder { .. } => "goal_order",
            Dimension::UtilityValue { .. } => "utility_value",
            Dimension::NumericFluent { .. } => "numeric_fluent",
        }
    }

    /// Short human label, e.g. `numeric_fluent(energy rover0)`.
    pub fn label(&self, task: &GroundTask) -> String {
        match self {
            Dimension::NumericFluent { fluent, .. } => format!("numeric_fluent{}", task.fluents[*fluent]),
            other => other.kind().to_string(),
        }
    }
}

/// Ordered list of dimensions.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BehaviourSpace {
    pub dimensions: Vec<Dimension>,
}

impl BehaviourSpace {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.dimensions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dimensions.is_empty()
    }
}

/// One coordinate of a behaviour.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DimValue {
    Int(i64),
    Rat(Rational),
    /// `m[a][b]` ⇔ goal `a` is first achieved no later than goal `b`.
    Order(Vec<Vec<bool>>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Behaviour(pub Vec<DimValue>);

impl fmt::Display for Behaviour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            match v {
                DimValue::Int(x) => write!(f, "{x}")?,
                DimValue::Rat(r) => write!(f, "{}", format_rational(r))?,
                DimValue::Order(m) => {
                    let ranks = order_ranks(m);
                    write!(f, "{}", ranks.iter().map(|r| r.to_string()).collect::<Vec<_>>().join("/"))?
                }
            }
        }
        write!(f, "⟩")
    }
}

/// Formula handle of an encoded dimension.
#[derive(Debug, Clone, PartialEq)]
pub enum DimExpr {
    Int(Var),
    Real(Var),
    /// Off-diagonal `to_ab` variables; the diagonal is `None`.
    Order(Vec<Vec<Option<Var>>>),
}

/// Resolve the feature configuration against `task`, checking every
/// reference.
pub fn build_behaviour_space(cfg: &FeatureConfig, task: &GroundTask) -> Result<BehaviourSpace, DimensionError> {
    let mut dimensions = Vec::new();
    for spec in &cfg.dimensions {
        dimensions.push(match spec {
            DimensionSpec::CostBound => Dimension::CostBound,
            DimensionSpec::ResourceUtilisation { resources } => {
                for r in resources {
                    if task.objects.binary_search(r).is_err() {
                        return Err(DimensionError::Dangling {
                            what: "object",
                            name: r.clone(),
                        });
                    }
                }
                Dimension::ResourceUtilisation {
                    resources: resources.clone(),
                }
            }
            DimensionSpec::GoalOrder => Dimension::GoalOrder {
                goals: task.goal.clone(),
            },
            DimensionSpec::UtilityValue { utilities } => {
                let mut out = Vec::new();
                for (name, u) in utilities {
                    let id = GroundAtom::parse_loose(name)
                        .and_then(|a| task.atom_id(&a))
                        .filter(|id| task.goal.contains(id))
                        .ok_or_else(|| DimensionError::NotAGoal(name.clone()))?;
                    out.push((id, *u));
                }
                Dimension::UtilityValue { utilities: out }
            }
            DimensionSpec::NumericFluent(b) => {
                if task.fluents.is_empty() {
                    return Err(DimensionError::ModeMismatch);
                }
                let fluent = task.fluent_id(&b.fluent).ok_or_else(|| DimensionError::Dangling {
                    what: "fluent",
                    name: b.fluent.clone(),
                })?;
                Dimension::NumericFluent {
                    fluent,
                    spec: b.clone(),
                }
            }
        });
    }
    Ok(BehaviourSpace { dimensions })
}

/// Assert the dimension's constraints and register its handle on `enc`.
pub fn encode_dimension(dim: &Dimension, enc: &mut EncodedTask, task: &GroundTask) -> Result<DimExpr, DimensionError> {
    let n = enc.horizon;
    let tag = enc.dimension_exprs.len();
    let expr = match dim {
        Dimension::CostBound => {
            let s = &mut enc.session;
            let cvalue = s.declare(&format!("cvalue_{tag}"), Sort::Int)?;
            let steps: Vec<Term> = enc.step_vars.iter().map(|&w| indicator(var(w))).collect();
            s.assert_formula(eq(var(cvalue), sum(steps)))?;
            s.assert_formula(le(var(cvalue), int(enc.cost_bound as i64)))?;
            DimExpr::Int(cvalue)
        }
        Dimension::ResourceUtilisation { resources } => {
            let mut used = Vec::new();
            for r in resources {
                let u = enc.session.declare(&format!("used_{r}_{tag}"), Sort::Bool)?;
                let mut lits = Vec::new();
                for row in &enc.action_vars {
                    for a in task.actions.iter().filter(|a| a.uses_object(r)) {
                        lits.push(var(row[a.id]));
                    }
                }
                enc.session.assert_formula(iff(var(u), or(lits)))?;
                used.push(indicator(var(u)));
            }
            let ru = enc.session.declare(&format!("ru_{tag}"), Sort::Int)?;
            enc.session.assert_formula(eq(var(ru), sum(used)))?;
            DimExpr::Int(ru)
        }
        Dimension::GoalOrder { goals } => {
            let mut psteps = Vec::new();
            for (gi, &g) in goals.iter().enumerate() {
                let ps = enc.session.declare(&format!("pstep_{gi}_{tag}"), Sort::Int)?;
                let at = |i: usize| var(enc.atom_vars[i][g]);
                enc.session.assert_formula(ge(var(ps), int(-1)))?;
                enc.session.assert_formula(le(var(ps), int(n as i64)))?;
                for i in 0..=n {
                    let mut first = vec![at(i)];
                    first.extend((0..i).map(|j| not(at(j))));
                    enc.session.assert_formula(iff(eq(var(ps), int(i as i64)), and(first)))?;
                }
                let never = and((0..=n).map(|j| not(at(j))).collect());
                enc.session.assert_formula(iff(eq(var(ps), int(-1)), never))?;
                psteps.push(ps);
            }
            let k = goals.len();
            let mut m = vec![vec![None; k]; k];
            for a in 0..k {
                for b in 0..k {
                    if a == b {
                        continue;
                    }
                    let to = enc.session.declare(&format!("to_{a}_{b}_{tag}"), Sort::Bool)?;
                    enc.session
                        .assert_formula(iff(var(to), le(var(psteps[a]), var(psteps[b]))))?;
                    m[a][b] = Some(to);
                }
            }
            DimExpr::Order(m)
        }
        Dimension::UtilityValue { utilities } => {
            let uv = enc.session.declare(&format!("uv_{tag}"), Sort::Real)?;
            let parts: Vec<Term> = utilities
                .iter()
                .map(|(g, u)| ite(var(enc.atom_vars[n][*g]), real(*u), real(Rational::zero())))
                .collect();
            let total = if parts.is_empty() { real(Rational::zero()) } else { sum(parts) };
            enc.session.assert_formula(eq(var(uv), total))?;
            DimExpr::Real(uv)
        }
        Dimension::NumericFluent { fluent, spec } => {
            let x = var(enc.fluent_vars[n][*fluent]);
            let count = spec.box_count();
            let bx = enc.session.declare(&format!("box_{fluent}_{tag}"), Sort::Int)?;
            let s = &mut enc.session;
            s.assert_formula(ge(x.clone(), real(spec.min)))?;
            s.assert_formula(le(x.clone(), real(spec.max)))?;
            s.assert_formula(ge(var(bx), int(0)))?;
            s.assert_formula(lt(var(bx), int(count)))?;
            for i in 0..count {
                let lo = spec.min + spec.epsilon * Rational::from_integer(i);
                let upper = if i + 1 == count {
                    le(x.clone(), real(spec.max))
                } else {
                    lt(x.clone(), real(lo + spec.epsilon))
                };
                s.assert_formula(implies(and(vec![ge(x.clone(), real(lo)), upper]), eq(var(bx), int(i))))?;
            }
            DimExpr::Int(bx)
        }
    };
    enc.dimension_exprs.push(expr.clone());
    Ok(expr)
}

/// Encode every dimension of `space` onto `enc`, in order.
pub fn encode_space(space: &BehaviourSpace, enc: &mut EncodedTask, task: &GroundTask) -> Result<(), DimensionError> {
    for d in &space.dimensions {
        encode_dimension(d, enc, task)?;
    }
    Ok(())
}

/// Behaviour read from the model through the dimension handles.
pub fn read_behaviour(enc: &EncodedTask, model: &SolverModel) -> Behaviour {
    Behaviour(
        enc.dimension_exprs
            .iter()
            .map(|e| match e {
                DimExpr::Int(v) => DimValue::Int(model.num(*v).to_integer()),
                DimExpr::Real(v) => DimValue::Rat(model.num(*v)),
                DimExpr::Order(m) => DimValue::Order(
                    m.iter()
                        .map(|row| row.iter().map(|c| c.is_none_or(|v| model.bool(v))).collect())
                        .collect(),
                ),
            })
            .collect(),
    )
}

fn first_achievement(trace: &StateTrace, g: AtomId) -> i64 {
    trace
        .states
        .iter()
        .position(|s| s.atoms[g])
        .map_or(-1, |i| i as i64)
}

/// The extracting function of one dimension, computed from a plan and its
/// simulated trace.
pub fn extract_dimension_value(
    dim: &Dimension,
    task: &GroundTask,
    plan: &Plan,
    trace: &StateTrace,
) -> Result<DimValue, DimensionError> {
    Ok(match dim {
        Dimension::CostBound => DimValue::Int(plan.len() as i64),
        Dimension::ResourceUtilisation { resources } => DimValue::Int(
            resources
                .iter()
                .filter(|r| plan.0.iter().any(|&a| task.actions[a].uses_object(r)))
                .count() as i64,
        ),
        Dimension::GoalOrder { goals } => {
            let steps: Vec<i64> = goals.iter().map(|&g| first_achievement(trace, g)).collect();
            DimValue::Order(steps.iter().map(|a| steps.iter().map(|b| a <= b).collect()).collect())
        }
        Dimension::UtilityValue { utilities } => DimValue::Rat(
            utilities
                .iter()
                .filter(|(g, _)| trace.last().atoms[*g])
                .map(|(_, u)| *u)
                .sum(),
        ),
        Dimension::NumericFluent { fluent, spec } => {
            let value = trace.last().fluents[*fluent];
            DimValue::Int(spec.box_of(value).ok_or_else(|| DimensionError::OutOfRange {
                fluent: task.fluents[*fluent].to_string(),
                value: format_rational(&value),
                min: format_rational(&spec.min),
                max: format_rational(&spec.max),
            })?)
        }
    })
}

pub fn plan_behaviour(
    space: &BehaviourSpace,
    task: &GroundTask,
    plan: &Plan,
    trace: &StateTrace,
) -> Result<Behaviour, DimensionError> {
    space
        .dimensions
        .iter()
        .map(|d| extract_dimension_value(d, task, plan, trace))
        .collect::<Result<Vec<_>, _>>()
        .map(Behaviour)
}

/// Assert that no later model has behaviour `b`.
pub fn forbid_behaviour(enc: &mut EncodedTask, b: &Behaviour) -> Result<(), DimensionError> {
    if b.0.len() != enc.dimension_exprs.len() {
        return Err(DimensionError::Arity {
            got: b.0.len(),
            want: enc.dimension_exprs.len(),
        });
    }
    let mut same = Vec::new();
    for (e, v) in enc.dimension_exprs.iter().zip(&b.0) {
        match (e, v) {
            (DimExpr::Int(x), DimValue::Int(i)) => same.push(eq(var(*x), int(*i))),
            (DimExpr::Real(x), DimValue::Rat(r)) => same.push(eq(var(*x), real(*r))),
            (DimExpr::Order(m), DimValue::Order(vals)) => {
                for (row, vrow) in m.iter().zip(vals) {
                    for (c, &truth) in row.iter().zip(vrow) {
                        if let Some(to) = c {
                            same.push(if truth { var(*to) } else { not(var(*to)) });
                        }
                    }
                }
            }
            _ => {
                return Err(DimensionError::Arity {
                    got: b.0.len(),
                    want: enc.dimension_exprs.len(),
                })
            }
        }
    }
    enc.session.assert_formula(not(Term::And(same)))?;
    enc.forbidden_behaviours.push(b.clone());
    Ok(())
}

/// Number of distinct behaviours among `plans`; plans that do not simulate
/// are an error.
pub fn behaviour_count(space: &BehaviourSpace, task: &GroundTask, plans: &[Plan]) -> Result<usize, DimensionError> {
    let mut seen = BTreeSet::new();
    for p in plans {
        let states = task.simulate(&p.0).map_err(DimensionError::InvalidPlan)?;
        seen.insert(plan_behaviour(space, task, p, &StateTrace { states })?);
    }
    Ok(seen.len())
}

/// Rank of each goal in a pairwise order matrix: the number of goals
/// strictly before it.
pub fn order_ranks(m: &[Vec<bool>]) -> Vec<usize> {
    (0..m.len())
        .map(|a| (0..m.len()).filter(|&b| m[b][a] && !m[a][b]).count())
        .collect()
}

/// One-letter labels for goals, taken from the first predicate-name segment
/// that tells them apart (`communicated_soil_data` → `S`), falling back to
/// `G1`, `G2`, ...
pub fn goal_labels(task: &GroundTask, goals: &[AtomId]) -> Vec<String> {
    let segs: Vec<Vec<&str>> = goals
        .iter()
        .map(|&g| task.atoms[g].predicate.split(['_', '-']).collect())
        .collect();
    let depth = segs.iter().map(|s| s.len()).min().unwrap_or(0);
    for d in 0..depth {
        let labels: Vec<String> = segs
            .iter()
            .map(|s| s[d].chars().next().map(|c| c.to_ascii_uppercase().to_string()).unwrap_or_default())
            .collect();
        let distinct: BTreeSet<&String> = labels.iter().collect();
        if distinct.len() == labels.len() {
            return labels;
        }
    }
    (1..=goals.len()).map(|i| format!("G{i}")).collect()
}

/// `R-I-S` style rendering of an order value; simultaneous goals are joined
/// with `=`, never-achieved goals rank first.
pub fn order_label(m: &[Vec<bool>], labels: &[String]) -> String {
    let ranks = order_ranks(m);
    let mut idx: Vec<usize> = (0..m.len()).collect();
    idx.sort_by_key(|&i| (ranks[i], i));
    let mut out = String::new();
    for (k, &i) in idx.iter().enumerate() {
        if k > 0 {
            out.push(if ranks[i] == ranks[idx[k - 1]] { '=' } else { '-' });
        }
        out.push_str(&labels[i]);
    }
    out
}

/// JSON form: numbers for scalar values, a sorted list of `a<=b` strings
/// for goal orders.
pub fn behaviour_json(space: &BehaviourSpace, task: &GroundTask, b: &Behaviour) -> Json {
    let values: Vec<Json> = space
        .dimensions
        .iter()
        .zip(&b.0)
        .map(|(d, v)| match (d, v) {
            (_, DimValue::Int(i)) => json!(i),
            (_, DimValue::Rat(r)) => rational_json(r),
            (Dimension::GoalOrder { goals }, DimValue::Order(m)) => {
                let mut pairs = Vec::new();
                for a in 0..goals.len() {
                    for c in 0..goals.len() {
                        if a != c && m[a][c] {
                            pairs.push(format!("{}<={}", task.atoms[goals[a]], task.atoms[goals[c]]));
                        }
                    }
                }
                pairs.sort();
                json!(pairs)
            }
            (_, DimValue::Order(_)) => Json::Null,
        })
        .collect();
    Json::Array(values)
}

pub fn rational_json(r: &Rational) -> Json {
    if r.is_integer() {
        json!(r.to_integer())
    } else {
        json!(*r.numer() as f64 / *r.denom() as f64)
    }
}

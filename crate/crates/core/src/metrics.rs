//! Plan validation by simulation, plan cost and utility, stability-based
//! diversity metrics, and a brute-force plan enumerator.

use std::collections::BTreeSet;

use num_traits::{One, Zero};

use crate::encoding::{Plan, StateTrace};
use crate::grounding::{ActionId, AtomId, GroundTask, State};
use crate::rational::Rational;

pub const DEFAULT_ORACLE_NODE_CAP: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValidationError {
    #[error("action {action} at step {step} is not applicable")]
    Inapplicable { step: usize, action: String },
    #[error("final state does not satisfy the goal")]
    GoalUnsatisfied,
}

/// Simulate `plan` from the initial state, checking applicability and the
/// goal (the latter skipped for over-subscription tasks).
pub fn validate_plan(task: &GroundTask, plan: &Plan) -> Result<StateTrace, ValidationError> {
    let mut state = task.initial_state();
    let mut states = vec![state.clone()];
    for (step, &a) in plan.0.iter().enumerate() {
        if a >= task.actions.len() || !task.applicable(&state, a) {
            let action = task.actions.get(a).map_or_else(|| format!("#{a}"), |x| x.name());
            return Err(ValidationError::Inapplicable { step, action });
        }
        state = task.apply(&state, a);
        states.push(state.clone());
    }
    if !task.goal_satisfied(&state) {
        return Err(ValidationError::GoalUnsatisfied);
    }
    Ok(StateTrace { states })
}

/// Unit action costs: the plan length.
pub fn compute_plan_cost(plan: &Plan) -> usize {
    plan.len()
}

/// Sum of the utilities of goal atoms true in the final state.
pub fn compute_utility(utilities: &[(AtomId, Rational)], trace: &StateTrace) -> Rational {
    let last = trace.last();
    utilities
        .iter()
        .filter(|(g, _)| last.atoms[*g])
        .map(|(_, u)| *u)
        .sum()
}

/// `1 - |A ∩ B| / |A ∪ B|` over the plans' action sets; two empty plans
/// are at distance 0.
pub fn stability_distance(p1: &Plan, p2: &Plan) -> Rational {
    let a: BTreeSet<ActionId> = p1.0.iter().copied().collect();
    let b: BTreeSet<ActionId> = p2.0.iter().copied().collect();
    let union = a.union(&b).count();
    if union == 0 {
        return Rational::zero();
    }
    let inter = a.intersection(&b).count();
    Rational::one() - Rational::new(inter as i64, union as i64)
}

/// Symmetric matrix of pairwise stability distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<Rational>,
}

impl DistanceMatrix {
    pub fn new(plans: &[Plan]) -> Self {
        let n = plans.len();
        let mut d = vec![Rational::zero(); n * n];
        for i in 0..n {
            for j in i + 1..n {
                let x = stability_distance(&plans[i], &plans[j]);
                d[i * n + j] = x;
                d[j * n + i] = x;
            }
        }
        DistanceMatrix { n, d }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> Rational {
        self.d[i * self.n + j]
    }
}

/// Sum of distances over unordered pairs.
pub fn maxsum(plans: &[Plan]) -> Rational {
    let m = DistanceMatrix::new(plans);
    let mut total = Rational::zero();
    for i in 0..m.n {
        for j in i + 1..m.n {
            total += m.get(i, j);
        }
    }
    total
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SelectError {
    #[error("cannot select from an empty pool")]
    EmptyPool,
}

/// Greedy MaxSum selection: start from the pool's first plan, then add the
/// plan with the largest summed distance to those chosen (earliest wins
/// ties). Returns pool indices.
pub fn greedy_select(pool: &[Plan], k: usize) -> Result<Vec<usize>, SelectError> {
    if pool.is_empty() {
        return Err(SelectError::EmptyPool);
    }
    let m = DistanceMatrix::new(pool);
    let mut chosen = vec![0];
    let mut score: Vec<Rational> = (0..pool.len()).map(|j| m.get(0, j)).collect();
    while chosen.len() < k.min(pool.len()) {
        let mut best: Option<usize> = None;
        for j in 0..pool.len() {
            if chosen.contains(&j) {
                continue;
            }
            if best.is_none_or(|b| score[j] > score[b]) {
                best = Some(j);
            }
        }
        let b = best.expect("pool larger than selection");
        chosen.push(b);
        for (j, s) in score.iter_mut().enumerate() {
            *s += m.get(b, j);
        }
    }
    Ok(chosen)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("enumeration exceeded the node cap of {0}")]
    NodeCap(usize),
}

/// Every action sequence of length at most `min(n, c)` that is applicable
/// from the initial state and ends in a goal state, in depth-first order
/// over action indices.
pub fn oracle_enumerate(task: &GroundTask, n: usize, c: usize) -> Result<Vec<Plan>, OracleError> {
    oracle_enumerate_capped(task, n, c, DEFAULT_ORACLE_NODE_CAP)
}

pub fn oracle_enumerate_capped(task: &GroundTask, n: usize, c: usize, cap: usize) -> Result<Vec<Plan>, OracleError> {
    fn dfs(
        task: &GroundTask,
        state: &State,
        depth: usize,
        prefix: &mut Vec<ActionId>,
        out: &mut Vec<Plan>,
        nodes: &mut usize,
        cap: usize,
    ) -> Result<(), OracleError> {
        *nodes += 1;
        if *nodes > cap {
            return Err(OracleError::NodeCap(cap));
        }
        if task.goal_satisfied(state) {
            out.push(Plan(prefix.clone()));
        }
        if depth == 0 {
            return Ok(());
        }
        for a in 0..task.actions.len() {
            if task.applicable(state, a) {
                let next = task.apply(state, a);
                prefix.push(a);
                dfs(task, &next, depth - 1, prefix, out, nodes, cap)?;
                prefix.pop();
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    let mut nodes = 0;
    dfs(task, &task.initial_state(), n.min(c), &mut Vec::new(), &mut out, &mut nodes, cap)?;
    Ok(out)
}

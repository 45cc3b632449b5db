//! Seeded generator of small planning instances with feature files.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use divplan::dimensions::{
    build_behaviour_space, encode_space, forbid_behaviour, plan_behaviour, read_behaviour,
    Behaviour, BehaviourSpace, DimValue, Dimension,
};
use divplan::encoding::{encode_task, extract_plan, reconstruct_trace, EncodeOptions, StateTrace};
use divplan::grounding::{ground, GroundTask};
use divplan::metrics::{oracle_enumerate, validate_plan};
use divplan::pddl::{parse_addinfo, parse_domain, parse_problem, FeatureConfig};
use divplan::planner::fbi_k;
use divplan::rational::Rational;
use divplan::smt::{CheckResult, SolverConfig};

#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub seed: u64,
    pub domain: String,
    pub problem: String,
    pub features: String,
    pub cost_bound: usize,
}

pub struct Loaded {
    pub task: GroundTask,
    pub features: FeatureConfig,
    pub space: BehaviourSpace,
}

impl RandomInstance {
    pub fn load(&self) -> Loaded {
        let d = parse_domain(&self.domain).unwrap_or_else(|e| panic!("seed {}: {e}\n{}", self.seed, self.domain));
        let mut p =
            parse_problem(&self.problem, &d).unwrap_or_else(|e| panic!("seed {}: {e}\n{}", self.seed, self.problem));
        let features = parse_addinfo(&self.features).unwrap();
        if features.soft_goals {
            p.make_soft();
        }
        let task = ground(&d, &p).unwrap();
        let space = build_behaviour_space(&features, &task).unwrap_or_else(|e| panic!("seed {}: {e}", self.seed));
        Loaded { task, features, space }
    }
}

fn lit(p: usize, pos: bool) -> String {
    if pos {
        format!("(p{p})")
    } else {
        format!("(not (p{p}))")
    }
}

/// Nullary predicates `p0..`, actions over a tool parameter gated by a
/// static `ready` predicate (so resources exist), an optional `level`
/// fluent, and a random behaviour space.
pub fn random_instance(seed: u64) -> RandomInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let preds = rng.gen_range(3..=4);
    let n_actions = rng.gen_range(2..=4);
    let numeric = rng.gen_bool(0.4);
    let soft = rng.gen_bool(0.25);

    let mut d = String::from("(define (domain rnd)\n  (:requirements :strips :typing :negative-preconditions");
    if numeric {
        d.push_str(" :fluents");
    }
    d.push_str(")\n  (:types tool)\n  (:predicates (ready ?t - tool)");
    for p in 0..preds {
        d.push_str(&format!(" (p{p})"));
    }
    d.push(')');
    if numeric {
        d.push_str("\n  (:functions (level))");
    }
    for a in 0..n_actions {
        let mut idx: Vec<usize> = (0..preds).collect();
        idx.shuffle(&mut rng);
        let n_pre = rng.gen_range(0..=2);
        let n_eff = rng.gen_range(1..=2);
        let mut pre = vec!["(ready ?t)".to_string()];
        for &p in &idx[..n_pre] {
            let pos = rng.gen_bool(0.5);
            pre.push(lit(p, pos));
        }
        let mut eff = Vec::new();
        for &p in &idx[n_pre..(n_pre + n_eff).min(preds)] {
            let pos = rng.gen_bool(0.7);
            eff.push(lit(p, pos));
        }
        if eff.is_empty() {
            eff.push(format!("(p{})", idx[0]));
        }
        if numeric && rng.gen_bool(0.7) {
            eff.push(format!("(increase (level) {})", rng.gen_range(1..=3)));
        }
        d.push_str(&format!(
            "\n  (:action a{a} :parameters (?t - tool)\n    :precondition (and {})\n    :effect (and {}))",
            pre.join(" "),
            eff.join(" ")
        ));
    }
    d.push_str(")\n");

    let mut init: Vec<String> = vec!["(ready t1)".into()];
    if rng.gen_bool(0.6) {
        init.push("(ready t2)".into());
    }
    for p in 0..preds {
        if rng.gen_bool(0.3) {
            init.push(format!("(p{p})"));
        }
    }
    if numeric {
        init.push("(= (level) 0)".into());
    }
    let n_goals = rng.gen_range(1..=2);
    let mut gidx: Vec<usize> = (0..preds).collect();
    gidx.shuffle(&mut rng);
    let goals: BTreeSet<usize> = gidx[..n_goals].iter().copied().collect();
    let goal_text: Vec<String> = goals.iter().map(|g| format!("(p{g})")).collect();
    let problem = format!(
        "(define (problem rnd-{seed}) (:domain rnd)\n  (:objects t1 t2 - tool)\n  (:init {})\n  (:goal (and {})))\n",
        init.join(" "),
        goal_text.join(" ")
    );

    let mut dims = Vec::new();
    if rng.gen_bool(0.5) {
        dims.push(serde_json::json!({"kind": "cost_bound"}));
    }
    if rng.gen_bool(0.5) {
        dims.push(serde_json::json!({"kind": "resource_utilisation", "resources": ["t1", "t2"]}));
    }
    if rng.gen_bool(0.5) {
        dims.push(serde_json::json!({"kind": "goal_order"}));
    }
    if soft || rng.gen_bool(0.3) {
        let utilities: serde_json::Map<String, serde_json::Value> = goals
            .iter()
            .map(|g| (format!("(p{g})"), serde_json::json!(rng.gen_range(1..=3))))
            .collect();
        dims.push(serde_json::json!({"kind": "utility_value", "utilities": utilities}));
    }
    if numeric && rng.gen_bool(0.6) {
        dims.push(serde_json::json!({"kind": "numeric_fluent", "fluent": "level", "min": 0, "max": 12, "epsilon": 2}));
    }
    dims.shuffle(&mut rng);
    let cost_bound = rng.gen_range(1..=4);
    let features = serde_json::json!({
        "dimensions": dims,
        "cost_bound": cost_bound,
        "soft_goals": soft,
    })
    .to_string();
    RandomInstance {
        seed,
        domain: d,
        problem,
        features,
        cost_bound,
    }
}

/// Cross-check the encodings and the planner on one instance against
/// simulation and exhaustive enumeration.
/// Returns the oracle's plan and behaviour counts.
pub fn check_instance(inst: &RandomInstance, solver: &SolverConfig) -> Result<(usize, usize), String> {
    let Loaded { task, space, .. } = inst.load();
    let c = inst.cost_bound;
    let fail = |msg: String| Err(format!("seed {}: {msg}", inst.seed));

    // Model value of every dimension against extraction, trace against
    // simulation, and at most one action per step.
    let mut enc = encode_task(&task, c, solver.open().map_err(|e| e.to_string())?, EncodeOptions::default())
        .map_err(|e| e.to_string())?;
    enc.cost_bound = c;
    encode_space(&space, &mut enc, &task).map_err(|e| e.to_string())?;
    let mut found = BTreeSet::new();
    loop {
        match enc.session.check_sat().map_err(|e| e.to_string())? {
            CheckResult::Sat => {}
            CheckResult::Unsat => break,
            CheckResult::Unknown(r) => return fail(format!("unknown: {r}")),
        }
        let m = enc.session.get_model().map_err(|e| e.to_string())?;
        for (i, row) in enc.action_vars.iter().enumerate() {
            let on = row.iter().filter(|&&v| m.bool(v)).count();
            if on > 1 {
                return fail(format!("{on} actions at step {i}"));
            }
        }
        let plan = extract_plan(m, &enc).map_err(|e| e.to_string())?;
        let trace = reconstruct_trace(m, &enc, &task).map_err(|e| e.to_string())?;
        let sim = task.simulate(&plan.0).map_err(|i| format!("model plan inapplicable at {i}"))?;
        let padded_ok = trace.states.len() == c + 1
            && trace.states[..sim.len()] == sim[..]
            && trace.states[sim.len()..].iter().all(|s| s == sim.last().unwrap());
        if !padded_ok {
            return fail("trace differs from simulation".into());
        }
        let trace = validate_plan(&task, &plan).map_err(|e| e.to_string())?;
        let from_model = read_behaviour(&enc, m);
        let extracted = plan_behaviour(&space, &task, &plan, &trace).map_err(|e| e.to_string())?;
        if from_model != extracted {
            return fail(format!("model {from_model} vs extracted {extracted}"));
        }
        check_values(&space, &task, &trace, &extracted).map_err(|e| format!("seed {}: {e}", inst.seed))?;
        if !found.insert(extracted.clone()) {
            return fail(format!("forbidden behaviour {extracted} came back"));
        }
        forbid_behaviour(&mut enc, &extracted).map_err(|e| e.to_string())?;
    }

    let oracle = oracle_enumerate(&task, c, c).map_err(|e| e.to_string())?;
    let mut want = BTreeSet::new();
    for p in &oracle {
        let trace = validate_plan(&task, p).map_err(|e| e.to_string())?;
        // Plans leaving the numeric range are outside the space.
        if let Ok(b) = plan_behaviour(&space, &task, p, &trace) {
            want.insert(b);
        }
    }
    if found != want {
        return fail(format!("found {} behaviours, oracle {}", found.len(), want.len()));
    }

    let out = fbi_k(&task, &space, None, c, solver).map_err(|e| e.to_string())?;
    let plans: BTreeSet<_> = out.plans.plans().into_iter().collect();
    if plans.len() != out.plans.len() {
        return fail("duplicate plan".into());
    }
    // The plan phase carries no box constraints, so it reaches every plan.
    let oracle_plans: BTreeSet<_> = oracle.iter().cloned().collect();
    if plans != oracle_plans {
        return fail(format!("fbi_k found {} plans, oracle {}", plans.len(), oracle_plans.len()));
    }
    if out.behaviour_count != want.len() {
        return fail(format!("behaviour count {} vs oracle {}", out.behaviour_count, want.len()));
    }
    Ok((oracle.len(), want.len()))
}

/// Goal orders are total preorders; boxes hold the final value.
fn check_values(space: &BehaviourSpace, task: &GroundTask, trace: &StateTrace, b: &Behaviour) -> Result<(), String> {
    for (d, v) in space.dimensions.iter().zip(&b.0) {
        match (d, v) {
            (Dimension::GoalOrder { .. }, DimValue::Order(m)) => {
                let k = m.len();
                for a in 0..k {
                    for c in 0..k {
                        if !(m[a][c] || m[c][a]) {
                            return Err("order not total".into());
                        }
                        for e in 0..k {
                            if m[a][c] && m[c][e] && !m[a][e] {
                                return Err("order not transitive".into());
                            }
                        }
                    }
                }
            }
            (Dimension::NumericFluent { fluent, spec }, DimValue::Int(bx)) => {
                let x = trace.last().fluents[*fluent];
                let lo = spec.min + spec.epsilon * Rational::from_integer(*bx);
                let top = *bx + 1 == spec.box_count();
                let hi_ok = if top { x <= spec.max } else { x < lo + spec.epsilon };
                if !(lo <= x && hi_ok) {
                    return Err(format!("{} = {x} not in box {bx}", task.fluents[*fluent]));
                }
            }
            _ => {}
        }
    }
    Ok(())
}

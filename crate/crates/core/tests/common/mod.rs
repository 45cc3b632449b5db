#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use divplan::dimensions::{build_behaviour_space, plan_behaviour, Behaviour, BehaviourSpace};
use divplan::encoding::Plan;
use divplan::grounding::{ground, GroundTask};
use divplan::metrics::{oracle_enumerate, validate_plan};
use divplan::pddl::{parse_addinfo, parse_domain, parse_problem, DomainModel, FeatureConfig, ProblemModel};
use divplan::smt::SolverConfig;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

pub fn read(rel: &str) -> String {
    std::fs::read_to_string(fixture(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn models(domain: &str, problem: &str) -> (DomainModel, ProblemModel) {
    let d = parse_domain(&read(domain)).unwrap();
    let p = parse_problem(&read(problem), &d).unwrap();
    (d, p)
}

pub fn task(domain: &str, problem: &str) -> GroundTask {
    let (d, p) = models(domain, problem);
    ground(&d, &p).unwrap()
}

pub fn task_from_text(domain: &str, problem: &str) -> GroundTask {
    let d = parse_domain(domain).unwrap();
    let p = parse_problem(problem, &d).unwrap();
    ground(&d, &p).unwrap()
}

/// Solver from `DIVPLAN_SOLVER` or `z3` on the path.
pub fn solver() -> SolverConfig {
    let cfg = SolverConfig::from_env();
    if std::process::Command::new(&cfg.program).arg("-version").output().is_err() {
        panic!(
            "SMT solver `{}` not found; install z3 (e.g. `pip install z3-solver`) or set DIVPLAN_SOLVER",
            cfg.program.display()
        );
    }
    cfg
}

pub struct Toy {
    pub task: GroundTask,
    pub features: FeatureConfig,
    pub space: BehaviourSpace,
    pub cost_bound: usize,
}

/// A task under `fixtures/toys/<name>` with its feature file applied.
pub fn toy(name: &str) -> Toy {
    let dir = format!("toys/{name}");
    let (d, mut p) = models(&format!("{dir}/domain.pddl"), &format!("{dir}/problem.pddl"));
    let features = parse_addinfo(&read(&format!("{dir}/features.json"))).unwrap();
    if features.soft_goals {
        p.make_soft();
    }
    let task = ground(&d, &p).unwrap();
    let space = build_behaviour_space(&features, &task).unwrap();
    let cost_bound = features.cost_bound.unwrap_or(0) as usize;
    Toy {
        task,
        features,
        space,
        cost_bound,
    }
}

/// Toys whose full plan sets up to their cost bound are small enough to
/// enumerate.
pub const ORACLE_TOYS: &[&str] = &["chain", "counter", "cycle", "delivery", "fork", "gripper", "switches", "switches-osp"];

pub fn plan(task: &GroundTask, names: &[&str]) -> Plan {
    Plan::from_names(task, names).unwrap_or_else(|| panic!("unknown action among {names:?}"))
}

/// Distinct behaviours among the oracle's plans.
pub fn oracle_behaviours(task: &GroundTask, space: &BehaviourSpace, c: usize) -> BTreeSet<Behaviour> {
    oracle_enumerate(task, c, c)
        .unwrap()
        .iter()
        .map(|p| {
            let trace = validate_plan(task, p).unwrap();
            plan_behaviour(space, task, p, &trace).unwrap()
        })
        .collect()
}

pub mod random;

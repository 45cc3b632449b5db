//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use divplan::bench::{run_bench, BenchOptions, PlannerMode};
use divplan::dimensions::{plan_behaviour, DimValue, Dimension};
use divplan::encoding::DEFAULT_MAX_HORIZON;
use divplan::metrics::{oracle_enumerate, validate_plan};
use divplan::planner::{compute_cost_bound, fbi, find_optimal_length, LengthSearch};
use divplan::rational::Rational;
use divplan::report::{load_task, render_grid, run_solve, GridKind, ReportStatus, RunConfig};

const ROVER_LENGTH: usize = 10;
const ROVER_LENGTH_LIMIT: Duration = Duration::from_secs(120);
const GRID_K: usize = 3;
const GRID_LIMIT: Duration = Duration::from_secs(180);
const MIN_TOYS: usize = 5;
const MAX_TOY_PLANS: usize = 10_000;
const TOY_LIMIT: Duration = Duration::from_secs(10);
const BENCH_KS: [usize; 2] = [5, 10];
const MIN_BENCH_INSTANCES: usize = 10;
const MIN_BENCH_DOMAINS: usize = 3;
const BENCH_LIMIT: Duration = Duration::from_secs(30 * 60);
const BENCH_TASK_TIMEOUT: Duration = Duration::from_secs(300);
const OSP_COST_BOUND: usize = 5;
const OSP_LIMIT: Duration = Duration::from_secs(180);
const NUMERIC_LIMIT: Duration = Duration::from_secs(180);
const RANDOM_INSTANCES: u64 = 200;
const RANDOM_LIMIT: Duration = Duration::from_secs(10 * 60);

type Outcome = Result<String, String>;

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let t = start.elapsed();
    if t <= limit {
        Ok(t)
    } else {
        Err(format!("took {:.1}s, limit {}s", t.as_secs_f64(), limit.as_secs()))
    }
}

fn rover_optimal_length() -> Outcome {
    let start = Instant::now();
    let t = common::task("rovers/domain.pddl", "rovers/p01.pddl");
    let l = find_optimal_length(&t, DEFAULT_MAX_HORIZON, &common::solver()).map_err(|e| e.to_string())?;
    let took = within(start, ROVER_LENGTH_LIMIT)?;
    match l {
        LengthSearch::Found(n) if n == ROVER_LENGTH => Ok(format!("l = {n} in {:.1}s", took.as_secs_f64())),
        other => Err(format!("expected {ROVER_LENGTH}, got {other:?}")),
    }
}

fn rover_grid() -> Outcome {
    let start = Instant::now();
    let mut cfg = RunConfig::new(
        common::fixture("rovers/domain.pddl"),
        common::fixture("rovers/p01-two-rovers.pddl"),
    );
    cfg.features = Some(common::fixture("rovers/p01-two-rovers.features.json"));
    cfg.k = Some(GRID_K);
    let rep = run_solve(&cfg);
    if let Some(e) = &rep.error {
        return Err(e.message.clone());
    }
    if rep.status != ReportStatus::Solved || rep.plans.len() != GRID_K {
        return Err(format!("{} with {} plans", rep.status.as_str(), rep.plans.len()));
    }
    if rep.plans.iter().any(|p| p.phase != "behaviour") {
        return Err("plan-phase plan in the result".into());
    }
    let loaded = load_task(&cfg.domain, &cfg.problem, cfg.features.as_deref()).map_err(|e| e.0)?;
    let mut behaviours = BTreeSet::new();
    for p in &rep.plans {
        let plan = divplan::encoding::Plan::from_names(&loaded.task, &p.action_names()).ok_or("unknown action")?;
        let trace = validate_plan(&loaded.task, &plan).map_err(|e| format!("{}: {e}", p.id))?;
        behaviours.insert(plan_behaviour(&loaded.space, &loaded.task, &plan, &trace).map_err(|e| e.to_string())?);
    }
    if behaviours.len() != GRID_K || rep.behaviour_count != GRID_K {
        return Err(format!("BC = {}", behaviours.len()));
    }
    let cells: BTreeSet<_> = rep.plans.iter().map(|p| p.cell.clone()).collect();
    let grid = render_grid(&rep, (0, 1)).map_err(|e| e.to_string())?;
    let occupied = grid.csv.lines().skip(1).flat_map(|l| l.split(',').skip(1)).filter(|c| !c.is_empty()).count();
    if grid.kind != GridKind::Cells || cells.len() != GRID_K || occupied != GRID_K {
        return Err(format!("plans share grid cells:\n{}", grid.csv));
    }
    let took = within(start, GRID_LIMIT)?;
    let labels: Vec<String> = rep.plans.iter().map(|p| p.cell.clone().unwrap_or_default().join("/")).collect();
    Ok(format!("BC = {GRID_K}, cells {} in {:.1}s", labels.join(", "), took.as_secs_f64()))
}

fn toy_oracle_equivalence() -> Outcome {
    let mut done = Vec::new();
    for name in common::ORACLE_TOYS {
        let start = Instant::now();
        let toy = common::toy(name);
        let c = toy.cost_bound;
        let plans = oracle_enumerate(&toy.task, c, c).map_err(|e| e.to_string())?;
        if plans.len() > MAX_TOY_PLANS {
            return Err(format!("{name}: {} plans exceeds {MAX_TOY_PLANS}", plans.len()));
        }
        let want = common::oracle_behaviours(&toy.task, &toy.space, c).len();
        let out = fbi(&toy.task, &toy.space, None, c, &common::solver()).map_err(|e| format!("{name}: {e}"))?;
        within(start, TOY_LIMIT).map_err(|e| format!("{name}: {e}"))?;
        if out.behaviour_count != want {
            return Err(format!("{name}: fbi BC {} vs oracle {want}", out.behaviour_count));
        }
        done.push(format!("{name} {want}"));
    }
    if done.len() < MIN_TOYS {
        return Err(format!("only {} toys", done.len()));
    }
    Ok(format!("BC equal on {} toys ({})", done.len(), done.join(", ")))
}

fn bench_dominance() -> Outcome {
    let start = Instant::now();
    let opts = BenchOptions {
        ks: BENCH_KS.to_vec(),
        modes: vec![PlannerMode::Fbi, PlannerMode::Naive],
        timeout: Some(BENCH_TASK_TIMEOUT),
        workers: std::thread::available_parallelism().map_or(2, |n| n.get().min(4)),
        ..BenchOptions::default()
    };
    let res = run_bench(&common::fixture("suite"), &opts).map_err(|e| e.to_string())?;
    let tasks: BTreeSet<&str> = res.rows.iter().map(|r| r.task.as_str()).collect();
    let mut summary = Vec::new();
    for k in BENCH_KS {
        let mut compared = 0;
        let mut strict = 0;
        let mut domains = BTreeSet::new();
        for &t in &tasks {
            let (Some(f), Some(n)) = (res.row(t, PlannerMode::Fbi, k), res.row(t, PlannerMode::Naive, k)) else {
                continue;
            };
            if !(f.covered() && n.covered()) {
                continue;
            }
            if f.behaviour_count < n.behaviour_count {
                return Err(format!("{t} k={k}: fbi {} < naive {}", f.behaviour_count, n.behaviour_count));
            }
            compared += 1;
            strict += usize::from(f.behaviour_count > n.behaviour_count);
            domains.insert(t.split("-p").next().unwrap_or(t).split('-').next().unwrap_or(t).to_string());
        }
        if compared < MIN_BENCH_INSTANCES || domains.len() < MIN_BENCH_DOMAINS {
            return Err(format!("k={k}: {compared} instances over {} domains", domains.len()));
        }
        if 2 * strict < compared {
            return Err(format!("k={k}: strict on {strict}/{compared}"));
        }
        let agg = |m| res.aggregate.iter().find(|a| a.mode == m && a.k == k).map_or(0, |a| a.behaviour_count);
        summary.push(format!(
            "k={k}: strict {strict}/{compared}, BC {} vs {}",
            agg(PlannerMode::Fbi),
            agg(PlannerMode::Naive)
        ));
    }
    let took = within(start, BENCH_LIMIT)?;
    Ok(format!("{} in {:.0}s", summary.join("; "), took.as_secs_f64()))
}

fn osp_equal_cost_different_utility() -> Outcome {
    let start = Instant::now();
    let loaded = load_task(
        &common::fixture("rovers/domain.pddl"),
        &common::fixture("rovers/p01.pddl"),
        Some(&common::fixture("rovers/p01-osp.features.json")),
    )
    .map_err(|e| e.0)?;
    let (task, space) = (&loaded.task, &loaded.space);
    let hard = loaded.hard.as_ref().ok_or("feature file does not make goals soft")?;
    let solver = common::solver();
    let l = match find_optimal_length(hard, DEFAULT_MAX_HORIZON, &solver).map_err(|e| e.to_string())? {
        LengthSearch::Found(l) => l,
        other => return Err(format!("length search: {other:?}")),
    };
    let q = loaded.features.quality_q.ok_or("no quality in feature file")?;
    let c = compute_cost_bound(q, l);
    if l != ROVER_LENGTH || c != OSP_COST_BOUND {
        return Err(format!("l = {l}, c = {c}"));
    }
    let dim = |kind: &str| space.dimensions.iter().position(|d| d.kind() == kind);
    let (ci, ui) = (dim("cost_bound").ok_or("no cost dimension")?, dim("utility_value").ok_or("no utility dimension")?);
    let out = fbi(task, space, None, c, &solver).map_err(|e| e.to_string())?;
    let mut by_cost: BTreeMap<DimValue, BTreeSet<DimValue>> = BTreeMap::new();
    for r in &out.plans.records {
        let trace = validate_plan(task, &r.plan).map_err(|e| e.to_string())?;
        let b = plan_behaviour(space, task, &r.plan, &trace).map_err(|e| e.to_string())?;
        by_cost.entry(b.0[ci].clone()).or_default().insert(b.0[ui].clone());
    }
    let took = within(start, OSP_LIMIT)?;
    let show = |v: &DimValue| match v {
        DimValue::Int(i) => i.to_string(),
        DimValue::Rat(r) => r.to_string(),
        DimValue::Order(_) => "order".into(),
    };
    match by_cost.iter().find(|(_, us)| us.len() >= 2) {
        Some((cost, us)) => Ok(format!(
            "{} plans at c = {c}; cost {} with utilities {{{}}} in {:.1}s",
            out.plans.len(),
            show(cost),
            us.iter().map(show).collect::<Vec<_>>().join(", "),
            took.as_secs_f64()
        )),
        None => Err("no two plans share a cost with different utilities".into()),
    }
}

fn numeric_boxes() -> Outcome {
    let start = Instant::now();
    let loaded = load_task(
        &common::fixture("rovers-numeric/domain.pddl"),
        &common::fixture("rovers-numeric/p01.pddl"),
        Some(&common::fixture("rovers-numeric/p01.features.json")),
    )
    .map_err(|e| e.0)?;
    let (task, space) = (&loaded.task, &loaded.space);
    let boxes: Vec<_> = space
        .dimensions
        .iter()
        .filter_map(|d| match d {
            Dimension::NumericFluent { fluent, spec } => Some((*fluent, spec.clone())),
            _ => None,
        })
        .collect();
    let want_box = (Rational::from_integer(0), Rational::from_integer(100), Rational::from_integer(5));
    if boxes.len() != 2 || boxes.iter().any(|(_, s)| (s.min, s.max, s.epsilon) != want_box) {
        return Err("expected two energy fluents boxed by 0..100 step 5".into());
    }
    let solver = common::solver();
    let l = match find_optimal_length(task, DEFAULT_MAX_HORIZON, &solver).map_err(|e| e.to_string())? {
        LengthSearch::Found(l) => l,
        other => return Err(format!("length search: {other:?}")),
    };
    let q = loaded.features.quality_q.unwrap_or(Rational::from_integer(1));
    let c = compute_cost_bound(q, l);
    let out = fbi(task, space, loaded.features.k, c, &solver).map_err(|e| e.to_string())?;
    let mut tuples = BTreeSet::new();
    for r in &out.plans.records {
        let trace = validate_plan(task, &r.plan).map_err(|e| e.to_string())?;
        let b = plan_behaviour(space, task, &r.plan, &trace).map_err(|e| e.to_string())?;
        let mut tuple = Vec::new();
        for ((f, spec), v) in boxes.iter().zip(&b.0) {
            let DimValue::Int(bx) = v else {
                return Err("non-integer box".into());
            };
            let x = trace.last().fluents[*f];
            let lo = spec.min + spec.epsilon * Rational::from_integer(*bx);
            let top = *bx + 1 == spec.box_count();
            let ok = lo <= x && if top { x <= spec.max } else { x < lo + spec.epsilon };
            if !ok {
                return Err(format!("{} = {x} outside box {bx}", task.fluents[*f]));
            }
            tuple.push(*bx);
        }
        if !tuples.insert(tuple.clone()) {
            return Err(format!("box tuple {tuple:?} repeated"));
        }
    }
    if out.plans.is_empty() {
        return Err("no plans".into());
    }
    let took = within(start, NUMERIC_LIMIT)?;
    let shown: Vec<String> = tuples.iter().map(|t| format!("{t:?}")).collect();
    Ok(format!("{} plans, l = {l}, c = {c}, boxes {} in {:.1}s", out.plans.len(), shown.join(" "), took.as_secs_f64()))
}

fn random_properties() -> Outcome {
    let start = Instant::now();
    let solver = common::solver();
    let (mut solvable, mut behaviours) = (0, 0);
    for seed in 0..RANDOM_INSTANCES {
        let (plans, bc) = common::random::check_instance(&common::random::random_instance(seed), &solver)?;
        solvable += usize::from(plans > 0);
        behaviours += bc;
    }
    let took = within(start, RANDOM_LIMIT)?;
    Ok(format!(
        "{RANDOM_INSTANCES} instances ({solvable} solvable, {behaviours} behaviours) in {:.1}s",
        took.as_secs_f64()
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("rover optimal length", rover_optimal_length),
        ("two-rover grid reproduction", rover_grid),
        ("toy oracle equivalence", toy_oracle_equivalence),
        ("fbi dominates naive on the suite", bench_dominance),
        ("OSP equal cost, different utility", osp_equal_cost_different_utility),
        ("numeric box tuples", numeric_boxes),
        ("random instance properties", random_properties),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|x| name.contains(x.as_str())) {
            continue;
        }
        match f() {
            Ok(detail) => println!("PASS {}. {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}. {name}: {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

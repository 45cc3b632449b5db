mod common;

use divplan::dimensions::{extract_dimension_value, DimValue, Dimension};
use divplan::encoding::Plan;
use divplan::metrics::{
    compute_plan_cost, compute_utility, greedy_select, maxsum, oracle_enumerate, oracle_enumerate_capped,
    stability_distance, validate_plan, DistanceMatrix, OracleError, SelectError, ValidationError,
};
use divplan::rational::Rational;

#[test]
fn validate_examples() {
    let t = common::toy("chain").task;
    let ok = common::plan(&t, &["(move a b)", "(finish b)"]);
    let trace = validate_plan(&t, &ok).unwrap();
    assert_eq!(trace.states.len(), 3);
    assert_eq!(compute_plan_cost(&ok), 2);

    let bad = common::plan(&t, &["(finish b)"]);
    assert_eq!(
        validate_plan(&t, &bad),
        Err(ValidationError::Inapplicable {
            step: 0,
            action: "(finish b)".into()
        })
    );
    let short = common::plan(&t, &["(move a b)"]);
    assert_eq!(validate_plan(&t, &short), Err(ValidationError::GoalUnsatisfied));
    assert!(matches!(validate_plan(&t, &Plan(vec![99])), Err(ValidationError::Inapplicable { .. })));
}

#[test]
fn utilities_on_soft_switches() {
    let toy = common::toy("switches-osp");
    let t = &toy.task;
    let utilities = match toy.space.dimensions.iter().find(|d| d.kind() == "utility_value").unwrap() {
        Dimension::UtilityValue { utilities } => utilities.clone(),
        _ => unreachable!(),
    };
    // l1:1, l2:2, l3:1/2
    let cases: &[(&[&str], Rational)] = &[
        (&[], Rational::from_integer(0)),
        (&["(turn-on l1)", "(turn-on l2)"], Rational::from_integer(3)),
        (&["(turn-on l2)", "(turn-on l3)"], Rational::new(5, 2)),
        (&["(turn-on l1)", "(turn-on l2)", "(turn-on l3)"], Rational::new(7, 2)),
        (&["(turn-on l2)", "(turn-off l2)"], Rational::from_integer(0)),
    ];
    for (names, want) in cases {
        let p = common::plan(t, names);
        let trace = validate_plan(t, &p).unwrap();
        assert_eq!(compute_utility(&utilities, &trace), *want, "{names:?}");
    }
}

#[test]
fn utility_equals_dimension_value() {
    let toy = common::toy("switches-osp");
    let uv = toy.space.dimensions.iter().find(|d| d.kind() == "utility_value").unwrap();
    let utilities = match uv {
        Dimension::UtilityValue { utilities } => utilities.clone(),
        _ => unreachable!(),
    };
    for p in oracle_enumerate(&toy.task, toy.cost_bound, toy.cost_bound).unwrap() {
        let trace = validate_plan(&toy.task, &p).unwrap();
        assert_eq!(
            extract_dimension_value(uv, &toy.task, &p, &trace).unwrap(),
            DimValue::Rat(compute_utility(&utilities, &trace))
        );
    }
}

#[test]
fn oracle_examples() {
    let chain = common::toy("chain").task;
    let plans = oracle_enumerate(&chain, 2, 2).unwrap();
    assert_eq!(plans.len(), 1);
    assert_eq!(plans[0].names(&chain), ["(move a b)", "(finish b)"]);
    assert!(oracle_enumerate(&chain, 1, 5).unwrap().is_empty());

    let done = common::task_from_text(
        &common::read("toys/switches/domain.pddl"),
        "(define (problem p) (:domain switches) (:objects l1 - light) (:init (on l1)) (:goal (on l1)))",
    );
    assert_eq!(oracle_enumerate(&done, 0, 0).unwrap(), [Plan(vec![])]);

    // Back-and-forth moves pad plans in the cycle.
    let cycle = common::toy("cycle").task;
    let plans = oracle_enumerate(&cycle, 7, 7).unwrap();
    assert_eq!(plans.len(), 45);
    assert!(plans.iter().any(|p| p.names(&cycle)[..2] == ["(move a b)", "(move b a)"]));
    assert!(plans.iter().all(|p| validate_plan(&cycle, p).is_ok()));
    assert!(matches!(
        oracle_enumerate_capped(&cycle, 7, 7, 10),
        Err(OracleError::NodeCap(10))
    ));
}

#[test]
fn stability_distance_examples() {
    let a = Plan(vec![0, 1, 2]);
    let b = Plan(vec![2, 3]);
    assert_eq!(stability_distance(&a, &b), Rational::new(3, 4));
    assert_eq!(stability_distance(&a, &a), Rational::from_integer(0));
    assert_eq!(stability_distance(&Plan(vec![]), &Plan(vec![])), Rational::from_integer(0));
    assert_eq!(stability_distance(&Plan(vec![0]), &Plan(vec![])), Rational::from_integer(1));
    // Action sets, not sequences.
    assert_eq!(stability_distance(&Plan(vec![0, 0, 1]), &Plan(vec![1, 0])), Rational::from_integer(0));

    let plans = [a.clone(), b.clone(), Plan(vec![4])];
    let m = DistanceMatrix::new(&plans);
    assert_eq!(m.len(), 3);
    for i in 0..3 {
        assert_eq!(m.get(i, i), Rational::from_integer(0));
        for j in 0..3 {
            assert_eq!(m.get(i, j), m.get(j, i));
        }
    }
    assert_eq!(maxsum(&plans), Rational::new(3, 4) + Rational::from_integer(2));
    assert_eq!(maxsum(&[]), Rational::from_integer(0));
}

#[test]
fn greedy_against_exhaustive_pairs() {
    let toy = common::toy("gripper");
    let pool = oracle_enumerate(&toy.task, toy.cost_bound, toy.cost_bound).unwrap();
    let pool = &pool[..40];
    let m = DistanceMatrix::new(pool);

    let two = greedy_select(pool, 2).unwrap();
    assert_eq!(two[0], 0);
    let best_from_first = (1..pool.len()).map(|j| m.get(0, j)).max().unwrap();
    assert_eq!(m.get(0, two[1]), best_from_first);
    // Earliest index wins ties.
    assert_eq!(two[1], (1..pool.len()).find(|&j| m.get(0, j) == best_from_first).unwrap());

    let mut best_pair = Rational::from_integer(0);
    for i in 0..pool.len() {
        for j in i + 1..pool.len() {
            best_pair = best_pair.max(m.get(i, j));
        }
    }
    let chosen: Vec<Plan> = two.iter().map(|&i| pool[i].clone()).collect();
    assert!(maxsum(&chosen) <= best_pair);

    let five = greedy_select(pool, 5).unwrap();
    assert_eq!(&five[..2], &two[..]);
    let mut dedup = five.clone();
    dedup.sort();
    dedup.dedup();
    assert_eq!(dedup.len(), 5);

    assert_eq!(greedy_select(&pool[..3], 10).unwrap().len(), 3);
    assert_eq!(greedy_select(&[], 3), Err(SelectError::EmptyPool));
}

mod common;

use divplan::grounding::{ground, ground_with, reachable_atoms, GroundingError, GroundingOptions};
use divplan::metrics::oracle_enumerate;
use divplan::pddl::{parse_domain, parse_problem};

#[test]
fn two_rover_actions_cover_both_rovers() {
    let t = common::task("rovers/domain.pddl", "rovers/p01-two-rovers.pddl");
    for r in ["rover0", "rover1"] {
        for s in ["navigate", "sample_rock", "communicate_rock_data"] {
            assert!(
                t.actions.iter().any(|a| a.schema == s && a.uses_object(r)),
                "no {s} action for {r}"
            );
        }
    }
    // rover1 has no camera.
    assert!(!t.actions.iter().any(|a| a.schema == "take_image" && a.uses_object("rover1")));
}

#[test]
fn actions_sorted_by_schema_then_objects() {
    let t = common::task("gripper/domain.pddl", "gripper/p02.pddl");
    let keys: Vec<(String, Vec<String>)> = t.actions.iter().map(|a| (a.schema.clone(), a.args.clone())).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    for (i, a) in t.actions.iter().enumerate() {
        assert_eq!(a.id, i);
    }
}

#[test]
fn schema_without_objects_grounds_to_nothing() {
    let d = parse_domain(&common::read("delivery/domain.pddl")).unwrap();
    let p = parse_problem(
        "(define (problem p) (:domain delivery) (:objects l1 l2 - location t1 - truck)
           (:init (road l1 l2) (at t1 l1)) (:goal (at t1 l2)))",
        &d,
    )
    .unwrap();
    let t = ground(&d, &p).unwrap();
    assert!(t.actions.iter().all(|a| a.schema == "drive"));
    assert_eq!(t.actions.len(), 1);
}

#[test]
fn chain_grounds_to_two_actions() {
    let toy = common::toy("chain");
    let names: Vec<String> = toy.task.actions.iter().map(|a| a.name()).collect();
    assert_eq!(names, ["(finish b)", "(move a b)"]);
}

#[test]
fn chain_reachable_set() {
    let t = common::toy("chain").task;
    let reach = reachable_atoms(&t);
    let mut got: Vec<String> = (0..t.atoms.len()).filter(|&i| reach[i]).map(|i| t.atoms[i].to_string()).collect();
    got.sort();
    assert_eq!(got, ["(at a)", "(at b)", "(done)"]);
}

#[test]
fn unachievable_atom_not_reachable() {
    let t = common::task("toys/unsolvable/domain.pddl", "toys/unsolvable/problem.pddl");
    let reach = reachable_atoms(&t);
    let done = t.atoms.iter().position(|a| a.predicate == "done").unwrap();
    assert!(!reach[done]);
    let init = t.initial_state();
    for (i, &b) in init.atoms.iter().enumerate() {
        assert!(!b || reach[i]);
    }
}

#[test]
fn reachability_is_sound_on_toys() {
    for name in common::ORACLE_TOYS {
        let toy = common::toy(name);
        let t = &toy.task;
        let reach = reachable_atoms(t);
        for p in oracle_enumerate(t, toy.cost_bound, toy.cost_bound).unwrap() {
            for s in t.simulate(&p.0).unwrap() {
                for (i, &b) in s.atoms.iter().enumerate() {
                    assert!(!b || reach[i], "{name}: {} reached but not in the fixpoint", t.atoms[i]);
                }
            }
        }
    }
}

#[test]
fn grounding_is_deterministic() {
    let a = common::task("rovers/domain.pddl", "rovers/p01-two-rovers.pddl");
    let b = common::task("rovers/domain.pddl", "rovers/p01-two-rovers.pddl");
    assert_eq!(a.dump(), b.dump());
    assert_eq!(a.atoms, b.atoms);
}

#[test]
fn action_cap_is_enforced() {
    let (d, p) = common::models("rovers/domain.pddl", "rovers/p01-two-rovers.pddl");
    let opts = GroundingOptions {
        max_actions: 10,
        ..GroundingOptions::default()
    };
    assert!(matches!(ground_with(&d, &p, opts), Err(GroundingError::TooManyActions { .. })));
}

#[test]
fn add_and_delete_disjoint() {
    let t = common::task("rovers-numeric/domain.pddl", "rovers-numeric/p01.pddl");
    for a in &t.actions {
        assert!(a.add.iter().all(|p| !a.del.contains(p)), "{}", a.name());
    }
    assert!(t.actions.iter().any(|a| !a.num_eff.is_empty()));
}

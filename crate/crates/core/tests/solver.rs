mod common;

use std::time::Duration;

use divplan::rational::Rational;
use divplan::smt::{and, eq, ge, int, le, not, or, sum, var, CheckResult, Session, SolverConfig, SolverError, Sort, Term, Value};

fn open() -> Session {
    common::solver().open().unwrap()
}

#[test]
fn empty_session_is_sat() {
    let mut s = open();
    assert_eq!(s.check_sat().unwrap(), CheckResult::Sat);
    assert!(s.get_model().unwrap().is_empty());
}

#[test]
fn asserting_true_changes_nothing() {
    let mut s = open();
    s.assert_formula(Term::Bool(true)).unwrap();
    assert_eq!(s.check_sat().unwrap(), CheckResult::Sat);
}

#[test]
fn contradiction_is_unsat() {
    let mut s = open();
    let x = s.declare("x", Sort::Bool).unwrap();
    s.assert_formula(and(vec![var(x), not(var(x))])).unwrap();
    assert_eq!(s.check_sat().unwrap(), CheckResult::Unsat);
    assert!(matches!(s.get_model(), Err(SolverError::NoModel)));
}

#[test]
fn model_values() {
    let mut s = open();
    let x = s.declare("x", Sort::Bool).unwrap();
    let v = s.declare("v", Sort::Int).unwrap();
    let r = s.declare("r", Sort::Real).unwrap();
    s.assert_formula(var(x)).unwrap();
    s.assert_formula(and(vec![ge(var(v), int(3)), le(var(v), int(3))])).unwrap();
    s.assert_formula(eq(
        sum(vec![var(r), var(r), var(r)]),
        Term::Real(Rational::from_integer(1)),
    ))
    .unwrap();
    assert_eq!(s.check_sat().unwrap(), CheckResult::Sat);
    let m = s.get_model().unwrap();
    assert_eq!(m.get(x), Some(Value::Bool(true)));
    assert_eq!(m.get(v), Some(Value::Num(Rational::from_integer(3))));
    assert_eq!(m.num(r), Rational::new(1, 3));
}

#[test]
fn sessions_are_incremental() {
    let mut s = open();
    let v = s.declare("v", Sort::Int).unwrap();
    s.assert_formula(and(vec![ge(var(v), int(0)), le(var(v), int(2))])).unwrap();
    let mut seen = Vec::new();
    while s.check_sat().unwrap() == CheckResult::Sat {
        let x = s.get_model().unwrap().num(v);
        seen.push(x);
        s.assert_formula(not(eq(var(v), Term::Int(x.to_integer())))).unwrap();
    }
    seen.sort();
    assert_eq!(seen.len(), 3);
    assert_eq!(s.check_count(), 4);
}

/// `holes + 1` pigeons into `holes` holes.
fn pigeonhole(s: &mut Session, holes: usize) {
    let p: Vec<Vec<_>> = (0..=holes)
        .map(|i| (0..holes).map(|j| s.declare(&format!("p_{i}_{j}"), Sort::Bool).unwrap()).collect())
        .collect();
    for row in &p {
        s.assert_formula(or(row.iter().map(|&v| var(v)).collect())).unwrap();
    }
    for j in 0..holes {
        for a in 0..=holes {
            for b in a + 1..=holes {
                s.assert_formula(or(vec![not(var(p[a][j])), not(var(p[b][j]))])).unwrap();
            }
        }
    }
}

#[test]
fn tiny_budget_gives_unknown() {
    let cfg = common::solver().with_timeout(Some(Duration::from_millis(1)));
    let mut s = cfg.open().unwrap();
    pigeonhole(&mut s, 12);
    match s.check_sat().unwrap() {
        CheckResult::Unknown(_) => {}
        r => panic!("expected unknown, got {r:?}"),
    }
}

#[test]
fn missing_solver_is_a_spawn_error() {
    let cfg = SolverConfig {
        program: "/nonexistent/solver-binary".into(),
        ..SolverConfig::default()
    };
    assert!(matches!(cfg.open(), Err(SolverError::Spawn { .. })));
}

#[test]
fn crashing_solver_is_an_error_not_unknown() {
    let cfg = SolverConfig {
        program: "sh".into(),
        args: vec!["-c".into(), "read line; exit 3".into()],
        ..SolverConfig::default()
    };
    let r = cfg.open().and_then(|mut s| s.check_sat());
    assert!(r.is_err(), "{r:?}");
    assert!(!matches!(r, Ok(CheckResult::Unknown(_))));
}

#[test]
fn sort_errors_are_rejected() {
    let mut s = open();
    let x = s.declare("x", Sort::Bool).unwrap();
    assert!(matches!(s.assert_formula(ge(var(x), int(1))), Err(SolverError::Sort(_))));
    assert!(matches!(s.assert_formula(int(1)), Err(SolverError::Sort(_))));
}

#[test]
fn models_satisfy_every_assertion() {
    let mut s = open();
    pigeonhole(&mut s, 3);
    let extra = s.declare("extra", Sort::Bool).unwrap();
    s.assert_formula(var(extra)).unwrap();
    assert_eq!(s.check_sat().unwrap(), CheckResult::Unsat);

    let mut s = open();
    let xs: Vec<_> = (0..6).map(|i| s.declare(&format!("x{i}"), Sort::Int).unwrap()).collect();
    for w in xs.windows(2) {
        s.assert_formula(le(sum(vec![var(w[0]), int(1)]), var(w[1]))).unwrap();
    }
    s.assert_formula(ge(var(xs[0]), int(-2))).unwrap();
    assert_eq!(s.check_sat().unwrap(), CheckResult::Sat);
    let m = s.get_model().unwrap();
    for (i, a) in s.assertions().iter().enumerate() {
        assert_eq!(m.eval_bool(a), Ok(true), "assertion {i}");
    }
}

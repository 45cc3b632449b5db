//! Quantifier-free formulas over booleans and linear integer/real
//! arithmetic, their SMT-LIB v2 rendering, and an evaluator used to
//! re-check solver models.

mod process;
mod session;

pub use process::ProcessBackend;
pub use session::{
    Backend, CheckResult, ScriptedBackend, Session, SolverConfig, SolverError, SOLVER_ENV,
};

use std::collections::HashMap;
use std::fmt::Write as _;

use num_traits::Zero;

use crate::pddl::CmpOp;
use crate::rational::{smt_real, Rational};
use crate::sexpr::SExpr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sort {
    Bool,
    Int,
    Real,
}

impl Sort {
    pub fn smt(self) -> &'static str {
        match self {
            Sort::Bool => "Bool",
            Sort::Int => "Int",
            Sort::Real => "Real",
        }
    }
}

/// Handle to a declared solver variable; indexes the session's
/// declaration table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Bool(bool),
    Int(i64),
    Real(Rational),
    Var(Var),
    Not(Box<Term>),
    And(Vec<Term>),
    Or(Vec<Term>),
    Implies(Box<Term>, Box<Term>),
    Iff(Box<Term>, Box<Term>),
    Ite(Box<Term>, Box<Term>, Box<Term>),
    Add(Vec<Term>),
    Neg(Box<Term>),
    Scale(Rational, Box<Term>),
    Cmp(CmpOp, Box<Term>, Box<Term>),
    ToReal(Box<Term>),
}

impl From<Var> for Term {
    fn from(v: Var) -> Self {
        Term::Var(v)
    }
}

pub fn var(v: Var) -> Term {
    Term::Var(v)
}
pub fn int(i: i64) -> Term {
    Term::Int(i)
}
pub fn real(r: Rational) -> Term {
    Term::Real(r)
}
#[allow(clippy::should_implement_trait)]
pub fn not(t: Term) -> Term {
    match t {
        Term::Not(inner) => *inner,
        Term::Bool(b) => Term::Bool(!b),
        t => Term::Not(Box::new(t)),
    }
}
pub fn and(ts: Vec<Term>) -> Term {
    if ts.len() == 1 {
        return ts.into_iter().next().unwrap();
    }
    Term::And(ts)
}
pub fn or(ts: Vec<Term>) -> Term {
    if ts.len() == 1 {
        return ts.into_iter().next().unwrap();
    }
    Term::Or(ts)
}
pub fn implies(a: Term, b: Term) -> Term {
    Term::Implies(Box::new(a), Box::new(b))
}
pub fn iff(a: Term, b: Term) -> Term {
    Term::Iff(Box::new(a), Box::new(b))
}
pub fn ite(c: Term, t: Term, e: Term) -> Term {
    Term::Ite(Box::new(c), Box::new(t), Box::new(e))
}
pub fn sum(ts: Vec<Term>) -> Term {
    if ts.len() == 1 {
        return ts.into_iter().next().unwrap();
    }
    Term::Add(ts)
}
pub fn scale(k: Rational, t: Term) -> Term {
    Term::Scale(k, Box::new(t))
}
pub fn cmp(op: CmpOp, a: Term, b: Term) -> Term {
    Term::Cmp(op, Box::new(a), Box::new(b))
}
pub fn eq(a: Term, b: Term) -> Term {
    cmp(CmpOp::Eq, a, b)
}
pub fn le(a: Term, b: Term) -> Term {
    cmp(CmpOp::Le, a, b)
}
pub fn lt(a: Term, b: Term) -> Term {
    cmp(CmpOp::Lt, a, b)
}
pub fn ge(a: Term, b: Term) -> Term {
    cmp(CmpOp::Ge, a, b)
}
pub fn to_real(t: Term) -> Term {
    Term::ToReal(Box::new(t))
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("ill-sorted term: {0}")]
pub struct SortError(pub String);

impl Term {
    pub fn sort(&self, sorts: &[Sort]) -> Result<Sort, SortError> {
        let err = |m: &str| Err(SortError(m.to_string()));
        let all = |ts: &[&Term], want: Sort| -> Result<(), SortError> {
            for t in ts {
                if t.sort(sorts)? != want {
                    return Err(SortError(format!("expected {}", want.smt())));
                }
            }
            Ok(())
        };
        Ok(match self {
            Term::Bool(_) => Sort::Bool,
            Term::Int(_) => Sort::Int,
            Term::Real(_) => Sort::Real,
            Term::Var(v) => match sorts.get(v.0) {
                Some(s) => *s,
                None => return err("undeclared variable"),
            },
            Term::Not(a) => {
                all(&[a], Sort::Bool)?;
                Sort::Bool
            }
            Term::And(ts) | Term::Or(ts) => {
                all(&ts.iter().collect::<Vec<_>>(), Sort::Bool)?;
                Sort::Bool
            }
            Term::Implies(a, b) | Term::Iff(a, b) => {
                all(&[a, b], Sort::Bool)?;
                Sort::Bool
            }
            Term::Ite(c, t, e) => {
                all(&[c], Sort::Bool)?;
                let s = t.sort(sorts)?;
                all(&[e], s)?;
                s
            }
            Term::Add(ts) => {
                let Some(first) = ts.first() else { return Ok(Sort::Int) };
                let s = first.sort(sorts)?;
                if s == Sort::Bool {
                    return err("boolean summand");
                }
                all(&ts.iter().collect::<Vec<_>>(), s)?;
                s
            }
            Term::Neg(a) => match a.sort(sorts)? {
                Sort::Bool => return err("negated boolean"),
                s => s,
            },
            Term::Scale(k, a) => match a.sort(sorts)? {
                Sort::Bool => return err("scaled boolean"),
                Sort::Int if !k.is_integer() => return err("fractional coefficient on an integer term"),
                s => s,
            },
            Term::Cmp(op, a, b) => {
                let s = a.sort(sorts)?;
                all(&[b], s)?;
                if s == Sort::Bool && *op != CmpOp::Eq {
                    return err("ordering on booleans");
                }
                Sort::Bool
            }
            Term::ToReal(a) => {
                all(&[a], Sort::Int)?;
                Sort::Real
            }
        })
    }

    /// SMT-LIB v2 text; `names` maps variables to declared symbols and
    /// `sorts` decides how numeric literals are written.
    pub fn to_smt(&self, names: &[String], sorts: &[Sort]) -> String {
        let mut out = String::new();
        self.write_smt(names, sorts, &mut out);
        out
    }

    fn write_smt(&self, names: &[String], sorts: &[Sort], out: &mut String) {
        let list = |op: &str, ts: &[&Term], out: &mut String| {
            out.push('(');
            out.push_str(op);
            for t in ts {
                out.push(' ');
                t.write_smt(names, sorts, out);
            }
            out.push(')');
        };
        match self {
            Term::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Term::Int(i) => {
                if *i < 0 {
                    let _ = write!(out, "(- {})", i.unsigned_abs());
                } else {
                    let _ = write!(out, "{i}");
                }
            }
            Term::Real(r) => out.push_str(&smt_real(r)),
            Term::Var(v) => out.push_str(&names[v.0]),
            Term::Not(a) => list("not", &[a], out),
            Term::And(ts) if ts.is_empty() => out.push_str("true"),
            Term::Or(ts) if ts.is_empty() => out.push_str("false"),
            Term::And(ts) => list("and", &ts.iter().collect::<Vec<_>>(), out),
            Term::Or(ts) => list("or", &ts.iter().collect::<Vec<_>>(), out),
            Term::Implies(a, b) => list("=>", &[a, b], out),
            Term::Iff(a, b) => list("=", &[a, b], out),
            Term::Ite(c, t, e) => list("ite", &[c, t, e], out),
            Term::Add(ts) if ts.is_empty() => out.push('0'),
            Term::Add(ts) => list("+", &ts.iter().collect::<Vec<_>>(), out),
            Term::Neg(a) => list("-", &[a], out),
            Term::Scale(k, a) => {
                let coeff = if a.sort(sorts) == Ok(Sort::Int) {
                    Term::Int(k.to_integer())
                } else {
                    Term::Real(*k)
                };
                list("*", &[&coeff, a], out)
            }
            Term::Cmp(op, a, b) => list(op.symbol(), &[a, b], out),
            Term::ToReal(a) => list("to_real", &[a], out),
        }
    }

    /// Visit every variable occurring in the term.
    pub fn visit_vars(&self, f: &mut impl FnMut(Var)) {
        match self {
            Term::Bool(_) | Term::Int(_) | Term::Real(_) => {}
            Term::Var(v) => f(*v),
            Term::Not(a) | Term::Neg(a) | Term::Scale(_, a) | Term::ToReal(a) => a.visit_vars(f),
            Term::And(ts) | Term::Or(ts) | Term::Add(ts) => ts.iter().for_each(|t| t.visit_vars(f)),
            Term::Implies(a, b) | Term::Iff(a, b) | Term::Cmp(_, a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            Term::Ite(c, t, e) => {
                c.visit_vars(f);
                t.visit_vars(f);
                e.visit_vars(f);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Value {
    Bool(bool),
    Num(Rational),
}

impl Value {
    /// Parse a solver value: `true`, `7`, `(- 7)`, `2.5`, `(/ 1.0 3.0)`.
    pub fn from_sexpr(e: &SExpr) -> Option<Value> {
        match e {
            SExpr::Atom(a, _) => match a.as_str() {
                "true" => Some(Value::Bool(true)),
                "false" => Some(Value::Bool(false)),
                s => crate::rational::parse_rational(s).map(Value::Num),
            },
            SExpr::List(items, _) => {
                let head = items.first()?.as_atom()?;
                let nums: Option<Vec<Rational>> = items[1..]
                    .iter()
                    .map(|i| match Value::from_sexpr(i)? {
                        Value::Num(r) => Some(r),
                        Value::Bool(_) => None,
                    })
                    .collect();
                let nums = nums?;
                match (head, nums.as_slice()) {
                    ("-", [x]) => Some(Value::Num(-*x)),
                    ("-", [x, y]) => Some(Value::Num(*x - *y)),
                    ("/", [x, y]) if !y.is_zero() => Some(Value::Num(*x / *y)),
                    ("+", xs) => Some(Value::Num(xs.iter().copied().sum())),
                    _ => None,
                }
            }
        }
    }
}

/// Variable assignment returned by a satisfiable check.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverModel {
    values: HashMap<Var, Value>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("variable {0:?} has no value in the model")]
    Unassigned(Var),
    #[error("value of the wrong sort")]
    Sort,
}

impl SolverModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, v: Var, value: Value) {
        self.values.insert(v, value);
    }

    pub fn get(&self, v: Var) -> Option<Value> {
        self.values.get(&v).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn bool(&self, v: Var) -> bool {
        matches!(self.values.get(&v), Some(Value::Bool(true)))
    }

    pub fn num(&self, v: Var) -> Rational {
        match self.values.get(&v) {
            Some(Value::Num(r)) => *r,
            _ => Rational::zero(),
        }
    }

    pub fn eval(&self, t: &Term) -> Result<Value, EvalError> {
        let b = |t: &Term| match self.eval(t)? {
            Value::Bool(b) => Ok(b),
            Value::Num(_) => Err(EvalError::Sort),
        };
        let n = |t: &Term| match self.eval(t)? {
            Value::Num(r) => Ok(r),
            Value::Bool(_) => Err(EvalError::Sort),
        };
        Ok(match t {
            Term::Bool(x) => Value::Bool(*x),
            Term::Int(i) => Value::Num(Rational::from_integer(*i)),
            Term::Real(r) => Value::Num(*r),
            Term::Var(v) => self.get(*v).ok_or(EvalError::Unassigned(*v))?,
            Term::Not(a) => Value::Bool(!b(a)?),
            Term::And(ts) => {
                let mut acc = true;
                for t in ts {
                    acc &= b(t)?;
                }
                Value::Bool(acc)
            }
            Term::Or(ts) => {
                let mut acc = false;
                for t in ts {
                    acc |= b(t)?;
                }
                Value::Bool(acc)
            }
            Term::Implies(x, y) => Value::Bool(!b(x)? || b(y)?),
            Term::Iff(x, y) => Value::Bool(b(x)? == b(y)?),
            Term::Ite(c, x, y) => {
                if b(c)? {
                    self.eval(x)?
                } else {
                    self.eval(y)?
                }
            }
            Term::Add(ts) => {
                let mut acc = Rational::zero();
                for t in ts {
                    acc += n(t)?;
                }
                Value::Num(acc)
            }
            Term::Neg(a) => Value::Num(-n(a)?),
            Term::Scale(k, a) => Value::Num(*k * n(a)?),
            Term::Cmp(op, x, y) => match (self.eval(x)?, self.eval(y)?) {
                (Value::Num(p), Value::Num(q)) => Value::Bool(op.holds(p, q)),
                (Value::Bool(p), Value::Bool(q)) if *op == CmpOp::Eq => Value::Bool(p == q),
                _ => return Err(EvalError::Sort),
            },
            Term::ToReal(a) => Value::Num(n(a)?),
        })
    }

    pub fn eval_bool(&self, t: &Term) -> Result<bool, EvalError> {
        match self.eval(t)? {
            Value::Bool(b) => Ok(b),
            Value::Num(_) => Err(EvalError::Sort),
        }
    }

    pub fn eval_num(&self, t: &Term) -> Result<Rational, EvalError> {
        match self.eval(t)? {
            Value::Num(r) => Ok(r),
            Value::Bool(_) => Err(EvalError::Sort),
        }
    }
}

/// `ite(b, 1, 0)` as an integer term.
pub fn indicator(b: Term) -> Term {
    ite(b, Term::Int(1), Term::Int(0))
}

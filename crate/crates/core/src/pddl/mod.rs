//! PDDL fragment: typed STRIPS with negative preconditions, equality and
//! linear numeric fluents. Anything outside the fragment is rejected with an
//! [`PddlError::Unsupported`] naming the construct.

mod features;
mod parser;
mod unparse;

use std::collections::BTreeMap;
use std::fmt;

pub use features::{parse_addinfo, CostBoundSource, DimensionSpec, FeatureConfig, NumericBox};
pub use parser::{parse_domain, parse_problem};

use crate::rational::Rational;
use crate::sexpr::{Pos, SyntaxError};

pub const ROOT_TYPE: &str = "object";
/// The action-cost fluent; its effects are dropped because every action
/// costs one step.
pub const TOTAL_COST: &str = "total-cost";

#[derive(Debug, thiserror::Error)]
pub enum PddlError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("{pos}: unsupported PDDL construct `{construct}`")]
    Unsupported { construct: String, pos: Pos },
    #[error("{pos}: {msg}")]
    Semantic { msg: String, pos: Pos },
}

impl PddlError {
    pub(crate) fn semantic(pos: Pos, msg: impl Into<String>) -> Self {
        PddlError::Semantic { msg: msg.into(), pos }
    }

    pub(crate) fn unsupported(pos: Pos, construct: impl Into<String>) -> Self {
        PddlError::Unsupported {
            construct: construct.into(),
            pos,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedName {
    pub name: String,
    pub ty: String,
}

/// Type hierarchy; every type except `object` has exactly one parent.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TypeForest {
    parents: BTreeMap<String, String>,
}

impl TypeForest {
    pub fn contains(&self, ty: &str) -> bool {
        ty == ROOT_TYPE || self.parents.contains_key(ty)
    }

    pub fn insert(&mut self, ty: &str, parent: &str) {
        if ty != ROOT_TYPE {
            self.parents.insert(ty.to_string(), parent.to_string());
        }
    }

    pub fn parent(&self, ty: &str) -> Option<&str> {
        self.parents.get(ty).map(String::as_str)
    }

    /// True when `ty` equals `ancestor` or descends from it.
    pub fn is_subtype(&self, ty: &str, ancestor: &str) -> bool {
        let mut cur = ty;
        for _ in 0..=self.parents.len() {
            if cur == ancestor {
                return true;
            }
            match self.parents.get(cur) {
                Some(p) => cur = p,
                None => return false,
            }
        }
        false
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.parents.iter().map(|(c, p)| (c.as_str(), p.as_str()))
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub name: String,
    pub params: Vec<TypedName>,
}

/// Argument of a lifted atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arg {
    Var(String),
    Const(String),
}

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arg::Var(v) => write!(f, "{v}"),
            Arg::Const(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomSchema {
    pub predicate: String,
    pub args: Vec<Arg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }

    /// The comparison equivalent to `not (a op b)`, if expressible.
    pub fn negated(self) -> Option<CmpOp> {
        match self {
            CmpOp::Lt => Some(CmpOp::Ge),
            CmpOp::Le => Some(CmpOp::Gt),
            CmpOp::Ge => Some(CmpOp::Lt),
            CmpOp::Gt => Some(CmpOp::Le),
            CmpOp::Eq => None,
        }
    }

    pub fn holds(self, lhs: Rational, rhs: Rational) -> bool {
        match self {
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Gt => lhs > rhs,
        }
    }
}

/// Linear numeric expression over (lifted) fluents.
#[derive(Debug, Clone, PartialEq)]
pub enum NumExpr {
    Const(Rational),
    Fluent(AtomSchema),
    Add(Box<NumExpr>, Box<NumExpr>),
    Sub(Box<NumExpr>, Box<NumExpr>),
    Mul(Box<NumExpr>, Box<NumExpr>),
    Div(Box<NumExpr>, Box<NumExpr>),
    Neg(Box<NumExpr>),
}

impl NumExpr {
    pub fn mentions_fluent(&self) -> bool {
        match self {
            NumExpr::Const(_) => false,
            NumExpr::Fluent(_) => true,
            NumExpr::Neg(a) => a.mentions_fluent(),
            NumExpr::Add(a, b) | NumExpr::Sub(a, b) | NumExpr::Mul(a, b) | NumExpr::Div(a, b) => {
                a.mentions_fluent() || b.mentions_fluent()
            }
        }
    }

    /// Value of a fluent-free expression.
    pub fn constant_value(&self) -> Option<Rational> {
        Some(match self {
            NumExpr::Const(c) => *c,
            NumExpr::Fluent(_) => return None,
            NumExpr::Neg(a) => -a.constant_value()?,
            NumExpr::Add(a, b) => a.constant_value()? + b.constant_value()?,
            NumExpr::Sub(a, b) => a.constant_value()? - b.constant_value()?,
            NumExpr::Mul(a, b) => a.constant_value()? * b.constant_value()?,
            NumExpr::Div(a, b) => {
                let d = b.constant_value()?;
                if d == Rational::from_integer(0) {
                    return None;
                }
                a.constant_value()? / d
            }
        })
    }

    pub(crate) fn visit_fluents<'a>(&'a self, f: &mut impl FnMut(&'a AtomSchema)) {
        match self {
            NumExpr::Const(_) => {}
            NumExpr::Fluent(a) => f(a),
            NumExpr::Neg(a) => a.visit_fluents(f),
            NumExpr::Add(a, b) | NumExpr::Sub(a, b) | NumExpr::Mul(a, b) | NumExpr::Div(a, b) => {
                a.visit_fluents(f);
                b.visit_fluents(f);
            }
        }
    }
}

/// One conjunct of a precondition or goal.
#[derive(Debug, Clone, PartialEq)]
pub enum Condition {
    Atom(AtomSchema),
    NotAtom(AtomSchema),
    Equal(Arg, Arg),
    NotEqual(Arg, Arg),
    Compare(CmpOp, NumExpr, NumExpr),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateKind {
    Assign,
    Increase,
    Decrease,
}

impl UpdateKind {
    pub fn keyword(self) -> &'static str {
        match self {
            UpdateKind::Assign => "assign",
            UpdateKind::Increase => "increase",
            UpdateKind::Decrease => "decrease",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumericUpdate {
    pub kind: UpdateKind,
    pub fluent: AtomSchema,
    pub expr: NumExpr,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Effects {
    pub add: Vec<AtomSchema>,
    pub del: Vec<AtomSchema>,
    pub numeric: Vec<NumericUpdate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionSchema {
    pub name: String,
    pub parameters: Vec<TypedName>,
    pub precondition: Vec<Condition>,
    pub effects: Effects,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainModel {
    pub name: String,
    pub requirements: Vec<String>,
    pub types: TypeForest,
    pub constants: Vec<TypedName>,
    pub predicates: Vec<Signature>,
    pub functions: Vec<Signature>,
    pub schemas: Vec<ActionSchema>,
}

impl DomainModel {
    pub fn predicate(&self, name: &str) -> Option<&Signature> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn function(&self, name: &str) -> Option<&Signature> {
        self.functions.iter().find(|p| p.name == name)
    }

    pub fn schema(&self, name: &str) -> Option<&ActionSchema> {
        self.schemas.iter().find(|s| s.name == name)
    }

    /// True when any schema reads or writes a numeric fluent other than
    /// the action-cost counter.
    pub fn uses_numeric_fluents(&self) -> bool {
        let mut found = false;
        for s in &self.schemas {
            for c in &s.precondition {
                if let Condition::Compare(_, a, b) = c {
                    a.visit_fluents(&mut |fl| found |= fl.predicate != TOTAL_COST);
                    b.visit_fluents(&mut |fl| found |= fl.predicate != TOTAL_COST);
                }
            }
            found |= s.effects.numeric.iter().any(|u| u.fluent.predicate != TOTAL_COST);
        }
        found
    }
}

/// A ground atom or ground fluent reference, e.g. `(at rover0 waypoint3)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl GroundAtom {
    pub fn new(predicate: impl Into<String>, args: &[&str]) -> Self {
        GroundAtom {
            predicate: predicate.into(),
            args: args.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Parse `(p a b)`, `p a b` or `p_a_b`-free forms; case-insensitive.
    pub fn parse_loose(text: &str) -> Option<Self> {
        let t = text.trim().trim_start_matches('(').trim_end_matches(')');
        let mut parts = t.split_whitespace().map(|s| s.to_ascii_lowercase());
        let predicate = parts.next()?;
        Some(GroundAtom {
            predicate,
            args: parts.collect(),
        })
    }

    /// `energy_rover0` style name used by configuration files.
    pub fn underscore_name(&self) -> String {
        let mut s = self.predicate.clone();
        for a in &self.args {
            s.push('_');
            s.push_str(a);
        }
        s
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

/// Numeric goal condition `lhs op rhs` over ground fluents.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericGoal {
    pub op: CmpOp,
    pub lhs: NumExpr,
    pub rhs: NumExpr,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GoalSpec {
    pub atoms: Vec<GroundAtom>,
    pub numeric: Vec<NumericGoal>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Classical,
    Osp,
    Numeric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemModel {
    pub name: String,
    pub domain_name: String,
    pub objects: Vec<TypedName>,
    pub init_atoms: Vec<GroundAtom>,
    pub init_fluents: BTreeMap<GroundAtom, Rational>,
    pub goal: GoalSpec,
    pub mode: Mode,
}

impl ProblemModel {
    /// Demote the goal conjunction to soft, utility-bearing atoms. The hard
    /// goal becomes trivially satisfiable.
    pub fn make_soft(&mut self) {
        self.mode = Mode::Osp;
    }

    pub fn object_type(&self, name: &str) -> Option<&str> {
        self.objects.iter().find(|o| o.name == name).map(|o| o.ty.as_str())
    }
}

//! PDDL text output. `parse(unparse(m))` yields a model equal to `m`.

use std::fmt::{self, Display, Write as _};

use super::{
    AtomSchema, Condition, DomainModel, NumExpr, ProblemModel, Signature, TypedName, ROOT_TYPE,
};
use crate::rational::pddl_number;

fn typed(names: &[TypedName]) -> String {
    let mut s = String::new();
    for (i, n) in names.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        s.push_str(&n.name);
        let next_same = names.get(i + 1).is_some_and(|m| m.ty == n.ty);
        if !next_same && n.ty != ROOT_TYPE {
            let _ = write!(s, " - {}", n.ty);
        } else if !next_same && names[i + 1..].iter().any(|m| m.ty != ROOT_TYPE) {
            // An untyped run followed by typed names must be closed explicitly.
            let _ = write!(s, " - {ROOT_TYPE}");
        }
    }
    s
}

fn sig(s: &Signature) -> String {
    if s.params.is_empty() {
        format!("({})", s.name)
    } else {
        format!("({} {})", s.name, typed(&s.params))
    }
}

impl Display for AtomSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

impl Display for NumExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumExpr::Const(c) => f.write_str(&pddl_number(c)),
            NumExpr::Fluent(a) => write!(f, "{a}"),
            NumExpr::Add(a, b) => write!(f, "(+ {a} {b})"),
            NumExpr::Sub(a, b) => write!(f, "(- {a} {b})"),
            NumExpr::Mul(a, b) => write!(f, "(* {a} {b})"),
            NumExpr::Div(a, b) => write!(f, "(/ {a} {b})"),
            NumExpr::Neg(a) => write!(f, "(- {a})"),
        }
    }
}

impl Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Atom(a) => write!(f, "{a}"),
            Condition::NotAtom(a) => write!(f, "(not {a})"),
            Condition::Equal(a, b) => write!(f, "(= {a} {b})"),
            Condition::NotEqual(a, b) => write!(f, "(not (= {a} {b}))"),
            Condition::Compare(op, a, b) => write!(f, "({} {a} {b})", op.symbol()),
        }
    }
}

impl Display for DomainModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "(define (domain {})", self.name)?;
        if !self.requirements.is_empty() {
            writeln!(f, "  (:requirements {})", self.requirements.join(" "))?;
        }
        if !self.types.is_empty() {
            let names: Vec<TypedName> = self
                .types
                .iter()
                .map(|(c, p)| TypedName {
                    name: c.to_string(),
                    ty: p.to_string(),
                })
                .collect();
            writeln!(f, "  (:types {})", typed(&names))?;
        }
        if !self.constants.is_empty() {
            writeln!(f, "  (:constants {})", typed(&self.constants))?;
        }
        if !self.predicates.is_empty() {
            let p: Vec<String> = self.predicates.iter().map(sig).collect();
            writeln!(f, "  (:predicates {})", p.join(" "))?;
        }
        if !self.functions.is_empty() {
            let p: Vec<String> = self.functions.iter().map(sig).collect();
            writeln!(f, "  (:functions {})", p.join(" "))?;
        }
        for s in &self.schemas {
            writeln!(f, "  (:action {}", s.name)?;
            writeln!(f, "    :parameters ({})", typed(&s.parameters))?;
            let pre: Vec<String> = s.precondition.iter().map(|c| c.to_string()).collect();
            writeln!(f, "    :precondition (and {})", pre.join(" "))?;
            let mut eff: Vec<String> = s.effects.add.iter().map(|a| a.to_string()).collect();
            eff.extend(s.effects.del.iter().map(|a| format!("(not {a})")));
            eff.extend(
                s.effects
                    .numeric
                    .iter()
                    .map(|u| format!("({} {} {})", u.kind.keyword(), u.fluent, u.expr)),
            );
            writeln!(f, "    :effect (and {}))", eff.join(" "))?;
        }
        write!(f, ")")
    }
}

impl Display for ProblemModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "(define (problem {})", self.name)?;
        writeln!(f, "  (:domain {})", self.domain_name)?;
        writeln!(f, "  (:objects {})", typed(&self.objects))?;
        write!(f, "  (:init")?;
        for a in &self.init_atoms {
            write!(f, "\n    {a}")?;
        }
        for (fl, v) in &self.init_fluents {
            write!(f, "\n    (= {fl} {})", pddl_number(v))?;
        }
        writeln!(f, ")")?;
        write!(f, "  (:goal (and")?;
        for a in &self.goal.atoms {
            write!(f, " {a}")?;
        }
        for g in &self.goal.numeric {
            write!(f, " ({} {} {})", g.op.symbol(), g.lhs, g.rhs)?;
        }
        write!(f, "))\n)")
    }
}

use std::collections::{BTreeMap, HashMap, HashSet};

use super::{
    ActionSchema, Arg, AtomSchema, CmpOp, Condition, DomainModel, Effects, GoalSpec, GroundAtom, Mode,
    NumExpr, NumericGoal, NumericUpdate, PddlError, ProblemModel, Signature, TypeForest, TypedName,
    UpdateKind, ROOT_TYPE, TOTAL_COST,
};
use crate::rational::parse_rational;
use crate::sexpr::{self, Pos, SExpr};

type Result<T> = std::result::Result<T, PddlError>;

const SUPPORTED_REQUIREMENTS: &[&str] = &[
    ":strips",
    ":typing",
    ":negative-preconditions",
    ":numeric-fluents",
    ":fluents",
    ":equality",
    ":action-costs",
];

fn list<'a>(e: &'a SExpr, what: &str) -> Result<&'a [SExpr]> {
    e.as_list()
        .ok_or_else(|| PddlError::semantic(e.pos(), format!("expected a list for {what}, found `{e}`")))
}

fn atom<'a>(e: &'a SExpr, what: &str) -> Result<&'a str> {
    e.as_atom()
        .ok_or_else(|| PddlError::semantic(e.pos(), format!("expected {what}, found `{e}`")))
}

fn is_var(s: &str) -> bool {
    s.starts_with('?')
}

/// Parse a typed list `a b - t c` into names with types. `either` types are
/// outside the fragment.
fn typed_list(items: &[SExpr], typing: bool) -> Result<Vec<TypedName>> {
    let mut out = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let it = &items[i];
        let s = atom(it, "a name")?;
        if s == "-" {
            let ty_expr = items
                .get(i + 1)
                .ok_or_else(|| PddlError::semantic(it.pos(), "missing type after `-`"))?;
            if ty_expr.head() == Some("either") {
                return Err(PddlError::unsupported(ty_expr.pos(), "either"));
            }
            let ty = atom(ty_expr, "a type name")?;
            if !typing {
                return Err(PddlError::semantic(it.pos(), "typed list requires :typing"));
            }
            if pending.is_empty() {
                return Err(PddlError::semantic(it.pos(), "type annotation without names"));
            }
            for n in pending.drain(..) {
                out.push(TypedName {
                    name: n,
                    ty: ty.to_string(),
                });
            }
            i += 2;
        } else {
            pending.push(s.to_string());
            i += 1;
        }
    }
    for n in pending {
        out.push(TypedName {
            name: n,
            ty: ROOT_TYPE.to_string(),
        });
    }
    Ok(out)
}

fn expect_define<'a>(text: &str, kind: &str) -> Result<(Vec<SExpr>, String, Pos)> {
    let top = sexpr::parse_one(text, true)?;
    let items = list(&top, "the top-level define")?.to_vec();
    if items.first().and_then(SExpr::as_atom) != Some("define") {
        return Err(PddlError::semantic(top.pos(), "expected `(define ...)`"));
    }
    let header = items
        .get(1)
        .ok_or_else(|| PddlError::semantic(top.pos(), format!("missing `({kind} NAME)`")))?;
    let h = list(header, "the header")?;
    if h.len() != 2 || h[0].as_atom() != Some(kind) {
        return Err(PddlError::semantic(header.pos(), format!("expected `({kind} NAME)`")));
    }
    let name = atom(&h[1], "a name")?.to_string();
    Ok((items[2..].to_vec(), name, top.pos()))
}

/// Parse a domain file in the supported fragment.
pub fn parse_domain(text: &str) -> Result<DomainModel> {
    let (sections, name, _) = expect_define(text, "domain")?;
    let mut dom = DomainModel {
        name,
        requirements: Vec::new(),
        types: TypeForest::default(),
        constants: Vec::new(),
        predicates: Vec::new(),
        functions: Vec::new(),
        schemas: Vec::new(),
    };

    // Declarations first so schema bodies can be checked regardless of
    // section order.
    let mut actions = Vec::new();
    for sec in &sections {
        let items = list(sec, "a domain section")?;
        let head = items
            .first()
            .and_then(SExpr::as_atom)
            .ok_or_else(|| PddlError::semantic(sec.pos(), "empty section"))?;
        match head {
            ":requirements" => {
                for r in &items[1..] {
                    let r = atom(r, "a requirement")?;
                    if !SUPPORTED_REQUIREMENTS.contains(&r) {
                        return Err(PddlError::unsupported(sec.pos(), r));
                    }
                    dom.requirements.push(r.to_string());
                }
            }
            ":types" => {
                for t in typed_list(&items[1..], true)? {
                    if !dom.types.contains(&t.ty) {
                        dom.types.insert(&t.ty, ROOT_TYPE);
                    }
                    dom.types.insert(&t.name, &t.ty);
                }
            }
            ":constants" => dom.constants = typed_list(&items[1..], true)?,
            ":predicates" => {
                for p in &items[1..] {
                    let sig = signature(p)?;
                    if dom.predicate(&sig.name).is_some() {
                        return Err(PddlError::semantic(p.pos(), format!("duplicate predicate `{}`", sig.name)));
                    }
                    dom.predicates.push(sig);
                }
            }
            ":functions" => {
                let mut i = 1;
                while i < items.len() {
                    let it = &items[i];
                    if it.as_atom() == Some("-") {
                        match items.get(i + 1).and_then(SExpr::as_atom) {
                            Some("number") => {}
                            Some(other) => {
                                return Err(PddlError::unsupported(it.pos(), format!("object fluent type `{other}`")))
                            }
                            None => return Err(PddlError::semantic(it.pos(), "missing function type")),
                        }
                        i += 2;
                        continue;
                    }
                    let sig = signature(it)?;
                    if dom.function(&sig.name).is_some() || dom.predicate(&sig.name).is_some() {
                        return Err(PddlError::semantic(it.pos(), format!("duplicate function `{}`", sig.name)));
                    }
                    dom.functions.push(sig);
                    i += 1;
                }
            }
            ":action" => actions.push(sec),
            other => return Err(PddlError::unsupported(sec.pos(), other)),
        }
    }

    for sig in dom.predicates.iter().chain(dom.functions.iter()) {
        for p in &sig.params {
            if !dom.types.contains(&p.ty) {
                return Err(PddlError::semantic(
                    Pos::default(),
                    format!("unknown type `{}` in declaration of `{}`", p.ty, sig.name),
                ));
            }
        }
    }
    for c in &dom.constants {
        if !dom.types.contains(&c.ty) {
            return Err(PddlError::semantic(Pos::default(), format!("unknown type `{}` for constant `{}`", c.ty, c.name)));
        }
    }

    for sec in actions {
        let schema = parse_action(sec, &dom)?;
        if dom.schema(&schema.name).is_some() {
            return Err(PddlError::semantic(sec.pos(), format!("duplicate action `{}`", schema.name)));
        }
        dom.schemas.push(schema);
    }
    Ok(dom)
}

fn signature(e: &SExpr) -> Result<Signature> {
    let items = list(e, "a declaration")?;
    let name = atom(
        items
            .first()
            .ok_or_else(|| PddlError::semantic(e.pos(), "empty declaration"))?,
        "a name",
    )?;
    let params = typed_list(&items[1..], true)?;
    for p in &params {
        if !is_var(&p.name) {
            return Err(PddlError::semantic(e.pos(), format!("parameter `{}` must start with `?`", p.name)));
        }
    }
    Ok(Signature {
        name: name.to_string(),
        params,
    })
}

/// Scope used while resolving symbols inside a schema body or a problem.
struct Scope<'a> {
    dom: &'a DomainModel,
    vars: HashMap<String, String>,
    objects: HashMap<String, String>,
    ground: bool,
}

impl Scope<'_> {
    fn arg(&self, e: &SExpr) -> Result<Arg> {
        let s = atom(e, "a term")?;
        if is_var(s) {
            if self.ground {
                return Err(PddlError::semantic(e.pos(), format!("free variable `{s}` in ground context")));
            }
            if !self.vars.contains_key(s) {
                return Err(PddlError::semantic(e.pos(), format!("undeclared variable `{s}`")));
            }
            Ok(Arg::Var(s.to_string()))
        } else if self.objects.contains_key(s) {
            Ok(Arg::Const(s.to_string()))
        } else {
            Err(PddlError::semantic(e.pos(), format!("unknown object `{s}`")))
        }
    }

    fn arg_type(&self, a: &Arg) -> &str {
        match a {
            Arg::Var(v) => &self.vars[v],
            Arg::Const(c) => &self.objects[c],
        }
    }

    fn check_types(&self, sig: &Signature, args: &[Arg], pos: Pos) -> Result<()> {
        if sig.params.len() != args.len() {
            return Err(PddlError::semantic(
                pos,
                format!("`{}` expects {} arguments, got {}", sig.name, sig.params.len(), args.len()),
            ));
        }
        for (p, a) in sig.params.iter().zip(args) {
            let at = self.arg_type(a);
            // Variables may be narrower or wider than the slot; a wider
            // variable simply yields fewer consistent groundings. Constants
            // must fit.
            let ok = match a {
                Arg::Const(_) => self.dom.types.is_subtype(at, &p.ty),
                Arg::Var(_) => self.dom.types.is_subtype(at, &p.ty) || self.dom.types.is_subtype(&p.ty, at),
            };
            if !ok {
                return Err(PddlError::semantic(
                    pos,
                    format!("type mismatch: `{a}` of type `{at}` used as `{}` in `{}`", p.ty, sig.name),
                ));
            }
        }
        Ok(())
    }

    fn atom_schema(&self, e: &SExpr) -> Result<AtomSchema> {
        let items = list(e, "an atom")?;
        let name = atom(
            items.first().ok_or_else(|| PddlError::semantic(e.pos(), "empty atom"))?,
            "a predicate name",
        )?;
        let sig = self
            .dom
            .predicate(name)
            .ok_or_else(|| PddlError::semantic(e.pos(), format!("unknown predicate `{name}`")))?;
        let args = items[1..].iter().map(|a| self.arg(a)).collect::<Result<Vec<_>>>()?;
        self.check_types(sig, &args, e.pos())?;
        Ok(AtomSchema {
            predicate: name.to_string(),
            args,
        })
    }

    fn fluent(&self, e: &SExpr) -> Result<AtomSchema> {
        let (name, rest) = match e {
            SExpr::Atom(s, _) => (s.as_str(), &[][..]),
            SExpr::List(items, _) => (
                atom(items.first().ok_or_else(|| PddlError::semantic(e.pos(), "empty fluent"))?, "a function name")?,
                &items[1..],
            ),
        };
        let sig = self
            .dom
            .function(name)
            .ok_or_else(|| PddlError::semantic(e.pos(), format!("unknown function `{name}`")))?;
        let args = rest.iter().map(|a| self.arg(a)).collect::<Result<Vec<_>>>()?;
        self.check_types(sig, &args, e.pos())?;
        Ok(AtomSchema {
            predicate: name.to_string(),
            args,
        })
    }

    fn num_expr(&self, e: &SExpr) -> Result<NumExpr> {
        if let Some(s) = e.as_atom() {
            if let Some(r) = parse_rational(s) {
                return Ok(NumExpr::Const(r));
            }
            // Zero-arity function written without parentheses.
            if self.dom.function(s).is_some() {
                return Ok(NumExpr::Fluent(self.fluent(e)?));
            }
            return Err(PddlError::semantic(e.pos(), format!("expected a numeric expression, found `{s}`")));
        }
        let items = list(e, "a numeric expression")?;
        let head = items
            .first()
            .and_then(SExpr::as_atom)
            .ok_or_else(|| PddlError::semantic(e.pos(), "malformed numeric expression"))?;
        let bin = |ctor: fn(Box<NumExpr>, Box<NumExpr>) -> NumExpr| -> Result<NumExpr> {
            if items.len() < 3 {
                return Err(PddlError::semantic(e.pos(), format!("`{head}` needs two operands")));
            }
            let mut acc = self.num_expr(&items[1])?;
            for it in &items[2..] {
                acc = ctor(Box::new(acc), Box::new(self.num_expr(it)?));
            }
            Ok(acc)
        };
        let out = match head {
            "+" => bin(NumExpr::Add)?,
            "-" if items.len() == 2 => NumExpr::Neg(Box::new(self.num_expr(&items[1])?)),
            "-" => bin(NumExpr::Sub)?,
            "*" => {
                let m = bin(NumExpr::Mul)?;
                check_linear(&m, e.pos())?;
                m
            }
            "/" => {
                let d = bin(NumExpr::Div)?;
                check_linear(&d, e.pos())?;
                d
            }
            _ if self.dom.function(head).is_some() => NumExpr::Fluent(self.fluent(e)?),
            other => return Err(PddlError::semantic(e.pos(), format!("unknown numeric operator or function `{other}`"))),
        };
        Ok(out)
    }

    fn conditions(&self, e: &SExpr, out: &mut Vec<Condition>) -> Result<()> {
        let items = list(e, "a condition")?;
        let Some(head) = items.first() else {
            // `()` is the empty conjunction.
            return Ok(());
        };
        let head = atom(head, "a condition head")?;
        match head {
            "and" => {
                for c in &items[1..] {
                    self.conditions(c, out)?;
                }
            }
            "not" => {
                let inner = items
                    .get(1)
                    .ok_or_else(|| PddlError::semantic(e.pos(), "`not` without operand"))?;
                let mut tmp = Vec::new();
                self.conditions(inner, &mut tmp)?;
                if tmp.len() != 1 {
                    return Err(PddlError::unsupported(e.pos(), "negated conjunction"));
                }
                out.push(match tmp.pop().unwrap() {
                    Condition::Atom(a) => Condition::NotAtom(a),
                    Condition::Equal(a, b) => Condition::NotEqual(a, b),
                    Condition::Compare(op, a, b) => match op.negated() {
                        Some(n) => Condition::Compare(n, a, b),
                        None => return Err(PddlError::unsupported(e.pos(), "negated numeric equality")),
                    },
                    Condition::NotAtom(_) | Condition::NotEqual(..) => {
                        return Err(PddlError::unsupported(e.pos(), "double negation"))
                    }
                });
            }
            "or" | "imply" | "exists" | "forall" | "preference" | "when" => {
                return Err(PddlError::unsupported(e.pos(), head));
            }
            "<" | "<=" | ">" | ">=" | "=" => {
                if items.len() != 3 {
                    return Err(PddlError::semantic(e.pos(), format!("`{head}` needs two operands")));
                }
                let numeric = items[1..].iter().any(|x| {
                    x.as_list().is_some()
                        || x.as_atom().is_some_and(|s| parse_rational(s).is_some() || self.dom.function(s).is_some())
                });
                if head == "=" && !numeric {
                    out.push(Condition::Equal(self.arg(&items[1])?, self.arg(&items[2])?));
                } else {
                    let op = match head {
                        "<" => CmpOp::Lt,
                        "<=" => CmpOp::Le,
                        ">" => CmpOp::Gt,
                        ">=" => CmpOp::Ge,
                        _ => CmpOp::Eq,
                    };
                    out.push(Condition::Compare(op, self.num_expr(&items[1])?, self.num_expr(&items[2])?));
                }
            }
            _ => out.push(Condition::Atom(self.atom_schema(e)?)),
        }
        Ok(())
    }

    fn effects(&self, e: &SExpr, out: &mut Effects) -> Result<()> {
        let items = list(e, "an effect")?;
        let Some(head) = items.first() else {
            return Ok(());
        };
        let head = atom(head, "an effect head")?;
        match head {
            "and" => {
                for c in &items[1..] {
                    self.effects(c, out)?;
                }
            }
            "not" => {
                let inner = items
                    .get(1)
                    .ok_or_else(|| PddlError::semantic(e.pos(), "`not` without operand"))?;
                out.del.push(self.atom_schema(inner)?);
            }
            "when" | "forall" => return Err(PddlError::unsupported(e.pos(), format!("{head} (conditional effects)"))),
            "scale-up" | "scale-down" => return Err(PddlError::unsupported(e.pos(), head)),
            "assign" | "increase" | "decrease" => {
                if items.len() != 3 {
                    return Err(PddlError::semantic(e.pos(), format!("`{head}` needs a fluent and a value")));
                }
                let fluent = self.fluent(&items[1])?;
                let expr = self.num_expr(&items[2])?;
                if fluent.predicate == TOTAL_COST {
                    // Unit action costs: the cost counter is not modelled.
                    return Ok(());
                }
                let kind = match head {
                    "assign" => UpdateKind::Assign,
                    "increase" => UpdateKind::Increase,
                    _ => UpdateKind::Decrease,
                };
                out.numeric.push(NumericUpdate { kind, fluent, expr });
            }
            _ => out.add.push(self.atom_schema(e)?),
        }
        Ok(())
    }
}

fn check_linear(e: &NumExpr, pos: Pos) -> Result<()> {
    match e {
        NumExpr::Mul(a, b) if a.mentions_fluent() && b.mentions_fluent() => {
            Err(PddlError::unsupported(pos, "non-linear numeric expression"))
        }
        NumExpr::Div(_, b) if b.mentions_fluent() => Err(PddlError::unsupported(pos, "division by a fluent")),
        _ => Ok(()),
    }
}

fn constants_scope(dom: &DomainModel) -> HashMap<String, String> {
    dom.constants.iter().map(|c| (c.name.clone(), c.ty.clone())).collect()
}

fn parse_action(sec: &SExpr, dom: &DomainModel) -> Result<ActionSchema> {
    let items = list(sec, "an action")?;
    let name = atom(
        items
            .get(1)
            .ok_or_else(|| PddlError::semantic(sec.pos(), "action without a name"))?,
        "an action name",
    )?
    .to_string();
    let mut parameters = Vec::new();
    let mut pre_expr = None;
    let mut eff_expr = None;
    let mut i = 2;
    while i < items.len() {
        let key = atom(&items[i], "an action keyword")?;
        let val = items
            .get(i + 1)
            .ok_or_else(|| PddlError::semantic(items[i].pos(), format!("missing value for `{key}`")))?;
        match key {
            ":parameters" => parameters = typed_list(list(val, "parameters")?, true)?,
            ":precondition" => pre_expr = Some(val),
            ":effect" => eff_expr = Some(val),
            other => return Err(PddlError::unsupported(items[i].pos(), other)),
        }
        i += 2;
    }
    let mut vars = HashMap::new();
    for p in &parameters {
        if !is_var(&p.name) {
            return Err(PddlError::semantic(sec.pos(), format!("parameter `{}` must start with `?`", p.name)));
        }
        if !dom.types.contains(&p.ty) {
            return Err(PddlError::semantic(sec.pos(), format!("unknown type `{}` in action `{name}`", p.ty)));
        }
        if vars.insert(p.name.clone(), p.ty.clone()).is_some() {
            return Err(PddlError::semantic(sec.pos(), format!("duplicate parameter `{}`", p.name)));
        }
    }
    let scope = Scope {
        dom,
        vars,
        objects: constants_scope(dom),
        ground: false,
    };
    let mut precondition = Vec::new();
    if let Some(p) = pre_expr {
        scope.conditions(p, &mut precondition)?;
    }
    let mut effects = Effects::default();
    if let Some(e) = eff_expr {
        scope.effects(e, &mut effects)?;
    }
    // Add-after-delete: an atom both deleted and added ends up true.
    let add = effects.add.clone();
    effects.del.retain(|d| !add.contains(d));
    dedup(&mut effects.add);
    dedup(&mut effects.del);
    Ok(ActionSchema {
        name,
        parameters,
        precondition,
        effects,
    })
}

fn dedup<T: PartialEq>(v: &mut Vec<T>) {
    let mut out: Vec<T> = Vec::with_capacity(v.len());
    for x in v.drain(..) {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    *v = out;
}

fn ground_atom(a: AtomSchema) -> GroundAtom {
    GroundAtom {
        predicate: a.predicate,
        args: a
            .args
            .into_iter()
            .map(|x| match x {
                Arg::Const(c) | Arg::Var(c) => c,
            })
            .collect(),
    }
}

/// Parse a problem against an already parsed domain.
pub fn parse_problem(text: &str, dom: &DomainModel) -> Result<ProblemModel> {
    let (sections, name, top_pos) = expect_define(text, "problem")?;
    let mut domain_name = None;
    let mut objects = Vec::new();
    let mut init_expr = None;
    let mut goal_expr = None;
    for sec in &sections {
        let items = list(sec, "a problem section")?;
        let head = items
            .first()
            .and_then(SExpr::as_atom)
            .ok_or_else(|| PddlError::semantic(sec.pos(), "empty section"))?;
        match head {
            ":domain" => domain_name = Some(atom(items.get(1).unwrap_or(sec), "a domain name")?.to_string()),
            ":requirements" => {
                for r in &items[1..] {
                    let r = atom(r, "a requirement")?;
                    if !SUPPORTED_REQUIREMENTS.contains(&r) {
                        return Err(PddlError::unsupported(sec.pos(), r));
                    }
                }
            }
            ":objects" => objects = typed_list(&items[1..], true)?,
            ":init" => init_expr = Some(&items[1..]),
            ":goal" => goal_expr = Some(items.get(1).ok_or_else(|| PddlError::semantic(sec.pos(), "empty goal"))?),
            ":metric" => {}
            other => return Err(PddlError::unsupported(sec.pos(), other)),
        }
    }
    let domain_name = domain_name.ok_or_else(|| PddlError::semantic(top_pos, "missing `(:domain NAME)`"))?;
    if domain_name != dom.name {
        return Err(PddlError::semantic(
            top_pos,
            format!("problem is for domain `{domain_name}`, not `{}`", dom.name),
        ));
    }

    let mut scope_objects = constants_scope(dom);
    let mut seen = HashSet::new();
    for o in &objects {
        if !dom.types.contains(&o.ty) {
            return Err(PddlError::semantic(top_pos, format!("unknown type `{}` for object `{}`", o.ty, o.name)));
        }
        if !seen.insert(o.name.clone()) || scope_objects.contains_key(&o.name) {
            return Err(PddlError::semantic(top_pos, format!("duplicate object `{}`", o.name)));
        }
        scope_objects.insert(o.name.clone(), o.ty.clone());
    }
    let scope = Scope {
        dom,
        vars: HashMap::new(),
        objects: scope_objects,
        ground: true,
    };

    let mut init_atoms = Vec::new();
    let mut init_fluents = BTreeMap::new();
    for fact in init_expr.unwrap_or(&[]) {
        match fact.head() {
            Some("=") => {
                let items = list(fact, "a fluent assignment")?;
                if items.len() != 3 {
                    return Err(PddlError::semantic(fact.pos(), "malformed fluent assignment"));
                }
                let fl = scope.fluent(&items[1]).map_err(|e| match e {
                    PddlError::Semantic { msg, pos } if msg.starts_with("unknown function") => {
                        PddlError::semantic(pos, format!("init assigns undeclared fluent: {msg}"))
                    }
                    other => other,
                })?;
                let v = scope
                    .num_expr(&items[2])?
                    .constant_value()
                    .ok_or_else(|| PddlError::semantic(items[2].pos(), "initial fluent value must be constant"))?;
                init_fluents.insert(ground_atom(fl), v);
            }
            Some("not") => return Err(PddlError::unsupported(fact.pos(), "negative initial literal")),
            Some("at") if list(fact, "a fact")?.len() == 3 && list(fact, "a fact")?[1].as_atom().is_some_and(|s| parse_rational(s).is_some()) => {
                return Err(PddlError::unsupported(fact.pos(), "timed initial literal"));
            }
            _ => {
                let a = ground_atom(scope.atom_schema(fact)?);
                if !init_atoms.contains(&a) {
                    init_atoms.push(a);
                }
            }
        }
    }

    let mut goal = GoalSpec::default();
    if let Some(g) = goal_expr {
        let mut conds = Vec::new();
        scope.conditions(g, &mut conds)?;
        for c in conds {
            match c {
                Condition::Atom(a) => {
                    let a = ground_atom(a);
                    if !goal.atoms.contains(&a) {
                        goal.atoms.push(a);
                    }
                }
                Condition::Compare(op, lhs, rhs) => goal.numeric.push(NumericGoal { op, lhs, rhs }),
                Condition::NotAtom(_) => return Err(PddlError::unsupported(g.pos(), "negative goal literal")),
                Condition::Equal(..) | Condition::NotEqual(..) => {
                    return Err(PddlError::unsupported(g.pos(), "equality in goal"))
                }
            }
        }
    }

    let numeric = dom.uses_numeric_fluents()
        || init_fluents.keys().any(|f: &GroundAtom| f.predicate != TOTAL_COST)
        || !goal.numeric.is_empty();
    Ok(ProblemModel {
        name,
        domain_name,
        objects,
        init_atoms,
        init_fluents,
        goal,
        mode: if numeric { Mode::Numeric } else { Mode::Classical },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = "(define (domain toy)
      (:requirements :strips :typing :negative-preconditions)
      (:types node)
      (:predicates (at ?n - node) (link ?a ?b - node) (done))
      (:action step :parameters (?a ?b - node)
        :precondition (and (at ?a) (link ?a ?b) (not (at ?b)))
        :effect (and (not (at ?a)) (at ?b)))
      (:action finish :parameters (?n - node)
        :precondition (at ?n) :effect (done)))";

    #[test]
    fn parses_schemas_and_types() {
        let d = parse_domain(TOY).unwrap();
        assert_eq!(d.name, "toy");
        assert_eq!(d.predicates.len(), 3);
        assert_eq!(d.schemas.len(), 2);
        let step = d.schema("step").unwrap();
        assert_eq!(step.parameters.len(), 2);
        assert_eq!(step.precondition.len(), 3);
        assert!(matches!(step.precondition[2], Condition::NotAtom(_)));
        assert_eq!(step.effects.add.len(), 1);
        assert_eq!(step.effects.del.len(), 1);
    }

    #[test]
    fn empty_domain() {
        let d = parse_domain("(define (domain d))").unwrap();
        assert!(d.predicates.is_empty() && d.schemas.is_empty());
    }

    #[test]
    fn conditional_effects_rejected() {
        let err = parse_domain("(define (domain d) (:requirements :conditional-effects))").unwrap_err();
        assert!(matches!(err, PddlError::Unsupported { ref construct, .. } if construct == ":conditional-effects"));
        let err = parse_domain(
            "(define (domain d) (:predicates (p) (q))
               (:action a :parameters () :precondition () :effect (when (p) (q))))",
        )
        .unwrap_err();
        assert!(matches!(err, PddlError::Unsupported { ref construct, .. } if construct.contains("conditional")));
    }

    #[test]
    fn disjunction_rejected() {
        let err = parse_domain(
            "(define (domain d) (:predicates (p) (q))
               (:action a :parameters () :precondition (or (p) (q)) :effect (q)))",
        )
        .unwrap_err();
        assert!(matches!(err, PddlError::Unsupported { ref construct, .. } if construct == "or"));
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_domain("(define (domain d)\n  (:predicates (p)").unwrap_err();
        match err {
            PddlError::Syntax(s) => assert_eq!((s.pos.line, s.pos.col), (2, 3)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_symbols_rejected() {
        let err = parse_domain(
            "(define (domain d) (:predicates (p))
               (:action a :parameters (?x) :precondition (r ?x) :effect (p)))",
        )
        .unwrap_err();
        assert!(err.to_string().contains("unknown predicate `r`"));
        let err = parse_domain(
            "(define (domain d) (:predicates (p ?x))
               (:action a :parameters () :precondition (p ?y) :effect ()))",
        )
        .unwrap_err();
        assert!(err.to_string().contains("undeclared variable"));
    }

    #[test]
    fn add_wins_over_delete() {
        let d = parse_domain(
            "(define (domain d) (:predicates (p) (q))
               (:action a :parameters () :precondition (p) :effect (and (not (p)) (p) (q))))",
        )
        .unwrap();
        let a = d.schema("a").unwrap();
        assert!(a.effects.del.is_empty());
        assert_eq!(a.effects.add.len(), 2);
    }

    #[test]
    fn numeric_fragment() {
        let d = parse_domain(
            "(define (domain n) (:requirements :numeric-fluents :typing)
               (:types r)
               (:functions (energy ?x - r) (total-cost) - number)
               (:action go :parameters (?x - r)
                 :precondition (>= (energy ?x) 8)
                 :effect (and (decrease (energy ?x) (* 2 4)) (increase (total-cost) 1))))",
        )
        .unwrap();
        let go = d.schema("go").unwrap();
        assert_eq!(go.effects.numeric.len(), 1);
        assert!(d.uses_numeric_fluents());
        let err = parse_domain(
            "(define (domain n) (:functions (f) (g))
               (:action go :parameters () :precondition () :effect (assign (f) (* (f) (g)))))",
        )
        .unwrap_err();
        assert!(matches!(err, PddlError::Unsupported { .. }));
    }

    #[test]
    fn problem_checks() {
        let d = parse_domain(TOY).unwrap();
        let p = parse_problem(
            "(define (problem p) (:domain toy) (:objects a b - node)
               (:init (at a) (link a b)) (:goal (and (at b))))",
            &d,
        )
        .unwrap();
        assert_eq!(p.mode, Mode::Classical);
        assert_eq!(p.goal.atoms, vec![GroundAtom::new("at", &["b"])]);

        let err = parse_problem(
            "(define (problem p) (:domain toy) (:objects a - node) (:init (at z)) (:goal (at a)))",
            &d,
        )
        .unwrap_err();
        assert!(err.to_string().contains("unknown object `z`"));

        let err = parse_problem(
            "(define (problem p) (:domain toy) (:objects a - node) (:init (= (fuel a) 3)) (:goal (at a)))",
            &d,
        )
        .unwrap_err();
        assert!(err.to_string().contains("undeclared fluent"));
    }

    #[test]
    fn init_satisfying_goal_is_valid() {
        let d = parse_domain(TOY).unwrap();
        let p = parse_problem(
            "(define (problem p) (:domain toy) (:objects a - node) (:init (at a)) (:goal (at a)))",
            &d,
        )
        .unwrap();
        assert!(p.init_atoms.contains(&p.goal.atoms[0]));
    }
}

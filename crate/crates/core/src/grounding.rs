//! Instantiation of action schemas into a finite propositional (plus linear
//! numeric) task, with static-atom compilation and delete-relaxed
//! reachability pruning.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::{self, Write as _};

use num_traits::Zero;

use crate::pddl::{
    Arg, AtomSchema, CmpOp, Condition, DomainModel, GroundAtom, Mode, NumExpr, ProblemModel, UpdateKind,
    TOTAL_COST,
};
use crate::rational::{format_rational, Rational};

pub type AtomId = usize;
pub type ActionId = usize;
pub type FluentId = usize;
/// Truth value per atom index.
pub type AtomSet = Vec<bool>;

pub const DEFAULT_MAX_ACTIONS: usize = 200_000;

#[derive(Debug, thiserror::Error)]
pub enum GroundingError {
    #[error("grounding exceeds the cap of {cap} actions")]
    TooManyActions { cap: usize },
    #[error("problem `{problem}` does not belong to domain `{domain}`")]
    DomainMismatch { problem: String, domain: String },
    #[error("action `{action}` updates fluent `{fluent}` more than once")]
    ConflictingUpdates { action: String, fluent: String },
    #[error("non-linear numeric expression in `{0}`")]
    NonLinear(String),
}

/// `constant + Σ coeff·fluent`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct LinExpr {
    pub constant: Rational,
    pub terms: Vec<(FluentId, Rational)>,
}

impl LinExpr {
    pub fn constant(c: Rational) -> Self {
        LinExpr {
            constant: c,
            terms: Vec::new(),
        }
    }

    pub fn fluent(f: FluentId) -> Self {
        LinExpr {
            constant: Rational::zero(),
            terms: vec![(f, Rational::from_integer(1))],
        }
    }

    fn normalise(mut self) -> Self {
        let mut m: BTreeMap<FluentId, Rational> = BTreeMap::new();
        for (f, c) in self.terms.drain(..) {
            *m.entry(f).or_insert_with(Rational::zero) += c;
        }
        self.terms = m.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        self
    }

    pub fn add(mut self, other: LinExpr) -> Self {
        self.constant += other.constant;
        self.terms.extend(other.terms);
        self.normalise()
    }

    pub fn scale(mut self, k: Rational) -> Self {
        self.constant *= k;
        for (_, c) in &mut self.terms {
            *c *= k;
        }
        self.normalise()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, fluents: &[Rational]) -> Rational {
        self.terms
            .iter()
            .fold(self.constant, |acc, (f, c)| acc + *c * fluents[*f])
    }
}

/// `expr op 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NumCondition {
    pub expr: LinExpr,
    pub op: CmpOp,
}

impl NumCondition {
    pub fn holds(&self, fluents: &[Rational]) -> bool {
        self.op.holds(self.expr.eval(fluents), Rational::zero())
    }
}

/// Post-state value of `fluent`, written over the pre-state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NumEffect {
    pub fluent: FluentId,
    pub value: LinExpr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundAction {
    pub id: ActionId,
    pub schema: String,
    pub args: Vec<String>,
    pub pre_pos: Vec<AtomId>,
    pub pre_neg: Vec<AtomId>,
    pub add: Vec<AtomId>,
    pub del: Vec<AtomId>,
    pub num_pre: Vec<NumCondition>,
    pub num_eff: Vec<NumEffect>,
}

impl GroundAction {
    /// `(schema arg1 arg2 ...)`.
    pub fn name(&self) -> String {
        let mut s = format!("({}", self.schema);
        for a in &self.args {
            s.push(' ');
            s.push_str(a);
        }
        s.push(')');
        s
    }

    /// Whether `object` is among the action's bound objects.
    pub fn uses_object(&self, object: &str) -> bool {
        self.args.iter().any(|a| a == object)
    }
}

/// A state of a ground task.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct State {
    pub atoms: AtomSet,
    pub fluents: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTask {
    pub atoms: Vec<GroundAtom>,
    pub actions: Vec<GroundAction>,
    pub fluents: Vec<GroundAtom>,
    pub fluent_init: Vec<Rational>,
    pub init: AtomSet,
    pub goal: Vec<AtomId>,
    pub goal_numeric: Vec<NumCondition>,
    pub mode: Mode,
    /// All problem objects and domain constants, sorted.
    pub objects: Vec<String>,
}

impl GroundTask {
    pub fn initial_state(&self) -> State {
        State {
            atoms: self.init.clone(),
            fluents: self.fluent_init.clone(),
        }
    }

    pub fn applicable(&self, s: &State, a: ActionId) -> bool {
        let act = &self.actions[a];
        act.pre_pos.iter().all(|&p| s.atoms[p])
            && act.pre_neg.iter().all(|&p| !s.atoms[p])
            && act.num_pre.iter().all(|c| c.holds(&s.fluents))
    }

    /// Successor state; delete effects apply before add effects and numeric
    /// updates read the pre-state.
    pub fn apply(&self, s: &State, a: ActionId) -> State {
        let act = &self.actions[a];
        let mut next = s.clone();
        for &d in &act.del {
            next.atoms[d] = false;
        }
        for &p in &act.add {
            next.atoms[p] = true;
        }
        for e in &act.num_eff {
            next.fluents[e.fluent] = e.value.eval(&s.fluents);
        }
        next
    }

    /// Hard-goal test; over-subscription tasks have none.
    pub fn goal_satisfied(&self, s: &State) -> bool {
        if self.mode == Mode::Osp {
            return true;
        }
        self.goal.iter().all(|&g| s.atoms[g]) && self.goal_numeric.iter().all(|c| c.holds(&s.fluents))
    }

    /// States visited by applying `plan` from the initial state, or the
    /// position of the first inapplicable action.
    pub fn simulate(&self, plan: &[ActionId]) -> Result<Vec<State>, usize> {
        let mut states = vec![self.initial_state()];
        for (i, &a) in plan.iter().enumerate() {
            let s = states.last().expect("non-empty");
            if a >= self.actions.len() || !self.applicable(s, a) {
                return Err(i);
            }
            let next = self.apply(s, a);
            states.push(next);
        }
        Ok(states)
    }

    pub fn atom_id(&self, atom: &GroundAtom) -> Option<AtomId> {
        self.atoms.iter().position(|a| a == atom)
    }

    /// Resolve a fluent by `(f a b)`, `f a b` or `f_a_b` spelling.
    pub fn fluent_id(&self, name: &str) -> Option<FluentId> {
        let loose = GroundAtom::parse_loose(name);
        self.fluents
            .iter()
            .position(|f| Some(f) == loose.as_ref() || f.underscore_name() == name.to_ascii_lowercase())
    }

    pub fn action_by_name(&self, name: &str) -> Option<ActionId> {
        let target = GroundAtom::parse_loose(name)?;
        self.actions
            .iter()
            .position(|a| a.schema == target.predicate && a.args == target.args)
    }

    /// Line-oriented dump, one atom, fluent or action per line.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (i, a) in self.atoms.iter().enumerate() {
            let _ = writeln!(s, "atom {i} {a}");
        }
        for (i, f) in self.fluents.iter().enumerate() {
            let _ = writeln!(s, "fluent {i} {f} = {}", format_rational(&self.fluent_init[i]));
        }
        let ids = |v: &[AtomId]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        for a in &self.actions {
            let _ = writeln!(
                s,
                "action {} {} pre+ [{}] pre- [{}] add [{}] del [{}] num-pre {} num-eff {}",
                a.id,
                a.name(),
                ids(&a.pre_pos),
                ids(&a.pre_neg),
                ids(&a.add),
                ids(&a.del),
                a.num_pre.len(),
                a.num_eff.len()
            );
        }
        let init: Vec<AtomId> = (0..self.atoms.len()).filter(|&i| self.init[i]).collect();
        let _ = writeln!(s, "init [{}]", ids(&init));
        let _ = writeln!(s, "goal [{}] numeric {}", ids(&self.goal), self.goal_numeric.len());
        let _ = writeln!(s, "mode {:?}", self.mode);
        s
    }
}

impl fmt::Display for GroundTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GroundingOptions {
    pub max_actions: usize,
    pub prune_unreachable: bool,
}

impl Default for GroundingOptions {
    fn default() -> Self {
        GroundingOptions {
            max_actions: DEFAULT_MAX_ACTIONS,
            prune_unreachable: true,
        }
    }
}

/// Ground with default options (reachability pruning on).
pub fn ground(dom: &DomainModel, prob: &ProblemModel) -> Result<GroundTask, GroundingError> {
    ground_with(dom, prob, GroundingOptions::default())
}

struct RawAction {
    schema: String,
    args: Vec<String>,
    pre_pos: Vec<GroundAtom>,
    pre_neg: Vec<GroundAtom>,
    add: Vec<GroundAtom>,
    del: Vec<GroundAtom>,
    num_pre: Vec<NumCondition>,
    num_eff: Vec<NumEffect>,
}

struct Grounder<'a> {
    dom: &'a DomainModel,
    object_types: HashMap<&'a str, &'a str>,
    fluent_preds: HashSet<&'a str>,
    static_facts: HashSet<GroundAtom>,
    fluent_index: HashMap<GroundAtom, FluentId>,
}

impl Grounder<'_> {
    fn objects_of(&self, ty: &str) -> Vec<String> {
        let mut v: Vec<String> = self
            .object_types
            .iter()
            .filter(|(_, t)| self.dom.types.is_subtype(t, ty))
            .map(|(o, _)| o.to_string())
            .collect();
        v.sort();
        v
    }

    fn bind(args: &[Arg], binding: &HashMap<&str, &str>) -> Option<Vec<String>> {
        args.iter()
            .map(|a| match a {
                Arg::Const(c) => Some(c.clone()),
                Arg::Var(v) => binding.get(v.as_str()).map(|s| s.to_string()),
            })
            .collect()
    }

    fn ground_atom(a: &AtomSchema, binding: &HashMap<&str, &str>) -> Option<GroundAtom> {
        Some(GroundAtom {
            predicate: a.predicate.clone(),
            args: Self::bind(&a.args, binding)?,
        })
    }

    /// Static or equality condition decidable under a partial binding:
    /// `Some(true|false)` when decided, `None` when not static or not yet
    /// fully bound.
    fn static_check(&self, c: &Condition, binding: &HashMap<&str, &str>) -> Option<bool> {
        match c {
            Condition::Atom(a) if !self.fluent_preds.contains(a.predicate.as_str()) => {
                Some(self.static_facts.contains(&Self::ground_atom(a, binding)?))
            }
            Condition::NotAtom(a) if !self.fluent_preds.contains(a.predicate.as_str()) => {
                Some(!self.static_facts.contains(&Self::ground_atom(a, binding)?))
            }
            Condition::Equal(x, y) => {
                let v = Self::bind(&[x.clone(), y.clone()], binding)?;
                Some(v[0] == v[1])
            }
            Condition::NotEqual(x, y) => {
                let v = Self::bind(&[x.clone(), y.clone()], binding)?;
                Some(v[0] != v[1])
            }
            _ => None,
        }
    }

    fn lin(&self, e: &NumExpr, binding: &HashMap<&str, &str>, ctx: &str) -> Result<Option<LinExpr>, GroundingError> {
        Ok(Some(match e {
            NumExpr::Const(c) => LinExpr::constant(*c),
            NumExpr::Fluent(a) => {
                let g = Self::ground_atom(a, binding).expect("fully bound");
                match self.fluent_index.get(&g) {
                    Some(&f) => LinExpr::fluent(f),
                    // Undefined fluent: the action can never apply.
                    None => return Ok(None),
                }
            }
            NumExpr::Neg(a) => match self.lin(a, binding, ctx)? {
                Some(x) => x.scale(Rational::from_integer(-1)),
                None => return Ok(None),
            },
            NumExpr::Add(a, b) | NumExpr::Sub(a, b) => {
                let (Some(x), Some(y)) = (self.lin(a, binding, ctx)?, self.lin(b, binding, ctx)?) else {
                    return Ok(None);
                };
                if matches!(e, NumExpr::Add(..)) {
                    x.add(y)
                } else {
                    x.add(y.scale(Rational::from_integer(-1)))
                }
            }
            NumExpr::Mul(a, b) => {
                let (Some(x), Some(y)) = (self.lin(a, binding, ctx)?, self.lin(b, binding, ctx)?) else {
                    return Ok(None);
                };
                if x.is_constant() {
                    y.scale(x.constant)
                } else if y.is_constant() {
                    x.scale(y.constant)
                } else {
                    return Err(GroundingError::NonLinear(ctx.to_string()));
                }
            }
            NumExpr::Div(a, b) => {
                let (Some(x), Some(y)) = (self.lin(a, binding, ctx)?, self.lin(b, binding, ctx)?) else {
                    return Ok(None);
                };
                if !y.is_constant() || y.constant.is_zero() {
                    return Err(GroundingError::NonLinear(ctx.to_string()));
                }
                x.scale(Rational::from_integer(1) / y.constant)
            }
        }))
    }

    fn instantiate(
        &self,
        schema: &crate::pddl::ActionSchema,
        binding: &HashMap<&str, &str>,
    ) -> Result<Option<RawAction>, GroundingError> {
        let args: Vec<String> = schema
            .parameters
            .iter()
            .map(|p| binding[p.name.as_str()].to_string())
            .collect();
        let ctx = format!("({} {})", schema.name, args.join(" "));
        let mut raw = RawAction {
            schema: schema.name.clone(),
            args,
            pre_pos: Vec::new(),
            pre_neg: Vec::new(),
            add: Vec::new(),
            del: Vec::new(),
            num_pre: Vec::new(),
            num_eff: Vec::new(),
        };
        for c in &schema.precondition {
            if let Some(ok) = self.static_check(c, binding) {
                if !ok {
                    return Ok(None);
                }
                continue;
            }
            match c {
                Condition::Atom(a) => raw.pre_pos.push(Self::ground_atom(a, binding).expect("bound")),
                Condition::NotAtom(a) => raw.pre_neg.push(Self::ground_atom(a, binding).expect("bound")),
                Condition::Compare(op, l, r) => {
                    let (Some(l), Some(r)) = (self.lin(l, binding, &ctx)?, self.lin(r, binding, &ctx)?) else {
                        return Ok(None);
                    };
                    let expr = l.add(r.scale(Rational::from_integer(-1)));
                    if expr.is_constant() {
                        if !op.holds(expr.constant, Rational::zero()) {
                            return Ok(None);
                        }
                    } else {
                        raw.num_pre.push(NumCondition { expr, op: *op });
                    }
                }
                Condition::Equal(..) | Condition::NotEqual(..) => unreachable!("decided statically"),
            }
        }
        if raw.pre_pos.iter().any(|p| raw.pre_neg.contains(p)) {
            return Ok(None);
        }
        for a in &schema.effects.add {
            raw.add.push(Self::ground_atom(a, binding).expect("bound"));
        }
        for d in &schema.effects.del {
            let g = Self::ground_atom(d, binding).expect("bound");
            if !raw.add.contains(&g) {
                raw.del.push(g);
            }
        }
        raw.add.sort();
        raw.add.dedup();
        raw.del.sort();
        raw.del.dedup();
        for u in &schema.effects.numeric {
            let target = Self::ground_atom(&u.fluent, binding).expect("bound");
            let Some(&f) = self.fluent_index.get(&target) else {
                return Ok(None);
            };
            let Some(rhs) = self.lin(&u.expr, binding, &ctx)? else {
                return Ok(None);
            };
            let value = match u.kind {
                UpdateKind::Assign => rhs,
                UpdateKind::Increase => LinExpr::fluent(f).add(rhs),
                UpdateKind::Decrease => LinExpr::fluent(f).add(rhs.scale(Rational::from_integer(-1))),
            };
            if raw.num_eff.iter().any(|e| e.fluent == f) {
                return Err(GroundingError::ConflictingUpdates {
                    action: ctx,
                    fluent: target.to_string(),
                });
            }
            raw.num_eff.push(NumEffect { fluent: f, value });
        }
        Ok(Some(raw))
    }
}

/// Ground `prob` against `dom`. Instantiations are ordered by schema name,
/// then by bound objects (lexicographic).
pub fn ground_with(
    dom: &DomainModel,
    prob: &ProblemModel,
    opts: GroundingOptions,
) -> Result<GroundTask, GroundingError> {
    if prob.domain_name != dom.name {
        return Err(GroundingError::DomainMismatch {
            problem: prob.name.clone(),
            domain: dom.name.clone(),
        });
    }
    let mut object_types: HashMap<&str, &str> = HashMap::new();
    for o in dom.constants.iter().chain(prob.objects.iter()) {
        object_types.insert(&o.name, &o.ty);
    }
    let mut fluent_preds = HashSet::new();
    for s in &dom.schemas {
        for a in s.effects.add.iter().chain(s.effects.del.iter()) {
            fluent_preds.insert(a.predicate.as_str());
        }
    }
    let static_facts: HashSet<GroundAtom> = prob
        .init_atoms
        .iter()
        .filter(|a| !fluent_preds.contains(a.predicate.as_str()))
        .cloned()
        .collect();
    let fluents: Vec<GroundAtom> = prob
        .init_fluents
        .keys()
        .filter(|f| f.predicate != TOTAL_COST)
        .cloned()
        .collect();
    let fluent_init: Vec<Rational> = fluents.iter().map(|f| prob.init_fluents[f]).collect();
    let fluent_index: HashMap<GroundAtom, FluentId> =
        fluents.iter().enumerate().map(|(i, f)| (f.clone(), i)).collect();

    let g = Grounder {
        dom,
        object_types,
        fluent_preds,
        static_facts,
        fluent_index,
    };

    let mut schemas: Vec<&crate::pddl::ActionSchema> = dom.schemas.iter().collect();
    schemas.sort_by(|a, b| a.name.cmp(&b.name));
    let mut raws: Vec<RawAction> = Vec::new();
    for schema in schemas {
        let domains: Vec<Vec<String>> = schema.parameters.iter().map(|p| g.objects_of(&p.ty)).collect();
        let mut binding: HashMap<&str, &str> = HashMap::new();
        enumerate(&g, schema, &domains, 0, &mut binding, &mut raws, opts.max_actions)?;
    }

    // Goal conditions.
    let mut goal_atoms = prob.goal.atoms.clone();
    goal_atoms.dedup();
    let empty = HashMap::new();
    let mut goal_numeric = Vec::new();
    let mut goal_false = false;
    for ng in &prob.goal.numeric {
        let (Some(l), Some(r)) = (g.lin(&ng.lhs, &empty, "goal")?, g.lin(&ng.rhs, &empty, "goal")?) else {
            goal_false = true;
            continue;
        };
        let expr = l.add(r.scale(Rational::from_integer(-1)));
        if expr.is_constant() {
            goal_false |= !ng.op.holds(expr.constant, Rational::zero());
        } else {
            goal_numeric.push(NumCondition { expr, op: ng.op });
        }
    }
    if goal_false {
        // An unsatisfiable constant numeric goal: keep it as `0 > 0`.
        goal_numeric.push(NumCondition {
            expr: LinExpr::constant(Rational::zero()),
            op: CmpOp::Gt,
        });
    }

    // Atom table: everything mentioned by an action, plus goal atoms.
    let mut table: BTreeSet<GroundAtom> = goal_atoms.iter().cloned().collect();
    for r in &raws {
        table.extend(r.pre_pos.iter().cloned());
        table.extend(r.pre_neg.iter().cloned());
        table.extend(r.add.iter().cloned());
        table.extend(r.del.iter().cloned());
    }
    let atoms: Vec<GroundAtom> = table.into_iter().collect();
    let index: HashMap<&GroundAtom, AtomId> = atoms.iter().enumerate().map(|(i, a)| (a, i)).collect();
    let init_set: HashSet<&GroundAtom> = prob.init_atoms.iter().collect();
    let init: AtomSet = atoms.iter().map(|a| init_set.contains(a)).collect();
    let ids = |v: &[GroundAtom]| v.iter().map(|a| index[a]).collect::<Vec<_>>();
    let actions: Vec<GroundAction> = raws
        .iter()
        .enumerate()
        .map(|(id, r)| GroundAction {
            id,
            schema: r.schema.clone(),
            args: r.args.clone(),
            pre_pos: ids(&r.pre_pos),
            pre_neg: ids(&r.pre_neg),
            add: ids(&r.add),
            del: ids(&r.del),
            num_pre: r.num_pre.clone(),
            num_eff: r.num_eff.clone(),
        })
        .collect();
    let mut objects: Vec<String> = g.object_types.keys().map(|s| s.to_string()).collect();
    objects.sort();
    let task = GroundTask {
        goal: ids(&goal_atoms),
        atoms,
        actions,
        fluents,
        fluent_init,
        init,
        goal_numeric,
        mode: prob.mode,
        objects,
    };
    Ok(if opts.prune_unreachable {
        prune_unreachable(&task)
    } else {
        task
    })
}

fn enumerate<'s>(
    g: &Grounder<'_>,
    schema: &'s crate::pddl::ActionSchema,
    domains: &'s [Vec<String>],
    depth: usize,
    binding: &mut HashMap<&'s str, &'s str>,
    out: &mut Vec<RawAction>,
    cap: usize,
) -> Result<(), GroundingError> {
    // Prune as soon as a static condition is decided.
    for c in &schema.precondition {
        if g.static_check(c, binding) == Some(false) {
            return Ok(());
        }
    }
    if depth == schema.parameters.len() {
        if let Some(raw) = g.instantiate(schema, binding)? {
            if out.len() >= cap {
                return Err(GroundingError::TooManyActions { cap });
            }
            out.push(raw);
        }
        return Ok(());
    }
    let var = schema.parameters[depth].name.as_str();
    for obj in &domains[depth] {
        binding.insert(var, obj.as_str());
        enumerate(g, schema, domains, depth + 1, binding, out, cap)?;
    }
    binding.remove(var);
    Ok(())
}

/// Delete-relaxed reachability: a superset of the atoms true in any
/// reachable state. Negative and numeric preconditions are treated as
/// satisfiable.
pub fn reachable_atoms(task: &GroundTask) -> AtomSet {
    let mut reached = task.init.clone();
    let mut fired = vec![false; task.actions.len()];
    loop {
        let mut changed = false;
        for (i, a) in task.actions.iter().enumerate() {
            if fired[i] || !a.pre_pos.iter().all(|&p| reached[p]) {
                continue;
            }
            fired[i] = true;
            for &p in &a.add {
                if !reached[p] {
                    reached[p] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            return reached;
        }
    }
}

/// Drop actions with unreachable preconditions and atoms that are neither
/// reachable nor goals, then reindex.
pub fn prune_unreachable(task: &GroundTask) -> GroundTask {
    let reached = reachable_atoms(task);
    let mut keep_atom = reached.clone();
    for &g in &task.goal {
        keep_atom[g] = true;
    }
    let mut remap = vec![usize::MAX; task.atoms.len()];
    let mut atoms = Vec::new();
    let mut init = Vec::new();
    for (i, a) in task.atoms.iter().enumerate() {
        if keep_atom[i] {
            remap[i] = atoms.len();
            atoms.push(a.clone());
            init.push(task.init[i]);
        }
    }
    let mut actions = Vec::new();
    for a in &task.actions {
        if !a.pre_pos.iter().all(|&p| reached[p]) {
            continue;
        }
        let keep = |v: &[AtomId]| -> Vec<AtomId> {
            v.iter().filter(|&&p| keep_atom[p]).map(|&p| remap[p]).collect()
        };
        actions.push(GroundAction {
            id: actions.len(),
            schema: a.schema.clone(),
            args: a.args.clone(),
            pre_pos: a.pre_pos.iter().map(|&p| remap[p]).collect(),
            // An unreachable atom is always false, so `not p` always holds.
            pre_neg: keep(&a.pre_neg),
            add: a.add.iter().map(|&p| remap[p]).collect(),
            del: keep(&a.del),
            num_pre: a.num_pre.clone(),
            num_eff: a.num_eff.clone(),
        });
    }
    GroundTask {
        atoms,
        actions,
        fluents: task.fluents.clone(),
        fluent_init: task.fluent_init.clone(),
        init,
        goal: task.goal.iter().map(|&g| remap[g]).collect(),
        goal_numeric: task.goal_numeric.clone(),
        mode: task.mode,
        objects: task.objects.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::{parse_domain, parse_problem};

    pub(crate) const CHAIN_DOMAIN: &str = "(define (domain chain)
      (:requirements :strips :typing)
      (:types node)
      (:predicates (at ?n - node) (link ?a ?b - node) (exit ?n - node) (done))
      (:action move :parameters (?a ?b - node)
        :precondition (and (at ?a) (link ?a ?b))
        :effect (and (not (at ?a)) (at ?b)))
      (:action finish :parameters (?n - node)
        :precondition (and (at ?n) (exit ?n)) :effect (done)))";

    const CHAIN_PROBLEM: &str = "(define (problem p) (:domain chain)
      (:objects a b - node)
      (:init (at a) (link a b) (exit b))
      (:goal (done)))";

    fn chain() -> GroundTask {
        let d = parse_domain(CHAIN_DOMAIN).unwrap();
        let p = parse_problem(CHAIN_PROBLEM, &d).unwrap();
        ground(&d, &p).unwrap()
    }

    #[test]
    fn chain_has_two_actions() {
        let t = chain();
        let names: Vec<String> = t.actions.iter().map(|a| a.name()).collect();
        assert_eq!(names, vec!["(finish b)", "(move a b)"]);
        // Static link/exit atoms compiled away.
        assert!(t.atoms.iter().all(|a| a.predicate != "link" && a.predicate != "exit"));
    }

    #[test]
    fn chain_reachability_fixpoint() {
        let t = chain();
        let r = reachable_atoms(&t);
        let reached: Vec<String> = (0..t.atoms.len()).filter(|&i| r[i]).map(|i| t.atoms[i].to_string()).collect();
        assert_eq!(reached, vec!["(at a)", "(at b)", "(done)"]);
    }

    #[test]
    fn unreachable_atom_excluded_and_action_dropped() {
        let d = parse_domain(CHAIN_DOMAIN).unwrap();
        // No link from a: (at b) and (done) unreachable, move/finish dropped.
        let p = parse_problem(
            "(define (problem p) (:domain chain) (:objects a b - node) (:init (at a) (exit b)) (:goal (done)))",
            &d,
        )
        .unwrap();
        let full = ground_with(&d, &p, GroundingOptions { prune_unreachable: false, ..Default::default() }).unwrap();
        let t = prune_unreachable(&full);
        assert!(t.actions.is_empty());
        // Goal atom kept (unsatisfiable) so encodings can still refer to it.
        assert_eq!(t.atoms.iter().map(|a| a.to_string()).collect::<Vec<_>>(), vec!["(done)"]);
        assert!(!reachable_atoms(&t)[0]);
    }

    #[test]
    fn zero_objects_zero_actions() {
        let d = parse_domain(CHAIN_DOMAIN).unwrap();
        let p = parse_problem("(define (problem p) (:domain chain) (:objects) (:init (done)) (:goal (done)))", &d)
            .unwrap();
        let t = ground(&d, &p).unwrap();
        assert!(t.actions.is_empty());
        assert!(t.goal_satisfied(&t.initial_state()));
        assert!(reachable_atoms(&t).iter().zip(&t.init).all(|(r, i)| *r || !*i));
    }

    #[test]
    fn action_cap_is_enforced() {
        let d = parse_domain(CHAIN_DOMAIN).unwrap();
        let p = parse_problem(CHAIN_PROBLEM, &d).unwrap();
        let err = ground_with(&d, &p, GroundingOptions { max_actions: 1, prune_unreachable: true }).unwrap_err();
        assert!(matches!(err, GroundingError::TooManyActions { cap: 1 }));
    }

    #[test]
    fn deterministic_indices() {
        assert_eq!(chain(), chain());
    }

    #[test]
    fn numeric_grounding_and_simulation() {
        let d = parse_domain(
            "(define (domain n) (:requirements :typing :numeric-fluents)
               (:types r)
               (:predicates (idle ?x - r))
               (:functions (energy ?x - r))
               (:action charge :parameters (?x - r)
                 :precondition (and (idle ?x) (<= (energy ?x) 10))
                 :effect (increase (energy ?x) 5)))",
        )
        .unwrap();
        let p = parse_problem(
            "(define (problem p) (:domain n) (:objects r0 r1 - r)
               (:init (idle r0) (idle r1) (= (energy r0) 0))
               (:goal (and (>= (energy r0) 5))))",
            &d,
        )
        .unwrap();
        let t = ground(&d, &p).unwrap();
        // r1 has no defined energy, so it cannot charge.
        assert_eq!(t.actions.len(), 1);
        assert_eq!(t.fluent_id("energy_r0"), Some(0));
        assert_eq!(t.fluent_id("(energy r0)"), Some(0));
        let s0 = t.initial_state();
        assert!(!t.goal_satisfied(&s0));
        assert!(t.applicable(&s0, 0));
        let s1 = t.apply(&s0, 0);
        assert_eq!(s1.fluents[0], Rational::from_integer(5));
        assert!(t.goal_satisfied(&s1));
        assert!(t.dump().contains("fluent 0 (energy r0) = 0"));
    }
}

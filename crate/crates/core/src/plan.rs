//! Grounding theories against an example and deriving canonical plans.
//!
//! A plan is the newline-separated list of primitive actions obtained by
//! expanding every composite fact through the domain's expansion rules and
//! turning every connector fact into its action. Without time indices the
//! actions are sorted, so a plan is a pure function of the fact set.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::domain::{Domain, ExpansionRule};
use crate::error::{Error, Result};
use crate::logic::builtin::BuiltinRegistry;
use crate::logic::cover::{head_binding, Matcher, DEFAULT_NODE_BUDGET};
use crate::logic::parse::GroundExample;
use crate::logic::term::{Clause, Literal, Substitution, Term, Theory};

/// Largest number of actions one loop may produce.
const MAX_LOOP: i64 = 100_000;
const MAX_EXPANSION_DEPTH: usize = 64;

/// Serialized plan: one action per line, LF terminated.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PlanString(String);

impl PlanString {
    pub fn from_actions<'a>(actions: impl IntoIterator<Item = &'a Literal>) -> Self {
        let mut s = String::new();
        for a in actions {
            s.push_str(&a.pred);
            s.push('(');
            for (i, t) in a.args.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                s.push_str(&t.bare());
            }
            s.push_str(")\n");
        }
        PlanString(s)
    }

    pub fn as_bytes(&self) -> &[u8] {
        self.0.as_bytes()
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn actions(&self) -> usize {
        self.0.lines().count()
    }
}

impl From<String> for PlanString {
    fn from(s: String) -> Self {
        PlanString(s)
    }
}

impl fmt::Display for PlanString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Result of a decomposability check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub decomposable: bool,
    /// Signatures (`Pred/arity`) of body literals the domain cannot plan for.
    pub offending: Vec<String>,
}

/// True when every body literal is a composite with an expansion rule, a
/// connector, an attribute (including sizes read by rules and concept
/// parameters) or a built-in.
pub fn check_decomposable(t: &Theory, domain: &Domain, registry: &BuiltinRegistry) -> Decomposition {
    let conds = domain.condition_preds();
    let mut offending = BTreeSet::new();
    for c in &t.clauses {
        for l in &c.body {
            let known = registry.is_builtin(l)
                || domain.rule_for(&l.pred).is_some()
                || domain.actions.contains_key(&l.pred)
                || domain.attributes.contains(&l.pred)
                || conds.contains(l.pred.as_str())
                || domain.param_name(&l.pred).is_some();
            if !known {
                offending.insert(l.signature());
            }
        }
    }
    Decomposition { decomposable: offending.is_empty(), offending: offending.into_iter().collect() }
}

/// Positions `(pred, index)` holding integers somewhere in `facts`.
pub(crate) fn numeric_positions(facts: &BTreeSet<Literal>) -> BTreeSet<(String, usize)> {
    let mut out = BTreeSet::new();
    for f in facts {
        for (i, a) in f.args.iter().enumerate() {
            if matches!(a, Term::Int(_)) {
                out.insert((f.pred.clone(), i));
            }
        }
    }
    out
}

/// Is `l` a parameter literal `P(H, V)` whose first argument is a head variable?
pub(crate) fn is_param_literal(l: &Literal, head_vars: &BTreeSet<String>, domain: &Domain) -> bool {
    domain.param_name(&l.pred).is_some() && l.arity() == 2 && l.args[0].as_var().is_some_and(|v| head_vars.contains(v))
}

pub(crate) fn propagate(builtins: &[&Literal], s: &mut Substitution, registry: &BuiltinRegistry) -> Result<()> {
    loop {
        let mut progress = false;
        for b in builtins {
            let grounded = s.apply_literal(b);
            let unknown: BTreeSet<&str> = grounded.vars().collect();
            match unknown.len() {
                0 => {
                    if !registry.eval(&grounded)? {
                        return Err(Error::Grounding(format!("constraint {grounded} is unsatisfiable")));
                    }
                }
                1 => {
                    let var = *unknown.iter().next().expect("one unknown");
                    let slots: Vec<usize> =
                        (0..grounded.arity()).filter(|&i| grounded.args[i].as_var() == Some(var)).collect();
                    if slots.len() != 1 {
                        continue;
                    }
                    let Some(def) = registry.get(&b.pred) else { continue };
                    let vals: Vec<Option<i64>> = grounded.args.iter().map(Term::as_int).collect();
                    if let Some(v) = def.solve(slots[0], &vals) {
                        s.bind(var.to_string(), Term::Int(v));
                        progress = true;
                    }
                }
                _ => {}
            }
        }
        if !progress {
            return Ok(());
        }
    }
}

/// Grounds one clause against `x`: head variables from the example head,
/// parameter literals from `x.params`, object variables by matching the
/// clause's structure into `x.facts`, integer variables by propagating the
/// built-ins. Integers nothing determines take the domain's `default-int`.
pub fn ground_clause(
    c: &Clause,
    x: &GroundExample,
    domain: &Domain,
    registry: &BuiltinRegistry,
) -> Result<BTreeSet<Literal>> {
    let mut s =
        head_binding(c, x).ok_or_else(|| Error::Grounding(format!("head {} does not match {}", c.head, x.head)))?;
    let head_vars = c.head_vars();
    let (builtins, ordinary): (Vec<&Literal>, Vec<&Literal>) = c.body.iter().partition(|l| registry.is_builtin(l));

    for l in &ordinary {
        if !is_param_literal(l, &head_vars, domain) {
            continue;
        }
        let name = domain.param_name(&l.pred).expect("param literal");
        let Some(&value) = x.params.get(name) else { continue };
        match &l.args[1] {
            Term::Var(v) => {
                if !s.bind(v.clone(), Term::Int(value)) {
                    return Err(Error::Grounding(format!("parameter {name} conflicts in {l}")));
                }
            }
            Term::Int(n) if *n != value => {
                return Err(Error::Grounding(format!("parameter {name}={value} contradicts {l}")));
            }
            _ => {}
        }
    }

    // structural skeleton: integer slots become wildcards
    let numeric = numeric_positions(&x.facts);
    let mut numeric_vars: BTreeSet<String> = BTreeSet::new();
    let mut wildcard = 0usize;
    let skeleton: Vec<Literal> = ordinary
        .iter()
        .filter(|l| !is_param_literal(l, &head_vars, domain))
        .map(|l| {
            let args = l
                .args
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    if numeric.contains(&(l.pred.clone(), i)) || matches!(a, Term::Int(_)) {
                        if let Term::Var(v) = a {
                            numeric_vars.insert(v.clone());
                        }
                        wildcard += 1;
                        Term::Var(format!("_w{wildcard}"))
                    } else {
                        s.apply_term(a)
                    }
                })
                .collect();
            Literal::new(l.pred.clone(), args)
        })
        .collect();
    for l in &ordinary {
        if is_param_literal(l, &head_vars, domain) {
            if let Term::Var(v) = &l.args[1] {
                numeric_vars.insert(v.clone());
            }
        }
    }
    for b in &builtins {
        numeric_vars.extend(b.vars().map(str::to_string));
    }
    let refs: Vec<&Literal> = skeleton.iter().collect();
    let mut m = Matcher::new(&x.facts, registry, DEFAULT_NODE_BUDGET);
    if let Ok(Some(found)) = m.find(&refs, &[], Substitution::new()) {
        for (v, t) in found.iter() {
            if !v.starts_with("_w") {
                s.bind(v.clone(), t.clone());
            }
        }
    }
    for v in c.vars() {
        if s.get(&v).is_none() && !numeric_vars.contains(&v) {
            s.bind(v.clone(), Term::Str(v.to_lowercase()));
        }
    }

    propagate(&builtins, &mut s, registry)?;
    for v in c.vars() {
        if s.get(&v).is_some() {
            continue;
        }
        let d =
            domain.default_int.ok_or_else(|| Error::Grounding(format!("variable {v} is unbound after propagation")))?;
        s.bind(v.clone(), Term::Int(d));
        propagate(&builtins, &mut s, registry)?;
    }
    Ok(c.body.iter().map(|l| s.apply_literal(l)).collect())
}

/// Grounds a theory: the first clause that covers-style grounds is used,
/// preferring clauses that ground without error.
pub fn ground_theory(
    t: &Theory,
    x: &GroundExample,
    domain: &Domain,
    registry: &BuiltinRegistry,
) -> Result<BTreeSet<Literal>> {
    let mut first_err = None;
    for c in &t.clauses {
        match ground_clause(c, x, domain, registry) {
            Ok(g) => return Ok(g),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    Err(first_err.unwrap_or_else(|| Error::Grounding("empty theory".into())))
}

fn bind_pattern(pattern: &Literal, fact: &Literal) -> Option<Substitution> {
    if pattern.pred != fact.pred || pattern.arity() != fact.arity() {
        return None;
    }
    let mut s = Substitution::new();
    for (p, t) in pattern.args.iter().zip(&fact.args) {
        match p {
            Term::Var(v) => {
                if !s.bind(v.clone(), t.clone()) {
                    return None;
                }
            }
            _ if p == t => {}
            _ => return None,
        }
    }
    Some(s)
}

fn expand(
    fact: &Literal,
    rule: &ExpansionRule,
    context: &BTreeSet<Literal>,
    domain: &Domain,
    depth: usize,
    out: &mut Vec<Literal>,
) -> Result<()> {
    if depth > MAX_EXPANSION_DEPTH {
        return Err(Error::Plan(format!("expansion of {fact} does not terminate")));
    }
    let init = bind_pattern(&rule.trigger, fact)
        .ok_or_else(|| Error::Plan(format!("{fact} does not match {}", rule.trigger)))?;
    let conds: Vec<&Literal> = rule.conditions.iter().collect();
    let mut envs = Vec::new();
    // all matches of the conditions, in deterministic order
    collect_matches(&conds, context, init, &mut envs)?;
    if envs.is_empty() {
        let wanted: Vec<String> = rule.conditions.iter().map(|c| c.to_string()).collect();
        return Err(Error::Plan(format!("cannot expand {fact}: no facts for {}", wanted.join(", "))));
    }
    for env in envs {
        let mut env: BTreeMap<String, Term> = env.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        let mut produced = Vec::new();
        for item in &rule.items {
            let (lo, hi, var) = match &item.range {
                None => (0, 0, None),
                Some(r) => {
                    let lo =
                        r.lo.eval(&env)?.as_int().ok_or_else(|| Error::Plan("range bound is not an integer".into()))?;
                    let hi =
                        r.hi.eval(&env)?.as_int().ok_or_else(|| Error::Plan("range bound is not an integer".into()))?;
                    if hi.saturating_sub(lo) >= MAX_LOOP {
                        return Err(Error::Plan(format!("expansion of {fact} is too long ({lo}..{hi})")));
                    }
                    (lo, hi, Some(r.var.clone()))
                }
            };
            for k in lo..=hi {
                if let Some(v) = &var {
                    env.insert(v.clone(), Term::Int(k));
                }
                let args = item.args.iter().map(|a| a.eval(&env)).collect::<Result<Vec<_>>>()?;
                produced.push(Literal::new(item.pred.clone(), args));
            }
            if let Some(v) = &var {
                env.remove(v);
            }
        }
        let composite = produced.iter().any(|p| domain.rule_for(&p.pred).is_some());
        let inner: BTreeSet<Literal> =
            if composite { context.iter().chain(&produced).cloned().collect() } else { BTreeSet::new() };
        for p in produced {
            match domain.rule_for(&p.pred) {
                Some(sub) => expand(&p, sub, &inner, domain, depth + 1, out)?,
                None => out.push(p),
            }
        }
    }
    Ok(())
}

fn collect_matches(
    conds: &[&Literal],
    facts: &BTreeSet<Literal>,
    s: Substitution,
    out: &mut Vec<Substitution>,
) -> Result<()> {
    let Some((first, rest)) = conds.split_first() else {
        out.push(s);
        return Ok(());
    };
    let pat = s.apply_literal(first);
    for f in facts.range(Literal::new(pat.pred.clone(), Vec::new())..) {
        if f.pred != pat.pred {
            break;
        }
        if let Some(b) = bind_pattern(&pat, f) {
            let mut next = s.clone();
            for (k, v) in b.iter() {
                next.bind(k.clone(), v.clone());
            }
            collect_matches(rest, facts, next, out)?;
        }
    }
    Ok(())
}

/// Derives the plan for a ground fact set.
///
/// With time indices, indexed facts come first in index order (ties by
/// literal order) and are emitted verbatim as actions; the remaining facts
/// are expanded as usual and appended in canonical order.
pub fn derive_plan(
    facts: &BTreeSet<Literal>,
    domain: &Domain,
    registry: &BuiltinRegistry,
    time: Option<&BTreeMap<Literal, i64>>,
) -> Result<PlanString> {
    let mut timed: Vec<(i64, &Literal)> = Vec::new();
    let mut actions = Vec::new();
    for f in facts {
        if let Some(&t) = time.and_then(|m| m.get(f)) {
            timed.push((t, f));
            continue;
        }
        if registry.is_builtin(f) {
            continue;
        }
        if let Some(rule) = domain.rule_for(&f.pred) {
            expand(f, rule, facts, domain, 0, &mut actions)?;
        } else if let Some(name) = domain.actions.get(&f.pred) {
            actions.push(Literal::new(name.clone(), f.args.clone()));
        }
    }
    timed.sort();
    actions.sort();
    let ordered = timed.into_iter().map(|(_, l)| l).chain(actions.iter());
    Ok(PlanString::from_actions(ordered))
}

/// Plan of the example itself.
pub fn example_plan(x: &GroundExample, domain: &Domain, registry: &BuiltinRegistry) -> Result<PlanString> {
    derive_plan(&x.facts, domain, registry, Some(&x.time))
}

/// Plan of `c` grounded against `x`. Time indices of `x` carry over to
/// ground literals that coincide with indexed facts.
pub fn clause_plan(c: &Clause, x: &GroundExample, domain: &Domain, registry: &BuiltinRegistry) -> Result<PlanString> {
    let g = ground_clause(c, x, domain, registry)?;
    derive_plan(&g, domain, registry, Some(&x.time))
}

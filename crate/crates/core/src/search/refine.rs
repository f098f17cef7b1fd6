//! Bottom clauses and refinement operators.

use std::collections::{BTreeMap, BTreeSet};

use crate::domain::{Bounds, Domain};
use crate::error::Result;
use crate::logic::builtin::BuiltinRegistry;
use crate::logic::parse::GroundExample;
use crate::logic::term::{Clause, Literal, Substitution, Term};
use crate::logic::variablize::variablize;
use crate::plan::is_param_literal;

/// Link distance of every variable reachable from the head. Built-ins do
/// not link variables.
pub fn variable_depths(c: &Clause, registry: &BuiltinRegistry) -> BTreeMap<String, usize> {
    let mut depth: BTreeMap<String, usize> = c.head.vars().map(|v| (v.to_string(), 0)).collect();
    let links: Vec<Vec<&str>> = c
        .body
        .iter()
        .filter(|l| !registry.is_builtin(l))
        .map(|l| {
            let mut vs: Vec<&str> = l.vars().collect();
            vs.dedup();
            vs
        })
        .collect();
    loop {
        let mut changed = false;
        for vs in &links {
            let Some(d) = vs.iter().filter_map(|v| depth.get(*v)).min().copied() else { continue };
            for v in vs {
                let e = depth.entry(v.to_string()).or_insert(usize::MAX);
                if *e > d + 1 {
                    *e = d + 1;
                    changed = true;
                }
            }
        }
        if !changed {
            return depth;
        }
    }
}

/// True when `c` respects the depth, arity and body-length bounds.
/// Variables not linked to the head carry no depth.
pub fn within_bounds(c: &Clause, bounds: &Bounds, registry: &BuiltinRegistry) -> bool {
    if c.body.len() > bounds.max_body {
        return false;
    }
    if c.body.iter().any(|l| !registry.is_builtin(l) && l.arity() > bounds.arity) {
        return false;
    }
    variable_depths(c, registry).values().all(|&d| d <= bounds.depth)
}

/// The most specific clause for `x`: its variablization, restricted to
/// literals whose variables all lie within the depth bound and whose arity
/// is within the arity bound, at most `recall` literals per predicate, and
/// at most `max_body` literals, in canonical order.
pub fn bottom_clause(x: &GroundExample, domain: &Domain, registry: &BuiltinRegistry) -> Result<Clause> {
    for f in &x.facts {
        let m = domain.mode(&f.pred)?;
        if m.arity() != f.arity() {
            return Err(crate::Error::Domain(format!(
                "{} has arity {} but its mode declares {}",
                f.pred,
                f.arity(),
                m.arity()
            )));
        }
    }
    let (full, _) = variablize(x, &domain.keep_constant);
    let depths = variable_depths(&full, registry);
    let bounds = &domain.bounds;
    let mut per_pred: BTreeMap<&str, usize> = BTreeMap::new();
    let mut body = Vec::new();
    let mut sorted = full.body.clone();
    sorted.sort();
    for l in &sorted {
        if l.arity() > bounds.arity {
            continue;
        }
        if !l.vars().all(|v| depths.get(v).is_some_and(|&d| d <= bounds.depth)) {
            continue;
        }
        let n = per_pred.entry(l.pred.as_str()).or_default();
        if domain.modes.get(&l.pred).and_then(|m| m.recall).is_some_and(|r| *n >= r) {
            continue;
        }
        *n += 1;
        body.push(l.clone());
        if body.len() == bounds.max_body {
            break;
        }
    }
    Ok(Clause::new(full.head, body))
}

/// Declared type of each variable, taken from the first mode-annotated
/// position it occupies.
pub fn variable_types(c: &Clause, domain: &Domain) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for l in &c.body {
        for (i, a) in l.args.iter().enumerate() {
            if let (Term::Var(v), Some(ty)) = (a, domain.arg_type(&l.pred, i)) {
                out.entry(v.clone()).or_insert_with(|| ty.to_string());
            }
        }
    }
    out
}

/// Everything the refinement operators need besides the clause.
pub struct RefineContext<'a> {
    pub domain: &'a Domain,
    pub registry: &'a BuiltinRegistry,
    pub bounds: Bounds,
    /// Literals that must never be deleted (accepted advice).
    pub protected: BTreeSet<Literal>,
}

impl RefineContext<'_> {
    fn deletable(&self, l: &Literal, head_vars: &BTreeSet<String>) -> bool {
        !self.protected.contains(l) && !is_param_literal(l, head_vars, self.domain)
    }
}

/// Which operator produced a child.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Operator {
    Delete,
    AddBottom,
    Unify,
    AddPreferred,
}

/// Children of `c` under the four operators, canonical and deduplicated,
/// restricted to those within the bounds. Order is deterministic.
pub fn refinements(c: &Clause, bottom: &Clause, preferred: &[Literal], ctx: &RefineContext<'_>) -> Vec<Clause> {
    refinements_tagged(c, bottom, preferred, ctx).into_iter().map(|(_, c)| c).collect()
}

pub fn refinements_tagged(
    c: &Clause,
    bottom: &Clause,
    preferred: &[Literal],
    ctx: &RefineContext<'_>,
) -> Vec<(Operator, Clause)> {
    let head_vars = c.head_vars();
    let mut seen = BTreeSet::new();
    seen.insert(c.clone().canonical());
    let mut out = Vec::new();
    let mut push = |op: Operator, child: Clause, out: &mut Vec<(Operator, Clause)>| {
        let child = child.canonical();
        if within_bounds(&child, &ctx.bounds, ctx.registry) && seen.insert(child.clone()) {
            out.push((op, child));
        }
    };

    // (a) delete one body literal
    for (i, l) in c.body.iter().enumerate() {
        if !ctx.deletable(l, &head_vars) {
            continue;
        }
        let mut body = c.body.clone();
        body.remove(i);
        push(Operator::Delete, Clause::new(c.head.clone(), body), &mut out);
    }

    // (b) add one bottom literal the clause lacks
    if c.body.len() < ctx.bounds.max_body {
        let have: BTreeSet<&Literal> = c.body.iter().collect();
        for l in &bottom.body {
            if !have.contains(l) {
                let mut body = c.body.clone();
                body.push(l.clone());
                push(Operator::AddBottom, Clause::new(c.head.clone(), body), &mut out);
            }
        }
    }

    // (c) unify two distinct variables of the same type; parameter values
    // are never tied by search, only through advice
    let types = variable_types(c, ctx.domain);
    let order = c.vars();
    let fixed: BTreeSet<&str> = c
        .body
        .iter()
        .filter(|l| is_param_literal(l, &head_vars, ctx.domain))
        .flat_map(|l| l.vars())
        .chain(head_vars.iter().map(String::as_str))
        .collect();
    for (i, a) in order.iter().enumerate() {
        if fixed.contains(a.as_str()) {
            continue;
        }
        for b in &order[i + 1..] {
            if fixed.contains(b.as_str()) || !types.contains_key(a) || types.get(a) != types.get(b) {
                continue;
            }
            let mut s = Substitution::new();
            s.bind(b.clone(), Term::Var(a.clone()));
            push(Operator::Unify, s.apply_clause(c), &mut out);
        }
    }

    // (d) add a preferred constraint over the clause's variables
    if c.body.len() < ctx.bounds.max_body {
        let vars: BTreeSet<String> = order.iter().cloned().collect();
        for p in preferred {
            if c.body.contains(p) || !p.vars().all(|v| vars.contains(v)) {
                continue;
            }
            let mut body = c.body.clone();
            body.push(p.clone());
            push(Operator::AddPreferred, Clause::new(c.head.clone(), body), &mut out);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::parse_domain;
    use crate::logic::parse::{parse_example, parse_literal, parse_theory};

    fn dom() -> Domain {
        parse_domain(include_str!("../../data/blocks.dom")).unwrap()
    }

    fn ctx(d: &Domain, r: &BuiltinRegistry) -> RefineContext<'static> {
        // leak for test convenience
        let d: &'static Domain = Box::leak(Box::new(d.clone()));
        let r: &'static BuiltinRegistry = Box::leak(Box::new(r.clone()));
        RefineContext { domain: d, registry: r, bounds: d.bounds, protected: BTreeSet::new() }
    }

    #[test]
    fn lshape_bottom_clause() {
        let x = parse_example(include_str!("../../data/lshape.facts")).unwrap();
        let r = BuiltinRegistry::default();
        let b = bottom_clause(&x, &dom(), &r).unwrap();
        assert_eq!(b.head.to_string(), "L(V0)");
        assert_eq!(b.body.len(), 9);
        let mut d1 = dom();
        d1.bounds.depth = 1;
        let b1 = bottom_clause(&x, &d1, &r).unwrap();
        // Width(a, 4): a is at depth 1, its width at depth 2
        assert!(b1.body.iter().all(|l| l.pred != "Width"));
        assert!(b1.body.iter().all(|l| !(l.pred == "Height" && l.args[0] != Term::var("V0"))));
        assert_eq!(b1.body.len(), 7);
    }

    #[test]
    fn missing_mode() {
        let x = parse_example("@concept C(c).\nCube(c).\n").unwrap();
        let e = bottom_clause(&x, &dom(), &BuiltinRegistry::default()).unwrap_err();
        assert!(matches!(e, crate::Error::MissingMode(p) if p == "Cube"));
    }

    #[test]
    fn hand_enumerated_children() {
        let d = dom();
        let r = BuiltinRegistry::default();
        let cx = ctx(&d, &r);
        // two width variables, one object variable besides the head
        let c = parse_theory("L(S) :- Base(S, Ws), Contains(S, A), Row(A), Width(A, Wa).").unwrap().clauses[0].clone();
        let bottom = c.clone();
        let kids = refinements_tagged(&c, &bottom, &[], &cx);
        let count = |op| kids.iter().filter(|(o, _)| *o == op).count();
        // Base(S, Ws) is a parameter literal and stays
        assert_eq!(count(Operator::Delete), 3);
        assert_eq!(count(Operator::AddBottom), 0);
        // Ws and Wa share the type width, but Ws is a parameter value
        assert_eq!(count(Operator::Unify), 0);
        let mut plain = d.clone();
        plain.params.clear();
        let px = ctx(&plain, &r);
        let kids_plain = refinements_tagged(&c, &bottom, &[], &px);
        let merged: Vec<_> = kids_plain.iter().filter(|(o, _)| *o == Operator::Unify).collect();
        assert_eq!(merged.len(), 1);
        assert_eq!(merged[0].1.to_string(), "L(S) :- Base(S, Ws), Contains(S, A), Row(A), Width(A, Ws).");
        let pref = vec![parse_literal("Equal(Ws, Wa)").unwrap(), parse_literal("Equal(Ws, Zz)").unwrap()];
        let kids = refinements_tagged(&c, &bottom, &pref, &cx);
        let added: Vec<_> = kids.iter().filter(|(o, _)| *o == Operator::AddPreferred).collect();
        assert_eq!(added.len(), 1);
        assert!(added[0].1.body.contains(&pref[0]));
    }

    #[test]
    fn nine_deletions_from_bottom() {
        let x = parse_example(include_str!("../../data/lshape.facts")).unwrap();
        let r = BuiltinRegistry::default();
        let mut d = dom();
        d.params.clear();
        let b = bottom_clause(&x, &d, &r).unwrap();
        let cx = ctx(&d, &r);
        let kids = refinements_tagged(&b, &b, &[], &cx);
        let dels: Vec<_> = kids.iter().filter(|(o, _)| *o == Operator::Delete).collect();
        // deleting Contains(S, A) leaves A unlinked but allowed
        assert_eq!(dels.len(), 9);
        assert!(dels.iter().all(|(_, c)| c.body.len() == 8));
    }
}

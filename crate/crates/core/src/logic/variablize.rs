//! Inverse substitution: turning a ground example into its most specific clause.

use std::collections::{BTreeMap, BTreeSet};

use super::parse::GroundExample;
use super::term::{Clause, Literal, Substitution, Term};

/// Variablizes `x`. Returns the clause `X/θ⁻¹` and the substitution that
/// grounds it back to `x`.
///
/// Object and string constants are mapped per term: every occurrence of `a`
/// becomes the same variable. Integers are mapped per occurrence, so two
/// facts that both mention `4` get independent variables; equalities between
/// them are left for search and advice to rediscover. Strings listed in
/// `keep` stay constant. Variables are named `V0, V1, ...` in order of first
/// occurrence, head first, then facts in canonical order.
pub fn variablize(x: &GroundExample, keep: &BTreeSet<String>) -> (Clause, Substitution) {
    let mut names: BTreeMap<Term, String> = BTreeMap::new();
    let mut inverse = Substitution::new();
    let mut next = 0usize;
    let mut fresh = |t: &Term, inverse: &mut Substitution| {
        let v = format!("V{next}");
        next += 1;
        inverse.bind(v.clone(), t.clone());
        v
    };
    let mut map_term = |t: &Term, inverse: &mut Substitution| -> Term {
        match t {
            Term::Var(_) => t.clone(),
            Term::Str(s) if keep.contains(s) => t.clone(),
            Term::Int(_) => Term::Var(fresh(t, inverse)),
            Term::Str(_) => {
                if let Some(v) = names.get(t) {
                    Term::Var(v.clone())
                } else {
                    let v = fresh(t, inverse);
                    names.insert(t.clone(), v.clone());
                    Term::Var(v)
                }
            }
        }
    };
    let mut map_lit = |l: &Literal, inverse: &mut Substitution| {
        Literal::new(l.pred.clone(), l.args.iter().map(|a| map_term(a, inverse)).collect())
    };
    let head = map_lit(&x.head, &mut inverse);
    let body: Vec<Literal> = x.facts.iter().map(|f| map_lit(f, &mut inverse)).collect();
    (Clause::new(head, body), inverse)
}

//! Coverage by theta-subsumption with built-in constraints.
//!
//! A clause covers an example when some substitution maps the head onto the
//! example head, every ordinary body literal onto a fact, and makes every
//! built-in literal true. Search is depth-first; at each step the unmatched
//! literal with the fewest compatible facts is expanded next, and built-ins
//! are checked as soon as their arguments are bound.

use std::collections::BTreeMap;

use super::builtin::BuiltinRegistry;
use super::parse::GroundExample;
use super::term::{Clause, Literal, Substitution, Term, Theory};
use crate::error::{Error, Result};

pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct Coverage {
    pub covered: bool,
    pub witness: Option<Substitution>,
    /// Index of the covering clause.
    pub clause: Option<usize>,
}

/// Pattern literals matched into a fixed set of target literals. Targets may
/// contain variables; those are treated as opaque constants.
pub(crate) struct Matcher<'a> {
    by_pred: BTreeMap<&'a str, BTreeMap<usize, Vec<&'a Literal>>>,
    registry: &'a BuiltinRegistry,
    budget: usize,
    nodes: usize,
}

impl<'a> Matcher<'a> {
    pub(crate) fn new(
        targets: impl IntoIterator<Item = &'a Literal>,
        registry: &'a BuiltinRegistry,
        budget: usize,
    ) -> Self {
        let mut by_pred: BTreeMap<&str, BTreeMap<usize, Vec<&Literal>>> = BTreeMap::new();
        for t in targets {
            by_pred.entry(t.pred.as_str()).or_default().entry(t.arity()).or_default().push(t);
        }
        Matcher { by_pred, registry, budget, nodes: 0 }
    }

    fn candidates<'b>(&'b self, pat: &Literal) -> &'b [&'a Literal] {
        self.by_pred.get(pat.pred.as_str()).and_then(|m| m.get(&pat.arity())).map_or(&[], Vec::as_slice)
    }

    /// The new bindings that map `pat` onto `target` under `s`, if any.
    /// A variable repeated within the pattern must meet equal terms.
    fn extend<'t>(pat: &'t Literal, target: &'t Literal, s: &Substitution) -> Option<Vec<(&'t str, &'t Term)>> {
        let mut new: Vec<(&str, &Term)> = Vec::new();
        for (p, t) in pat.args.iter().zip(&target.args) {
            match p {
                Term::Var(v) => match s.get(v).or_else(|| new.iter().find(|(n, _)| n == v).map(|(_, b)| *b)) {
                    Some(b) if b != t => return None,
                    Some(_) => {}
                    None => new.push((v, t)),
                },
                _ if p != t => return None,
                _ => {}
            }
        }
        Some(new)
    }

    fn compatible(pat: &Literal, target: &Literal, s: &Substitution) -> bool {
        Self::extend(pat, target, s).is_some()
    }

    /// Finds a substitution extending `init` under which every pattern maps
    /// into the targets and every built-in holds. Built-ins whose variables
    /// never get bound by an ordinary literal make the match fail.
    pub(crate) fn find(
        &mut self,
        patterns: &[&Literal],
        builtins: &[&Literal],
        init: Substitution,
    ) -> Result<Option<Substitution>> {
        let mut s = init;
        for b in builtins {
            if self.registry.eval_under(b, &s) == Some(false) {
                return Ok(None);
            }
        }
        let mut done = vec![false; patterns.len()];
        if self.search(patterns, builtins, &mut done, &mut s)? {
            Ok(Some(s))
        } else {
            Ok(None)
        }
    }

    fn search(
        &mut self,
        patterns: &[&Literal],
        builtins: &[&Literal],
        done: &mut [bool],
        s: &mut Substitution,
    ) -> Result<bool> {
        // choose the most constrained remaining pattern
        let mut best: Option<(usize, usize)> = None;
        for (i, p) in patterns.iter().enumerate() {
            if done[i] {
                continue;
            }
            let n = self.candidates(p).iter().filter(|t| Self::compatible(p, t, s)).count();
            if best.is_none_or(|(_, bn)| n < bn) {
                best = Some((i, n));
                if n == 0 {
                    break;
                }
            }
        }
        let Some((idx, n)) = best else {
            return Ok(builtins.iter().all(|b| self.registry.eval_under(b, s) == Some(true)));
        };
        if n == 0 {
            return Ok(false);
        }
        let pat = patterns[idx];
        done[idx] = true;
        let cands: Vec<&Literal> =
            self.candidates(pat).iter().copied().filter(|t| Self::compatible(pat, t, s)).collect();
        for target in cands {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(Error::BudgetExceeded(self.budget));
            }
            let bound: Vec<String> = Self::extend(pat, target, s)
                .expect("filtered for compatibility")
                .into_iter()
                .map(|(v, t)| {
                    s.bind(v.to_string(), t.clone());
                    v.to_string()
                })
                .collect();
            let consistent = builtins.iter().all(|b| self.registry.eval_under(b, s) != Some(false));
            if consistent && self.search(patterns, builtins, done, s)? {
                return Ok(true);
            }
            for v in &bound {
                s.unbind(v);
            }
        }
        done[idx] = false;
        Ok(false)
    }
}

/// Head binding of `c` onto the example head, if the predicates agree.
pub(crate) fn head_binding(c: &Clause, x: &GroundExample) -> Option<Substitution> {
    if c.head.pred != x.head.pred || c.head.arity() != x.head.arity() {
        return None;
    }
    let mut s = Substitution::new();
    for (p, t) in c.head.args.iter().zip(&x.head.args) {
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

/// Does clause `c` cover `x`? Returns the witness substitution when it does.
pub fn covers_clause(
    c: &Clause,
    x: &GroundExample,
    registry: &BuiltinRegistry,
    budget: usize,
) -> Result<Option<Substitution>> {
    let Some(init) = head_binding(c, x) else {
        return Ok(None);
    };
    let (builtins, ordinary): (Vec<&Literal>, Vec<&Literal>) = c.body.iter().partition(|l| registry.is_builtin(l));
    let mut m = Matcher::new(&x.facts, registry, budget);
    m.find(&ordinary, &builtins, init)
}

/// Coverage of a theory: true iff some clause covers `x`.
pub fn covers(t: &Theory, x: &GroundExample, registry: &BuiltinRegistry) -> Result<Coverage> {
    covers_with_budget(t, x, registry, DEFAULT_NODE_BUDGET)
}

pub fn covers_with_budget(
    t: &Theory,
    x: &GroundExample,
    registry: &BuiltinRegistry,
    budget: usize,
) -> Result<Coverage> {
    for (i, c) in t.clauses.iter().enumerate() {
        if let Some(w) = covers_clause(c, x, registry, budget)? {
            return Ok(Coverage { covered: true, witness: Some(w), clause: Some(i) });
        }
    }
    Ok(Coverage { covered: false, witness: None, clause: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse::{parse_example, parse_literal, parse_theory};

    const LSHAPE: &str = include_str!("../../data/lshape.facts");
    const TRUTH: &str = include_str!("../../data/lshape_truth.thy");

    #[test]
    fn example_theory_covers_its_instance() {
        let x = parse_example(LSHAPE).unwrap();
        let t = parse_theory(TRUTH).unwrap();
        let r = BuiltinRegistry::default();
        let cov = covers(&t, &x, &r).unwrap();
        assert!(cov.covered);
        assert_eq!(cov.clause, Some(0));
        let w = cov.witness.unwrap();
        assert_eq!(w.get("S"), Some(&Term::str("s1")));
        assert_eq!(w.get("Hs"), Some(&Term::Int(5)));
        assert_eq!(w.get("Ws"), Some(&Term::Int(4)));
        assert_eq!(w.get("Wa"), Some(&Term::Int(4)));
        assert_eq!(w.get("Hb"), Some(&Term::Int(4)));
        assert_eq!(w.get("A"), Some(&Term::str("a")));
        assert_eq!(w.get("B"), Some(&Term::str("b")));
        // grounding the clause with the witness gives the facts plus the two constraints
        let ground = w.apply_clause(&t.clauses[0]);
        let mut ordinary: Vec<_> = ground.body.iter().filter(|l| !r.is_builtin(l)).cloned().collect();
        ordinary.sort();
        assert_eq!(ordinary, x.facts.iter().cloned().collect::<Vec<_>>());
        let cons: Vec<String> = ground.body.iter().filter(|l| r.is_builtin(l)).map(|l| l.to_string()).collect();
        assert_eq!(cons, vec!["Equal(4, 4)", "Sub(4, 5, 1)"]);
    }

    #[test]
    fn repeated_variable_needs_equal_terms() {
        let x = parse_example("@concept C(k).\nR(b, a).\n").unwrap();
        let r = BuiltinRegistry::default();
        assert!(!covers(&parse_theory("C(K) :- R(X, X).").unwrap(), &x, &r).unwrap().covered);
        assert!(covers(&parse_theory("C(K) :- R(X, Y).").unwrap(), &x, &r).unwrap().covered);
    }

    #[test]
    fn missing_predicate() {
        let x = parse_example(LSHAPE).unwrap();
        let t = parse_theory("L(S) :- Contains(S, Z), Cube(Z).").unwrap();
        assert!(!covers(&t, &x, &BuiltinRegistry::default()).unwrap().covered);
    }

    #[test]
    fn builtin_rejects_binding() {
        let x = parse_example(LSHAPE).unwrap();
        let t = parse_theory("L(S) :- Height(S, H), Base(S, W), Equal(H, W).").unwrap();
        assert!(!covers(&t, &x, &BuiltinRegistry::default()).unwrap().covered);
        let t = parse_theory("L(S) :- Height(S, H), Base(S, W), Greater(W, H).").unwrap();
        assert!(covers(&t, &x, &BuiltinRegistry::default()).unwrap().covered);
    }

    #[test]
    fn wrong_head_is_not_covered() {
        let x = parse_example(LSHAPE).unwrap();
        let t = parse_theory("T(S).").unwrap();
        assert!(!covers(&t, &x, &BuiltinRegistry::default()).unwrap().covered);
        let t = parse_theory("L(S).").unwrap();
        assert!(covers(&t, &x, &BuiltinRegistry::default()).unwrap().covered);
    }

    #[test]
    fn budget_is_enforced() {
        let mut x = parse_example("@concept C(c).").unwrap();
        for i in 0..12 {
            x.facts.insert(parse_literal(&format!("P(o{i})")).unwrap());
        }
        // all P's match, but the constraint can never hold
        let t = parse_theory("C(S) :- P(A), P(B), P(D), P(E), Q(E).").unwrap();
        let r = BuiltinRegistry::default();
        assert!(matches!(covers_with_budget(&t, &x, &r, 5), Ok(_) | Err(Error::BudgetExceeded(5))));
        let t = parse_theory("C(S) :- P(A), P(B), P(D), Equal(1, 2).").unwrap();
        assert!(!covers(&t, &x, &r).unwrap().covered);
        let t = parse_theory("C(S) :- P(A), P(B), P(D), P(E), P(F), Z(A).").unwrap();
        assert!(!covers_with_budget(&t, &x, &r, 50).map(|c| c.covered).unwrap_or(false));
    }
}

//! Function-free first-order terms, literals, clauses and theories.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// A function-free term.
///
/// The derived ordering puts variables first, then integers (numerically),
/// then string constants. Plan canonicalization relies on integers sorting
/// numerically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Var(String),
    Int(i64),
    Str(String),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn str(value: impl Into<String>) -> Self {
        Term::Str(value.into())
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Term::Int(n) => Some(*n),
            _ => None,
        }
    }

    /// Renders the term without quoting string constants (used in plans).
    pub fn bare(&self) -> String {
        match self {
            Term::Var(v) => v.clone(),
            Term::Int(n) => n.to_string(),
            Term::Str(s) => s.clone(),
        }
    }
}

pub(crate) fn is_variable_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_uppercase()) && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn is_bare_constant(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase()) && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Int(n) => write!(f, "{n}"),
            Term::Str(s) if is_bare_constant(s) => f.write_str(s),
            Term::Str(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub pred: String,
    pub args: Vec<Term>,
}

impl Literal {
    pub fn new(pred: impl Into<String>, args: Vec<Term>) -> Self {
        Literal { pred: pred.into(), args }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        !self.args.iter().any(Term::is_var)
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(Term::as_var)
    }

    /// `Pred/arity`, as used in diagnostics.
    pub fn signature(&self) -> String {
        format!("{}/{}", self.pred, self.args.len())
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.pred)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

/// A definite clause `head :- body`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Clause {
    pub head: Literal,
    pub body: Vec<Literal>,
}

impl Clause {
    pub fn new(head: Literal, body: Vec<Literal>) -> Self {
        Clause { head, body }
    }

    /// All variables in first-occurrence order (head first).
    pub fn vars(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for lit in std::iter::once(&self.head).chain(&self.body) {
            for v in lit.vars() {
                if seen.insert(v) {
                    out.push(v.to_string());
                }
            }
        }
        out
    }

    pub fn head_vars(&self) -> BTreeSet<String> {
        self.head.vars().map(str::to_string).collect()
    }

    /// Body sorted and deduplicated; the canonical form used by search.
    pub fn canonical(mut self) -> Self {
        self.body.sort();
        self.body.dedup();
        self
    }

    /// Renames variables to `V0, V1, ...` in first-occurrence order.
    /// Two alpha-equivalent clauses with the same literal order normalize
    /// to the same value.
    pub fn normalize_vars(&self) -> Clause {
        let mut map = BTreeMap::new();
        for (i, v) in self.vars().into_iter().enumerate() {
            map.insert(v, Term::Var(format!("V{i}")));
        }
        let s = Substitution::from_map(map);
        s.apply_clause(self)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            f.write_str(" :- ")?;
            for (i, l) in self.body.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{l}")?;
            }
        }
        f.write_str(".")
    }
}

/// A disjunction of clauses sharing one head predicate.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Theory {
    pub clauses: Vec<Clause>,
}

impl Theory {
    pub fn single(clause: Clause) -> Self {
        Theory { clauses: vec![clause] }
    }

    pub fn new(clauses: Vec<Clause>) -> crate::Result<Self> {
        let Some(first) = clauses.first() else {
            return Err(crate::Error::InvalidTheory("theory has no clauses".into()));
        };
        let (pred, arity) = (&first.head.pred, first.head.arity());
        for c in &clauses[1..] {
            if &c.head.pred != pred || c.head.arity() != arity {
                return Err(crate::Error::InvalidTheory(format!(
                    "clause heads disagree: {} vs {}",
                    first.head.signature(),
                    c.head.signature()
                )));
            }
        }
        Ok(Theory { clauses })
    }

    pub fn body_len(&self) -> usize {
        self.clauses.iter().map(|c| c.body.len()).sum()
    }

    pub fn head_pred(&self) -> &str {
        &self.clauses[0].head.pred
    }

    /// Rendered theory, one clause per line with a trailing newline.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.clauses {
            s.push_str(&c.to_string());
            s.push('\n');
        }
        s
    }
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Variable bindings. The inverse map θ⁻¹ is stored the other way around:
/// as the substitution that grounds the variablized clause back to the example.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Substitution {
    bindings: BTreeMap<String, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_map(bindings: BTreeMap<String, Term>) -> Self {
        Substitution { bindings }
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.bindings.get(var)
    }

    /// Binds `var`; returns false (and leaves the binding alone) if it is
    /// already bound to a different term.
    pub fn bind(&mut self, var: impl Into<String>, term: Term) -> bool {
        use std::collections::btree_map::Entry;
        match self.bindings.entry(var.into()) {
            Entry::Vacant(e) => {
                e.insert(term);
                true
            }
            Entry::Occupied(e) => *e.get() == term,
        }
    }

    pub fn unbind(&mut self, var: &str) {
        self.bindings.remove(var);
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Term)> {
        self.bindings.iter()
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => self.bindings.get(v).cloned().unwrap_or_else(|| t.clone()),
            _ => t.clone(),
        }
    }

    pub fn apply_literal(&self, l: &Literal) -> Literal {
        Literal { pred: l.pred.clone(), args: l.args.iter().map(|t| self.apply_term(t)).collect() }
    }

    pub fn apply_clause(&self, c: &Clause) -> Clause {
        Clause { head: self.apply_literal(&c.head), body: c.body.iter().map(|l| self.apply_literal(l)).collect() }
    }

    pub fn apply_theory(&self, t: &Theory) -> Theory {
        Theory { clauses: t.clauses.iter().map(|c| self.apply_clause(c)).collect() }
    }
}

/// Replaces every bound variable of `c`; unbound variables are left untouched.
pub fn apply_substitution(c: &Clause, s: &Substitution) -> Clause {
    s.apply_clause(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(p: &str, args: Vec<Term>) -> Literal {
        Literal::new(p, args)
    }

    #[test]
    fn single_binding() {
        let c = Clause::new(lit("C", vec![Term::var("B")]), vec![lit("Height", vec![Term::str("b"), Term::var("H")])]);
        let mut s = Substitution::new();
        s.bind("H", Term::Int(4));
        let out = apply_substitution(&c, &s);
        assert_eq!(out.body[0].to_string(), "Height(b, 4)");
        assert_eq!(out.head.to_string(), "C(B)");
    }

    #[test]
    fn empty_substitution_is_identity() {
        let c = Clause::new(lit("C", vec![Term::var("X")]), vec![lit("P", vec![Term::var("X"), Term::Int(3)])]);
        assert_eq!(apply_substitution(&c, &Substitution::new()), c);
    }

    #[test]
    fn rendering_quotes_only_when_needed() {
        assert_eq!(Term::str("a").to_string(), "a");
        assert_eq!(Term::str("NWTop").to_string(), "\"NWTop\"");
        assert_eq!(Term::str("x y").to_string(), "\"x y\"");
        assert!(is_variable_name("H_b"));
        assert!(!is_variable_name("h_b"));
    }

    #[test]
    fn bind_refuses_conflicts() {
        let mut s = Substitution::new();
        assert!(s.bind("X", Term::Int(1)));
        assert!(s.bind("X", Term::Int(1)));
        assert!(!s.bind("X", Term::Int(2)));
        assert_eq!(s.get("X"), Some(&Term::Int(1)));
    }

    #[test]
    fn theory_rejects_mixed_heads() {
        let a = Clause::new(lit("L", vec![Term::var("S")]), vec![]);
        let b = Clause::new(lit("T", vec![Term::var("S")]), vec![]);
        assert!(Theory::new(vec![a.clone(), b]).is_err());
        assert!(Theory::new(vec![]).is_err());
        assert!(Theory::new(vec![a]).is_ok());
    }
}

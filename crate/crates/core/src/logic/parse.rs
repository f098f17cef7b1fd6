//! Readers and writers for `.facts` and `.thy` files.
//!
//! Fact files are line oriented:
//!
//! ```text
//! # an L-shape
//! @concept L(s1).
//! @params s1: base=4, height=5.
//! Row(a).
//! SpRel(b, a, "NWTop").
//! @time 0: fetch(x).
//! ```

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::lexer::{tokenize, Cursor, Tok};
use super::term::{is_variable_name, Clause, Literal, Term, Theory};
use crate::error::{Error, ParseError};

/// The single input instance: a ground head, its parameters and facts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundExample {
    pub head: Literal,
    pub params: BTreeMap<String, i64>,
    pub facts: BTreeSet<Literal>,
    /// Time index per fact, for plan demonstrations.
    pub time: BTreeMap<Literal, i64>,
}

impl GroundExample {
    pub fn new(head: Literal) -> Self {
        GroundExample { head, params: BTreeMap::new(), facts: BTreeSet::new(), time: BTreeMap::new() }
    }

    /// The concept identifier, i.e. the first head argument.
    pub fn id(&self) -> Option<&Term> {
        self.head.args.first()
    }

    pub fn with_facts(mut self, facts: impl IntoIterator<Item = Literal>) -> Self {
        self.facts.extend(facts);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    /// Renders the example in fact-file syntax, facts in canonical order.
    pub fn render(&self) -> String {
        let mut s = format!("@concept {}.\n", self.head);
        if !self.params.is_empty() {
            let id = self.id().map(Term::to_string).unwrap_or_default();
            let ps: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            s.push_str(&format!("@params {id}: {}.\n", ps.join(", ")));
        }
        for f in &self.facts {
            if let Some(t) = self.time.get(f) {
                s.push_str(&format!("@time {t}: {f}.\n"));
            } else {
                s.push_str(&format!("{f}.\n"));
            }
        }
        s
    }
}

/// Parses one term. Uppercase identifiers are variables, lowercase
/// identifiers and quoted strings are string constants.
fn term(cur: &mut Cursor<'_>) -> Result<Term, ParseError> {
    match cur.peek() {
        Some(Tok::Int(n)) => {
            let n = *n;
            cur.bump();
            Ok(Term::Int(n))
        }
        Some(Tok::Str(s)) => {
            let s = s.clone();
            cur.bump();
            Ok(Term::Str(s))
        }
        Some(Tok::Ident(s)) => {
            let s = s.clone();
            cur.bump();
            if is_variable_name(&s) || s.starts_with('_') {
                Ok(Term::Var(s))
            } else {
                Ok(Term::Str(s))
            }
        }
        _ => Err(cur.error("expected a term")),
    }
}

pub(crate) fn literal(cur: &mut Cursor<'_>) -> Result<Literal, ParseError> {
    let pred = cur.ident("predicate name")?;
    let mut args = Vec::new();
    if cur.eat(&Tok::LParen) && !cur.eat(&Tok::RParen) {
        loop {
            args.push(term(cur)?);
            if cur.eat(&Tok::RParen) {
                break;
            }
            cur.expect(&Tok::Comma, "',' or ')'")?;
        }
    }
    Ok(Literal::new(pred, args))
}

/// Parses a single literal from text, e.g. `"Sub(H_b, H_s, 1)"`.
pub fn parse_literal(text: &str) -> Result<Literal, ParseError> {
    let toks = tokenize(text, 1)?;
    let mut cur = Cursor::new(&toks, 1);
    let l = literal(&mut cur)?;
    cur.eat(&Tok::Dot);
    if !cur.at_end() {
        return Err(cur.error("trailing input after literal"));
    }
    Ok(l)
}

fn ground_or_err(l: &Literal, line: usize) -> Result<(), ParseError> {
    if l.is_ground() {
        Ok(())
    } else {
        Err(ParseError::new(line, 1, format!("variable in fact at line {line}")))
    }
}

/// Parses fact-file contents into a ground example.
pub fn parse_example(text: &str) -> Result<GroundExample, ParseError> {
    let mut head: Option<Literal> = None;
    let mut params: Option<(Term, BTreeMap<String, i64>, usize)> = None;
    let mut facts = BTreeSet::new();
    let mut time = BTreeMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let toks = tokenize(raw, line)?;
        if toks.is_empty() {
            continue;
        }
        let mut cur = Cursor::new(&toks, line);
        if cur.eat(&Tok::At) {
            let directive = cur.ident("directive")?;
            match directive.as_str() {
                "concept" => {
                    if head.is_some() {
                        return Err(ParseError::new(line, 1, "duplicate @concept header"));
                    }
                    let h = literal(&mut cur)?;
                    ground_or_err(&h, line)?;
                    head = Some(h);
                }
                "params" => {
                    let id = term(&mut cur)?;
                    cur.expect(&Tok::Colon, "':'")?;
                    let mut map = BTreeMap::new();
                    while let Some(Tok::Ident(_)) = cur.peek() {
                        let name = cur.ident("parameter name")?;
                        match cur.bump().map(|t| &t.tok) {
                            Some(Tok::Cmp(op)) if op == "=" => {}
                            _ => return Err(cur.error("expected '='")),
                        }
                        let v = cur.int("integer parameter value")?;
                        if map.insert(name.clone(), v).is_some() {
                            return Err(cur.error(format!("duplicate parameter {name}")));
                        }
                        if !cur.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    params = Some((id, map, line));
                }
                "time" => {
                    let t = cur.int("time index")?;
                    cur.expect(&Tok::Colon, "':'")?;
                    let f = literal(&mut cur)?;
                    ground_or_err(&f, line)?;
                    time.insert(f.clone(), t);
                    facts.insert(f);
                }
                other => {
                    return Err(ParseError::new(line, 2, format!("unknown directive @{other}")));
                }
            }
        } else {
            let f = literal(&mut cur)?;
            ground_or_err(&f, line)?;
            facts.insert(f);
        }
        cur.eat(&Tok::Dot);
        if !cur.at_end() {
            return Err(cur.error("expected end of line after '.'"));
        }
    }

    let head = head.ok_or_else(|| ParseError::new(1, 1, "missing @concept header"))?;
    let params = match params {
        None => BTreeMap::new(),
        Some((id, map, line)) => {
            if head.args.first() != Some(&id) {
                return Err(ParseError::new(line, 1, format!("@params names {id}, but the concept is {head}")));
            }
            map
        }
    };
    Ok(GroundExample { head, params, facts, time })
}

/// Parses a theory: clauses `Head :- Body, ... .` or facts `Head.`
pub fn parse_theory(text: &str) -> Result<Theory, Error> {
    let toks = tokenize(text, 1)?;
    let mut cur = Cursor::new(&toks, text.lines().count().max(1));
    let mut clauses = Vec::new();
    while !cur.at_end() {
        let head = literal(&mut cur)?;
        let mut body = Vec::new();
        if cur.eat(&Tok::Neck) {
            loop {
                body.push(literal(&mut cur)?);
                if !cur.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        cur.expect(&Tok::Dot, "'.' at end of clause")?;
        clauses.push(Clause::new(head, body));
    }
    Theory::new(clauses)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub const LSHAPE: &str = include_str!("../../data/lshape.facts");

    #[test]
    fn lshape_example() {
        let x = parse_example(LSHAPE).unwrap();
        assert_eq!(x.facts.len(), 9);
        assert_eq!(x.head.to_string(), "L(s1)");
        assert_eq!(x.params["base"], 4);
        assert_eq!(x.params["height"], 5);
        assert!(x.facts.contains(&parse_literal("SpRel(b, a, \"NWTop\")").unwrap()));
    }

    #[test]
    fn empty_fact_set() {
        let x = parse_example("@concept C(x).\n").unwrap();
        assert!(x.facts.is_empty());
        assert!(x.params.is_empty());
    }

    #[test]
    fn variable_in_fact() {
        let e = parse_example("@concept C(x).\n\nWidth(a,W).\n").unwrap_err();
        assert_eq!(e.line, 3);
        assert!(e.message.contains("variable in fact at line 3"), "{e}");
    }

    #[test]
    fn duplicate_concept_header() {
        let e = parse_example("@concept C(x).\n@concept D(y).\n").unwrap_err();
        assert!(e.message.contains("duplicate @concept"));
        assert_eq!(e.line, 2);
    }

    #[test]
    fn syntax_error_has_position() {
        let e = parse_example("@concept C(x).\nRow(a b).\n").unwrap_err();
        assert_eq!((e.line, e.column), (2, 7));
    }

    #[test]
    fn time_indexed_facts() {
        let x = parse_example("@concept A(m).\n@time 1: attach(x, y).\n@time 0: fetch(x).\n").unwrap();
        assert_eq!(x.time.len(), 2);
        assert_eq!(x.time[&parse_literal("fetch(x)").unwrap()], 0);
    }

    #[test]
    fn render_round_trip() {
        let x = parse_example(LSHAPE).unwrap();
        let again = parse_example(&x.render()).unwrap();
        assert_eq!(x, again);
    }

    #[test]
    fn theory_round_trip() {
        let text = "L(S) :- Height(S, Hs), Sub(Hb, Hs, 1), SpRel(B, A, \"NWTop\").\nL(S) :- Row(A).\n";
        let t = parse_theory(text).unwrap();
        assert_eq!(t.clauses.len(), 2);
        assert_eq!(t.render(), text);
        let empty = parse_theory("C(X).").unwrap();
        assert!(empty.clauses[0].body.is_empty());
    }
}

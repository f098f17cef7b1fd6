//! Domain files (`.dom`): mode declarations, search bounds, concept
//! parameters, plan actions and expansion rules.
//!
//! ```text
//! keep-constant: "NWTop", "W"
//! bounds: i=3 j=3 maxbody=24
//! default-int: 1
//! param: height -> Height
//! mode: SpRel(+obj, +obj, #dir)
//! attribute: Base
//! action: Contains -> attach
//! expand: Tower(B) where Height(B, H) -> place(B, 0, k) for k in 0..H-1
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseError, Result};
use crate::logic::lexer::{tokenize, Cursor, Tok};
use crate::logic::parse::literal;
use crate::logic::term::{is_variable_name, Literal, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ArgMode {
    Input,
    Output,
    Constant,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeArg {
    pub mode: ArgMode,
    pub ty: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeDecl {
    pub pred: String,
    pub args: Vec<ModeArg>,
    pub recall: Option<usize>,
}

impl ModeDecl {
    pub fn arity(&self) -> usize {
        self.args.len()
    }
}

impl fmt::Display for ModeDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<String> = self
            .args
            .iter()
            .map(|a| {
                let m = match a.mode {
                    ArgMode::Input => '+',
                    ArgMode::Output => '-',
                    ArgMode::Constant => '#',
                };
                format!("{m}{}", a.ty)
            })
            .collect();
        write!(f, "{}({})", self.pred, args.join(", "))?;
        if let Some(r) = self.recall {
            write!(f, " recall={r}")?;
        }
        Ok(())
    }
}

/// Depth bound `i`, arity bound `j` and maximum body length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub depth: usize,
    pub arity: usize,
    pub max_body: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { depth: 3, arity: 3, max_body: 20 }
    }
}

/// An integer-affine argument expression, or a fixed term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ArgExpr {
    Const(Term),
    Affine { terms: Vec<(i64, String)>, constant: i64 },
}

impl ArgExpr {
    /// Evaluates under `env`. A bare variable evaluates to whatever it is
    /// bound to (objects included); arithmetic requires integers.
    pub fn eval(&self, env: &BTreeMap<String, Term>) -> Result<Term> {
        match self {
            ArgExpr::Const(t) => Ok(t.clone()),
            ArgExpr::Affine { terms, constant } => {
                if let ([(1, v)], 0) = (terms.as_slice(), constant) {
                    return env
                        .get(v)
                        .cloned()
                        .ok_or_else(|| Error::Plan(format!("unbound variable {v} in expansion")));
                }
                let mut acc = *constant;
                for (c, v) in terms {
                    let n = match env.get(v) {
                        Some(Term::Int(n)) => *n,
                        Some(other) => return Err(Error::Plan(format!("{v} = {other} is not an integer"))),
                        None => return Err(Error::Plan(format!("unbound variable {v} in expansion"))),
                    };
                    acc = c
                        .checked_mul(n)
                        .and_then(|p| acc.checked_add(p))
                        .ok_or_else(|| Error::Plan("integer overflow in expansion".into()))?;
                }
                Ok(Term::Int(acc))
            }
        }
    }
}

impl fmt::Display for ArgExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArgExpr::Const(t) => write!(f, "{t}"),
            ArgExpr::Affine { terms, constant } => {
                let mut first = true;
                for (c, v) in terms {
                    let (sign, mag) = if *c < 0 { ("-", -c) } else { ("+", *c) };
                    if first {
                        if sign == "-" {
                            f.write_str("-")?;
                        }
                    } else {
                        write!(f, " {sign} ")?;
                    }
                    if mag == 1 {
                        write!(f, "{v}")?;
                    } else {
                        write!(f, "{mag}*{v}")?;
                    }
                    first = false;
                }
                if first {
                    write!(f, "{constant}")
                } else if *constant > 0 {
                    write!(f, " + {constant}")
                } else if *constant < 0 {
                    write!(f, " - {}", -constant)
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// `for k in lo..hi` (inclusive bounds).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopRange {
    pub var: String,
    pub lo: ArgExpr,
    pub hi: ArgExpr,
}

/// One produced literal template, optionally repeated over a range.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpansionItem {
    pub pred: String,
    pub args: Vec<ArgExpr>,
    pub range: Option<LoopRange>,
}

/// Expands a composite fact into primitive actions (or further composites).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpansionRule {
    pub trigger: Literal,
    pub conditions: Vec<Literal>,
    pub items: Vec<ExpansionItem>,
}

/// Parsed domain file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Domain {
    pub keep_constant: BTreeSet<String>,
    pub bounds: Bounds,
    /// Value assumed for integer variables no constraint determines.
    pub default_int: Option<i64>,
    /// Concept parameter name → predicate carrying it, e.g. `height → Height`.
    pub params: BTreeMap<String, String>,
    pub modes: BTreeMap<String, ModeDecl>,
    pub attributes: BTreeSet<String>,
    /// Connector predicate → plan action name.
    pub actions: BTreeMap<String, String>,
    pub rules: Vec<ExpansionRule>,
}

impl Domain {
    pub fn mode(&self, pred: &str) -> Result<&ModeDecl> {
        self.modes.get(pred).ok_or_else(|| Error::MissingMode(pred.to_string()))
    }

    pub fn rule_for(&self, pred: &str) -> Option<&ExpansionRule> {
        self.rules.iter().find(|r| r.trigger.pred == pred)
    }

    /// Predicate carrying concept parameter values, if `pred` is one.
    pub fn param_name(&self, pred: &str) -> Option<&str> {
        self.params.iter().find(|(_, p)| p.as_str() == pred).map(|(n, _)| n.as_str())
    }

    /// Predicates read by expansion-rule conditions (sizes and the like).
    pub fn condition_preds(&self) -> BTreeSet<&str> {
        self.rules.iter().flat_map(|r| r.conditions.iter().map(|c| c.pred.as_str())).collect()
    }

    /// Type of argument `idx` of `pred`, when declared.
    pub fn arg_type(&self, pred: &str, idx: usize) -> Option<&str> {
        self.modes.get(pred).and_then(|m| m.args.get(idx)).map(|a| a.ty.as_str())
    }

    /// Rejects expansion rules whose composite dependency graph has a cycle.
    pub fn check_acyclic(&self) -> Result<()> {
        let triggers: BTreeSet<&str> = self.rules.iter().map(|r| r.trigger.pred.as_str()).collect();
        let edges: BTreeMap<&str, Vec<&str>> = self
            .rules
            .iter()
            .map(|r| {
                let next = r.items.iter().map(|i| i.pred.as_str()).filter(|p| triggers.contains(p)).collect();
                (r.trigger.pred.as_str(), next)
            })
            .collect();
        // 0 = unvisited, 1 = on stack, 2 = done
        fn visit<'a>(
            n: &'a str,
            edges: &BTreeMap<&'a str, Vec<&'a str>>,
            state: &mut BTreeMap<&'a str, u8>,
        ) -> std::result::Result<(), String> {
            match state.get(n) {
                Some(1) => return Err(n.to_string()),
                Some(2) => return Ok(()),
                _ => {}
            }
            state.insert(n, 1);
            for m in edges.get(n).into_iter().flatten() {
                visit(m, edges, state)?;
            }
            state.insert(n, 2);
            Ok(())
        }
        let mut state = BTreeMap::new();
        for n in edges.keys() {
            visit(n, &edges, &mut state).map_err(|p| Error::Domain(format!("expansion of {p} is cyclic")))?;
        }
        Ok(())
    }
}

fn affine(cur: &mut Cursor<'_>, vars: &BTreeSet<String>) -> Result<ArgExpr, ParseError> {
    if let Some(Tok::Str(s)) = cur.peek() {
        cur.bump();
        return Ok(ArgExpr::Const(Term::Str(s.clone())));
    }
    let mut terms: Vec<(i64, String)> = Vec::new();
    let mut constant = 0i64;
    let mut sign = 1i64;
    if cur.eat(&Tok::Op('-')) {
        sign = -1;
    }
    let mut saw_var = false;
    loop {
        match cur.peek() {
            Some(Tok::Int(n)) => {
                let n = *n;
                cur.bump();
                if cur.eat(&Tok::Op('*')) {
                    let v = cur.ident("variable after '*'")?;
                    terms.push((sign * n, v));
                    saw_var = true;
                } else {
                    constant += sign * n;
                }
            }
            Some(Tok::Ident(v)) => {
                let v = v.clone();
                cur.bump();
                if !vars.contains(&v) {
                    // a bare lowercase name that is not a loop variable is a constant
                    if terms.is_empty() && constant == 0 && sign == 1 && !is_variable_name(&v) {
                        return Ok(ArgExpr::Const(Term::Str(v)));
                    }
                    return Err(cur.error(format!("unknown variable {v}")));
                }
                terms.push((sign, v));
                saw_var = true;
            }
            _ => return Err(cur.error("expected an argument expression")),
        }
        sign = match cur.peek() {
            Some(Tok::Op('+')) => 1,
            Some(Tok::Op('-')) => -1,
            Some(Tok::Int(n)) if *n < 0 => {
                let n = *n;
                cur.bump();
                constant += n;
                match cur.peek() {
                    Some(Tok::Op('+')) => 1,
                    Some(Tok::Op('-')) => -1,
                    _ => break,
                }
            }
            _ => break,
        };
        cur.bump();
    }
    if !saw_var {
        return Ok(ArgExpr::Const(Term::Int(constant)));
    }
    Ok(ArgExpr::Affine { terms, constant })
}

fn parse_item(cur: &mut Cursor<'_>, rule_vars: &BTreeSet<String>) -> Result<ExpansionItem, ParseError> {
    let pred = cur.ident("action name")?;
    // scan ahead for a `for k in` clause so the loop variable is known
    let mut vars = rule_vars.clone();
    let mut k = 0;
    let mut depth = 0i32;
    while let Some(t) = cur.peek_at(k) {
        match t {
            Tok::LParen => depth += 1,
            Tok::RParen => depth -= 1,
            Tok::Semi => break,
            Tok::Ident(s) if depth == 0 && s == "for" => {
                if let Some(Tok::Ident(v)) = cur.peek_at(k + 1) {
                    vars.insert(v.clone());
                }
                break;
            }
            _ => {}
        }
        k += 1;
    }
    let mut args = Vec::new();
    if cur.eat(&Tok::LParen) && !cur.eat(&Tok::RParen) {
        loop {
            args.push(affine(cur, &vars)?);
            if cur.eat(&Tok::RParen) {
                break;
            }
            cur.expect(&Tok::Comma, "',' or ')'")?;
        }
    }
    let mut range = None;
    if let Some(Tok::Ident(s)) = cur.peek() {
        if s == "for" {
            cur.bump();
            let var = cur.ident("loop variable")?;
            match cur.ident("'in'") {
                Ok(s) if s == "in" => {}
                _ => return Err(cur.error("expected 'in'")),
            }
            let lo = affine(cur, &vars)?;
            cur.expect(&Tok::DotDot, "'..'")?;
            let hi = affine(cur, &vars)?;
            range = Some(LoopRange { var, lo, hi });
        }
    }
    Ok(ExpansionItem { pred, args, range })
}

/// Parses `Trigger(X) where Cond(X, N), ... -> item; item ...`.
fn parse_expand(rest: &str, line: usize) -> Result<ExpansionRule, ParseError> {
    let toks = tokenize(rest, line)?;
    let mut cur = Cursor::new(&toks, line);
    let trigger = literal(&mut cur)?;
    let mut conditions = Vec::new();
    if let Some(Tok::Ident(w)) = cur.peek() {
        if w == "where" {
            cur.bump();
            loop {
                conditions.push(literal(&mut cur)?);
                if !cur.eat(&Tok::Comma) {
                    break;
                }
            }
        }
    }
    cur.expect(&Tok::Arrow, "'->'")?;
    let rule_vars: BTreeSet<String> =
        std::iter::once(&trigger).chain(&conditions).flat_map(|l| l.vars().map(str::to_string)).collect();
    let mut items = Vec::new();
    loop {
        items.push(parse_item(&mut cur, &rule_vars)?);
        if !cur.eat(&Tok::Semi) {
            break;
        }
    }
    if !cur.at_end() {
        return Err(cur.error("trailing input in expansion rule"));
    }
    Ok(ExpansionRule { trigger, conditions, items })
}

fn parse_mode(rest: &str, line: usize, col: usize) -> Result<ModeDecl, ParseError> {
    let err = |m: &str| ParseError::new(line, col, format!("mode declaration: {m}"));
    let open = rest.find('(').ok_or_else(|| err("expected '('"))?;
    let close = rest.rfind(')').ok_or_else(|| err("expected ')'"))?;
    let pred = rest[..open].trim().to_string();
    if pred.is_empty() || !pred.chars().all(|c| c.is_alphanumeric() || c == '_') {
        return Err(err("bad predicate name"));
    }
    let mut args = Vec::new();
    let inner = rest[open + 1..close].trim();
    if !inner.is_empty() {
        for a in inner.split(',') {
            let a = a.trim();
            let mode = match a.chars().next() {
                Some('+') => ArgMode::Input,
                Some('-') => ArgMode::Output,
                Some('#') => ArgMode::Constant,
                _ => return Err(err(&format!("argument '{a}' needs a +, - or # prefix"))),
            };
            let ty = a[1..].trim().to_string();
            if ty.is_empty() {
                return Err(err("missing argument type"));
            }
            args.push(ModeArg { mode, ty });
        }
    }
    let tail = rest[close + 1..].trim();
    let tail = tail.trim_start_matches('[').trim_end_matches(']').trim();
    let recall = if tail.is_empty() {
        None
    } else {
        let n = tail
            .strip_prefix("recall")
            .map(|t| t.trim_start().trim_start_matches('=').trim())
            .ok_or_else(|| err("expected recall=N"))?;
        Some(n.parse::<usize>().map_err(|_| err("recall must be a positive integer"))?)
    };
    Ok(ModeDecl { pred, args, recall })
}

fn ident_list(rest: &str, line: usize) -> Result<Vec<String>, ParseError> {
    let toks = tokenize(rest, line)?;
    let mut cur = Cursor::new(&toks, line);
    let mut out = Vec::new();
    while !cur.at_end() {
        match cur.bump().map(|t| &t.tok) {
            Some(Tok::Ident(s)) | Some(Tok::Str(s)) => out.push(s.clone()),
            _ => return Err(cur.error("expected a name")),
        }
        if !cur.at_end() {
            cur.expect(&Tok::Comma, "','")?;
        }
    }
    Ok(out)
}

fn arrow_pair(rest: &str, line: usize) -> Result<(String, String), ParseError> {
    let toks = tokenize(rest, line)?;
    let mut cur = Cursor::new(&toks, line);
    let a = cur.ident("name")?;
    cur.expect(&Tok::Arrow, "'->'")?;
    let b = cur.ident("name")?;
    if !cur.at_end() {
        return Err(cur.error("trailing input"));
    }
    Ok((a, b))
}

/// Parses domain-file text.
pub fn parse_domain(text: &str) -> Result<Domain> {
    let mut d = Domain::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let colon = trimmed.find(':').ok_or_else(|| ParseError::new(line, 1, "expected 'section: ...'"))?;
        let key = trimmed[..colon].trim();
        let rest = &trimmed[colon + 1..];
        let col = raw.len() - raw.trim_start().len() + colon + 2;
        match key {
            "keep-constant" => d.keep_constant.extend(ident_list(rest, line)?),
            "bounds" => {
                let toks = tokenize(rest, line)?;
                let mut cur = Cursor::new(&toks, line);
                while !cur.at_end() {
                    let name = cur.ident("bound name")?;
                    match cur.bump().map(|t| &t.tok) {
                        Some(Tok::Cmp(op)) if op == "=" => {}
                        _ => return Err(cur.error("expected '='").into()),
                    }
                    let v = cur.int("bound value")?;
                    if v < 1 {
                        return Err(cur.error("bounds must be at least 1").into());
                    }
                    match name.as_str() {
                        "i" => d.bounds.depth = v as usize,
                        "j" => d.bounds.arity = v as usize,
                        "maxbody" => d.bounds.max_body = v as usize,
                        _ => return Err(cur.error(format!("unknown bound {name}")).into()),
                    }
                    cur.eat(&Tok::Comma);
                }
            }
            "default-int" => {
                let toks = tokenize(rest, line)?;
                let mut cur = Cursor::new(&toks, line);
                d.default_int = Some(cur.int("integer")?);
            }
            "param" => {
                let (name, pred) = arrow_pair(rest, line)?;
                d.params.insert(name, pred);
            }
            "mode" => {
                let m = parse_mode(rest, line, col)?;
                if d.modes.insert(m.pred.clone(), m.clone()).is_some() {
                    return Err(ParseError::new(line, col, format!("duplicate mode for {}", m.pred)).into());
                }
            }
            "attribute" => d.attributes.extend(ident_list(rest, line)?),
            "action" => {
                let (pred, action) = arrow_pair(rest, line)?;
                d.actions.insert(pred, action);
            }
            "expand" => d.rules.push(parse_expand(rest, line)?),
            other => return Err(ParseError::new(line, 1, format!("unknown section '{other}'")).into()),
        }
    }
    d.check_acyclic()?;
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BLOCKS: &str = include_str!("../data/blocks.dom");

    #[test]
    fn bundled_domain() {
        let d = parse_domain(BLOCKS).unwrap();
        assert!(d.keep_constant.contains("NWTop"));
        assert_eq!(d.bounds, Bounds { depth: 3, arity: 3, max_body: 24 });
        assert_eq!(d.default_int, Some(1));
        assert_eq!(d.params["height"], "Height");
        assert_eq!(d.param_name("Base"), Some("base"));
        let m = d.mode("SpRel").unwrap();
        assert_eq!(m.to_string(), "SpRel(+obj, +obj, #dir)");
        assert!(matches!(d.mode("Cube"), Err(Error::MissingMode(p)) if p == "Cube"));
        assert_eq!(d.actions["Contains"], "attach");
        let tower = d.rule_for("Tower").unwrap();
        assert_eq!(tower.conditions[0].to_string(), "Height(B, H)");
        let r = tower.items[0].range.as_ref().unwrap();
        assert_eq!(r.var, "k");
        assert_eq!(r.hi.to_string(), "H - 1");
        assert_eq!(tower.items[0].args[0].to_string(), "B");
        assert_eq!(tower.items[0].args[1], ArgExpr::Const(Term::Int(0)));
    }

    #[test]
    fn affine_evaluation() {
        let d = parse_domain("expand: Stair(S) where Steps(S, N) -> step(S, 2*k + 1, N - k) for k in 0..N-1").unwrap();
        let item = &d.rules[0].items[0];
        let env: BTreeMap<String, Term> =
            [("S".to_string(), Term::str("s")), ("N".into(), Term::Int(3)), ("k".into(), Term::Int(2))].into();
        let vals: Vec<Term> = item.args.iter().map(|a| a.eval(&env).unwrap()).collect();
        assert_eq!(vals, vec![Term::str("s"), Term::Int(5), Term::Int(1)]);
    }

    #[test]
    fn cyclic_rules_rejected() {
        let e = parse_domain("expand: A(X) -> B(X)\nexpand: B(X) -> A(X)\n").unwrap_err();
        assert!(e.to_string().contains("cyclic"), "{e}");
        parse_domain("expand: A(X) -> B(X); go(X)\nexpand: B(X) -> go(X)\n").unwrap();
    }

    #[test]
    fn errors_carry_lines() {
        let e = parse_domain("mode: P(+a)\nmode: Q(a)\n").unwrap_err();
        match e {
            Error::Parse(p) => assert_eq!(p.line, 2),
            other => panic!("{other}"),
        }
        assert!(parse_domain("bogus: 1").is_err());
        assert!(parse_domain("bounds: i=0").is_err());
    }
}

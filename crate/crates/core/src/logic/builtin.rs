//! Integer constraint built-ins (`Equal`, `Sub`, `Greater`, `Geq`, ...).
//!
//! Every built-in is a linear relation over its argument slots, written in
//! the constraint-library syntax:
//!
//! ```text
//! constraint: Sub(x:int, y:int, n:int) means y - x = n
//! ```

use std::collections::BTreeMap;
use std::fmt;

use super::lexer::{tokenize, Cursor, Tok};
use super::term::{Literal, Substitution, Term};
use crate::error::{Error, ParseError, Result};

/// `Σ coeff·slot + constant`, slots indexed by argument position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinExpr {
    pub terms: Vec<(i64, usize)>,
    pub constant: i64,
}

impl LinExpr {
    fn eval(&self, vals: &[Option<i64>]) -> Option<i64> {
        let mut acc = self.constant;
        for &(c, slot) in &self.terms {
            acc = acc.checked_add(c.checked_mul(vals[slot]?)?)?;
        }
        Some(acc)
    }

    fn coeff(&self, slot: usize) -> i64 {
        self.terms.iter().filter(|(_, s)| *s == slot).map(|(c, _)| c).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    fn holds(self, a: i64, b: i64) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }
}

/// One constraint template: a predicate with typed slots and its meaning.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BuiltinDef {
    pub pred: String,
    pub slots: Vec<(String, String)>,
    pub lhs: LinExpr,
    pub op: CmpOp,
    pub rhs: LinExpr,
    pub source: String,
}

impl BuiltinDef {
    pub fn arity(&self) -> usize {
        self.slots.len()
    }

    /// Evaluates the relation on integer arguments.
    pub fn holds(&self, args: &[i64]) -> bool {
        let vals: Vec<Option<i64>> = args.iter().copied().map(Some).collect();
        match (self.lhs.eval(&vals), self.rhs.eval(&vals)) {
            (Some(a), Some(b)) => self.op.holds(a, b),
            _ => false,
        }
    }

    /// Solves for the single unknown `slot` given the other slot values,
    /// when the relation is an equation linear in that slot.
    pub fn solve(&self, slot: usize, vals: &[Option<i64>]) -> Option<i64> {
        if self.op != CmpOp::Eq {
            return None;
        }
        let a = self.lhs.coeff(slot) - self.rhs.coeff(slot);
        if a == 0 {
            return None;
        }
        let mut probe = vals.to_vec();
        probe[slot] = Some(0);
        let b = self.lhs.eval(&probe)? - self.rhs.eval(&probe)?;
        if b % a != 0 {
            return None;
        }
        Some(-b / a)
    }

    /// True when swapping the two arguments of a binary template never
    /// changes its truth value.
    pub fn is_symmetric(&self) -> bool {
        if self.arity() != 2 {
            return false;
        }
        let probes = [-7, -1, 0, 1, 2, 3, 5, 11];
        probes
            .iter()
            .flat_map(|&a| probes.iter().map(move |&b| (a, b)))
            .all(|(a, b)| self.holds(&[a, b]) == self.holds(&[b, a]))
    }
}

impl fmt::Display for BuiltinDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

pub const DEFAULT_LIBRARY: &str = "\
constraint: Equal(x:int, y:int) means x = y
constraint: Sub(x:int, y:int, n:int) means y - x = n
constraint: Greater(x:int, y:int) means y > x
constraint: Geq(x:int, y:int) means y >= x
";

/// Registered built-in predicates, keyed by name.
#[derive(Clone, Debug)]
pub struct BuiltinRegistry {
    defs: BTreeMap<String, BuiltinDef>,
}

impl Default for BuiltinRegistry {
    fn default() -> Self {
        let mut r = BuiltinRegistry { defs: BTreeMap::new() };
        for line in DEFAULT_LIBRARY.lines() {
            let def = parse_constraint_line(line, 1).expect("default library parses");
            r.defs.insert(def.pred.clone(), def);
        }
        r
    }
}

impl BuiltinRegistry {
    pub fn register(&mut self, def: BuiltinDef) {
        self.defs.insert(def.pred.clone(), def);
    }

    pub fn get(&self, pred: &str) -> Option<&BuiltinDef> {
        self.defs.get(pred)
    }

    pub fn is_builtin(&self, lit: &Literal) -> bool {
        self.defs.get(&lit.pred).is_some_and(|d| d.arity() == lit.arity())
    }

    pub fn iter(&self) -> impl Iterator<Item = &BuiltinDef> {
        self.defs.values()
    }

    /// Evaluates a ground built-in literal.
    pub fn eval(&self, lit: &Literal) -> Result<bool> {
        let def = self
            .defs
            .get(&lit.pred)
            .filter(|d| d.arity() == lit.arity())
            .ok_or_else(|| Error::UnknownBuiltin(lit.signature()))?;
        let args: Option<Vec<i64>> = lit.args.iter().map(Term::as_int).collect();
        let args = args.ok_or_else(|| Error::NonIntegerArgument(lit.to_string()))?;
        Ok(def.holds(&args))
    }

    /// Evaluates `lit` under `s` if every argument becomes an integer;
    /// `None` while some argument is still unbound.
    pub(crate) fn eval_under(&self, lit: &Literal, s: &Substitution) -> Option<bool> {
        let def = self.defs.get(&lit.pred)?;
        let mut args = Vec::with_capacity(lit.args.len());
        for a in &lit.args {
            match s.apply_term(a) {
                Term::Int(n) => args.push(n),
                Term::Var(_) => return None,
                Term::Str(_) => return Some(false),
            }
        }
        Some(def.holds(&args))
    }
}

/// Evaluates a ground built-in literal against the default registry.
pub fn eval_builtin(lit: &Literal) -> Result<bool> {
    BuiltinRegistry::default().eval(lit)
}

fn lin_expr(cur: &mut Cursor<'_>, slots: &[(String, String)]) -> Result<LinExpr, ParseError> {
    let mut e = LinExpr { terms: Vec::new(), constant: 0 };
    let mut sign = 1i64;
    if cur.eat(&Tok::Op('-')) {
        sign = -1;
    }
    loop {
        let coeff = match cur.peek() {
            Some(Tok::Int(n)) => {
                let n = *n;
                cur.bump();
                if cur.eat(&Tok::Op('*')) {
                    Some(n)
                } else {
                    e.constant += sign * n;
                    None
                }
            }
            _ => Some(1),
        };
        if let Some(c) = coeff {
            let name = cur.ident("slot name")?;
            let slot =
                slots.iter().position(|(s, _)| *s == name).ok_or_else(|| cur.error(format!("unknown slot {name}")))?;
            e.terms.push((sign * c, slot));
        }
        sign = match cur.peek() {
            Some(Tok::Op('+')) => 1,
            Some(Tok::Op('-')) => -1,
            Some(Tok::Int(n)) if *n < 0 => {
                // `y -1` lexes as an integer literal
                let n = *n;
                cur.bump();
                e.constant += n;
                continue;
            }
            _ => break,
        };
        cur.bump();
    }
    Ok(e)
}

/// Parses one `constraint: Name(slot:type, ...) means <lhs> <op> <rhs>` line.
pub fn parse_constraint_line(line: &str, line_no: usize) -> Result<BuiltinDef, ParseError> {
    let toks = tokenize(line, line_no)?;
    let mut cur = Cursor::new(&toks, line_no);
    let kw = cur.ident("'constraint'")?;
    if kw != "constraint" {
        return Err(ParseError::new(line_no, 1, "expected 'constraint:'"));
    }
    cur.expect(&Tok::Colon, "':'")?;
    let pred = cur.ident("constraint name")?;
    cur.expect(&Tok::LParen, "'('")?;
    let mut slots = Vec::new();
    loop {
        let name = cur.ident("slot name")?;
        cur.expect(&Tok::Colon, "':' before slot type")?;
        let ty = cur.ident("slot type")?;
        slots.push((name, ty));
        if cur.eat(&Tok::RParen) {
            break;
        }
        cur.expect(&Tok::Comma, "',' or ')'")?;
    }
    let means = cur.ident("'means'")?;
    if means != "means" {
        return Err(cur.error("expected 'means'"));
    }
    let lhs = lin_expr(&mut cur, &slots)?;
    let op = match cur.bump().map(|t| &t.tok) {
        Some(Tok::Cmp(op)) => match op.as_str() {
            "=" | "==" => CmpOp::Eq,
            "!=" => CmpOp::Ne,
            "<" => CmpOp::Lt,
            "<=" => CmpOp::Le,
            ">" => CmpOp::Gt,
            ">=" => CmpOp::Ge,
            _ => return Err(cur.error("unknown comparison")),
        },
        _ => return Err(cur.error("expected a comparison")),
    };
    let rhs = lin_expr(&mut cur, &slots)?;
    if !cur.at_end() {
        return Err(cur.error("trailing input"));
    }
    Ok(BuiltinDef { pred, slots, lhs, op, rhs, source: line.trim().to_string() })
}

//! Constraint advice: enumerating candidate constraints that hold on the
//! example, asking a teacher to pick among them, and conjoining the picks.

pub mod teacher;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::logic::builtin::{parse_constraint_line, BuiltinDef, BuiltinRegistry, DEFAULT_LIBRARY};
use crate::logic::term::{Clause, Literal, Substitution, Term};
use crate::plan::is_param_literal;

pub use teacher::{FnTeacher, ReplayTeacher, ScriptedOracle, Teacher, TeacherResponse, TerminalTeacher};

/// Default number of candidates shown per query.
pub const DEFAULT_K: usize = 5;

/// The library of constraint templates offered as advice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintLibrary {
    pub templates: Vec<BuiltinDef>,
}

impl Default for ConstraintLibrary {
    fn default() -> Self {
        ConstraintLibrary::parse(DEFAULT_LIBRARY).expect("default library parses")
    }
}

impl ConstraintLibrary {
    /// Parses a `.constraints` file: one `constraint:` line per template,
    /// `#` comments and blank lines ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut templates: Vec<BuiltinDef> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let def = parse_constraint_line(t, i + 1)?;
            if templates.iter().any(|d| d.pred == def.pred) {
                return Err(Error::InvalidParameter(format!("constraint {} defined twice", def.pred)));
            }
            templates.push(def);
        }
        Ok(ConstraintLibrary { templates })
    }

    /// Restricts the library to the named templates, in the given order.
    pub fn subset(&self, names: &[&str]) -> Self {
        ConstraintLibrary {
            templates: names.iter().filter_map(|n| self.templates.iter().find(|d| d.pred == *n).cloned()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    /// Largest template arity `q`.
    pub fn max_arity(&self) -> usize {
        self.templates.iter().map(BuiltinDef::arity).max().unwrap_or(0)
    }

    /// A registry holding the default built-ins plus every template here.
    pub fn registry(&self) -> BuiltinRegistry {
        let mut r = BuiltinRegistry::default();
        for d in &self.templates {
            r.register(d.clone());
        }
        r
    }

    fn position(&self, pred: &str) -> usize {
        self.templates.iter().position(|d| d.pred == pred).unwrap_or(usize::MAX)
    }
}

/// Integer-valued variables of `c` under `theta`, in first-occurrence order.
pub fn numeric_vars(c: &Clause, theta: &Substitution) -> Vec<(String, i64)> {
    c.vars().into_iter().filter_map(|v| theta.get(&v).and_then(Term::as_int).map(|n| (v, n))).collect()
}

fn ordered_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in 0..n {
            if !cur.contains(&i) {
                cur.push(i);
                go(n, k, cur, out);
                cur.pop();
            }
        }
    }
    go(n, k, &mut cur, &mut out);
    out
}

/// Every instantiation of a library template over distinct integer
/// variables of `c` that is true under `theta`.
///
/// Binary templates take ordered pairs of variables (one order only for
/// symmetric templates). Templates with more slots fill all but the last
/// slot with variables and derive the last one as a constant by solving
/// the template; the derived constant must be positive, so `Sub` only
/// relates a smaller value to a larger one. Order: library order, then
/// variable tuples in first-occurrence order.
pub fn enumerate_constraints(c: &Clause, theta: &Substitution, lib: &ConstraintLibrary) -> Vec<Literal> {
    let vars = numeric_vars(c, theta);
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for def in &lib.templates {
        let arity = def.arity();
        if arity < 2 {
            continue;
        }
        let var_slots = if arity == 2 { 2 } else { arity - 1 };
        let symmetric = def.is_symmetric();
        for tuple in ordered_tuples(vars.len(), var_slots) {
            if symmetric && tuple[0] > tuple[1] {
                continue;
            }
            let mut args: Vec<Term> = tuple.iter().map(|&i| Term::Var(vars[i].0.clone())).collect();
            let mut vals: Vec<Option<i64>> = tuple.iter().map(|&i| Some(vars[i].1)).collect();
            if arity > 2 {
                vals.push(None);
                let Some(n) = def.solve(arity - 1, &vals) else { continue };
                if n < 1 {
                    continue;
                }
                vals[arity - 1] = Some(n);
                args.push(Term::Int(n));
            }
            let ints: Vec<i64> = vals.iter().map(|v| v.expect("filled")).collect();
            if def.holds(&ints) {
                let lit = Literal::new(def.pred.clone(), args);
                if seen.insert(lit.clone()) {
                    out.push(lit);
                }
            }
        }
    }
    out
}

/// Ranks candidates for presentation.
///
/// First by how they tie to the concept parameters: constraints linking a
/// parameter variable to a structural variable come first, then those
/// between structural variables, then those between parameters only.
/// Within a tier: `Sub ≻ Equal ≻ Greater ≻ Geq` (other templates after, in
/// library order), then rendered text.
pub fn rank_candidates(cands: &mut [Literal], c: &Clause, domain: &Domain, lib: &ConstraintLibrary) {
    let head_vars = c.head_vars();
    let params: BTreeSet<&str> =
        c.body.iter().filter(|l| is_param_literal(l, &head_vars, domain)).filter_map(|l| l.args[1].as_var()).collect();
    let specificity = |pred: &str| match pred {
        "Sub" => 0,
        "Equal" => 1,
        "Greater" => 2,
        "Geq" => 3,
        other => 4 + lib.position(other),
    };
    let tier = |l: &Literal| {
        let vs: Vec<&str> = l.vars().collect();
        let p = vs.iter().filter(|v| params.contains(*v)).count();
        if p == 0 {
            1
        } else if p == vs.len() {
            2
        } else {
            0
        }
    };
    cands.sort_by_cached_key(|l| (tier(l), specificity(&l.pred), l.to_string()));
}

/// A preference query shown to the teacher.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdviceQuery {
    pub id: u64,
    pub iteration: usize,
    pub candidates: Vec<Literal>,
    pub rendered: Vec<String>,
    /// Ground values of each candidate's arguments on the example.
    pub witnesses: Vec<Vec<i64>>,
    /// The clause the candidates constrain.
    pub context: Clause,
    /// Integer values of the clause's variables on the example.
    pub bindings: BTreeMap<String, i64>,
}

/// The teacher's answer to one query.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdvicePreference {
    pub id: u64,
    pub chosen: Vec<Literal>,
    pub indices: Vec<usize>,
    #[serde(default)]
    pub timed_out: bool,
}

/// Plain-language rendering of a candidate with its witness values.
pub fn render_candidate(l: &Literal, theta: &Substitution, lib: &ConstraintLibrary) -> (String, Vec<i64>) {
    let vals: Vec<i64> = l.args.iter().filter_map(|a| theta.apply_term(a).as_int()).collect();
    let gloss = match (l.pred.as_str(), vals.as_slice()) {
        ("Equal", [x, y]) => format!("{} equals {} ({x} = {y})", l.args[0], l.args[1]),
        ("Sub", [x, y, n]) => {
            format!("{} is {n} less than {} ({x} = {y} - {n})", l.args[0], l.args[1])
        }
        ("Greater", [x, y]) => format!("{} is greater than {} ({y} > {x})", l.args[1], l.args[0]),
        ("Geq", [x, y]) => format!("{} is at least {} ({y} >= {x})", l.args[1], l.args[0]),
        _ => {
            let meaning = lib.templates.iter().find(|d| d.pred == l.pred).map(|d| d.to_string()).unwrap_or_default();
            format!("{l} with values {vals:?} [{meaning}]")
        }
    };
    (format!("{l}: {gloss}"), vals)
}

/// Conjoins preferred literals to the clause body, skipping duplicates and
/// literals that would exceed the body-length bound. Returns the new clause
/// and the literals skipped for length.
pub fn apply_advice(c: &Clause, chosen: &[Literal], max_body: usize) -> (Clause, Vec<Literal>) {
    let mut body = c.body.clone();
    let mut skipped = Vec::new();
    for l in chosen {
        if body.contains(l) {
            continue;
        }
        if body.len() >= max_body {
            log::warn!("advice {l} skipped: body already has {max_body} literals");
            skipped.push(l.clone());
            continue;
        }
        body.push(l.clone());
    }
    (Clause::new(c.head.clone(), body).canonical(), skipped)
}

/// One query/response exchange as recorded in the session log.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exchange {
    pub query: AdviceQuery,
    pub preference: AdvicePreference,
}

/// Advice state across the iterations of one induction run.
pub struct AdviceSession {
    pub lib: ConstraintLibrary,
    pub k: usize,
    /// Maximum number of queries; `None` means unlimited.
    pub query_budget: Option<usize>,
    declined: BTreeSet<Literal>,
    pub log: Vec<Exchange>,
    next_id: u64,
}

impl AdviceSession {
    pub fn new(lib: ConstraintLibrary, k: usize) -> Self {
        AdviceSession { lib, k: k.max(1), query_budget: None, declined: BTreeSet::new(), log: Vec::new(), next_id: 1 }
    }

    pub fn queries(&self) -> usize {
        self.log.len()
    }

    /// Id the next query will carry.
    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    /// Continues id numbering from an earlier session.
    pub fn set_first_id(&mut self, id: u64) {
        self.next_id = id;
    }

    pub fn budget_left(&self) -> bool {
        self.query_budget.is_none_or(|b| self.log.len() < b)
    }

    /// Candidates for the next query on `c`: true on the example, not
    /// already in the body, not declined before; ranked and cut to `k`.
    pub fn candidates(&self, c: &Clause, theta: &Substitution, domain: &Domain) -> Vec<Literal> {
        let mut cands: Vec<Literal> = enumerate_constraints(c, theta, &self.lib)
            .into_iter()
            .filter(|l| !c.body.contains(l) && !self.declined.contains(l))
            .collect();
        rank_candidates(&mut cands, c, domain, &self.lib);
        cands.truncate(self.k);
        cands
    }

    /// Builds the query for `cands` without asking anyone.
    pub fn build_query(&self, c: &Clause, theta: &Substitution, iteration: usize, cands: Vec<Literal>) -> AdviceQuery {
        let (rendered, witnesses) = cands.iter().map(|l| render_candidate(l, theta, &self.lib)).unzip();
        AdviceQuery {
            id: self.next_id,
            iteration,
            candidates: cands,
            rendered,
            witnesses,
            context: c.clone(),
            bindings: numeric_vars(c, theta).into_iter().collect(),
        }
    }

    /// Poses one query. An empty candidate list returns an empty preference
    /// without contacting the teacher. Offered-but-unchosen candidates are
    /// not offered again in later queries.
    pub fn pose(
        &mut self,
        c: &Clause,
        theta: &Substitution,
        iteration: usize,
        domain: &Domain,
        teacher: &mut dyn Teacher,
    ) -> Result<AdvicePreference> {
        let cands = self.candidates(c, theta, domain);
        if cands.is_empty() {
            return Ok(AdvicePreference::default());
        }
        let query = self.build_query(c, theta, iteration, cands);
        self.next_id += 1;
        let preference = match teacher.answer(&query)? {
            TeacherResponse::Timeout => {
                log::info!("query {} timed out; continuing without advice", query.id);
                AdvicePreference { id: query.id, chosen: vec![], indices: vec![], timed_out: true }
            }
            TeacherResponse::Chosen(mut idx) => {
                idx.sort_unstable();
                idx.dedup();
                if let Some(bad) = idx.iter().find(|&&i| i >= query.candidates.len()) {
                    return Err(Error::Teacher(format!(
                        "choice {bad} is out of range for query {} with {} candidates",
                        query.id,
                        query.candidates.len()
                    )));
                }
                let chosen = idx.iter().map(|&i| query.candidates[i].clone()).collect();
                AdvicePreference { id: query.id, chosen, indices: idx, timed_out: false }
            }
        };
        for (i, l) in query.candidates.iter().enumerate() {
            if !preference.indices.contains(&i) && !preference.timed_out {
                self.declined.insert(l.clone());
            }
        }
        self.log.push(Exchange { query, preference: preference.clone() });
        Ok(preference)
    }
}

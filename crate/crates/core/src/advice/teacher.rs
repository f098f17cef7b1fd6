//! Teachers answer advice queries: a scripted oracle that knows the target
//! theory, a replayer for recorded sessions, a terminal prompt, and a
//! closure adapter.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{AdviceQuery, Exchange};
use crate::error::{Error, Result};
use crate::induction::IterationTrace;
use crate::logic::builtin::BuiltinRegistry;
use crate::logic::cover::Matcher;
use crate::logic::term::{Clause, Literal, Substitution, Term, Theory};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TeacherResponse {
    /// Indices into the query's candidate list; empty means "none".
    Chosen(Vec<usize>),
    Timeout,
}

/// Anything that can answer preference queries.
pub trait Teacher {
    fn answer(&mut self, query: &AdviceQuery) -> Result<TeacherResponse>;

    /// Called after every iteration of the induction loop.
    fn on_trace(&mut self, _trace: &IterationTrace) {}

    /// Called once when the loop finishes.
    fn on_done(&mut self, _theory: &Theory) {}
}

/// Adapts a closure into a teacher.
pub struct FnTeacher<F>(pub F);

impl<F: FnMut(&AdviceQuery) -> Result<TeacherResponse>> Teacher for FnTeacher<F> {
    fn answer(&mut self, query: &AdviceQuery) -> Result<TeacherResponse> {
        (self.0)(query)
    }
}

/// Headless teacher that knows the target theory. It prefers exactly the
/// offered candidates that appear, up to variable renaming, in the body of
/// the target clause the query's clause corresponds to.
///
/// Correspondence is found by matching the structure of the query's clause
/// into the target clause, with every integer-valued argument occurrence
/// treated as a wildcard; each variable then stands for the set of target
/// terms its occurrences landed on.
pub struct ScriptedOracle {
    truth: Theory,
    registry: BuiltinRegistry,
}

impl ScriptedOracle {
    pub fn new(truth: Theory) -> Self {
        ScriptedOracle { truth, registry: BuiltinRegistry::default() }
    }

    pub fn with_registry(truth: Theory, registry: BuiltinRegistry) -> Self {
        ScriptedOracle { truth, registry }
    }

    /// Images of the context clause's variables in `target`, if the
    /// structure matches.
    fn images(
        &self,
        ctx: &Clause,
        numeric: &BTreeSet<String>,
        target: &Clause,
    ) -> Option<BTreeMap<String, BTreeSet<Term>>> {
        if ctx.head.pred != target.head.pred || ctx.head.arity() != target.head.arity() {
            return None;
        }
        let truth_preds: BTreeSet<&str> = target.body.iter().map(|l| l.pred.as_str()).collect();
        let structural: Vec<&Literal> = target.body.iter().filter(|l| !self.registry.is_builtin(l)).collect();
        let mut fresh = 0usize;
        let mut origin: BTreeMap<String, String> = BTreeMap::new();
        let mut skeleton = Vec::new();
        for l in ctx.body.iter().filter(|l| !self.registry.is_builtin(l)) {
            let args = l
                .args
                .iter()
                .map(|a| match a {
                    Term::Var(v) if numeric.contains(v) => {
                        fresh += 1;
                        let w = format!("_n{fresh}");
                        origin.insert(w.clone(), v.clone());
                        Term::Var(w)
                    }
                    other => other.clone(),
                })
                .collect();
            skeleton.push(Literal::new(l.pred.clone(), args));
        }
        let mut init = Substitution::new();
        for (p, t) in ctx.head.args.iter().zip(&target.head.args) {
            if let Term::Var(v) = p {
                init.bind(v.clone(), t.clone());
            }
        }
        let try_match = |lits: Vec<&Literal>| {
            let mut m = Matcher::new(structural.iter().copied(), &self.registry, 100_000);
            m.find(&lits, &[], init.clone()).ok().flatten()
        };
        let found = try_match(skeleton.iter().collect()).or_else(|| {
            // literals of predicates the target never uses cannot correspond to anything
            try_match(skeleton.iter().filter(|l| truth_preds.contains(l.pred.as_str())).collect())
        })?;
        let mut images: BTreeMap<String, BTreeSet<Term>> = BTreeMap::new();
        for (v, t) in found.iter() {
            let key = origin.get(v).unwrap_or(v).clone();
            images.entry(key).or_default().insert(t.clone());
        }
        Some(images)
    }

    /// Does candidate `cand` map to a literal of `target`'s body?
    fn endorsed(&self, cand: &Literal, images: &BTreeMap<String, BTreeSet<Term>>, target: &Clause) -> bool {
        let symmetric = self.registry.get(&cand.pred).is_some_and(|d| d.is_symmetric());
        target.body.iter().filter(|l| l.pred == cand.pred && l.arity() == cand.arity()).any(|t| {
            let fits = |order: &[usize]| {
                order.iter().zip(&t.args).all(|(&i, targ)| match &cand.args[i] {
                    Term::Var(v) => images.get(v).is_some_and(|s| s.contains(targ)),
                    other => other == targ,
                })
            };
            let ident: Vec<usize> = (0..cand.arity()).collect();
            fits(&ident) || (symmetric && cand.arity() == 2 && fits(&[1, 0]))
        })
    }

    /// Indices of the candidates this oracle prefers.
    pub fn choose(&self, q: &AdviceQuery) -> Vec<usize> {
        let numeric: BTreeSet<String> = q.bindings.keys().cloned().collect();
        for target in &self.truth.clauses {
            let Some(images) = self.images(&q.context, &numeric, target) else { continue };
            return (0..q.candidates.len()).filter(|&i| self.endorsed(&q.candidates[i], &images, target)).collect();
        }
        Vec::new()
    }
}

impl Teacher for ScriptedOracle {
    fn answer(&mut self, query: &AdviceQuery) -> Result<TeacherResponse> {
        Ok(TeacherResponse::Chosen(self.choose(query)))
    }
}

/// Replays recorded answers in order, checking that each query offers the
/// same candidates as when it was recorded.
pub struct ReplayTeacher {
    queue: VecDeque<Exchange>,
}

impl ReplayTeacher {
    pub fn new(exchanges: impl IntoIterator<Item = Exchange>) -> Self {
        ReplayTeacher { queue: exchanges.into_iter().collect() }
    }

    pub fn remaining(&self) -> usize {
        self.queue.len()
    }
}

impl Teacher for ReplayTeacher {
    fn answer(&mut self, query: &AdviceQuery) -> Result<TeacherResponse> {
        let ex = self
            .queue
            .pop_front()
            .ok_or_else(|| Error::Session(format!("replay log has no answer for query {}", query.id)))?;
        if ex.query.candidates != query.candidates {
            return Err(Error::Session(format!("replay diverged at query {}: recorded candidates differ", query.id)));
        }
        if ex.preference.timed_out {
            Ok(TeacherResponse::Timeout)
        } else {
            Ok(TeacherResponse::Chosen(ex.preference.indices))
        }
    }
}

/// Interactive prompt: prints the candidates and reads a line such as
/// `1 3`, `1,3` or `none` (1-based). End of input counts as a timeout.
pub struct TerminalTeacher<R, W> {
    input: R,
    output: W,
}

impl<R: BufRead, W: Write> TerminalTeacher<R, W> {
    pub fn new(input: R, output: W) -> Self {
        TerminalTeacher { input, output }
    }
}

/// Parses a terminal answer into 0-based indices.
pub fn parse_choice(line: &str, n: usize) -> std::result::Result<Vec<usize>, String> {
    let t = line.trim();
    if t.is_empty() || t.eq_ignore_ascii_case("none") || t == "-" {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for part in t.split(|c: char| c == ',' || c.is_whitespace()).filter(|p| !p.is_empty()) {
        let k: usize = part.parse().map_err(|_| format!("'{part}' is not a number"))?;
        if k == 0 || k > n {
            return Err(format!("{k} is not between 1 and {n}"));
        }
        out.push(k - 1);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

impl<R: BufRead, W: Write> Teacher for TerminalTeacher<R, W> {
    fn answer(&mut self, q: &AdviceQuery) -> Result<TeacherResponse> {
        writeln!(self.output, "\nIteration {} — current clause:\n  {}", q.iteration, q.context)?;
        writeln!(self.output, "Which constraints should hold? (numbers, or 'none')")?;
        for (i, r) in q.rendered.iter().enumerate() {
            writeln!(self.output, "  {}. {r}", i + 1)?;
        }
        loop {
            write!(self.output, "> ")?;
            self.output.flush()?;
            let mut line = String::new();
            if self.input.read_line(&mut line)? == 0 {
                return Ok(TeacherResponse::Timeout);
            }
            match parse_choice(&line, q.candidates.len()) {
                Ok(idx) => return Ok(TeacherResponse::Chosen(idx)),
                Err(e) => writeln!(self.output, "{e}; try again")?,
            }
        }
    }

    fn on_trace(&mut self, t: &IterationTrace) {
        let _ = writeln!(
            self.output,
            "iteration {}: score {:.4} ({}){}",
            t.iteration,
            t.score,
            if t.accepted { "accepted" } else { "rejected" },
            if t.queries > 0 { format!(", {} queries", t.queries) } else { String::new() }
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse::{parse_literal, parse_theory};

    fn query(context: &str, cands: &[&str], bindings: &[(&str, i64)]) -> AdviceQuery {
        let candidates: Vec<Literal> = cands.iter().map(|c| parse_literal(c).unwrap()).collect();
        AdviceQuery {
            id: 1,
            iteration: 1,
            rendered: candidates.iter().map(|c| c.to_string()).collect(),
            witnesses: vec![vec![]; candidates.len()],
            candidates,
            context: parse_theory(context).unwrap().clauses[0].clone(),
            bindings: bindings.iter().map(|(v, n)| (v.to_string(), *n)).collect(),
        }
    }

    const CTX: &str = "L(V0) :- Base(V0, V1), Contains(V0, V2), Contains(V0, V3), Height(V0, V4), \
                       Height(V3, V5), Row(V2), SpRel(V3, V2, \"NWTop\"), Tower(V3), Width(V2, V6).";
    const BIND: &[(&str, i64)] = &[("V1", 4), ("V4", 5), ("V5", 4), ("V6", 4)];

    #[test]
    fn prefers_what_the_truth_contains() {
        let truth = parse_theory(include_str!("../../data/lshape_truth.thy")).unwrap();
        let o = ScriptedOracle::new(truth.clone());
        let q = query(CTX, &["Sub(V5, V4, 1)", "Greater(V5, V4)"], BIND);
        assert_eq!(o.choose(&q), vec![0]);
        let q = query(CTX, &["Equal(V1, V6)", "Equal(V6, V1)", "Sub(V6, V4, 1)"], BIND);
        assert_eq!(o.choose(&q), vec![0, 1]);
        let q = query(CTX, &["Greater(V1, V4)"], BIND);
        assert!(o.choose(&q).is_empty());
    }

    #[test]
    fn renamed_truth_gives_same_choices() {
        let truth = parse_theory(include_str!("../../data/lshape_truth.thy")).unwrap();
        let renamed = parse_theory(
            &include_str!("../../data/lshape_truth.thy")
                .replace("Hb", "TowerH")
                .replace("Ws", "ShapeW")
                .replace("A,", "Rw,")
                .replace("A)", "Rw)"),
        )
        .unwrap();
        assert_ne!(truth, renamed);
        let q = query(CTX, &["Sub(V5, V4, 1)", "Equal(V1, V6)", "Greater(V5, V4)", "Equal(V1, V5)"], BIND);
        let a = ScriptedOracle::new(truth).choose(&q);
        let b = ScriptedOracle::new(renamed).choose(&q);
        assert_eq!(a, vec![0, 1]);
        assert_eq!(a, b);
    }

    #[test]
    fn terminal_choices() {
        assert_eq!(parse_choice("1, 3", 3).unwrap(), vec![0, 2]);
        assert_eq!(parse_choice("none", 3).unwrap(), Vec::<usize>::new());
        assert!(parse_choice("4", 3).is_err());
        let q = query(CTX, &["Sub(V5, V4, 1)", "Greater(V5, V4)"], BIND);
        let mut out = Vec::new();
        let mut t = TerminalTeacher::new(&b"x\n2\n"[..], &mut out);
        assert_eq!(t.answer(&q).unwrap(), TeacherResponse::Chosen(vec![1]));
        let mut t = TerminalTeacher::new(&b""[..], Vec::new());
        assert_eq!(t.answer(&q).unwrap(), TeacherResponse::Timeout);
        assert!(String::from_utf8(out).unwrap().contains("try again"));
    }
}

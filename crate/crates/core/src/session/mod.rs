//! Session protocol, session logs and replay.
//!
//! A session is one induction run. Everything it says is a newline-delimited
//! JSON [`Record`] tagged by `kind`; the same stream is written to the
//! session log, so a log can be replayed to reproduce the run.

pub mod client;
pub mod server;

use std::io::{BufRead, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::advice::{
    AdvicePreference, AdviceQuery, ConstraintLibrary, Exchange, ReplayTeacher, Teacher, TeacherResponse,
};
use crate::domain::{parse_domain, Domain};
use crate::error::{Error, Result};
use crate::induction::{induce, InductionResult, IterationTrace, LoopConfig};
use crate::logic::parse::{parse_literal, parse_theory, GroundExample};
use crate::logic::term::{Clause, Theory};

pub const PROTOCOL_VERSION: u32 = 1;

/// One protocol message.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Record {
    /// Opens a session: what is being learned from, and how.
    Hello {
        session: String,
        version: u32,
        examples: Vec<String>,
        negatives: Vec<String>,
        domain: String,
        library: String,
        config: LoopConfig,
    },
    /// Current theory and its score.
    State {
        iteration: usize,
        theory: String,
        score: f64,
        nll: f64,
        distance: Option<f64>,
    },
    /// A pending preference query.
    Query {
        id: u64,
        iteration: usize,
        context: String,
        candidates: Vec<String>,
        rendered: Vec<String>,
        witnesses: Vec<Vec<i64>>,
    },
    /// The teacher's answer: indices into the query's candidates.
    Prefer {
        id: u64,
        chosen: Vec<usize>,
        #[serde(default)]
        timed_out: bool,
    },
    Trace(IterationTrace),
    Done {
        theory: String,
        score: f64,
        nll: f64,
        distance: Option<f64>,
        queries: usize,
        iterations: usize,
    },
    Error {
        message: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<u64>,
    },
}

impl Record {
    pub fn kind(&self) -> &'static str {
        match self {
            Record::Hello { .. } => "hello",
            Record::State { .. } => "state",
            Record::Query { .. } => "query",
            Record::Prefer { .. } => "prefer",
            Record::Trace(_) => "trace",
            Record::Done { .. } => "done",
            Record::Error { .. } => "error",
        }
    }

    /// One JSON line, newline-terminated.
    pub fn to_line(&self) -> String {
        let mut s = serde_json::to_string(self).expect("records serialize");
        s.push('\n');
        s
    }

    pub fn from_line(line: &str) -> Result<Record> {
        Ok(serde_json::from_str(line.trim())?)
    }

    pub fn query(q: &AdviceQuery) -> Record {
        Record::Query {
            id: q.id,
            iteration: q.iteration,
            context: q.context.to_string(),
            candidates: q.candidates.iter().map(|l| l.to_string()).collect(),
            rendered: q.rendered.clone(),
            witnesses: q.witnesses.clone(),
        }
    }

    /// The advice query a `query` record carries; `None` for other kinds.
    pub fn to_query(&self) -> Result<Option<AdviceQuery>> {
        let Record::Query { id, iteration, context, candidates, rendered, witnesses } = self else {
            return Ok(None);
        };
        let candidates =
            candidates.iter().map(|c| parse_literal(c).map_err(Error::from)).collect::<Result<Vec<_>>>()?;
        Ok(Some(AdviceQuery {
            id: *id,
            iteration: *iteration,
            candidates,
            rendered: rendered.clone(),
            witnesses: witnesses.clone(),
            context: parse_clause(context)?,
            bindings: Default::default(),
        }))
    }

    pub fn prefer(p: &AdvicePreference) -> Record {
        Record::Prefer { id: p.id, chosen: p.indices.clone(), timed_out: p.timed_out }
    }
}

/// SHA-256 of `data`, hex-encoded.
pub fn digest(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

/// Digest of an example in canonical form, so formatting does not matter.
pub fn example_digest(x: &GroundExample) -> String {
    digest(x.render().as_bytes())
}

/// Everything a session learns from.
#[derive(Clone, Debug)]
pub struct SessionInputs {
    pub positives: Vec<GroundExample>,
    pub negatives: Vec<GroundExample>,
    pub domain: Domain,
    /// Source text of the domain, for its digest.
    pub domain_text: String,
    pub library: ConstraintLibrary,
    pub library_text: String,
    pub config: LoopConfig,
}

impl SessionInputs {
    pub fn new(
        positives: Vec<GroundExample>,
        negatives: Vec<GroundExample>,
        domain_text: &str,
        library_text: &str,
        config: LoopConfig,
    ) -> Result<Self> {
        Ok(SessionInputs {
            positives,
            negatives,
            domain: parse_domain(domain_text)?,
            domain_text: domain_text.to_string(),
            library: ConstraintLibrary::parse(library_text)?,
            library_text: library_text.to_string(),
            config,
        })
    }

    pub fn hello(&self) -> Record {
        let examples: Vec<String> = self.positives.iter().map(example_digest).collect();
        let negatives: Vec<String> = self.negatives.iter().map(example_digest).collect();
        let domain = digest(self.domain_text.as_bytes());
        let library = digest(self.library_text.as_bytes());
        let config = serde_json::to_string(&self.config).expect("config serializes");
        let session =
            digest(format!("{examples:?}{negatives:?}{domain}{library}{config}").as_bytes())[..16].to_string();
        Record::Hello {
            session,
            version: PROTOCOL_VERSION,
            examples,
            negatives,
            domain,
            library,
            config: self.config.clone(),
        }
    }
}

/// A finished session: its identity, trace, transcript and result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub session: String,
    pub examples: Vec<String>,
    pub negatives: Vec<String>,
    pub domain: String,
    pub library: String,
    pub config: LoopConfig,
    pub traces: Vec<IterationTrace>,
    pub theory: String,
    pub score: f64,
    /// Query and prefer records in order.
    pub transcript: Vec<Record>,
    pub seconds: f64,
}

impl SessionRecord {
    /// Reassembles a session from its records.
    pub fn from_records(records: &[Record]) -> Result<SessionRecord> {
        let Some(Record::Hello { session, examples, negatives, domain, library, config, .. }) = records.first() else {
            return Err(Error::Session("a session log must start with a hello record".into()));
        };
        let mut out = SessionRecord {
            session: session.clone(),
            examples: examples.clone(),
            negatives: negatives.clone(),
            domain: domain.clone(),
            library: library.clone(),
            config: config.clone(),
            traces: Vec::new(),
            theory: String::new(),
            score: f64::NAN,
            transcript: Vec::new(),
            seconds: 0.0,
        };
        let mut done = false;
        for r in &records[1..] {
            match r {
                Record::Trace(t) => out.traces.push(t.clone()),
                Record::Query { .. } | Record::Prefer { .. } => out.transcript.push(r.clone()),
                Record::Done { theory, score, .. } => {
                    out.theory = theory.clone();
                    out.score = *score;
                    done = true;
                }
                _ => {}
            }
        }
        if !done {
            return Err(Error::Session("session log has no done record".into()));
        }
        Ok(out)
    }

    /// Query/answer pairs, ready for a [`ReplayTeacher`].
    pub fn exchanges(&self) -> Result<Vec<Exchange>> {
        exchanges_from(&self.transcript)
    }
}

fn exchanges_from(records: &[Record]) -> Result<Vec<Exchange>> {
    let mut out = Vec::new();
    let mut pending: Option<AdviceQuery> = None;
    for r in records {
        match r {
            Record::Query { .. } => pending = r.to_query()?,
            Record::Prefer { id, chosen, timed_out } => {
                let q = pending
                    .take()
                    .filter(|q| q.id == *id)
                    .ok_or_else(|| Error::Session(format!("prefer {id} answers no pending query")))?;
                let picked = chosen
                    .iter()
                    .map(|&i| {
                        q.candidates
                            .get(i)
                            .cloned()
                            .ok_or_else(|| Error::Session(format!("prefer {id} chooses missing candidate {i}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                out.push(Exchange {
                    preference: AdvicePreference {
                        id: *id,
                        chosen: picked,
                        indices: chosen.clone(),
                        timed_out: *timed_out,
                    },
                    query: q,
                });
            }
            _ => {}
        }
    }
    Ok(out)
}

fn parse_clause(text: &str) -> Result<Clause> {
    let t = parse_theory(text)?;
    t.clauses.into_iter().next().ok_or_else(|| Error::Session(format!("'{text}' is not a clause")))
}

/// Reads a session log, skipping blank lines.
pub fn read_log(r: impl BufRead) -> Result<Vec<Record>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(Record::from_line(&line).map_err(|e| Error::Session(format!("log line {}: {e}", i + 1)))?);
    }
    Ok(out)
}

/// Wraps a teacher so every query, answer and iteration is also emitted as
/// a record.
struct Recording<'a> {
    inner: &'a mut dyn Teacher,
    sink: &'a mut dyn FnMut(&Record),
}

impl Teacher for Recording<'_> {
    fn answer(&mut self, q: &AdviceQuery) -> Result<TeacherResponse> {
        (self.sink)(&Record::query(q));
        let r = self.inner.answer(q)?;
        let (chosen, timed_out) = match &r {
            TeacherResponse::Chosen(idx) => (idx.clone(), false),
            TeacherResponse::Timeout => (Vec::new(), true),
        };
        (self.sink)(&Record::Prefer { id: q.id, chosen, timed_out });
        Ok(r)
    }

    fn on_trace(&mut self, t: &IterationTrace) {
        (self.sink)(&Record::Trace(t.clone()));
        (self.sink)(&Record::State {
            iteration: t.iteration,
            theory: t.theory.clone(),
            score: t.score,
            nll: t.nll,
            distance: t.distance,
        });
        self.inner.on_trace(t);
    }

    fn on_done(&mut self, t: &Theory) {
        self.inner.on_done(t);
    }
}

/// Runs one session, emitting every record to `sink` as it happens.
pub fn run_session(
    inputs: &SessionInputs,
    teacher: &mut dyn Teacher,
    sink: &mut dyn FnMut(&Record),
) -> Result<(InductionResult, SessionRecord)> {
    let start = Instant::now();
    let mut records = vec![inputs.hello()];
    sink(&records[0]);
    let result = {
        let mut tee = |r: &Record| {
            records.push(r.clone());
            sink(r);
        };
        let mut rec = Recording { inner: teacher, sink: &mut tee };
        induce(&inputs.positives, &inputs.negatives, &inputs.domain, &inputs.library, &inputs.config, &mut rec)
    };
    let result = match result {
        Ok(r) => r,
        Err(e) => {
            sink(&Record::Error { message: e.to_string(), id: None });
            return Err(e);
        }
    };
    let done = Record::Done {
        theory: result.theory.render(),
        score: result.score.total,
        nll: result.score.nll,
        distance: result.score.distance,
        queries: result.queries(),
        iterations: result.iterations(),
    };
    sink(&done);
    records.push(done);
    let mut session = SessionRecord::from_records(&records)?;
    session.seconds = start.elapsed().as_secs_f64();
    Ok((result, session))
}

/// Runs a session and writes its log to `out`.
pub fn run_logged(
    inputs: &SessionInputs,
    teacher: &mut dyn Teacher,
    out: &mut dyn Write,
) -> Result<(InductionResult, SessionRecord)> {
    let mut failed: Option<std::io::Error> = None;
    let r = run_session(inputs, teacher, &mut |rec| {
        if failed.is_none() {
            if let Err(e) = out.write_all(rec.to_line().as_bytes()) {
                failed = Some(e);
            }
        }
    })?;
    if let Some(e) = failed {
        return Err(e.into());
    }
    out.flush()?;
    Ok(r)
}

/// Re-runs a logged session with its recorded answers. The inputs must be
/// the ones the log was made from; the configuration comes from the log.
pub fn replay(records: &[Record], inputs: &SessionInputs) -> Result<(InductionResult, SessionRecord)> {
    let logged = SessionRecord::from_records(records)?;
    let mut inputs = inputs.clone();
    inputs.config = logged.config.clone();
    let Record::Hello { examples, negatives, domain, library, .. } = inputs.hello() else { unreachable!() };
    if examples != logged.examples || negatives != logged.negatives {
        return Err(Error::Session("the examples differ from the ones this log was recorded with".into()));
    }
    if domain != logged.domain || library != logged.library {
        return Err(Error::Session("the domain or library differs from the one this log was recorded with".into()));
    }
    let mut teacher = ReplayTeacher::new(logged.exchanges()?);
    let out = run_session(&inputs, &mut teacher, &mut |_| {})?;
    if out.1.theory != logged.theory {
        return Err(Error::Session("replay produced a different theory".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::advice::ScriptedOracle;
    use crate::assets::{lshape_example, lshape_truth, BLOCKS_DOM, STD_CONSTRAINTS};

    fn inputs() -> SessionInputs {
        SessionInputs::new(vec![lshape_example()], vec![], BLOCKS_DOM, STD_CONSTRAINTS, LoopConfig::default()).unwrap()
    }

    #[test]
    fn records_round_trip_with_kind_tags() {
        let r = Record::Prefer { id: 3, chosen: vec![0, 2], timed_out: false };
        let line = r.to_line();
        assert!(line.starts_with("{\"kind\":\"prefer\""));
        assert_eq!(Record::from_line(&line).unwrap(), r);
        let e = Record::Error { message: "x".into(), id: None };
        assert_eq!(e.to_line(), "{\"kind\":\"error\",\"message\":\"x\"}\n");
    }

    #[test]
    fn logged_session_replays_exactly() {
        let mut log = Vec::new();
        let mut oracle = ScriptedOracle::new(lshape_truth());
        let (res, rec) = run_logged(&inputs(), &mut oracle, &mut log).unwrap();
        let records = read_log(log.as_slice()).unwrap();
        assert_eq!(records.first().unwrap().kind(), "hello");
        assert_eq!(records.last().unwrap().kind(), "done");
        assert_eq!(rec.transcript.len(), 2 * res.queries());
        let (again, rec2) = replay(&records, &inputs()).unwrap();
        assert_eq!(again.theory.render(), res.theory.render());
        assert_eq!(rec2.score.to_bits(), rec.score.to_bits());
    }

    #[test]
    fn replay_rejects_other_inputs() {
        let mut log = Vec::new();
        run_logged(&inputs(), &mut ScriptedOracle::new(lshape_truth()), &mut log).unwrap();
        let records = read_log(log.as_slice()).unwrap();
        let mut other = inputs();
        other.positives[0].params.insert("base".into(), 9);
        assert!(matches!(replay(&records, &other), Err(Error::Session(_))));
    }
}

//! Single-client TCP service for a remote teacher.
//!
//! The induction loop runs on the calling thread. An acceptor thread admits
//! one client at a time; a second concurrent client is refused with an
//! error record. Queries are relayed to the client and block the loop until
//! a valid `prefer` arrives. If the client disconnects, the session waits at
//! the pending query; a reconnecting client receives `hello`, the latest
//! `state` and the pending `query` again.

use std::io::{BufRead, BufReader, ErrorKind, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use super::{run_session, Record, SessionInputs, SessionRecord};
use crate::advice::{AdviceQuery, Teacher, TeacherResponse};
use crate::error::{Error, Result};
use crate::induction::InductionResult;

#[derive(Clone, Debug)]
pub struct ServeOptions {
    /// How long a query may stay unanswered before the loop continues
    /// without advice; `None` waits forever.
    pub query_timeout: Option<Duration>,
    /// How often the acceptor checks whether the session has ended.
    pub poll: Duration,
}

impl Default for ServeOptions {
    fn default() -> Self {
        ServeOptions { query_timeout: None, poll: Duration::from_millis(20) }
    }
}

struct Shared {
    client: Option<TcpStream>,
    generation: u64,
    hello: Record,
    last_state: Option<Record>,
    pending: Option<(u64, usize, Record)>,
}

impl Shared {
    /// Sends to the connected client; a failed write drops the client.
    fn send(&mut self, r: &Record) {
        if let Some(c) = self.client.as_mut() {
            if c.write_all(r.to_line().as_bytes()).and_then(|_| c.flush()).is_err() {
                log::info!("client went away");
                self.client = None;
            }
        }
    }
}

fn send_to(stream: &mut TcpStream, r: &Record) {
    let _ = stream.write_all(r.to_line().as_bytes()).and_then(|_| stream.flush());
}

pub struct Server {
    listener: TcpListener,
}

impl Server {
    pub fn bind(addr: impl ToSocketAddrs) -> Result<Server> {
        Ok(Server { listener: TcpListener::bind(addr)? })
    }

    pub fn local_addr(&self) -> Result<SocketAddr> {
        Ok(self.listener.local_addr()?)
    }

    /// Runs one session to completion, relaying queries to the client and
    /// writing every record to `log` as well.
    pub fn run(
        self,
        inputs: &SessionInputs,
        opts: &ServeOptions,
        log: Option<&mut dyn Write>,
    ) -> Result<(InductionResult, SessionRecord)> {
        let shared = Arc::new(Mutex::new(Shared {
            client: None,
            generation: 0,
            hello: inputs.hello(),
            last_state: None,
            pending: None,
        }));
        let finished = Arc::new(AtomicBool::new(false));
        let (tx, rx) = mpsc::channel();
        self.listener.set_nonblocking(true)?;
        let acceptor = {
            let shared = Arc::clone(&shared);
            let finished = Arc::clone(&finished);
            let poll = opts.poll;
            let listener = self.listener;
            thread::spawn(move || accept_loop(listener, shared, finished, tx, poll))
        };

        let mut teacher = Remote { rx, timeout: opts.query_timeout, shared: Arc::clone(&shared) };
        let mut log = log;
        let mut log_err = None;
        let outcome = run_session(inputs, &mut teacher, &mut |r| {
            if let Some(w) = log.as_mut() {
                if let Err(e) = w.write_all(r.to_line().as_bytes()) {
                    log_err.get_or_insert(e);
                }
            }
            let mut s = shared.lock().expect("session lock");
            match r {
                Record::Hello { .. } => return,
                Record::Query { id, candidates, .. } => s.pending = Some((*id, candidates.len(), r.clone())),
                Record::State { .. } => s.last_state = Some(r.clone()),
                _ => {}
            }
            s.send(r);
        });

        finished.store(true, Ordering::SeqCst);
        {
            let mut s = shared.lock().expect("session lock");
            if let Some(c) = s.client.take() {
                let _ = c.shutdown(std::net::Shutdown::Both);
            }
        }
        let _ = acceptor.join();
        if let Some(w) = log.as_mut() {
            w.flush()?;
        }
        if let Some(e) = log_err {
            return Err(e.into());
        }
        outcome
    }
}

fn accept_loop(
    listener: TcpListener,
    shared: Arc<Mutex<Shared>>,
    finished: Arc<AtomicBool>,
    tx: Sender<TeacherResponse>,
    poll: Duration,
) {
    while !finished.load(Ordering::SeqCst) {
        let stream = match listener.accept() {
            Ok((s, peer)) => {
                log::info!("client connected from {peer}");
                s
            }
            Err(e) if e.kind() == ErrorKind::WouldBlock => {
                thread::sleep(poll);
                continue;
            }
            Err(e) => {
                log::warn!("accept failed: {e}");
                thread::sleep(poll);
                continue;
            }
        };
        if stream.set_nonblocking(false).is_err() {
            continue;
        }
        let mut s = shared.lock().expect("session lock");
        if s.client.is_some() {
            let mut refused = stream;
            send_to(&mut refused, &Record::Error { message: "session already has a client".into(), id: None });
            let _ = refused.shutdown(std::net::Shutdown::Both);
            continue;
        }
        let Ok(reader) = stream.try_clone() else { continue };
        s.generation += 1;
        let generation = s.generation;
        s.client = Some(stream);
        let hello = s.hello.clone();
        s.send(&hello);
        if let Some(st) = s.last_state.clone() {
            s.send(&st);
        }
        if let Some((_, _, q)) = s.pending.clone() {
            s.send(&q);
        }
        drop(s);
        let shared = Arc::clone(&shared);
        let tx = tx.clone();
        thread::spawn(move || read_loop(reader, generation, shared, tx));
    }
}

fn read_loop(stream: TcpStream, generation: u64, shared: Arc<Mutex<Shared>>, tx: Sender<TeacherResponse>) {
    let reader = BufReader::new(stream);
    for line in reader.lines() {
        let Ok(line) = line else { break };
        if line.trim().is_empty() {
            continue;
        }
        let mut s = shared.lock().expect("session lock");
        if s.generation != generation {
            break;
        }
        match Record::from_line(&line) {
            Ok(Record::Prefer { id, chosen, timed_out }) => match &s.pending {
                Some((pid, n, _)) if *pid == id => {
                    if let Some(bad) = chosen.iter().find(|&&i| i >= *n) {
                        let msg = format!("choice {bad} is out of range for query {id} with {n} candidates");
                        s.send(&Record::Error { message: msg, id: Some(id) });
                        continue;
                    }
                    s.pending = None;
                    let answer = if timed_out { TeacherResponse::Timeout } else { TeacherResponse::Chosen(chosen) };
                    if tx.send(answer).is_err() {
                        break;
                    }
                }
                _ => {
                    let msg = format!("no pending query with id {id}");
                    s.send(&Record::Error { message: msg, id: Some(id) });
                }
            },
            Ok(Record::Hello { .. }) => {}
            Ok(other) => {
                let msg = format!("clients may only send prefer records, not {}", other.kind());
                s.send(&Record::Error { message: msg, id: None });
            }
            Err(e) => s.send(&Record::Error { message: format!("malformed record: {e}"), id: None }),
        }
    }
    let mut s = shared.lock().expect("session lock");
    if s.generation == generation {
        log::info!("client disconnected; the session waits for a new one");
        s.client = None;
    }
}

/// The loop's side of the relay: waits for the reader thread to deliver a
/// validated answer.
struct Remote {
    rx: Receiver<TeacherResponse>,
    timeout: Option<Duration>,
    shared: Arc<Mutex<Shared>>,
}

impl Teacher for Remote {
    fn answer(&mut self, q: &AdviceQuery) -> Result<TeacherResponse> {
        let got = match self.timeout {
            Some(t) => self.rx.recv_timeout(t),
            None => self.rx.recv().map_err(|_| RecvTimeoutError::Disconnected),
        };
        match got {
            Ok(r) => Ok(r),
            Err(RecvTimeoutError::Timeout) => {
                let mut s = self.shared.lock().expect("session lock");
                // a late answer arriving now finds nothing pending
                s.pending = None;
                Ok(TeacherResponse::Timeout)
            }
            Err(RecvTimeoutError::Disconnected) => {
                Err(Error::Session(format!("the session service stopped while query {} was pending", q.id)))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assets::{lshape_example, BLOCKS_DOM, STD_CONSTRAINTS};
    use crate::induction::LoopConfig;

    #[test]
    fn timeout_continues_without_advice() {
        let inputs =
            SessionInputs::new(vec![lshape_example()], vec![], BLOCKS_DOM, STD_CONSTRAINTS, LoopConfig::default())
                .unwrap();
        let server = Server::bind("127.0.0.1:0").unwrap();
        let opts = ServeOptions { query_timeout: Some(Duration::from_millis(50)), ..ServeOptions::default() };
        let addr = server.local_addr().unwrap();
        assert_ne!(addr.port(), 0);
        // nobody ever connects: every query times out
        let (r, rec) = server.run(&inputs, &opts, None).unwrap();
        assert!(r.theory.render().starts_with("L(V0)"));
        assert!(rec.transcript.iter().all(|t| !matches!(t, Record::Prefer { timed_out: false, .. })));
    }
}

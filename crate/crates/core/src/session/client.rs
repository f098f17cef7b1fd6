//! Minimal protocol client, used by the examples, tests and the terminal
//! bridge.

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::time::Duration;

use super::Record;
use crate::error::{Error, Result};

pub struct SessionClient {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl SessionClient {
    pub fn connect(addr: impl ToSocketAddrs) -> Result<SessionClient> {
        let writer = TcpStream::connect(addr)?;
        let reader = BufReader::new(writer.try_clone()?);
        Ok(SessionClient { reader, writer })
    }

    /// Fails reads that block longer than `t`.
    pub fn set_read_timeout(&self, t: Option<Duration>) -> Result<()> {
        Ok(self.writer.set_read_timeout(t)?)
    }

    /// The next record, or `None` when the server closed the connection.
    pub fn recv(&mut self) -> Result<Option<Record>> {
        let mut line = String::new();
        loop {
            line.clear();
            if self.reader.read_line(&mut line)? == 0 {
                return Ok(None);
            }
            if !line.trim().is_empty() {
                return Record::from_line(&line).map(Some);
            }
        }
    }

    pub fn send(&mut self, r: &Record) -> Result<()> {
        self.send_raw(&r.to_line())
    }

    /// Sends a line verbatim (for exercising malformed input).
    pub fn send_raw(&mut self, line: &str) -> Result<()> {
        self.writer.write_all(line.as_bytes())?;
        if !line.ends_with('\n') {
            self.writer.write_all(b"\n")?;
        }
        Ok(self.writer.flush()?)
    }

    pub fn prefer(&mut self, id: u64, chosen: Vec<usize>) -> Result<()> {
        self.send(&Record::Prefer { id, chosen, timed_out: false })
    }

    /// Reads records until the next query and returns everything read,
    /// the query last. Errors if the stream ends first.
    pub fn until_query(&mut self) -> Result<Vec<Record>> {
        let mut out = Vec::new();
        loop {
            match self.recv()? {
                Some(r) => {
                    let is_query = matches!(r, Record::Query { .. });
                    out.push(r);
                    if is_query {
                        return Ok(out);
                    }
                }
                None => return Err(Error::Session("connection closed before a query arrived".into())),
            }
        }
    }

    /// Answers every query with `answer` until `done` arrives; returns all
    /// records received.
    pub fn drive(&mut self, mut answer: impl FnMut(&Record) -> Vec<usize>) -> Result<Vec<Record>> {
        let mut out = Vec::new();
        while let Some(r) = self.recv()? {
            if let Record::Query { id, .. } = &r {
                let chosen = answer(&r);
                self.prefer(*id, chosen)?;
            }
            let done = matches!(r, Record::Done { .. });
            out.push(r);
            if done {
                break;
            }
        }
        Ok(out)
    }
}

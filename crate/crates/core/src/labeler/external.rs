//! Client for external labeler workers, plus the conformance checks any
//! worker implementation is expected to pass.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::time::Duration;

use super::protocol::{parse_worker_line, to_line, HostMessage, WorkerMessage};
use super::PatchLabeler;
use crate::error::{Error, Result};
use crate::geodata::RasterGrid;
use crate::sampler::PatchSample;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

/// One labeled patch as reported by a worker.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkerAnswer {
    pub word: String,
    pub probs: Option<Vec<f64>>,
}

struct Worker {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    next_id: u64,
    broken: bool,
}

impl Worker {
    fn recv(&self, timeout: Duration) -> Result<WorkerMessage> {
        match self.lines.recv_timeout(timeout) {
            Ok(Ok(line)) => parse_worker_line(&line),
            Ok(Err(e)) => Err(Error::Protocol(format!("reading worker output: {e}"))),
            Err(RecvTimeoutError::Timeout) => Err(Error::Timeout(timeout)),
            Err(RecvTimeoutError::Disconnected) => Err(Error::Protocol("worker closed its output".into())),
        }
    }
}

/// A running worker process. Requests are serialized through a mutex; use
/// several instances for parallel labeling.
pub struct ExternalLabeler {
    vocabulary: Vec<String>,
    index: HashMap<String, usize>,
    worker: Mutex<Worker>,
    timeout: Duration,
}

impl ExternalLabeler {
    /// Starts `command` through `sh -c` and waits for its hello message.
    pub fn spawn(command: &str, timeout: Duration) -> Result<Self> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::io(command, e))?;
        let stdout = child.stdout.take().expect("piped stdout");
        let stdin = child.stdin.take();
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        let mut worker = Worker {
            child,
            stdin,
            lines: rx,
            next_id: 0,
            broken: false,
        };
        let vocabulary = match worker.recv(timeout) {
            Ok(WorkerMessage::Hello { vocabulary }) => vocabulary,
            Ok(other) => {
                let _ = worker.child.kill();
                return Err(Error::Protocol(format!("expected hello, got {other:?}")));
            }
            Err(e) => {
                let _ = worker.child.kill();
                return Err(e);
            }
        };
        if vocabulary.is_empty() {
            let _ = worker.child.kill();
            return Err(Error::Protocol("worker declared an empty vocabulary".into()));
        }
        let mut index = HashMap::new();
        for (i, w) in vocabulary.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                let _ = worker.child.kill();
                return Err(Error::Protocol(format!("duplicate vocabulary word {w:?}")));
            }
        }
        Ok(ExternalLabeler {
            vocabulary,
            index,
            worker: Mutex::new(worker),
            timeout,
        })
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    /// Sends every patch, then collects one answer per patch. Answers must
    /// come back in request order with matching ids.
    pub fn label_raw(&self, patches: &[&RasterGrid]) -> Result<Vec<WorkerAnswer>> {
        let mut worker = self.worker.lock().unwrap_or_else(|p| p.into_inner());
        if worker.broken {
            return Err(Error::Protocol("worker is in a failed state".into()));
        }
        let first_id = worker.next_id;
        worker.next_id += patches.len() as u64;
        let result = self.exchange(&mut worker, first_id, patches);
        if result.is_err() {
            worker.broken = true;
        }
        result
    }

    fn exchange(&self, worker: &mut Worker, first_id: u64, patches: &[&RasterGrid]) -> Result<Vec<WorkerAnswer>> {
        let mut stdin = worker
            .stdin
            .take()
            .ok_or_else(|| Error::Protocol("worker input already closed".into()))?;
        let outcome = std::thread::scope(|s| {
            let writer = s.spawn(move || -> std::io::Result<ChildStdin> {
                let mut out = std::io::BufWriter::new(&mut stdin);
                for (i, p) in patches.iter().enumerate() {
                    writeln!(out, "{}", to_line(&HostMessage::label(first_id + i as u64, p)))?;
                }
                out.flush()?;
                drop(out);
                Ok(stdin)
            });
            let mut answers = Vec::with_capacity(patches.len());
            let mut failure = None;
            for i in 0..patches.len() {
                let expected = first_id + i as u64;
                match worker.recv(self.timeout) {
                    Ok(WorkerMessage::Result { id, word, probs }) if id == expected => {
                        if !self.index.contains_key(&word) {
                            failure = Some(Error::UnknownWord(word));
                            break;
                        }
                        answers.push(WorkerAnswer { word, probs });
                    }
                    Ok(WorkerMessage::Result { id, .. }) => {
                        failure = Some(Error::Protocol(format!("expected result id {expected}, got {id}")));
                        break;
                    }
                    Ok(WorkerMessage::Error { id, message }) => {
                        failure = Some(Error::Protocol(format!("worker error for id {id:?}: {message}")));
                        break;
                    }
                    Ok(other) => {
                        failure = Some(Error::Protocol(format!("unexpected message {other:?}")));
                        break;
                    }
                    Err(e) => {
                        failure = Some(e);
                        break;
                    }
                }
            }
            if failure.is_some() {
                // unblock a writer stuck on a full pipe
                let _ = worker.child.kill();
            }
            let stdin = writer.join().expect("writer thread panicked");
            match (failure, stdin) {
                (Some(e), _) => Err(e),
                (None, Err(e)) => Err(Error::Protocol(format!("writing to worker: {e}"))),
                (None, Ok(stdin)) => Ok((answers, stdin)),
            }
        });
        let (answers, stdin) = outcome?;
        worker.stdin = Some(stdin);
        Ok(answers)
    }

    /// Sends `end`, waits for the worker's `end` and for the process to exit.
    pub fn shutdown(mut self) -> Result<()> {
        let timeout = self.timeout;
        let worker = self.worker.get_mut().unwrap_or_else(|p| p.into_inner());
        let result = end_session(worker, timeout);
        if result.is_err() {
            let _ = worker.child.kill();
        }
        let _ = worker.child.wait();
        worker.stdin = None;
        result
    }
}

fn end_session(worker: &mut Worker, timeout: Duration) -> Result<()> {
    let Some(mut stdin) = worker.stdin.take() else {
        return Err(Error::Protocol("worker input already closed".into()));
    };
    writeln!(stdin, "{}", to_line(&HostMessage::End))
        .and_then(|_| stdin.flush())
        .map_err(|e| Error::Protocol(format!("writing end: {e}")))?;
    drop(stdin);
    match worker.recv(timeout)? {
        WorkerMessage::End => Ok(()),
        other => Err(Error::Protocol(format!("expected end, got {other:?}"))),
    }
}

impl Drop for ExternalLabeler {
    fn drop(&mut self) {
        let worker = self.worker.get_mut().unwrap_or_else(|p| p.into_inner());
        if worker.stdin.is_some() && !worker.broken {
            let _ = end_session(worker, Duration::from_secs(2));
        }
        let _ = worker.child.kill();
        let _ = worker.child.wait();
    }
}

impl PatchLabeler for ExternalLabeler {
    fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    fn label_patches(&self, patches: &[PatchSample]) -> Result<Vec<usize>> {
        let grids: Vec<&RasterGrid> = patches.iter().map(|p| &p.pixels).collect();
        Ok(self
            .label_raw(&grids)?
            .into_iter()
            .map(|a| self.index[&a.word])
            .collect())
    }
}

/// Outcome of one conformance check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Runs the worker conformance checks against `command`: handshake, id
/// echo, vocabulary closure, probability normalization, order preservation
/// over 1000 requests, odd patch shapes and the end handshake.
pub fn conformance_suite(command: &str, timeout: Duration) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    let mut record = |name: &'static str, r: Result<String>| {
        let (passed, detail) = match r {
            Ok(d) => (true, d),
            Err(e) => (false, e.to_string()),
        };
        out.push(CheckOutcome { name, passed, detail });
        passed
    };
    let labeler = match ExternalLabeler::spawn(command, timeout) {
        Ok(l) => {
            record("handshake", Ok(format!("{} words", l.vocabulary().len())));
            l
        }
        Err(e) => {
            record("handshake", Err(e));
            return out;
        }
    };
    let k = labeler.vocabulary().len();
    let rgb: Vec<RasterGrid> = (0..1000)
        .map(|i| {
            let v = (i % 251) as u8;
            RasterGrid::filled(8 + i % 5, 8, &[v, 255 - v, v / 2]).expect("valid patch")
        })
        .collect();
    let single = labeler.label_raw(&[&rgb[0]]).map(|a| format!("word {}", a[0].word));
    if !record("single request", single) {
        return out;
    }
    let batch = labeler.label_raw(&rgb.iter().collect::<Vec<_>>()).and_then(|answers| {
        if answers.len() != rgb.len() {
            return Err(Error::Protocol(format!(
                "{} answers for {} requests",
                answers.len(),
                rgb.len()
            )));
        }
        for a in &answers {
            if let Some(p) = &a.probs {
                let sum: f64 = p.iter().sum();
                if p.len() != k || (sum - 1.0).abs() > 1e-6 || p.iter().any(|v| v.is_nan() || *v < 0.0) {
                    return Err(Error::Protocol(format!(
                        "probs {p:?} do not form a distribution over {k} words"
                    )));
                }
            }
        }
        Ok(format!("{} ordered answers", answers.len()))
    });
    if !record("1000 ordered requests", batch) {
        return out;
    }
    let gray = RasterGrid::filled(1, 1, &[255]).expect("valid patch");
    let tall = RasterGrid::filled(3, 17, &[0, 0, 0]).expect("valid patch");
    record(
        "odd patch shapes",
        labeler
            .label_raw(&[&gray, &tall])
            .map(|a| format!("{} answers", a.len())),
    );
    record("end handshake", labeler.shutdown().map(|_| "clean exit".to_string()));
    out
}

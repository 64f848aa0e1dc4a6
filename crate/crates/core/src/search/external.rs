//! Edit proposals from a child process speaking newline-delimited JSON.
//!
//! Each request is one line on the child's stdin:
//! `{"id","domain","programTokens","programVisual","targetVisual","maxProposals"}`,
//! visuals being base64 of the domain's raster file format. The child answers
//! with one line `{"id","edits":[...]}` in the edit wire format.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::{EditPolicy, PolicyError};
use crate::dsl::Program;
use crate::edit::apply_edit;
use crate::edit::wire::{from_wire, WireEdit};
use crate::edit::EditOp;
use crate::exec::{encode_visual, Visual};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PolicyRequest {
    pub id: u64,
    pub domain: String,
    pub program_tokens: Vec<String>,
    pub program_visual: String,
    pub target_visual: String,
    pub max_proposals: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyResponse {
    pub id: u64,
    pub edits: Vec<WireEdit>,
}

struct Channel {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
    next_id: u64,
}

pub struct ExternalPolicy {
    chan: Mutex<Channel>,
    timeout: Duration,
    dropped: AtomicUsize,
}

impl ExternalPolicy {
    /// Starts `command` through `sh -c`.
    pub fn spawn(command: &str, timeout: Duration) -> Result<ExternalPolicy, PolicyError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| PolicyError::Io(e.to_string()))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        Ok(ExternalPolicy {
            chan: Mutex::new(Channel { child, stdin, lines: rx, next_id: 0 }),
            timeout,
            dropped: AtomicUsize::new(0),
        })
    }

    fn exchange(&self, req: &mut PolicyRequest) -> Result<PolicyResponse, PolicyError> {
        let mut chan = self.chan.lock().map_err(|_| PolicyError::Io("policy channel poisoned".into()))?;
        req.id = chan.next_id;
        chan.next_id += 1;
        let line = serde_json::to_string(req).expect("request serializes");
        writeln!(chan.stdin, "{line}").and_then(|_| chan.stdin.flush()).map_err(|e| PolicyError::Io(e.to_string()))?;
        loop {
            let line = match chan.lines.recv_timeout(self.timeout) {
                Ok(Ok(l)) => l,
                Ok(Err(e)) => return Err(PolicyError::Io(e.to_string())),
                Err(RecvTimeoutError::Timeout) => return Err(PolicyError::Timeout(self.timeout.as_millis() as u64)),
                Err(RecvTimeoutError::Disconnected) => return Err(PolicyError::Io("policy process closed its output".into())),
            };
            let resp: PolicyResponse =
                serde_json::from_str(&line).map_err(|e| PolicyError::Protocol(format!("{e}: {line}")))?;
            // a late answer to a request that already timed out
            if resp.id < req.id {
                continue;
            }
            if resp.id != req.id {
                return Err(PolicyError::Protocol(format!("expected response id {}, got {}", req.id, resp.id)));
            }
            return Ok(resp);
        }
    }
}

impl Drop for ExternalPolicy {
    fn drop(&mut self) {
        if let Ok(chan) = self.chan.get_mut() {
            let _ = chan.child.kill();
            let _ = chan.child.wait();
        }
    }
}

impl EditPolicy for ExternalPolicy {
    fn propose(&self, program: &Program, visual: &Visual, target: &Visual, max: usize)
        -> Result<Vec<EditOp>, PolicyError> {
        let mut req = PolicyRequest {
            id: 0,
            domain: program.domain().name().to_string(),
            program_tokens: program.tokens().iter().map(|t| t.to_string()).collect(),
            program_visual: STANDARD.encode(encode_visual(visual)),
            target_visual: STANDARD.encode(encode_visual(target)),
            max_proposals: max,
        };
        let resp = self.exchange(&mut req)?;
        let mut out = Vec::new();
        for w in &resp.edits {
            match from_wire(program, w) {
                Ok(op) if out.len() < max && apply_edit(program, &op).is_ok() => out.push(op),
                _ => {
                    self.dropped.fetch_add(1, Ordering::Relaxed);
                }
            }
        }
        Ok(out)
    }

    fn dropped(&self) -> usize {
        self.dropped.load(Ordering::Relaxed)
    }
}

// SPDX-License-Identifier: Apache-2.0

//! A minimal LSP client over a child process's stdio.

use anyhow::{anyhow, bail, Context, Result};
use lsp_server::{Message, Notification, Request, RequestId};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::{
    collections::BTreeMap,
    io::{BufReader, Write},
    process::{Child, ChildStdin, Command, Stdio},
    sync::mpsc::{self, Receiver, RecvTimeoutError},
    time::{Duration, Instant},
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Sent,
    Received,
}

#[derive(Clone, Debug)]
pub struct LogEntry {
    pub at: Instant,
    pub direction: Direction,
    pub message: Message,
}

pub struct LspClient {
    child: Child,
    stdin: Option<ChildStdin>,
    rx: Receiver<(Instant, Message)>,
    next_id: i32,
    pub log: Vec<LogEntry>,
}

impl LspClient {
    /// Starts `command[0]` with the remaining elements as arguments.
    pub fn spawn(command: &[String]) -> Result<Self> {
        let (program, args) = command.split_first().context("empty server command")?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .with_context(|| format!("starting {program}"))?;
        let stdout = child.stdout.take().context("no stdout")?;
        let stdin = child.stdin.take();
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            let mut r = BufReader::new(stdout);
            while let Ok(Some(m)) = Message::read(&mut r) {
                if tx.send((Instant::now(), m)).is_err() {
                    break;
                }
            }
        });
        Ok(Self {
            child,
            stdin,
            rx,
            next_id: 0,
            log: Vec::new(),
        })
    }

    pub fn pid(&self) -> u32 {
        self.child.id()
    }

    fn send(&mut self, message: Message) -> Result<()> {
        let stdin = self.stdin.as_mut().context("server input closed")?;
        message.write(stdin).context("server input closed")?;
        stdin.flush()?;
        self.log.push(LogEntry {
            at: Instant::now(),
            direction: Direction::Sent,
            message,
        });
        Ok(())
    }

    pub fn notify(&mut self, method: &str, params: Value) -> Result<()> {
        self.send(Notification::new(method.into(), params).into())
    }

    pub fn send_request(&mut self, method: &str, params: Value) -> Result<RequestId> {
        self.next_id += 1;
        let id = RequestId::from(self.next_id);
        self.send(Request::new(id.clone(), method.into(), params).into())?;
        Ok(id)
    }

    /// Next message from the server, or an error after `timeout` or if
    /// the server exited.
    pub fn recv(&mut self, timeout: Duration) -> Result<(Instant, Message)> {
        match self.rx.recv_timeout(timeout) {
            Ok((at, message)) => {
                self.log.push(LogEntry {
                    at,
                    direction: Direction::Received,
                    message: message.clone(),
                });
                Ok((at, message))
            }
            Err(RecvTimeoutError::Timeout) => bail!("timed out after {timeout:?}"),
            Err(RecvTimeoutError::Disconnected) => bail!("server closed its output"),
        }
    }

    /// Receives until `stop` holds for a message; returns everything
    /// received, the stopping message last.
    pub fn recv_until(
        &mut self,
        timeout: Duration,
        mut stop: impl FnMut(&Message) -> bool,
    ) -> Result<Vec<(Instant, Message)>> {
        let deadline = Instant::now() + timeout;
        let mut out = Vec::new();
        loop {
            let left = deadline.saturating_duration_since(Instant::now());
            let (at, m) = self.recv(left)?;
            let done = stop(&m);
            out.push((at, m));
            if done {
                return Ok(out);
            }
        }
    }

    pub fn request(&mut self, method: &str, params: Value, timeout: Duration) -> Result<Value> {
        let id = self.send_request(method, params)?;
        let got = self.recv_until(timeout, |m| matches!(m, Message::Response(r) if r.id == id))?;
        match got.into_iter().next_back() {
            Some((_, Message::Response(r))) => r
                .response_result
                .map_err(|e| anyhow!("{method} failed: {} ({})", e.message, e.code)),
            _ => unreachable!("recv_until stops on the response"),
        }
    }

    /// Sends `shutdown` and `exit` and returns the exit code.
    pub fn shutdown(&mut self, timeout: Duration) -> Result<i32> {
        self.request("shutdown", Value::Null, timeout)?;
        self.notify("exit", Value::Null)?;
        self.stdin = None;
        let deadline = Instant::now() + timeout;
        loop {
            if let Some(status) = self.child.try_wait()? {
                return Ok(status.code().unwrap_or(-1));
            }
            if Instant::now() > deadline {
                bail!("server did not exit");
            }
            std::thread::sleep(Duration::from_millis(5));
        }
    }
}

impl Drop for LspClient {
    fn drop(&mut self) {
        if let Ok(None) = self.child.try_wait() {
            let _ = self.child.kill();
            let _ = self.child.wait();
        }
    }
}

/// Response discipline over a message log.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolCheck {
    pub requests: usize,
    pub responses: usize,
    /// request ids with no response
    pub unanswered: Vec<String>,
    /// request ids answered more than once
    pub answered_twice: Vec<String>,
    /// responses to ids never sent as requests
    pub unsolicited: Vec<String>,
    pub metrics: usize,
    pub expected_metrics: usize,
    /// runs whose changed file got no publishDiagnostics
    pub missing_publishes: usize,
}

impl ProtocolCheck {
    pub fn from_log(log: &[LogEntry]) -> Self {
        let mut sent: BTreeMap<String, usize> = BTreeMap::new();
        let mut check = ProtocolCheck::default();
        for e in log {
            match (&e.direction, &e.message) {
                (Direction::Sent, Message::Request(r)) => {
                    check.requests += 1;
                    sent.insert(r.id.to_string(), 0);
                }
                (Direction::Received, Message::Response(r)) => {
                    check.responses += 1;
                    match sent.get_mut(&r.id.to_string()) {
                        Some(n) => *n += 1,
                        None => check.unsolicited.push(r.id.to_string()),
                    }
                }
                (Direction::Received, Message::Notification(n)) if n.method == "mini/metrics" => {
                    check.metrics += 1;
                }
                _ => {}
            }
        }
        for (id, n) in sent {
            match n {
                0 => check.unanswered.push(id),
                1 => {}
                _ => check.answered_twice.push(id),
            }
        }
        check
    }

    pub fn ok(&self) -> bool {
        self.unanswered.is_empty()
            && self.answered_twice.is_empty()
            && self.unsolicited.is_empty()
            && self.metrics == self.expected_metrics
            && self.missing_publishes == 0
    }
}

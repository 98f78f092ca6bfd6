//! Newline-delimited JSON protocol for out-of-process labelers and
//! continuation generators.
//!
//! One request line goes out, one response line comes back, and the response
//! must echo the request id. A connection carries one request at a time.

use std::io::{self, BufRead, BufReader, Write};
use std::net::TcpStream;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{ContinuationGenerator, Processor};
use crate::error::ExternalError;
use crate::trace::TaskKind;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "target")]
pub enum Endpoint {
    /// Shell command whose stdin/stdout carry the protocol.
    Command(String),
    /// `host:port` of a listening server.
    Tcp(String),
}

impl Endpoint {
    /// `tcp://host:port` selects TCP; anything else is a shell command.
    pub fn parse(raw: &str) -> Self {
        match raw.strip_prefix("tcp://") {
            Some(addr) => Endpoint::Tcp(addr.to_string()),
            None => Endpoint::Command(raw.to_string()),
        }
    }

    fn describe(&self) -> &str {
        match self {
            Endpoint::Command(c) => c,
            Endpoint::Tcp(a) => a,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExternalSpec {
    pub endpoint: Endpoint,
    #[serde(with = "secs")]
    pub timeout: Duration,
}

impl ExternalSpec {
    pub fn new(endpoint: Endpoint) -> Self {
        Self { endpoint, timeout: DEFAULT_TIMEOUT }
    }
}

mod secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        f64::deserialize(d).map(Duration::from_secs_f64)
    }
}

/// A bidirectional line channel.
pub trait Transport: Send {
    fn send_line(&mut self, line: &str) -> io::Result<()>;
    fn recv_line(&mut self, timeout: Duration) -> Result<String, ExternalError>;
}

/// Child process speaking the protocol on stdin/stdout. Lines are read on a
/// helper thread so that a silent child cannot block past the timeout.
pub struct ChildTransport {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<io::Result<String>>,
}

impl ChildTransport {
    pub fn spawn(command: &str) -> Result<Self, ExternalError> {
        let spawn_err = |source| ExternalError::Spawn { endpoint: command.to_string(), source };
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(spawn_err)?;
        let stdin = child.stdin.take().ok_or_else(|| spawn_err(io::Error::other("stdin unavailable")))?;
        let stdout = child.stdout.take().ok_or_else(|| spawn_err(io::Error::other("stdout unavailable")))?;
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Self { child, stdin, lines })
    }
}

impl Transport for ChildTransport {
    fn send_line(&mut self, line: &str) -> io::Result<()> {
        self.stdin.write_all(line.as_bytes())?;
        self.stdin.write_all(b"\n")?;
        self.stdin.flush()
    }

    fn recv_line(&mut self, timeout: Duration) -> Result<String, ExternalError> {
        match self.lines.recv_timeout(timeout) {
            Ok(Ok(line)) => Ok(line),
            Ok(Err(e)) => Err(ExternalError::BrokenPipe(e)),
            Err(RecvTimeoutError::Timeout) => Err(ExternalError::Timeout(timeout)),
            Err(RecvTimeoutError::Disconnected) => Err(ExternalError::Closed),
        }
    }
}

impl Drop for ChildTransport {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

pub struct TcpTransport {
    writer: TcpStream,
    reader: BufReader<TcpStream>,
}

impl TcpTransport {
    pub fn connect(addr: &str) -> Result<Self, ExternalError> {
        let spawn_err = |source| ExternalError::Spawn { endpoint: addr.to_string(), source };
        let writer = TcpStream::connect(addr).map_err(spawn_err)?;
        let reader = BufReader::new(writer.try_clone().map_err(spawn_err)?);
        Ok(Self { writer, reader })
    }
}

impl Transport for TcpTransport {
    fn send_line(&mut self, line: &str) -> io::Result<()> {
        self.writer.write_all(line.as_bytes())?;
        self.writer.write_all(b"\n")?;
        self.writer.flush()
    }

    fn recv_line(&mut self, timeout: Duration) -> Result<String, ExternalError> {
        self.reader.get_ref().set_read_timeout(Some(timeout)).map_err(ExternalError::BrokenPipe)?;
        let mut line = String::new();
        match self.reader.read_line(&mut line) {
            Ok(0) => Err(ExternalError::Closed),
            Ok(_) => Ok(line.trim_end_matches(['\n', '\r']).to_string()),
            Err(e) if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => {
                Err(ExternalError::Timeout(timeout))
            }
            Err(e) => Err(ExternalError::BrokenPipe(e)),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct LabelRequest<'a> {
    pub id: u64,
    pub task: TaskKind,
    pub tokens: &'a [String],
}

#[derive(Debug, Deserialize)]
pub struct LabelResponse {
    pub id: u64,
    #[serde(default)]
    pub labels: Option<Vec<String>>,
    #[serde(default)]
    pub label: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct ContinuationRequest<'a> {
    pub id: u64,
    pub prefix: &'a [String],
}

#[derive(Debug, Deserialize)]
pub struct ContinuationResponse {
    pub id: u64,
    pub continuation: Vec<String>,
}

/// Lock-step request/response client with per-call timeout.
pub struct LineClient {
    transport: Box<dyn Transport>,
    timeout: Duration,
    next_id: u64,
}

impl LineClient {
    pub fn new(transport: Box<dyn Transport>, timeout: Duration) -> Self {
        Self { transport, timeout, next_id: 1 }
    }

    pub fn connect(spec: &ExternalSpec) -> Result<Self, ExternalError> {
        let transport: Box<dyn Transport> = match &spec.endpoint {
            Endpoint::Command(cmd) => Box::new(ChildTransport::spawn(cmd)?),
            Endpoint::Tcp(addr) => Box::new(TcpTransport::connect(addr)?),
        };
        Ok(Self::new(transport, spec.timeout))
    }

    pub fn next_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    /// Sends one request and waits for the response carrying `id`.
    pub fn call<Req, Resp>(&mut self, id: u64, request: &Req) -> Result<Resp, ExternalError>
    where
        Req: Serialize,
        Resp: DeserializeOwned,
    {
        let line = serde_json::to_string(request).expect("requests serialize");
        self.transport.send_line(&line).map_err(ExternalError::BrokenPipe)?;
        let reply = self.transport.recv_line(self.timeout)?;
        parse_response(id, &reply)
    }
}

fn parse_response<Resp: DeserializeOwned>(expected: u64, line: &str) -> Result<Resp, ExternalError> {
    let malformed = |reason: String| ExternalError::Malformed { line: line.to_string(), reason };
    let value: Value = serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
    let found = value.get("id").and_then(Value::as_u64).ok_or_else(|| malformed("missing integer `id`".into()))?;
    if found != expected {
        return Err(ExternalError::IdMismatch { expected, found });
    }
    if let Some(message) = value.get("error").and_then(Value::as_str) {
        return Err(malformed(format!("endpoint reported an error: {message}")));
    }
    serde_json::from_value(value).map_err(|e| malformed(e.to_string()))
}

/// Labeler behind the line protocol.
pub struct ExternalProcessor {
    client: LineClient,
}

impl ExternalProcessor {
    pub fn connect(spec: &ExternalSpec) -> Result<Self, ExternalError> {
        LineClient::connect(spec).map(|client| Self { client })
    }

    pub fn with_client(client: LineClient) -> Self {
        Self { client }
    }
}

impl Processor for ExternalProcessor {
    fn label(&mut self, tokens: &[String], task: TaskKind) -> Result<Vec<String>, ExternalError> {
        let id = self.client.next_id();
        let response: LabelResponse = self.client.call(id, &LabelRequest { id, task, tokens })?;
        let labels = match (response.labels, response.label) {
            (Some(labels), _) => labels,
            (None, Some(label)) => vec![label],
            (None, None) => {
                return Err(ExternalError::Malformed {
                    line: format!("{{\"id\":{id}}}"),
                    reason: "response has neither `labels` nor `label`".into(),
                })
            }
        };
        let expected = task.labels_at_step(tokens.len());
        if labels.len() != expected {
            return Err(ExternalError::LabelCountMismatch { expected, found: labels.len() });
        }
        Ok(labels)
    }
}

/// Continuation generator behind the line protocol.
pub struct ExternalContinuation {
    client: LineClient,
}

impl ExternalContinuation {
    pub fn connect(spec: &ExternalSpec) -> Result<Self, ExternalError> {
        LineClient::connect(spec).map(|client| Self { client })
    }

    pub fn with_client(client: LineClient) -> Self {
        Self { client }
    }
}

impl ContinuationGenerator for ExternalContinuation {
    fn continue_prefix(&mut self, prefix: &[String]) -> Result<Vec<String>, ExternalError> {
        let id = self.client.next_id();
        let response: ContinuationResponse = self.client.call(id, &ContinuationRequest { id, prefix })?;
        Ok(response.continuation)
    }
}

impl std::fmt::Debug for ExternalProcessor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExternalProcessor").finish_non_exhaustive()
    }
}

pub(crate) fn describe(spec: &ExternalSpec) -> String {
    spec.endpoint.describe().to_string()
}

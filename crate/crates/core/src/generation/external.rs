//! External backend: a line-protocol client. One JSON request object per
//! line out, one JSON response object per line back. Two transports:
//! `cmd:<program args...>` spawns a process per call and speaks over stdio;
//! `tcp:<host:port>` connects per call. Judge backends reuse the same
//! transport with distinct message kinds.

use std::io::{BufRead, BufReader, Write};
use std::process::{Command, Stdio};
use std::sync::mpsc;
use std::time::Duration;

use serde_json::{json, Value as Json};

use crate::corpus::{Diff, DiffCase};
use crate::mutation::Risk;
use crate::workflows::IntentDescription;

use super::{BackendError, GenerationContext, GeneratorBackend};

#[derive(Debug, Clone)]
enum Endpoint {
    Command(Vec<String>),
    Tcp(String),
}

/// Shared line-protocol transport.
#[derive(Debug, Clone)]
pub struct ExternalTransport {
    endpoint: Endpoint,
    timeout: Duration,
}

impl ExternalTransport {
    /// Parse an endpoint spec: `cmd:<program args...>` or `tcp:<host:port>`.
    pub fn parse(spec: &str, timeout: Duration) -> Result<Self, BackendError> {
        if let Some(command) = spec.strip_prefix("cmd:") {
            let parts: Vec<String> = command.split_whitespace().map(str::to_string).collect();
            if parts.is_empty() {
                return Err(BackendError::Protocol("empty cmd endpoint".to_string()));
            }
            Ok(ExternalTransport { endpoint: Endpoint::Command(parts), timeout })
        } else if let Some(addr) = spec.strip_prefix("tcp:") {
            Ok(ExternalTransport { endpoint: Endpoint::Tcp(addr.to_string()), timeout })
        } else {
            Err(BackendError::Protocol(format!(
                "endpoint must start with cmd: or tcp:, got `{spec}`"
            )))
        }
    }

    /// Send one request line, read one response line.
    pub fn call(&self, request: &Json) -> Result<Json, BackendError> {
        let line = serde_json::to_string(request)
            .map_err(|e| BackendError::Protocol(e.to_string()))?;
        let response_line = match &self.endpoint {
            Endpoint::Command(parts) => self.call_command(parts, &line)?,
            Endpoint::Tcp(addr) => self.call_tcp(addr, &line)?,
        };
        serde_json::from_str(&response_line)
            .map_err(|e| BackendError::Protocol(format!("bad response line: {e}")))
    }

    fn call_command(&self, parts: &[String], line: &str) -> Result<String, BackendError> {
        let mut child = Command::new(&parts[0])
            .args(&parts[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| BackendError::Unavailable(format!("{}: {e}", parts[0])))?;
        {
            let mut stdin = child.stdin.take().expect("piped stdin");
            stdin
                .write_all(format!("{line}\n").as_bytes())
                .map_err(|e| BackendError::Unavailable(e.to_string()))?;
        }
        let stdout = child.stdout.take().expect("piped stdout");
        let (sender, receiver) = mpsc::channel();
        std::thread::spawn(move || {
            let mut reader = BufReader::new(stdout);
            let mut buffer = String::new();
            let result = reader.read_line(&mut buffer).map(|_| buffer);
            let _ = sender.send(result);
        });
        let read = receiver.recv_timeout(self.timeout).map_err(|_| {
            let _ = child.kill();
            BackendError::Unavailable(format!("{}: response timeout", parts[0]))
        })?;
        let _ = child.wait();
        let buffer = read.map_err(|e| BackendError::Unavailable(e.to_string()))?;
        if buffer.trim().is_empty() {
            return Err(BackendError::Unavailable(format!("{}: no response line", parts[0])));
        }
        Ok(buffer)
    }

    fn call_tcp(&self, addr: &str, line: &str) -> Result<String, BackendError> {
        let stream = std::net::TcpStream::connect(addr)
            .map_err(|e| BackendError::Unavailable(format!("{addr}: {e}")))?;
        stream
            .set_read_timeout(Some(self.timeout))
            .and_then(|_| stream.set_write_timeout(Some(self.timeout)))
            .map_err(|e| BackendError::Unavailable(e.to_string()))?;
        let mut writer = stream.try_clone().map_err(|e| BackendError::Unavailable(e.to_string()))?;
        writer
            .write_all(format!("{line}\n").as_bytes())
            .map_err(|e| BackendError::Unavailable(e.to_string()))?;
        let mut reader = BufReader::new(stream);
        let mut buffer = String::new();
        reader.read_line(&mut buffer).map_err(|e| BackendError::Unavailable(e.to_string()))?;
        Ok(buffer)
    }
}

pub struct ExternalBackend {
    transport: ExternalTransport,
}

impl ExternalBackend {
    pub fn new(spec: &str, timeout: Duration) -> Result<Self, BackendError> {
        Ok(ExternalBackend { transport: ExternalTransport::parse(spec, timeout)? })
    }

    pub fn transport(&self) -> &ExternalTransport {
        &self.transport
    }
}

fn mutant_summary(ctx: &GenerationContext<'_>) -> Json {
    match ctx.mutant {
        None => Json::Null,
        Some(mutant) => json!({
            "operator_id": mutant.operator_id,
            "file": mutant.file,
            "node_id": mutant.node_id,
            "risk_id": mutant.risk_id,
            "description": mutant.description,
            "mutated_source": mutant.mutated.files.get(&mutant.file).map(|p| p.source_text.clone()),
        }),
    }
}

impl GeneratorBackend for ExternalBackend {
    fn name(&self) -> &str {
        "external"
    }

    fn propose_tests(&self, ctx: &GenerationContext<'_>) -> Result<Vec<String>, BackendError> {
        let sources: serde_json::Map<String, Json> = ctx
            .target
            .files
            .iter()
            .map(|(name, program)| (name.clone(), Json::String(program.source_text.clone())))
            .collect();
        let request = json!({
            "kind": "propose_tests",
            "case_id": ctx.case_id,
            "entry_points": ctx.entry_points,
            "seed_pool": ctx.seed_pool,
            "budget": ctx.budget,
            "target_sources": sources,
            "mutant": mutant_summary(ctx),
            "intent": ctx.intent.map(|i| i.text.clone()),
            "risks": ctx.risks,
        });
        let response = self.transport.call(&request)?;
        let tests = response
            .get("tests")
            .and_then(Json::as_array)
            .ok_or_else(|| BackendError::Protocol("response lacks `tests` array".to_string()))?;
        Ok(tests.iter().filter_map(Json::as_str).map(str::to_string).collect())
    }

    fn infer_intent(
        &self,
        case: &DiffCase,
        changed: &[String],
    ) -> Result<Option<String>, BackendError> {
        let request = json!({
            "kind": "infer_intent",
            "case_id": case.id,
            "title": case.title,
            "summary": case.summary,
            "changed": changed,
        });
        let response = self.transport.call(&request)?;
        Ok(response.get("intent").and_then(Json::as_str).map(str::to_string))
    }

    fn enumerate_risks(
        &self,
        case_id: &str,
        intent: &IntentDescription,
        diff: &Diff,
        cap: usize,
    ) -> Result<Option<Vec<Risk>>, BackendError> {
        let request = json!({
            "kind": "enumerate_risks",
            "case_id": case_id,
            "intent": intent.text,
            "diff": diff,
            "cap": cap,
        });
        let response = self.transport.call(&request)?;
        match response.get("risks") {
            None => Ok(None),
            Some(value) => {
                let risks: Vec<Risk> = serde_json::from_value(value.clone())
                    .map_err(|e| BackendError::Protocol(e.to_string()))?;
                Ok(Some(risks.into_iter().take(cap).collect()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoint_parsing() {
        assert!(ExternalTransport::parse("cmd:cat", Duration::from_secs(1)).is_ok());
        assert!(ExternalTransport::parse("tcp:127.0.0.1:9", Duration::from_secs(1)).is_ok());
        assert!(ExternalTransport::parse("http://x", Duration::from_secs(1)).is_err());
        assert!(ExternalTransport::parse("cmd:", Duration::from_secs(1)).is_err());
    }

    #[test]
    fn missing_command_is_unavailable() {
        let transport =
            ExternalTransport::parse("cmd:/nonexistent-backend-binary", Duration::from_secs(1))
                .unwrap();
        let err = transport.call(&json!({"kind": "propose_tests"})).unwrap_err();
        assert!(matches!(err, BackendError::Unavailable(_)), "{err:?}");
    }

    #[test]
    fn cat_echoes_request_line() {
        // `cat` reflects the request, which is a valid JSON line, so the
        // transport round-trips.
        let transport = ExternalTransport::parse("cmd:cat", Duration::from_secs(5)).unwrap();
        let request = json!({"kind": "probe", "n": 1});
        let response = transport.call(&request).unwrap();
        assert_eq!(response, request);
    }
}

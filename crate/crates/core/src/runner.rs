//! External test-runner adapter. Runs a parent command and a child command,
//! parses their line-protocol event streams into execution traces, and
//! yields the same outcome pair the mini-language path produces, so
//! classification and assessment proceed identically.
//!
//! Protocol (one JSON object per line on stdout):
//!   {"protocol": "catchjit-runner/1"}            handshake, first line
//!   {"event": "call", "name": ..., "args": [..]} trace events
//!   {"event": "return", "name": ..., "value": ..}
//!   {"event": "exception", "kind": .., "message": .., "node_id": ..}
//!   {"event": "assert_fail", "expected": .., "actual": .., "expression_text": ..}
//!   {"event": "step_limit"}
//!   {"event": "runner", "kind": .., "message": ..}   runner-level events
//!   {"event": "outcome", "status": "pass"|"fail"|"error", "error_kind": ..}
//!
//! Runner-level kinds: runner_crash, mock_failure, data_provider_failure,
//! reflection_use, visibility_violation, server_unreachable. A process that
//! exits without a valid handshake or outcome line becomes a single
//! runner_crash event with an error outcome.

use std::process::{Command, Stdio};
use std::time::Duration;

use minilang::{ErrorKind, ExecutionTrace, OutcomeStatus, TestOutcome, TraceEvent, Value};
use serde_json::Value as Json;

pub const RUNNER_PROTOCOL: &str = "catchjit-runner/1";

#[derive(Debug, Clone)]
pub struct RunnerCommand {
    pub program: String,
    pub args: Vec<String>,
}

impl RunnerCommand {
    pub fn new(program: impl Into<String>, args: &[&str]) -> Self {
        RunnerCommand {
            program: program.into(),
            args: args.iter().map(|s| s.to_string()).collect(),
        }
    }
}

fn crash_outcome(message: &str) -> TestOutcome {
    TestOutcome {
        status: OutcomeStatus::Error { kind: ErrorKind::Exception },
        trace: ExecutionTrace {
            events: vec![TraceEvent::Runner {
                kind: "runner_crash".to_string(),
                message: message.to_string(),
            }],
        },
        steps_used: 0,
    }
}

fn parse_value(json: &Json) -> Value {
    serde_json::from_value(json.clone()).unwrap_or(Value::Null)
}

fn parse_event(json: &Json) -> Option<TraceEvent> {
    let event = json.get("event")?.as_str()?;
    let text = |key: &str| json.get(key).and_then(Json::as_str).unwrap_or_default().to_string();
    match event {
        "call" => Some(TraceEvent::Call {
            name: text("name"),
            args: json
                .get("args")
                .and_then(Json::as_array)
                .map(|a| a.iter().map(parse_value).collect())
                .unwrap_or_default(),
        }),
        "return" => Some(TraceEvent::Return {
            name: text("name"),
            value: json.get("value").map(parse_value).unwrap_or(Value::Null),
        }),
        "exception" => Some(TraceEvent::Exception {
            kind: text("kind"),
            message: text("message"),
            node_id: json.get("node_id").and_then(Json::as_u64).unwrap_or(0) as u32,
        }),
        "assert_fail" => Some(TraceEvent::AssertFail {
            expected: json.get("expected").map(parse_value).unwrap_or(Value::Null),
            actual: json.get("actual").map(parse_value).unwrap_or(Value::Null),
            expression_text: text("expression_text"),
        }),
        "step_limit" => Some(TraceEvent::StepLimitExceeded),
        "runner" => Some(TraceEvent::Runner { kind: text("kind"), message: text("message") }),
        _ => None,
    }
}

/// Parse a full protocol stream into an outcome.
pub fn parse_runner_stream(stdout: &str, exit_ok: bool) -> TestOutcome {
    let mut lines = stdout.lines().filter(|l| !l.trim().is_empty());
    let Some(first) = lines.next() else {
        return crash_outcome("no output");
    };
    let handshake: Option<Json> = serde_json::from_str(first).ok();
    let valid_handshake = handshake
        .as_ref()
        .and_then(|h| h.get("protocol"))
        .and_then(Json::as_str)
        .map_or(false, |p| p == RUNNER_PROTOCOL);
    if !valid_handshake {
        return crash_outcome("missing or wrong protocol handshake");
    }

    let mut events = Vec::new();
    let mut outcome: Option<(OutcomeStatus, u64)> = None;
    for line in lines {
        let Ok(json) = serde_json::from_str::<Json>(line) else {
            return crash_outcome("unparseable protocol line");
        };
        if json.get("event").and_then(Json::as_str) == Some("outcome") {
            let status = match json.get("status").and_then(Json::as_str) {
                Some("pass") => OutcomeStatus::Pass,
                Some("fail") => OutcomeStatus::Fail,
                Some("error") => {
                    let kind = match json.get("error_kind").and_then(Json::as_str) {
                        Some("step_limit") => ErrorKind::StepLimit,
                        Some("parse_failure") => ErrorKind::ParseFailure,
                        _ => ErrorKind::Exception,
                    };
                    OutcomeStatus::Error { kind }
                }
                _ => return crash_outcome("outcome line lacks a valid status"),
            };
            let steps = json.get("steps_used").and_then(Json::as_u64).unwrap_or(0);
            outcome = Some((status, steps));
            break;
        }
        match parse_event(&json) {
            Some(event) => events.push(event),
            None => return crash_outcome("unknown protocol event"),
        }
    }

    match outcome {
        Some((status, steps_used)) => {
            TestOutcome { status, trace: ExecutionTrace { events }, steps_used }
        }
        None if exit_ok => crash_outcome("stream ended without an outcome line"),
        None => crash_outcome("runner exited nonzero without an outcome"),
    }
}

fn run_command(command: &RunnerCommand, timeout: Duration) -> TestOutcome {
    let spawned = Command::new(&command.program)
        .args(&command.args)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn();
    let child = match spawned {
        Ok(child) => child,
        Err(e) => return crash_outcome(&format!("{}: {e}", command.program)),
    };

    let (sender, receiver) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let _ = sender.send(child.wait_with_output());
    });
    match receiver.recv_timeout(timeout) {
        Ok(Ok(output)) => {
            let stdout = String::from_utf8_lossy(&output.stdout);
            parse_runner_stream(&stdout, output.status.success())
        }
        Ok(Err(e)) => crash_outcome(&e.to_string()),
        Err(_) => crash_outcome("runner timed out"),
    }
}

/// Run the test under both revisions via external commands; the returned
/// outcome pair feeds the ordinary classify/assess path.
pub fn external_runner_adapter(
    parent_cmd: &RunnerCommand,
    child_cmd: &RunnerCommand,
    timeout: Duration,
) -> (TestOutcome, TestOutcome) {
    (run_command(parent_cmd, timeout), run_command(child_cmd, timeout))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_fail_pair_classifies_as_weak_catch() {
        let parent = parse_runner_stream(
            "{\"protocol\": \"catchjit-runner/1\"}\n{\"event\": \"outcome\", \"status\": \"pass\"}\n",
            true,
        );
        let child = parse_runner_stream(
            concat!(
                "{\"protocol\": \"catchjit-runner/1\"}\n",
                "{\"event\": \"assert_fail\", \"expected\": {\"type\": \"bool\", \"value\": true}, ",
                "\"actual\": {\"type\": \"bool\", \"value\": false}, \"expression_text\": \"assert_true(ok())\"}\n",
                "{\"event\": \"outcome\", \"status\": \"fail\"}\n"
            ),
            true,
        );
        assert_eq!(parent.status, OutcomeStatus::Pass);
        assert_eq!(child.status, OutcomeStatus::Fail);
        assert_eq!(
            crate::workflows::classify(&parent, &child),
            crate::workflows::CatchVerdict::WeakCatch
        );
        assert!(matches!(child.trace.terminal(), Some(TraceEvent::AssertFail { .. })));
    }

    #[test]
    fn missing_handshake_is_a_crash() {
        let outcome = parse_runner_stream("garbage\n", false);
        assert!(matches!(
            outcome.trace.events.first(),
            Some(TraceEvent::Runner { kind, .. }) if kind == "runner_crash"
        ));
        assert!(outcome.status.is_error());
    }

    #[test]
    fn runner_events_are_preserved() {
        let outcome = parse_runner_stream(
            concat!(
                "{\"protocol\": \"catchjit-runner/1\"}\n",
                "{\"event\": \"runner\", \"kind\": \"server_unreachable\", \"message\": \"backend 503\"}\n",
                "{\"event\": \"outcome\", \"status\": \"error\", \"error_kind\": \"exception\"}\n"
            ),
            true,
        );
        assert!(matches!(
            outcome.trace.events.first(),
            Some(TraceEvent::Runner { kind, .. }) if kind == "server_unreachable"
        ));
    }

    #[test]
    fn crashing_command_becomes_runner_crash() {
        let outcome = run_command(
            &RunnerCommand::new("/nonexistent-runner-binary", &[]),
            Duration::from_secs(2),
        );
        assert!(matches!(
            outcome.trace.events.first(),
            Some(TraceEvent::Runner { kind, .. }) if kind == "runner_crash"
        ));
    }
}

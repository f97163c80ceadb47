//! Execution traces and test outcomes. A trace is the ordered list of
//! observable events from one run; at most one terminal event (exception,
//! assertion failure, or step-limit) may appear, and it is always last.

use serde::{Deserialize, Serialize};

use crate::ast::NodeId;
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Call { name: String, args: Vec<Value> },
    Return { name: String, value: Value },
    /// A raised exception. Terminal when last; a non-final exception event
    /// was trapped by the test and recorded in place.
    Exception { kind: String, message: String, node_id: NodeId },
    AssertFail { expected: Value, actual: Value, expression_text: String },
    StepLimitExceeded,
    /// Events produced by external test runners, never by the interpreter.
    /// Kinds include runner_crash, mock_failure, data_provider_failure,
    /// reflection_use, visibility_violation and server_unreachable.
    Runner { kind: String, message: String },
}

impl TraceEvent {
    pub fn is_terminal(&self) -> bool {
        matches!(
            self,
            TraceEvent::Exception { .. }
                | TraceEvent::AssertFail { .. }
                | TraceEvent::StepLimitExceeded
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionTrace {
    pub events: Vec<TraceEvent>,
}

impl ExecutionTrace {
    pub fn terminal(&self) -> Option<&TraceEvent> {
        self.events.last().filter(|e| e.is_terminal())
    }

    /// Exception events present anywhere in the trace, trapped or terminal.
    pub fn exceptions(&self) -> impl Iterator<Item = &TraceEvent> {
        self.events.iter().filter(|e| matches!(e, TraceEvent::Exception { .. }))
    }

    /// Stack-replay well-formedness: every return matches the innermost open
    /// call; assertion failures and step-limit events only appear last;
    /// calls may stay open only when the trace ends in a terminal event.
    /// (Trapped exceptions appear mid-trace, followed by the null returns of
    /// the frames they aborted.)
    pub fn is_well_formed(&self) -> bool {
        let mut stack: Vec<&str> = Vec::new();
        for (i, event) in self.events.iter().enumerate() {
            let must_be_last =
                matches!(event, TraceEvent::AssertFail { .. } | TraceEvent::StepLimitExceeded);
            if must_be_last && i + 1 != self.events.len() {
                return false;
            }
            match event {
                TraceEvent::Call { name, .. } => stack.push(name),
                TraceEvent::Return { name, .. } => {
                    if stack.pop() != Some(name.as_str()) {
                        return false;
                    }
                }
                _ => {}
            }
        }
        stack.is_empty() || self.terminal().is_some()
    }

    /// Plain-text rendering, one event per line. Pattern rules cite evidence
    /// by excerpting this text.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for event in &self.events {
            match event {
                TraceEvent::Call { name, args } => {
                    let args: Vec<String> =
                        args.iter().map(|a| crate::printer::render_value(a)).collect();
                    out.push_str(&format!("call {}({})\n", name, args.join(", ")));
                }
                TraceEvent::Return { name, value } => {
                    out.push_str(&format!(
                        "return {} -> {}\n",
                        name,
                        crate::printer::render_value(value)
                    ));
                }
                TraceEvent::Exception { kind, message, node_id } => {
                    out.push_str(&format!(
                        "exception kind={} message={} at node {}\n",
                        kind, message, node_id
                    ));
                }
                TraceEvent::AssertFail { expected, actual, expression_text } => {
                    out.push_str(&format!(
                        "assert failed: {} expected {} actual {}\n",
                        expression_text,
                        crate::printer::render_value(expected),
                        crate::printer::render_value(actual)
                    ));
                }
                TraceEvent::StepLimitExceeded => out.push_str("step limit exceeded\n"),
                TraceEvent::Runner { kind, message } => {
                    out.push_str(&format!("runner {kind}: {message}\n"));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Exception,
    StepLimit,
    ParseFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum OutcomeStatus {
    Pass,
    Fail,
    Error { kind: ErrorKind },
}

impl OutcomeStatus {
    pub fn is_pass(&self) -> bool {
        matches!(self, OutcomeStatus::Pass)
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, OutcomeStatus::Fail)
    }

    pub fn is_error(&self) -> bool {
        matches!(self, OutcomeStatus::Error { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub status: OutcomeStatus,
    pub trace: ExecutionTrace,
    pub steps_used: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(name: &str) -> TraceEvent {
        TraceEvent::Call { name: name.into(), args: vec![] }
    }

    fn ret(name: &str) -> TraceEvent {
        TraceEvent::Return { name: name.into(), value: Value::Null }
    }

    #[test]
    fn balanced_trace_is_well_formed() {
        let trace = ExecutionTrace { events: vec![call("f"), call("g"), ret("g"), ret("f")] };
        assert!(trace.is_well_formed());
    }

    #[test]
    fn mismatched_return_is_malformed() {
        let trace = ExecutionTrace { events: vec![call("f"), ret("g")] };
        assert!(!trace.is_well_formed());
    }

    #[test]
    fn open_calls_need_a_terminal() {
        let open = ExecutionTrace { events: vec![call("f")] };
        assert!(!open.is_well_formed());
        let aborted = ExecutionTrace {
            events: vec![
                call("f"),
                TraceEvent::Exception { kind: "boom".into(), message: "boom".into(), node_id: 0 },
            ],
        };
        assert!(aborted.is_well_formed());
    }

    #[test]
    fn terminal_must_be_last() {
        let trace = ExecutionTrace { events: vec![TraceEvent::StepLimitExceeded, call("f")] };
        assert!(!trace.is_well_formed());
    }
}

//! Candidate test production: the deterministic observation-based template
//! generator, a mutation-guided kill filter, and the pluggable backend seam
//! the pipeline uses in place of hosted model generation.

pub mod external;
pub mod filter;
pub mod scripted;
pub mod seeds;
pub mod template;

pub use external::{ExternalBackend, ExternalTransport};
pub use filter::{kill_filter, mutation_guided_filter, KillEvidence};
pub use scripted::{ScriptedFixture, ScriptedJudgment, ScriptedMock};
pub use seeds::{derive_seed_pool, tuples_for_arity};
pub use template::{generate_observation_tests, generate_speculative_tests, TemplateGenerator};

use minilang::{parse_test_statements, Expr, Value};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Diff, DiffCase, ProgramSet};
use crate::mutation::{Mutant, Risk};
use crate::workflows::{IntentDescription, WorkflowTag};

#[derive(Debug, Clone, Error)]
pub enum BackendError {
    #[error("backend unavailable: {0}")]
    Unavailable(String),
    #[error("backend protocol error: {0}")]
    Protocol(String),
}

/// Where a candidate test came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub workflow: WorkflowTag,
    pub backend: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entry: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operator_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mutant_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mutant_node: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub risk_id: Option<String>,
    /// Speculative candidates carry fabricated expectations; they are never
    /// emitted as workflow output, only counted by the coincidental view.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub speculative: bool,
}

impl Provenance {
    pub fn new(workflow: WorkflowTag, backend: &str) -> Self {
        Provenance {
            workflow,
            backend: backend.to_string(),
            entry: None,
            operator_id: None,
            mutant_file: None,
            mutant_node: None,
            risk_id: None,
            speculative: false,
        }
    }

    pub fn with_entry(mut self, entry: &str) -> Self {
        self.entry = Some(entry.to_string());
        self
    }

    pub fn with_mutant(mut self, mutant: &Mutant) -> Self {
        self.operator_id = Some(mutant.operator_id.clone());
        self.mutant_file = Some(mutant.file.clone());
        self.mutant_node = Some(mutant.node_id);
        self.risk_id = mutant.risk_id.clone();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestCase {
    pub id: String,
    pub source: String,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TestCaseError {
    #[error("test does not parse: {0}")]
    Unparseable(String),
    #[error("test contains no assertion")]
    NoAssertion,
}

impl TestCase {
    /// Validating constructor: the source must parse and contain at least
    /// one assertion.
    pub fn new(id: String, source: String, provenance: Provenance) -> Result<Self, TestCaseError> {
        let script =
            parse_test_statements(&source).map_err(|e| TestCaseError::Unparseable(e.to_string()))?;
        let mut has_assertion = false;
        crate::mutation::rewrite::for_each_expr_in_stmts(&script.stmts, &mut |expr| {
            if let Expr::Call { callee, .. } = expr {
                if callee == "assert_eq" || callee == "assert_true" {
                    has_assertion = true;
                }
            }
        });
        if !has_assertion {
            return Err(TestCaseError::NoAssertion);
        }
        Ok(TestCase { id, source, provenance })
    }

    /// Entry function under test: the provenance entry when present, else
    /// the first user call in the source.
    pub fn entry_function(&self) -> Option<String> {
        if let Some(entry) = &self.provenance.entry {
            return Some(entry.clone());
        }
        let script = parse_test_statements(&self.source).ok()?;
        let mut found = None;
        crate::mutation::rewrite::for_each_expr_in_stmts(&script.stmts, &mut |expr| {
            if found.is_none() {
                if let Expr::Call { callee, .. } = expr {
                    if !minilang::parser::INTRINSIC_NAMES.contains(&callee.as_str()) {
                        found = Some(callee.clone());
                    }
                }
            }
        });
        found
    }
}

/// Sequential id allocator: `<prefix>-t001`, `<prefix>-t002`, ...
#[derive(Debug, Clone)]
pub struct IdGen {
    prefix: String,
    next: usize,
}

impl IdGen {
    pub fn new(prefix: impl Into<String>) -> Self {
        IdGen { prefix: prefix.into(), next: 1 }
    }

    pub fn next_id(&mut self) -> String {
        let id = format!("{}-t{:03}", self.prefix, self.next);
        self.next += 1;
        id
    }
}

/// Everything a backend may draw on when proposing tests.
pub struct GenerationContext<'a> {
    pub case_id: &'a str,
    /// Programs generation observes (always the parent side).
    pub target: &'a ProgramSet,
    pub entry_points: &'a [String],
    pub seed_pool: &'a [Value],
    pub tuple_cap: usize,
    pub budget: usize,
    pub step_limit: u64,
    pub mutant: Option<&'a Mutant>,
    pub intent: Option<&'a IntentDescription>,
    pub risks: &'a [Risk],
}

/// The pluggable generation seam. `propose_tests` is the required surface;
/// intent inference and risk enumeration return `None` to fall back to the
/// built-in heuristics.
pub trait GeneratorBackend: Send + Sync {
    fn name(&self) -> &str;

    fn propose_tests(&self, ctx: &GenerationContext<'_>) -> Result<Vec<String>, BackendError>;

    fn infer_intent(
        &self,
        case: &DiffCase,
        changed: &[String],
    ) -> Result<Option<String>, BackendError> {
        let _ = (case, changed);
        Ok(None)
    }

    fn enumerate_risks(
        &self,
        case_id: &str,
        intent: &IntentDescription,
        diff: &Diff,
        cap: usize,
    ) -> Result<Option<Vec<Risk>>, BackendError> {
        let _ = (case_id, intent, diff, cap);
        Ok(None)
    }
}

#[derive(Debug, Clone, Default)]
pub struct GenerationOutput {
    pub tests: Vec<TestCase>,
    /// Proposals dropped because they failed to parse or lacked assertions.
    pub dropped: usize,
}

/// Run a backend and validate its proposals: unparseable or assertion-free
/// proposals are dropped and counted, never repaired; at most `budget`
/// survivors, in proposal order.
pub fn generate_via_backend(
    backend: &dyn GeneratorBackend,
    ctx: &GenerationContext<'_>,
    budget: usize,
    ids: &mut IdGen,
    provenance: &Provenance,
) -> Result<GenerationOutput, BackendError> {
    let proposals = backend.propose_tests(ctx)?;
    let mut output = GenerationOutput::default();
    for source in proposals {
        if output.tests.len() >= budget {
            break;
        }
        match TestCase::new(ids.next_id(), source, provenance.clone()) {
            Ok(test) => output.tests.push(test),
            Err(_) => output.dropped += 1,
        }
    }
    Ok(output)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn provenance() -> Provenance {
        Provenance::new(WorkflowTag::DodgyDiff, "test")
    }

    #[test]
    fn test_case_requires_assertion() {
        let err = TestCase::new("t".into(), "f(1);".into(), provenance()).unwrap_err();
        assert_eq!(err, TestCaseError::NoAssertion);
        assert!(TestCase::new("t".into(), "assert_eq(f(1), 2);".into(), provenance()).is_ok());
    }

    #[test]
    fn test_case_rejects_bad_syntax() {
        let err = TestCase::new("t".into(), "assert_eq(f(1), ;".into(), provenance()).unwrap_err();
        assert!(matches!(err, TestCaseError::Unparseable(_)));
    }

    #[test]
    fn entry_function_from_source() {
        let test =
            TestCase::new("t".into(), "assert_eq(trap(g(1)), \"boom\");".into(), provenance())
                .unwrap();
        assert_eq!(test.entry_function().as_deref(), Some("g"));
    }

    struct CannedBackend(Vec<&'static str>);

    impl GeneratorBackend for CannedBackend {
        fn name(&self) -> &str {
            "canned"
        }

        fn propose_tests(&self, _ctx: &GenerationContext<'_>) -> Result<Vec<String>, BackendError> {
            Ok(self.0.iter().map(|s| s.to_string()).collect())
        }
    }

    #[test]
    fn backend_proposals_validated_and_counted() {
        let set = ProgramSet::new();
        let ctx = GenerationContext {
            case_id: "case",
            target: &set,
            entry_points: &[],
            seed_pool: &[],
            tuple_cap: 8,
            budget: 10,
            step_limit: 1000,
            mutant: None,
            intent: None,
            risks: &[],
        };
        let backend =
            CannedBackend(vec!["assert_eq(f(1), 2);", "not a test ;;;", "assert_true(g());"]);
        let mut ids = IdGen::new("case-x");
        let output =
            generate_via_backend(&backend, &ctx, 10, &mut ids, &provenance()).unwrap();
        assert_eq!(output.tests.len(), 2);
        assert_eq!(output.dropped, 1);
        assert_eq!(output.tests[0].id, "case-x-t001");
    }

    #[test]
    fn budget_truncates_survivors() {
        let set = ProgramSet::new();
        let ctx = GenerationContext {
            case_id: "case",
            target: &set,
            entry_points: &[],
            seed_pool: &[],
            tuple_cap: 8,
            budget: 1,
            step_limit: 1000,
            mutant: None,
            intent: None,
            risks: &[],
        };
        let backend = CannedBackend(vec!["assert_eq(f(1), 2);", "assert_true(g());"]);
        let mut ids = IdGen::new("p");
        let output = generate_via_backend(&backend, &ctx, 1, &mut ids, &provenance()).unwrap();
        assert_eq!(output.tests.len(), 1);
    }
}

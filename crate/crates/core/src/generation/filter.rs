//! Mutation-guided filtering: keep exactly the tests that pass on the base
//! programs and fail (or error) on a variant, with the kill evidence.

use minilang::{execute, OutcomeStatus, TestOutcome};
use serde::{Deserialize, Serialize};

use crate::corpus::ProgramSet;
use crate::mutation::Mutant;

use super::TestCase;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KillEvidence {
    /// Status the test produced on the variant it kills.
    pub variant_status: OutcomeStatus,
    /// Terminal trace line on the variant, when any.
    pub variant_terminal: Option<String>,
}

fn terminal_line(outcome: &TestOutcome) -> Option<String> {
    outcome.trace.terminal().map(|event| {
        let mut text = minilang::ExecutionTrace { events: vec![event.clone()] }.render();
        text.truncate(text.trim_end().len());
        text
    })
}

/// Generic kill filter against any variant program set.
pub fn kill_filter(
    tests: &[TestCase],
    base: &ProgramSet,
    variant: &ProgramSet,
    step_limit: u64,
) -> Vec<(TestCase, KillEvidence)> {
    let base_refs = base.programs();
    let variant_refs = variant.programs();
    let mut kept = Vec::new();
    for test in tests {
        let on_base = execute(&base_refs, &test.source, step_limit);
        if !on_base.status.is_pass() {
            continue;
        }
        let on_variant = execute(&variant_refs, &test.source, step_limit);
        if on_variant.status.is_pass() {
            continue;
        }
        kept.push((
            test.clone(),
            KillEvidence {
                variant_status: on_variant.status,
                variant_terminal: terminal_line(&on_variant),
            },
        ));
    }
    kept
}

/// Tests that pass on the parent and kill the mutant.
pub fn mutation_guided_filter(
    tests: &[TestCase],
    parent: &ProgramSet,
    mutant: &Mutant,
    step_limit: u64,
) -> Vec<(TestCase, KillEvidence)> {
    kill_filter(tests, parent, &mutant.mutated, step_limit)
}

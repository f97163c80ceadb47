//! Catch-generation workflows: the verdict classifier, intent inference,
//! risk enumeration, and the four runnable workflows behind a common trait,
//! registered by name and selected at runtime.

pub mod harden;
pub mod harvest;
pub mod intent;
pub mod registry;
pub mod runs;

pub use harvest::harvest_hardening;
pub use intent::{enumerate_risks, infer_intent, IntentDescription};
pub use registry::{Budgets, Workflow, WorkflowContext, WorkflowRegistry};
pub use runs::{ExecutedTest, WorkflowResult};

use serde::{Deserialize, Serialize};

use minilang::{OutcomeStatus, TestOutcome};

/// The five approaches; four are runnable workflows, the coincidental-catch
/// baseline is a reporting view over harden-no-coverage candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorkflowTag {
    CoincidentalCatch,
    HardenNoCoverage,
    HardenMutationGuided,
    DodgyDiff,
    IntentAware,
}

impl WorkflowTag {
    pub const ALL: [WorkflowTag; 5] = [
        WorkflowTag::CoincidentalCatch,
        WorkflowTag::HardenNoCoverage,
        WorkflowTag::HardenMutationGuided,
        WorkflowTag::DodgyDiff,
        WorkflowTag::IntentAware,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            WorkflowTag::CoincidentalCatch => "coincidental_catch",
            WorkflowTag::HardenNoCoverage => "harden_no_coverage",
            WorkflowTag::HardenMutationGuided => "harden_mutation_guided",
            WorkflowTag::DodgyDiff => "dodgy_diff",
            WorkflowTag::IntentAware => "intent_aware",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|tag| tag.name() == name)
    }

    pub fn is_diff_aware(&self) -> bool {
        matches!(self, WorkflowTag::DodgyDiff | WorkflowTag::IntentAware)
    }
}

/// Classification of a candidate test from its two outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatchVerdict {
    /// Passes on the parent, fails on the child.
    WeakCatch,
    /// Passes on both sides: a hardening test found by the way.
    CoincidentalHarden,
    /// Does not pass on the parent; useless as a catch.
    Invalid,
    /// Parent passes but the child run ends in an infrastructure-style
    /// error (exception, step limit) rather than an assertion failure.
    ErrorOutcome,
}

/// Verdict truth table. Invalid (anything not passing on the parent) takes
/// precedence over ErrorOutcome.
pub fn classify(parent: &TestOutcome, child: &TestOutcome) -> CatchVerdict {
    match (parent.status, child.status) {
        (OutcomeStatus::Pass, OutcomeStatus::Fail) => CatchVerdict::WeakCatch,
        (OutcomeStatus::Pass, OutcomeStatus::Pass) => CatchVerdict::CoincidentalHarden,
        (OutcomeStatus::Pass, OutcomeStatus::Error { .. }) => CatchVerdict::ErrorOutcome,
        (OutcomeStatus::Fail, _) | (OutcomeStatus::Error { .. }, _) => CatchVerdict::Invalid,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use minilang::{ErrorKind, ExecutionTrace};

    fn outcome(status: OutcomeStatus) -> TestOutcome {
        TestOutcome { status, trace: ExecutionTrace::default(), steps_used: 0 }
    }

    #[test]
    fn truth_table_is_total_over_status_grid() {
        use OutcomeStatus::*;
        let statuses = [
            Pass,
            Fail,
            Error { kind: ErrorKind::Exception },
            Error { kind: ErrorKind::StepLimit },
        ];
        for parent in statuses {
            for child in statuses {
                let verdict = classify(&outcome(parent), &outcome(child));
                let expected = match (parent, child) {
                    (Pass, Fail) => CatchVerdict::WeakCatch,
                    (Pass, Pass) => CatchVerdict::CoincidentalHarden,
                    (Pass, Error { .. }) => CatchVerdict::ErrorOutcome,
                    (Fail, _) | (Error { .. }, _) => CatchVerdict::Invalid,
                };
                assert_eq!(verdict, expected, "({parent:?}, {child:?})");
            }
        }
    }

    #[test]
    fn invalid_takes_precedence_over_error() {
        let fail = outcome(OutcomeStatus::Fail);
        let error = outcome(OutcomeStatus::Error { kind: ErrorKind::StepLimit });
        assert_eq!(classify(&fail, &error), CatchVerdict::Invalid);
        assert_eq!(classify(&error, &error.clone()), CatchVerdict::Invalid);
    }

    #[test]
    fn workflow_names_roundtrip() {
        for tag in WorkflowTag::ALL {
            assert_eq!(WorkflowTag::from_name(tag.name()), Some(tag));
        }
        assert_eq!(WorkflowTag::from_name("nope"), None);
    }
}

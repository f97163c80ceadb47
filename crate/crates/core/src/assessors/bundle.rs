//! The unit assessors work on: one weak catch with everything a judge may
//! look at — test code, both outcomes, the diff, and the inferred intent.

use minilang::TestOutcome;

use crate::corpus::{Diff, DiffCase};
use crate::generation::TestCase;
use crate::workflows::{classify, CatchVerdict, IntentDescription};

#[derive(Debug, Clone)]
pub struct CatchBundle<'a> {
    pub case: &'a DiffCase,
    pub test: &'a TestCase,
    pub parent_outcome: &'a TestOutcome,
    pub child_outcome: &'a TestOutcome,
    pub diff: &'a Diff,
    pub intent: &'a IntentDescription,
}

impl<'a> CatchBundle<'a> {
    /// Bundles exist only for weak catches.
    pub fn new(
        case: &'a DiffCase,
        test: &'a TestCase,
        parent_outcome: &'a TestOutcome,
        child_outcome: &'a TestOutcome,
        diff: &'a Diff,
        intent: &'a IntentDescription,
    ) -> Self {
        debug_assert_eq!(classify(parent_outcome, child_outcome), CatchVerdict::WeakCatch);
        CatchBundle { case, test, parent_outcome, child_outcome, diff, intent }
    }

    pub fn rendered(&self) -> BundleText {
        BundleText {
            execution_log: self.child_outcome.trace.render(),
            test_code: self.test.source.clone(),
            diff_text: self.diff.render(),
            intent_text: self.intent.text.clone(),
        }
    }
}

/// The three evidence sources rendered to text (plus the intent), exactly
/// what evidence excerpts are verified against.
#[derive(Debug, Clone)]
pub struct BundleText {
    pub execution_log: String,
    pub test_code: String,
    pub diff_text: String,
    pub intent_text: String,
}

impl BundleText {
    pub fn source_text(&self, source: super::rules::SourceKind) -> &str {
        match source {
            super::rules::SourceKind::ExecutionLog => &self.execution_log,
            super::rules::SourceKind::TestCode => &self.test_code,
            super::rules::SourceKind::Diff => &self.diff_text,
            super::rules::SourceKind::Intent => &self.intent_text,
        }
    }
}

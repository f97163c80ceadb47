//! The run report: one schema-versioned JSON document holding everything a
//! run produced. Every human-readable rendering derives from it; the
//! timestamp is the only non-deterministic field.

pub mod render;
pub mod statbuild;

pub use statbuild::{build_stat_report, AssessorKind, ScorePolarity, StatReport, SubsetKey};

use serde::{Deserialize, Serialize};

use crate::assessors::{Assessment, ReviewDecision};
use crate::config::RunConfig;
use crate::corpus::{DiffStatus, GroundTruth};
use crate::generation::TestCase;
use crate::workflows::{CatchVerdict, WorkflowResult, WorkflowTag};

pub const REPORT_SCHEMA: &str = "catchjit-report/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub id: String,
    pub title: String,
    pub status: DiffStatus,
    pub risk_score: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<GroundTruth>,
    /// False when the risk threshold skipped the case.
    pub processed: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub results: Vec<WorkflowResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueEntry {
    pub catch_id: String,
    pub case_id: String,
    pub rank_key: f64,
    pub decision: ReviewDecision,
}

/// One row of the summary table, shaped like the weak-catch results table:
/// totals, rates, and per-diff coverage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub workflow: WorkflowTag,
    pub total_tests: usize,
    pub weak_catches: usize,
    pub pct_weak_catch: f64,
    pub diffs_with_tests: usize,
    pub diffs_with_catches: usize,
    pub pct_diffs_caught: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
}

impl Summary {
    pub fn row(&self, workflow: WorkflowTag) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.workflow == workflow)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    /// Unix seconds; the single non-deterministic field, isolated here for
    /// diffability.
    pub timestamp_unix: u64,
    pub config: RunConfig,
    pub cases: Vec<CaseRecord>,
    pub assessments: Vec<Assessment>,
    /// Ranked review queue, best candidate first, with the filter decision.
    pub review_queue: Vec<QueueEntry>,
    pub harvested_hardening: Vec<TestCase>,
    pub summary: Summary,
    pub stats: StatReport,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// The report with its timestamp zeroed, for byte-comparison.
    pub fn normalized(&self) -> RunReport {
        RunReport { timestamp_unix: 0, ..self.clone() }
    }
}

fn percentage(numerator: usize, denominator: usize) -> f64 {
    if denominator == 0 {
        0.0
    } else {
        100.0 * numerator as f64 / denominator as f64
    }
}

/// Recompute the summary from per-case records. The report builder uses
/// exactly this function, so stored counters are re-derivable by
/// construction; the test suite re-runs it against shipped reports.
pub fn compute_summary(cases: &[CaseRecord], workflows: &[WorkflowTag]) -> Summary {
    let mut rows = Vec::new();
    for workflow in WorkflowTag::ALL {
        if !workflows.contains(&workflow) {
            continue;
        }
        if workflow == WorkflowTag::CoincidentalCatch {
            rows.push(coincidental_row(cases));
            continue;
        }
        let mut total_tests = 0usize;
        let mut weak = 0usize;
        let mut diffs_with_tests = 0usize;
        let mut diffs_with_catches = 0usize;
        for case in cases {
            let mut case_tests = 0usize;
            let mut case_catches = 0usize;
            for result in case.results.iter().filter(|r| r.workflow == Some(workflow)) {
                for executed in result.counted_tests() {
                    // The no-coverage baseline counts what it emits (its
                    // pass-on-parent tests); the mutation-guided flavors
                    // count every candidate they generated.
                    let counted = match workflow {
                        WorkflowTag::HardenNoCoverage => executed.retained,
                        _ => true,
                    };
                    if counted {
                        case_tests += 1;
                        if executed.retained && executed.verdict == CatchVerdict::WeakCatch {
                            case_catches += 1;
                        }
                    }
                }
            }
            total_tests += case_tests;
            weak += case_catches;
            if case_tests > 0 {
                diffs_with_tests += 1;
            }
            if case_catches > 0 {
                diffs_with_catches += 1;
            }
        }
        rows.push(SummaryRow {
            workflow,
            total_tests,
            weak_catches: weak,
            pct_weak_catch: percentage(weak, total_tests),
            diffs_with_tests,
            diffs_with_catches,
            pct_diffs_caught: percentage(diffs_with_catches, diffs_with_tests),
        });
    }
    Summary { rows }
}

/// The coincidental-catch view: over every harden-no-coverage candidate
/// (speculative ones included), the pool is the tests that fail on the
/// child; the rescued weak catches are the pool members that pass on the
/// parent.
fn coincidental_row(cases: &[CaseRecord]) -> SummaryRow {
    let mut pool = 0usize;
    let mut rescued = 0usize;
    let mut diffs_with_pool = 0usize;
    let mut diffs_with_rescued = 0usize;
    for case in cases {
        let mut case_pool = 0usize;
        let mut case_rescued = 0usize;
        for result in case
            .results
            .iter()
            .filter(|r| r.workflow == Some(WorkflowTag::HardenNoCoverage))
        {
            for executed in &result.executed {
                if !executed.child_outcome.status.is_pass() {
                    case_pool += 1;
                    if executed.verdict == CatchVerdict::WeakCatch {
                        case_rescued += 1;
                    }
                }
            }
        }
        pool += case_pool;
        rescued += case_rescued;
        if case_pool > 0 {
            diffs_with_pool += 1;
        }
        if case_rescued > 0 {
            diffs_with_rescued += 1;
        }
    }
    SummaryRow {
        workflow: WorkflowTag::CoincidentalCatch,
        total_tests: pool,
        weak_catches: rescued,
        pct_weak_catch: percentage(rescued, pool),
        diffs_with_tests: diffs_with_pool,
        diffs_with_catches: diffs_with_rescued,
        pct_diffs_caught: percentage(diffs_with_rescued, diffs_with_pool),
    }
}

//! Judge backends and the two judge-derived scores: the normalized
//! answer-token probability (TP Prob) and the ensemble categorical
//! likelihood median (Bucket Med).

use std::time::Duration;

use serde_json::json;

use minilang::{TraceEvent, Value};

use crate::generation::{
    BackendError, ExternalTransport, ScriptedFixture, ScriptedJudgment,
};

use super::bundle::CatchBundle;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BucketCategory {
    High,
    Medium,
    Low,
}

impl BucketCategory {
    /// High 1.0, Medium 0.0, Low -1.0.
    pub fn score(&self) -> f64 {
        match self {
            BucketCategory::High => 1.0,
            BucketCategory::Medium => 0.0,
            BucketCategory::Low => -1.0,
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text.to_ascii_lowercase().as_str() {
            "high" => Some(BucketCategory::High),
            "medium" => Some(BucketCategory::Medium),
            "low" => Some(BucketCategory::Low),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinaryJudgment {
    pub yes: bool,
    /// Probability of the answer token, in (0, 1].
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BucketJudgment {
    pub category: BucketCategory,
    pub rationale: String,
}

pub trait JudgeBackend: Send + Sync {
    /// Instance id, used to attribute rationales.
    fn id(&self) -> String;

    /// Binary classification: is this failure an unexpected bug?
    fn judge_binary(&self, bundle: &CatchBundle<'_>) -> Result<BinaryJudgment, BackendError>;

    /// Categorical likelihood with a textual rationale.
    fn judge_bucket(&self, bundle: &CatchBundle<'_>) -> Result<BucketJudgment, BackendError>;
}

/// TP Prob: +(2p - 1) for yes, -(2p - 1) for no. A certain yes maps to +1,
/// a certain no to -1, and a coin-flip yes to 0.
pub fn judge_tp_prob(
    bundle: &CatchBundle<'_>,
    backend: &dyn JudgeBackend,
) -> Result<f64, BackendError> {
    let judgment = backend.judge_binary(bundle)?;
    let p = judgment.probability;
    if !(p > 0.0 && p <= 1.0) {
        return Err(BackendError::Protocol(format!(
            "answer-token probability {p} outside (0, 1]"
        )));
    }
    let confidence = 2.0 * p - 1.0;
    Ok(if judgment.yes { confidence } else { -confidence })
}

/// Rationale attributed to one judge; never aggregated across the ensemble.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct JudgeRationale {
    pub judge_id: String,
    pub rationale: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BucketMedian {
    /// Median of the per-judge scores; None when every judge failed.
    pub bucket_med: Option<f64>,
    pub bucket_scores: Vec<f64>,
    pub rationales: Vec<JudgeRationale>,
    /// Judges excluded because they errored.
    pub failed_judges: Vec<String>,
}

/// Bucket Med: each judge's category maps to {1.0, 0.0, -1.0}; the ensemble
/// aggregates by median (lower median for even counts). Failed judges are
/// excluded and logged, never defaulted.
pub fn judge_bucket_med(bundle: &CatchBundle<'_>, ensemble: &[&dyn JudgeBackend]) -> BucketMedian {
    assert!(!ensemble.is_empty(), "ensemble must be non-empty");
    let mut result = BucketMedian::default();
    for judge in ensemble {
        match judge.judge_bucket(bundle) {
            Ok(judgment) => {
                result.bucket_scores.push(judgment.category.score());
                result
                    .rationales
                    .push(JudgeRationale { judge_id: judge.id(), rationale: judgment.rationale });
            }
            Err(_) => result.failed_judges.push(judge.id()),
        }
    }
    result.bucket_med = lower_median(&result.bucket_scores);
    result
}

/// Sort-based median; even-sized samples take the lower middle value.
pub fn lower_median(scores: &[f64]) -> Option<f64> {
    if scores.is_empty() {
        return None;
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("scores are finite"));
    Some(sorted[(sorted.len() - 1) / 2])
}

/// A deterministic judge driven by trace shape heuristics. `strictness`
/// varies the thresholds so an ensemble of heuristic judges does not
/// collapse into identical raters.
pub struct HeuristicJudge {
    pub strictness: i32,
}

impl HeuristicJudge {
    pub fn new(strictness: i32) -> Self {
        HeuristicJudge { strictness }
    }

    /// A true-positive leaning in [0, 1] from the child failure shape.
    fn leaning(&self, bundle: &CatchBundle<'_>) -> (f64, String) {
        let infra_kinds = [
            "not_implemented",
            "undefined_variable",
            "undefined_function",
            "type_error",
            "arity_mismatch",
            "stack_overflow",
            "overflow",
        ];
        let trace = &bundle.child_outcome.trace;
        let raised_kind = trace.exceptions().find_map(|e| match e {
            TraceEvent::Exception { kind, .. } => Some(kind.clone()),
            _ => None,
        });
        let runner_event = trace
            .events
            .iter()
            .any(|e| matches!(e, TraceEvent::Runner { .. }));

        let base = if runner_event {
            (0.1, "the failure looks environmental".to_string())
        } else if let Some(kind) = raised_kind {
            if infra_kinds.contains(&kind.as_str()) {
                (0.12, format!("failure raises `{kind}`, which tracks scaffolding rather than behavior"))
            } else if kind == "key_out_of_bounds" || kind == "empty_container" || kind == "create_failure" {
                (0.72, format!("container or construction broke (`{kind}`) without the test asking for it"))
            } else {
                (0.6, format!("child run raises `{kind}` where the parent completed"))
            }
        } else {
            match trace.terminal() {
                Some(TraceEvent::AssertFail { expected, actual, .. }) => match (expected, actual) {
                    (Value::Bool(_), Value::Bool(_)) => {
                        (0.8, "an asserted boolean flipped between parent and child".to_string())
                    }
                    (expected, Value::Null) if !expected.is_null() => {
                        (0.75, "a previously concrete value became null".to_string())
                    }
                    (expected, actual) if actual.is_reordered_map_of(expected) => {
                        (0.2, "only the order of map entries moved".to_string())
                    }
                    _ => (0.55, "an asserted value changed between parent and child".to_string()),
                },
                Some(TraceEvent::StepLimitExceeded) => {
                    (0.15, "the child run spun past its step budget".to_string())
                }
                _ => (0.5, "no clear signal either way".to_string()),
            }
        };
        let adjusted = (base.0 - self.strictness as f64 * 0.04).clamp(0.02, 0.98);
        (adjusted, base.1)
    }
}

impl JudgeBackend for HeuristicJudge {
    fn id(&self) -> String {
        format!("heuristic#{}", self.strictness)
    }

    fn judge_binary(&self, bundle: &CatchBundle<'_>) -> Result<BinaryJudgment, BackendError> {
        let (leaning, _) = self.leaning(bundle);
        if leaning >= 0.5 {
            Ok(BinaryJudgment { yes: true, probability: leaning })
        } else {
            Ok(BinaryJudgment { yes: false, probability: 1.0 - leaning })
        }
    }

    fn judge_bucket(&self, bundle: &CatchBundle<'_>) -> Result<BucketJudgment, BackendError> {
        let (leaning, rationale) = self.leaning(bundle);
        let category = if leaning >= 0.7 {
            BucketCategory::High
        } else if leaning >= 0.45 {
            BucketCategory::Medium
        } else {
            BucketCategory::Low
        };
        Ok(BucketJudgment { category, rationale })
    }
}

/// A judge scripted by the corpus author through the ground-truth block: a
/// catch is judged a true positive exactly when its case is marked buggy and
/// the failing run implicates the recorded culprit function.
pub struct GroundTruthJudge;

impl GroundTruthJudge {
    fn is_true_positive(bundle: &CatchBundle<'_>) -> bool {
        let Some(truth) = &bundle.case.ground_truth else { return false };
        if !truth.buggy {
            return false;
        }
        match &truth.culprit {
            None => true,
            Some(culprit) => {
                let trace_hits = bundle.child_outcome.trace.events.iter().any(|event| {
                    matches!(event, TraceEvent::Call { name, .. } if name == culprit)
                });
                trace_hits || bundle.test.source.contains(culprit.as_str())
            }
        }
    }
}

impl JudgeBackend for GroundTruthJudge {
    fn id(&self) -> String {
        "ground_truth".to_string()
    }

    fn judge_binary(&self, bundle: &CatchBundle<'_>) -> Result<BinaryJudgment, BackendError> {
        Ok(BinaryJudgment { yes: Self::is_true_positive(bundle), probability: 1.0 })
    }

    fn judge_bucket(&self, bundle: &CatchBundle<'_>) -> Result<BucketJudgment, BackendError> {
        if Self::is_true_positive(bundle) {
            let culprit = bundle
                .case
                .ground_truth
                .as_ref()
                .and_then(|t| t.culprit.clone())
                .unwrap_or_else(|| "the seeded defect".to_string());
            Ok(BucketJudgment {
                category: BucketCategory::High,
                rationale: format!("the failing run exercises `{culprit}`"),
            })
        } else {
            Ok(BucketJudgment {
                category: BucketCategory::Low,
                rationale: "no seeded defect is implicated by this failure".to_string(),
            })
        }
    }
}

/// Scripted judge: canned judgments keyed by `<case>/<test-id>`, with an
/// optional `default` entry.
pub struct ScriptedJudge {
    fixture: ScriptedFixture,
    instance: String,
}

impl ScriptedJudge {
    pub fn new(fixture: ScriptedFixture, instance: impl Into<String>) -> Self {
        ScriptedJudge { fixture, instance: instance.into() }
    }

    fn lookup(&self, bundle: &CatchBundle<'_>) -> Result<&ScriptedJudgment, BackendError> {
        let key = format!("{}/{}", bundle.case.id, bundle.test.id);
        self.fixture
            .judgments
            .get(&key)
            .or_else(|| self.fixture.judgments.get("default"))
            .ok_or_else(|| BackendError::Unavailable(format!("no scripted judgment for {key}")))
    }
}

impl JudgeBackend for ScriptedJudge {
    fn id(&self) -> String {
        format!("scripted#{}", self.instance)
    }

    fn judge_binary(&self, bundle: &CatchBundle<'_>) -> Result<BinaryJudgment, BackendError> {
        let judgment = self.lookup(bundle)?;
        Ok(BinaryJudgment {
            yes: judgment.answer.eq_ignore_ascii_case("yes"),
            probability: judgment.probability,
        })
    }

    fn judge_bucket(&self, bundle: &CatchBundle<'_>) -> Result<BucketJudgment, BackendError> {
        let judgment = self.lookup(bundle)?;
        let category = BucketCategory::parse(&judgment.bucket).ok_or_else(|| {
            BackendError::Protocol(format!("unknown bucket `{}`", judgment.bucket))
        })?;
        Ok(BucketJudgment { category, rationale: judgment.rationale.clone() })
    }
}

/// External judge over the generation line protocol, with `judge_binary` and
/// `judge_bucket` message kinds.
pub struct ExternalJudge {
    transport: ExternalTransport,
    instance: String,
}

impl ExternalJudge {
    pub fn new(spec: &str, timeout: Duration, instance: impl Into<String>) -> Result<Self, BackendError> {
        Ok(ExternalJudge {
            transport: ExternalTransport::parse(spec, timeout)?,
            instance: instance.into(),
        })
    }

    fn bundle_payload(bundle: &CatchBundle<'_>) -> serde_json::Value {
        json!({
            "case_id": bundle.case.id,
            "test_id": bundle.test.id,
            "test_source": bundle.test.source,
            "execution_log": bundle.child_outcome.trace.render(),
            "diff": bundle.diff.render(),
            "intent": bundle.intent.text,
        })
    }
}

impl JudgeBackend for ExternalJudge {
    fn id(&self) -> String {
        format!("external#{}", self.instance)
    }

    fn judge_binary(&self, bundle: &CatchBundle<'_>) -> Result<BinaryJudgment, BackendError> {
        let mut request = Self::bundle_payload(bundle);
        request["kind"] = json!("judge_binary");
        let response = self.transport.call(&request)?;
        let answer = response
            .get("answer")
            .and_then(serde_json::Value::as_str)
            .ok_or_else(|| BackendError::Protocol("response lacks `answer`".to_string()))?;
        let probability = response
            .get("probability")
            .and_then(serde_json::Value::as_f64)
            .ok_or_else(|| BackendError::Protocol("response lacks `probability`".to_string()))?;
        Ok(BinaryJudgment { yes: answer.eq_ignore_ascii_case("yes"), probability })
    }

    fn judge_bucket(&self, bundle: &CatchBundle<'_>) -> Result<BucketJudgment, BackendError> {
        let mut request = Self::bundle_payload(bundle);
        request["kind"] = json!("judge_bucket");
        let response = self.transport.call(&request)?;
        let category = response
            .get("category")
            .and_then(serde_json::Value::as_str)
            .and_then(BucketCategory::parse)
            .ok_or_else(|| BackendError::Protocol("response lacks a valid `category`".to_string()))?;
        let rationale = response
            .get("rationale")
            .and_then(serde_json::Value::as_str)
            .unwrap_or_default()
            .to_string();
        Ok(BucketJudgment { category, rationale })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bucket_mapping_is_exact() {
        assert_eq!(BucketCategory::High.score(), 1.0);
        assert_eq!(BucketCategory::Medium.score(), 0.0);
        assert_eq!(BucketCategory::Low.score(), -1.0);
    }

    #[test]
    fn lower_median_matches_sort_oracle_for_small_ensembles() {
        // Brute-force oracle: sort and take the lower middle element.
        let choices = [-1.0f64, 0.0, 1.0];
        for n in 1..=7usize {
            let mut counts = vec![0usize; n];
            loop {
                let scores: Vec<f64> = counts.iter().map(|&i| choices[i]).collect();
                let oracle = {
                    let mut sorted = scores.clone();
                    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    sorted[(n - 1) / 2]
                };
                assert_eq!(lower_median(&scores), Some(oracle), "scores {scores:?}");
                // Odometer over all 3^n combinations.
                let mut i = 0;
                loop {
                    if i == n {
                        break;
                    }
                    counts[i] += 1;
                    if counts[i] < 3 {
                        break;
                    }
                    counts[i] = 0;
                    i += 1;
                }
                if i == n {
                    break;
                }
            }
        }
    }

    #[test]
    fn even_count_takes_lower_median() {
        assert_eq!(lower_median(&[1.0, -1.0]), Some(-1.0));
        assert_eq!(lower_median(&[1.0, -1.0, 0.0]), Some(0.0));
        assert_eq!(lower_median(&[-1.0, -1.0, -1.0]), Some(-1.0));
        assert_eq!(lower_median(&[]), None);
    }
}

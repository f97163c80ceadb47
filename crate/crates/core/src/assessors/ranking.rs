//! Assessment assembly, the review-queue filter, and ranking.

use serde::{Deserialize, Serialize};

use crate::generation::BackendError;
use crate::workflows::WorkflowTag;

use super::bundle::CatchBundle;
use super::judges::{judge_bucket_med, judge_tp_prob, JudgeBackend, JudgeRationale};
use super::rubfake::{rubfake_assess, RubfakeAssessment};
use super::rules::{DismissalCost, PatternRule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assessment {
    pub catch_id: String,
    pub case_id: String,
    pub workflow: WorkflowTag,
    pub rubfake: RubfakeAssessment,
    /// Missing (never zero) when the binary judge was unavailable.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tp_prob: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tp_prob_missing: Option<String>,
    pub bucket_scores: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bucket_med: Option<f64>,
    /// One rationale per responding judge, kept individually.
    pub rationales: Vec<JudgeRationale>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failed_judges: Vec<String>,
    pub final_rank_key: f64,
}

/// Weights for the overall ranking key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RankWeights {
    pub rubfake: f64,
    pub tp_prob: f64,
    pub bucket_med: f64,
    /// Bonus for cheap dismissals, penalty for heavy ones.
    pub dismissal_trivial: f64,
    pub dismissal_moderate: f64,
    pub dismissal_heavy: f64,
}

impl Default for RankWeights {
    fn default() -> Self {
        RankWeights {
            rubfake: 0.4,
            tp_prob: 0.3,
            bucket_med: 0.3,
            dismissal_trivial: 0.1,
            dismissal_moderate: 0.0,
            dismissal_heavy: -0.1,
        }
    }
}

impl RankWeights {
    fn dismissal_bonus(&self, cost: Option<DismissalCost>) -> f64 {
        match cost {
            Some(DismissalCost::Trivial) => self.dismissal_trivial,
            Some(DismissalCost::Moderate) => self.dismissal_moderate,
            Some(DismissalCost::Heavy) => self.dismissal_heavy,
            None => 0.0,
        }
    }

    /// Weighted sum over the available scores; missing judge scores carry no
    /// information and contribute nothing.
    pub fn rank_key(&self, assessment: &Assessment) -> f64 {
        let mut key = self.rubfake * assessment.rubfake.score;
        if let Some(tp_prob) = assessment.tp_prob {
            key += self.tp_prob * tp_prob;
        }
        if let Some(bucket_med) = assessment.bucket_med {
            key += self.bucket_med * bucket_med;
        }
        key += self.dismissal_bonus(assessment.rubfake.dismissal_cost);
        key.clamp(-1.0, 1.0)
    }
}

/// Run all three assessors over a weak catch.
pub fn assess_catch(
    bundle: &CatchBundle<'_>,
    rules: &[PatternRule],
    binary_judge: &dyn JudgeBackend,
    ensemble: &[&dyn JudgeBackend],
    weights: &RankWeights,
) -> Assessment {
    let rubfake = rubfake_assess(bundle, rules);
    let (tp_prob, tp_prob_missing) = match judge_tp_prob(bundle, binary_judge) {
        Ok(score) => (Some(score), None),
        Err(err) => (None, Some(flag_reason(err))),
    };
    let buckets = judge_bucket_med(bundle, ensemble);
    let mut assessment = Assessment {
        catch_id: bundle.test.id.clone(),
        case_id: bundle.case.id.clone(),
        workflow: bundle.test.provenance.workflow,
        rubfake,
        tp_prob,
        tp_prob_missing,
        bucket_scores: buckets.bucket_scores,
        bucket_med: buckets.bucket_med,
        rationales: buckets.rationales,
        failed_judges: buckets.failed_judges,
        final_rank_key: 0.0,
    };
    assessment.final_rank_key = weights.rank_key(&assessment);
    assessment
}

fn flag_reason(err: BackendError) -> String {
    err.to_string()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReviewDecision {
    AutoDiscard,
    HumanReview,
}

/// Which Bucket-Med value auto-discards alongside a certain-no TP Prob.
/// `MediumZero` is the stated production filter; `LowMinusOne` is the
/// alternative reading, available behind config.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterPolicy {
    MediumZero,
    LowMinusOne,
}

impl Default for FilterPolicy {
    fn default() -> Self {
        FilterPolicy::MediumZero
    }
}

const TP_PROB_FLOOR_EPSILON: f64 = 1e-9;

/// Auto-discard when the token-probability score sits at its -1 floor or the
/// ensemble bucket median equals the policy's trigger value exactly. Missing
/// scores fail open into human review.
pub fn review_filter(assessment: &Assessment, policy: FilterPolicy) -> ReviewDecision {
    let (Some(tp_prob), Some(bucket_med)) = (assessment.tp_prob, assessment.bucket_med) else {
        return ReviewDecision::HumanReview;
    };
    let bucket_trigger = match policy {
        FilterPolicy::MediumZero => 0.0,
        FilterPolicy::LowMinusOne => -1.0,
    };
    if tp_prob <= -1.0 + TP_PROB_FLOOR_EPSILON || bucket_med == bucket_trigger {
        ReviewDecision::AutoDiscard
    } else {
        ReviewDecision::HumanReview
    }
}

/// Descending by rank key; ties broken by case id then catch id.
pub fn rank_catches(mut assessments: Vec<Assessment>) -> Vec<Assessment> {
    assessments.sort_by(|a, b| {
        b.final_rank_key
            .partial_cmp(&a.final_rank_key)
            .expect("rank keys are finite")
            .then_with(|| a.case_id.cmp(&b.case_id))
            .then_with(|| a.catch_id.cmp(&b.catch_id))
    });
    assessments
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assessors::rubfake::RubfakeAssessment;

    fn assessment(
        id: &str,
        rubfake_score: f64,
        tp_prob: Option<f64>,
        bucket_med: Option<f64>,
        dismissal: Option<DismissalCost>,
    ) -> Assessment {
        let mut a = Assessment {
            catch_id: id.to_string(),
            case_id: "case".to_string(),
            workflow: WorkflowTag::DodgyDiff,
            rubfake: RubfakeAssessment {
                fired: Vec::new(),
                score: rubfake_score,
                dismissal_cost: dismissal,
            },
            tp_prob,
            tp_prob_missing: None,
            bucket_scores: Vec::new(),
            bucket_med,
            rationales: Vec::new(),
            failed_judges: Vec::new(),
            final_rank_key: 0.0,
        };
        a.final_rank_key = RankWeights::default().rank_key(&a);
        a
    }

    #[test]
    fn filter_discards_on_certain_no() {
        let a = assessment("t", 0.0, Some(-1.0), Some(1.0), None);
        assert_eq!(review_filter(&a, FilterPolicy::MediumZero), ReviewDecision::AutoDiscard);
    }

    #[test]
    fn filter_discards_on_medium_bucket() {
        let a = assessment("t", 0.0, Some(0.4), Some(0.0), None);
        assert_eq!(review_filter(&a, FilterPolicy::MediumZero), ReviewDecision::AutoDiscard);
    }

    #[test]
    fn filter_keeps_confident_catches() {
        let a = assessment("t", 0.0, Some(0.4), Some(1.0), None);
        assert_eq!(review_filter(&a, FilterPolicy::MediumZero), ReviewDecision::HumanReview);
    }

    #[test]
    fn filter_fails_open_on_missing_scores() {
        let a = assessment("t", -0.9, None, Some(0.0), None);
        assert_eq!(review_filter(&a, FilterPolicy::MediumZero), ReviewDecision::HumanReview);
        let b = assessment("t", -0.9, Some(-1.0), None, None);
        assert_eq!(review_filter(&b, FilterPolicy::MediumZero), ReviewDecision::HumanReview);
    }

    #[test]
    fn alternative_policy_triggers_on_low() {
        let a = assessment("t", 0.0, Some(0.4), Some(-1.0), None);
        assert_eq!(review_filter(&a, FilterPolicy::MediumZero), ReviewDecision::HumanReview);
        assert_eq!(review_filter(&a, FilterPolicy::LowMinusOne), ReviewDecision::AutoDiscard);
    }

    #[test]
    fn trivial_dismissal_outranks_heavy() {
        let cheap = assessment("a", 0.5, Some(0.5), Some(0.0), Some(DismissalCost::Trivial));
        let costly = assessment("b", 0.5, Some(0.5), Some(0.0), Some(DismissalCost::Heavy));
        let ranked = rank_catches(vec![costly, cheap]);
        assert_eq!(ranked[0].catch_id, "a");
        assert!(ranked[0].final_rank_key > ranked[1].final_rank_key);
    }

    #[test]
    fn all_zero_scores_keep_input_order_by_tie_break() {
        let a = assessment("a", 0.0, Some(0.0), Some(0.0), None);
        let b = assessment("b", 0.0, Some(0.0), Some(0.0), None);
        let ranked = rank_catches(vec![b, a]);
        assert_eq!(ranked[0].catch_id, "a");
        assert_eq!(ranked[1].catch_id, "b");
    }

    #[test]
    fn single_element_ranks_alone() {
        let a = assessment("only", 0.2, Some(0.1), Some(0.0), None);
        let ranked = rank_catches(vec![a.clone()]);
        assert_eq!(ranked, vec![a]);
    }

    #[test]
    fn rank_key_clamps_to_unit_interval() {
        let a = assessment("t", 1.0, Some(1.0), Some(1.0), Some(DismissalCost::Trivial));
        assert_eq!(a.final_rank_key, 1.0);
        let b = assessment("t", -1.0, Some(-1.0), Some(-1.0), Some(DismissalCost::Heavy));
        assert_eq!(b.final_rank_key, -1.0);
    }
}

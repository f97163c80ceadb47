//! The rule-based assessor: evaluate every pattern rule against a catch
//! bundle, record fired rules with their evidence, and fold the results into
//! a score in [-1, 1]. Negative means likely false positive, positive means
//! likely strong catch, zero means no rule fired.

use serde::{Deserialize, Serialize};

use super::bundle::{BundleText, CatchBundle};
use super::rules::{DismissalCost, Evidence, PatternRule, Polarity};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiredRule {
    pub rule_id: String,
    pub polarity: Polarity,
    pub magnitude: f64,
    pub evidence: Vec<Evidence>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dismissal_cost: Option<DismissalCost>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RubfakeAssessment {
    pub fired: Vec<FiredRule>,
    /// clamp(max TP magnitude - max FP magnitude, -1, 1); 0 iff nothing
    /// fired.
    pub score: f64,
    /// Cheapest dismissal among fired TP rules.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dismissal_cost: Option<DismissalCost>,
}

pub fn rubfake_assess(bundle: &CatchBundle<'_>, rules: &[PatternRule]) -> RubfakeAssessment {
    let text = bundle.rendered();
    rubfake_assess_with_text(bundle, rules, &text)
}

pub fn rubfake_assess_with_text(
    bundle: &CatchBundle<'_>,
    rules: &[PatternRule],
    text: &BundleText,
) -> RubfakeAssessment {
    let mut fired = Vec::new();
    for rule in rules {
        if let Some(evidence) = rule.evaluate(bundle, text) {
            fired.push(FiredRule {
                rule_id: rule.id.clone(),
                polarity: rule.polarity,
                magnitude: rule.likelihood.magnitude(),
                evidence,
                dismissal_cost: rule.dismissal_cost,
            });
        }
    }

    let max_tp = fired
        .iter()
        .filter(|f| f.polarity == Polarity::Tp)
        .map(|f| f.magnitude)
        .fold(0.0f64, f64::max);
    let max_fp = fired
        .iter()
        .filter(|f| f.polarity == Polarity::Fp)
        .map(|f| f.magnitude)
        .fold(0.0f64, f64::max);
    let score = (max_tp - max_fp).clamp(-1.0, 1.0);

    let dismissal_cost = fired
        .iter()
        .filter(|f| f.polarity == Polarity::Tp)
        .filter_map(|f| f.dismissal_cost)
        .min();

    RubfakeAssessment { fired, score, dismissal_cost }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assessors::rules::default_rules;
    use crate::corpus::{compute_diff, DiffStatus, ProgramSet};
    use crate::generation::{Provenance, TestCase};
    use crate::workflows::{infer_intent, WorkflowTag};
    use crate::corpus::DiffCase;
    use minilang::{execute, parse};

    fn set(src: &str) -> ProgramSet {
        let mut s = ProgramSet::new();
        s.files.insert("m.ml0".to_string(), parse(src).unwrap());
        s
    }

    fn case(parent: &str, child: &str, title: &str) -> DiffCase {
        DiffCase {
            id: "case-rb".to_string(),
            parent: set(parent),
            child: set(child),
            title: title.to_string(),
            summary: String::new(),
            status: DiffStatus::Unlabelled,
            ground_truth: None,
            risk_score: 1.0,
        }
    }

    fn assess(case: &DiffCase, test_source: &str) -> RubfakeAssessment {
        let test = TestCase::new(
            "t1".to_string(),
            test_source.to_string(),
            Provenance::new(WorkflowTag::DodgyDiff, "template"),
        )
        .unwrap();
        let parent_outcome = execute(&case.parent.programs(), test_source, 100_000);
        let child_outcome = execute(&case.child.programs(), test_source, 100_000);
        assert!(parent_outcome.status.is_pass(), "test must pass on parent");
        assert!(child_outcome.status.is_fail() || child_outcome.status.is_error());
        let diff = compute_diff(&case.parent, &case.child);
        let intent = infer_intent(case, &diff, &crate::generation::TemplateGenerator);
        // Error outcomes still bundle for rule purposes in these unit tests.
        let bundle = CatchBundle {
            case,
            test: &test,
            parent_outcome: &parent_outcome,
            child_outcome: &child_outcome,
            diff: &diff,
            intent: &intent,
        };
        rubfake_assess(&bundle, &default_rules())
    }

    #[test]
    fn not_implemented_exception_scores_minus_point_nine() {
        // Child replaces the body with a signature-only stub that throws.
        let case = case(
            "fn api(x){ return x + 1; }",
            "fn api(x){ throw \"not_implemented\"; }",
            "stub out api",
        );
        let assessment = assess(&case, "assert_eq(api(1), 2);");
        assert!(assessment.fired.iter().any(|f| f.rule_id == "not_implemented_exception"));
        assert!((assessment.score - -0.9).abs() < 1e-12, "score = {}", assessment.score);
    }

    #[test]
    fn changed_bool_fires_positive_when_diff_does_not_touch_entry() {
        // The flipped boolean comes from a helper the entry calls; no
        // changed line mentions the entry itself.
        let case = case(
            "fn threshold(){ return 10; }\nfn is_small(x){ return x < threshold(); }",
            "fn threshold(){ return 1; }\nfn is_small(x){ return x < threshold(); }",
            "tune threshold",
        );
        let assessment = assess(&case, "assert_eq(is_small(5), true);");
        let fired: Vec<&str> = assessment.fired.iter().map(|f| f.rule_id.as_str()).collect();
        assert!(fired.contains(&"changed_bool"), "fired: {fired:?}");
        assert!(assessment.score > 0.0);
        assert_eq!(assessment.dismissal_cost, Some(DismissalCost::Trivial));
    }

    #[test]
    fn no_rule_fires_means_score_zero() {
        // A plain integer change matches no pattern.
        let case = case(
            "fn f(x){ return x + 1; }",
            "fn f(x){ return x + 2; }",
            "bump increment",
        );
        let assessment = assess(&case, "assert_eq(f(1), 2);");
        assert!(assessment.fired.is_empty(), "fired: {:?}", assessment.fired);
        assert_eq!(assessment.score, 0.0);
        assert_eq!(assessment.dismissal_cost, None);
    }

    #[test]
    fn evidence_excerpts_exist_in_their_sources() {
        let case = case(
            "fn config(){ return {\"mode\": 1}; }\nfn lookup(){ return config()[\"mode\"]; }",
            "fn config(){ return {\"kind\": 1}; }\nfn lookup(){ return config()[\"mode\"]; }",
            "restructure config",
        );
        let test = TestCase::new(
            "t1".to_string(),
            "assert_eq(lookup(), 1);".to_string(),
            Provenance::new(WorkflowTag::DodgyDiff, "template"),
        )
        .unwrap();
        let parent_outcome = execute(&case.parent.programs(), &test.source, 100_000);
        let child_outcome = execute(&case.child.programs(), &test.source, 100_000);
        let diff = compute_diff(&case.parent, &case.child);
        let intent = infer_intent(&case, &diff, &crate::generation::TemplateGenerator);
        let bundle = CatchBundle {
            case: &case,
            test: &test,
            parent_outcome: &parent_outcome,
            child_outcome: &child_outcome,
            diff: &diff,
            intent: &intent,
        };
        let text = bundle.rendered();
        let assessment = rubfake_assess_with_text(&bundle, &default_rules(), &text);
        assert!(!assessment.fired.is_empty());
        for fired in &assessment.fired {
            for evidence in &fired.evidence {
                let haystack = text.source_text(evidence.source);
                assert!(
                    haystack.contains(&evidence.excerpt),
                    "rule {}: excerpt {:?} not in {:?} source",
                    fired.rule_id,
                    evidence.excerpt,
                    evidence.source,
                );
            }
        }
    }

    #[test]
    fn score_combines_strongest_of_each_polarity() {
        // Child makes the helper return null (TP null_value fires) while the
        // title says nothing special; no FP rule fires, so score is +0.9.
        let case = case(
            "fn pick(){ return 5; }\nfn wrap(){ return pick(); }",
            "fn pick(){ return null; }\nfn wrap(){ return pick(); }",
            "speed up pick",
        );
        let assessment = assess(&case, "assert_eq(wrap(), 5);");
        assert!(assessment.fired.iter().any(|f| f.rule_id == "null_value"));
        assert!((assessment.score - 0.9).abs() < 1e-12);
    }
}

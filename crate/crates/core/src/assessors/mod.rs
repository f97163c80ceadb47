//! Strong-catch likelihood assessment: the rule engine, the judge ensemble
//! scores, assessment assembly, ranking and the review-queue filter.

pub mod bundle;
pub mod judges;
pub mod ranking;
pub mod rubfake;
pub mod rules;

pub use bundle::{BundleText, CatchBundle};
pub use judges::{
    judge_bucket_med, judge_tp_prob, lower_median, BinaryJudgment, BucketCategory, BucketJudgment,
    BucketMedian, ExternalJudge, GroundTruthJudge, HeuristicJudge, JudgeBackend, JudgeRationale,
    ScriptedJudge,
};
pub use ranking::{
    assess_catch, rank_catches, review_filter, Assessment, FilterPolicy, RankWeights,
    ReviewDecision,
};
pub use rubfake::{rubfake_assess, FiredRule, RubfakeAssessment};
pub use rules::{
    default_rules, parse_rules, DismissalCost, Evidence, Likelihood, PatternRule, Polarity,
    SourceKind,
};

//! Assemble the statistical report from assessed cases: good/bad comparison
//! cells, pairwise status matrices, rank correlations, agreement
//! coefficients and the permutation sense check.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::assessors::Assessment;
use crate::config::PermutationConfig;
use crate::corpus::DiffStatus;
use crate::stats::{
    cliffs_delta, cohens_h, cohens_kappa, fisher_exact_two_sided, fleiss_kappa, kendall_tau_b,
    krippendorff_alpha, mann_whitney_u, permutation_sense_check, spearman_rho, AgreementBucket,
    ContingencyTable2x2, EffectBucket, PermutationCounts, PermutationSpec, RatingMatrix,
};
use crate::workflows::WorkflowTag;

use super::CaseRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssessorKind {
    Rubfake,
    TpProb,
    BucketMed,
}

impl AssessorKind {
    pub const ALL: [AssessorKind; 3] =
        [AssessorKind::Rubfake, AssessorKind::TpProb, AssessorKind::BucketMed];

    pub fn label(&self) -> &'static str {
        match self {
            AssessorKind::Rubfake => "RubFake",
            AssessorKind::TpProb => "TP Prob",
            AssessorKind::BucketMed => "Bucket Med",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScorePolarity {
    /// Score strictly above zero.
    TruePositive,
    /// Score strictly below zero.
    FalsePositive,
}

impl ScorePolarity {
    pub const BOTH: [ScorePolarity; 2] =
        [ScorePolarity::TruePositive, ScorePolarity::FalsePositive];

    pub fn hit(&self, score: f64) -> bool {
        match self {
            ScorePolarity::TruePositive => score > 0.0,
            ScorePolarity::FalsePositive => score < 0.0,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ScorePolarity::TruePositive => "TP",
            ScorePolarity::FalsePositive => "FP",
        }
    }
}

/// Row/column subsets mirroring the paper's breakdowns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubsetKey {
    All,
    Unlabelled,
    Labelled,
    Good,
    Bad,
    Status(DiffStatus),
}

impl SubsetKey {
    pub const COLUMNS: [SubsetKey; 11] = [
        SubsetKey::All,
        SubsetKey::Unlabelled,
        SubsetKey::Labelled,
        SubsetKey::Good,
        SubsetKey::Bad,
        SubsetKey::Status(DiffStatus::Closed),
        SubsetKey::Status(DiffStatus::Accepted),
        SubsetKey::Status(DiffStatus::Abandoned),
        SubsetKey::Status(DiffStatus::ChangesPlanned),
        SubsetKey::Status(DiffStatus::NeedsRevision),
        SubsetKey::Status(DiffStatus::Reverted),
    ];

    pub fn label(&self) -> String {
        match self {
            SubsetKey::All => "All".to_string(),
            SubsetKey::Unlabelled => "UnLab".to_string(),
            SubsetKey::Labelled => "G+B".to_string(),
            SubsetKey::Good => "G".to_string(),
            SubsetKey::Bad => "B".to_string(),
            SubsetKey::Status(status) => status.abbrev().to_string(),
        }
    }

    pub fn contains(&self, status: DiffStatus) -> bool {
        match self {
            SubsetKey::All => true,
            SubsetKey::Unlabelled => status == DiffStatus::Unlabelled,
            SubsetKey::Labelled => status.is_good() || status.is_bad(),
            SubsetKey::Good => status.is_good(),
            SubsetKey::Bad => status.is_bad(),
            SubsetKey::Status(wanted) => status == *wanted,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    RowHigher,
    ColHigher,
}

/// One pairwise comparison cell: a p-value with effect size and direction
/// when computable, or N/A for an empty group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCell {
    pub row: String,
    pub col: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bucket: Option<EffectBucket>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    pub na: bool,
}

/// A rate-comparison matrix (Fisher + Cohen's h) over labeled groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateMatrix {
    pub title: String,
    pub groups: Vec<GroupRate>,
    pub cells: Vec<PairCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRate {
    pub label: String,
    pub n: usize,
    pub hits: usize,
}

/// A score-distribution matrix (Mann-Whitney + Cliff's delta).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreMatrix {
    pub title: String,
    pub groups: Vec<GroupSize>,
    pub cells: Vec<PairCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSize {
    pub label: String,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCell {
    pub subset: SubsetKey,
    pub left: AssessorKind,
    pub right: AssessorKind,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spearman: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kendall: Option<(f64, f64)>,
    /// Zero-variance or too-small samples leave the coefficient undefined.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementCell {
    pub subset: SubsetKey,
    pub polarity: ScorePolarity,
    pub n: usize,
    /// Pairwise Cohen's kappa: (left, right, kappa, bucket label).
    pub pairwise: Vec<(AssessorKind, AssessorKind, f64, String)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fleiss: Option<(f64, String)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub krippendorff: Option<(f64, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationRow {
    pub assessor: AssessorKind,
    pub polarity: ScorePolarity,
    pub counts: PermutationCounts,
    pub group_min: usize,
    pub group_max: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    /// Good-vs-bad assessment-rate comparisons per workflow and assessor.
    pub good_bad: Vec<RateMatrix>,
    /// Pairwise status matrices of assessment rates (per assessor).
    pub status_rates: Vec<RateMatrix>,
    /// Pairwise status matrices of per-diff score distributions.
    pub status_scores: Vec<ScoreMatrix>,
    /// Catch-rate matrices per workflow.
    pub catch_rates: Vec<RateMatrix>,
    pub correlations: Vec<CorrelationCell>,
    pub agreement: Vec<AgreementCell>,
    pub permutation: Vec<PermutationRow>,
    /// True when the corpus had no labeled cases, so comparison tables are
    /// N/A by construction.
    pub all_unlabelled: bool,
}

/// Per-diff assessor scores: the case's top-ranked catch speaks for the
/// diff, the same way a surfaced candidate would.
#[derive(Debug, Clone)]
struct DiffScores {
    status: DiffStatus,
    rubfake: f64,
    tp_prob: Option<f64>,
    bucket_med: Option<f64>,
    /// Any-catch polarity hits per assessor, per workflow.
    workflow_hits: IndexMap<WorkflowTag, [[bool; 2]; 3]>,
}

fn assessor_score(assessment: &Assessment, assessor: AssessorKind) -> Option<f64> {
    match assessor {
        AssessorKind::Rubfake => Some(assessment.rubfake.score),
        AssessorKind::TpProb => assessment.tp_prob,
        AssessorKind::BucketMed => assessment.bucket_med,
    }
}

fn collect_diff_scores(
    cases: &[CaseRecord],
    assessments: &[Assessment],
) -> IndexMap<String, DiffScores> {
    let mut per_case: IndexMap<String, Vec<&Assessment>> = IndexMap::new();
    for assessment in assessments {
        per_case.entry(assessment.case_id.clone()).or_default().push(assessment);
    }

    let mut out = IndexMap::new();
    for case in cases {
        let Some(list) = per_case.get(&case.id) else { continue };
        let top = list
            .iter()
            .max_by(|a, b| {
                a.final_rank_key
                    .partial_cmp(&b.final_rank_key)
                    .unwrap()
                    .then_with(|| b.catch_id.cmp(&a.catch_id))
            })
            .expect("non-empty");
        let mut workflow_hits: IndexMap<WorkflowTag, [[bool; 2]; 3]> = IndexMap::new();
        for assessment in list {
            let entry = workflow_hits.entry(assessment.workflow).or_default();
            for (ai, assessor) in AssessorKind::ALL.iter().enumerate() {
                if let Some(score) = assessor_score(assessment, *assessor) {
                    for (pi, polarity) in ScorePolarity::BOTH.iter().enumerate() {
                        if polarity.hit(score) {
                            entry[ai][pi] = true;
                        }
                    }
                }
            }
        }
        out.insert(
            case.id.clone(),
            DiffScores {
                status: case.status,
                rubfake: top.rubfake.score,
                tp_prob: top.tp_prob,
                bucket_med: top.bucket_med,
                workflow_hits,
            },
        );
    }
    out
}

fn fisher_cell(
    row: &GroupRate,
    col: &GroupRate,
) -> PairCell {
    if row.n == 0 || col.n == 0 {
        return PairCell {
            row: row.label.clone(),
            col: col.label.clone(),
            p: None,
            effect: None,
            bucket: None,
            direction: None,
            na: true,
        };
    }
    let table = ContingencyTable2x2::new(
        row.hits as u64,
        (row.n - row.hits) as u64,
        col.hits as u64,
        (col.n - col.hits) as u64,
    );
    let fisher = fisher_exact_two_sided(&table);
    let rate_row = row.hits as f64 / row.n as f64;
    let rate_col = col.hits as f64 / col.n as f64;
    let h = cohens_h(rate_row, rate_col);
    let significant = fisher.p < 0.05 && !fisher.degenerate;
    PairCell {
        row: row.label.clone(),
        col: col.label.clone(),
        p: Some(fisher.p),
        effect: significant.then_some(h),
        bucket: significant.then(|| EffectBucket::from_abs(h)),
        direction: if significant {
            Some(if rate_row > rate_col { Direction::RowHigher } else { Direction::ColHigher })
        } else {
            None
        },
        na: false,
    }
}

fn rate_matrix(title: String, groups: Vec<GroupRate>) -> RateMatrix {
    let mut cells = Vec::new();
    for i in 0..groups.len() {
        for j in (i + 1)..groups.len() {
            cells.push(fisher_cell(&groups[i], &groups[j]));
        }
    }
    RateMatrix { title, groups, cells }
}

fn score_matrix(title: String, labeled: Vec<(String, Vec<f64>)>) -> ScoreMatrix {
    let groups: Vec<GroupSize> =
        labeled.iter().map(|(label, xs)| GroupSize { label: label.clone(), n: xs.len() }).collect();
    let mut cells = Vec::new();
    for i in 0..labeled.len() {
        for j in (i + 1)..labeled.len() {
            let (row_label, xs) = &labeled[i];
            let (col_label, ys) = &labeled[j];
            if xs.is_empty() || ys.is_empty() {
                cells.push(PairCell {
                    row: row_label.clone(),
                    col: col_label.clone(),
                    p: None,
                    effect: None,
                    bucket: None,
                    direction: None,
                    na: true,
                });
                continue;
            }
            let mw = mann_whitney_u(xs, ys);
            let delta = cliffs_delta(xs, ys);
            let significant = mw.p < 0.05;
            cells.push(PairCell {
                row: row_label.clone(),
                col: col_label.clone(),
                p: Some(mw.p),
                effect: significant.then_some(delta),
                bucket: significant.then(|| EffectBucket::from_abs(delta)),
                direction: if significant {
                    Some(if delta > 0.0 { Direction::RowHigher } else { Direction::ColHigher })
                } else {
                    None
                },
                na: false,
            });
        }
    }
    ScoreMatrix { title, groups, cells }
}

const STATUS_ORDER: [DiffStatus; 6] = [
    DiffStatus::Closed,
    DiffStatus::Accepted,
    DiffStatus::Abandoned,
    DiffStatus::ChangesPlanned,
    DiffStatus::NeedsRevision,
    DiffStatus::Reverted,
];

/// Build the full statistical report.
pub fn build_stat_report(
    cases: &[CaseRecord],
    assessments: &[Assessment],
    permutation: &PermutationConfig,
    seed: u64,
) -> StatReport {
    let diff_scores = collect_diff_scores(cases, assessments);
    let all_unlabelled = cases.iter().all(|c| c.status == DiffStatus::Unlabelled);
    let mut report = StatReport { all_unlabelled, ..Default::default() };

    let workflows_present: Vec<WorkflowTag> = WorkflowTag::ALL
        .into_iter()
        .filter(|w| assessments.iter().any(|a| a.workflow == *w))
        .collect();

    // Good/bad assessment-rate comparisons, per workflow x assessor x
    // polarity (the headline comparison table shape).
    for workflow in &workflows_present {
        for assessor in AssessorKind::ALL {
            for polarity in ScorePolarity::BOTH {
                let mut good = GroupRate { label: "G".to_string(), n: 0, hits: 0 };
                let mut bad = GroupRate { label: "B".to_string(), n: 0, hits: 0 };
                for scores in diff_scores.values() {
                    let Some(hits) = scores.workflow_hits.get(workflow) else { continue };
                    let group = if scores.status.is_good() {
                        &mut good
                    } else if scores.status.is_bad() {
                        &mut bad
                    } else {
                        continue;
                    };
                    group.n += 1;
                    let ai = AssessorKind::ALL.iter().position(|a| *a == assessor).unwrap();
                    let pi = ScorePolarity::BOTH.iter().position(|p| *p == polarity).unwrap();
                    if hits[ai][pi] {
                        group.hits += 1;
                    }
                }
                report.good_bad.push(rate_matrix(
                    format!("{} / {} / score {}", workflow.name(), assessor.label(), polarity.label()),
                    vec![good, bad],
                ));
            }
        }
    }

    // Pairwise status matrices of assessment rates, across all workflows.
    for assessor in AssessorKind::ALL {
        for polarity in ScorePolarity::BOTH {
            let ai = AssessorKind::ALL.iter().position(|a| *a == assessor).unwrap();
            let pi = ScorePolarity::BOTH.iter().position(|p| *p == polarity).unwrap();
            let groups: Vec<GroupRate> = STATUS_ORDER
                .iter()
                .map(|status| {
                    let mut group =
                        GroupRate { label: status.abbrev().to_string(), n: 0, hits: 0 };
                    for scores in diff_scores.values().filter(|s| s.status == *status) {
                        group.n += 1;
                        if scores.workflow_hits.values().any(|hits| hits[ai][pi]) {
                            group.hits += 1;
                        }
                    }
                    group
                })
                .collect();
            report.status_rates.push(rate_matrix(
                format!("all workflows / {} / score {}", assessor.label(), polarity.label()),
                groups,
            ));
        }
    }

    // Pairwise status matrices over per-diff score distributions.
    for assessor in AssessorKind::ALL {
        let labeled: Vec<(String, Vec<f64>)> = STATUS_ORDER
            .iter()
            .map(|status| {
                let values: Vec<f64> = diff_scores
                    .values()
                    .filter(|s| s.status == *status)
                    .filter_map(|s| match assessor {
                        AssessorKind::Rubfake => Some(s.rubfake),
                        AssessorKind::TpProb => s.tp_prob,
                        AssessorKind::BucketMed => s.bucket_med,
                    })
                    .collect();
                (status.abbrev().to_string(), values)
            })
            .collect();
        report
            .status_scores
            .push(score_matrix(format!("per-diff {} score", assessor.label()), labeled));
    }

    // Catch-rate matrices per workflow: fraction of processed diffs with at
    // least one weak catch.
    for workflow in &workflows_present {
        let groups: Vec<GroupRate> = STATUS_ORDER
            .iter()
            .map(|status| {
                let mut group = GroupRate { label: status.abbrev().to_string(), n: 0, hits: 0 };
                for case in cases.iter().filter(|c| c.status == *status && c.processed) {
                    let mut had_tests = false;
                    let mut caught = false;
                    for result in case.results.iter().filter(|r| r.workflow == Some(*workflow)) {
                        if result.counted_tests().next().is_some() {
                            had_tests = true;
                        }
                        if result.weak_catches().next().is_some() {
                            caught = true;
                        }
                    }
                    if had_tests {
                        group.n += 1;
                        if caught {
                            group.hits += 1;
                        }
                    }
                }
                group
            })
            .collect();
        report
            .catch_rates
            .push(rate_matrix(format!("catch rate / {}", workflow.name()), groups));
    }

    // Rank correlations between assessors over per-diff scores.
    let pairs = [
        (AssessorKind::Rubfake, AssessorKind::TpProb),
        (AssessorKind::Rubfake, AssessorKind::BucketMed),
        (AssessorKind::TpProb, AssessorKind::BucketMed),
    ];
    for subset in SubsetKey::COLUMNS {
        for (left, right) in pairs {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for scores in diff_scores.values().filter(|s| subset.contains(s.status)) {
                let x = match left {
                    AssessorKind::Rubfake => Some(scores.rubfake),
                    AssessorKind::TpProb => scores.tp_prob,
                    AssessorKind::BucketMed => scores.bucket_med,
                };
                let y = match right {
                    AssessorKind::Rubfake => Some(scores.rubfake),
                    AssessorKind::TpProb => scores.tp_prob,
                    AssessorKind::BucketMed => scores.bucket_med,
                };
                if let (Some(x), Some(y)) = (x, y) {
                    xs.push(x);
                    ys.push(y);
                }
            }
            let spearman = spearman_rho(&xs, &ys).ok().map(|r| (r.coeff, r.p));
            let kendall = kendall_tau_b(&xs, &ys).ok().map(|r| (r.coeff, r.p));
            let flagged = spearman.is_none() || kendall.is_none();
            report.correlations.push(CorrelationCell {
                subset,
                left,
                right,
                n: xs.len(),
                spearman,
                kendall,
                flagged,
            });
        }
    }

    // Agreement on the FP/TP classification: each assessor labels a diff
    // hit (1) or not (0) for the polarity; pairwise kappa plus overall
    // Fleiss / Krippendorff.
    for subset in SubsetKey::COLUMNS {
        for polarity in ScorePolarity::BOTH {
            let mut columns: [Vec<i64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
            let mut rows: Vec<Vec<Option<i64>>> = Vec::new();
            for scores in diff_scores.values().filter(|s| subset.contains(s.status)) {
                let mut row = Vec::with_capacity(3);
                for (ai, assessor) in AssessorKind::ALL.iter().enumerate() {
                    let value = match assessor {
                        AssessorKind::Rubfake => Some(scores.rubfake),
                        AssessorKind::TpProb => scores.tp_prob,
                        AssessorKind::BucketMed => scores.bucket_med,
                    };
                    let label = value.map(|v| i64::from(polarity.hit(v)));
                    if let Some(label) = label {
                        columns[ai].push(label);
                    }
                    row.push(label);
                }
                rows.push(row);
            }
            let n = rows.len();
            let mut pairwise = Vec::new();
            for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
                // Pairwise kappa needs both raters on the same items.
                let mut a = Vec::new();
                let mut b = Vec::new();
                for row in &rows {
                    if let (Some(x), Some(y)) = (row[i], row[j]) {
                        a.push(x);
                        b.push(y);
                    }
                }
                if let Ok(kappa) = cohens_kappa(&a, &b) {
                    pairwise.push((
                        AssessorKind::ALL[i],
                        AssessorKind::ALL[j],
                        kappa,
                        AgreementBucket::from_coeff(kappa).label().to_string(),
                    ));
                }
            }
            let matrix = RatingMatrix::new(rows);
            let fleiss = fleiss_kappa(&matrix)
                .ok()
                .map(|k| (k, AgreementBucket::from_coeff(k).label().to_string()));
            let krippendorff = krippendorff_alpha(&matrix)
                .ok()
                .map(|a| (a, AgreementBucket::from_coeff(a).label().to_string()));
            report.agreement.push(AgreementCell {
                subset,
                polarity,
                n,
                pairwise,
                fleiss,
                krippendorff,
            });
        }
    }

    // Permutation sense check over the assessed pool, labels discarded.
    let pool_len = diff_scores.len();
    let (group_min, group_max) = if permutation.group_min > 0 && permutation.group_max > 0 {
        (permutation.group_min, permutation.group_max)
    } else {
        // Auto sizing: groups comparable to a half-split of the pool.
        let max = (pool_len / 2).saturating_sub(1);
        let min = (pool_len / 4).max(2);
        (min, max)
    };
    if pool_len >= group_max * 2 && group_min >= 2 && group_min <= group_max {
        for (ai, assessor) in AssessorKind::ALL.iter().enumerate() {
            for (pi, polarity) in ScorePolarity::BOTH.iter().enumerate() {
                let hits: Vec<bool> = diff_scores
                    .values()
                    .map(|s| s.workflow_hits.values().any(|h| h[ai][pi]))
                    .collect();
                let spec = PermutationSpec {
                    iterations: permutation.iterations,
                    group_min,
                    group_max,
                    alpha: permutation.alpha,
                    seed: crate::stats::derive_seed(seed, (ai * 2 + pi) as u64),
                };
                report.permutation.push(PermutationRow {
                    assessor: *assessor,
                    polarity: *polarity,
                    counts: permutation_sense_check(&hits, &spec),
                    group_min,
                    group_max,
                });
            }
        }
    }

    report
}

//! Plain-text renderings of the report: the summary table, the statistical
//! matrices, and per-catch assessment detail. All output derives from the
//! report document; nothing is authored separately.

use minilang::{parse_test_statements, render_value, Expr, TraceEvent};

use crate::assessors::{Assessment, ReviewDecision};
use crate::workflows::CatchVerdict;

use super::statbuild::{Direction, PairCell, RateMatrix, ScoreMatrix, StatReport};
use super::{CaseRecord, RunReport};

pub fn render_summary(report: &RunReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<24} {:>11} {:>12} {:>10} {:>11} {:>12} {:>12}\n",
        "approach",
        "total tests",
        "weak catches",
        "% weak",
        "diffs w/tests",
        "diffs caught",
        "% diffs"
    ));
    for row in &report.summary.rows {
        out.push_str(&format!(
            "{:<24} {:>11} {:>12} {:>9.1}% {:>11} {:>12} {:>11.1}%\n",
            row.workflow.name(),
            row.total_tests,
            row.weak_catches,
            row.pct_weak_catch,
            row.diffs_with_tests,
            row.diffs_with_catches,
            row.pct_diffs_caught,
        ));
    }
    out
}

fn cell_text(cell: &PairCell) -> String {
    if cell.na {
        return "N/A".to_string();
    }
    let p = cell.p.expect("non-na cell has p");
    match (&cell.effect, &cell.bucket, &cell.direction) {
        (Some(_), Some(bucket), Some(direction)) => {
            let arrow = match direction {
                Direction::RowHigher => "<-",
                Direction::ColHigher => "^",
            };
            format!("{arrow}{p:.3} ({})", bucket.label())
        }
        _ => format!("{p:.3}"),
    }
}

fn render_rate_matrix(matrix: &RateMatrix) -> String {
    let mut out = format!("== {}\n", matrix.title);
    let labels: Vec<&str> = matrix.groups.iter().map(|g| g.label.as_str()).collect();
    out.push_str(&format!("{:<22}", ""));
    for label in labels.iter().skip(1) {
        out.push_str(&format!("{label:>14}"));
    }
    out.push('\n');
    for (i, group) in matrix.groups.iter().enumerate() {
        if i + 1 == matrix.groups.len() && matrix.groups.len() > 2 {
            break;
        }
        let rate = if group.n > 0 {
            format!("({:.1}%)", 100.0 * group.hits as f64 / group.n as f64)
        } else {
            "(-)".to_string()
        };
        out.push_str(&format!("{:<10} n={:<4} {:<7}", group.label, group.n, rate));
        for j in 0..matrix.groups.len() {
            if j <= i {
                if j > 0 {
                    out.push_str(&format!("{:>14}", ""));
                }
                continue;
            }
            let cell = matrix
                .cells
                .iter()
                .find(|c| c.row == group.label && c.col == matrix.groups[j].label)
                .expect("cell exists");
            out.push_str(&format!("{:>14}", cell_text(cell)));
        }
        out.push('\n');
    }
    out
}

fn render_score_matrix(matrix: &ScoreMatrix) -> String {
    let mut out = format!("== {}\n", matrix.title);
    for cell in &matrix.cells {
        out.push_str(&format!("{:>4} vs {:<4} {}\n", cell.row, cell.col, cell_text(cell)));
    }
    let sizes: Vec<String> =
        matrix.groups.iter().map(|g| format!("{}={}", g.label, g.n)).collect();
    out.push_str(&format!("n: {}\n", sizes.join(" ")));
    out
}

/// All statistical tables: good/bad comparisons, status matrices,
/// correlations, agreement, permutation sense check.
pub fn render_stats(report: &RunReport) -> String {
    let stats: &StatReport = &report.stats;
    let mut out = String::new();

    out.push_str("# good vs bad assessment rates (Fisher exact, Cohen's h)\n");
    if stats.all_unlabelled {
        out.push_str("corpus is unlabelled: comparison tables are N/A\n");
    } else {
        for matrix in &stats.good_bad {
            out.push_str(&render_rate_matrix(matrix));
        }
    }

    out.push_str("\n# assessment rates by status pair\n");
    if stats.all_unlabelled {
        out.push_str("N/A (unlabelled corpus)\n");
    } else {
        for matrix in &stats.status_rates {
            out.push_str(&render_rate_matrix(matrix));
        }
    }

    out.push_str("\n# per-diff score distributions by status pair (Mann-Whitney, Cliff's delta)\n");
    if stats.all_unlabelled {
        out.push_str("N/A (unlabelled corpus)\n");
    } else {
        for matrix in &stats.status_scores {
            out.push_str(&render_score_matrix(matrix));
        }
    }

    out.push_str("\n# catch rates by status pair\n");
    if stats.all_unlabelled {
        out.push_str("N/A (unlabelled corpus)\n");
    } else {
        for matrix in &stats.catch_rates {
            out.push_str(&render_rate_matrix(matrix));
        }
    }

    out.push_str("\n# rank correlation between assessors (coefficient shown when p < 0.05)\n");
    for cell in &stats.correlations {
        let show = |value: Option<(f64, f64)>| match value {
            Some((coeff, p)) if p < 0.05 => format!("{coeff:+.3}"),
            Some(_) => "--".to_string(),
            None => "--".to_string(),
        };
        out.push_str(&format!(
            "{:<6} {:>10} vs {:<10} n={:<4} spearman {:>7} kendall {:>7}\n",
            cell.subset.label(),
            cell.left.label(),
            cell.right.label(),
            cell.n,
            show(cell.spearman),
            show(cell.kendall),
        ));
    }

    out.push_str("\n# inter-rater agreement on FP/TP classification\n");
    for cell in &stats.agreement {
        out.push_str(&format!(
            "{:<6} {:<3} n={:<4}",
            cell.subset.label(),
            cell.polarity.label(),
            cell.n
        ));
        for (left, right, kappa, bucket) in &cell.pairwise {
            out.push_str(&format!(
                "  {}/{} {:+.2} ({})",
                left.label(),
                right.label(),
                kappa,
                bucket
            ));
        }
        if let Some((kappa, bucket)) = &cell.fleiss {
            out.push_str(&format!("  fleiss {kappa:+.2} ({bucket})"));
        }
        if let Some((alpha, bucket)) = &cell.krippendorff {
            out.push_str(&format!("  alpha {alpha:+.2} ({bucket})"));
        }
        out.push('\n');
    }

    out.push_str("\n# permutation sense check (shuffled labels)\n");
    if stats.permutation.is_empty() {
        out.push_str("pool too small for the configured group sizes\n");
    }
    for row in &stats.permutation {
        out.push_str(&format!(
            "{:<10} {:<3} groups {}..{}: significant {}/{}  S {} M {} L {}  P>=S {:.5} P>=M {:.5} P>=L {:.5}\n",
            row.assessor.label(),
            row.polarity.label(),
            row.group_min,
            row.group_max,
            row.counts.significant,
            row.counts.iterations,
            row.counts.small,
            row.counts.medium,
            row.counts.large,
            row.counts.prob_ge_small(),
            row.counts.prob_ge_medium(),
            row.counts.prob_ge_large(),
        ));
    }
    out
}

/// The asserted subject expression: the first argument of the failing
/// assertion call.
fn asserted_subject(expression_text: &str) -> Option<String> {
    let script = parse_test_statements(&format!("{expression_text};")).ok()?;
    let stmt = script.stmts.first()?;
    let minilang::Stmt::Expr { expr: Expr::Call { args, .. }, .. } = stmt else { return None };
    args.first().map(minilang::printer::print_expr)
}

/// The reach-out sense-check line for a weak catch: what changed, asked as
/// a question.
pub fn sense_check_sentence(record: &CaseRecord, catch_id: &str) -> Option<String> {
    for result in &record.results {
        for executed in &result.executed {
            if executed.test.id != catch_id {
                continue;
            }
            if let Some(TraceEvent::AssertFail { expected, actual, expression_text }) =
                executed.child_outcome.trace.terminal()
            {
                let subject = asserted_subject(expression_text)
                    .unwrap_or_else(|| expression_text.clone());
                // A failed trap guard means the child raised where the
                // parent completed; phrase that as a raise, not a value.
                if let Some(call) = subject.strip_prefix("trap(").and_then(|s| s.strip_suffix(')')) {
                    if expected.is_null() {
                        return Some(format!(
                            "`{}` used to complete normally, but now raises `{}`; is that expected?",
                            call,
                            render_value(actual),
                        ));
                    }
                    return Some(format!(
                        "`{}` used to raise `{}`, but now {}; is that expected?",
                        call,
                        render_value(expected),
                        if actual.is_null() {
                            "completes normally".to_string()
                        } else {
                            format!("raises `{}`", render_value(actual))
                        },
                    ));
                }
                return Some(format!(
                    "`{}` used to evaluate to `{}`, but now evaluates to `{}`; is that expected?",
                    subject,
                    render_value(expected),
                    render_value(actual),
                ));
            }
        }
    }
    None
}

/// Human-readable detail for one assessed catch.
pub fn render_assessment_detail(report: &RunReport, catch_id: &str) -> Option<String> {
    let assessment: &Assessment =
        report.assessments.iter().find(|a| a.catch_id == catch_id)?;
    let record = report.cases.iter().find(|c| c.id == assessment.case_id)?;
    let executed = record
        .results
        .iter()
        .flat_map(|r| r.executed.iter())
        .find(|t| t.test.id == catch_id)?;

    let mut out = String::new();
    out.push_str(&format!("catch {catch_id} (case {}, {})\n", record.id, assessment.workflow.name()));
    if let Some(entry) = report.review_queue.iter().find(|q| q.catch_id == catch_id) {
        if entry.decision == ReviewDecision::AutoDiscard {
            let clause = match (assessment.tp_prob, assessment.bucket_med) {
                (Some(tp), _) if tp <= -1.0 + 1e-9 => "token-probability score at its -1 floor",
                _ => "ensemble bucket median at its trigger value",
            };
            out.push_str(&format!("*** AUTO-DISCARDED: {clause} ***\n"));
        }
    }
    out.push('\n');
    if let Some(sentence) = sense_check_sentence(record, catch_id) {
        out.push_str(&format!("sense check: {sentence}\n\n"));
    }
    debug_assert_eq!(executed.verdict, CatchVerdict::WeakCatch);
    out.push_str(&format!("test source:\n{}\n", executed.test.source.trim_end()));
    out.push_str(&format!("\nscores: rubfake {:+.2}", assessment.rubfake.score));
    match assessment.tp_prob {
        Some(tp) => out.push_str(&format!("  tp-prob {tp:+.2}")),
        None => out.push_str("  tp-prob missing"),
    }
    match assessment.bucket_med {
        Some(med) => out.push_str(&format!("  bucket-med {med:+.1}")),
        None => out.push_str("  bucket-med missing"),
    }
    out.push_str(&format!("  rank {:+.3}\n", assessment.final_rank_key));

    if assessment.rubfake.fired.is_empty() {
        out.push_str("\nno pattern rules fired\n");
    } else {
        out.push_str("\nfired patterns:\n");
        for fired in &assessment.rubfake.fired {
            out.push_str(&format!(
                "  [{}] {} ({:+.1})\n",
                match fired.polarity {
                    crate::assessors::Polarity::Fp => "FP",
                    crate::assessors::Polarity::Tp => "TP",
                },
                fired.rule_id,
                match fired.polarity {
                    crate::assessors::Polarity::Fp => -fired.magnitude,
                    crate::assessors::Polarity::Tp => fired.magnitude,
                }
            ));
            for evidence in &fired.evidence {
                out.push_str(&format!("      {:?}: {}\n", evidence.source, evidence.excerpt));
            }
        }
    }

    out.push_str("\njudge rationales:\n");
    if assessment.rationales.is_empty() {
        out.push_str("  (none)\n");
    }
    for rationale in &assessment.rationales {
        out.push_str(&format!("  {}: {}\n", rationale.judge_id, rationale.rationale));
    }
    for failed in &assessment.failed_judges {
        out.push_str(&format!("  {failed}: (failed)\n"));
    }
    Some(out)
}

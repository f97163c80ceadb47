//! Pluggable risk scoring. The default heuristic sizes a diff by its changed
//! declarations and changed lines; scores are min-max normalized over the
//! corpus at load time, so the empty diff scores 0.0 and the corpus's
//! largest diff scores 1.0.

use super::diff::Diff;

pub trait RiskScorer: Send + Sync {
    fn name(&self) -> &'static str;
    /// Unnormalized size; load_corpus normalizes by the corpus maximum.
    fn raw(&self, diff: &Diff) -> f64;
}

pub struct DiffSizeScorer;

impl RiskScorer for DiffSizeScorer {
    fn name(&self) -> &'static str {
        "diff_size"
    }

    fn raw(&self, diff: &Diff) -> f64 {
        diff.changed_decls.len() as f64 + diff.changed_line_count() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_diff_raw_is_zero() {
        assert_eq!(DiffSizeScorer.raw(&Diff::default()), 0.0);
    }
}

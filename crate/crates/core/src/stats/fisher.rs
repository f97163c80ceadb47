//! Fisher's exact test for 2x2 tables.
//!
//! Two-sided definition: with both margins fixed, sum the hypergeometric
//! probabilities of every table whose point probability does not exceed the
//! observed table's (with 1e-12 relative slack), the convention used by
//! standard exact implementations.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

/// Rows are groups, columns outcome / not-outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable2x2 {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl ContingencyTable2x2 {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Self {
        ContingencyTable2x2 { a, b, c, d }
    }

    pub fn transpose(&self) -> Self {
        ContingencyTable2x2 { a: self.a, b: self.c, c: self.b, d: self.d }
    }

    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisherResult {
    pub p: f64,
    /// A zero margin makes the table degenerate; p is 1.0 by convention.
    pub degenerate: bool,
}

fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

pub fn fisher_exact_two_sided(t: &ContingencyTable2x2) -> FisherResult {
    let row1 = t.a + t.b;
    let row2 = t.c + t.d;
    let col1 = t.a + t.c;
    let col2 = t.b + t.d;
    let n = t.total();
    if n == 0 || row1 == 0 || row2 == 0 || col1 == 0 || col2 == 0 {
        return FisherResult { p: 1.0, degenerate: true };
    }

    // ln P(a = k) with margins fixed.
    let ln_denominator = ln_choose(n, row1);
    let ln_point = |k: u64| ln_choose(col1, k) + ln_choose(col2, row1 - k) - ln_denominator;

    // Support of k: max(0, row1 - col2) ..= min(row1, col1).
    let lo = row1.saturating_sub(col2);
    let hi = row1.min(col1);
    debug_assert!(lo <= t.a && t.a <= hi);

    let ln_observed = ln_point(t.a);
    let slack = 1e-12;
    let mut p = 0.0;
    for k in lo..=hi {
        let ln_k = ln_point(k);
        if ln_k <= ln_observed + slack {
            p += ln_k.exp();
        }
    }
    FisherResult { p: p.min(1.0), degenerate: false }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_table_is_certain() {
        let result = fisher_exact_two_sided(&ContingencyTable2x2::new(2, 2, 2, 2));
        assert!(!result.degenerate);
        assert!((result.p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn known_values() {
        // Frozen from exact hypergeometric enumeration (see the oracle in
        // tests/stats_oracles.rs): sum of C(4,k)C(4,4-k)/C(8,4) over tables
        // with point probability <= that of [[3,1],[1,3]].
        let p = fisher_exact_two_sided(&ContingencyTable2x2::new(3, 1, 1, 3)).p;
        assert!((p - 0.485714285714).abs() < 1e-9, "p = {p}");

        let p = fisher_exact_two_sided(&ContingencyTable2x2::new(5, 0, 0, 5)).p;
        assert!((p - 0.007936507937).abs() < 1e-9, "p = {p}");
    }

    #[test]
    fn degenerate_margin_flagged() {
        let result = fisher_exact_two_sided(&ContingencyTable2x2::new(0, 0, 3, 4));
        assert!(result.degenerate);
        assert_eq!(result.p, 1.0);
    }

    #[test]
    fn transpose_invariance() {
        let t = ContingencyTable2x2::new(7, 2, 3, 9);
        let a = fisher_exact_two_sided(&t).p;
        let b = fisher_exact_two_sided(&t.transpose()).p;
        assert!((a - b).abs() < 1e-12);
    }
}

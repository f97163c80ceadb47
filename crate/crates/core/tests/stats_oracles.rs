//! Oracle suite for the statistics kernels. Each oracle here is an
//! independent route to the same quantity: exact integer hypergeometric
//! enumeration for Fisher, double-loop pair counting for Cliff's delta,
//! Kendall tau-b and Mann-Whitney U, the closed form for Cohen's h, and a
//! hand-computed coincidence matrix for Krippendorff's alpha.

use catchjit_core::stats::{
    cliffs_delta, cohens_h, fisher_exact_two_sided, kendall_tau_b, krippendorff_alpha,
    mann_whitney_u, ContingencyTable2x2, RatingMatrix,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Exact two-sided Fisher p from u128 binomial arithmetic. Tables are
/// selected with an exact integer comparison, so no floating slack enters
/// the oracle at all.
fn fisher_oracle(t: &ContingencyTable2x2) -> f64 {
    const MAX: usize = 41;
    let mut binom = [[0u128; MAX]; MAX];
    for n in 0..MAX {
        binom[n][0] = 1;
        for k in 1..=n {
            binom[n][k] = binom[n - 1][k - 1] + if k <= n - 1 { binom[n - 1][k] } else { 0 };
        }
    }
    let (a, b, c, d) = (t.a as usize, t.b as usize, t.c as usize, t.d as usize);
    let row1 = a + b;
    let col1 = a + c;
    let col2 = b + d;
    let n = a + b + c + d;
    let observed = binom[col1][a] * binom[col2][b];
    let lo = row1.saturating_sub(col2);
    let hi = row1.min(col1);
    let mut numerator: u128 = 0;
    for k in lo..=hi {
        let weight = binom[col1][k] * binom[col2][row1 - k];
        if weight <= observed {
            numerator += weight;
        }
    }
    numerator as f64 / binom[n][row1] as f64
}

#[test]
fn fisher_matches_enumeration_for_all_small_tables() {
    // Every table with a positive margin and total <= 40.
    let mut checked = 0u64;
    for total in 1..=40u64 {
        for a in 0..=total {
            for b in 0..=(total - a) {
                for c in 0..=(total - a - b) {
                    let d = total - a - b - c;
                    let t = ContingencyTable2x2::new(a, b, c, d);
                    if a + b == 0 || c + d == 0 || a + c == 0 || b + d == 0 {
                        continue;
                    }
                    let implementation = fisher_exact_two_sided(&t);
                    assert!(!implementation.degenerate);
                    let oracle = fisher_oracle(&t);
                    assert!(
                        (implementation.p - oracle).abs() < 1e-9,
                        "table {t:?}: impl {} vs oracle {}",
                        implementation.p,
                        oracle
                    );
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 100_000, "only {checked} tables checked");
}

#[test]
fn cliffs_delta_matches_pair_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..200 {
        let nx = rng.gen_range(1..=50);
        let ny = rng.gen_range(1..=50);
        let xs: Vec<f64> = (0..nx).map(|_| rng.gen_range(-5..5) as f64).collect();
        let ys: Vec<f64> = (0..ny).map(|_| rng.gen_range(-5..5) as f64).collect();

        let mut more = 0i64;
        let mut less = 0i64;
        for &x in &xs {
            for &y in &ys {
                if x > y {
                    more += 1;
                } else if x < y {
                    less += 1;
                }
            }
        }
        let oracle = (more - less) as f64 / (nx as f64 * ny as f64);
        assert_eq!(cliffs_delta(&xs, &ys), oracle);
    }
}

#[test]
fn kendall_tau_matches_pair_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..200 {
        let n = rng.gen_range(3..=50);
        let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-6..6) as f64).collect();
        let ys: Vec<f64> = (0..n).map(|_| rng.gen_range(-6..6) as f64).collect();

        let mut concordant = 0f64;
        let mut discordant = 0f64;
        let mut ties_x = 0f64;
        let mut ties_y = 0f64;
        let mut pairs = 0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                pairs += 1.0;
                let dx = xs[i] - xs[j];
                let dy = ys[i] - ys[j];
                if dx == 0.0 && dy == 0.0 {
                    ties_x += 1.0;
                    ties_y += 1.0;
                } else if dx == 0.0 {
                    ties_x += 1.0;
                } else if dy == 0.0 {
                    ties_y += 1.0;
                } else if dx * dy > 0.0 {
                    concordant += 1.0;
                } else {
                    discordant += 1.0;
                }
            }
        }
        let denom = ((pairs - ties_x) * (pairs - ties_y)).sqrt();
        let result = kendall_tau_b(&xs, &ys);
        if denom == 0.0 {
            assert!(result.is_err());
            continue;
        }
        let oracle = (concordant - discordant) / denom;
        let tau = result.unwrap().coeff;
        assert!(
            (tau - oracle).abs() < 1e-12,
            "n={n}: tau {tau} vs oracle {oracle}"
        );
    }
}

#[test]
fn mann_whitney_u_matches_pair_counting() {
    // Rank-sum U equals #(x > y) + 0.5 * #(x == y), an independent route.
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..200 {
        let nx = rng.gen_range(1..=30);
        let ny = rng.gen_range(1..=30);
        let xs: Vec<f64> = (0..nx).map(|_| rng.gen_range(-4..4) as f64).collect();
        let ys: Vec<f64> = (0..ny).map(|_| rng.gen_range(-4..4) as f64).collect();
        let mut oracle = 0.0;
        for &x in &xs {
            for &y in &ys {
                if x > y {
                    oracle += 1.0;
                } else if x == y {
                    oracle += 0.5;
                }
            }
        }
        let u = mann_whitney_u(&xs, &ys).u;
        assert!((u - oracle).abs() < 1e-9, "u {u} vs oracle {oracle}");
    }
}

#[test]
fn cohens_h_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..1_000 {
        let p1: f64 = rng.gen_range(0.0..=1.0);
        let p2: f64 = rng.gen_range(0.0..=1.0);
        let oracle = 2.0 * p1.sqrt().asin() - 2.0 * p2.sqrt().asin();
        assert!((cohens_h(p1, p2) - oracle).abs() < 1e-12);
        assert!((cohens_h(p1, p2) + cohens_h(p2, p1)).abs() < 1e-12);
    }
}

#[test]
fn krippendorff_alpha_matches_hand_fixture() {
    // Items x raters (0 = a, 1 = b), one missing cell:
    //   (a a a) (a b b) (b b -) (a a b)
    // Coincidence matrix by hand: o_aa = 4, o_ab = o_ba = 2, o_bb = 3,
    // n = 11, marginals 6 / 5; Do = 4/11, De = 60/110; alpha = 1/3.
    let matrix = RatingMatrix::new(vec![
        vec![Some(0), Some(0), Some(0)],
        vec![Some(0), Some(1), Some(1)],
        vec![Some(1), Some(1), None],
        vec![Some(0), Some(0), Some(1)],
    ]);
    let alpha = krippendorff_alpha(&matrix).unwrap();
    assert!((alpha - 1.0 / 3.0).abs() < 1e-9, "alpha = {alpha}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn fisher_p_in_unit_interval(a in 0u64..60, b in 0u64..60, c in 0u64..60, d in 0u64..60) {
        let result = fisher_exact_two_sided(&ContingencyTable2x2::new(a, b, c, d));
        prop_assert!((0.0..=1.0).contains(&result.p));
        // Transpose symmetry.
        let transposed = fisher_exact_two_sided(&ContingencyTable2x2::new(a, c, b, d));
        prop_assert!((result.p - transposed.p).abs() < 1e-9);
    }

    #[test]
    fn delta_in_range(
        xs in prop::collection::vec(-10i64..10, 1..40),
        ys in prop::collection::vec(-10i64..10, 1..40),
    ) {
        let xs: Vec<f64> = xs.into_iter().map(|v| v as f64).collect();
        let ys: Vec<f64> = ys.into_iter().map(|v| v as f64).collect();
        let delta = cliffs_delta(&xs, &ys);
        prop_assert!((-1.0..=1.0).contains(&delta));
    }

    #[test]
    fn mann_whitney_p_in_unit_interval(
        xs in prop::collection::vec(-10i64..10, 1..30),
        ys in prop::collection::vec(-10i64..10, 1..30),
    ) {
        let xs: Vec<f64> = xs.into_iter().map(|v| v as f64).collect();
        let ys: Vec<f64> = ys.into_iter().map(|v| v as f64).collect();
        let result = mann_whitney_u(&xs, &ys);
        prop_assert!((0.0..=1.0).contains(&result.p), "p = {}", result.p);
    }

    #[test]
    fn agreement_coefficients_bounded_above(
        rows in prop::collection::vec(
            prop::collection::vec(prop::option::weighted(0.9, 0i64..3), 3..=3),
            2..12,
        ),
    ) {
        let matrix = RatingMatrix::new(rows);
        if let Ok(kappa) = catchjit_core::stats::fleiss_kappa(&matrix) {
            prop_assert!(kappa <= 1.0 + 1e-12);
        }
        if let Ok(alpha) = krippendorff_alpha(&matrix) {
            prop_assert!(alpha <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn cohens_kappa_bounded_above(
        pairs in prop::collection::vec((0i64..3, 0i64..3), 2..30),
    ) {
        let r1: Vec<i64> = pairs.iter().map(|(a, _)| *a).collect();
        let r2: Vec<i64> = pairs.iter().map(|(_, b)| *b).collect();
        if let Ok(kappa) = catchjit_core::stats::cohens_kappa(&r1, &r2) {
            prop_assert!(kappa <= 1.0 + 1e-12);
        }
    }
}

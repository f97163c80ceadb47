//! Effect sizes: Cohen's h for proportions, Cliff's delta for samples.

use serde::{Deserialize, Serialize};

/// Cohen's rule-of-thumb buckets on |h|: negligible below 0.2, small below
/// 0.5, medium below 0.8, large from 0.8 up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EffectBucket {
    Negligible,
    Small,
    Medium,
    Large,
}

impl EffectBucket {
    pub fn from_abs(h: f64) -> Self {
        let h = h.abs();
        if h < 0.2 {
            EffectBucket::Negligible
        } else if h < 0.5 {
            EffectBucket::Small
        } else if h < 0.8 {
            EffectBucket::Medium
        } else {
            EffectBucket::Large
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            EffectBucket::Negligible => "N",
            EffectBucket::Small => "S",
            EffectBucket::Medium => "M",
            EffectBucket::Large => "L",
        }
    }
}

/// h = 2*arcsin(sqrt(p1)) - 2*arcsin(sqrt(p2)), signed: positive when p1 is
/// the higher proportion.
pub fn cohens_h(p1: f64, p2: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p1) && (0.0..=1.0).contains(&p2));
    2.0 * p1.sqrt().asin() - 2.0 * p2.sqrt().asin()
}

/// delta = (#(x > y) - #(x < y)) / (n_x * n_y) by exact pair enumeration.
pub fn cliffs_delta(xs: &[f64], ys: &[f64]) -> f64 {
    assert!(!xs.is_empty() && !ys.is_empty(), "cliffs_delta needs non-empty samples");
    let mut more = 0i64;
    let mut less = 0i64;
    for &x in xs {
        for &y in ys {
            if x > y {
                more += 1;
            } else if x < y {
                less += 1;
            }
        }
    }
    (more - less) as f64 / (xs.len() as f64 * ys.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h_identity_case() {
        let h = cohens_h(0.5, 0.5);
        assert_eq!(h, 0.0);
        assert_eq!(EffectBucket::from_abs(h), EffectBucket::Negligible);
    }

    #[test]
    fn h_known_value() {
        // 2*asin(sqrt(0.75)) - 2*asin(sqrt(0.25)) = pi/3 + pi/3 - pi/2 ... =
        // 2*(1.0471975512 - 0.5235987756) = 1.0471975512.
        let h = cohens_h(0.75, 0.25);
        assert!((h - 1.0471975512).abs() < 1e-9, "h = {h}");
        assert_eq!(EffectBucket::from_abs(h), EffectBucket::Large);
    }

    #[test]
    fn h_range_endpoints() {
        let h = cohens_h(1.0, 0.0);
        assert!((h - std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(EffectBucket::from_abs(h), EffectBucket::Large);
    }

    #[test]
    fn h_antisymmetry() {
        assert_eq!(cohens_h(0.9, 0.4), -cohens_h(0.4, 0.9));
    }

    #[test]
    fn delta_dominance_and_symmetry() {
        assert_eq!(cliffs_delta(&[4.0, 5.0, 6.0], &[1.0, 2.0, 3.0]), 1.0);
        assert_eq!(cliffs_delta(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), 0.0);
        // (1 < 2) and (3 > 2) cancel.
        assert_eq!(cliffs_delta(&[1.0, 3.0], &[2.0]), 0.0);
    }
}

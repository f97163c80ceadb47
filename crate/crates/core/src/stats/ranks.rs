//! Rank-based tests and correlations with midrank tie handling: Mann-Whitney
//! U, Spearman's rho and the tie-corrected Kendall tau-b.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{normal_two_sided, StatError};

/// Midranks of a sample: ties share the average of the ranks they span.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).expect("NaN in sample"));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

fn tie_group_sizes(values: &[f64]) -> Vec<u64> {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut sizes = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        sizes.push((j - i + 1) as u64);
        i = j + 1;
    }
    sizes
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PMethod {
    /// Full enumeration of group assignments (small samples).
    Exact,
    /// Normal approximation with tie correction.
    Normal,
    /// t approximation (Spearman).
    StudentT,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    /// U statistic for the first sample.
    pub u: f64,
    pub p: f64,
    pub method: PMethod,
}

const EXACT_LIMIT: usize = 12;

/// Mann-Whitney U via rank sums with midranks. Exact p by full enumeration
/// when n_x + n_y <= 12; otherwise a normal approximation with tie correction
/// and a 0.5 continuity correction toward the mean. Two-sided p is the
/// probability of a |U - mean| at least as large as observed.
pub fn mann_whitney_u(xs: &[f64], ys: &[f64]) -> MannWhitney {
    assert!(!xs.is_empty() && !ys.is_empty(), "mann_whitney_u needs non-empty samples");
    let nx = xs.len();
    let ny = ys.len();
    let n = nx + ny;
    let pooled: Vec<f64> = xs.iter().chain(ys.iter()).copied().collect();
    let ranks = midranks(&pooled);
    let rank_sum_x: f64 = ranks[..nx].iter().sum();
    let u = rank_sum_x - (nx * (nx + 1)) as f64 / 2.0;
    let mean = (nx * ny) as f64 / 2.0;

    if n <= EXACT_LIMIT {
        // Enumerate every way to assign nx of the pooled ranks to the first
        // group; the observed statistic's tail mass is exact.
        let observed_dev = (u - mean).abs();
        let mut extreme = 0u64;
        let mut total = 0u64;
        let mut chosen: Vec<usize> = Vec::with_capacity(nx);
        enumerate_subsets(n, nx, 0, &mut chosen, &mut |subset| {
            let rs: f64 = subset.iter().map(|&i| ranks[i]).sum();
            let u_k = rs - (nx * (nx + 1)) as f64 / 2.0;
            total += 1;
            if (u_k - mean).abs() >= observed_dev - 1e-9 {
                extreme += 1;
            }
        });
        return MannWhitney { u, p: extreme as f64 / total as f64, method: PMethod::Exact };
    }

    let ties = tie_group_sizes(&pooled);
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum();
    let n_f = n as f64;
    let variance =
        (nx * ny) as f64 / 12.0 * ((n_f + 1.0) - tie_term / (n_f * (n_f - 1.0)));
    if variance <= 0.0 {
        // All pooled values identical: no evidence either way.
        return MannWhitney { u, p: 1.0, method: PMethod::Normal };
    }
    let dev = u - mean;
    let corrected = if dev.abs() <= 0.5 { 0.0 } else { dev.abs() - 0.5 };
    let z = corrected / variance.sqrt();
    MannWhitney { u, p: normal_two_sided(z), method: PMethod::Normal }
}

fn enumerate_subsets(
    n: usize,
    k: usize,
    start: usize,
    chosen: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    if chosen.len() == k {
        visit(chosen);
        return;
    }
    let remaining = k - chosen.len();
    for i in start..=(n - remaining) {
        chosen.push(i);
        enumerate_subsets(n, k, i + 1, chosen, visit);
        chosen.pop();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankCorr {
    pub coeff: f64,
    pub p: f64,
    pub method: PMethod,
}

/// Spearman's rho: Pearson correlation of midranks. p via the t
/// approximation with n - 2 degrees of freedom.
pub fn spearman_rho(xs: &[f64], ys: &[f64]) -> Result<RankCorr, StatError> {
    if xs.len() != ys.len() || xs.is_empty() {
        return Err(StatError::Empty);
    }
    let n = xs.len();
    if n < 3 {
        return Err(StatError::TooFew);
    }
    let rx = midranks(xs);
    let ry = midranks(ys);
    let mean = (n as f64 + 1.0) / 2.0;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let dx = rx[i] - mean;
        let dy = ry[i] - mean;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatError::ZeroVariance);
    }
    let rho = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let p = if (rho.abs() - 1.0).abs() < 1e-12 {
        0.0
    } else {
        let t = rho * ((n as f64 - 2.0) / (1.0 - rho * rho)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, n as f64 - 2.0).expect("valid dof");
        (2.0 * (1.0 - dist.cdf(t.abs()))).min(1.0)
    };
    Ok(RankCorr { coeff: rho, p, method: PMethod::StudentT })
}

/// Tie-corrected Kendall tau-b with the standard normal approximation for p
/// (tie-adjusted variance of C - D).
pub fn kendall_tau_b(xs: &[f64], ys: &[f64]) -> Result<RankCorr, StatError> {
    if xs.len() != ys.len() || xs.is_empty() {
        return Err(StatError::Empty);
    }
    let n = xs.len();
    if n < 3 {
        return Err(StatError::TooFew);
    }
    let mut concordant = 0i64;
    let mut discordant = 0i64;
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = (xs[i] - xs[j]).partial_cmp(&0.0).unwrap();
            let dy = (ys[i] - ys[j]).partial_cmp(&0.0).unwrap();
            use std::cmp::Ordering::*;
            match (dx, dy) {
                (Equal, _) | (_, Equal) => {}
                (Less, Less) | (Greater, Greater) => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as f64;
    let tx = tie_group_sizes(xs);
    let ty = tie_group_sizes(ys);
    let n1: f64 = tx.iter().map(|&t| (t * (t - 1) / 2) as f64).sum();
    let n2: f64 = ty.iter().map(|&t| (t * (t - 1) / 2) as f64).sum();
    let denom = ((n0 - n1) * (n0 - n2)).sqrt();
    if denom == 0.0 {
        return Err(StatError::ZeroVariance);
    }
    let s = (concordant - discordant) as f64;
    let tau = (s / denom).clamp(-1.0, 1.0);

    let nf = n as f64;
    let v0 = nf * (nf - 1.0) * (2.0 * nf + 5.0);
    let vt: f64 = tx.iter().map(|&t| (t * (t - 1)) as f64 * (2.0 * t as f64 + 5.0)).sum();
    let vu: f64 = ty.iter().map(|&t| (t * (t - 1)) as f64 * (2.0 * t as f64 + 5.0)).sum();
    let sum_t2: f64 = tx.iter().map(|&t| (t * (t - 1)) as f64).sum();
    let sum_u2: f64 = ty.iter().map(|&t| (t * (t - 1)) as f64).sum();
    let sum_t3: f64 = tx.iter().map(|&t| (t * (t - 1)) as f64 * (t as f64 - 2.0)).sum();
    let sum_u3: f64 = ty.iter().map(|&t| (t * (t - 1)) as f64 * (t as f64 - 2.0)).sum();
    let v1 = sum_t2 * sum_u2 / (2.0 * nf * (nf - 1.0));
    let v2 = sum_t3 * sum_u3 / (9.0 * nf * (nf - 1.0) * (nf - 2.0));
    let variance = (v0 - vt - vu) / 18.0 + v1 + v2;
    let p = if variance <= 0.0 {
        1.0
    } else {
        normal_two_sided(s / variance.sqrt())
    };
    Ok(RankCorr { coeff: tau, p, method: PMethod::Normal })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn u_complete_separation() {
        let result = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]);
        assert_eq!(result.u, 0.0);
        assert_eq!(result.method, PMethod::Exact);
    }

    #[test]
    fn u_identical_samples_midranks() {
        // Pooled midranks [1.5,1.5,3.5,3.5,5.5,5.5]; rank sum 10.5, U = 4.5.
        let result = mann_whitney_u(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]);
        assert_eq!(result.u, 4.5);
    }

    #[test]
    fn u_singletons_tied() {
        // Two equal singletons share rank 1.5, so U = 0.5 by the midrank
        // convention.
        let result = mann_whitney_u(&[7.0], &[7.0]);
        assert_eq!(result.u, 0.5);
        assert!((result.p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rho_and_tau_perfect_orders() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let inc = [10.0, 20.0, 30.0, 40.0];
        let dec = [40.0, 30.0, 20.0, 10.0];
        assert!((spearman_rho(&xs, &inc).unwrap().coeff - 1.0).abs() < 1e-12);
        assert!((spearman_rho(&xs, &dec).unwrap().coeff + 1.0).abs() < 1e-12);
        assert!((kendall_tau_b(&xs, &inc).unwrap().coeff - 1.0).abs() < 1e-12);
        assert!((kendall_tau_b(&xs, &dec).unwrap().coeff + 1.0).abs() < 1e-12);
    }

    #[test]
    fn tau_known_value() {
        // Pairs of [1,2,3,4] vs [1,3,2,4]: 5 concordant, 1 discordant,
        // no ties: tau = 4/6.
        let result = kendall_tau_b(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((result.coeff - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_variance_is_flagged_not_zero() {
        let err = spearman_rho(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap_err();
        assert_eq!(err, StatError::ZeroVariance);
        let err = kendall_tau_b(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]).unwrap_err();
        assert_eq!(err, StatError::ZeroVariance);
    }
}

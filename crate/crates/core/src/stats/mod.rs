//! Statistical kernels for the evaluation machinery: exact tests, effect
//! sizes, rank correlations, agreement coefficients and the permutation
//! resampling sense check. All kernels are pure; the only randomness is the
//! seeded permutation draw.
//!
//! P-values are reported uncorrected for multiple testing; the permutation
//! sense check is the calibration tool instead.

pub mod agreement;
pub mod effect;
pub mod fisher;
pub mod permutation;
pub mod ranks;

pub use agreement::{
    cohens_kappa, fleiss_kappa, krippendorff_alpha, AgreementBucket, RatingMatrix,
};
pub use effect::{cliffs_delta, cohens_h, EffectBucket};
pub use fisher::{fisher_exact_two_sided, ContingencyTable2x2, FisherResult};
pub use permutation::{derive_seed, permutation_sense_check, PermutationCounts, PermutationSpec};
pub use ranks::{kendall_tau_b, mann_whitney_u, spearman_rho, MannWhitney, PMethod, RankCorr};

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum StatError {
    /// A rank correlation over a constant sample is undefined, not zero.
    #[error("zero variance: coefficient undefined")]
    ZeroVariance,
    /// Agreement over a single category is undefined (chance agreement is 1).
    #[error("all ratings in one category: coefficient undefined")]
    AllOneCategory,
    #[error("empty or mismatched samples")]
    Empty,
    #[error("too few raters or items")]
    TooFew,
}

/// Two-sided standard normal tail probability, 2 * (1 - Phi(|z|)).
pub(crate) fn normal_two_sided(z: f64) -> f64 {
    (statrs::function::erf::erfc(z.abs() / std::f64::consts::SQRT_2)).min(1.0)
}

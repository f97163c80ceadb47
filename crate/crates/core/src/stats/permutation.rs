//! Permutation-based resampling sense check: how often does shuffled,
//! label-free data produce a significant Fisher result, and at what effect
//! size? Fully seeded; each iteration derives its own sub-seed so parallel
//! and serial evaluation order cannot change the outcome.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::effect::{cohens_h, EffectBucket};
use super::fisher::{fisher_exact_two_sided, ContingencyTable2x2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PermutationSpec {
    pub iterations: u32,
    pub group_min: usize,
    pub group_max: usize,
    pub alpha: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationCounts {
    pub iterations: u32,
    pub significant: u32,
    pub negligible: u32,
    pub small: u32,
    pub medium: u32,
    pub large: u32,
}

impl PermutationCounts {
    pub fn prob_ge_large(&self) -> f64 {
        self.ratio(self.large)
    }

    pub fn prob_ge_medium(&self) -> f64 {
        self.ratio(self.medium + self.large)
    }

    pub fn prob_ge_small(&self) -> f64 {
        self.ratio(self.small + self.medium + self.large)
    }

    pub fn prob_ge_negligible(&self) -> f64 {
        self.ratio(self.significant)
    }

    fn ratio(&self, count: u32) -> f64 {
        if self.iterations == 0 {
            0.0
        } else {
            count as f64 / self.iterations as f64
        }
    }
}

/// splitmix64, used to derive independent per-iteration sub-seeds.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15)).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Run the sense check over a pool of binary outcomes (a score polarity hit
/// per item). Labels are ignored by construction: each iteration draws two
/// disjoint pseudo-groups and tests them against each other.
pub fn permutation_sense_check(hits: &[bool], spec: &PermutationSpec) -> PermutationCounts {
    assert!(spec.group_min >= 1 && spec.group_min <= spec.group_max);
    assert!(
        hits.len() >= spec.group_max * 2,
        "pool of {} cannot fill two groups of {}",
        hits.len(),
        spec.group_max
    );
    let mut counts = PermutationCounts { iterations: spec.iterations, ..Default::default() };
    let mut indices: Vec<usize> = (0..hits.len()).collect();

    for iteration in 0..spec.iterations {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, iteration as u64));
        let size_a = rng.gen_range(spec.group_min..=spec.group_max);
        let size_b = rng.gen_range(spec.group_min..=spec.group_max);
        // Partial Fisher-Yates: shuffle just enough prefix for both draws.
        let take = size_a + size_b;
        for i in 0..take {
            let j = rng.gen_range(i..indices.len());
            indices.swap(i, j);
        }
        let hits_a = indices[..size_a].iter().filter(|&&i| hits[i]).count() as u64;
        let hits_b = indices[size_a..take].iter().filter(|&&i| hits[i]).count() as u64;
        let table = ContingencyTable2x2::new(
            hits_a,
            size_a as u64 - hits_a,
            hits_b,
            size_b as u64 - hits_b,
        );
        let result = fisher_exact_two_sided(&table);
        if !result.degenerate && result.p < spec.alpha {
            counts.significant += 1;
            let h = cohens_h(hits_a as f64 / size_a as f64, hits_b as f64 / size_b as f64);
            match EffectBucket::from_abs(h) {
                EffectBucket::Negligible => counts.negligible += 1,
                EffectBucket::Small => counts.small += 1,
                EffectBucket::Medium => counts.medium += 1,
                EffectBucket::Large => counts.large += 1,
            }
        }
    }
    counts
}

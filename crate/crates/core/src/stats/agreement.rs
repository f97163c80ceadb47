//! Inter-rater agreement: Cohen's kappa (pairwise), Fleiss' kappa and
//! Krippendorff's alpha (overall, nominal level, missing ratings allowed for
//! alpha). Interpretation buckets follow the Landis-Koch cutoffs.

use serde::{Deserialize, Serialize};

use super::StatError;

/// Items x raters matrix of categorical codes; `None` marks a missing rating.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingMatrix {
    pub data: Vec<Vec<Option<i64>>>,
}

impl RatingMatrix {
    pub fn new(data: Vec<Vec<Option<i64>>>) -> Self {
        RatingMatrix { data }
    }

    pub fn items(&self) -> usize {
        self.data.len()
    }

    pub fn raters(&self) -> usize {
        self.data.first().map_or(0, Vec::len)
    }

    fn categories(&self) -> Vec<i64> {
        let mut cats: Vec<i64> = self.data.iter().flatten().flatten().copied().collect();
        cats.sort_unstable();
        cats.dedup();
        cats
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AgreementBucket {
    Poor,
    Slight,
    Fair,
    Moderate,
    Substantial,
    AlmostPerfect,
}

impl AgreementBucket {
    pub fn from_coeff(value: f64) -> Self {
        if value < 0.0 {
            AgreementBucket::Poor
        } else if value < 0.2 {
            AgreementBucket::Slight
        } else if value < 0.4 {
            AgreementBucket::Fair
        } else if value < 0.6 {
            AgreementBucket::Moderate
        } else if value < 0.8 {
            AgreementBucket::Substantial
        } else {
            AgreementBucket::AlmostPerfect
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            AgreementBucket::Poor => "Pr",
            AgreementBucket::Slight => "Sl",
            AgreementBucket::Fair => "Fr",
            AgreementBucket::Moderate => "Mod",
            AgreementBucket::Substantial => "Sub",
            AgreementBucket::AlmostPerfect => "AP",
        }
    }
}

/// Cohen's kappa for two raters over the same items.
pub fn cohens_kappa(r1: &[i64], r2: &[i64]) -> Result<f64, StatError> {
    if r1.len() != r2.len() || r1.is_empty() {
        return Err(StatError::Empty);
    }
    let n = r1.len() as f64;
    let observed = r1.iter().zip(r2).filter(|(a, b)| a == b).count() as f64 / n;
    let mut cats: Vec<i64> = r1.iter().chain(r2.iter()).copied().collect();
    cats.sort_unstable();
    cats.dedup();
    if cats.len() < 2 {
        return Err(StatError::AllOneCategory);
    }
    let mut expected = 0.0;
    for cat in cats {
        let p1 = r1.iter().filter(|&&v| v == cat).count() as f64 / n;
        let p2 = r2.iter().filter(|&&v| v == cat).count() as f64 / n;
        expected += p1 * p2;
    }
    if (1.0 - expected).abs() < f64::EPSILON {
        return Err(StatError::AllOneCategory);
    }
    Ok((observed - expected) / (1.0 - expected))
}

/// Fleiss' kappa. Items with any missing rating are dropped (Fleiss assumes
/// a fixed rater count per item).
pub fn fleiss_kappa(matrix: &RatingMatrix) -> Result<f64, StatError> {
    let raters = matrix.raters();
    if raters < 2 {
        return Err(StatError::TooFew);
    }
    let rows: Vec<Vec<i64>> = matrix
        .data
        .iter()
        .filter_map(|row| {
            if row.len() == raters && row.iter().all(Option::is_some) {
                Some(row.iter().map(|v| v.unwrap()).collect())
            } else {
                None
            }
        })
        .collect();
    if rows.len() < 2 {
        return Err(StatError::TooFew);
    }
    let cats = matrix.categories();
    if cats.len() < 2 {
        return Err(StatError::AllOneCategory);
    }
    let n_items = rows.len() as f64;
    let m = raters as f64;

    let mut p_j = vec![0.0; cats.len()];
    let mut p_bar = 0.0;
    for row in &rows {
        let mut agreements = 0.0;
        for (j, cat) in cats.iter().enumerate() {
            let count = row.iter().filter(|&&v| v == *cat).count() as f64;
            p_j[j] += count;
            agreements += count * (count - 1.0);
        }
        p_bar += agreements / (m * (m - 1.0));
    }
    p_bar /= n_items;
    let p_e: f64 = p_j
        .iter()
        .map(|&total| {
            let share = total / (n_items * m);
            share * share
        })
        .sum();
    if (1.0 - p_e).abs() < f64::EPSILON {
        return Err(StatError::AllOneCategory);
    }
    Ok((p_bar - p_e) / (1.0 - p_e))
}

/// Krippendorff's alpha at the nominal level via the coincidence matrix;
/// missing ratings allowed, items with fewer than two ratings are ignored.
pub fn krippendorff_alpha(matrix: &RatingMatrix) -> Result<f64, StatError> {
    let cats = matrix.categories();
    if cats.len() < 2 {
        return Err(StatError::AllOneCategory);
    }
    let index_of = |cat: i64| cats.iter().position(|&c| c == cat).unwrap();
    let k = cats.len();
    let mut coincidence = vec![vec![0.0; k]; k];

    for row in &matrix.data {
        let values: Vec<i64> = row.iter().flatten().copied().collect();
        let m = values.len();
        if m < 2 {
            continue;
        }
        let weight = 1.0 / (m as f64 - 1.0);
        for (i, &a) in values.iter().enumerate() {
            for (j, &b) in values.iter().enumerate() {
                if i != j {
                    coincidence[index_of(a)][index_of(b)] += weight;
                }
            }
        }
    }

    let n: f64 = coincidence.iter().flatten().sum();
    if n <= 1.0 {
        return Err(StatError::TooFew);
    }
    let marginals: Vec<f64> = (0..k).map(|i| coincidence[i].iter().sum()).collect();
    let observed_disagreement: f64 = (0..k)
        .map(|i| (0..k).filter(|&j| j != i).map(|j| coincidence[i][j]).sum::<f64>())
        .sum::<f64>()
        / n;
    let expected_disagreement: f64 = {
        let cross: f64 = (0..k)
            .map(|i| (0..k).filter(|&j| j != i).map(|j| marginals[i] * marginals[j]).sum::<f64>())
            .sum();
        cross / (n * (n - 1.0))
    };
    if expected_disagreement == 0.0 {
        return Err(StatError::AllOneCategory);
    }
    Ok(1.0 - observed_disagreement / expected_disagreement)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_raters_agree_perfectly() {
        let r = [1, 0, 2, 1, 0];
        assert_eq!(cohens_kappa(&r, &r).unwrap(), 1.0);

        let matrix = RatingMatrix::new(
            r.iter().map(|&v| vec![Some(v), Some(v), Some(v)]).collect(),
        );
        assert!((fleiss_kappa(&matrix).unwrap() - 1.0).abs() < 1e-12);
        assert!((krippendorff_alpha(&matrix).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chance_level_agreement_is_zero() {
        // Marginals are uniform and agreement equals the chance rate.
        let r1 = [0, 0, 1, 1];
        let r2 = [0, 1, 0, 1];
        let kappa = cohens_kappa(&r1, &r2).unwrap();
        assert!(kappa.abs() < 1e-12, "kappa = {kappa}");
    }

    #[test]
    fn single_category_is_undefined() {
        assert_eq!(cohens_kappa(&[1, 1], &[1, 1]).unwrap_err(), StatError::AllOneCategory);
    }

    #[test]
    fn alpha_hand_computed_fixture() {
        // 4 items x 3 raters, one missing cell. Coincidence matrix computed
        // by hand: o_aa=4, o_ab=o_ba=2, o_bb=3, n=11, marginals 6 and 5;
        // Do = 4/11, De = 60/110, alpha = 1 - (4/11)/(6/11) = 1/3.
        let (a, b) = (0, 1);
        let matrix = RatingMatrix::new(vec![
            vec![Some(a), Some(a), Some(a)],
            vec![Some(a), Some(b), Some(b)],
            vec![Some(b), Some(b), None],
            vec![Some(a), Some(a), Some(b)],
        ]);
        let alpha = krippendorff_alpha(&matrix).unwrap();
        assert!((alpha - 1.0 / 3.0).abs() < 1e-9, "alpha = {alpha}");
    }

    #[test]
    fn bucket_cutoffs() {
        assert_eq!(AgreementBucket::from_coeff(-0.1), AgreementBucket::Poor);
        assert_eq!(AgreementBucket::from_coeff(0.1), AgreementBucket::Slight);
        assert_eq!(AgreementBucket::from_coeff(0.3), AgreementBucket::Fair);
        assert_eq!(AgreementBucket::from_coeff(0.5), AgreementBucket::Moderate);
        assert_eq!(AgreementBucket::from_coeff(0.7), AgreementBucket::Substantial);
        assert_eq!(AgreementBucket::from_coeff(0.9), AgreementBucket::AlmostPerfect);
    }
}

//! Transport-distance feature selection for categorical data.
//!
//! Each feature's importance is the ℓ1 distance between the two
//! class-conditional empirical measures of its symbols. Scores are computed
//! as exact rationals (symbol counts over class counts), so threshold
//! comparisons at round values never flake. An exact small-alphabet
//! transport solver and Kantorovich duality witnesses live in
//! [`transport`](self) as verification oracles.

mod transport;

pub use transport::{
    duality_witness_check, exact_transport_cost, solve_transport, transport_cost_1d,
    DistanceMatrix, TransportSolution, MAX_EXACT_ALPHABET,
};

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;

use crate::dataset::{CategoricalDataset, Dataset};
use crate::error::{Error, Result};

/// A probability measure on a finite alphabet: non-negative weights
/// summing to 1 within 1e-9.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    weights: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn new(weights: Vec<f64>) -> Result<EmpiricalMeasure> {
        if weights.is_empty() {
            return Err(Error::arg("measure needs at least one weight"));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::arg(format!("weight {w} is negative or non-finite")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::arg(format!("weights sum to {sum}, not 1")));
        }
        Ok(EmpiricalMeasure { weights })
    }

    /// Point mass at symbol `at` on an alphabet of `len` symbols.
    pub fn dirac(len: usize, at: usize) -> EmpiricalMeasure {
        let mut weights = vec![0.0; len];
        weights[at] = 1.0;
        EmpiricalMeasure { weights }
    }

    pub fn from_counts(counts: &[u64]) -> Result<EmpiricalMeasure> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::arg("cannot normalize an all-zero count vector"));
        }
        Ok(EmpiricalMeasure {
            weights: counts.iter().map(|&c| c as f64 / total as f64).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Per-feature importance scores as exact rationals, each in `[0, 2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureScores {
    scores: Vec<BigRational>,
    feature_names: Vec<String>,
}

impl FeatureScores {
    pub fn new(scores: Vec<BigRational>, feature_names: Vec<String>) -> Result<FeatureScores> {
        if scores.len() != feature_names.len() {
            return Err(Error::DimensionMismatch {
                expected: scores.len(),
                got: feature_names.len(),
            });
        }
        Ok(FeatureScores {
            scores,
            feature_names,
        })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn scores(&self) -> &[BigRational] {
        &self.scores
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn score_f64(&self, j: usize) -> f64 {
        ratio_to_f64(&self.scores[j])
    }

    /// Feature indices ordered by descending score, ties by ascending index.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.scores.len()).collect();
        idx.sort_by(|&a, &b| self.scores[b].cmp(&self.scores[a]).then(a.cmp(&b)));
        idx
    }
}

pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Symbol counts at column `j` for each class: `(control counts, control
/// total, case counts, case total)`.
fn class_counts(d: &CategoricalDataset, j: usize) -> Result<(Vec<u64>, u64, Vec<u64>, u64)> {
    if j >= d.cols() {
        return Err(Error::arg(format!(
            "feature index {j} outside [0, {})",
            d.cols()
        )));
    }
    let w = d.alphabet().len();
    let mut c0 = vec![0u64; w];
    let mut c1 = vec![0u64; w];
    for (i, label) in d.labels().iter().enumerate() {
        let code = d.code(i, j) as usize;
        if label.is_case() {
            c1[code] += 1;
        } else {
            c0[code] += 1;
        }
    }
    let n0: u64 = c0.iter().sum();
    let n1: u64 = c1.iter().sum();
    if n0 == 0 {
        return Err(Error::EmptyClass { label: 0 });
    }
    if n1 == 0 {
        return Err(Error::EmptyClass { label: 1 });
    }
    Ok((c0, n0, c1, n1))
}

/// Relative symbol frequencies at column `j` among label-0 and label-1 rows.
pub fn class_conditional_measures(
    d: &CategoricalDataset,
    j: usize,
) -> Result<(EmpiricalMeasure, EmpiricalMeasure)> {
    let (c0, _, c1, _) = class_counts(d, j)?;
    Ok((
        EmpiricalMeasure::from_counts(&c0)?,
        EmpiricalMeasure::from_counts(&c1)?,
    ))
}

/// ℓ1 distance between two measures on a common alphabet.
pub fn mtd_score(mu0: &EmpiricalMeasure, mu1: &EmpiricalMeasure) -> Result<f64> {
    if mu0.len() != mu1.len() {
        return Err(Error::DimensionMismatch {
            expected: mu0.len(),
            got: mu1.len(),
        });
    }
    Ok(mu0
        .weights
        .iter()
        .zip(&mu1.weights)
        .map(|(a, b)| (a - b).abs())
        .sum())
}

fn exact_score(c0: &[u64], n0: u64, c1: &[u64], n1: u64) -> BigRational {
    // sum_i |c0_i/n0 - c1_i/n1| = sum_i |c0_i*n1 - c1_i*n0| / (n0*n1)
    let mut num = BigInt::from(0u8);
    for (&a, &b) in c0.iter().zip(c1) {
        let diff = BigInt::from(a) * BigInt::from(n1) - BigInt::from(b) * BigInt::from(n0);
        num += if diff < BigInt::from(0u8) { -diff } else { diff };
    }
    BigRational::new(num, BigInt::from(n0) * BigInt::from(n1))
}

/// Scores every feature column; columns are scored concurrently. Requires
/// both classes present.
pub fn score_all(d: &CategoricalDataset) -> Result<FeatureScores> {
    let scores: Vec<BigRational> = (0..d.cols())
        .into_par_iter()
        .map(|j| {
            let (c0, n0, c1, n1) = class_counts(d, j)?;
            Ok(exact_score(&c0, n0, &c1, n1))
        })
        .collect::<Result<_>>()?;
    FeatureScores::new(scores, d.feature_names().to_vec())
}

/// Indices with score ≥ alpha, in ascending index order. The threshold is
/// converted to an exact rational, so comparisons at round values like 0.5
/// are exact.
pub fn select_features(s: &FeatureScores, alpha: f64) -> Result<Vec<usize>> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::arg(format!("alpha = {alpha} must be non-negative")));
    }
    let threshold = BigRational::from_float(alpha)
        .ok_or_else(|| Error::arg(format!("alpha = {alpha} is not finite")))?;
    Ok((0..s.scores.len())
        .filter(|&j| s.scores[j] >= threshold)
        .collect())
}

/// Keeps the columns in `keep` (ascending order enforced by construction);
/// labels are unchanged.
pub fn reduce_columns(d: &CategoricalDataset, keep: &[usize]) -> Result<CategoricalDataset> {
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if let Some(&bad) = sorted.iter().find(|&&j| j >= d.cols()) {
        return Err(Error::arg(format!(
            "feature index {bad} outside [0, {})",
            d.cols()
        )));
    }
    let rows = d.rows();
    let mut cells = Vec::with_capacity(rows * sorted.len());
    for i in 0..rows {
        for &j in &sorted {
            cells.push(d.code(i, j));
        }
    }
    let names = sorted
        .iter()
        .map(|&j| d.feature_names()[j].clone())
        .collect();
    CategoricalDataset::new(
        rows,
        sorted.len(),
        d.alphabet().to_vec(),
        cells,
        d.labels().to_vec(),
        names,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Label;
    use num_traits::Zero;
    use rand::Rng;

    /// 6 observations over {A,B,C}^5 whose per-feature transport scores are
    /// (1, 2, 2, 1/2, 1).
    pub(crate) fn worked_example() -> CategoricalDataset {
        let rows = [
            ("CBBBC", Label::Control),
            ("BCABA", Label::Case),
            ("CCCAA", Label::Case),
            ("ABBAA", Label::Control),
            ("BACCA", Label::Case),
            ("CCAAB", Label::Case),
        ];
        let alphabet: Vec<String> = ["A", "B", "C"].iter().map(|s| s.to_string()).collect();
        let mut cells = Vec::new();
        let mut labels = Vec::new();
        for (symbols, label) in rows {
            for ch in symbols.chars() {
                cells.push(ch as u8 - b'A');
            }
            labels.push(label);
        }
        let names = (1..=5).map(|j| format!("feature{j}")).collect();
        CategoricalDataset::new(6, 5, alphabet, cells, labels, names).unwrap()
    }

    fn rational(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn worked_example_feature_one_measures() {
        let d = worked_example();
        let (mu0, mu1) = class_conditional_measures(&d, 0).unwrap();
        assert_eq!(mu0.weights(), &[0.5, 0.0, 0.5]);
        assert_eq!(mu1.weights(), &[0.0, 0.5, 0.5]);
        assert_eq!(mtd_score(&mu0, &mu1).unwrap(), 1.0);
        let (mu0, mu1) = class_conditional_measures(&d, 3).unwrap();
        assert_eq!(mtd_score(&mu0, &mu1).unwrap(), 0.5);
    }

    #[test]
    fn constant_column_gives_equal_measures() {
        let alphabet: Vec<String> = ["A", "B", "C"].iter().map(|s| s.to_string()).collect();
        let d = CategoricalDataset::new(
            4,
            1,
            alphabet,
            vec![0, 0, 0, 0],
            vec![Label::Control, Label::Case, Label::Control, Label::Case],
            vec!["only".into()],
        )
        .unwrap();
        let (mu0, mu1) = class_conditional_measures(&d, 0).unwrap();
        assert_eq!(mu0.weights(), &[1.0, 0.0, 0.0]);
        assert_eq!(mu0, mu1);
        assert_eq!(mtd_score(&mu0, &mu1).unwrap(), 0.0);
    }

    #[test]
    fn single_class_dataset_is_an_error() {
        let alphabet: Vec<String> = ["A", "B"].iter().map(|s| s.to_string()).collect();
        let d = CategoricalDataset::new(
            2,
            1,
            alphabet,
            vec![0, 1],
            vec![Label::Case, Label::Case],
            vec!["x".into()],
        )
        .unwrap();
        match class_conditional_measures(&d, 0) {
            Err(Error::EmptyClass { label: 0 }) => {}
            other => panic!("expected empty class 0, got {other:?}"),
        }
    }

    #[test]
    fn worked_example_scores_are_exact() {
        let d = worked_example();
        let s = score_all(&d).unwrap();
        let expect = [
            rational(1, 1),
            rational(2, 1),
            rational(2, 1),
            rational(1, 2),
            rational(1, 1),
        ];
        assert_eq!(s.scores(), &expect);
        // The f64 view agrees on these dyadic values.
        assert_eq!(s.score_f64(0), 1.0);
        assert_eq!(s.score_f64(3), 0.5);
    }

    #[test]
    fn disjoint_diracs_score_two() {
        let a = EmpiricalMeasure::dirac(3, 0);
        let b = EmpiricalMeasure::dirac(3, 1);
        assert_eq!(mtd_score(&a, &b).unwrap(), 2.0);
        assert!(mtd_score(&a, &EmpiricalMeasure::dirac(4, 1)).is_err());
    }

    #[test]
    fn selection_thresholds_exactly() {
        let d = worked_example();
        let s = score_all(&d).unwrap();
        assert_eq!(select_features(&s, 1.5).unwrap(), vec![1, 2]);
        assert_eq!(select_features(&s, 0.0).unwrap(), vec![0, 1, 2, 3, 4]);
        assert_eq!(select_features(&s, 2.5).unwrap(), Vec::<usize>::new());
        // Inclusive comparison at an exactly attained score.
        assert_eq!(select_features(&s, 2.0).unwrap(), vec![1, 2]);
        assert_eq!(select_features(&s, 0.5).unwrap(), vec![0, 1, 2, 3, 4]);
        assert!(select_features(&s, -0.1).is_err());
    }

    #[test]
    fn selection_is_monotone_in_alpha() {
        let d = worked_example();
        let s = score_all(&d).unwrap();
        let mut last = select_features(&s, 0.0).unwrap();
        for alpha in [0.25, 0.5, 0.75, 1.0, 1.5, 1.75, 2.0] {
            let now = select_features(&s, alpha).unwrap();
            assert!(now.iter().all(|j| last.contains(j)), "alpha {alpha}");
            last = now;
        }
    }

    #[test]
    fn duplicated_column_scores_identically() {
        let d = worked_example();
        let dup = reduce_columns(&d, &[1, 1, 3]).unwrap();
        assert_eq!(dup.cols(), 2); // deduplicated index set
        let s = score_all(&dup).unwrap();
        assert_eq!(s.scores()[0], rational(2, 1));
        assert_eq!(s.scores()[1], rational(1, 2));
    }

    #[test]
    fn reduce_columns_keeps_scores_of_retained_features() {
        let d = worked_example();
        let full = score_all(&d).unwrap();
        let keep = vec![0, 2, 4];
        let reduced = reduce_columns(&d, &keep).unwrap();
        assert_eq!(reduced.cols(), 3);
        let s = score_all(&reduced).unwrap();
        for (slot, &j) in keep.iter().enumerate() {
            assert_eq!(s.scores()[slot], full.scores()[j]);
            assert_eq!(s.feature_names()[slot], full.feature_names()[j]);
        }
        assert!(reduce_columns(&d, &[9]).is_err());
        let all = reduce_columns(&d, &[0, 1, 2, 3, 4]).unwrap();
        assert_eq!(all, d);
    }

    #[test]
    fn scores_are_a_metric_on_random_triples() {
        let mut rng = crate::seed::rng(17);
        for _ in 0..200 {
            let w = rng.gen_range(2..6);
            let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
                let raw: Vec<f64> = (0..w).map(|_| rng.gen_range(0.01..1.0)).collect();
                let sum: f64 = raw.iter().sum();
                EmpiricalMeasure::new(raw.into_iter().map(|v| v / sum).collect()).unwrap()
            };
            let a = draw(&mut rng);
            let b = draw(&mut rng);
            let c = draw(&mut rng);
            let dab = mtd_score(&a, &b).unwrap();
            let dba = mtd_score(&b, &a).unwrap();
            let dac = mtd_score(&a, &c).unwrap();
            let dcb = mtd_score(&c, &b).unwrap();
            assert_eq!(dab, dba);
            assert!((0.0..=2.0).contains(&dab));
            assert!(dab <= dac + dcb + 1e-12);
            assert_eq!(mtd_score(&a, &a).unwrap(), 0.0);
            if a != b {
                assert!(dab > 0.0);
            }
        }
    }

    #[test]
    fn ranking_is_invariant_under_positive_rescaling() {
        let d = worked_example();
        let s = score_all(&d).unwrap();
        let scaled: Vec<BigRational> = s
            .scores()
            .iter()
            .map(|r| r * rational(7, 3))
            .collect();
        let t = FeatureScores::new(scaled, s.feature_names().to_vec()).unwrap();
        assert_eq!(s.ranking(), t.ranking());
    }

    #[test]
    fn zero_score_iff_class_frequencies_coincide() {
        // Column where both classes see A twice and B twice.
        let alphabet: Vec<String> = ["A", "B"].iter().map(|s| s.to_string()).collect();
        let d = CategoricalDataset::new(
            8,
            1,
            alphabet,
            vec![0, 0, 1, 1, 0, 0, 1, 1],
            vec![
                Label::Control,
                Label::Control,
                Label::Control,
                Label::Control,
                Label::Case,
                Label::Case,
                Label::Case,
                Label::Case,
            ],
            vec!["x".into()],
        )
        .unwrap();
        let s = score_all(&d).unwrap();
        assert!(s.scores()[0].is_zero());
    }
}

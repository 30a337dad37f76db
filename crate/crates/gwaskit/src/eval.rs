//! Classifier evaluation: confusion-matrix scores, ROC curves from
//! threshold sweeps over vote fractions with rectangle-rule area, and
//! t-fold cross-validation.
//!
//! Rates with a zero denominator are reported as `None` rather than 0;
//! silent zeros would corrupt threshold sweeps.

use rayon::prelude::*;

use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};
use crate::seed;

use rand::seq::SliceRandom;

/// Counts of the four comparative outcomes between predictions and truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub true_negatives: usize,
}

/// Tallies predictions against true labels.
pub fn confusion(pred: &[Label], truth: &[Label]) -> Result<ConfusionMatrix> {
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            got: pred.len(),
        });
    }
    let mut m = ConfusionMatrix {
        true_positives: 0,
        false_positives: 0,
        false_negatives: 0,
        true_negatives: 0,
    };
    for (p, t) in pred.iter().zip(truth) {
        match (p.is_case(), t.is_case()) {
            (true, true) => m.true_positives += 1,
            (true, false) => m.false_positives += 1,
            (false, true) => m.false_negatives += 1,
            (false, false) => m.true_negatives += 1,
        }
    }
    Ok(m)
}

impl ConfusionMatrix {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize, tn: usize) -> ConfusionMatrix {
        ConfusionMatrix {
            true_positives: tp,
            false_positives: fp,
            false_negatives: fn_,
            true_negatives: tn,
        }
    }

    pub fn total(&self) -> usize {
        self.true_positives + self.false_positives + self.false_negatives + self.true_negatives
    }

    /// `(tp + tn) / total`, or `None` for an empty matrix.
    pub fn accuracy(&self) -> Option<f64> {
        let total = self.total();
        if total == 0 {
            return None;
        }
        Some((self.true_positives + self.true_negatives) as f64 / total as f64)
    }

    /// `tp / (tp + fp)`, or `None` when nothing was predicted positive.
    pub fn precision(&self) -> Option<f64> {
        let denom = self.true_positives + self.false_positives;
        if denom == 0 {
            return None;
        }
        Some(self.true_positives as f64 / denom as f64)
    }

    /// `tp / (tp + fn)`, or `None` when nothing is actually positive.
    pub fn recall(&self) -> Option<f64> {
        let denom = self.true_positives + self.false_negatives;
        if denom == 0 {
            return None;
        }
        Some(self.true_positives as f64 / denom as f64)
    }

    /// `2tp / (2tp + fn + fp)`, or `None` when that denominator is zero.
    pub fn f_measure(&self) -> Option<f64> {
        let denom = 2 * self.true_positives + self.false_negatives + self.false_positives;
        if denom == 0 {
            return None;
        }
        Some(2.0 * self.true_positives as f64 / denom as f64)
    }

    /// True-positive rate; same as recall.
    pub fn tpr(&self) -> Option<f64> {
        self.recall()
    }

    /// False-positive rate `fp / (fp + tn)`.
    pub fn fpr(&self) -> Option<f64> {
        let denom = self.false_positives + self.true_negatives;
        if denom == 0 {
            return None;
        }
        Some(self.false_positives as f64 / denom as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub alpha: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// Rate pairs over a strictly increasing threshold grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    points: Vec<RocPoint>,
}

impl RocCurve {
    pub fn from_points(points: Vec<RocPoint>) -> Result<RocCurve> {
        if points.is_empty() {
            return Err(Error::arg("a ROC curve needs at least one point"));
        }
        if points.windows(2).any(|w| w[0].alpha >= w[1].alpha) {
            return Err(Error::arg("thresholds must be strictly increasing"));
        }
        Ok(RocCurve { points })
    }

    pub fn points(&self) -> &[RocPoint] {
        &self.points
    }

    pub fn grid_size(&self) -> usize {
        self.points.len()
    }
}

/// Sweeps `w` equally spaced thresholds over [0, 1] inclusive; at each
/// threshold the prediction is 1 iff `score >= alpha`. Requires scores in
/// [0, 1] and both classes present in the truth.
pub fn roc_curve(scores: &[f64], truth: &[Label], w: usize) -> Result<RocCurve> {
    if scores.is_empty() {
        return Err(Error::arg("empty score vector"));
    }
    if scores.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            got: scores.len(),
        });
    }
    if w < 2 {
        return Err(Error::arg(format!("grid size {w} must be at least 2")));
    }
    if let Some(s) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(Error::arg(format!("score {s} outside [0, 1]")));
    }
    let positives = truth.iter().filter(|t| t.is_case()).count();
    if positives == 0 || positives == truth.len() {
        return Err(Error::arg(
            "degenerate truth: both classes must be present for ROC rates",
        ));
    }
    let points = (0..w)
        .map(|i| {
            let alpha = i as f64 / (w - 1) as f64;
            let pred: Vec<Label> = scores
                .iter()
                .map(|&s| if s >= alpha { Label::Case } else { Label::Control })
                .collect();
            let m = confusion(&pred, truth)?;
            Ok(RocPoint {
                alpha,
                fpr: m.fpr().expect("both classes present"),
                tpr: m.tpr().expect("both classes present"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    RocCurve::from_points(points)
}

/// Rectangle-rule area: `|sum_i (fpr_i - fpr_{i+1}) * tpr_{i+1}|` over the
/// curve's threshold order.
pub fn auc(curve: &RocCurve) -> Result<f64> {
    let pts = curve.points();
    if pts.len() < 2 {
        return Err(Error::arg("area needs at least 2 ROC points"));
    }
    let sum: f64 = pts
        .windows(2)
        .map(|w| (w[0].fpr - w[1].fpr) * w[1].tpr)
        .sum();
    Ok(sum.abs())
}

/// Assignment of every row to one of `t` folds of near-equal size.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldPlan {
    t: usize,
    assignment: Vec<usize>,
}

impl FoldPlan {
    /// Validates fold indices and the size balance (sizes differ by ≤ 1).
    pub fn new(t: usize, assignment: Vec<usize>) -> Result<FoldPlan> {
        if t < 2 || t > assignment.len() {
            return Err(Error::arg(format!(
                "fold count {t} outside [2, {}]",
                assignment.len()
            )));
        }
        let mut sizes = vec![0usize; t];
        for &f in &assignment {
            if f >= t {
                return Err(Error::arg(format!("fold index {f} outside [0, {t})")));
            }
            sizes[f] += 1;
        }
        let max = sizes.iter().max().unwrap();
        let min = sizes.iter().min().unwrap();
        if max - min > 1 {
            return Err(Error::arg("fold sizes differ by more than 1"));
        }
        Ok(FoldPlan { t, assignment })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn rows(&self) -> usize {
        self.assignment.len()
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Row indices of fold `i`, in ascending row order.
    pub fn fold_rows(&self, i: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&r| self.assignment[r] == i)
            .collect()
    }

    /// Row indices outside fold `i`, in ascending row order.
    pub fn train_rows(&self, i: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&r| self.assignment[r] != i)
            .collect()
    }
}

/// Shuffles the rows with the seeded generator and deals them round-robin
/// into `t` folds, so fold sizes are `floor(n/t)` or `ceil(n/t)`.
pub fn kfold_plan(n: usize, t: usize, master_seed: u64) -> Result<FoldPlan> {
    if t < 2 || t > n {
        return Err(Error::arg(format!("fold count {t} outside [2, {n}]")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng(master_seed));
    let mut assignment = vec![0usize; n];
    for (pos, &row) in order.iter().enumerate() {
        assignment[row] = pos % t;
    }
    FoldPlan::new(t, assignment)
}

/// Per-fold scores and their arithmetic mean.
#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub mean: f64,
    pub per_fold: Vec<f64>,
}

/// For each fold: train on the complement, score on the fold. Folds run
/// concurrently when the trainer and scorer are thread-safe; results merge
/// by fold index and errors carry the fold they came from.
pub fn cross_validate<D, M, T, S>(
    trainer: &T,
    scorer: &S,
    data: &D,
    plan: &FoldPlan,
) -> Result<CvReport>
where
    D: Dataset + Sync,
    M: Send,
    T: Fn(&D) -> Result<M> + Sync,
    S: Fn(&M, &D) -> Result<f64> + Sync,
{
    if plan.rows() != data.rows() {
        return Err(Error::DimensionMismatch {
            expected: data.rows(),
            got: plan.rows(),
        });
    }
    let per_fold: Vec<f64> = (0..plan.t())
        .into_par_iter()
        .map(|i| {
            let run = || -> Result<f64> {
                let train = data.select_rows(&plan.train_rows(i));
                let test = data.select_rows(&plan.fold_rows(i));
                let model = trainer(&train)?;
                scorer(&model, &test)
            };
            run().map_err(|e| Error::Fold {
                index: i,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let mean = per_fold.iter().sum::<f64>() / per_fold.len() as f64;
    Ok(CvReport { mean, per_fold })
}

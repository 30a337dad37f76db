//! k-nearest-neighbour classification over real-valued datasets.
//!
//! Training stores the sample verbatim; prediction scans all training rows,
//! orders them by distance under the chosen ℓp norm (ties by ascending row
//! index), and takes the majority label of the k nearest. An exact 50/50
//! vote returns label 0.

use rayon::prelude::*;

use crate::dataset::{Dataset, Label, RealDataset};
use crate::error::{Error, Result};

/// The ℓp norm used for neighbour distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    L1,
    L2,
    LInf,
}

impl Norm {
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Norm::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Norm::L2 => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            Norm::LInf => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max),
        }
    }
}

impl std::str::FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Norm> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Norm::L1),
            "l2" => Ok(Norm::L2),
            "linf" => Ok(Norm::LInf),
            other => Err(Error::arg(format!("unknown norm `{other}`"))),
        }
    }
}

impl std::fmt::Display for Norm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Norm::L1 => write!(f, "l1"),
            Norm::L2 => write!(f, "l2"),
            Norm::LInf => write!(f, "linf"),
        }
    }
}

/// A fitted model: the training sample plus `k` and the norm.
#[derive(Debug, Clone)]
pub struct KnnModel {
    train: RealDataset,
    k: usize,
    norm: Norm,
}

/// Stores the sample unmodified. Requires `1 <= k <= d.rows()`.
pub fn fit(d: RealDataset, k: usize, norm: Norm) -> Result<KnnModel> {
    if k == 0 || k > d.rows() {
        return Err(Error::arg(format!(
            "k = {k} outside [1, {}]",
            d.rows()
        )));
    }
    Ok(KnnModel { train: d, k, norm })
}

impl KnnModel {
    pub fn train(&self) -> &RealDataset {
        &self.train
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    fn check_query(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.train.cols() {
            return Err(Error::DimensionMismatch {
                expected: self.train.cols(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg("query contains a non-finite value"));
        }
        Ok(())
    }

    /// The k nearest training rows as `(row index, distance)`, sorted by
    /// ascending distance with ties by ascending index. Exhaustive scan
    /// with a bounded selection of the k smallest.
    pub fn kneighbors(&self, x: &[f64]) -> Result<Vec<(usize, f64)>> {
        self.check_query(x)?;
        let mut all: Vec<(usize, f64)> = (0..self.train.rows())
            .map(|i| (i, self.norm.distance(self.train.row(i), x)))
            .collect();
        let by_distance_then_index =
            |a: &(usize, f64), b: &(usize, f64)| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0));
        if self.k < all.len() {
            all.select_nth_unstable_by(self.k - 1, by_distance_then_index);
            all.truncate(self.k);
        }
        all.sort_by(by_distance_then_index);
        Ok(all)
    }

    /// Fraction of label-1 votes among the k nearest.
    pub fn vote_fraction(&self, x: &[f64]) -> Result<f64> {
        let neighbours = self.kneighbors(x)?;
        let cases = neighbours
            .iter()
            .filter(|(i, _)| self.train.labels()[*i].is_case())
            .count();
        Ok(cases as f64 / self.k as f64)
    }

    /// Majority vote of the k nearest; an exact tie returns label 0.
    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        let fraction = self.vote_fraction(x)?;
        Ok(if fraction > 0.5 { Label::Case } else { Label::Control })
    }

    /// Vote fractions for every row of `queries`, computed concurrently.
    pub fn vote_fractions(&self, queries: &RealDataset) -> Result<Vec<f64>> {
        (0..queries.rows())
            .into_par_iter()
            .map(|i| self.vote_fraction(queries.row(i)))
            .collect()
    }

    /// Predictions for every row of `queries`, computed concurrently.
    pub fn predict_batch(&self, queries: &RealDataset) -> Result<Vec<Label>> {
        (0..queries.rows())
            .into_par_iter()
            .map(|i| self.predict(queries.row(i)))
            .collect()
    }
}

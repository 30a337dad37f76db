//! High-dimensional classification of labeled genotype data.
//!
//! The crate covers the full pipeline: ingesting genotype probability
//! matrices, discretizing them to categorical form, reducing dimension
//! either by seeded ±1 random projections or by transport-distance feature
//! selection, classifying with k-nearest-neighbours or random forests, and
//! evaluating with confusion-matrix scores, ROC/AUC sweeps, holdout splits,
//! and t-fold cross-validation. Everything random is keyed by an explicit
//! seed, so every run is reproducible bit for bit, including under
//! concurrency.
//!
//! ```
//! use gwaskit::dataset::{self, Dataset};
//! use gwaskit::{eval, forest, mtd};
//!
//! // Synthesize a small labeled genotype matrix with 3 signal features.
//! let (raw, truth) = dataset::synthesize_gwas(300, 20, 3, 0.9, 0.5, 42).unwrap();
//! let categorical = dataset::discretize(&raw);
//! let (train, test) = dataset::holdout_split(&categorical, 200, 7).unwrap();
//!
//! // Score features on the training split only, keep the strong ones.
//! let scores = mtd::score_all(&train).unwrap();
//! let selected = mtd::select_features(&scores, 0.5).unwrap();
//! assert!(selected.iter().all(|j| *j < 20));
//!
//! // Train a small forest on the selected columns and evaluate held out.
//! let train_kept = mtd::reduce_columns(&train, &selected).unwrap();
//! let test_kept = mtd::reduce_columns(&test, &selected).unwrap();
//! let sample = forest::TrainSet::from_categorical(&train_kept).unwrap();
//! let config = forest::TreeConfig::new(
//!     0.0,
//!     forest::default_feature_sample(selected.len()),
//!     42,
//! );
//! let model = forest::fit_forest(&sample, 50, &config, true).unwrap();
//!
//! let pred: Vec<_> = (0..test_kept.rows())
//!     .map(|i| model.predict(forest::Row::Categorical(test_kept.row_codes(i))).unwrap())
//!     .collect();
//! let matrix = eval::confusion(&pred, test_kept.labels()).unwrap();
//! assert!(matrix.accuracy().unwrap() > 0.5);
//! # let _ = truth;
//! ```

pub mod cli;
pub mod dataset;
pub mod eval;
pub mod forest;
pub mod knn;
pub mod mtd;
pub mod projection;

mod error;
mod seed;

pub use error::{Error, Result};

// The guide's code blocks compile and run as doc-tests, keeping the book
// in sync with the library.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/datasets.md")]
    pub struct Datasets;
    #[doc = include_str!("../../../book/src/random-projections.md")]
    pub struct RandomProjections;
    #[doc = include_str!("../../../book/src/feature-selection.md")]
    pub struct FeatureSelection;
    #[doc = include_str!("../../../book/src/nearest-neighbours.md")]
    pub struct NearestNeighbours;
    #[doc = include_str!("../../../book/src/trees-and-forests.md")]
    pub struct TreesAndForests;
    #[doc = include_str!("../../../book/src/evaluation.md")]
    pub struct Evaluation;
    #[doc = include_str!("../../../book/src/pipeline.md")]
    pub struct Pipeline;
}

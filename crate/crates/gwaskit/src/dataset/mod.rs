//! Data containers for the pipeline: raw genotype probability matrices,
//! discretized categorical matrices, real-valued matrices, and the
//! operations that move between them (discretization, holdout splitting,
//! CSV ingestion, synthetic data generation).

mod io;
mod synth;

pub use io::{
    load_categorical_matrix, load_genotype_matrix, load_real_matrix, write_categorical_matrix,
    write_genotype_matrix, write_real_matrix,
};
pub use synth::{synthesize_gwas, PlantedTruth};

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::seed;

/// Binary class label: 0 is control, 1 is case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Control = 0,
    Case = 1,
}

impl Label {
    pub fn from_int(value: i64) -> Result<Label> {
        match value {
            0 => Ok(Label::Control),
            1 => Ok(Label::Case),
            other => Err(Error::arg(format!("label {other} outside {{0,1}}"))),
        }
    }

    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn is_case(self) -> bool {
        self == Label::Case
    }
}

/// Tolerance on `p + q + r = 1` for a genotype probability triple,
/// matched to the 6-decimal CSV serialization.
pub const TRIPLE_SUM_TOLERANCE: f64 = 1e-6;

/// Symbols of the genotype alphabet, in discretization precedence order:
/// homozygous major, heterozygous, homozygous minor.
pub const GENOTYPE_ALPHABET: [&str; 3] = ["HM", "He", "Hm"];

/// Probabilities of the three genotypes at one SNP for one observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenotypeTriple {
    p: f64,
    q: f64,
    r: f64,
}

impl GenotypeTriple {
    /// Builds a triple, requiring each component in `[0, 1]` and
    /// `p + q + r = 1` within [`TRIPLE_SUM_TOLERANCE`].
    pub fn new(p: f64, q: f64, r: f64) -> Result<GenotypeTriple> {
        for (name, v) in [("p", p), ("q", q), ("r", r)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::arg(format!(
                    "genotype probability {name} = {v} outside [0, 1]"
                )));
            }
        }
        let sum = p + q + r;
        // Slack of a few ulps so sums exactly at the tolerance boundary
        // are not rejected for accumulation noise.
        if (sum - 1.0).abs() > TRIPLE_SUM_TOLERANCE + 1e-12 {
            return Err(Error::arg(format!(
                "triple sum {sum:.6} exceeds tolerance"
            )));
        }
        Ok(GenotypeTriple { p, q, r })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Index of the most probable genotype (0 = HM, 1 = He, 2 = Hm).
    /// Ties resolve by the fixed precedence HM > He > Hm.
    pub fn argmax(&self) -> u8 {
        let mut best = 0u8;
        let mut best_v = self.p;
        if self.q > best_v {
            best = 1;
            best_v = self.q;
        }
        if self.r > best_v {
            best = 2;
        }
        best
    }
}

/// Row-selectable labeled dataset; implemented by every matrix kind so the
/// split and cross-validation machinery works uniformly.
pub trait Dataset: Sized {
    fn rows(&self) -> usize;
    fn labels(&self) -> &[Label];
    /// New dataset holding the given rows in the given order.
    /// Panics on an out-of-range index.
    fn select_rows(&self, indices: &[usize]) -> Self;
}

/// Raw n×m matrix of genotype probability triples with binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct GenotypeDataset {
    rows: usize,
    cols: usize,
    cells: Vec<GenotypeTriple>,
    labels: Vec<Label>,
    feature_names: Vec<String>,
}

impl GenotypeDataset {
    pub fn new(
        rows: usize,
        cols: usize,
        cells: Vec<GenotypeTriple>,
        labels: Vec<Label>,
        feature_names: Vec<String>,
    ) -> Result<GenotypeDataset> {
        if cells.len() != rows * cols {
            return Err(Error::arg(format!(
                "cell count {} does not match {rows}x{cols}",
                cells.len()
            )));
        }
        if labels.len() != rows {
            return Err(Error::DimensionMismatch {
                expected: rows,
                got: labels.len(),
            });
        }
        if feature_names.len() != cols {
            return Err(Error::DimensionMismatch {
                expected: cols,
                got: feature_names.len(),
            });
        }
        Ok(GenotypeDataset {
            rows,
            cols,
            cells,
            labels,
            feature_names,
        })
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cell(&self, row: usize, col: usize) -> &GenotypeTriple {
        &self.cells[row * self.cols + col]
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Flattens each triple into three real columns `p, q, r`, giving the
    /// n×3m real matrix that distance-based classifiers consume.
    pub fn flatten(&self) -> RealDataset {
        let mut cells = Vec::with_capacity(self.rows * self.cols * 3);
        for t in &self.cells {
            cells.push(t.p);
            cells.push(t.q);
            cells.push(t.r);
        }
        RealDataset::new(self.rows, self.cols * 3, cells, self.labels.clone())
            .expect("triples are finite")
    }
}

impl Dataset for GenotypeDataset {
    fn rows(&self) -> usize {
        self.rows
    }

    fn labels(&self) -> &[Label] {
        &self.labels
    }

    fn select_rows(&self, indices: &[usize]) -> Self {
        let mut cells = Vec::with_capacity(indices.len() * self.cols);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            cells.extend_from_slice(&self.cells[i * self.cols..(i + 1) * self.cols]);
            labels.push(self.labels[i]);
        }
        GenotypeDataset {
            rows: indices.len(),
            cols: self.cols,
            cells,
            labels,
            feature_names: self.feature_names.clone(),
        }
    }
}

/// n×m matrix over a finite symbol alphabet with binary labels. Cells are
/// indices into `alphabet` (at most 256 symbols).
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalDataset {
    rows: usize,
    cols: usize,
    alphabet: Vec<String>,
    cells: Vec<u8>,
    labels: Vec<Label>,
    feature_names: Vec<String>,
}

impl CategoricalDataset {
    pub fn new(
        rows: usize,
        cols: usize,
        alphabet: Vec<String>,
        cells: Vec<u8>,
        labels: Vec<Label>,
        feature_names: Vec<String>,
    ) -> Result<CategoricalDataset> {
        if alphabet.is_empty() || alphabet.len() > 256 {
            return Err(Error::arg(format!(
                "alphabet size {} outside [1, 256]",
                alphabet.len()
            )));
        }
        if cells.len() != rows * cols {
            return Err(Error::arg(format!(
                "cell count {} does not match {rows}x{cols}",
                cells.len()
            )));
        }
        if labels.len() != rows {
            return Err(Error::DimensionMismatch {
                expected: rows,
                got: labels.len(),
            });
        }
        if feature_names.len() != cols {
            return Err(Error::DimensionMismatch {
                expected: cols,
                got: feature_names.len(),
            });
        }
        if let Some(bad) = cells.iter().position(|&c| c as usize >= alphabet.len()) {
            return Err(Error::arg(format!(
                "cell at ({}, {}) holds symbol index {} outside alphabet of size {}",
                bad / cols.max(1),
                bad % cols.max(1),
                cells[bad],
                alphabet.len()
            )));
        }
        Ok(CategoricalDataset {
            rows,
            cols,
            alphabet,
            cells,
            labels,
            feature_names,
        })
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    /// Symbol index at `(row, col)`.
    pub fn code(&self, row: usize, col: usize) -> u8 {
        self.cells[row * self.cols + col]
    }

    pub fn symbol(&self, row: usize, col: usize) -> &str {
        &self.alphabet[self.code(row, col) as usize]
    }

    pub fn row_codes(&self, row: usize) -> &[u8] {
        &self.cells[row * self.cols..(row + 1) * self.cols]
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }
}

impl Dataset for CategoricalDataset {
    fn rows(&self) -> usize {
        self.rows
    }

    fn labels(&self) -> &[Label] {
        &self.labels
    }

    fn select_rows(&self, indices: &[usize]) -> Self {
        let mut cells = Vec::with_capacity(indices.len() * self.cols);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            cells.extend_from_slice(&self.cells[i * self.cols..(i + 1) * self.cols]);
            labels.push(self.labels[i]);
        }
        CategoricalDataset {
            rows: indices.len(),
            cols: self.cols,
            alphabet: self.alphabet.clone(),
            cells,
            labels,
            feature_names: self.feature_names.clone(),
        }
    }
}

/// n×m real-valued matrix with binary labels. All cells are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct RealDataset {
    rows: usize,
    cols: usize,
    cells: Vec<f64>,
    labels: Vec<Label>,
}

impl RealDataset {
    pub fn new(
        rows: usize,
        cols: usize,
        cells: Vec<f64>,
        labels: Vec<Label>,
    ) -> Result<RealDataset> {
        if cells.len() != rows * cols {
            return Err(Error::arg(format!(
                "cell count {} does not match {rows}x{cols}",
                cells.len()
            )));
        }
        if labels.len() != rows {
            return Err(Error::DimensionMismatch {
                expected: rows,
                got: labels.len(),
            });
        }
        if let Some(bad) = cells.iter().position(|v| !v.is_finite()) {
            return Err(Error::arg(format!(
                "non-finite cell at ({}, {})",
                bad / cols.max(1),
                bad % cols.max(1)
            )));
        }
        Ok(RealDataset {
            rows,
            cols,
            cells,
            labels,
        })
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cell(&self, row: usize, col: usize) -> f64 {
        self.cells[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.cells[row * self.cols..(row + 1) * self.cols]
    }
}

impl Dataset for RealDataset {
    fn rows(&self) -> usize {
        self.rows
    }

    fn labels(&self) -> &[Label] {
        &self.labels
    }

    fn select_rows(&self, indices: &[usize]) -> Self {
        let mut cells = Vec::with_capacity(indices.len() * self.cols);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            cells.extend_from_slice(&self.cells[i * self.cols..(i + 1) * self.cols]);
            labels.push(self.labels[i]);
        }
        RealDataset {
            rows: indices.len(),
            cols: self.cols,
            cells,
            labels,
        }
    }
}

/// Maps each probability triple to its most probable genotype. Ties resolve
/// by the fixed precedence HM > He > Hm; labels and feature names carry
/// through; the alphabet is fixed to `(HM, He, Hm)`.
pub fn discretize(g: &GenotypeDataset) -> CategoricalDataset {
    let cells = g.cells.iter().map(GenotypeTriple::argmax).collect();
    CategoricalDataset {
        rows: g.rows,
        cols: g.cols,
        alphabet: GENOTYPE_ALPHABET.iter().map(|s| s.to_string()).collect(),
        cells,
        labels: g.labels.clone(),
        feature_names: g.feature_names.clone(),
    }
}

/// Shuffles the rows with the seeded generator and splits them into a
/// training set of `n_train` rows and a test set of the remainder.
pub fn holdout_split<D: Dataset>(d: &D, n_train: usize, seed: u64) -> Result<(D, D)> {
    let n = d.rows();
    if n_train <= 1 || n_train >= n {
        return Err(Error::arg(format!(
            "n_train = {n_train} outside (1, {n})"
        )));
    }
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut seed::rng(seed));
    let train = d.select_rows(&indices[..n_train]);
    let test = d.select_rows(&indices[n_train..]);
    Ok((train, test))
}

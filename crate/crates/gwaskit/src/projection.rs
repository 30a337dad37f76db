//! Seeded ±1 random projections with a block-parallel multiplication
//! scheme and a pairwise-distortion auditor.
//!
//! Entries are generated per input column from a sub-seed derived from the
//! master seed, so any column partition of the input reproduces exactly the
//! same matrix. Blocked and serial execution therefore agree per cell up to
//! floating-point summation order, and block partial sums are reduced in
//! ascending block index so results do not depend on worker count.

use rand::Rng;
use rayon::prelude::*;

use crate::dataset::{Dataset, RealDataset};
use crate::error::{Error, Result};
use crate::seed;

/// Entry buffers larger than this (in entries, one byte each) are not
/// materialized; columns are regenerated from their seeds on demand.
pub const DEFAULT_MATERIALIZE_LIMIT: usize = 64 << 20;

const COLUMN_TAG: u64 = 0x434f_4c53;

fn column_seed(master: u64, col: usize) -> u64 {
    seed::derive(master, COLUMN_TAG ^ (col as u64).rotate_left(17))
}

fn fill_column(master: u64, col: usize, out_dim: usize, buf: &mut Vec<i8>) {
    buf.clear();
    let mut rng = seed::rng(column_seed(master, col));
    buf.extend((0..out_dim).map(|_| if rng.gen::<bool>() { 1i8 } else { -1i8 }));
}

/// A ±1 projection matrix scaled by `1/sqrt(out_dim)`, fully determined by
/// `(in_dim, out_dim, seed)`.
#[derive(Debug, Clone)]
pub struct ProjectionMatrix {
    in_dim: usize,
    out_dim: usize,
    seed: u64,
    scale: f64,
    /// Column-major entries (column c at `c * out_dim ..`), or `None` when
    /// the matrix exceeds the materialization limit and is regenerated on
    /// the fly.
    entries: Option<Vec<i8>>,
}

impl ProjectionMatrix {
    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Unscaled ±1 entries of input column `col`, written into `buf`.
    pub fn column(&self, col: usize, buf: &mut Vec<i8>) {
        match &self.entries {
            Some(e) => {
                buf.clear();
                buf.extend_from_slice(&e[col * self.out_dim..(col + 1) * self.out_dim]);
            }
            None => fill_column(self.seed, col, self.out_dim, buf),
        }
    }

    /// Unscaled entry at `(input column, output column)`.
    pub fn entry(&self, col: usize, out: usize) -> i8 {
        match &self.entries {
            Some(e) => e[col * self.out_dim + out],
            None => {
                let mut buf = Vec::new();
                fill_column(self.seed, col, self.out_dim, &mut buf);
                buf[out]
            }
        }
    }
}

/// Target dimension `ceil(c * ln(n) / epsilon^2)` for preserving pairwise
/// distances of `n` points within `1 ± epsilon`.
pub fn recommended_dim(n: usize, epsilon: f64, c: f64) -> Result<usize> {
    if n < 2 {
        return Err(Error::arg(format!("n = {n} must be at least 2")));
    }
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::arg(format!("epsilon = {epsilon} outside (0, 0.5)")));
    }
    if !c.is_finite() || c <= 0.0 {
        return Err(Error::arg(format!("constant c = {c} must be positive")));
    }
    Ok((c * (n as f64).ln() / (epsilon * epsilon)).ceil() as usize)
}

/// Generates the seeded ±1 matrix for `m -> m_prime`, materializing entries
/// when they fit the default memory limit.
pub fn generate_projection(m: usize, m_prime: usize, seed: u64) -> Result<ProjectionMatrix> {
    generate_projection_with_limit(m, m_prime, seed, DEFAULT_MATERIALIZE_LIMIT)
}

/// As [`generate_projection`] with an explicit materialization limit in
/// entries; pass 0 to always regenerate columns on the fly.
pub fn generate_projection_with_limit(
    m: usize,
    m_prime: usize,
    seed: u64,
    limit: usize,
) -> Result<ProjectionMatrix> {
    if m == 0 || m_prime == 0 {
        return Err(Error::arg("projection dimensions must be at least 1"));
    }
    let entries = if m.saturating_mul(m_prime) <= limit {
        let mut all = Vec::with_capacity(m * m_prime);
        let mut buf = Vec::with_capacity(m_prime);
        for c in 0..m {
            fill_column(seed, c, m_prime, &mut buf);
            all.extend_from_slice(&buf);
        }
        Some(all)
    } else {
        None
    };
    Ok(ProjectionMatrix {
        in_dim: m,
        out_dim: m_prime,
        seed,
        scale: 1.0 / (m_prime as f64).sqrt(),
        entries,
    })
}

/// Applies the projection to every row; labels carry through.
pub fn project(d: &RealDataset, p: &ProjectionMatrix) -> Result<RealDataset> {
    if d.cols() != p.in_dim {
        return Err(Error::DimensionMismatch {
            expected: p.in_dim,
            got: d.cols(),
        });
    }
    let n = d.rows();
    let m_prime = p.out_dim;
    let mut out = vec![0.0f64; n * m_prime];
    let mut col = Vec::with_capacity(m_prime);
    for c in 0..p.in_dim {
        p.column(c, &mut col);
        for r in 0..n {
            let x = d.cell(r, c);
            if x != 0.0 {
                let row_out = &mut out[r * m_prime..(r + 1) * m_prime];
                for (acc, &e) in row_out.iter_mut().zip(&col) {
                    *acc += x * e as f64;
                }
            }
        }
    }
    for v in &mut out {
        *v *= p.scale;
    }
    RealDataset::new(n, m_prime, out, d.labels().to_vec())
}

/// Column partition of the input dimension into `z` contiguous blocks of
/// near-equal width. `block_seeds[i]` is the entry stream of the block's
/// first column; entry streams are per column, so every partition of the
/// same master seed reproduces the same matrix.
#[derive(Debug, Clone)]
pub struct BlockPlan {
    boundaries: Vec<usize>,
    master_seed: u64,
    block_seeds: Vec<u64>,
}

impl BlockPlan {
    pub fn new(in_dim: usize, z: usize, master_seed: u64) -> Result<BlockPlan> {
        if z == 0 || z > in_dim {
            return Err(Error::arg(format!("block count {z} outside [1, {in_dim}]")));
        }
        let base = in_dim / z;
        let extra = in_dim % z;
        let mut boundaries = Vec::with_capacity(z + 1);
        boundaries.push(0);
        for i in 0..z {
            let width = base + usize::from(i < extra);
            boundaries.push(boundaries[i] + width);
        }
        let block_seeds = boundaries[..z]
            .iter()
            .map(|&c| column_seed(master_seed, c))
            .collect();
        Ok(BlockPlan {
            boundaries,
            master_seed,
            block_seeds,
        })
    }

    pub fn z(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn block_seeds(&self) -> &[u64] {
        &self.block_seeds
    }

    fn in_dim(&self) -> usize {
        *self.boundaries.last().unwrap()
    }
}

/// Blocked projection: block partials are computed concurrently and summed
/// in ascending block index, so the result is identical for any worker
/// count and within 1e-9 per cell of single-block execution.
pub fn project_blocked(d: &RealDataset, m_prime: usize, plan: &BlockPlan) -> Result<RealDataset> {
    if plan.in_dim() != d.cols() {
        return Err(Error::DimensionMismatch {
            expected: d.cols(),
            got: plan.in_dim(),
        });
    }
    if m_prime == 0 {
        return Err(Error::arg("projection dimensions must be at least 1"));
    }
    let n = d.rows();
    let z = plan.z();
    let partials: Vec<Vec<f64>> = (0..z)
        .into_par_iter()
        .map(|b| {
            let lo = plan.boundaries[b];
            let hi = plan.boundaries[b + 1];
            let mut acc = vec![0.0f64; n * m_prime];
            let mut col = Vec::with_capacity(m_prime);
            for c in lo..hi {
                fill_column(plan.master_seed, c, m_prime, &mut col);
                for r in 0..n {
                    let x = d.cell(r, c);
                    if x != 0.0 {
                        let row_out = &mut acc[r * m_prime..(r + 1) * m_prime];
                        for (a, &e) in row_out.iter_mut().zip(&col) {
                            *a += x * e as f64;
                        }
                    }
                }
            }
            acc
        })
        .collect();

    let mut out = vec![0.0f64; n * m_prime];
    for partial in &partials {
        for (o, p) in out.iter_mut().zip(partial) {
            *o += p;
        }
    }
    let scale = 1.0 / (m_prime as f64).sqrt();
    for v in &mut out {
        *v *= scale;
    }
    RealDataset::new(n, m_prime, out, d.labels().to_vec())
}

/// Outcome of checking every unordered row pair for `(1 ± epsilon)`
/// distortion of its Euclidean distance.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionReport {
    pub epsilon: f64,
    pub pairs_checked: usize,
    pub pairs_within: usize,
    pub worst_ratio: f64,
}

fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Checks all unordered row pairs; identical original rows count as within,
/// and `worst_ratio` is the largest `|projected/original - 1|` over pairs
/// with positive original distance.
pub fn distortion_audit(
    original: &RealDataset,
    projected: &RealDataset,
    epsilon: f64,
) -> Result<DistortionReport> {
    if original.rows() != projected.rows() {
        return Err(Error::DimensionMismatch {
            expected: original.rows(),
            got: projected.rows(),
        });
    }
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::arg(format!("epsilon = {epsilon} outside (0, 0.5)")));
    }
    let n = original.rows();
    let mut checked = 0usize;
    let mut within = 0usize;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            checked += 1;
            let d0 = l2(original.row(i), original.row(j));
            let dp = l2(projected.row(i), projected.row(j));
            if d0 == 0.0 {
                within += 1;
                continue;
            }
            let ratio = dp / d0;
            if (ratio - 1.0).abs() > worst {
                worst = (ratio - 1.0).abs();
            }
            if dp >= (1.0 - epsilon) * d0 && dp <= (1.0 + epsilon) * d0 {
                within += 1;
            }
        }
    }
    Ok(DistortionReport {
        epsilon,
        pairs_checked: checked,
        pairs_within: within,
        worst_ratio: worst,
    })
}

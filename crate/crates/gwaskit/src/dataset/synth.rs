//! Seeded synthetic genotype generator with planted class signal.
//!
//! Each feature gets a base genotype profile drawn from a flat Dirichlet.
//! Informative features give case observations a shifted profile
//! `(1 - effect) * base + effect * spike`, where the spike concentrates on
//! the base profile's least likely genotype; controls always draw from the
//! base profile. Per-cell probability triples concentrate most of their
//! mass on the drawn genotype, so discretization recovers it, and all
//! probabilities are quantized to 6 decimals so CSV round-trips are exact.

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{GenotypeDataset, GenotypeTriple, Label};
use crate::error::{Error, Result};
use crate::seed;

/// Ground truth for synthetic data: which features carry class signal.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedTruth {
    informative_indices: Vec<usize>,
    effect_size: f64,
}

impl PlantedTruth {
    pub fn informative_indices(&self) -> &[usize] {
        &self.informative_indices
    }

    pub fn effect_size(&self) -> f64 {
        self.effect_size
    }
}

/// Quantizes to 6 decimal digits, the genotype CSV precision.
fn q6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

fn dirichlet3(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let mut g = [0.0; 3];
    for v in &mut g {
        let u: f64 = rng.gen_range(1e-9..1.0);
        *v = -u.ln();
    }
    let total: f64 = g.iter().sum();
    [g[0] / total, g[1] / total, g[2] / total]
}

fn argmin3(v: &[f64; 3]) -> usize {
    let mut best = 0;
    for i in 1..3 {
        if v[i] < v[best] {
            best = i;
        }
    }
    best
}

fn sample_genotype(rng: &mut ChaCha8Rng, profile: &[f64; 3]) -> usize {
    let u: f64 = rng.gen_range(0.0..1.0);
    if u < profile[0] {
        0
    } else if u < profile[0] + profile[1] {
        1
    } else {
        2
    }
}

/// Draws a probability triple concentrated on genotype `g`. The main mass
/// is at least 0.70 and the two minor components are quantized first, so the
/// triple sums to 1 exactly at 6 decimals and argmax always recovers `g`.
fn noisy_triple(rng: &mut ChaCha8Rng, g: usize) -> GenotypeTriple {
    let confidence: f64 = rng.gen_range(0.70..0.95);
    let rest = 1.0 - confidence;
    let split: f64 = rng.gen_range(0.0..1.0);
    let minor_a = q6(rest * split);
    let minor_b = q6(rest * (1.0 - split));
    let main = q6(1.0 - minor_a - minor_b);
    let mut t = [0.0; 3];
    t[g] = main;
    let others: Vec<usize> = (0..3).filter(|&i| i != g).collect();
    t[others[0]] = minor_a;
    t[others[1]] = minor_b;
    GenotypeTriple::new(t[0], t[1], t[2]).expect("constructed triple is valid")
}

/// Generates a labeled genotype matrix with `k_informative` planted signal
/// features of the given effect size and class-1 fraction ≈ `balance`.
/// Deterministic for a fixed argument tuple.
pub fn synthesize_gwas(
    n: usize,
    m: usize,
    k_informative: usize,
    effect: f64,
    balance: f64,
    master_seed: u64,
) -> Result<(GenotypeDataset, PlantedTruth)> {
    if n < 2 {
        return Err(Error::arg(format!("n = {n} must be at least 2")));
    }
    if k_informative > m {
        return Err(Error::arg(format!(
            "k_informative = {k_informative} exceeds m = {m}"
        )));
    }
    if !(0.0..=1.0).contains(&effect) {
        return Err(Error::arg(format!("effect = {effect} outside [0, 1]")));
    }
    if !(balance > 0.0 && balance < 1.0) {
        return Err(Error::arg(format!("balance = {balance} outside (0, 1)")));
    }

    let mut rng = seed::rng(seed::derive(master_seed, 0x5953_4e54));

    let n_case = ((n as f64 * balance).round() as usize).clamp(1, n - 1);
    let mut labels: Vec<Label> = (0..n)
        .map(|i| if i < n_case { Label::Case } else { Label::Control })
        .collect();
    labels.shuffle(&mut rng);

    let mut informative: Vec<usize> = sample(&mut rng, m, k_informative).into_vec();
    informative.sort_unstable();
    let mut is_informative = vec![false; m];
    for &j in &informative {
        is_informative[j] = true;
    }

    // Per-feature genotype profiles, control and case.
    let mut control_profiles = Vec::with_capacity(m);
    let mut case_profiles = Vec::with_capacity(m);
    for &informative in &is_informative {
        let base = dirichlet3(&mut rng);
        let case = if informative {
            let spike_at = argmin3(&base);
            let mut p = [0.0; 3];
            for (i, item) in p.iter_mut().enumerate() {
                let spike = if i == spike_at { 1.0 } else { 0.0 };
                *item = (1.0 - effect) * base[i] + effect * spike;
            }
            p
        } else {
            base
        };
        control_profiles.push(base);
        case_profiles.push(case);
    }

    let mut cells = Vec::with_capacity(n * m);
    for label in &labels {
        for j in 0..m {
            let profile = if label.is_case() {
                &case_profiles[j]
            } else {
                &control_profiles[j]
            };
            let g = sample_genotype(&mut rng, profile);
            cells.push(noisy_triple(&mut rng, g));
        }
    }

    let feature_names = (0..m).map(|j| format!("snp{j}")).collect();
    let dataset = GenotypeDataset::new(n, m, cells, labels, feature_names)?;
    Ok((
        dataset,
        PlantedTruth {
            informative_indices: informative,
            effect_size: effect,
        },
    ))
}

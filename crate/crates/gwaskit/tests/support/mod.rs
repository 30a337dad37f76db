//! Independent oracles and fixtures shared by the integration tests.
//!
//! Nothing here calls into the implementation paths it is used to check:
//! the transport oracle enumerates basic feasible solutions of the
//! transport polytope directly, and the neighbour oracle is a plain full
//! sort with an explicit mode.

#![allow(dead_code)]

use gwaskit::dataset::{CategoricalDataset, Label};

/// Exact minimum transport cost by enumerating every forest-supported
/// basic feasible solution of the transport polytope. Intended for w <= 4.
pub fn brute_force_transport(mu: &[f64], nu: &[f64], dist: &dyn Fn(usize, usize) -> f64) -> f64 {
    let w = mu.len();
    assert_eq!(w, nu.len());
    assert!(w <= 4, "oracle is for tiny alphabets");
    let n_edges = w * w;
    let max_support = 2 * w - 1;
    let mut best = f64::INFINITY;

    'masks: for mask in 1u32..(1u32 << n_edges) {
        if mask.count_ones() as usize > max_support {
            continue;
        }
        // Gather the candidate support.
        let mut edges: Vec<(usize, usize)> = Vec::with_capacity(max_support);
        for bit in 0..n_edges {
            if mask & (1 << bit) != 0 {
                edges.push((bit / w, bit % w));
            }
        }
        // Peel leaves: a degree-1 node forces the flow on its only edge.
        // Cyclic supports are not vertices and are skipped.
        let mut remaining_mu = mu.to_vec();
        let mut remaining_nu = nu.to_vec();
        let mut active: Vec<bool> = vec![true; edges.len()];
        let mut active_count = edges.len();
        let mut flows = vec![0.0f64; edges.len()];
        while active_count > 0 {
            let mut peeled = false;
            // Degree of each node over active edges.
            for node in 0..2 * w {
                let incident: Vec<usize> = edges
                    .iter()
                    .enumerate()
                    .filter(|(e, (i, j))| {
                        active[*e] && if node < w { *i == node } else { *j == node - w }
                    })
                    .map(|(e, _)| e)
                    .collect();
                if incident.len() == 1 {
                    let e = incident[0];
                    let (i, j) = edges[e];
                    let flow = if node < w { remaining_mu[i] } else { remaining_nu[j] };
                    if flow < -1e-9 {
                        continue 'masks;
                    }
                    flows[e] = flow;
                    remaining_mu[i] -= flow;
                    remaining_nu[j] -= flow;
                    active[e] = false;
                    active_count -= 1;
                    peeled = true;
                    break;
                }
            }
            if !peeled {
                continue 'masks; // cyclic support
            }
        }
        if remaining_mu.iter().chain(&remaining_nu).any(|r| r.abs() > 1e-9) {
            continue;
        }
        if flows.iter().any(|f| *f < -1e-9) {
            continue;
        }
        let cost: f64 = edges
            .iter()
            .zip(&flows)
            .map(|((i, j), f)| f.max(0.0) * dist(*i, *j))
            .sum();
        if cost < best {
            best = cost;
        }
    }
    best
}

/// Full-sort nearest-neighbour prediction with an explicit mode; the
/// distance code lives here so the oracle shares nothing with the crate.
pub struct KnnOracle;

impl KnnOracle {
    pub fn distance(norm: &str, a: &[f64], b: &[f64]) -> f64 {
        match norm {
            "l1" => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            "l2" => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).powi(2))
                .sum::<f64>()
                .sqrt(),
            "linf" => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0f64, f64::max),
            other => panic!("unknown norm {other}"),
        }
    }

    /// Sorted (index, distance) list over the whole training set.
    pub fn full_sort(
        norm: &str,
        train: &[Vec<f64>],
        query: &[f64],
    ) -> Vec<(usize, f64)> {
        let mut order: Vec<(usize, f64)> = train
            .iter()
            .enumerate()
            .map(|(i, row)| (i, Self::distance(norm, row, query)))
            .collect();
        order.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
        order
    }

    /// Majority label of the k nearest; an exact tie is label 0.
    pub fn predict(
        norm: &str,
        train: &[Vec<f64>],
        labels: &[u8],
        query: &[f64],
        k: usize,
    ) -> u8 {
        let order = Self::full_sort(norm, train, query);
        let mut ones = 0usize;
        for (i, _) in order.iter().take(k) {
            ones += labels[*i] as usize;
        }
        u8::from(2 * ones > k)
    }
}

/// The 6-observation, 5-feature categorical sample over {A,B,C} whose
/// feature scores are (1, 2, 2, 1/2, 1).
pub fn worked_example() -> CategoricalDataset {
    let rows = [
        ("CBBBC", 0u8),
        ("BCABA", 1),
        ("CCCAA", 1),
        ("ABBAA", 0),
        ("BACCA", 1),
        ("CCAAB", 1),
    ];
    let alphabet: Vec<String> = ["A", "B", "C"].iter().map(|s| s.to_string()).collect();
    let mut cells = Vec::new();
    let mut labels = Vec::new();
    for (symbols, label) in rows {
        for ch in symbols.chars() {
            cells.push(ch as u8 - b'A');
        }
        labels.push(if label == 1 { Label::Case } else { Label::Control });
    }
    let names = (1..=5).map(|j| format!("feature{j}")).collect();
    CategoricalDataset::new(6, 5, alphabet, cells, labels, names).unwrap()
}

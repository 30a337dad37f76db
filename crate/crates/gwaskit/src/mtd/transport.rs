//! Exact small-instance transport solvers used as verification oracles.
//!
//! [`solve_transport`] finds a minimum-cost coupling between two measures on
//! an alphabet of at most 64 symbols by successive shortest paths on the
//! bipartite flow network, and converts the terminal node potentials into a
//! 1-Lipschitz dual witness attaining the optimal cost.
//! [`transport_cost_1d`] integrates the CDF difference for measures on real
//! support points. These are oracles for the production ℓ1 scorer, not part
//! of the scoring path.

use crate::error::{Error, Result};
use crate::mtd::EmpiricalMeasure;

/// Largest alphabet the exact solver accepts.
pub const MAX_EXACT_ALPHABET: usize = 64;

const MASS_EPS: f64 = 1e-15;
const LIPSCHITZ_TOL: f64 = 1e-9;

/// A symmetric, zero-diagonal matrix of pairwise distances satisfying the
/// triangle inequality. Construction rejects non-metric input.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    size: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(size: usize, entries: Vec<f64>) -> Result<DistanceMatrix> {
        if size == 0 {
            return Err(Error::arg("distance matrix needs at least one point"));
        }
        if entries.len() != size * size {
            return Err(Error::DimensionMismatch {
                expected: size * size,
                got: entries.len(),
            });
        }
        let at = |i: usize, j: usize| entries[i * size + j];
        for i in 0..size {
            if at(i, i) != 0.0 {
                return Err(Error::NonMetric(format!("d({i},{i}) = {} is not 0", at(i, i))));
            }
            for j in 0..size {
                let d = at(i, j);
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::NonMetric(format!("d({i},{j}) = {d}")));
                }
                if at(i, j) != at(j, i) {
                    return Err(Error::NonMetric(format!(
                        "d({i},{j}) = {} differs from d({j},{i}) = {}",
                        at(i, j),
                        at(j, i)
                    )));
                }
            }
        }
        for i in 0..size {
            for j in 0..size {
                for k in 0..size {
                    if at(i, k) > at(i, j) + at(j, k) + 1e-9 {
                        return Err(Error::NonMetric(format!(
                            "triangle inequality fails: d({i},{k}) > d({i},{j}) + d({j},{k})"
                        )));
                    }
                }
            }
        }
        Ok(DistanceMatrix { size, entries })
    }

    /// The discrete 0/1 distance on `size` points.
    pub fn zero_one(size: usize) -> DistanceMatrix {
        let mut entries = vec![1.0; size * size];
        for i in 0..size {
            entries[i * size + i] = 0.0;
        }
        DistanceMatrix { size, entries }
    }

    /// Absolute differences of real support points.
    pub fn from_points(points: &[f64]) -> Result<DistanceMatrix> {
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonMetric("non-finite support point".into()));
        }
        let size = points.len();
        let mut entries = vec![0.0; size * size];
        for i in 0..size {
            for j in 0..size {
                entries[i * size + j] = (points[i] - points[j]).abs();
            }
        }
        DistanceMatrix::new(size, entries)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.size + j]
    }
}

/// Optimal coupling and its certificate.
#[derive(Debug, Clone)]
pub struct TransportSolution {
    cost: f64,
    coupling: Vec<f64>,
    potential: Vec<f64>,
    size: usize,
}

impl TransportSolution {
    pub fn cost(&self) -> f64 {
        self.cost
    }

    /// Mass shipped from symbol `i` to symbol `j`.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.coupling[i * self.size + j]
    }

    /// A 1-Lipschitz function attaining the optimal cost as
    /// `sum_i potential[i] * (mu[i] - nu[i])`.
    pub fn potential(&self) -> &[f64] {
        &self.potential
    }
}

fn check_pair(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, d: &DistanceMatrix) -> Result<usize> {
    let w = d.size();
    if mu.len() != w || nu.len() != w {
        return Err(Error::DimensionMismatch {
            expected: w,
            got: if mu.len() != w { mu.len() } else { nu.len() },
        });
    }
    if w > MAX_EXACT_ALPHABET {
        return Err(Error::arg(format!(
            "exact solver is capped at alphabet size {MAX_EXACT_ALPHABET}, got {w}"
        )));
    }
    Ok(w)
}

/// Solves `min sum_ij d(i,j) * coupling(i,j)` over couplings with row sums
/// `mu` and column sums `nu`, by successive shortest paths with node
/// potentials. Optimal within 1e-9.
pub fn solve_transport(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    d: &DistanceMatrix,
) -> Result<TransportSolution> {
    let w = check_pair(mu, nu, d)?;

    // Normalize both sides to total mass exactly 1 so supplies balance.
    let msum: f64 = mu.weights().iter().sum();
    let nsum: f64 = nu.weights().iter().sum();
    let mut supply: Vec<f64> = mu.weights().iter().map(|v| v / msum).collect();
    let mut demand: Vec<f64> = nu.weights().iter().map(|v| v / nsum).collect();

    let nodes = 2 * w;
    let mut phi = vec![0.0f64; nodes];
    let mut flow = vec![0.0f64; w * w];

    let max_rounds = 10 * w * w + 16;
    for _ in 0..max_rounds {
        if supply.iter().sum::<f64>() <= MASS_EPS * w as f64 {
            break;
        }
        // Dijkstra over reduced costs from all supply nodes.
        let mut dist = vec![f64::INFINITY; nodes];
        let mut parent = vec![usize::MAX; nodes];
        let mut done = vec![false; nodes];
        for i in 0..w {
            if supply[i] > MASS_EPS {
                dist[i] = 0.0;
            }
        }
        loop {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for v in 0..nodes {
                if !done[v] && dist[v] < best {
                    best = dist[v];
                    u = v;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            if u < w {
                // left u -> right j
                for j in 0..w {
                    let rc = (d.get(u, j) + phi[u] - phi[w + j]).max(0.0);
                    if dist[u] + rc < dist[w + j] {
                        dist[w + j] = dist[u] + rc;
                        parent[w + j] = u;
                    }
                }
            } else {
                // right (u - w) -> left i along residual reverse arcs
                let j = u - w;
                for i in 0..w {
                    if flow[i * w + j] > MASS_EPS {
                        let rc = (-d.get(i, j) + phi[w + j] - phi[i]).max(0.0);
                        if dist[u] + rc < dist[i] {
                            dist[i] = dist[u] + rc;
                            parent[i] = u;
                        }
                    }
                }
            }
        }

        let target = (0..w)
            .filter(|&j| demand[j] > MASS_EPS)
            .min_by(|&a, &b| dist[w + a].total_cmp(&dist[w + b]))
            .map(|j| w + j);
        let Some(target) = target else { break };
        if dist[target].is_infinite() {
            break;
        }

        let cap = dist[target];
        for v in 0..nodes {
            phi[v] += dist[v].min(cap);
        }

        // Walk back to a supply node, collecting the path bottleneck.
        let mut path = vec![target];
        let mut v = target;
        while parent[v] != usize::MAX {
            v = parent[v];
            path.push(v);
        }
        path.reverse();
        let source = path[0];
        debug_assert!(source < w);

        let mut bottleneck = supply[source].min(demand[target - w]);
        for pair in path.windows(2) {
            if pair[0] >= w {
                // reverse arc right -> left carries existing flow
                let j = pair[0] - w;
                let i = pair[1];
                bottleneck = bottleneck.min(flow[i * w + j]);
            }
        }
        if bottleneck <= MASS_EPS {
            break;
        }
        for pair in path.windows(2) {
            if pair[0] < w {
                let i = pair[0];
                let j = pair[1] - w;
                flow[i * w + j] += bottleneck;
            } else {
                let j = pair[0] - w;
                let i = pair[1];
                flow[i * w + j] -= bottleneck;
                if flow[i * w + j] < MASS_EPS {
                    flow[i * w + j] = 0.0;
                }
            }
        }
        supply[source] -= bottleneck;
        demand[target - w] -= bottleneck;
        if supply[source] < MASS_EPS {
            supply[source] = 0.0;
        }
        if demand[target - w] < MASS_EPS {
            demand[target - w] = 0.0;
        }
    }

    let cost: f64 = (0..w)
        .flat_map(|i| (0..w).map(move |j| (i, j)))
        .map(|(i, j)| flow[i * w + j] * d.get(i, j))
        .sum();

    // Terminal potentials give optimal bipartite duals alpha_i = -phi[i],
    // beta_j = phi[w + j] with alpha_i + beta_j <= d(i,j). The infimal
    // convolution below turns them into a single 1-Lipschitz witness.
    let potential: Vec<f64> = (0..w)
        .map(|i| {
            (0..w)
                .map(|j| d.get(i, j) - phi[w + j])
                .fold(f64::INFINITY, f64::min)
        })
        .collect();

    Ok(TransportSolution {
        cost,
        coupling: flow,
        potential,
        size: w,
    })
}

/// Minimum transport cost between `mu` and `nu` under the metric `d`.
pub fn exact_transport_cost(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    d: &DistanceMatrix,
) -> Result<f64> {
    Ok(solve_transport(mu, nu, d)?.cost)
}

/// Transport cost for measures on the real line: the exact integral of
/// `|F_mu - F_nu|` over the merged support grid.
pub fn transport_cost_1d(
    support_mu: &[f64],
    mu: &EmpiricalMeasure,
    support_nu: &[f64],
    nu: &EmpiricalMeasure,
) -> Result<f64> {
    if support_mu.is_empty() || support_nu.is_empty() {
        return Err(Error::arg("empty support"));
    }
    if support_mu.len() != mu.len() {
        return Err(Error::DimensionMismatch {
            expected: mu.len(),
            got: support_mu.len(),
        });
    }
    if support_nu.len() != nu.len() {
        return Err(Error::DimensionMismatch {
            expected: nu.len(),
            got: support_nu.len(),
        });
    }
    if support_mu.iter().chain(support_nu).any(|p| !p.is_finite()) {
        return Err(Error::arg("non-finite support point"));
    }

    let mut events: Vec<(f64, f64, f64)> = support_mu
        .iter()
        .zip(mu.weights())
        .map(|(&x, &wt)| (x, wt, 0.0))
        .chain(
            support_nu
                .iter()
                .zip(nu.weights())
                .map(|(&x, &wt)| (x, 0.0, wt)),
        )
        .collect();
    events.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut cost = 0.0f64;
    let mut f_mu = 0.0f64;
    let mut f_nu = 0.0f64;
    let mut prev = events[0].0;
    for (x, wa, wb) in events {
        if x > prev {
            cost += (f_mu - f_nu).abs() * (x - prev);
            prev = x;
        }
        f_mu += wa;
        f_nu += wb;
    }
    Ok(cost)
}

/// Verifies the Kantorovich lower bound of a 1-Lipschitz witness `f`:
/// `sum_i f[i] * (mu[i] - nu[i]) <= exact cost + 1e-9`. Rejects witnesses
/// violating `|f[i] - f[j]| <= d(i,j)` beyond the same tolerance.
pub fn duality_witness_check(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    d: &DistanceMatrix,
    f: &[f64],
) -> Result<bool> {
    let w = check_pair(mu, nu, d)?;
    if f.len() != w {
        return Err(Error::DimensionMismatch {
            expected: w,
            got: f.len(),
        });
    }
    for i in 0..w {
        for j in (i + 1)..w {
            let diff = (f[i] - f[j]).abs();
            if diff > d.get(i, j) + LIPSCHITZ_TOL {
                return Err(Error::NotLipschitz {
                    i,
                    j,
                    diff,
                    bound: d.get(i, j),
                });
            }
        }
    }
    let lower: f64 = f
        .iter()
        .zip(mu.weights().iter().zip(nu.weights()))
        .map(|(fi, (m, n))| fi * (m - n))
        .sum();
    let cost = exact_transport_cost(mu, nu, d)?;
    Ok(lower <= cost + 1e-9)
}

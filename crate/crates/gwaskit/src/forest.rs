//! Decision trees split by information gain over entropy, and random
//! forests built from bootstrap resamples with per-node random feature
//! subsets and a thresholded majority vote.
//!
//! Trees handle real-valued features (threshold splits at midpoints of
//! consecutive distinct values) and categorical features (subset splits,
//! each bipartition evaluated once in canonical form). Entropy is base 2
//! with the 0·log 0 = 0 convention; recursion splits only while the best
//! gain strictly exceeds the configured minimum.

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

use crate::dataset::{CategoricalDataset, Dataset, Label, RealDataset};
use crate::error::{Error, Result};
use crate::seed;

/// Largest categorical alphabet accepted for exhaustive subset splits.
pub const MAX_SPLIT_ALPHABET: usize = 16;

const TREE_TAG: u64 = 0x5452_4545;

/// A set of symbol indices, the `a ⊆ Ω` side of a categorical split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymbolSet(u64);

impl SymbolSet {
    pub fn from_codes(codes: &[u8]) -> SymbolSet {
        let mut mask = 0u64;
        for &c in codes {
            mask |= 1 << c;
        }
        SymbolSet(mask)
    }

    pub fn contains(&self, code: u8) -> bool {
        code < 64 && self.0 & (1 << code) != 0
    }

    pub fn codes(&self) -> Vec<u8> {
        (0..64).filter(|&c| self.contains(c)).collect()
    }
}

/// The test at an internal node: route left when it passes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitTest {
    /// Real feature: left iff `x <= a`.
    LessEq(f64),
    /// Categorical feature: left iff the symbol is in the set. Symbols
    /// unseen in training are never in the set and route right.
    InSet(SymbolSet),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRule {
    pub feature: usize,
    pub test: SplitTest,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Internal {
        rule: SplitRule,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        label: Label,
        counts: (u64, u64),
    },
}

/// How many features each node considers for its split search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureSample {
    All,
    Count(usize),
}

/// The forest default: `ceil(sqrt(m))` features per node.
pub fn default_feature_sample(m: usize) -> FeatureSample {
    FeatureSample::Count(((m as f64).sqrt().ceil() as usize).clamp(1, m.max(1)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeConfig {
    /// Minimal information gain: a node splits only when the best gain
    /// strictly exceeds this.
    pub min_gain: f64,
    pub feature_sample: FeatureSample,
    pub seed: u64,
}

impl TreeConfig {
    pub fn new(min_gain: f64, feature_sample: FeatureSample, seed: u64) -> TreeConfig {
        TreeConfig {
            min_gain,
            feature_sample,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
enum Features {
    Real(Vec<Vec<f64>>),
    Cat {
        columns: Vec<Vec<u8>>,
        alphabet_len: usize,
    },
}

/// Column-major training sample accepted by the tree and forest trainers.
#[derive(Debug, Clone)]
pub struct TrainSet {
    rows: usize,
    labels: Vec<Label>,
    features: Features,
}

impl TrainSet {
    pub fn from_real(d: &RealDataset) -> TrainSet {
        let columns = (0..d.cols())
            .map(|j| (0..d.rows()).map(|i| d.cell(i, j)).collect())
            .collect();
        TrainSet {
            rows: d.rows(),
            labels: d.labels().to_vec(),
            features: Features::Real(columns),
        }
    }

    pub fn from_categorical(d: &CategoricalDataset) -> Result<TrainSet> {
        if d.alphabet().len() > MAX_SPLIT_ALPHABET {
            return Err(Error::arg(format!(
                "alphabet of {} symbols exceeds the subset-split cap of {MAX_SPLIT_ALPHABET}",
                d.alphabet().len()
            )));
        }
        let columns = (0..d.cols())
            .map(|j| (0..d.rows()).map(|i| d.code(i, j)).collect())
            .collect();
        Ok(TrainSet {
            rows: d.rows(),
            labels: d.labels().to_vec(),
            features: Features::Cat {
                columns,
                alphabet_len: d.alphabet().len(),
            },
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        match &self.features {
            Features::Real(c) => c.len(),
            Features::Cat { columns, .. } => columns.len(),
        }
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    fn resample(&self, indices: &[usize]) -> TrainSet {
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        let features = match &self.features {
            Features::Real(cols) => Features::Real(
                cols.iter()
                    .map(|col| indices.iter().map(|&i| col[i]).collect())
                    .collect(),
            ),
            Features::Cat {
                columns,
                alphabet_len,
            } => Features::Cat {
                columns: columns
                    .iter()
                    .map(|col| indices.iter().map(|&i| col[i]).collect())
                    .collect(),
                alphabet_len: *alphabet_len,
            },
        };
        TrainSet {
            rows: indices.len(),
            labels,
            features,
        }
    }
}

/// A query row matching the training schema.
#[derive(Debug, Clone, Copy)]
pub enum Row<'a> {
    Real(&'a [f64]),
    Categorical(&'a [u8]),
}

/// Base-2 entropy of a two-class count pair, with 0·log 0 = 0.
pub fn entropy(count0: u64, count1: u64) -> Result<f64> {
    let n = count0 + count1;
    if n == 0 {
        return Err(Error::arg("entropy of an empty sample"));
    }
    let term = |c: u64| {
        if c == 0 {
            0.0
        } else {
            let f = c as f64 / n as f64;
            -f * f.log2()
        }
    };
    Ok(term(count0) + term(count1))
}

/// Parent entropy minus size-weighted child entropies for a two-way
/// partition given as per-side class counts. Both sides must be nonempty.
pub fn information_gain(left: (u64, u64), right: (u64, u64)) -> Result<f64> {
    let nl = left.0 + left.1;
    let nr = right.0 + right.1;
    if nl == 0 || nr == 0 {
        return Err(Error::arg("information gain with an empty side"));
    }
    let n = (nl + nr) as f64;
    let parent = entropy(left.0 + right.0, left.1 + right.1)?;
    let gain = parent - (nl as f64 / n) * entropy(left.0, left.1)?
        - (nr as f64 / n) * entropy(right.0, right.1)?;
    Ok(gain.max(0.0))
}

fn label_counts(labels: &[Label], rows: &[usize]) -> (u64, u64) {
    let mut c = (0u64, 0u64);
    for &i in rows {
        if labels[i].is_case() {
            c.1 += 1;
        } else {
            c.0 += 1;
        }
    }
    c
}

fn consider(
    best: &mut Option<(SplitRule, f64)>,
    rule: SplitRule,
    left: (u64, u64),
    right: (u64, u64),
) {
    if let Ok(gain) = information_gain(left, right) {
        if best.as_ref().is_none_or(|(_, g)| gain > *g) {
            *best = Some((rule, gain));
        }
    }
}

/// Exhaustive best split of the rows over the candidate features: midpoint
/// thresholds for real features, canonical nonempty proper subsets of the
/// observed symbols for categorical ones. Gain ties keep the earlier rule
/// in (feature index, threshold / canonical subset) order. Returns `None`
/// when no candidate split leaves both sides nonempty.
pub fn best_split(
    ts: &TrainSet,
    rows: &[usize],
    candidates: &[usize],
) -> Option<(SplitRule, f64)> {
    if rows.len() < 2 {
        return None;
    }
    let (n0, n1) = label_counts(&ts.labels, rows);
    if n0 == 0 || n1 == 0 {
        return None;
    }
    let mut features: Vec<usize> = candidates.to_vec();
    features.sort_unstable();
    features.dedup();

    let mut best: Option<(SplitRule, f64)> = None;
    for &f in &features {
        match &ts.features {
            Features::Real(cols) => {
                let col = &cols[f];
                let mut pairs: Vec<(f64, bool)> = rows
                    .iter()
                    .map(|&i| (col[i], ts.labels[i].is_case()))
                    .collect();
                pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut left = (0u64, 0u64);
                for t in 0..pairs.len() - 1 {
                    if pairs[t].1 {
                        left.1 += 1;
                    } else {
                        left.0 += 1;
                    }
                    let (v, w) = (pairs[t].0, pairs[t + 1].0);
                    if v == w {
                        continue;
                    }
                    let mid = v + (w - v) / 2.0;
                    // Guard against rounding collapsing the midpoint onto
                    // the upper value, which would change the partition.
                    if !(v <= mid && mid < w) {
                        continue;
                    }
                    let right = (n0 - left.0, n1 - left.1);
                    consider(
                        &mut best,
                        SplitRule {
                            feature: f,
                            test: SplitTest::LessEq(mid),
                        },
                        left,
                        right,
                    );
                }
            }
            Features::Cat { columns, .. } => {
                let col = &columns[f];
                let mut counts = [[0u64; 2]; MAX_SPLIT_ALPHABET];
                for &i in rows {
                    counts[col[i] as usize][usize::from(ts.labels[i].is_case())] += 1;
                }
                let observed: Vec<u8> = (0..MAX_SPLIT_ALPHABET as u8)
                    .filter(|&s| counts[s as usize][0] + counts[s as usize][1] > 0)
                    .collect();
                if observed.len() < 2 {
                    continue;
                }
                // Canonical form: never include the smallest observed
                // symbol, so each bipartition is evaluated exactly once.
                let others = &observed[1..];
                for mask in 1u64..(1 << others.len()) {
                    let mut left = (0u64, 0u64);
                    let mut symbols = 0u64;
                    for (bit, &s) in others.iter().enumerate() {
                        if mask & (1 << bit) != 0 {
                            symbols |= 1 << s;
                            left.0 += counts[s as usize][0];
                            left.1 += counts[s as usize][1];
                        }
                    }
                    let right = (n0 - left.0, n1 - left.1);
                    consider(
                        &mut best,
                        SplitRule {
                            feature: f,
                            test: SplitTest::InSet(SymbolSet(symbols)),
                        },
                        left,
                        right,
                    );
                }
            }
        }
    }
    best
}

fn route_left(ts: &TrainSet, rule: &SplitRule, row: usize) -> bool {
    match (&ts.features, rule.test) {
        (Features::Real(cols), SplitTest::LessEq(a)) => cols[rule.feature][row] <= a,
        (Features::Cat { columns, .. }, SplitTest::InSet(set)) => {
            set.contains(columns[rule.feature][row])
        }
        _ => unreachable!("rule kind always matches the training schema"),
    }
}

fn build_node(
    ts: &TrainSet,
    rows: &[usize],
    config: &TreeConfig,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> TreeNode {
    let counts = label_counts(&ts.labels, rows);
    let leaf = |counts: (u64, u64)| TreeNode::Leaf {
        label: if counts.1 > counts.0 {
            Label::Case
        } else {
            Label::Control
        },
        counts,
    };
    if counts.0 == 0 || counts.1 == 0 {
        return leaf(counts);
    }
    let m = ts.cols();
    let candidates: Vec<usize> = match config.feature_sample {
        FeatureSample::All => (0..m).collect(),
        FeatureSample::Count(z) => {
            let mut picked = sample(rng, m, z.min(m)).into_vec();
            picked.sort_unstable();
            picked
        }
    };
    match best_split(ts, rows, &candidates) {
        Some((rule, gain)) if gain > config.min_gain => {
            let (mut left_rows, mut right_rows) = (Vec::new(), Vec::new());
            for &i in rows {
                if route_left(ts, &rule, i) {
                    left_rows.push(i);
                } else {
                    right_rows.push(i);
                }
            }
            let left = Box::new(build_node(ts, &left_rows, config, rng));
            let right = Box::new(build_node(ts, &right_rows, config, rng));
            TreeNode::Internal { rule, left, right }
        }
        _ => leaf(counts),
    }
}

fn validate_feature_sample(config: &TreeConfig, m: usize) -> Result<()> {
    if let FeatureSample::Count(z) = config.feature_sample {
        if z == 0 || z > m {
            return Err(Error::arg(format!("feature sample z = {z} outside [1, {m}]")));
        }
    }
    Ok(())
}

/// Grows one tree: recursion stops at pure nodes or when no candidate
/// split has gain strictly above `config.min_gain`. With a numeric feature
/// sample, each node draws a fresh random feature subset from the seeded
/// generator.
pub fn fit_tree(ts: &TrainSet, config: &TreeConfig) -> Result<TreeNode> {
    if ts.rows() == 0 {
        return Err(Error::arg("cannot fit a tree on an empty sample"));
    }
    validate_feature_sample(config, ts.cols())?;
    let mut rng = seed::rng(config.seed);
    let rows: Vec<usize> = (0..ts.rows()).collect();
    Ok(build_node(ts, &rows, config, &mut rng))
}

/// Routes the row down the tree (`x <= a` and `x ∈ a` go left) and returns
/// the leaf label.
pub fn predict_tree(tree: &TreeNode, row: Row<'_>) -> Result<Label> {
    let mut node = tree;
    loop {
        match node {
            TreeNode::Leaf { label, .. } => return Ok(*label),
            TreeNode::Internal { rule, left, right } => {
                let go_left = match (row, rule.test) {
                    (Row::Real(values), SplitTest::LessEq(a)) => {
                        let v = values.get(rule.feature).ok_or(Error::DimensionMismatch {
                            expected: rule.feature + 1,
                            got: values.len(),
                        })?;
                        *v <= a
                    }
                    (Row::Categorical(codes), SplitTest::InSet(set)) => {
                        let c = codes.get(rule.feature).ok_or(Error::DimensionMismatch {
                            expected: rule.feature + 1,
                            got: codes.len(),
                        })?;
                        set.contains(*c)
                    }
                    _ => {
                        return Err(Error::arg(
                            "query row kind does not match the training schema",
                        ))
                    }
                };
                node = if go_left { left } else { right };
            }
        }
    }
}

/// A trained forest with its default voting threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    trees: Vec<TreeNode>,
    vote_threshold: f64,
}

impl ForestModel {
    pub fn trees(&self) -> &[TreeNode] {
        &self.trees
    }

    pub fn t(&self) -> usize {
        self.trees.len()
    }

    pub fn vote_threshold(&self) -> f64 {
        self.vote_threshold
    }

    /// Prediction at the model's own threshold.
    pub fn predict(&self, row: Row<'_>) -> Result<Label> {
        predict_forest(self, row, self.vote_threshold)
    }
}

/// Trains `t` trees, each on a with-replacement resample of size n drawn
/// from a seed derived per tree index (when `bootstrap` is set), so trees
/// may be trained concurrently with results identical to serial training.
pub fn fit_forest(
    ts: &TrainSet,
    t: usize,
    config: &TreeConfig,
    bootstrap: bool,
) -> Result<ForestModel> {
    if t == 0 {
        return Err(Error::arg("a forest needs at least one tree"));
    }
    if ts.rows() == 0 {
        return Err(Error::arg("cannot fit a forest on an empty sample"));
    }
    validate_feature_sample(config, ts.cols())?;
    let trees: Vec<TreeNode> = (0..t)
        .into_par_iter()
        .map(|i| {
            let tree_seed = seed::derive(config.seed, TREE_TAG ^ (i as u64).rotate_left(23));
            let mut rng = seed::rng(tree_seed);
            let tree_config = TreeConfig {
                seed: tree_seed,
                ..*config
            };
            let node = if bootstrap {
                let indices: Vec<usize> =
                    (0..ts.rows()).map(|_| rng.gen_range(0..ts.rows())).collect();
                let resampled = ts.resample(&indices);
                let rows: Vec<usize> = (0..resampled.rows()).collect();
                build_node(&resampled, &rows, &tree_config, &mut rng)
            } else {
                let rows: Vec<usize> = (0..ts.rows()).collect();
                build_node(ts, &rows, &tree_config, &mut rng)
            };
            Ok(node)
        })
        .collect::<Result<_>>()?;
    Ok(ForestModel {
        trees,
        vote_threshold: 0.5,
    })
}

/// Fraction of trees voting label 1.
pub fn vote_fraction_forest(model: &ForestModel, row: Row<'_>) -> Result<f64> {
    let mut cases = 0usize;
    for tree in &model.trees {
        if predict_tree(tree, row)?.is_case() {
            cases += 1;
        }
    }
    Ok(cases as f64 / model.trees.len() as f64)
}

/// Label 1 iff the vote fraction is at least `alpha_vote`.
pub fn predict_forest(model: &ForestModel, row: Row<'_>, alpha_vote: f64) -> Result<Label> {
    if !(0.0..=1.0).contains(&alpha_vote) {
        return Err(Error::arg(format!(
            "vote threshold {alpha_vote} outside [0, 1]"
        )));
    }
    let fraction = vote_fraction_forest(model, row)?;
    Ok(if fraction >= alpha_vote {
        Label::Case
    } else {
        Label::Control
    })
}

fn format_node(
    node: &TreeNode,
    names: &[String],
    alphabet: &[String],
    depth: usize,
    out: &mut String,
) {
    let indent = "  ".repeat(depth);
    match node {
        TreeNode::Leaf { label, counts } => {
            out.push_str(&format!(
                "{indent}leaf {} ({},{})\n",
                label.as_u8(),
                counts.0,
                counts.1
            ));
        }
        TreeNode::Internal { rule, left, right } => {
            let name = names
                .get(rule.feature)
                .map(String::as_str)
                .unwrap_or("?");
            match rule.test {
                SplitTest::LessEq(a) => {
                    out.push_str(&format!("{indent}feature {name} <= {a}\n"));
                }
                SplitTest::InSet(set) => {
                    let symbols: Vec<&str> = set
                        .codes()
                        .iter()
                        .map(|&c| alphabet.get(c as usize).map(String::as_str).unwrap_or("?"))
                        .collect();
                    out.push_str(&format!(
                        "{indent}feature {name} in {{{}}}\n",
                        symbols.join(",")
                    ));
                }
            }
            format_node(left, names, alphabet, depth + 1, out);
            format_node(right, names, alphabet, depth + 1, out);
        }
    }
}

/// Indented text dump, one node per line; for debugging and docs.
pub fn format_tree(tree: &TreeNode, names: &[String], alphabet: &[String]) -> String {
    let mut out = String::new();
    format_node(tree, names, alphabet, 0, &mut out);
    out
}

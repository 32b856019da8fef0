//! Honest leaf estimators: leaf counts, the density estimator `f_hat`, the
//! numerator estimator `m_hat = T f_hat`, the tree predictor `T` and forest
//! averages. Every estimator reads only the prediction sample `I` (and its
//! weights); the tree was grown elsewhere.
//!
//! Weighted sums run sequentially in observation order, both here and in
//! [`LeafTable`], so the per-query scan and the bulk table agree bit for bit.

use serde::{Deserialize, Serialize};

use crate::geometry::{cell_contains, in_interval, Tree};
use crate::model::Dataset;
use crate::numeric::pairwise_sum;

/// Counts (or weighted counts) of `I`-observations at a query point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeafStats {
    /// Observations in the leaf `L(x)`.
    pub n_in_leaf: f64,
    /// Per coordinate `j`, observations whose `j`-th value lies in the leaf's `j`-interval.
    pub per_coordinate_in_interval: Vec<f64>,
    /// Sum of `w_i Y_i` over the leaf.
    pub response_sum: f64,
}

/// A tree prediction at one point. `value` is `None` when the leaf holds no
/// (positively weighted) `I`-observation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub value: Option<f64>,
    pub leaf_volume: f64,
    pub stats: LeafStats,
}

impl Prediction {
    pub fn is_empty(&self) -> bool {
        self.value.is_none()
    }
}

fn weight_at(weights: Option<&[f64]>, i: usize) -> f64 {
    weights.map_or(1.0, |w| w[i])
}

fn check_weights(sample: &Dataset, weights: Option<&[f64]>) {
    if let Some(w) = weights {
        assert_eq!(w.len(), sample.n(), "weight vector length must equal n_I");
    }
}

/// Leaf and per-coordinate interval counts of the `I`-sample at `x`.
///
/// # Panics
/// If `weights` is present with a length other than `sample.n()`.
pub fn leaf_stats(tree: &Tree, sample: &Dataset, x: &[f64], weights: Option<&[f64]>) -> LeafStats {
    check_weights(sample, weights);
    let leaf = tree.leaf_of(x);
    let d = tree.dim();
    let mut stats = LeafStats {
        n_in_leaf: 0.0,
        per_coordinate_in_interval: vec![0.0; d],
        response_sum: 0.0,
    };
    for (i, row) in sample.rows().enumerate() {
        let w = weight_at(weights, i);
        let mut inside = true;
        for (j, &v) in row.iter().enumerate() {
            if in_interval(v, leaf.lower[j], leaf.upper[j]) {
                stats.per_coordinate_in_interval[j] += w;
            } else {
                inside = false;
            }
        }
        if inside {
            stats.n_in_leaf += w;
            stats.response_sum += w * sample.response(i);
        }
    }
    stats
}

/// `f_hat` from a weighted leaf count.
pub fn density_from_count(count: f64, n_i: usize, mean_w: f64, volume: f64) -> f64 {
    count / (n_i as f64 * mean_w * volume)
}

/// Tree value from a weighted leaf count and response sum.
pub fn value_from_sums(count: f64, response_sum: f64) -> Option<f64> {
    (count > 0.0).then(|| response_sum / count)
}

/// `m_hat = T f_hat`, and `0` on an empty leaf.
pub fn numerator_from_parts(value: Option<f64>, density: f64) -> f64 {
    value.map_or(0.0, |t| t * density)
}

/// `f_hat(x) = sum w_i 1{X_i in L(x)} / (n_I mean_w lambda(L(x)))`. Use
/// `mean_w = 1` without weights and the analytic `E[W_1]` with them.
pub fn density_estimate(
    tree: &Tree,
    sample: &Dataset,
    x: &[f64],
    weights: Option<&[f64]>,
    mean_w: f64,
) -> f64 {
    let stats = leaf_stats(tree, sample, x, weights);
    density_from_count(stats.n_in_leaf, sample.n(), mean_w, tree.leaf_of(x).volume())
}

/// `T(x)`, the weighted mean response of the leaf containing `x`.
pub fn tree_predict(tree: &Tree, sample: &Dataset, x: &[f64], weights: Option<&[f64]>) -> Prediction {
    let stats = leaf_stats(tree, sample, x, weights);
    Prediction {
        value: value_from_sums(stats.n_in_leaf, stats.response_sum),
        leaf_volume: tree.leaf_of(x).volume(),
        stats,
    }
}

/// `m_hat(x) = T(x) f_hat(x)`, an estimate of `E[Y|X=x] f(x)`.
pub fn m_numerator_estimate(
    tree: &Tree,
    sample: &Dataset,
    x: &[f64],
    weights: Option<&[f64]>,
    mean_w: f64,
) -> f64 {
    let p = tree_predict(tree, sample, x, weights);
    let f = density_from_count(p.stats.n_in_leaf, sample.n(), mean_w, p.leaf_volume);
    numerator_from_parts(p.value, f)
}

/// Average of the nonempty tree predictions at one point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestPrediction {
    pub value: Option<f64>,
    pub trees: usize,
    pub skipped: usize,
}

/// Averages tree values, skipping empty ones; the sum runs in tree order.
pub fn average_predictions(values: &[Option<f64>]) -> ForestPrediction {
    let kept: Vec<f64> = values.iter().flatten().copied().collect();
    ForestPrediction {
        value: (!kept.is_empty()).then(|| pairwise_sum(&kept) / kept.len() as f64),
        trees: values.len(),
        skipped: values.len() - kept.len(),
    }
}

/// `RF(x, B)`: the mean of `T_b(x)` over trees whose leaf at `x` is nonempty.
pub fn forest_predict(trees: &[(Tree, Option<Vec<f64>>)], sample: &Dataset, x: &[f64]) -> ForestPrediction {
    let values: Vec<Option<f64>> = trees
        .iter()
        .map(|(tree, w)| tree_predict(tree, sample, x, w.as_deref()).value)
        .collect();
    average_predictions(&values)
}

/// Per-leaf weighted counts and response sums for one tree and one sample,
/// for evaluating many query points.
#[derive(Clone, Debug)]
pub struct LeafTable<'a> {
    tree: &'a Tree,
    n_i: usize,
    counts: Vec<f64>,
    sums: Vec<f64>,
}

impl<'a> LeafTable<'a> {
    pub fn new(tree: &'a Tree, sample: &Dataset, weights: Option<&[f64]>) -> Self {
        check_weights(sample, weights);
        let mut counts = vec![0.0; tree.num_leaves()];
        let mut sums = vec![0.0; tree.num_leaves()];
        for (i, row) in sample.rows().enumerate() {
            let w = weight_at(weights, i);
            let leaf = tree.leaf_id_of(row);
            counts[leaf] += w;
            sums[leaf] += w * sample.response(i);
        }
        LeafTable {
            tree,
            n_i: sample.n(),
            counts,
            sums,
        }
    }

    pub fn count(&self, leaf: usize) -> f64 {
        self.counts[leaf]
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn predict(&self, x: &[f64]) -> Option<f64> {
        let id = self.tree.leaf_id_of(x);
        value_from_sums(self.counts[id], self.sums[id])
    }

    pub fn density(&self, x: &[f64], mean_w: f64) -> f64 {
        let leaf = self.tree.leaf_of(x);
        density_from_count(self.counts[leaf.id], self.n_i, mean_w, leaf.volume())
    }

    pub fn numerator(&self, x: &[f64], mean_w: f64) -> f64 {
        numerator_from_parts(self.predict(x), self.density(x, mean_w))
    }

    /// Weighted leaf counts, per leaf.
    pub fn leaf_mass(&self, leaf: usize) -> f64 {
        self.counts[leaf]
    }
}

/// Sorted per-coordinate values with weight prefix sums, answering
/// "how much `I`-weight has `X_j` in `(a, b]`" in logarithmic time.
/// Unweighted counts are exact integers and agree with [`leaf_stats`].
#[derive(Clone, Debug)]
pub struct CoordinateIndex {
    sorted: Vec<Vec<f64>>,
    prefix: Vec<Vec<f64>>,
}

impl CoordinateIndex {
    pub fn new(sample: &Dataset, weights: Option<&[f64]>) -> Self {
        check_weights(sample, weights);
        let d = sample.d();
        let mut sorted = Vec::with_capacity(d);
        let mut prefix = Vec::with_capacity(d);
        for j in 0..d {
            let mut pairs: Vec<(f64, f64)> = sample
                .rows()
                .enumerate()
                .map(|(i, r)| (r[j], weight_at(weights, i)))
                .collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut acc = 0.0;
            let mut p = Vec::with_capacity(pairs.len() + 1);
            p.push(0.0);
            for &(_, w) in &pairs {
                acc += w;
                p.push(acc);
            }
            sorted.push(pairs.into_iter().map(|(v, _)| v).collect());
            prefix.push(p);
        }
        CoordinateIndex { sorted, prefix }
    }

    /// Weight of observations with `X_j` in `(a, b]`, or `[0, b]` when `a == 0`.
    pub fn interval_mass(&self, j: usize, a: f64, b: f64) -> f64 {
        let s = &self.sorted[j];
        let hi = s.partition_point(|&v| v <= b);
        let lo = if a == 0.0 {
            s.partition_point(|&v| v < 0.0)
        } else {
            s.partition_point(|&v| v <= a)
        };
        if hi <= lo {
            0.0
        } else {
            self.prefix[j][hi] - self.prefix[j][lo]
        }
    }

    pub fn per_coordinate(&self, lower: &[f64], upper: &[f64]) -> Vec<f64> {
        (0..lower.len())
            .map(|j| self.interval_mass(j, lower[j], upper[j]))
            .collect()
    }
}

/// Leaf-containment check kept public for oracles and diagnostics.
pub fn in_leaf(tree: &Tree, leaf: usize, x: &[f64]) -> bool {
    let l = tree.leaf(leaf);
    cell_contains(l.lower, l.upper, x)
}

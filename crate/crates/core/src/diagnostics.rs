//! Assumption checkers and analytic oracles: per-query traces of side
//! lengths, leaf mass and balance, regularity audits of adaptive trees, the
//! minimum-split-count recursion for centered trees, and summability probes
//! for node-size schedules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{leaf_stats, CoordinateIndex};
use crate::geometry::{cell_contains, Tree};
use crate::model::{Dataset, TruthDescriptor};
use crate::numeric::log_add_exp;
use crate::rng::seeded;
use crate::schedule::Schedule;
use crate::splitters::grow_centered_with;
use crate::weights::WeightScheme;

/// Quantities whose limits the consistency assumptions constrain, at one query point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionTrace {
    pub n: usize,
    /// `b_j - a_j` for the leaf containing `x`.
    pub side_lengths: Vec<f64>,
    /// `n_I E[W_1] lambda(L(x))`.
    pub leaf_mass: f64,
    /// Weighted count of `I`-points in the leaf's `j`-interval over `n_I E[W_1]`.
    pub balance_fractions: Vec<f64>,
    /// Smallest leaf volume of the tree.
    pub min_volume: f64,
    /// Largest side length per coordinate over all leaves.
    pub sup_side_lengths: Vec<f64>,
    /// Largest balance fraction per coordinate over all leaves.
    pub sup_balance_fractions: Vec<f64>,
    pub depth: u32,
    pub per_coord_depth: Vec<u32>,
}

pub fn trace_assumptions(
    tree: &Tree,
    sample: &Dataset,
    x: &[f64],
    weights: Option<&[f64]>,
    mean_w: f64,
) -> AssumptionTrace {
    let d = tree.dim();
    let scale = sample.n() as f64 * mean_w;
    let leaf = tree.leaf_of(x);
    let stats = leaf_stats(tree, sample, x, weights);
    let index = CoordinateIndex::new(sample, weights);
    let mut sup_balance = vec![0.0f64; d];
    for l in tree.leaves() {
        for (j, c) in index.per_coordinate(l.lower, l.upper).into_iter().enumerate() {
            sup_balance[j] = sup_balance[j].max(c / scale);
        }
    }
    AssumptionTrace {
        n: sample.n(),
        side_lengths: (0..d).map(|j| leaf.side(j)).collect(),
        leaf_mass: scale * leaf.volume(),
        balance_fractions: stats
            .per_coordinate_in_interval
            .iter()
            .map(|c| c / scale)
            .collect(),
        min_volume: tree.min_leaf_volume(),
        sup_side_lengths: (0..d).map(|j| tree.max_side_length(j)).collect(),
        sup_balance_fractions: sup_balance,
        depth: leaf.depth(),
        per_coord_depth: leaf.split_counts.to_vec(),
    }
}

/// Mass on each side of one split, measured on some sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitBalance {
    pub node: usize,
    pub feature: usize,
    pub parent: f64,
    pub left: f64,
    pub right: f64,
}

impl SplitBalance {
    /// Smaller side over parent mass (`1` for an empty parent).
    pub fn fraction(&self) -> f64 {
        if self.parent > 0.0 {
            self.left.min(self.right) / self.parent
        } else {
            1.0
        }
    }
}

/// Node-level split balance of every internal node on `sample`.
pub fn split_balance(tree: &Tree, sample: &Dataset, weights: Option<&[f64]>) -> Vec<SplitBalance> {
    tree.splits()
        .into_iter()
        .map(|s| {
            let (mut left, mut right) = (0.0, 0.0);
            for (i, row) in sample.rows().enumerate() {
                if cell_contains(&s.cell.lower, &s.cell.upper, row) {
                    let w = weights.map_or(1.0, |w| w[i]);
                    if row[s.feature] <= s.threshold {
                        left += w;
                    } else {
                        right += w;
                    }
                }
            }
            SplitBalance {
                node: s.node,
                feature: s.feature,
                parent: left + right,
                left,
                right,
            }
        })
        .collect()
}

/// Splits violating the `alpha` balance: strictly, and after allowing one
/// observation of slack (`max_weight`) on the smaller side.
pub fn balance_violations(balances: &[SplitBalance], alpha: f64, max_weight: f64) -> (usize, usize) {
    let strict = balances
        .iter()
        .filter(|b| b.left.min(b.right) < alpha * b.parent)
        .count();
    let slack = balances
        .iter()
        .filter(|b| b.left.min(b.right) + max_weight < alpha * b.parent)
        .count();
    (strict, slack)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeafAudit {
    pub leaf: usize,
    pub i_count: f64,
    /// `k_n <= N_L <= 2 k_n - 1`.
    pub in_window: bool,
    pub depth: u32,
    pub per_coord_depth: Vec<u32>,
    /// `N_L^j / n_I` per coordinate.
    pub balance_fractions: Vec<f64>,
}

/// Node-size, depth and covariate-balance audit of a tree on its `I`-sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityAudit {
    pub n_i: usize,
    pub k_n: usize,
    pub alpha: f64,
    /// `log(n_I / (2 k_n - 1)) / log(1 / alpha)`.
    pub depth_bound: f64,
    /// Per coordinate, the smallest `I`-balance of a split on that coordinate,
    /// measured on the coordinate's interval counts; `None` if never split.
    pub realized_alpha: Vec<Option<f64>>,
    pub leaves: Vec<LeafAudit>,
    /// Leaves whose `I`-count falls outside `[k_n, 2 k_n - 1]`.
    pub node_size_violations: Vec<usize>,
    /// Leaves in the window whose depth is below `depth_bound`.
    pub depth_violations: Vec<usize>,
    /// `(leaf, j)` with `N_L^j / n_I > (1 - alpha)^{s_j}`.
    pub balance_violations_configured: Vec<(usize, usize)>,
    /// `(leaf, j)` with `N_L^j / n_I > (1 - realized_alpha_j)^{s_j}`.
    pub balance_violations_realized: Vec<(usize, usize)>,
}

impl RegularityAudit {
    /// Fraction of leaves whose `I`-count lies in the node-size window.
    pub fn window_fraction(&self) -> f64 {
        if self.leaves.is_empty() {
            return 0.0;
        }
        self.leaves.iter().filter(|l| l.in_window).count() as f64 / self.leaves.len() as f64
    }
}

pub fn depth_lower_bound(n_i: usize, k_n: usize, alpha: f64) -> f64 {
    (n_i as f64 / (2 * k_n - 1) as f64).ln() / (1.0 / alpha).ln()
}

pub fn regularity_audit(tree: &Tree, i_sample: &Dataset, alpha: f64, k_n: usize) -> Result<RegularityAudit> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param("alpha", format!("must lie in (0, 1), got {alpha}")));
    }
    if k_n == 0 {
        return Err(Error::param("k_n", "must be positive"));
    }
    let d = tree.dim();
    let n_i = i_sample.n();
    let nf = n_i as f64;
    let index = CoordinateIndex::new(i_sample, None);
    let depth_bound = depth_lower_bound(n_i.max(1), k_n, alpha);
    let (lo, hi) = (k_n as f64, (2 * k_n - 1) as f64);

    let mut realized: Vec<Option<f64>> = vec![None; d];
    for s in tree.splits() {
        let j = s.feature;
        let (a, b) = (s.cell.lower[j], s.cell.upper[j]);
        let parent = index.interval_mass(j, a, b);
        if parent <= 0.0 {
            continue;
        }
        let left = index.interval_mass(j, a, s.threshold);
        let right = index.interval_mass(j, s.threshold, b);
        let frac = left.min(right) / parent;
        realized[j] = Some(realized[j].map_or(frac, |r: f64| r.min(frac)));
    }

    let mut counts = vec![0.0; tree.num_leaves()];
    for row in i_sample.rows() {
        counts[tree.leaf_id_of(row)] += 1.0;
    }

    let mut audit = RegularityAudit {
        n_i,
        k_n,
        alpha,
        depth_bound,
        realized_alpha: realized.clone(),
        leaves: Vec::with_capacity(tree.num_leaves()),
        node_size_violations: Vec::new(),
        depth_violations: Vec::new(),
        balance_violations_configured: Vec::new(),
        balance_violations_realized: Vec::new(),
    };
    for leaf in tree.leaves() {
        let i_count = counts[leaf.id];
        let in_window = i_count >= lo && i_count <= hi;
        let fractions: Vec<f64> = index
            .per_coordinate(leaf.lower, leaf.upper)
            .into_iter()
            .map(|c| c / nf)
            .collect();
        if !in_window {
            audit.node_size_violations.push(leaf.id);
        } else if (leaf.depth() as f64) < depth_bound {
            audit.depth_violations.push(leaf.id);
        }
        for j in 0..d {
            let s_j = leaf.split_counts[j] as i32;
            if fractions[j] > (1.0 - alpha).powi(s_j) * (1.0 + 1e-12) {
                audit.balance_violations_configured.push((leaf.id, j));
            }
            let a_j = realized[j].unwrap_or(0.0);
            if fractions[j] > (1.0 - a_j).powi(s_j) * (1.0 + 1e-12) {
                audit.balance_violations_realized.push((leaf.id, j));
            }
        }
        audit.leaves.push(LeafAudit {
            leaf: leaf.id,
            i_count,
            in_window,
            depth: leaf.depth(),
            per_coord_depth: leaf.split_counts.to_vec(),
            balance_fractions: fractions,
        });
    }
    Ok(audit)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecursionReport {
    pub p: f64,
    pub depth: usize,
    /// `G_depth(1)`: probability that every leaf of a depth-`depth` centered
    /// tree has at least one split on the tracked feature.
    pub g1: f64,
    pub limit: f64,
    pub zero_prob_limit: f64,
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::param("p", format!("must lie in (0, 1), got {p}")));
    }
    Ok(())
}

/// `G_k(m)` for `k = 0..=depth` and `m = 0..=max_m`, where `G_k(m)` is the
/// probability that all leaves of a depth-`k` centered tree carry at least
/// `m` splits on a feature chosen with probability `p` at each node.
pub fn min_split_table(p: f64, depth: usize, max_m: usize) -> Result<Vec<Vec<f64>>> {
    check_p(p)?;
    let mut table = Vec::with_capacity(depth + 1);
    let mut row: Vec<f64> = (0..=max_m).map(|m| if m == 0 { 1.0 } else { 0.0 }).collect();
    table.push(row.clone());
    for _ in 0..depth {
        let next: Vec<f64> = (0..=max_m)
            .map(|m| {
                if m == 0 {
                    1.0
                } else {
                    p * row[m - 1] * row[m - 1] + (1.0 - p) * row[m] * row[m]
                }
            })
            .collect();
        row = next;
        table.push(row.clone());
    }
    Ok(table)
}

/// `G_depth(1)` by iterating `G_k(1) = p + (1 - p) G_{k-1}(1)^2` from
/// `G_1(1) = p`, with the fixed point and its complement.
pub fn centered_min_split_recursion(p: f64, depth: usize) -> Result<RecursionReport> {
    check_p(p)?;
    if depth == 0 {
        return Err(Error::param("depth", "must be at least 1"));
    }
    let mut g = p;
    for _ in 1..depth {
        g = p + (1.0 - p) * g * g;
    }
    let (limit, zero_prob_limit) = if p < 0.5 {
        (p / (1.0 - p), (1.0 - 2.0 * p) / (1.0 - p))
    } else {
        (1.0, 0.0)
    };
    Ok(RecursionReport {
        p,
        depth,
        g1: g,
        limit,
        zero_prob_limit,
    })
}

pub const MAX_ENUMERATED_DEPTH: usize = 16;

/// Monte Carlo frequency of centered trees of the given depth having a leaf
/// with no split on the tracked feature (chosen with probability `p`).
/// Returns the frequency and its standard error.
pub fn empirical_min_split(p: f64, depth: usize, reps: usize, seed: u64) -> Result<(f64, f64)> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::param("p", format!("must lie in (0, 1], got {p}")));
    }
    if depth > MAX_ENUMERATED_DEPTH {
        return Err(Error::param(
            "depth",
            format!("at most {MAX_ENUMERATED_DEPTH} for exhaustive leaf enumeration, got {depth}"),
        ));
    }
    if reps == 0 {
        return Err(Error::param("reps", "need at least one replication"));
    }
    let (d, probs) = if p == 1.0 {
        (1, vec![1.0])
    } else {
        (2, vec![p, 1.0 - p])
    };
    let mut rng = seeded(seed);
    let mut hits = 0usize;
    for _ in 0..reps {
        let tree = grow_centered_with(d, &probs, depth, &mut rng)?;
        if tree.min_split_count(0) == 0 {
            hits += 1;
        }
    }
    let freq = hits as f64 / reps as f64;
    Ok((freq, (freq * (1.0 - freq) / reps as f64).sqrt()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProbeMode {
    /// Terms `n^{4d} exp(-k_n^2 / (2n))`.
    Weak,
    /// Partial sums of the weak terms.
    StrongPartialSum,
    /// Partial sums of `n^{4d} exp(-k_n^2 / (8 n E[W_1]))`.
    BootstrapPartialSum { scheme: WeightScheme },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Decays,
    DoesNotDecay,
    Plateaus,
    DoesNotPlateau,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Decays => "decays",
            Verdict::DoesNotDecay => "does not decay",
            Verdict::Plateaus => "plateaus",
            Verdict::DoesNotPlateau => "does not plateau",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbePoint {
    pub n: usize,
    pub log_term: f64,
    pub log_partial_sum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub n_max: usize,
    /// Log-spaced sample of the series; partial sums run over every `n`.
    pub points: Vec<ProbePoint>,
    pub final_log_term: f64,
    pub final_log_partial_sum: f64,
    pub verdict: Verdict,
}

impl ProbeReport {
    pub fn final_term(&self) -> f64 {
        self.final_log_term.exp()
    }
}

const POINTS_PER_DECADE: usize = 20;
const PLATEAU_TOLERANCE: f64 = 1e-6;

fn sample_points(n_max: usize) -> Vec<usize> {
    let mut out = vec![2usize];
    let decades = (n_max as f64).log10();
    let steps = (decades * POINTS_PER_DECADE as f64).ceil() as usize;
    for s in 1..=steps {
        let n = (10f64.powf(s as f64 / POINTS_PER_DECADE as f64)).round() as usize;
        let n = n.min(n_max);
        if n > *out.last().unwrap() {
            out.push(n);
        }
    }
    if *out.last().unwrap() != n_max {
        out.push(n_max);
    }
    out
}

/// Evaluates a summability series in log space for `n = 2..=n_max`.
///
/// Terms decay if the sampled log-terms over the final decade are
/// nonincreasing and the last term is below 1. Partial sums plateau if the
/// terms decay and the sum grew by less than a relative `1e-6` over the
/// final decade. Both are numerical evidence at finite `n_max` only.
pub fn summability_probe(
    schedule: &Schedule,
    d: usize,
    n_max: usize,
    mode: &ProbeMode,
) -> Result<ProbeReport> {
    schedule.validate()?;
    if n_max < 2 {
        return Err(Error::param("n_max", "must be at least 2"));
    }
    if d == 0 {
        return Err(Error::param("d", "must be at least 1"));
    }
    let log_term = |n: usize| -> Result<f64> {
        let k = schedule.evaluate(n)? as f64;
        let nf = n as f64;
        let divisor = match mode {
            ProbeMode::Weak | ProbeMode::StrongPartialSum => 2.0 * nf,
            ProbeMode::BootstrapPartialSum { scheme } => 8.0 * nf * scheme.mean_weight(n)?,
        };
        Ok(4.0 * d as f64 * nf.ln() - k * k / divisor)
    };
    let marks = sample_points(n_max);
    let mut points = Vec::with_capacity(marks.len());
    let mut next = 0;
    let mut acc = f64::NEG_INFINITY;
    let mut last = f64::NAN;
    for n in 2..=n_max {
        last = log_term(n)?;
        acc = log_add_exp(acc, last);
        if marks[next] == n {
            points.push(ProbePoint {
                n,
                log_term: last,
                log_partial_sum: acc,
            });
            next += 1;
        }
    }
    let tail_start = (n_max / 10).max(2);
    let tail: Vec<&ProbePoint> = points.iter().filter(|p| p.n >= tail_start).collect();
    let decays = last < 0.0 && tail.windows(2).all(|w| w[1].log_term <= w[0].log_term);
    let verdict = match mode {
        ProbeMode::Weak => {
            if decays {
                Verdict::Decays
            } else {
                Verdict::DoesNotDecay
            }
        }
        _ => {
            let grew = acc - tail[0].log_partial_sum;
            if decays && grew < PLATEAU_TOLERANCE {
                Verdict::Plateaus
            } else {
                Verdict::DoesNotPlateau
            }
        }
    };
    Ok(ProbeReport {
        n_max,
        points,
        final_log_term: last,
        final_log_partial_sum: acc,
        verdict,
    })
}

pub const DELTA_GRID: [f64; 4] = [1e-3, 1e-2, 1e-1, 1.0];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaProbe {
    pub delta: f64,
    pub final_log_term: f64,
    pub log_partial_sum: f64,
    /// Relative growth of the partial sum over the final decade.
    pub tail_growth: f64,
    pub verdict: Verdict,
}

/// Partial sums of `exp(-delta k_n)` for each `delta` in [`DELTA_GRID`].
/// Only these four values are probed; the condition quantifies over all `delta > 0`.
pub fn delta_probe(schedule: &Schedule, n_max: usize) -> Result<Vec<DeltaProbe>> {
    schedule.validate()?;
    if n_max < 20 {
        return Err(Error::param("n_max", "must be at least 20"));
    }
    let tail_start = n_max / 10;
    DELTA_GRID
        .iter()
        .map(|&delta| {
            let mut acc = f64::NEG_INFINITY;
            let mut at_tail = f64::NEG_INFINITY;
            let mut last = 0.0;
            for n in 2..=n_max {
                last = -delta * schedule.evaluate(n)? as f64;
                acc = log_add_exp(acc, last);
                if n == tail_start {
                    at_tail = acc;
                }
            }
            let tail_growth = (acc - at_tail).exp_m1();
            Ok(DeltaProbe {
                delta,
                final_log_term: last,
                log_partial_sum: acc,
                tail_growth,
                verdict: if tail_growth < PLATEAU_TOLERANCE {
                    Verdict::Plateaus
                } else {
                    Verdict::DoesNotPlateau
                },
            })
        })
        .collect()
}

/// Per leaf and coordinate, checks `eps (b - a) <= P(a < X_j <= b) <= C (b - a)`
/// with `(eps, C)` the density bounds of `truth`. Returns violating `(leaf, j)`.
pub fn interval_probability_violations(tree: &Tree, truth: &TruthDescriptor) -> Vec<(usize, usize)> {
    let (lo, hi) = truth.density_bounds(tree.dim());
    let mut out = Vec::new();
    for leaf in tree.leaves() {
        for j in 0..tree.dim() {
            let (a, b) = (leaf.lower[j], leaf.upper[j]);
            let p = truth.interval_probability(a, b);
            let width = b - a;
            let tol = 1e-12 * width.max(1e-300);
            if p < lo * width - tol || p > hi * width + tol {
                out.push((leaf.id, j));
            }
        }
    }
    out
}

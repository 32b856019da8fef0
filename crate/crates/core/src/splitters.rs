//! Tree growers: uniform, centered, modified centered (forced rotation) and
//! the `(alpha, k_n)`-regular random-split adaptive scheme.
//!
//! The first three are non-adaptive: they never look at data, only at the
//! randomness `theta`. The adaptive grower sees the growing sample `J` (and
//! its bootstrap weights) and nothing else.

use rand::Rng;
use rand_distr::{Distribution, Open01};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{grow_with, Tree, TreeBuilder};
use crate::model::Dataset;
use crate::numeric::snapped_ceil;
use crate::rng::{seeded, StreamRng};
use crate::schedule::Schedule;

/// A splitting scheme together with its size schedule. For the non-adaptive
/// kinds `schedule` gives the depth `s_n`; for the adaptive kind it gives the
/// minimal node size `k_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SplitterConfig {
    Uniform {
        schedule: Schedule,
    },
    Centered {
        feature_probs: Vec<f64>,
        schedule: Schedule,
    },
    ModifiedCentered {
        rotation_periods: Vec<usize>,
        schedule: Schedule,
    },
    RegularAdaptive {
        alpha: f64,
        feature_floor: Vec<f64>,
        schedule: Schedule,
    },
}

impl SplitterConfig {
    pub fn schedule(&self) -> &Schedule {
        match self {
            SplitterConfig::Uniform { schedule }
            | SplitterConfig::Centered { schedule, .. }
            | SplitterConfig::ModifiedCentered { schedule, .. }
            | SplitterConfig::RegularAdaptive { schedule, .. } => schedule,
        }
    }

    pub fn is_adaptive(&self) -> bool {
        matches!(self, SplitterConfig::RegularAdaptive { .. })
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        self.schedule().validate()?;
        match self {
            SplitterConfig::Uniform { schedule } => require_depth(schedule),
            SplitterConfig::Centered {
                feature_probs,
                schedule,
            } => {
                check_probs(feature_probs, d)?;
                require_depth(schedule)
            }
            SplitterConfig::ModifiedCentered {
                rotation_periods,
                schedule,
            } => {
                rotation_residues(rotation_periods, d)?;
                require_depth(schedule)
            }
            SplitterConfig::RegularAdaptive {
                alpha,
                feature_floor,
                schedule,
            } => {
                RegularAdaptive::new(*alpha, feature_floor.clone(), d)?;
                if !schedule.is_node_size() {
                    return Err(Error::param(
                        "schedule",
                        "adaptive splitter needs a node-size schedule",
                    ));
                }
                Ok(())
            }
        }
    }
}

fn require_depth(schedule: &Schedule) -> Result<()> {
    if !schedule.is_depth() {
        return Err(Error::param(
            "schedule",
            "non-adaptive splitter needs a depth schedule",
        ));
    }
    Ok(())
}

fn check_probs(p: &[f64], d: usize) -> Result<()> {
    if p.len() != d {
        return Err(Error::param(
            "feature_probs",
            format!("expected {d} entries, got {}", p.len()),
        ));
    }
    if p.iter().any(|&v| v.is_nan() || v <= 0.0) {
        return Err(Error::param("feature_probs", "entries must be positive"));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::param(
            "feature_probs",
            format!("must sum to 1, sum is {total}"),
        ));
    }
    Ok(())
}

fn draw_index(weights: &[f64], rng: &mut StreamRng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (j, &w) in weights.iter().enumerate() {
        if u < w {
            return j;
        }
        u -= w;
    }
    weights.len() - 1
}

/// Uniform splitting: at every node a feature uniform on `{1..d}` and a
/// threshold uniform on the node's side, grown balanced to depth `s_n`.
pub fn grow_uniform(d: usize, s_n: usize, theta: u64) -> Tree {
    grow_uniform_with(d, s_n, &mut seeded(theta))
}

pub fn grow_uniform_with(d: usize, s_n: usize, rng: &mut StreamRng) -> Tree {
    grow_with(d, |depth, lower, upper| {
        if depth as usize >= s_n {
            return None;
        }
        let j = rng.random_range(0..d);
        let u: f64 = Open01.sample(rng);
        Some((j, lower[j] + u * (upper[j] - lower[j])))
    })
}

/// Centered splitting: feature drawn with probabilities `p`, threshold at
/// the midpoint, grown balanced to depth `s_n` (so `2^s_n` leaves).
pub fn grow_centered(d: usize, p: &[f64], s_n: usize, theta: u64) -> Result<Tree> {
    grow_centered_with(d, p, s_n, &mut seeded(theta))
}

pub fn grow_centered_with(d: usize, p: &[f64], s_n: usize, rng: &mut StreamRng) -> Result<Tree> {
    check_probs(p, d)?;
    Ok(grow_with(d, |depth, lower, upper| {
        if depth as usize >= s_n {
            return None;
        }
        let j = if d == 1 { 0 } else { draw_index(p, rng) };
        Some((j, 0.5 * (lower[j] + upper[j])))
    }))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Residues `r_j < N_j` such that no depth `t` satisfies `t = r_j (mod N_j)`
/// for two different features. Assigned greedily in feature order.
pub fn rotation_residues(periods: &[usize], d: usize) -> Result<Vec<usize>> {
    if periods.len() != d {
        return Err(Error::param(
            "rotation_periods",
            format!("expected {d} entries, got {}", periods.len()),
        ));
    }
    if let Some(&n) = periods.iter().find(|&&n| n < d) {
        return Err(Error::param(
            "rotation_periods",
            format!("every period must be at least d = {d}, got {n}"),
        ));
    }
    let load: f64 = periods.iter().map(|&n| 1.0 / n as f64).sum();
    if load > 1.0 + 1e-12 {
        return Err(Error::Infeasible(format!(
            "forced rotation needs sum 1/N_j <= 1, got {load}"
        )));
    }
    let mut residues: Vec<usize> = Vec::with_capacity(d);
    for (j, &n) in periods.iter().enumerate() {
        // Two residue classes meet iff the residues agree modulo gcd(N_j, N_k).
        let r = (0..n).find(|&r| {
            residues
                .iter()
                .zip(&periods[..j])
                .all(|(&rk, &nk)| r % gcd(n, nk) != rk % gcd(n, nk))
        });
        match r {
            Some(r) => residues.push(r),
            None => {
                return Err(Error::Infeasible(format!(
                    "no residue for feature {j} avoids the earlier forced depths"
                )))
            }
        }
    }
    Ok(residues)
}

/// Centered splitting where the feature at depth `t` is forced to `j`
/// whenever `t = r_j (mod N_j)`, and drawn uniformly otherwise. Every leaf
/// gets at least `floor(s_n / N_j)` splits on feature `j`.
pub fn grow_modified_centered(d: usize, periods: &[usize], s_n: usize, theta: u64) -> Result<Tree> {
    grow_modified_centered_with(d, periods, s_n, &mut seeded(theta))
}

pub fn grow_modified_centered_with(
    d: usize,
    periods: &[usize],
    s_n: usize,
    rng: &mut StreamRng,
) -> Result<Tree> {
    let residues = rotation_residues(periods, d)?;
    Ok(grow_with(d, |depth, lower, upper| {
        let t = depth as usize;
        if t >= s_n {
            return None;
        }
        let forced = (0..d).find(|&j| t % periods[j] == residues[j]);
        let j = forced.unwrap_or_else(|| rng.random_range(0..d));
        Some((j, 0.5 * (lower[j] + upper[j])))
    }))
}

/// Parameters of the regular random-split adaptive grower.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularAdaptive {
    alpha: f64,
    feature_floor: Vec<f64>,
}

impl RegularAdaptive {
    pub fn new(alpha: f64, feature_floor: Vec<f64>, d: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 0.5) {
            return Err(Error::param(
                "alpha",
                format!("must lie in (0, 1/2], got {alpha}"),
            ));
        }
        if feature_floor.len() != d {
            return Err(Error::param(
                "feature_floor",
                format!("expected {d} entries, got {}", feature_floor.len()),
            ));
        }
        if feature_floor.iter().any(|&v| v.is_nan() || v <= 0.0) {
            return Err(Error::param("feature_floor", "entries must be positive"));
        }
        if feature_floor.iter().sum::<f64>() > 1.0 + 1e-9 {
            return Err(Error::param("feature_floor", "entries must sum to at most 1"));
        }
        Ok(RegularAdaptive { alpha, feature_floor })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn feature_floor(&self) -> &[f64] {
        &self.feature_floor
    }
}

/// Stop threshold on `J`-mass matching a minimal `I`-count of `k_n`:
/// `ceil(k_n n_J / n_I)`.
pub fn stop_threshold(k_n: usize, n_i: usize, n_j: usize) -> f64 {
    snapped_ceil(k_n as f64 * n_j as f64 / n_i as f64)
}

struct AdaptiveGrowth<'a> {
    values: &'a [f64],
    d: usize,
    weights: Vec<f64>,
    alpha: f64,
    probs: &'a [f64],
    tau: f64,
}

impl AdaptiveGrowth<'_> {
    fn x(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.d + j]
    }

    /// Chooses the split position in `idx` (sorted on `j`), or `None`.
    fn choose_cut(&self, idx: &[usize], j: usize, mass: f64, target: f64) -> Option<usize> {
        let w_max = idx.iter().map(|&i| self.weights[i]).fold(0.0, f64::max);
        let lo = (self.alpha * mass).max(self.tau);
        for slack in [0.0, w_max] {
            let mut best: Option<(f64, usize)> = None;
            let mut left = 0.0;
            for k in 1..idx.len() {
                left += self.weights[idx[k - 1]];
                if self.x(idx[k - 1], j) >= self.x(idx[k], j) {
                    continue;
                }
                let right = mass - left;
                if left < lo - slack || right < lo - slack {
                    continue;
                }
                let gap = (left - target).abs();
                if best.is_none_or(|(g, _)| gap < g) {
                    best = Some((gap, k));
                }
            }
            if let Some((_, k)) = best {
                return Some(k);
            }
        }
        None
    }

    #[allow(clippy::too_many_arguments)]
    fn grow(
        &self,
        b: &mut TreeBuilder,
        idx: &mut [usize],
        lower: &mut [f64],
        upper: &mut [f64],
        counts: &mut [u32],
        depth: u32,
        rng: &mut StreamRng,
    ) {
        let mass: f64 = idx.iter().map(|&i| self.weights[i]).sum();
        if mass <= 0.0 {
            b.note(depth, "empty J node: growth stopped");
            b.push_leaf(lower, upper, counts);
            return;
        }
        if mass < 2.0 * self.tau {
            b.push_leaf(lower, upper, counts);
            return;
        }
        let j = draw_index(self.probs, rng);
        let q = rng.random_range(self.alpha..=1.0 - self.alpha);
        idx.sort_by(|&a, &c| self.x(a, j).total_cmp(&self.x(c, j)).then(a.cmp(&c)));
        let Some(k) = self.choose_cut(idx, j, mass, q * mass) else {
            b.note(
                depth,
                format!("no admissible cut on feature {j}: node kept as leaf"),
            );
            b.push_leaf(lower, upper, counts);
            return;
        };
        let threshold = 0.5 * (self.x(idx[k - 1], j) + self.x(idx[k], j));
        let at = b.begin_split(j, threshold);
        counts[j] += 1;
        let (left, right) = idx.split_at_mut(k);
        let old = upper[j];
        upper[j] = threshold;
        self.grow(b, left, lower, upper, counts, depth + 1, rng);
        upper[j] = old;
        b.mark_right(at);
        let old = lower[j];
        lower[j] = threshold;
        self.grow(b, right, lower, upper, counts, depth + 1, rng);
        lower[j] = old;
        counts[j] -= 1;
    }
}

/// Regular random-split growth on the growing sample.
///
/// At each node a feature is drawn with probabilities proportional to the
/// feature floor, a balance fraction `q ~ U[alpha, 1 - alpha]`, and the node
/// is cut at the weighted `q`-quantile of its `J`-values on that feature
/// (midway between the straddling order statistics). A node is split only if
/// its `J`-mass is at least `2 tau` with `tau = ceil(k_n n_J / n_I)`, and
/// every cut keeps at least `max(alpha M, tau)` of the parent mass `M` on
/// each side; when no such cut exists the bound is relaxed by one point's
/// weight before the node is left unsplit.
///
/// `j_weights`, if given, are the adjusted bootstrap weights `W_i / E[W_1]`.
pub fn grow_regular_adaptive(
    j_sample: &Dataset,
    j_weights: Option<&[f64]>,
    cfg: &RegularAdaptive,
    k_n: usize,
    n_i: usize,
    theta: u64,
) -> Result<Tree> {
    grow_regular_adaptive_with(j_sample, j_weights, cfg, k_n, n_i, &mut seeded(theta))
}

pub fn grow_regular_adaptive_with(
    j_sample: &Dataset,
    j_weights: Option<&[f64]>,
    cfg: &RegularAdaptive,
    k_n: usize,
    n_i: usize,
    rng: &mut StreamRng,
) -> Result<Tree> {
    let d = j_sample.d();
    if cfg.feature_floor.len() != d {
        return Err(Error::param(
            "feature_floor",
            "length does not match the sample dimension",
        ));
    }
    if n_i == 0 {
        return Err(Error::param("n_i", "prediction sample size must be positive"));
    }
    let weights = match j_weights {
        Some(w) if w.len() != j_sample.n() => {
            return Err(Error::param(
                "j_weights",
                "length does not match the growing sample",
            ))
        }
        Some(w) => w.to_vec(),
        None => vec![1.0; j_sample.n()],
    };
    let growth = AdaptiveGrowth {
        values: j_sample.features(),
        d,
        tau: stop_threshold(k_n, n_i, j_sample.n()),
        weights,
        alpha: cfg.alpha,
        probs: &cfg.feature_floor,
    };
    let mut idx: Vec<usize> = (0..j_sample.n()).filter(|&i| growth.weights[i] > 0.0).collect();
    let mut b = TreeBuilder::new(d);
    let mut lower = vec![0.0; d];
    let mut upper = vec![1.0; d];
    let mut counts = vec![0u32; d];
    growth.grow(&mut b, &mut idx, &mut lower, &mut upper, &mut counts, 0, rng);
    Ok(b.finish())
}

/// Grows a non-adaptive tree from `cfg` at depth `s_n`.
pub fn grow_non_adaptive(cfg: &SplitterConfig, d: usize, s_n: usize, rng: &mut StreamRng) -> Result<Tree> {
    match cfg {
        SplitterConfig::Uniform { .. } => Ok(grow_uniform_with(d, s_n, rng)),
        SplitterConfig::Centered { feature_probs, .. } => grow_centered_with(d, feature_probs, s_n, rng),
        SplitterConfig::ModifiedCentered { rotation_periods, .. } => {
            grow_modified_centered_with(d, rotation_periods, s_n, rng)
        }
        SplitterConfig::RegularAdaptive { .. } => Err(Error::param(
            "splitter",
            "adaptive splitter needs the growing sample",
        )),
    }
}

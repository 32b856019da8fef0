//! Browser bindings. Every exported function returns a JSON string so the
//! page can stay plain JavaScript.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use honest_forest::diagnostics::{centered_min_split_recursion, empirical_min_split, MAX_ENUMERATED_DEPTH};
use honest_forest::estimators::LeafTable;
use honest_forest::geometry::Tree;
use honest_forest::model::{
    generate_dataset, honest_split, DensityKind, NoiseKind, RegressionKind, TruthDescriptor,
};
use honest_forest::splitters::{
    grow_centered, grow_modified_centered, grow_regular_adaptive, grow_uniform, RegularAdaptive,
};

const MAX_DEPTH: usize = 14;
const MAX_POINTS: usize = 200_000;

#[derive(Serialize)]
struct Partition {
    kind: String,
    leaves: Vec<[f64; 4]>,
    points: Vec<[f64; 2]>,
    min_volume: f64,
}

#[derive(Serialize)]
struct RecursionCurve {
    p: f64,
    depth: Vec<usize>,
    g1: Vec<f64>,
    limit: f64,
    empirical: Vec<Option<f64>>,
    empirical_std_err: Vec<Option<f64>>,
}

#[derive(Serialize)]
struct FitCurve {
    n_i: usize,
    n_j: usize,
    leaves: usize,
    x: Vec<f64>,
    truth: Vec<f64>,
    estimate: Vec<Option<f64>>,
    density: Vec<f64>,
    sample_x: Vec<f64>,
    sample_y: Vec<f64>,
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

fn check_depth(depth: usize) -> Result<(), String> {
    if depth > MAX_DEPTH {
        return Err(format!("depth must be at most {MAX_DEPTH}, got {depth}"));
    }
    Ok(())
}

fn check_points(n: usize) -> Result<(), String> {
    if !(2..=MAX_POINTS).contains(&n) {
        return Err(format!("n must lie in [2, {MAX_POINTS}], got {n}"));
    }
    Ok(())
}

fn uniform_truth(regression: RegressionKind, sigma: f64) -> TruthDescriptor {
    let noise = if sigma > 0.0 {
        NoiseKind::Gaussian { sigma }
    } else {
        NoiseKind::None
    };
    TruthDescriptor::new(DensityKind::Uniform, regression, noise)
}

/// Leaf rectangles of a two-dimensional tree.
///
/// `kind` is `uniform`, `centered`, `modified_centered` or `regular_adaptive`.
/// `size` is the depth for the first three and the minimal node size for the
/// adaptive grower, which grows on `n` uniform points. `p1` is the
/// probability of splitting the first coordinate (centered) or its floor
/// probability (adaptive).
pub fn partition_json(
    kind: &str,
    size: usize,
    p1: f64,
    n: usize,
    alpha: f64,
    seed: u64,
) -> Result<String, String> {
    let e = |err: honest_forest::Error| err.to_string();
    let mut points = Vec::new();
    let tree: Tree = match kind {
        "uniform" => {
            check_depth(size)?;
            grow_uniform(2, size, seed)
        }
        "centered" => {
            check_depth(size)?;
            grow_centered(2, &[p1, 1.0 - p1], size, seed).map_err(e)?
        }
        "modified_centered" => {
            check_depth(size)?;
            grow_modified_centered(2, &[2, 2], size, seed).map_err(e)?
        }
        "regular_adaptive" => {
            check_points(n)?;
            let data = generate_dataset(&uniform_truth(RegressionKind::Zero, 0.0), n, 2, seed).map_err(e)?;
            let cfg = RegularAdaptive::new(alpha, vec![p1, 1.0 - p1], 2).map_err(e)?;
            let tree =
                grow_regular_adaptive(&data, None, &cfg, size.max(1), n, seed ^ 0x9e37_79b9).map_err(e)?;
            points = data.rows().map(|r| [r[0], r[1]]).collect();
            tree
        }
        other => return Err(format!("unknown splitter `{other}`")),
    };
    let leaves = tree
        .leaves()
        .map(|l| [l.lower[0], l.lower[1], l.upper[0], l.upper[1]])
        .collect();
    to_json(&Partition {
        kind: kind.to_string(),
        leaves,
        points,
        min_volume: tree.min_leaf_volume(),
    })
}

/// `G_k(1)`, the probability that every leaf of a depth-`k` centered tree
/// splits the tracked feature at least once, for `k = 1..=max_depth`, next to
/// Monte Carlo frequencies for the shallow depths.
pub fn recursion_json(p: f64, max_depth: usize, reps: usize, seed: u64) -> Result<String, String> {
    if max_depth == 0 || max_depth > 200 {
        return Err(format!("max_depth must lie in [1, 200], got {max_depth}"));
    }
    let mut curve = RecursionCurve {
        p,
        depth: Vec::new(),
        g1: Vec::new(),
        limit: 0.0,
        empirical: Vec::new(),
        empirical_std_err: Vec::new(),
    };
    for k in 1..=max_depth {
        let r = centered_min_split_recursion(p, k).map_err(|e| e.to_string())?;
        curve.depth.push(k);
        curve.g1.push(r.g1);
        curve.limit = r.limit;
        if reps > 0 && k <= MAX_ENUMERATED_DEPTH.min(10) {
            let (freq, se) =
                empirical_min_split(p, k, reps, seed.wrapping_add(k as u64)).map_err(|e| e.to_string())?;
            curve.empirical.push(Some(1.0 - freq));
            curve.empirical_std_err.push(Some(se));
        } else {
            curve.empirical.push(None);
            curve.empirical_std_err.push(None);
        }
    }
    to_json(&curve)
}

/// Honest uniform-split tree fitted to `m(x) = sin(2 pi x)` on `[0,1]`,
/// evaluated on `grid` interior points.
pub fn fit_json(n: usize, depth: usize, sigma: f64, grid: usize, seed: u64) -> Result<String, String> {
    check_points(n)?;
    check_depth(depth)?;
    if !(2..=2000).contains(&grid) {
        return Err(format!("grid must lie in [2, 2000], got {grid}"));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(format!("sigma must be a nonnegative number, got {sigma}"));
    }
    let e = |err: honest_forest::Error| err.to_string();
    let truth = uniform_truth(
        RegressionKind::SineLinear {
            freq: 1.0,
            linear: vec![0.0],
        },
        sigma,
    );
    let data = generate_dataset(&truth, n, 1, seed).map_err(e)?;
    let part = honest_split(n, 0.5, seed.wrapping_add(1)).map_err(e)?;
    let (i_sample, _j_sample) = part.apply(&data);
    let tree = grow_uniform(1, depth, seed.wrapping_add(2));
    let table = LeafTable::new(&tree, &i_sample, None);
    let x: Vec<f64> = (0..grid).map(|k| (k as f64 + 0.5) / grid as f64).collect();
    let shown = n.min(2000);
    to_json(&FitCurve {
        n_i: part.n_i,
        n_j: part.n_j,
        leaves: tree.num_leaves(),
        truth: x.iter().map(|&v| truth.conditional_mean(&[v])).collect(),
        estimate: x.iter().map(|&v| table.predict(&[v])).collect(),
        density: x.iter().map(|&v| table.density(&[v], 1.0)).collect(),
        sample_x: i_sample.features()[..shown.min(i_sample.n())].to_vec(),
        sample_y: i_sample.responses()[..shown.min(i_sample.n())].to_vec(),
        x,
    })
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|m| JsValue::from_str(&m))
}

#[wasm_bindgen]
pub fn partition(kind: &str, size: u32, p1: f64, n: u32, alpha: f64, seed: u32) -> Result<String, JsValue> {
    js(partition_json(
        kind,
        size as usize,
        p1,
        n as usize,
        alpha,
        seed as u64,
    ))
}

#[wasm_bindgen]
pub fn recursion(p: f64, max_depth: u32, reps: u32, seed: u32) -> Result<String, JsValue> {
    js(recursion_json(p, max_depth as usize, reps as usize, seed as u64))
}

#[wasm_bindgen]
pub fn honest_fit(n: u32, depth: u32, sigma: f64, grid: u32, seed: u32) -> Result<String, JsValue> {
    js(fit_json(
        n as usize,
        depth as usize,
        sigma,
        grid as usize,
        seed as u64,
    ))
}

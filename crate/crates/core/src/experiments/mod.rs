//! Monte Carlo consistency experiments.
//!
//! Each replication owns private random streams derived from the master
//! seed and its indices (see [`crate::rng`]), replications run in parallel,
//! and all aggregation happens afterwards in replication order. Reports are
//! therefore identical for any number of worker threads.

mod config;
mod report;

pub use config::{field_line, sha256_hex, BootstrapConfig, ExperimentConfig, Mode};
pub use report::{
    format_float, write_artifacts, ConvergenceReport, Direction, ReportRow, RunManifest, Trend, CONFIG_FILE,
    MANIFEST_FILE, RESULTS_FILE, SUMMARY_FILE, TREND_THRESHOLD,
};

use crate::diagnostics::{trace_assumptions, AssumptionTrace};
use crate::error::{Error, Result};
use crate::estimators::{average_predictions, LeafTable};
use crate::geometry::Tree;
use crate::model::{generate_with, honest_split_nested, honest_split_with, Dataset};
use crate::numeric::{mean, quantile, quantile_std_err, std_err, variance, variance_std_err};
use crate::rng::{Role, StreamKey};
use crate::splitters::{grow_non_adaptive, grow_regular_adaptive_with, RegularAdaptive, SplitterConfig};
use crate::weights::{analytic_moments, draw_weights_with};

use report::{Rows, Target};

/// Execution settings that do not affect results.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

/// Runs the experiment named by `cfg.mode`.
pub fn run(cfg: &ExperimentConfig, opts: RunOptions) -> Result<ConvergenceReport> {
    cfg.validate()?;
    with_threads(opts.threads, || match cfg.mode {
        Mode::Pointwise => pointwise(cfg),
        Mode::Uniform => uniform(cfg),
        Mode::Lp => lp(cfg),
        Mode::NestedPath => nested_path(cfg),
        Mode::Forest => forest(cfg),
    })
}

fn require_mode(cfg: &ExperimentConfig, mode: Mode) -> Result<()> {
    if cfg.mode != mode {
        return Err(Error::config(
            "mode",
            format!("expected {mode}, config says {}", cfg.mode),
        ));
    }
    Ok(())
}

/// Pointwise errors of `T`, `f_hat` and `m_hat` at the query points.
pub fn run_pointwise(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    require_mode(cfg, Mode::Pointwise)?;
    run(cfg, RunOptions::default())
}

/// Sup-grid errors of `f_hat` and `m_hat` with exact leaf-scan geometry.
pub fn run_uniform(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    require_mode(cfg, Mode::Uniform)?;
    run(cfg, RunOptions::default())
}

/// `E|T - m|^p` at the query points for each configured `p`.
pub fn run_lp(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    require_mode(cfg, Mode::Lp)?;
    run(cfg, RunOptions::default())
}

/// Error sequences along nested sample paths.
pub fn run_nested_path(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    if !cfg.nested_path {
        return Err(Error::config(
            "nested_path",
            "nested-path runs need the nested_path flag",
        ));
    }
    require_mode(cfg, Mode::NestedPath)?;
    run(cfg, RunOptions::default())
}

/// Double-bootstrap forests of `forest_size` trees against their first tree.
pub fn run_forest(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    require_mode(cfg, Mode::Forest)?;
    run(cfg, RunOptions::default())
}

#[cfg(feature = "parallel")]
fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| Error::param("threads", e.to_string()))?;
            pool.install(f)
        }
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<T: Send>(_threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    f()
}

/// `f(0..count)` collected in index order.
fn par_map<T, F>(count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(f).collect()
    }
}

/// One grown tree with the `I`-sample weights used to evaluate it.
struct Fitted {
    tree: Tree,
    i_weights: Option<Vec<f64>>,
    mean_w: f64,
}

impl Fitted {
    fn table<'a>(&'a self, i: &Dataset) -> LeafTable<'a> {
        LeafTable::new(&self.tree, i, self.i_weights.as_deref())
    }

    fn trace(&self, i: &Dataset, x: &[f64]) -> AssumptionTrace {
        trace_assumptions(&self.tree, i, x, self.i_weights.as_deref(), self.mean_w)
    }
}

struct Keys {
    experiment: u64,
    n_index: u64,
    replication: u64,
    master: u64,
}

impl Keys {
    fn rng(&self, tree: u64, role: Role) -> crate::rng::StreamRng {
        StreamKey {
            experiment: self.experiment,
            n_index: self.n_index,
            replication: self.replication,
            tree,
            role,
        }
        .rng(self.master)
    }
}

fn schedule_value(cfg: &ExperimentConfig, n_i: usize) -> Result<usize> {
    cfg.splitter.schedule().evaluate(n_i)
}

/// Grows tree `b` on `j` and draws its `I`-weights.
fn fit(cfg: &ExperimentConfig, keys: &Keys, b: u64, i: &Dataset, j: &Dataset) -> Result<Fitted> {
    let n_i = i.n();
    let size = schedule_value(cfg, n_i)?;
    let mut theta = keys.rng(b, Role::Theta);
    let tree = match &cfg.splitter {
        SplitterConfig::RegularAdaptive {
            alpha, feature_floor, ..
        } => {
            let ra = RegularAdaptive::new(*alpha, feature_floor.clone(), cfg.d)?;
            let j_weights = match &cfg.bootstrap {
                Some(boot) => {
                    let mean_j = analytic_moments(&boot.j_scheme, j.n())?.mean_w1;
                    let w = draw_weights_with(&boot.j_scheme, j.n(), &mut keys.rng(b, Role::JWeights))?;
                    Some(w.adjusted(mean_j))
                }
                None => None,
            };
            grow_regular_adaptive_with(j, j_weights.as_deref(), &ra, size, n_i, &mut theta)?
        }
        other => grow_non_adaptive(other, cfg.d, size, &mut theta)?,
    };
    let (i_weights, mean_w) = match &cfg.bootstrap {
        Some(boot) => {
            let mean_w = analytic_moments(&boot.i_scheme, n_i)?.mean_w1;
            let w = draw_weights_with(&boot.i_scheme, n_i, &mut keys.rng(b, Role::IWeights))?;
            (Some(w.w), mean_w)
        }
        None => (None, 1.0),
    };
    Ok(Fitted {
        tree,
        i_weights,
        mean_w,
    })
}

/// Fresh dataset and shuffled honest split for one replication.
fn draw_split(cfg: &ExperimentConfig, keys: &Keys, n: usize) -> Result<(Dataset, Dataset)> {
    let data = generate_with(&cfg.truth, n, cfg.d, &mut keys.rng(0, Role::Data))?;
    let part = honest_split_with(n, cfg.honest_ratio, &mut keys.rng(0, Role::Partition))?;
    Ok(part.apply(&data))
}

fn keys(cfg: &ExperimentConfig, n_index: usize, replication: usize) -> Keys {
    Keys {
        experiment: cfg.mode.stream_tag(),
        n_index: n_index as u64,
        replication: replication as u64,
        master: cfg.master_seed,
    }
}

struct QueryDraw {
    t: Option<f64>,
    f: f64,
    m: f64,
    trace: AssumptionTrace,
}

struct PointDraw {
    queries: Vec<QueryDraw>,
    notes: usize,
}

fn point_draws(cfg: &ExperimentConfig, n_index: usize, n: usize) -> Result<Vec<PointDraw>> {
    par_map(cfg.replications, |r| {
        let keys = keys(cfg, n_index, r);
        let (i, j) = draw_split(cfg, &keys, n)?;
        let fitted = fit(cfg, &keys, 0, &i, &j)?;
        let table = fitted.table(&i);
        let queries = cfg
            .query_points
            .iter()
            .map(|x| QueryDraw {
                t: table.predict(x),
                f: table.density(x, fitted.mean_w),
                m: table.numerator(x, fitted.mean_w),
                trace: fitted.trace(&i, x),
            })
            .collect();
        Ok(PointDraw {
            queries,
            notes: fitted.tree.notes().len(),
        })
    })
}

fn push_tree_rows(rows: &mut Rows, cfg: &ExperimentConfig, n: usize, notes: &[f64]) -> Result<()> {
    let (n_i, _) = cfg.split_sizes(n);
    let reps = cfg.replications;
    rows.push(n, Target::Tree, "n_i", n_i as f64, 0.0, 0.0, reps);
    rows.push(
        n,
        Target::Tree,
        "schedule_value",
        schedule_value(cfg, n_i)? as f64,
        0.0,
        0.0,
        reps,
    );
    rows.push(
        n,
        Target::Tree,
        "growth_notes",
        mean(notes),
        std_err(notes),
        0.0,
        reps,
    );
    Ok(())
}

fn push_trace_rows(rows: &mut Rows, n: usize, q: usize, traces: &[&AssumptionTrace], empty_rate: f64) {
    let reps = traces.len();
    let mut summary = |name: String, values: Vec<f64>| {
        rows.push(
            n,
            Target::Point(q),
            &format!("{name}_median"),
            quantile(&values, 0.5),
            quantile_std_err(&values, 0.5),
            empty_rate,
            reps,
        );
        rows.push(
            n,
            Target::Point(q),
            &format!("{name}_q90"),
            quantile(&values, 0.9),
            quantile_std_err(&values, 0.9),
            empty_rate,
            reps,
        );
    };
    let d = traces.first().map_or(0, |t| t.side_lengths.len());
    for j in 0..d {
        summary(
            format!("side_length_{}", j + 1),
            traces.iter().map(|t| t.side_lengths[j]).collect(),
        );
    }
    summary("leaf_mass".into(), traces.iter().map(|t| t.leaf_mass).collect());
    for j in 0..d {
        summary(
            format!("balance_{}", j + 1),
            traces.iter().map(|t| t.balance_fractions[j]).collect(),
        );
    }
    summary("min_volume".into(), traces.iter().map(|t| t.min_volume).collect());
    summary("depth".into(), traces.iter().map(|t| t.depth as f64).collect());
}

/// Mean, MSE, bias, variance rows for a set of signed errors.
fn push_error_rows(rows: &mut Rows, n: usize, q: usize, prefix: &str, errors: &[f64], empty_rate: f64) {
    let k = errors.len();
    let sq: Vec<f64> = errors.iter().map(|e| e * e).collect();
    let me = mean(errors);
    let me_se = std_err(errors);
    let name = |s: &str| format!("{prefix}{s}");
    rows.push(n, Target::Point(q), &name("mean_error"), me, me_se, empty_rate, k);
    rows.push(
        n,
        Target::Point(q),
        &name("mse"),
        mean(&sq),
        std_err(&sq),
        empty_rate,
        k,
    );
    rows.push(
        n,
        Target::Point(q),
        &name("bias_sq"),
        me * me,
        2.0 * me.abs() * me_se,
        empty_rate,
        k,
    );
    rows.push(
        n,
        Target::Point(q),
        &name("variance"),
        variance(errors),
        variance_std_err(errors),
        empty_rate,
        k,
    );
}

fn rms_row(rows: &mut Rows, n: usize, q: usize, metric: &str, errors: &[f64]) {
    let sq: Vec<f64> = errors.iter().map(|e| e * e).collect();
    let ms = mean(&sq);
    let rms = ms.sqrt();
    let se = if rms > 0.0 {
        std_err(&sq) / (2.0 * rms)
    } else {
        0.0
    };
    rows.push(n, Target::Point(q), metric, rms, se, 0.0, errors.len());
}

fn pointwise(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    let mut rows = Rows::new(cfg);
    for (ni, &n) in cfg.n_grid.iter().enumerate() {
        let draws = point_draws(cfg, ni, n)?;
        let notes: Vec<f64> = draws.iter().map(|d| d.notes as f64).collect();
        push_tree_rows(&mut rows, cfg, n, &notes)?;
        for (q, x) in cfg.query_points.iter().enumerate() {
            let m = cfg.truth.conditional_mean(x);
            let f = cfg.truth.density(x);
            let mf = cfg.truth.numerator(x);
            let qd: Vec<&QueryDraw> = draws.iter().map(|d| &d.queries[q]).collect();
            let errors: Vec<f64> = qd.iter().filter_map(|d| d.t).map(|t| t - m).collect();
            let empty_rate = 1.0 - errors.len() as f64 / qd.len() as f64;
            push_error_rows(&mut rows, n, q, "", &errors, empty_rate);
            let f_err: Vec<f64> = qd.iter().map(|d| d.f - f).collect();
            let m_err: Vec<f64> = qd.iter().map(|d| d.m - mf).collect();
            rms_row(&mut rows, n, q, "density_rms_error", &f_err);
            rms_row(&mut rows, n, q, "numerator_rms_error", &m_err);
            let traces: Vec<&AssumptionTrace> = qd.iter().map(|d| &d.trace).collect();
            push_trace_rows(&mut rows, n, q, &traces, empty_rate);
        }
    }
    let mut report = rows.finish();
    report.add_point_trends("mse", Direction::Decreasing, cfg.query_points.len());
    report.add_point_trends("density_rms_error", Direction::Decreasing, cfg.query_points.len());
    report.add_trace_trends(cfg);
    Ok(report)
}

fn lp(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    let mut rows = Rows::new(cfg);
    for (ni, &n) in cfg.n_grid.iter().enumerate() {
        let draws = point_draws(cfg, ni, n)?;
        let notes: Vec<f64> = draws.iter().map(|d| d.notes as f64).collect();
        push_tree_rows(&mut rows, cfg, n, &notes)?;
        for (q, x) in cfg.query_points.iter().enumerate() {
            let m = cfg.truth.conditional_mean(x);
            let abs: Vec<f64> = draws
                .iter()
                .filter_map(|d| d.queries[q].t)
                .map(|t| (t - m).abs())
                .collect();
            let empty_rate = 1.0 - abs.len() as f64 / draws.len() as f64;
            for &p in &cfg.p_norms {
                let powered: Vec<f64> = abs.iter().map(|a| a.powf(p)).collect();
                let moment = mean(&powered);
                let se = std_err(&powered);
                rows.push(
                    n,
                    Target::Point(q),
                    &lp_metric(p),
                    moment,
                    se,
                    empty_rate,
                    abs.len(),
                );
                let norm = moment.powf(1.0 / p);
                let norm_se = if moment > 0.0 {
                    se * norm / (p * moment)
                } else {
                    0.0
                };
                rows.push(
                    n,
                    Target::Point(q),
                    &lp_norm_metric(p),
                    norm,
                    norm_se,
                    empty_rate,
                    abs.len(),
                );
            }
        }
    }
    let mut report = rows.finish();
    for &p in &cfg.p_norms {
        report.add_point_trends(&lp_metric(p), Direction::Decreasing, cfg.query_points.len());
    }
    Ok(report)
}

/// Metric name for `E|T - m|^p`.
pub fn lp_metric(p: f64) -> String {
    format!("lp_error_p{p}")
}

/// Metric name for `(E|T - m|^p)^(1/p)`.
pub fn lp_norm_metric(p: f64) -> String {
    format!("lp_norm_p{p}")
}

/// Cell-interior evaluation grid: odd multiples of `1 / (2 r)` per axis.
pub fn interior_grid(d: usize, r: usize) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (0..r).map(|i| (2 * i + 1) as f64 / (2 * r) as f64).collect();
    let mut points = vec![Vec::with_capacity(d)];
    for _ in 0..d {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    points
}

struct GridDraw {
    sup_f: f64,
    sup_m: f64,
    empties: usize,
    min_volume: f64,
    sup_side: Vec<f64>,
    grid_side: Vec<f64>,
    leaves: usize,
    notes: usize,
}

fn uniform(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    let grid = interior_grid(cfg.d, cfg.sup_grid_resolution);
    let truth_f: Vec<f64> = grid.iter().map(|x| cfg.truth.density(x)).collect();
    let truth_m: Vec<f64> = grid.iter().map(|x| cfg.truth.numerator(x)).collect();
    let mut rows = Rows::new(cfg);
    for (ni, &n) in cfg.n_grid.iter().enumerate() {
        let draws = par_map(cfg.replications, |r| {
            let keys = keys(cfg, ni, r);
            let (i, j) = draw_split(cfg, &keys, n)?;
            let fitted = fit(cfg, &keys, 0, &i, &j)?;
            let table = fitted.table(&i);
            let tree = &fitted.tree;
            let mut g = GridDraw {
                sup_f: 0.0,
                sup_m: 0.0,
                empties: 0,
                min_volume: tree.min_leaf_volume(),
                sup_side: (0..cfg.d).map(|j| tree.max_side_length(j)).collect(),
                grid_side: vec![0.0; cfg.d],
                leaves: tree.num_leaves(),
                notes: tree.notes().len(),
            };
            for (k, x) in grid.iter().enumerate() {
                let f = table.density(x, fitted.mean_w);
                let m = table.numerator(x, fitted.mean_w);
                g.sup_f = g.sup_f.max((f - truth_f[k]).abs());
                g.sup_m = g.sup_m.max((m - truth_m[k]).abs());
                if f == 0.0 {
                    g.empties += 1;
                }
                let leaf = tree.leaf_of(x);
                for (j, s) in g.grid_side.iter_mut().enumerate() {
                    *s = s.max(leaf.side(j));
                }
            }
            Ok(g)
        })?;
        let notes: Vec<f64> = draws.iter().map(|d| d.notes as f64).collect();
        push_tree_rows(&mut rows, cfg, n, &notes)?;
        let reps = draws.len();
        let empty_rate = draws.iter().map(|d| d.empties).sum::<usize>() as f64 / (reps * grid.len()) as f64;
        let mut push_mean = |metric: &str, values: Vec<f64>, er: f64| {
            rows.push(n, Target::Grid, metric, mean(&values), std_err(&values), er, reps);
        };
        push_mean(
            "sup_density_error",
            draws.iter().map(|d| d.sup_f).collect(),
            empty_rate,
        );
        push_mean(
            "sup_numerator_error",
            draws.iter().map(|d| d.sup_m).collect(),
            empty_rate,
        );
        push_mean("min_volume", draws.iter().map(|d| d.min_volume).collect(), 0.0);
        push_mean("leaf_count", draws.iter().map(|d| d.leaves as f64).collect(), 0.0);
        for j in 0..cfg.d {
            push_mean(
                &format!("sup_side_length_{}", j + 1),
                draws.iter().map(|d| d.sup_side[j]).collect(),
                0.0,
            );
            push_mean(
                &format!("grid_side_length_{}", j + 1),
                draws.iter().map(|d| d.grid_side[j]).collect(),
                0.0,
            );
        }
        let min_v: Vec<f64> = draws.iter().map(|d| d.min_volume).collect();
        let lo = min_v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = min_v.iter().copied().fold(0.0, f64::max);
        rows.push(n, Target::Grid, "min_volume_min", lo, 0.0, 0.0, reps);
        rows.push(n, Target::Grid, "min_volume_max", hi, 0.0, 0.0, reps);
    }
    let mut report = rows.finish();
    report.add_trend("grid", "sup_density_error", Direction::Decreasing);
    report.add_trend("grid", "sup_numerator_error", Direction::Decreasing);
    Ok(report)
}

fn nested_path(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    let n_max = *cfg.n_grid.last().expect("validated nonempty grid");
    // paths[r][n_index][q]
    let paths: Vec<Vec<Vec<Option<f64>>>> = par_map(cfg.replications, |r| {
        let keys = keys(cfg, 0, r);
        let full = generate_with(&cfg.truth, n_max, cfg.d, &mut keys.rng(0, Role::Data))?;
        cfg.n_grid
            .iter()
            .map(|&n| {
                let data = full.prefix(n);
                let (i, j) = honest_split_nested(n, cfg.honest_ratio)?.apply(&data);
                let fitted = fit(cfg, &keys, 0, &i, &j)?;
                let table = fitted.table(&i);
                Ok(cfg
                    .query_points
                    .iter()
                    .map(|x| table.predict(x).map(|t| t - cfg.truth.conditional_mean(x)))
                    .collect())
            })
            .collect()
    })?;
    let mut rows = Rows::new(cfg);
    for (ni, &n) in cfg.n_grid.iter().enumerate() {
        push_tree_rows(&mut rows, cfg, n, &[])?;
        for q in 0..cfg.query_points.len() {
            let abs: Vec<f64> = paths.iter().filter_map(|p| p[ni][q]).map(f64::abs).collect();
            let sq: Vec<f64> = abs.iter().map(|a| a * a).collect();
            let empty_rate = 1.0 - abs.len() as f64 / paths.len() as f64;
            rows.push(
                n,
                Target::Point(q),
                "path_abs_error",
                mean(&abs),
                std_err(&abs),
                empty_rate,
                abs.len(),
            );
            rows.push(
                n,
                Target::Point(q),
                "path_mse",
                mean(&sq),
                std_err(&sq),
                empty_rate,
                abs.len(),
            );
        }
    }
    let last = cfg.n_grid.len() - 1;
    for q in 0..cfg.query_points.len() {
        let outcomes: Vec<f64> = paths
            .iter()
            .filter_map(|p| match (p[0][q], p[last][q]) {
                (Some(a), Some(b)) => Some(if b.abs() < a.abs() { 1.0 } else { 0.0 }),
                _ => None,
            })
            .collect();
        let k = outcomes.len();
        let empty_rate = 1.0 - k as f64 / paths.len() as f64;
        rows.push(
            n_max,
            Target::Point(q),
            "final_below_initial",
            mean(&outcomes),
            std_err(&outcomes),
            empty_rate,
            k,
        );
    }
    let mut report = rows.finish();
    report.add_point_trends("path_abs_error", Direction::Decreasing, cfg.query_points.len());
    report.notes.push(
        "nested-path runs are a finite-sample proxy for almost-sure convergence, not a test of it".into(),
    );
    Ok(report)
}

struct ForestDraw {
    forest: Vec<Option<f64>>,
    tree: Vec<Option<f64>>,
    skip_fraction: Vec<f64>,
    notes: usize,
}

fn forest(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    let b_count = cfg.forest_size;
    let mut rows = Rows::new(cfg);
    for (ni, &n) in cfg.n_grid.iter().enumerate() {
        let draws = par_map(cfg.replications, |r| {
            let keys = keys(cfg, ni, r);
            let (i, j) = draw_split(cfg, &keys, n)?;
            let mut values = vec![Vec::with_capacity(b_count); cfg.query_points.len()];
            let mut notes = 0;
            for b in 0..b_count {
                let fitted = fit(cfg, &keys, b as u64, &i, &j)?;
                notes += fitted.tree.notes().len();
                let table = fitted.table(&i);
                for (q, x) in cfg.query_points.iter().enumerate() {
                    values[q].push(table.predict(x));
                }
            }
            let mut draw = ForestDraw {
                forest: Vec::new(),
                tree: Vec::new(),
                skip_fraction: Vec::new(),
                notes,
            };
            for v in &values {
                let avg = average_predictions(v);
                draw.forest.push(avg.value);
                draw.tree.push(v[0]);
                draw.skip_fraction.push(avg.skipped as f64 / b_count as f64);
            }
            Ok(draw)
        })?;
        let notes: Vec<f64> = draws.iter().map(|d| d.notes as f64).collect();
        push_tree_rows(&mut rows, cfg, n, &notes)?;
        let reps = draws.len();
        for (q, x) in cfg.query_points.iter().enumerate() {
            let m = cfg.truth.conditional_mean(x);
            for (prefix, pick) in [
                (
                    "forest_",
                    (|d: &ForestDraw, q: usize| d.forest[q]) as fn(&ForestDraw, usize) -> Option<f64>,
                ),
                ("tree_", |d: &ForestDraw, q: usize| d.tree[q]),
            ] {
                let errors: Vec<f64> = draws.iter().filter_map(|d| pick(d, q)).map(|t| t - m).collect();
                let empty_rate = 1.0 - errors.len() as f64 / reps as f64;
                push_error_rows(&mut rows, n, q, prefix, &errors, empty_rate);
            }
            let skips: Vec<f64> = draws.iter().map(|d| d.skip_fraction[q]).collect();
            let rate = mean(&skips);
            rows.push(
                n,
                Target::Point(q),
                "skip_rate",
                rate,
                std_err(&skips),
                rate,
                reps,
            );
        }
    }
    let mut report = rows.finish();
    report.add_point_trends("forest_mse", Direction::Decreasing, cfg.query_points.len());
    Ok(report)
}

#[cfg(test)]
mod tests;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::{sha256_hex, ExperimentConfig, Mode};
use crate::error::Result;

/// Adjacent-pair fraction a trend must reach to pass.
pub const TREND_THRESHOLD: f64 = 0.8;

/// One `results.csv` line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub mode: Mode,
    pub n: usize,
    /// Query index, or `grid` for sup-grid rows and `tree` for per-tree rows.
    pub query_id: String,
    /// Query coordinates; empty for `grid` and `tree` rows.
    pub x: Vec<f64>,
    pub metric: String,
    pub value: f64,
    pub std_err: f64,
    pub empty_rate: f64,
    /// Replications contributing to `value`.
    pub replication_count: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Decreasing,
    Increasing,
}

/// Fraction of adjacent sample sizes along which a metric moved the expected way.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trend {
    pub query_id: String,
    pub metric: String,
    pub direction: Direction,
    pub n: Vec<usize>,
    pub values: Vec<f64>,
    /// `None` with fewer than two sample sizes.
    pub fraction: Option<f64>,
    pub passes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub mode: Mode,
    pub d: usize,
    pub rows: Vec<ReportRow>,
    pub trends: Vec<Trend>,
    pub notes: Vec<String>,
}

pub(super) enum Target {
    Point(usize),
    Grid,
    Tree,
}

pub(super) struct Rows<'a> {
    cfg: &'a ExperimentConfig,
    rows: Vec<ReportRow>,
}

impl<'a> Rows<'a> {
    pub(super) fn new(cfg: &'a ExperimentConfig) -> Self {
        Rows {
            cfg,
            rows: Vec::new(),
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub(super) fn push(
        &mut self,
        n: usize,
        target: Target,
        metric: &str,
        value: f64,
        std_err: f64,
        empty_rate: f64,
        replication_count: usize,
    ) {
        let (query_id, x) = match target {
            Target::Point(q) => (q.to_string(), self.cfg.query_points[q].clone()),
            Target::Grid => ("grid".to_string(), Vec::new()),
            Target::Tree => ("tree".to_string(), Vec::new()),
        };
        self.rows.push(ReportRow {
            mode: self.cfg.mode,
            n,
            query_id,
            x,
            metric: metric.to_string(),
            value,
            std_err,
            empty_rate,
            replication_count,
        });
    }

    pub(super) fn finish(self) -> ConvergenceReport {
        ConvergenceReport {
            mode: self.cfg.mode,
            d: self.cfg.d,
            rows: self.rows,
            trends: Vec::new(),
            notes: Vec::new(),
        }
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v}")
}

impl ConvergenceReport {
    pub fn get(&self, n: usize, query_id: &str, metric: &str) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.n == n && r.query_id == query_id && r.metric == metric)
    }

    /// `(n, value)` pairs in grid order.
    pub fn series(&self, query_id: &str, metric: &str) -> Vec<(usize, f64)> {
        self.rows
            .iter()
            .filter(|r| r.query_id == query_id && r.metric == metric)
            .map(|r| (r.n, r.value))
            .collect()
    }

    pub fn trend(&self, query_id: &str, metric: &str) -> Option<&Trend> {
        self.trends
            .iter()
            .find(|t| t.query_id == query_id && t.metric == metric)
    }

    pub fn add_trend(&mut self, query_id: &str, metric: &str, direction: Direction) {
        let series = self.series(query_id, metric);
        let pairs = series.len().saturating_sub(1);
        let good = series
            .windows(2)
            .filter(|w| match direction {
                Direction::Decreasing => w[1].1 < w[0].1,
                Direction::Increasing => w[1].1 > w[0].1,
            })
            .count();
        let fraction = (pairs > 0).then(|| good as f64 / pairs as f64);
        self.trends.push(Trend {
            query_id: query_id.to_string(),
            metric: metric.to_string(),
            direction,
            n: series.iter().map(|p| p.0).collect(),
            values: series.iter().map(|p| p.1).collect(),
            fraction,
            passes: fraction.is_some_and(|f| f >= TREND_THRESHOLD),
        });
    }

    pub(super) fn add_point_trends(&mut self, metric: &str, direction: Direction, queries: usize) {
        for q in 0..queries {
            self.add_trend(&q.to_string(), metric, direction);
        }
    }

    pub(super) fn add_trace_trends(&mut self, cfg: &ExperimentConfig) {
        for q in 0..cfg.query_points.len() {
            let id = q.to_string();
            self.add_trend(&id, "leaf_mass_median", Direction::Increasing);
            for j in 0..cfg.d {
                self.add_trend(
                    &id,
                    &format!("side_length_{}_median", j + 1),
                    Direction::Decreasing,
                );
            }
        }
    }

    pub fn csv_header(&self) -> Vec<String> {
        let mut h: Vec<String> = ["mode", "n", "query_id"].iter().map(|s| s.to_string()).collect();
        h.extend((1..=self.d).map(|j| format!("x{j}")));
        h.extend(
            ["metric", "value", "std_err", "empty_rate", "replication_count"]
                .iter()
                .map(|s| s.to_string()),
        );
        h
    }

    /// The `results.csv` bytes.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.csv_header())?;
        for r in &self.rows {
            let mut rec = vec![r.mode.to_string(), r.n.to_string(), r.query_id.clone()];
            if r.x.is_empty() {
                rec.extend(std::iter::repeat_n(String::new(), self.d));
            } else {
                rec.extend(r.x.iter().map(|v| format_float(*v)));
            }
            rec.push(r.metric.clone());
            rec.push(format_float(r.value));
            rec.push(format_float(r.std_err));
            rec.push(format_float(r.empty_rate));
            rec.push(r.replication_count.to_string());
            w.write_record(&rec)?;
        }
        w.into_inner()
            .map_err(|e| std::io::Error::other(e.to_string()).into())
    }

    /// The `summary.json` document: rows keyed by mode, `n` and query id.
    pub fn summary(&self) -> Value {
        let mut by_n: BTreeMap<String, BTreeMap<String, Value>> = BTreeMap::new();
        for r in &self.rows {
            let entry = by_n
                .entry(r.n.to_string())
                .or_default()
                .entry(r.query_id.clone())
                .or_insert_with(|| json!({ "x": r.x, "metrics": {} }));
            entry["metrics"][&r.metric] = json!({
                "value": r.value,
                "std_err": r.std_err,
                "empty_rate": r.empty_rate,
                "replication_count": r.replication_count,
            });
        }
        json!({
            "mode": self.mode,
            "columns": self.csv_header(),
            "results": { self.mode.as_str(): by_n },
            "trends": self.trends,
            "notes": self.notes,
        })
    }
}

/// Provenance record written next to the results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub tool_version: String,
    pub master_seed: u64,
    pub output_paths: Vec<PathBuf>,
}

pub const RESULTS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const CONFIG_FILE: &str = "config.json";

/// Writes `results.csv`, `summary.json`, the canonical `config.json` and
/// `manifest.json` into `out_dir`, creating it if needed.
pub fn write_artifacts(
    cfg: &ExperimentConfig,
    report: &ConvergenceReport,
    out_dir: &Path,
    tool_version: &str,
) -> Result<RunManifest> {
    std::fs::create_dir_all(out_dir)?;
    let canonical = cfg.canonical_json()?;
    let paths: Vec<PathBuf> = [RESULTS_FILE, SUMMARY_FILE, CONFIG_FILE, MANIFEST_FILE]
        .iter()
        .map(|f| out_dir.join(f))
        .collect();
    std::fs::write(&paths[0], report.to_csv()?)?;
    let mut summary = serde_json::to_string_pretty(&report.summary())?;
    summary.push('\n');
    std::fs::write(&paths[1], summary)?;
    std::fs::write(&paths[2], &canonical)?;
    let manifest = RunManifest {
        config_hash: sha256_hex(canonical.as_bytes()),
        tool_version: tool_version.to_string(),
        master_seed: cfg.master_seed,
        output_paths: paths.clone(),
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(&paths[3], text)?;
    Ok(manifest)
}

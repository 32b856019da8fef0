use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{prediction_size, TruthDescriptor};
use crate::splitters::{RegularAdaptive, SplitterConfig};
use crate::weights::WeightScheme;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Pointwise,
    Uniform,
    Lp,
    NestedPath,
    Forest,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Pointwise => "pointwise",
            Mode::Uniform => "uniform",
            Mode::Lp => "lp",
            Mode::NestedPath => "nested_path",
            Mode::Forest => "forest",
        }
    }

    /// Experiment index used in stream derivation.
    pub fn stream_tag(self) -> u64 {
        match self {
            Mode::Pointwise => 1,
            Mode::Uniform => 2,
            Mode::Lp => 3,
            Mode::NestedPath => 4,
            Mode::Forest => 5,
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BootstrapConfig {
    pub i_scheme: WeightScheme,
    pub j_scheme: WeightScheme,
}

fn default_ratio() -> f64 {
    0.5
}

fn default_p_norms() -> Vec<f64> {
    vec![1.0, 2.0]
}

fn default_forest_size() -> usize {
    1
}

fn default_resolution() -> usize {
    33
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub truth: TruthDescriptor,
    pub d: usize,
    pub splitter: SplitterConfig,
    #[serde(default = "default_ratio")]
    pub honest_ratio: f64,
    #[serde(default)]
    pub bootstrap: Option<BootstrapConfig>,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    #[serde(default)]
    pub query_points: Vec<Vec<f64>>,
    #[serde(default = "default_resolution")]
    pub sup_grid_resolution: usize,
    #[serde(default = "default_p_norms")]
    pub p_norms: Vec<f64>,
    #[serde(default = "default_forest_size")]
    pub forest_size: usize,
    #[serde(default)]
    pub nested_path: bool,
    pub master_seed: u64,
}

fn field_err<T>(field: impl Into<String>, e: Error) -> Result<T> {
    let reason = match e {
        Error::InvalidParameter { name, reason } => format!("{name}: {reason}"),
        Error::Infeasible(r) => r,
        other => other.to_string(),
    };
    Err(Error::config(field, reason))
}

impl ExperimentConfig {
    /// Parses and validates a JSON config.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sizes `(n_I, n_J)` of the honest split at sample size `n`.
    pub fn split_sizes(&self, n: usize) -> (usize, usize) {
        let n_i = prediction_size(n, self.honest_ratio);
        (n_i, n - n_i)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.d;
        if d == 0 {
            return Err(Error::config("d", "must be at least 1"));
        }
        if let Err(e) = self.truth.validate(d) {
            return field_err("truth", e);
        }
        if let Err(e) = self.splitter.validate(d) {
            return field_err("splitter", e);
        }
        if let SplitterConfig::RegularAdaptive {
            alpha, feature_floor, ..
        } = &self.splitter
        {
            if let Err(e) = RegularAdaptive::new(*alpha, feature_floor.clone(), d) {
                return field_err("splitter", e);
            }
        }
        if !(self.honest_ratio > 0.0 && self.honest_ratio < 1.0) {
            return Err(Error::config(
                "honest_ratio",
                format!("must lie in (0, 1), got {}", self.honest_ratio),
            ));
        }
        if self.n_grid.is_empty() {
            return Err(Error::config("n_grid", "must not be empty"));
        }
        if let Some(w) = self.n_grid.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::config(
                "n_grid",
                format!("must be strictly ascending, found {} followed by {}", w[0], w[1]),
            ));
        }
        if self.n_grid[0] < 4 {
            return Err(Error::config("n_grid", "sample sizes must be at least 4"));
        }
        if self.replications == 0 {
            return Err(Error::config("replications", "must be at least 1"));
        }
        for (q, x) in self.query_points.iter().enumerate() {
            if x.len() != d {
                return Err(Error::config(
                    "query_points",
                    format!("point {q} has {} coordinates, expected {d}", x.len()),
                ));
            }
            if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::config(
                    "query_points",
                    format!("point {q} lies outside [0,1]^{d}"),
                ));
            }
        }
        let needs_queries = !matches!(self.mode, Mode::Uniform);
        if needs_queries && self.query_points.is_empty() {
            return Err(Error::config(
                "query_points",
                format!("mode {} needs at least one query point", self.mode),
            ));
        }
        if self.mode == Mode::Uniform && self.sup_grid_resolution < 2 {
            return Err(Error::config("sup_grid_resolution", "must be at least 2"));
        }
        if self.mode == Mode::Lp {
            if self.p_norms.is_empty() {
                return Err(Error::config("p_norms", "must not be empty"));
            }
            if let Some(p) = self.p_norms.iter().find(|p| !(**p >= 1.0 && p.is_finite())) {
                return Err(Error::config(
                    "p_norms",
                    format!("every p must be at least 1, got {p}"),
                ));
            }
        }
        if self.nested_path != (self.mode == Mode::NestedPath) {
            return Err(Error::config(
                "nested_path",
                "must be true exactly when mode is nested_path",
            ));
        }
        if self.forest_size == 0 {
            return Err(Error::config("forest_size", "must be at least 1"));
        }
        if self.mode == Mode::Forest && self.bootstrap.is_none() {
            return Err(Error::config(
                "bootstrap",
                "forest mode needs I and J weight schemes",
            ));
        }
        for &n in &self.n_grid {
            let (n_i, n_j) = self.split_sizes(n);
            if let Err(e) = self.splitter.schedule().evaluate(n_i) {
                return field_err("splitter.schedule", e);
            }
            if let Some(b) = &self.bootstrap {
                if let Err(e) = b.i_scheme.trials(n_i) {
                    return field_err("bootstrap.i_scheme", e);
                }
                if let Err(e) = b.j_scheme.trials(n_j) {
                    return field_err("bootstrap.j_scheme", e);
                }
            }
        }
        Ok(())
    }

    /// Canonical JSON: sorted keys, no insignificant whitespace.
    pub fn canonical_json(&self) -> Result<String> {
        let value = serde_json::to_value(self)?;
        Ok(serde_json::to_string(&value)?)
    }

    /// Hex SHA-256 of [`Self::canonical_json`].
    pub fn config_hash(&self) -> Result<String> {
        Ok(sha256_hex(self.canonical_json()?.as_bytes()))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// 1-based line of a config field in the source text: the first `"key"`
/// of the last path segment after the top-level key, or the top-level key.
pub fn field_line(text: &str, field: &str) -> Option<usize> {
    let line_of = |offset: usize| text[..offset].matches('\n').count() + 1;
    let top = format!("\"{}\"", field.split('.').next()?);
    let start = text.find(&top)?;
    let key = format!("\"{}\"", field.rsplit('.').next()?);
    let offset = text[start..].find(&key).map_or(start, |o| start + o);
    Some(line_of(offset))
}

//! Data model: samples on the unit cube, the synthetic data-generating
//! processes used by the experiments, and the honest split of a sample into
//! a prediction part and a growing part.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::snapped_ceil;
use crate::rng::{seeded, StreamRng};

/// Covariate density on `[0,1]^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensityKind {
    Uniform,
    /// `eps + (1 - eps) * prod_j 2 x_j`: a uniform floor mixed with a product
    /// of linear ramps. Bounded below by `eps` and above by `eps + (1 - eps) 2^d`.
    BoundedMixture {
        eps: f64,
    },
}

/// Regression function `E[Y | X = x]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegressionKind {
    Zero,
    /// `intercept + sum_j coeffs[j] x_j`.
    Linear {
        coeffs: Vec<f64>,
        #[serde(default)]
        intercept: f64,
    },
    /// `prod_j cos(2 pi freqs[j] x_j)`.
    SinusoidProduct {
        freqs: Vec<f64>,
    },
    /// `sin(2 pi freq x_1) + sum_j linear[j] x_j`.
    SineLinear {
        freq: f64,
        linear: Vec<f64>,
    },
}

/// Additive noise `Y - E[Y | X]`, independent of `X`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseKind {
    None,
    Gaussian { sigma: f64 },
    BoundedUniform { half_width: f64 },
}

/// The generating truth of a synthetic experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthDescriptor {
    pub density: DensityKind,
    pub regression: RegressionKind,
    pub noise: NoiseKind,
}

impl TruthDescriptor {
    pub fn new(density: DensityKind, regression: RegressionKind, noise: NoiseKind) -> Self {
        TruthDescriptor {
            density,
            regression,
            noise,
        }
    }

    /// Checks parameter ranges and that vector parameters have length `d`.
    pub fn validate(&self, d: usize) -> Result<()> {
        if d == 0 {
            return Err(Error::param("d", "dimension must be at least 1"));
        }
        if let DensityKind::BoundedMixture { eps } = self.density {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(Error::param("eps", format!("must lie in (0,1), got {eps}")));
            }
        }
        let check_len = |name: &'static str, v: &[f64]| {
            if v.len() != d {
                Err(Error::param(
                    name,
                    format!("expected {d} entries, got {}", v.len()),
                ))
            } else if v.iter().any(|c| !c.is_finite()) {
                Err(Error::param(name, "entries must be finite"))
            } else {
                Ok(())
            }
        };
        match &self.regression {
            RegressionKind::Zero => {}
            RegressionKind::Linear { coeffs, intercept } => {
                check_len("coeffs", coeffs)?;
                if !intercept.is_finite() {
                    return Err(Error::param("intercept", "must be finite"));
                }
            }
            RegressionKind::SinusoidProduct { freqs } => check_len("freqs", freqs)?,
            RegressionKind::SineLinear { freq, linear } => {
                check_len("linear", linear)?;
                if !freq.is_finite() {
                    return Err(Error::param("freq", "must be finite"));
                }
            }
        }
        match self.noise {
            NoiseKind::None => {}
            NoiseKind::Gaussian { sigma } if !(sigma > 0.0 && sigma.is_finite()) => {
                return Err(Error::param("sigma", format!("must be positive, got {sigma}")));
            }
            NoiseKind::BoundedUniform { half_width } if !(half_width > 0.0 && half_width.is_finite()) => {
                return Err(Error::param(
                    "half_width",
                    format!("must be positive, got {half_width}"),
                ));
            }
            _ => {}
        }
        Ok(())
    }

    /// Covariate density `f(x)`.
    pub fn density(&self, x: &[f64]) -> f64 {
        match self.density {
            DensityKind::Uniform => 1.0,
            DensityKind::BoundedMixture { eps } => {
                eps + (1.0 - eps) * x.iter().map(|v| 2.0 * v).product::<f64>()
            }
        }
    }

    /// Constants `(eps, C)` with `eps <= f <= C` on `[0,1]^d`.
    pub fn density_bounds(&self, d: usize) -> (f64, f64) {
        match self.density {
            DensityKind::Uniform => (1.0, 1.0),
            DensityKind::BoundedMixture { eps } => (eps, eps + (1.0 - eps) * 2f64.powi(d as i32)),
        }
    }

    /// `P(a < X_j <= b)` under the covariate law, by exact integration.
    pub fn interval_probability(&self, a: f64, b: f64) -> f64 {
        match self.density {
            DensityKind::Uniform => b - a,
            DensityKind::BoundedMixture { eps } => eps * (b - a) + (1.0 - eps) * (b * b - a * a),
        }
    }

    /// `E[Y | X = x]`.
    pub fn conditional_mean(&self, x: &[f64]) -> f64 {
        match &self.regression {
            RegressionKind::Zero => 0.0,
            RegressionKind::Linear { coeffs, intercept } => {
                intercept + coeffs.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
            }
            RegressionKind::SinusoidProduct { freqs } => freqs
                .iter()
                .zip(x)
                .map(|(f, v)| (2.0 * PI * f * v).cos())
                .product(),
            RegressionKind::SineLinear { freq, linear } => {
                (2.0 * PI * freq * x[0]).sin() + linear.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
            }
        }
    }

    /// The regression numerator `E[Y | X = x] f(x)`, the target of the
    /// Priestley–Chao style estimator.
    pub fn numerator(&self, x: &[f64]) -> f64 {
        self.conditional_mean(x) * self.density(x)
    }

    /// A Lipschitz constant of `E[Y | X = x]` in the Euclidean norm.
    pub fn lipschitz(&self) -> f64 {
        let norm = |v: &[f64]| v.iter().map(|c| c * c).sum::<f64>().sqrt();
        match &self.regression {
            RegressionKind::Zero => 0.0,
            RegressionKind::Linear { coeffs, .. } => norm(coeffs),
            RegressionKind::SinusoidProduct { freqs } => 2.0 * PI * norm(freqs),
            RegressionKind::SineLinear { freq, linear } => {
                let first = 2.0 * PI * freq.abs() + linear.first().map_or(0.0, |c| c.abs());
                let rest: f64 = linear.iter().skip(1).map(|c| c * c).sum();
                (first * first + rest).sqrt()
            }
        }
    }

    /// `sup_x |E[Y | X = x]|`.
    pub fn mean_bound(&self) -> f64 {
        match &self.regression {
            RegressionKind::Zero => 0.0,
            RegressionKind::Linear { coeffs, intercept } => {
                let hi: f64 = coeffs.iter().map(|c| c.max(0.0)).sum();
                let lo: f64 = coeffs.iter().map(|c| c.min(0.0)).sum();
                (intercept + hi).abs().max((intercept + lo).abs())
            }
            RegressionKind::SinusoidProduct { .. } => 1.0,
            RegressionKind::SineLinear { linear, .. } => 1.0 + linear.iter().map(|c| c.abs()).sum::<f64>(),
        }
    }

    pub fn noise_variance(&self) -> f64 {
        match self.noise {
            NoiseKind::None => 0.0,
            NoiseKind::Gaussian { sigma } => sigma * sigma,
            NoiseKind::BoundedUniform { half_width } => half_width * half_width / 3.0,
        }
    }

    /// `K` with `E[Y^2 | X = x] <= K` for all `x`.
    pub fn second_moment_bound(&self) -> f64 {
        self.mean_bound().powi(2) + self.noise_variance()
    }

    /// Moment generating function of the noise.
    pub fn noise_mgf(&self, t: f64) -> f64 {
        match self.noise {
            NoiseKind::None => 1.0,
            NoiseKind::Gaussian { sigma } => (0.5 * sigma * sigma * t * t).exp(),
            NoiseKind::BoundedUniform { half_width } => {
                let z = half_width * t;
                if z == 0.0 {
                    1.0
                } else {
                    z.sinh() / z
                }
            }
        }
    }

    fn sample_point(&self, d: usize, rng: &mut StreamRng, out: &mut Vec<f64>) {
        match self.density {
            DensityKind::Uniform => out.extend((0..d).map(|_| rng.random::<f64>())),
            DensityKind::BoundedMixture { eps } => {
                if rng.random::<f64>() < eps {
                    out.extend((0..d).map(|_| rng.random::<f64>()));
                } else {
                    // Inverse CDF of the ramp density 2x.
                    out.extend((0..d).map(|_| rng.random::<f64>().sqrt()));
                }
            }
        }
    }
}

/// `E[exp(t Y) | X = x]` in closed form.
pub fn conditional_mgf(truth: &TruthDescriptor, x: &[f64], t: f64) -> Result<f64> {
    let value = (t * truth.conditional_mean(x)).exp() * truth.noise_mgf(t);
    if !value.is_finite() {
        return Err(Error::param(
            "t",
            format!("moment generating function is not finite at t = {t}"),
        ));
    }
    Ok(value)
}

/// `n` observations in `[0,1]^d` with real responses, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    responses: Vec<f64>,
    d: usize,
}

impl Dataset {
    pub fn new(features: Vec<f64>, responses: Vec<f64>, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::param("d", "dimension must be at least 1"));
        }
        if features.len() != responses.len() * d {
            return Err(Error::param(
                "features",
                format!(
                    "{} feature values do not match {} responses in dimension {d}",
                    features.len(),
                    responses.len()
                ),
            ));
        }
        if let Some(v) = features.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::param("features", format!("value {v} outside [0,1]")));
        }
        Ok(Dataset {
            features,
            responses,
            d,
        })
    }

    /// An empty sample of dimension `d`.
    pub fn empty(d: usize) -> Self {
        Dataset {
            features: Vec::new(),
            responses: Vec::new(),
            d,
        }
    }

    pub fn n(&self) -> usize {
        self.responses.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.features.chunks_exact(self.d)
    }

    pub fn response(&self, i: usize) -> f64 {
        self.responses[i]
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    /// The observations at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.d);
        let mut responses = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            responses.push(self.responses[i]);
        }
        Dataset {
            features,
            responses,
            d: self.d,
        }
    }

    /// The first `n` observations.
    pub fn prefix(&self, n: usize) -> Dataset {
        let n = n.min(self.n());
        Dataset {
            features: self.features[..n * self.d].to_vec(),
            responses: self.responses[..n].to_vec(),
            d: self.d,
        }
    }

    pub fn with_responses(&self, responses: Vec<f64>) -> Result<Dataset> {
        Dataset::new(self.features.clone(), responses, self.d)
    }
}

/// Draws `n` iid observations from `truth` in dimension `d`.
pub fn generate_dataset(truth: &TruthDescriptor, n: usize, d: usize, seed: u64) -> Result<Dataset> {
    generate_with(truth, n, d, &mut seeded(seed))
}

/// As [`generate_dataset`], drawing from `rng`. Observations are drawn one at
/// a time, so the first `n` rows of a larger draw from the same stream equal a
/// draw of size `n`.
pub fn generate_with(truth: &TruthDescriptor, n: usize, d: usize, rng: &mut StreamRng) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::param("n", "need at least one observation"));
    }
    truth.validate(d)?;
    let gaussian = match truth.noise {
        NoiseKind::Gaussian { sigma } => {
            Some(Normal::new(0.0, sigma).map_err(|e| Error::param("sigma", e.to_string()))?)
        }
        _ => None,
    };
    let bounded = match truth.noise {
        NoiseKind::BoundedUniform { half_width } => Some(
            Uniform::new_inclusive(-half_width, half_width)
                .map_err(|e| Error::param("half_width", e.to_string()))?,
        ),
        _ => None,
    };

    let mut features = Vec::with_capacity(n * d);
    let mut responses = Vec::with_capacity(n);
    for _ in 0..n {
        let start = features.len();
        truth.sample_point(d, rng, &mut features);
        let mean = truth.conditional_mean(&features[start..]);
        let noise = match (&gaussian, &bounded) {
            (Some(g), _) => g.sample(rng),
            (_, Some(u)) => u.sample(rng),
            _ => 0.0,
        };
        responses.push(mean + noise);
    }
    Ok(Dataset {
        features,
        responses,
        d,
    })
}

/// Disjoint prediction (`I`) and growing (`J`) index sets covering `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HonestPartition {
    pub i_indices: Vec<usize>,
    pub j_indices: Vec<usize>,
    pub n_i: usize,
    pub n_j: usize,
}

impl HonestPartition {
    /// `(I-sample, J-sample)` of `data`.
    pub fn apply(&self, data: &Dataset) -> (Dataset, Dataset) {
        (data.subset(&self.i_indices), data.subset(&self.j_indices))
    }
}

fn check_ratio(ratio: f64) -> Result<()> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::param("ratio", format!("must lie in (0,1), got {ratio}")));
    }
    Ok(())
}

/// Size of the prediction part: `ceil(ratio * n)`, kept below `n` so that
/// the growing part is never empty.
pub fn prediction_size(n: usize, ratio: f64) -> usize {
    (snapped_ceil(ratio * n as f64) as usize).clamp(1, n.saturating_sub(1).max(1))
}

/// Random honest split: a uniformly random permutation cut at `n_i`.
/// Both index lists are returned in increasing order.
pub fn honest_split(n: usize, ratio: f64, seed: u64) -> Result<HonestPartition> {
    honest_split_with(n, ratio, &mut seeded(seed))
}

pub fn honest_split_with(n: usize, ratio: f64, rng: &mut StreamRng) -> Result<HonestPartition> {
    check_ratio(ratio)?;
    if n < 2 {
        return Err(Error::param("n", "need at least two observations to split"));
    }
    let n_i = prediction_size(n, ratio);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut i_indices = perm[..n_i].to_vec();
    let mut j_indices = perm[n_i..].to_vec();
    i_indices.sort_unstable();
    j_indices.sort_unstable();
    Ok(HonestPartition {
        n_i,
        n_j: n - n_i,
        i_indices,
        j_indices,
    })
}

/// Deterministic interleaved split that is stable under appending
/// observations: observation `k` (0-based) joins `I` iff
/// `ceil(ratio (k+1)) > ceil(ratio k)`. Every prefix of length `n` has
/// exactly `ceil(ratio n)` prediction observations.
pub fn honest_split_nested(n: usize, ratio: f64) -> Result<HonestPartition> {
    check_ratio(ratio)?;
    if n < 2 {
        return Err(Error::param("n", "need at least two observations to split"));
    }
    let mut i_indices = Vec::new();
    let mut j_indices = Vec::new();
    for k in 0..n {
        let before = snapped_ceil(ratio * k as f64);
        let after = snapped_ceil(ratio * (k + 1) as f64);
        if after > before {
            i_indices.push(k);
        } else {
            j_indices.push(k);
        }
    }
    Ok(HonestPartition {
        n_i: i_indices.len(),
        n_j: j_indices.len(),
        i_indices,
        j_indices,
    })
}

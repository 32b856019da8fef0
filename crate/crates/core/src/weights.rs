//! Exchangeable bootstrap weight schemes, their closed-form moments and
//! moment generating functions, and a Monte Carlo moment oracle.

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{mean, pairwise_sum, std_err};
use crate::rng::{seeded, StreamRng};
use crate::schedule::Schedule;

/// Law of iid wild-bootstrap weights. Both laws have unit mean.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WildLaw {
    Poisson,
    LogNormalUnitMean { sigma: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightScheme {
    /// Counts of `m_n` draws with replacement from `n` equally likely cells.
    Multinomial { m_schedule: Schedule },
    /// Indicators of a subsample of size `m_n` drawn without replacement.
    WithoutReplacement { m_schedule: Schedule },
    /// Independent draws from `law`.
    Wild { law: WildLaw },
}

impl WeightScheme {
    pub fn multinomial(m: usize) -> Self {
        WeightScheme::Multinomial {
            m_schedule: Schedule::Fixed { value: m },
        }
    }

    pub fn without_replacement(m: usize) -> Self {
        WeightScheme::WithoutReplacement {
            m_schedule: Schedule::Fixed { value: m },
        }
    }

    pub fn wild_poisson() -> Self {
        WeightScheme::Wild {
            law: WildLaw::Poisson,
        }
    }

    /// Number of trials `m_n` at sample size `n` (`None` for wild schemes).
    pub fn trials(&self, n: usize) -> Result<Option<usize>> {
        if n == 0 {
            return Err(Error::param("n", "weights need a nonempty sample"));
        }
        let (schedule, bounded) = match self {
            WeightScheme::Multinomial { m_schedule } => (m_schedule, false),
            WeightScheme::WithoutReplacement { m_schedule } => (m_schedule, true),
            WeightScheme::Wild { law } => {
                if let WildLaw::LogNormalUnitMean { sigma } = law {
                    if !(*sigma > 0.0 && sigma.is_finite()) {
                        return Err(Error::param("sigma", format!("must be positive, got {sigma}")));
                    }
                }
                return Ok(None);
            }
        };
        if !schedule.is_subsample() {
            return Err(Error::param(
                "m_schedule",
                "expected a subsample or fixed schedule",
            ));
        }
        let m = match schedule {
            Schedule::Fixed { value } => *value,
            s => s.evaluate(n.max(2))?,
        };
        if m == 0 {
            return Err(Error::param("m", "need at least one trial"));
        }
        if bounded && m > n {
            return Err(Error::param(
                "m",
                format!("subsample without replacement needs m_n <= n, got m_n = {m} > n = {n}"),
            ));
        }
        Ok(Some(m))
    }

    /// `E[W_1]` at sample size `n`.
    pub fn mean_weight(&self, n: usize) -> Result<f64> {
        Ok(analytic_moments(self, n)?.mean_w1)
    }
}

/// Nonnegative weights, one per observation.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector {
    pub w: Vec<f64>,
}

impl WeightVector {
    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    /// Adjusted weights `W_i / E[W_1]`.
    pub fn adjusted(&self, mean_w: f64) -> Vec<f64> {
        self.w.iter().map(|w| w / mean_w).collect()
    }
}

pub fn draw_weights(scheme: &WeightScheme, n: usize, seed: u64) -> Result<WeightVector> {
    draw_weights_with(scheme, n, &mut seeded(seed))
}

pub fn draw_weights_with(scheme: &WeightScheme, n: usize, rng: &mut StreamRng) -> Result<WeightVector> {
    let trials = scheme.trials(n)?;
    let w = match (scheme, trials) {
        (WeightScheme::Multinomial { .. }, Some(m)) => {
            let mut w = vec![0.0; n];
            for _ in 0..m {
                w[rng.random_range(0..n)] += 1.0;
            }
            w
        }
        (WeightScheme::WithoutReplacement { .. }, Some(m)) => {
            let mut w = vec![0.0; n];
            for i in sample_indices(rng, n, m) {
                w[i] = 1.0;
            }
            w
        }
        (WeightScheme::Wild { law }, _) => match law {
            WildLaw::Poisson => {
                let p = Poisson::new(1.0).map_err(|e| Error::param("law", e.to_string()))?;
                (0..n).map(|_| p.sample(rng)).collect()
            }
            WildLaw::LogNormalUnitMean { sigma } => {
                let z = Normal::new(0.0, 1.0).expect("standard normal");
                (0..n)
                    .map(|_| (sigma * z.sample(rng) - 0.5 * sigma * sigma).exp())
                    .collect()
            }
        },
        _ => unreachable!("trials() returns a count for trial-based schemes"),
    };
    Ok(WeightVector { w })
}

/// Moments of an exchangeable weight vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    /// `E[W_1]`
    pub mean_w1: f64,
    /// `E[W_1^2]`
    pub second_w1: f64,
    /// `E[W_1 W_2]`
    pub cross_w1w2: f64,
    /// `E[W_1^2] / E[W_1]`, whose limit is `L_{2,1}`
    pub l21_ratio: f64,
    /// `E[W_1 W_2] / E[W_1]^2`
    pub correlation_ratio: f64,
    /// `E[(W~_1 - 1)(W~_2 - 1)]` for the adjusted weights `W~ = W / E[W_1]`
    pub adjusted_mixed: f64,
    /// `E[(W_1 - E W_1)^4]`
    pub central4: f64,
    /// `E[(W_1 - E W_1)^2]`
    pub central2: f64,
}

impl MomentReport {
    fn from_parts(mean: f64, second: f64, cross: f64, central2: f64, central4: f64) -> Self {
        MomentReport {
            mean_w1: mean,
            second_w1: second,
            cross_w1w2: cross,
            l21_ratio: second / mean,
            correlation_ratio: cross / (mean * mean),
            adjusted_mixed: (cross - mean * mean) / (mean * mean),
            central4,
            central2,
        }
    }

    /// Field names and values in declaration order.
    pub fn fields(&self) -> [(&'static str, f64); 8] {
        [
            ("mean_w1", self.mean_w1),
            ("second_w1", self.second_w1),
            ("cross_w1w2", self.cross_w1w2),
            ("l21_ratio", self.l21_ratio),
            ("correlation_ratio", self.correlation_ratio),
            ("adjusted_mixed", self.adjusted_mixed),
            ("central4", self.central4),
            ("central2", self.central2),
        ]
    }
}

/// Closed-form moments of the scheme at sample size `n`.
pub fn analytic_moments(scheme: &WeightScheme, n: usize) -> Result<MomentReport> {
    let trials = scheme.trials(n)?;
    let nf = n as f64;
    let report = match (scheme, trials) {
        (WeightScheme::Multinomial { .. }, Some(m)) => {
            // W_1 ~ Bin(m, 1/n); Cov(W_1, W_2) = -m / n^2.
            let m = m as f64;
            let p = 1.0 / nf;
            let q = 1.0 - p;
            let mean = m / nf;
            let second = mean * (1.0 - 1.0 / nf + mean);
            let cross = m * (m - 1.0) / (nf * nf);
            let c2 = m * p * q;
            let c4 = m * p * q * (1.0 + 3.0 * (m - 2.0) * p * q);
            let mut r = MomentReport::from_parts(mean, second, cross, c2, c4);
            r.adjusted_mixed = -1.0 / m;
            r
        }
        (WeightScheme::WithoutReplacement { .. }, Some(m)) => {
            // W_1 ~ Bernoulli(m / n).
            let m = m as f64;
            let p = m / nf;
            let cross = if n > 1 {
                m * (m - 1.0) / (nf * (nf - 1.0))
            } else {
                p * p
            };
            let c2 = p * (1.0 - p);
            let c4 = c2 * (1.0 - 3.0 * c2);
            let mut r = MomentReport::from_parts(p, p, cross, c2, c4);
            r.adjusted_mixed = if n > 1 { -(nf - m) / (m * (nf - 1.0)) } else { 0.0 };
            r
        }
        (WeightScheme::Wild { law }, _) => {
            let (m1, m2, m3, m4) = match law {
                WildLaw::Poisson => (1.0, 2.0, 5.0, 15.0),
                WildLaw::LogNormalUnitMean { sigma } => {
                    let s2 = sigma * sigma;
                    let raw = |k: f64| (0.5 * k * (k - 1.0) * s2).exp();
                    (1.0, raw(2.0), raw(3.0), raw(4.0))
                }
            };
            let c2 = m2 - m1 * m1;
            let c4 = m4 - 4.0 * m3 * m1 + 6.0 * m2 * m1 * m1 - 3.0 * m1.powi(4);
            let mut r = MomentReport::from_parts(m1, m2, m1 * m1, c2, c4);
            r.adjusted_mixed = 0.0;
            r
        }
        _ => unreachable!("trials() returns a count for trial-based schemes"),
    };
    Ok(report)
}

/// `E[exp(t Z)]` of the unit-mean log-normal `exp(sigma N - sigma^2 / 2)`,
/// finite only for `t <= 0`; computed by Simpson's rule in the normal scale.
fn lognormal_mgf(sigma: f64, t: f64) -> f64 {
    const STEPS: usize = 4000;
    const HALF_RANGE: f64 = 12.0;
    let h = 2.0 * HALF_RANGE / STEPS as f64;
    let f = |z: f64| {
        let phi = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
        phi * (t * (sigma * z - 0.5 * sigma * sigma).exp()).exp()
    };
    let mut acc = f(-HALF_RANGE) + f(HALF_RANGE);
    for k in 1..STEPS {
        let z = -HALF_RANGE + k as f64 * h;
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(z);
    }
    acc * h / 3.0
}

/// `(kappa_{W_1}(t) - 1) / E[W_1]` where `kappa` is the moment generating function of `W_1`.
pub fn kappa_ratio(scheme: &WeightScheme, n: usize, t: f64) -> Result<f64> {
    let trials = scheme.trials(n)?;
    let nf = n as f64;
    let value = match (scheme, trials) {
        (WeightScheme::Multinomial { .. }, Some(m)) => {
            let m = m as f64;
            // ((e^t + n - 1) / n)^m - 1, evaluated without cancellation
            (m * (t.exp_m1() / nf).ln_1p()).exp_m1() / (m / nf)
        }
        (WeightScheme::WithoutReplacement { .. }, Some(m)) => {
            let p = m as f64 / nf;
            p * t.exp_m1() / p
        }
        (WeightScheme::Wild { law }, _) => match law {
            WildLaw::Poisson => t.exp_m1().exp_m1(),
            WildLaw::LogNormalUnitMean { sigma } => {
                if t > 0.0 {
                    return Err(Error::param(
                        "t",
                        "the log-normal moment generating function is infinite for t > 0",
                    ));
                }
                lognormal_mgf(*sigma, t) - 1.0
            }
        },
        _ => unreachable!("trials() returns a count for trial-based schemes"),
    };
    if !value.is_finite() {
        return Err(Error::param(
            "t",
            format!("moment generating function overflows at t = {t}"),
        ));
    }
    Ok(value)
}

/// Limit, as `n -> inf` with `m_n = n`, of the upper bound on the
/// multinomial `kappa_ratio`: `t + (t^2/2) exp(|t| + e^|t| - 1) (1 + e^|t|)`.
pub fn multinomial_kappa_limit_bound(t: f64) -> f64 {
    let a = t.abs();
    t + 0.5 * t * t * (a + a.exp() - 1.0).exp() * (1.0 + a.exp())
}

/// Monte Carlo moments with standard errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMoments {
    pub report: MomentReport,
    pub std_err: MomentReport,
    pub reps: usize,
}

#[derive(Default, Clone, Copy)]
struct RawSums {
    m1: f64,
    m2: f64,
    m3: f64,
    m4: f64,
    cross: f64,
}

fn report_from_raw(r: &RawSums) -> MomentReport {
    let c2 = r.m2 - r.m1 * r.m1;
    let c4 = r.m4 - 4.0 * r.m3 * r.m1 + 6.0 * r.m2 * r.m1 * r.m1 - 3.0 * r.m1.powi(4);
    MomentReport::from_parts(r.m1, r.m2, r.cross, c2, c4)
}

fn average(raws: &[RawSums]) -> RawSums {
    let pick = |f: fn(&RawSums) -> f64| mean(&raws.iter().map(f).collect::<Vec<_>>());
    RawSums {
        m1: pick(|r| r.m1),
        m2: pick(|r| r.m2),
        m3: pick(|r| r.m3),
        m4: pick(|r| r.m4),
        cross: pick(|r| r.cross),
    }
}

const BATCHES: usize = 100;

/// Sample moments over `reps` independent draws. Within a draw, moments of
/// `W_1` average over all indices and `E[W_1 W_2]` over all ordered pairs,
/// which exchangeability permits. Standard errors come from batch means.
pub fn empirical_moments(
    scheme: &WeightScheme,
    n: usize,
    reps: usize,
    seed: u64,
) -> Result<EmpiricalMoments> {
    if reps == 0 {
        return Err(Error::param("reps", "need at least one replication"));
    }
    if n < 2 {
        return Err(Error::param("n", "pair moments need n >= 2"));
    }
    let mut rng = seeded(seed);
    let nf = n as f64;
    let mut per_rep = Vec::with_capacity(reps);
    for _ in 0..reps {
        let w = draw_weights_with(scheme, n, &mut rng)?.w;
        let pow = |k: i32| pairwise_sum(&w.iter().map(|v| v.powi(k)).collect::<Vec<_>>());
        let (s1, s2) = (pow(1), pow(2));
        per_rep.push(RawSums {
            m1: s1 / nf,
            m2: s2 / nf,
            m3: pow(3) / nf,
            m4: pow(4) / nf,
            cross: (s1 * s1 - s2) / (nf * (nf - 1.0)),
        });
    }
    let report = report_from_raw(&average(&per_rep));

    let batches = BATCHES.min(reps);
    let std_err_report = if batches < 2 {
        MomentReport::from_parts(0.0, 0.0, 0.0, 0.0, 0.0)
    } else {
        let size = reps / batches;
        let batch_reports: Vec<MomentReport> = (0..batches)
            .map(|b| report_from_raw(&average(&per_rep[b * size..(b + 1) * size])))
            .collect();
        let se = |f: fn(&MomentReport) -> f64| {
            // batch means of size reps/batches; scale to the full-sample mean
            let v: Vec<f64> = batch_reports.iter().map(f).collect();
            let se = std_err(&v);
            if se.is_finite() {
                se
            } else {
                0.0
            }
        };
        MomentReport {
            mean_w1: se(|r| r.mean_w1),
            second_w1: se(|r| r.second_w1),
            cross_w1w2: se(|r| r.cross_w1w2),
            l21_ratio: se(|r| r.l21_ratio),
            correlation_ratio: se(|r| r.correlation_ratio),
            adjusted_mixed: se(|r| r.adjusted_mixed),
            central4: se(|r| r.central4),
            central2: se(|r| r.central2),
        }
    };
    Ok(EmpiricalMoments {
        report,
        std_err: std_err_report,
        reps,
    })
}

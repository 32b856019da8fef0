//! Small numeric helpers shared by the estimators and the experiment harness.

/// Tolerance used to snap a real that should be an integer (e.g. `log2(4096^(1/3))`)
/// before applying a ceiling or floor.
const SNAP: f64 = 1e-9;

pub fn snapped_ceil(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= SNAP * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

pub fn snapped_floor(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= SNAP * r.abs().max(1.0) {
        r
    } else {
        x.floor()
    }
}

/// Pairwise summation. The association order depends only on the slice length.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 16;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    pairwise_sum(values) / values.len() as f64
}

/// Unbiased sample variance; zero for fewer than two values.
pub fn variance(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let sq: Vec<f64> = values.iter().map(|v| (v - m) * (v - m)).collect();
    pairwise_sum(&sq) / (values.len() - 1) as f64
}

/// Standard error of the mean.
pub fn std_err(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    (variance(values) / values.len() as f64).sqrt()
}

/// Standard error of the sample variance, from the fourth central moment:
/// `sqrt((m4 - s^4 (n - 3)/(n - 1)) / n)`.
pub fn variance_std_err(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 4 {
        return 0.0;
    }
    let m = mean(values);
    let s2 = variance(values);
    let m4 = mean(&values.iter().map(|v| (v - m).powi(4)).collect::<Vec<_>>());
    let nf = n as f64;
    ((m4 - s2 * s2 * (nf - 3.0) / (nf - 1.0)) / nf).max(0.0).sqrt()
}

/// Distribution-free standard error of the `q`-quantile: the half-width of
/// the order-statistic 95% interval divided by 1.96.
pub fn quantile_std_err(values: &[f64], q: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let nf = n as f64;
    let c = 1.96 * (nf * q * (1.0 - q)).sqrt() / nf;
    let lo = quantile(values, (q - c).max(0.0));
    let hi = quantile(values, (q + c).min(1.0));
    (hi - lo) / (2.0 * 1.96)
}

/// Linear-interpolation quantile (type 7) of unsorted data.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// `ln(exp(a) + exp(b))` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

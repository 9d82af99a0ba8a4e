use crate::error::{Error, Result};
use crate::special::norm_cdf;

/// One-sample Kolmogorov–Smirnov statistic against `N(0, 1)`:
/// `D = max_i max(i/n − Φ(x_(i)), Φ(x_(i)) − (i−1)/n)`.
pub fn ks_statistic(sample: &[f64]) -> Result<f64> {
    if sample.len() < 2 {
        return Err(Error::Domain(format!(
            "KS statistic needs at least 2 observations, got {}",
            sample.len()
        )));
    }
    if sample.iter().any(|x| x.is_nan()) {
        return Err(Error::Domain("KS sample contains NaN".into()));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let d = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = norm_cdf(x);
            let above = (i + 1) as f64 / n - f;
            let below = f - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max);
    Ok(d)
}

/// Asymptotic 1% critical value `1.63/√n`.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

/// Linear-interpolation sample quantile (`(n−1)p` positions) of a sorted
/// slice.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn quantile(sample: &[f64], p: f64) -> f64 {
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile_sorted(&sorted, p)
}

pub fn median(sample: &[f64]) -> f64 {
    quantile(sample, 0.5)
}

/// Mean and unbiased sample variance.
pub fn mean_variance(sample: &[f64]) -> (f64, f64) {
    let n = sample.len() as f64;
    let mean = crate::sum::sum(sample.iter().copied()) / n;
    if sample.len() < 2 {
        return (mean, f64::NAN);
    }
    let ss = crate::sum::sum(sample.iter().map(|x| (x - mean) * (x - mean)));
    (mean, ss / (n - 1.0))
}

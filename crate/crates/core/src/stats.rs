//! Sample statistics, Kolmogorov–Smirnov tests and batch-means variance.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::specfun::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub count: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub skewness: f64,
    /// Excess kurtosis.
    pub kurtosis: f64,
}

impl Moments {
    pub fn stderr(&self) -> f64 {
        (self.variance / self.count as f64).sqrt()
    }

    /// Standard error of the sample variance (uses the fourth moment).
    pub fn variance_stderr(&self) -> f64 {
        let n = self.count as f64;
        self.variance * ((self.kurtosis + 2.0) / n + 2.0 / (n * (n - 1.0))).max(0.0).sqrt()
    }
}

pub fn moments(xs: &[f64]) -> Moments {
    let n = xs.len();
    let nf = n as f64;
    let mean = xs.iter().copied().collect::<CompensatedSum>().value() / nf;
    let (mut m2, mut m3, mut m4) = (CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new());
    for &x in xs {
        let d = x - mean;
        m2.add(d * d);
        m3.add(d * d * d);
        m4.add(d * d * d * d);
    }
    let (c2, c3, c4) = (m2.value() / nf, m3.value() / nf, m4.value() / nf);
    Moments {
        count: n,
        mean,
        variance: m2.value() / (nf - 1.0),
        skewness: c3 / c2.powf(1.5),
        kurtosis: c4 / (c2 * c2) - 3.0,
    }
}

/// Two-sided one-sample KS statistic `sup |F_n - F|`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic p-value of a KS statistic `d` from `n` samples, with the
/// `√n + 0.12 + 0.11/√n` small-sample correction.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut s = 0.0;
    for j in 1..=200 {
        let t = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        s += if j % 2 == 1 { t } else { -t };
        if t < 1e-18 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// Critical value of the KS statistic at level `alpha` (asymptotic).
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    let c = (-0.5 * (alpha / 2.0).ln()).sqrt();
    let sn = (n as f64).sqrt();
    c / (sn + 0.12 + 0.11 / sn)
}

/// KS test of `samples` against `N(mean, sd²)`.
pub fn ks_normal(samples: &[f64], mean: f64, sd: f64) -> (f64, f64) {
    let nd = Normal::new(mean, sd).expect("positive sd");
    let d = ks_statistic(samples, |x| nd.cdf(x));
    (d, ks_p_value(d, samples.len()))
}

/// Long-run variance estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LongRunVariance {
    pub estimate: f64,
    pub stderr: f64,
    pub batch_size: usize,
    pub batches: usize,
}

/// Non-overlapping batch means: `b · Var(batch means)`; the standard error
/// comes from the spread of the per-batch contributions.
pub fn batch_means(xs: &[f64], batch_size: usize) -> LongRunVariance {
    let batches = xs.len() / batch_size;
    assert!(batches >= 2, "need at least two batches");
    let used = &xs[..batches * batch_size];
    let mean = used.iter().copied().collect::<CompensatedSum>().value() / used.len() as f64;
    let b = batch_size as f64;
    let contrib: Vec<f64> = used
        .chunks(batch_size)
        .map(|c| {
            let m = c.iter().copied().collect::<CompensatedSum>().value() / b;
            b * (m - mean) * (m - mean)
        })
        .collect();
    let k = batches as f64;
    let est = contrib.iter().sum::<f64>() / (k - 1.0);
    let spread = moments(&contrib).variance.sqrt() * k / (k - 1.0);
    LongRunVariance {
        estimate: est,
        stderr: spread / k.sqrt(),
        batch_size,
        batches,
    }
}

/// Overlapping batch means (every window of length `batch_size`). The
/// standard error uses the asymptotic ratio `Var(OBM) = (2/3) Var(BM)`.
pub fn overlapping_batch_means(xs: &[f64], batch_size: usize) -> LongRunVariance {
    let n = xs.len();
    let b = batch_size;
    assert!(n >= 2 * b, "need at least two batches");
    let mean = xs.iter().copied().collect::<CompensatedSum>().value() / n as f64;
    let mut window: f64 = xs[..b].iter().sum();
    let mut acc = CompensatedSum::new();
    let windows = n - b + 1;
    for j in 0..windows {
        if j > 0 {
            window += xs[j + b - 1] - xs[j - 1];
        }
        let d = window / b as f64 - mean;
        acc.add(d * d);
    }
    let (nf, bf) = (n as f64, b as f64);
    let est = nf * bf * acc.value() / ((nf - bf + 1.0) * (nf - bf));
    let bm = batch_means(xs, b);
    LongRunVariance {
        estimate: est,
        stderr: bm.stderr * (2.0f64 / 3.0).sqrt(),
        batch_size: b,
        batches: n / b,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{exp1, stream_rng};

    #[test]
    fn moments_of_known_sample() {
        let m = moments(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        assert!((m.variance - 5.0 / 3.0).abs() < 1e-15);
        assert!(m.skewness.abs() < 1e-15);
    }

    #[test]
    fn ks_p_value_limits() {
        assert!(ks_p_value(0.0, 100) > 0.999);
        assert!(ks_p_value(0.5, 1000) < 1e-10);
        // 1% critical value at large n is about 1.628/√n
        let c = ks_critical(10_000, 0.01);
        assert!((c * 100.0 - 1.6276).abs() < 2e-3);
        assert!((ks_p_value(c, 10_000) - 0.01).abs() < 1e-3);
    }

    #[test]
    fn exponential_sample_passes_ks() {
        let mut r = stream_rng(3, 0);
        let xs: Vec<f64> = (0..20_000).map(|_| exp1(&mut r)).collect();
        let d = ks_statistic(&xs, |x| 1.0 - (-x).exp());
        assert!(ks_p_value(d, xs.len()) > 0.01);
    }

    #[test]
    fn batch_means_of_iid_noise() {
        let mut r = stream_rng(5, 0);
        let xs: Vec<f64> = (0..400_000).map(|_| exp1(&mut r)).collect();
        let bm = batch_means(&xs, 1000);
        assert!((bm.estimate - 1.0).abs() < 4.0 * bm.stderr, "{bm:?}");
        let obm = overlapping_batch_means(&xs, 1000);
        assert!((obm.estimate - 1.0).abs() < 4.0 * obm.stderr, "{obm:?}");
    }

    #[test]
    fn batch_means_of_ar1() {
        // x_k = φ x_{k-1} + e_k has long-run variance 1/(1-φ)² for unit noise
        let phi = 0.5;
        let mut r = stream_rng(9, 0);
        let mut x = 0.0;
        let xs: Vec<f64> = (0..400_000)
            .map(|_| {
                x = phi * x + (exp1(&mut r) - 1.0);
                x
            })
            .collect();
        let bm = batch_means(&xs, 2000);
        assert!((bm.estimate - 4.0).abs() < 4.0 * bm.stderr, "{bm:?}");
    }
}

//! Shared statistical machinery: normal distribution helpers, one-sample
//! Kolmogorov-Smirnov test against U(0,1), percentile bootstrap intervals,
//! and mergeable mean/variance accumulators.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::aux_rng;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    use statrs::distribution::ContinuousCDF;
    statrs::distribution::Normal::new(0.0, 1.0).unwrap().cdf(x)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    use statrs::distribution::ContinuousCDF;
    statrs::distribution::Normal::new(0.0, 1.0).unwrap().inverse_cdf(p)
}

/// Streaming (sum, sum of squares, count) accumulator with associative merge.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct MeanAcc {
    pub n: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl MeanAcc {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &MeanAcc) {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            f64::NAN
        } else {
            self.sum / self.n as f64
        }
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return f64::NAN;
        }
        let n = self.n as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    /// Standard error of the mean.
    pub fn se(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }
}

/// One-sample KS statistic of `samples` against the U(0,1) CDF.
pub fn ks_statistic_uniform(samples: &[f64]) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let cdf = x.clamp(0.0, 1.0);
        d = d.max((cdf - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - cdf).abs());
    }
    d
}

/// Asymptotic KS rejection threshold `c(alpha) / sqrt(n)`.
pub fn ks_threshold(alpha: f64, n: usize) -> f64 {
    let c = if alpha <= 0.01 {
        1.63
    } else if alpha <= 0.05 {
        1.36
    } else {
        1.22
    };
    c / (n as f64).sqrt()
}

/// Two-sided percentile bootstrap interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ci {
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
}

/// Percentile bootstrap CI for a ratio of means `mean(a) / mean(b)` over
/// per-path pairs. `B` resamples drawn from a dedicated aux stream.
pub fn bootstrap_ratio_ci(pairs: &[(f64, f64)], b_resamples: usize, seed: u64, level: f64) -> Ci {
    bootstrap_stat_ci(pairs.len(), b_resamples, seed, level, |idx| {
        let (mut num, mut den) = (0.0, 0.0);
        for &i in idx {
            num += pairs[i].0;
            den += pairs[i].1;
        }
        num / den
    })
}

/// Percentile bootstrap CI for a plain mean.
pub fn bootstrap_mean_ci(values: &[f64], b_resamples: usize, seed: u64, level: f64) -> Ci {
    bootstrap_stat_ci(values.len(), b_resamples, seed, level, |idx| {
        idx.iter().map(|&i| values[i]).sum::<f64>() / idx.len() as f64
    })
}

fn bootstrap_stat_ci(
    n: usize,
    b_resamples: usize,
    seed: u64,
    level: f64,
    stat: impl Fn(&[usize]) -> f64,
) -> Ci {
    assert!(n > 0 && b_resamples > 1);
    let mut rng = aux_rng(seed, 0xb007);
    let mut stats = Vec::with_capacity(b_resamples);
    let mut idx = vec![0usize; n];
    for _ in 0..b_resamples {
        for slot in idx.iter_mut() {
            *slot = rng.gen_range(0..n);
        }
        stats.push(stat(&idx));
    }
    stats.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let tail = (1.0 - level) / 2.0;
    let lo_idx = ((b_resamples as f64 * tail).floor() as usize).min(b_resamples - 1);
    let hi_idx = ((b_resamples as f64 * (1.0 - tail)).ceil() as usize).min(b_resamples) - 1;
    Ci { lo: stats[lo_idx], hi: stats[hi_idx], level }
}

/// Empirical quantile of `xs` (linear interpolation between order statistics).
pub fn quantile(xs: &mut [f64], q: f64) -> f64 {
    assert!(!xs.is_empty());
    xs.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let pos = q.clamp(0.0, 1.0) * (xs.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    xs[lo] * (1.0 - w) + xs[hi] * w
}

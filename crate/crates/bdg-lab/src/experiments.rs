//! Statistical reports for the lab's experiments, computed from per-path
//! functional records. Simulation drivers live in [`crate::lab`]; everything
//! here is deterministic given the records and a bootstrap seed.

use serde::{Deserialize, Serialize};

use crate::enlargement::Verdict;
use crate::stats::{
    bootstrap_mean_ci, bootstrap_ratio_ci, ks_statistic_uniform, ks_threshold, quantile, Ci,
};

pub const BOOTSTRAP_RESAMPLES: usize = 1000;
pub const CI_LEVEL: f64 = 0.95;

/// Two-sided moment comparison `E[(M*_rho)^p]` vs `E[(variation_rho)^{p/2}]`,
/// where the variation is `⟨M⟩` for continuous paths and `[M]` for jump paths.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentReport {
    pub p: f64,
    /// `E[(variation_rho)^{p/2}]`.
    pub lhs: f64,
    /// `E[(M*_rho)^p]`.
    pub rhs: f64,
    /// `rhs / lhs`; `None` when degenerate.
    pub ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci: Option<Ci>,
    pub n_effective: u64,
    pub excluded_capped: u64,
    pub degenerate: bool,
}

/// Build a moment report from per-path `(M*_rho, variation_rho)` records of
/// uncapped paths.
pub fn moment_ratio(
    records: &[(f64, f64)],
    p: f64,
    excluded_capped: u64,
    bootstrap_seed: u64,
) -> MomentReport {
    assert!(p > 0.0, "p must be positive");
    let n = records.len() as u64;
    let pairs: Vec<(f64, f64)> =
        records.iter().map(|&(mstar, var)| (mstar.powf(p), var.powf(p / 2.0))).collect();
    let lhs = pairs.iter().map(|x| x.1).sum::<f64>() / n.max(1) as f64;
    let rhs = pairs.iter().map(|x| x.0).sum::<f64>() / n.max(1) as f64;
    if n == 0 || lhs <= 0.0 {
        return MomentReport {
            p,
            lhs,
            rhs,
            ratio: None,
            ci: None,
            n_effective: n,
            excluded_capped,
            degenerate: true,
        };
    }
    let ci = bootstrap_ratio_ci(&pairs, BOOTSTRAP_RESAMPLES, bootstrap_seed, CI_LEVEL);
    MomentReport {
        p,
        lhs,
        rhs,
        ratio: Some(rhs / lhs),
        ci: Some(ci),
        n_effective: n,
        excluded_capped,
        degenerate: false,
    }
}

/// One row of the indicator-counterexample table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CounterexampleRow {
    pub k: f64,
    /// `E[|B_1| ; |B_1| > K] / P(|B_1| > K)`, the conditional mean.
    pub ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci: Option<Ci>,
    pub n_event: u64,
    pub event_fraction: f64,
    pub insufficient_sample: bool,
}

/// Conditional-mean table demonstrating that no constant `C` can bound
/// `E[|B_1| 1_A] / E[1_A]` over events `A = {|B_1| > K}`.
pub fn counterexample_indicator(
    terminals: &[f64],
    k_grid: &[f64],
    bootstrap_seed: u64,
) -> Vec<CounterexampleRow> {
    let n = terminals.len();
    k_grid
        .iter()
        .enumerate()
        .map(|(row, &k)| {
            let hits: Vec<f64> =
                terminals.iter().map(|b| b.abs()).filter(|&a| a > k).collect();
            let n_event = hits.len() as u64;
            let event_fraction = n_event as f64 / n as f64;
            if n_event < 30 {
                return CounterexampleRow {
                    k,
                    ratio: None,
                    ci: None,
                    n_event,
                    event_fraction,
                    insufficient_sample: true,
                };
            }
            let ratio = hits.iter().sum::<f64>() / n_event as f64;
            let ci = bootstrap_mean_ci(
                &hits,
                BOOTSTRAP_RESAMPLES,
                bootstrap_seed.wrapping_add(row as u64),
                CI_LEVEL,
            );
            CounterexampleRow {
                k,
                ratio: Some(ratio),
                ci: Some(ci),
                n_event,
                event_fraction,
                insufficient_sample: false,
            }
        })
        .collect()
}

/// Law diagnostics for `I_rho` samples against U(0,1), plus exponential
/// moment summaries of `log(1/I)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UniformityReport {
    pub n: u64,
    pub ks_statistic: f64,
    pub ks_threshold: f64,
    pub alpha: f64,
    pub verdict: Verdict,
    pub degenerate: bool,
    pub mean_log_inv: f64,
    pub max_log_inv: f64,
}

pub fn uniformity_diagnostics(samples: &[f64], alpha: f64) -> UniformityReport {
    let n = samples.len();
    let degenerate = n == 0
        || samples.windows(2).all(|w| w[0] == w[1]);
    if degenerate {
        return UniformityReport {
            n: n as u64,
            ks_statistic: f64::NAN,
            ks_threshold: f64::NAN,
            alpha,
            verdict: Verdict::Inconclusive,
            degenerate: true,
            mean_log_inv: samples.first().map(|s| (1.0 / s).ln()).unwrap_or(f64::NAN),
            max_log_inv: samples.first().map(|s| (1.0 / s).ln()).unwrap_or(f64::NAN),
        };
    }
    let d = ks_statistic_uniform(samples);
    let threshold = ks_threshold(alpha, n);
    let logs: Vec<f64> = samples.iter().map(|&s| (1.0 / s).ln()).collect();
    UniformityReport {
        n: n as u64,
        ks_statistic: d,
        ks_threshold: threshold,
        alpha,
        verdict: if d < threshold { Verdict::Pass } else { Verdict::Fail },
        degenerate: false,
        mean_log_inv: logs.iter().sum::<f64>() / n as f64,
        max_log_inv: logs.iter().cloned().fold(f64::MIN, f64::max),
    }
}

/// Quantiles of the BMO functional `J = int_0^rho d⟨mu⟩_s / Z_s^2`. A
/// uniformly bounded `J` would certify the martingale part in BMO; the heavy
/// upper tail is the failure diagnostic.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BmoReport {
    pub n: u64,
    pub q50: f64,
    pub q90: f64,
    pub q99: f64,
    pub ratio_q99_q50: Option<f64>,
    pub max: f64,
    pub floored_fraction: f64,
    /// Set when more than 5% of integration steps hit the epsilon floor.
    pub discretization_limited: bool,
    pub degenerate: bool,
}

pub fn bmo_blowup_diagnostic(j_samples: &[f64], floored_fraction: f64) -> BmoReport {
    let n = j_samples.len() as u64;
    if j_samples.is_empty() || j_samples.iter().all(|&j| j == 0.0) {
        return BmoReport {
            n,
            q50: 0.0,
            q90: 0.0,
            q99: 0.0,
            ratio_q99_q50: None,
            max: 0.0,
            floored_fraction,
            discretization_limited: floored_fraction > 0.05,
            degenerate: true,
        };
    }
    let mut xs = j_samples.to_vec();
    let q50 = quantile(&mut xs, 0.50);
    let q90 = quantile(&mut xs, 0.90);
    let q99 = quantile(&mut xs, 0.99);
    BmoReport {
        n,
        q50,
        q90,
        q99,
        ratio_q99_q50: if q50 > 0.0 { Some(q99 / q50) } else { None },
        max: xs[xs.len() - 1],
        floored_fraction,
        discretization_limited: floored_fraction > 0.05,
        degenerate: false,
    }
}

/// One point of the adversarial sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepPoint {
    pub c: f64,
    /// `E[M*_rho] / E[sqrt(⟨M⟩_rho)]` at `p = 1`.
    pub ratio: f64,
    pub ci: Ci,
}

/// Growth of the p = 1 moment ratio along the integrand family
/// `f_c(z) = (z + c)^{-alpha}` as `c` decreases.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub alpha_exponent: f64,
    pub points: Vec<SweepPoint>,
    /// `R(c_min) / R(c_max)`.
    pub growth_factor: Option<f64>,
    pub monotone_violations: u64,
    /// CI overlap between the endpoints makes the growth indeterminate.
    pub inconclusive: bool,
    pub n_effective: u64,
    pub excluded_capped: u64,
}

/// Assemble the sweep report from per-`c` path records `(M*_rho, sqrt qv_rho)`.
/// `per_c` must be ordered by strictly decreasing `c`.
pub fn adversarial_sweep_report(
    alpha_exponent: f64,
    per_c: &[(f64, Vec<(f64, f64)>)],
    excluded_capped: u64,
    bootstrap_seed: u64,
) -> SweepReport {
    assert!(per_c.windows(2).all(|w| w[0].0 > w[1].0), "c grid must be strictly decreasing");
    let points: Vec<SweepPoint> = per_c
        .iter()
        .enumerate()
        .map(|(i, (c, records))| {
            let num: f64 = records.iter().map(|r| r.0).sum();
            let den: f64 = records.iter().map(|r| r.1).sum();
            let ci = bootstrap_ratio_ci(
                records,
                BOOTSTRAP_RESAMPLES,
                bootstrap_seed.wrapping_add(i as u64),
                CI_LEVEL,
            );
            SweepPoint { c: *c, ratio: num / den, ci }
        })
        .collect();
    let n_effective = per_c.first().map(|(_, r)| r.len() as u64).unwrap_or(0);
    // violations: ratio strictly decreases as c decreases, beyond CI overlap
    let monotone_violations = points
        .windows(2)
        .filter(|w| w[1].ratio < w[0].ratio && w[1].ci.hi < w[0].ci.lo)
        .count() as u64;
    let (growth_factor, inconclusive) = match (points.first(), points.last()) {
        (Some(first), Some(last)) if first.ratio > 0.0 => {
            let overlap = last.ci.lo <= first.ci.hi && first.ci.lo <= last.ci.hi;
            (Some(last.ratio / first.ratio), overlap)
        }
        _ => (None, true),
    };
    SweepReport {
        alpha_exponent,
        points,
        growth_factor,
        monotone_violations,
        inconclusive,
        n_effective,
        excluded_capped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::aux_rng;
    use rand::Rng;

    #[test]
    fn degenerate_moment_ratio_at_rho_zero() {
        let records = vec![(0.0, 0.0); 100];
        let r = moment_ratio(&records, 2.0, 0, 1);
        assert!(r.degenerate);
        assert!(r.ratio.is_none());
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.rhs, 0.0);
    }

    #[test]
    fn moment_ratio_ci_contains_point_estimate() {
        let mut rng = aux_rng(5, 5);
        let records: Vec<(f64, f64)> =
            (0..2000).map(|_| (1.0 + rng.gen::<f64>(), 0.5 + rng.gen::<f64>())).collect();
        let r = moment_ratio(&records, 2.0, 3, 1);
        let ci = r.ci.unwrap();
        let ratio = r.ratio.unwrap();
        assert!(ci.lo <= ratio && ratio <= ci.hi);
        assert_eq!(r.excluded_capped, 3);
    }

    #[test]
    fn counterexample_conditional_mean_exceeds_k() {
        let mut rng = aux_rng(6, 6);
        let terms: Vec<f64> = (0..50_000)
            .map(|_| {
                let u: f64 = rng.gen();
                let v: f64 = rng.gen();
                (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
            })
            .collect();
        let rows = counterexample_indicator(&terms, &[0.0, 1.0, 2.0], 7);
        for row in &rows {
            let ratio = row.ratio.unwrap();
            assert!(ratio >= row.k, "ratio {ratio} below K {}", row.k);
        }
        // ratios nondecreasing in K
        for w in rows.windows(2) {
            assert!(w[1].ratio.unwrap() >= w[0].ratio.unwrap());
        }
    }

    #[test]
    fn counterexample_flags_empty_events() {
        let terms = vec![0.1; 1000];
        let rows = counterexample_indicator(&terms, &[5.0], 7);
        assert!(rows[0].insufficient_sample);
        assert!(rows[0].ratio.is_none());
    }

    #[test]
    fn uniformity_passes_on_exact_uniform() {
        let n = 10_000;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let r = uniformity_diagnostics(&xs, 0.01);
        assert_eq!(r.verdict, Verdict::Pass);
        assert!((r.mean_log_inv - 1.0).abs() < 0.05, "mean log 1/I = {}", r.mean_log_inv);
    }

    #[test]
    fn uniformity_degenerate_on_constant_samples() {
        let xs = vec![1.0; 5_000];
        let r = uniformity_diagnostics(&xs, 0.01);
        assert!(r.degenerate);
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn bmo_degenerate_for_constant_mu() {
        let r = bmo_blowup_diagnostic(&vec![0.0; 1000], 0.0);
        assert!(r.degenerate);
    }

    #[test]
    fn bmo_quantiles_ordered() {
        let mut rng = aux_rng(8, 8);
        let js: Vec<f64> = (0..5000).map(|_| -2.0 * rng.gen::<f64>().ln()).collect();
        let r = bmo_blowup_diagnostic(&js, 0.01);
        assert!(r.q50 <= r.q90 && r.q90 <= r.q99 && r.q99 <= r.max);
        assert!(!r.discretization_limited);
    }

    #[test]
    fn sweep_on_constant_family_is_flat() {
        // records identical across c: ratio constant, growth ~ 1
        let mut rng = aux_rng(9, 9);
        let base: Vec<(f64, f64)> =
            (0..3000).map(|_| (0.5 + rng.gen::<f64>(), 0.5 + rng.gen::<f64>())).collect();
        let per_c: Vec<(f64, Vec<(f64, f64)>)> =
            [1.0, 0.1, 0.01].iter().map(|&c| (c, base.clone())).collect();
        let r = adversarial_sweep_report(1.0, &per_c, 0, 11);
        let g = r.growth_factor.unwrap();
        assert!((g - 1.0).abs() < 1e-12);
        assert!(r.inconclusive); // identical CIs necessarily overlap
    }
}

//! Stopping a base-filtration martingale at a random time and testing what
//! survives: the canonical decomposition `M_{t∧rho} = m_tilde + drift` in the
//! enlarged filtration, a binned conditional martingale test, and the
//! optional-stopping test `E[M_rho] = E[M_0]` over a finite family of bounded
//! probe martingales.

use serde::{Deserialize, Serialize};

use crate::azema::AzemaBundle;
use crate::error::{LabError, Result};
use crate::path::PathBundle;
use crate::stats::{normal_cdf, normal_quantile, MeanAcc};
use crate::times::TimeRealization;

/// Canonical decomposition of a stopped path: `stopped = m_tilde + drift`
/// pointwise exactly, with the drift frozen after the realization node.
#[derive(Debug, Clone)]
pub struct DecompositionResult {
    pub stopped: Vec<f64>,
    pub drift: Vec<f64>,
    pub m_tilde: Vec<f64>,
    /// Steps where the division by `Z` hit the epsilon floor.
    pub floored_steps: usize,
}

/// Decompose `M` stopped at `rho` using the Azema data of the random time.
///
/// The drift increment over `[t_i, t_{i+1}]` is `dM dmu / max(Z, eps)`, the
/// discrete cross-variation realizing `d⟨M, mu⟩ / Z` with both integrands at
/// the left endpoint.
pub fn decompose(
    m: &PathBundle,
    azema: &AzemaBundle,
    rho: &TimeRealization,
    epsilon_floor: f64,
) -> Result<DecompositionResult> {
    if azema.z.len() != m.len() || azema.mu.len() != m.len() {
        return Err(LabError::Alignment(format!(
            "azema bundle has {} nodes, path has {}",
            azema.z.len(),
            m.len()
        )));
    }
    if rho.capped {
        return Err(LabError::Config("cannot decompose at a capped realization".into()));
    }
    let n = m.len();
    let stop = rho.rho_index.min(n - 1);
    let mut stopped = Vec::with_capacity(n);
    let mut drift = Vec::with_capacity(n);
    let mut m_tilde = Vec::with_capacity(n);
    let mut floored_steps = 0usize;
    let mut acc = 0.0;
    for i in 0..n {
        let s = m.values[i.min(stop)];
        if i > 0 && i <= stop {
            let dm = m.values[i] - m.values[i - 1];
            let dmu = azema.mu[i] - azema.mu[i - 1];
            let mut z = azema.z[i - 1];
            if z < epsilon_floor {
                z = epsilon_floor;
                floored_steps += 1;
            }
            acc += dm * dmu / z;
        }
        stopped.push(s);
        drift.push(acc);
        m_tilde.push(s - acc);
    }
    Ok(DecompositionResult { stopped, drift, m_tilde, floored_steps })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// Outcome of a statistical test with its standardized statistic.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestReport {
    pub name: String,
    pub statistic: f64,
    pub standard_error: f64,
    pub n_effective: u64,
    pub verdict: Verdict,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl TestReport {
    /// Mean-zero test: pass when `|statistic| <= threshold * SE`, with the
    /// threshold never below 3 and Bonferroni-widened at the configured alpha
    /// when `n_comparisons > 1`.
    pub fn mean_zero(name: &str, acc: &MeanAcc, alpha: f64, n_comparisons: usize) -> TestReport {
        let threshold = z_threshold(alpha, n_comparisons);
        let (stat, se) = (acc.mean(), acc.se());
        let verdict = if acc.n < 2 || !se.is_finite() || se == 0.0 {
            Verdict::Inconclusive
        } else if stat.abs() <= threshold * se {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        TestReport {
            name: name.to_string(),
            statistic: stat,
            standard_error: se,
            n_effective: acc.n,
            verdict,
            alpha,
            note: None,
        }
    }
}

pub(crate) fn z_threshold(alpha: f64, n_comparisons: usize) -> f64 {
    let q = normal_quantile(1.0 - alpha / (2.0 * n_comparisons.max(1) as f64));
    q.max(3.0)
}

/// Bounded probe martingales for the optional-stopping test, plus the raw
/// (unbounded) path value used to demonstrate honest-time failures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "probe", rename_all = "snake_case")]
pub enum ProbeMartingale {
    /// `Phi(B_{t∧1} / sqrt(1 - t∧1)) - 1/2`, the conditional probability of
    /// `{B_1 > 0}`; constant after `t = 1`.
    ConditionalProbability,
    /// `B_{t ∧ T_{a,b}}` for the two-sided exit of `(a, b)`.
    TwoSidedExit { a: f64, b: f64 },
    /// `sin(lambda B_t) exp(lambda^2 t / 2)` stopped at `t = 1`.
    SineExponential { lambda: f64 },
    /// `M_t = B_t` itself; unbounded, so optional stopping may fail even at
    /// pseudo-stopping times.
    RawValue,
}

impl ProbeMartingale {
    pub fn name(&self) -> String {
        match self {
            ProbeMartingale::ConditionalProbability => "conditional_probability".into(),
            ProbeMartingale::TwoSidedExit { a, b } => format!("two_sided_exit:{a}:{b}"),
            ProbeMartingale::SineExponential { lambda } => format!("sine_exponential:{lambda}"),
            ProbeMartingale::RawValue => "raw_value".into(),
        }
    }

    /// The default bounded family: hitting-type, distribution-function-type
    /// and oscillatory probes, all started at 0.
    pub fn bounded_family() -> Vec<ProbeMartingale> {
        vec![
            ProbeMartingale::ConditionalProbability,
            ProbeMartingale::TwoSidedExit { a: -1.0, b: 1.0 },
            ProbeMartingale::SineExponential { lambda: 1.0 },
        ]
    }

    /// Probe value at the realized time; `None` when the realization is
    /// capped or the path does not cover the probe's domain.
    pub fn eval(&self, path: &PathBundle, rho: &TimeRealization) -> Option<f64> {
        if rho.capped {
            return None;
        }
        let idx = rho.rho_index.min(path.len() - 1);
        let t = path.grid.time(idx);
        match *self {
            ProbeMartingale::ConditionalProbability => {
                if t < 1.0 {
                    Some(normal_cdf(path.values[idx] / (1.0 - t).sqrt()) - 0.5)
                } else {
                    let b1 = path.value_at(1.0)?;
                    Some(if b1 > 0.0 { 0.5 } else { -0.5 })
                }
            }
            ProbeMartingale::TwoSidedExit { a, b } => {
                // exit value is the barrier itself (continuum convention)
                for i in 1..=idx {
                    if path.values[i] >= b {
                        return Some(b);
                    }
                    if path.values[i] <= a {
                        return Some(a);
                    }
                }
                Some(path.values[idx])
            }
            ProbeMartingale::SineExponential { lambda } => {
                let stop = path.grid.index_of(1.0).min(idx);
                let tt = path.grid.time(stop);
                Some((lambda * path.values[stop]).sin() * (lambda * lambda * tt / 2.0).exp())
            }
            ProbeMartingale::RawValue => Some(path.values[idx]),
        }
    }
}

/// Per-probe optional stopping test from pre-accumulated probe values.
pub fn optional_stopping_test(
    family: &[(String, MeanAcc)],
    alpha: f64,
) -> Vec<TestReport> {
    family.iter().map(|(name, acc)| TestReport::mean_zero(name, acc, alpha, 1)).collect()
}

/// Conditional martingale test over an ensemble of probe-time samples.
///
/// `samples[p][k]` is path `p` evaluated at `probe_times[k]`. For each pair of
/// consecutive probe times the increment mean is tested inside decile bins of
/// the value at the earlier time; the report carries the worst standardized
/// discrepancy across all populated bins (Bonferroni-adjusted at `alpha`).
pub fn martingale_test(
    name: &str,
    samples: &[Vec<f64>],
    probe_times: &[f64],
    alpha: f64,
) -> TestReport {
    const N_BINS: usize = 10;
    let n = samples.len();
    if n < 100 || probe_times.len() < 2 {
        return TestReport {
            name: name.to_string(),
            statistic: f64::NAN,
            standard_error: f64::NAN,
            n_effective: n as u64,
            verdict: Verdict::Inconclusive,
            alpha,
            note: Some("insufficient samples".into()),
        };
    }
    let mut worst: Option<(f64, MeanAcc)> = None;
    let mut n_tested_bins = 0usize;
    for k in 0..probe_times.len() - 1 {
        // decile edges of the tested process at t1
        let mut at_t1: Vec<f64> = samples.iter().map(|s| s[k]).collect();
        at_t1.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        let edges: Vec<f64> =
            (1..N_BINS).map(|j| at_t1[j * n / N_BINS]).collect();
        let mut bins = vec![MeanAcc::default(); N_BINS];
        for s in samples {
            let x1 = s[k];
            let bin = edges.partition_point(|&e| e <= x1);
            bins[bin].push(s[k + 1] - x1);
        }
        for acc in bins.iter().filter(|b| b.n >= 50) {
            n_tested_bins += 1;
            let se = acc.se();
            if !se.is_finite() || se == 0.0 {
                continue;
            }
            let z = (acc.mean() / se).abs();
            let replace = match &worst {
                Some((wz, _)) => z > *wz,
                None => true,
            };
            if replace {
                worst = Some((z, *acc));
            }
        }
    }
    match worst {
        Some((_, acc)) => {
            let mut report = TestReport::mean_zero(name, &acc, alpha, n_tested_bins.max(1));
            report.n_effective = n as u64;
            report.note = Some(format!("worst of {n_tested_bins} conditional bins"));
            report
        }
        None => TestReport {
            name: name.to_string(),
            statistic: f64::NAN,
            standard_error: f64::NAN,
            n_effective: n as u64,
            verdict: Verdict::Inconclusive,
            alpha,
            note: Some("all conditioning bins empty".into()),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::azema::{closed_form_z, AzemaBundle, DEFAULT_EPSILON_FLOOR};
    use crate::grid::GridSpec;
    use crate::path::{brownian_path, compensated_poisson_path};
    use crate::times::{realize, RandomTimeSpec};
    use approx::assert_abs_diff_eq;

    fn grid(n: usize) -> GridSpec {
        GridSpec::fixed(1.0, n).unwrap()
    }

    fn azema_for(spec: &RandomTimeSpec, path: &crate::path::PathBundle) -> AzemaBundle {
        let r = realize(spec, path).unwrap();
        AzemaBundle::build(spec, path, &r).unwrap()
    }

    #[test]
    fn identity_holds_exactly() {
        let g = grid(256);
        let spec = RandomTimeSpec::LastZeroBefore { h: 1.0 };
        for i in 0..20u64 {
            let p = brownian_path(&g, 37, i).unwrap();
            let r = realize(&spec, &p).unwrap();
            let az = AzemaBundle::build(&spec, &p, &r).unwrap();
            let d = decompose(&p, &az, &r, DEFAULT_EPSILON_FLOOR).unwrap();
            for j in 0..p.len() {
                assert_abs_diff_eq!(d.stopped[j], d.m_tilde[j] + d.drift[j], epsilon = 1e-12);
            }
            // drift frozen after rho
            for j in r.rho_index..p.len() {
                assert_eq!(d.drift[j], d.drift[r.rho_index]);
            }
        }
    }

    #[test]
    fn stopping_time_decomposition_is_classical() {
        let g = grid(128);
        let spec = RandomTimeSpec::Deterministic { t0: 0.5 };
        let p = brownian_path(&g, 41, 0).unwrap();
        let az = azema_for(&spec, &p);
        let r = realize(&spec, &p).unwrap();
        let d = decompose(&p, &az, &r, DEFAULT_EPSILON_FLOOR).unwrap();
        assert!(d.drift.iter().all(|&x| x == 0.0));
        for j in 0..p.len() {
            assert_eq!(d.m_tilde[j], p.values[j.min(r.rho_index)]);
        }
    }

    #[test]
    fn independent_jump_path_has_zero_drift() {
        // M independent of the Brownian driver of mu: the discrete
        // cross-variation dM dmu is not identically zero pathwise, but for a
        // Poisson path the spec case is exact when no jump and the Brownian
        // increment never coincide in effect; here we check the drift is
        // negligible against the path scale.
        let g = grid(512);
        let spec = RandomTimeSpec::LastZeroBefore { h: 1.0 };
        let bp = brownian_path(&g, 43, 0).unwrap();
        let r = realize(&spec, &bp).unwrap();
        let az = AzemaBundle::build(&spec, &bp, &r).unwrap();
        let jump = compensated_poisson_path(2.0, &g, 43, 1_000_000, g.n_steps).unwrap();
        let d = decompose(&jump, &az, &r, DEFAULT_EPSILON_FLOOR).unwrap();
        let max_drift = d.drift.iter().cloned().fold(0.0f64, |a, b| a.max(b.abs()));
        assert!(max_drift < 0.1, "drift from independent driver: {max_drift}");
    }

    #[test]
    fn raw_brownian_ensemble_passes_martingale_test() {
        let g = grid(64);
        let probes = [0.25, 0.5, 0.75, 1.0];
        let samples: Vec<Vec<f64>> = (0..20_000u64)
            .map(|i| {
                let p = brownian_path(&g, 47, i).unwrap();
                probes.iter().map(|&t| p.value_at(t).unwrap()).collect()
            })
            .collect();
        let report = martingale_test("raw_brownian", &samples, &probes, 0.01);
        assert_eq!(report.verdict, Verdict::Pass, "{report:?}");
    }

    #[test]
    fn drifting_ensemble_fails_martingale_test() {
        let g = grid(64);
        let probes = [0.25, 0.5, 0.75, 1.0];
        let samples: Vec<Vec<f64>> = (0..20_000u64)
            .map(|i| {
                let p = brownian_path(&g, 53, i).unwrap();
                probes.iter().map(|&t| p.value_at(t).unwrap() + 0.2 * t).collect()
            })
            .collect();
        let report = martingale_test("drifting", &samples, &probes, 0.01);
        assert_eq!(report.verdict, Verdict::Fail, "{report:?}");
    }

    #[test]
    fn optional_stopping_at_deterministic_time_passes() {
        let g = grid(256);
        let spec = RandomTimeSpec::Deterministic { t0: 0.5 };
        let mut family: Vec<(String, MeanAcc)> = ProbeMartingale::bounded_family()
            .iter()
            .map(|p| (p.name(), MeanAcc::default()))
            .collect();
        for i in 0..20_000u64 {
            let p = brownian_path(&g, 59, i).unwrap();
            let r = realize(&spec, &p).unwrap();
            for (probe, (_, acc)) in ProbeMartingale::bounded_family().iter().zip(&mut family) {
                if let Some(v) = probe.eval(&p, &r) {
                    acc.push(v);
                }
            }
        }
        for report in optional_stopping_test(&family, 0.01) {
            assert_eq!(report.verdict, Verdict::Pass, "{report:?}");
        }
    }

    #[test]
    fn probe_values_are_bounded() {
        let g = grid(128);
        for i in 0..200u64 {
            let p = brownian_path(&g, 61, i).unwrap();
            let r = realize(&RandomTimeSpec::ArgmaxBefore { h: 1.0 }, &p).unwrap();
            for probe in ProbeMartingale::bounded_family() {
                if let Some(v) = probe.eval(&p, &r) {
                    assert!(v.abs() <= 1.7, "{} gave {v}", probe.name());
                }
            }
        }
    }
}

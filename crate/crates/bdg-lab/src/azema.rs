//! The Azema supermartingale `Z_t = P[rho > t | F_t]` of a catalog time, its
//! Doob-Meyer parts `Z = mu - A`, and the infimum `I_rho = inf_{u<=rho} Z_u`.
//!
//! For stopping times `Z` is the indicator of `{t < T}` and the martingale
//! part is constant. For the last zero of a Brownian path before `h`, the
//! reflection principle gives the closed form
//! `Z_t = 2(1 - Phi(|B_t| / sqrt(h - t)))`, and `mu` is extracted by discrete
//! stochastic integration of `d/dx Z` against the driving path. `sign(0)` is
//! taken as 0 in `d/dx Z`, which routes the local-time contribution into `A`.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::path::PathBundle;
use crate::stats::{normal_cdf, normal_pdf};
use crate::times::{RandomTimeSpec, TimeRealization};

/// Division floor used wherever a quantity is divided by `Z`.
pub const DEFAULT_EPSILON_FLOOR: f64 = 1e-8;

/// Per-path Azema data for one catalog time.
#[derive(Debug, Clone)]
pub struct AzemaBundle {
    /// `Z_t`, in `[0, 1]` at every node.
    pub z: Vec<f64>,
    /// Martingale part of the Doob-Meyer split.
    pub mu: Vec<f64>,
    /// Dual predictable projection; nondecreasing up to discretization.
    pub a: Vec<f64>,
    /// `⟨mu⟩_t`, cumulative `(d/dx Z)^2 dt`.
    pub qv_mu: Vec<f64>,
    /// `inf_{u <= rho} Z_u`.
    pub i_rho: f64,
}

impl AzemaBundle {
    /// Build the full bundle for a closed-form catalog time.
    pub fn build(
        spec: &RandomTimeSpec,
        path: &PathBundle,
        realization: &TimeRealization,
    ) -> Result<AzemaBundle> {
        let z = closed_form_z(spec, path).ok_or_else(|| {
            LabError::Unsupported(format!(
                "no closed-form Z for `{}`; use the empirical estimator",
                spec.catalog_id()
            ))
        })?;
        let (mu, a, qv_mu) = doob_meyer_split(spec, path, &z)?;
        let i_rho = infimum_i(&z, realization);
        Ok(AzemaBundle { z, mu, a, qv_mu, i_rho })
    }
}

/// Closed-form `Z` along one path, or `None` for kinds without one.
pub fn closed_form_z(spec: &RandomTimeSpec, path: &PathBundle) -> Option<Vec<f64>> {
    let n = path.len();
    match *spec {
        RandomTimeSpec::Deterministic { t0 } => {
            Some((0..n).map(|i| if path.grid.time(i) < t0 { 1.0 } else { 0.0 }).collect())
        }
        RandomTimeSpec::FirstHit { .. } | RandomTimeSpec::FirstHitCapped { .. } => {
            let r = crate::times::realize_stopping_time(spec, path).ok()?;
            let t_idx = if r.capped { n } else { r.rho_index };
            Some((0..n).map(|i| if i < t_idx { 1.0 } else { 0.0 }).collect())
        }
        RandomTimeSpec::LastZeroBefore { h } => {
            Some(
                (0..n)
                    .map(|i| {
                        let t = path.grid.time(i);
                        if t < h {
                            last_zero_z(path.values[i], h - t)
                        } else {
                            0.0
                        }
                    })
                    .collect(),
            )
        }
        _ => None,
    }
}

/// `P(a Brownian path from x has a zero within s) = 2(1 - Phi(|x|/sqrt(s)))`.
#[inline]
pub fn last_zero_z(x: f64, s: f64) -> f64 {
    2.0 * (1.0 - normal_cdf(x.abs() / s.sqrt()))
}

/// Space derivative of the last-zero `Z`, with `sign(0) = 0`.
#[inline]
pub fn last_zero_z_dx(x: f64, s: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let root = s.sqrt();
    -2.0 * x.signum() * normal_pdf(x.abs() / root) / root
}

/// Doob-Meyer split `Z = mu - A` for closed-form catalog times.
///
/// Returns `(mu, A, ⟨mu⟩)`. `mu` is built by left-endpoint integration of
/// `d/dx Z` against the driving path, so `A := mu - Z` holds exactly by
/// construction; the statistical content is that `A` is nondecreasing.
pub fn doob_meyer_split(
    spec: &RandomTimeSpec,
    path: &PathBundle,
    z: &[f64],
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    if z.len() != path.len() {
        return Err(LabError::Alignment(format!(
            "Z has {} nodes, path has {}",
            z.len(),
            path.len()
        )));
    }
    let n = path.len();
    match *spec {
        // For stopping times Z is an indicator: the martingale part is the
        // constant Z_0 and A carries the jump at T.
        RandomTimeSpec::Deterministic { .. }
        | RandomTimeSpec::FirstHit { .. }
        | RandomTimeSpec::FirstHitCapped { .. } => {
            let mu = vec![z[0]; n];
            let a = mu.iter().zip(z).map(|(m, zz)| m - zz).collect();
            Ok((mu, a, vec![0.0; n]))
        }
        RandomTimeSpec::LastZeroBefore { h } => {
            let dt = path.dt();
            let h_idx = path.grid.index_of(h).min(n - 1);
            let mut mu = Vec::with_capacity(n);
            let mut qv_mu = Vec::with_capacity(n);
            mu.push(z[0]);
            qv_mu.push(0.0);
            for i in 0..n - 1 {
                if i < h_idx {
                    let t = path.grid.time(i);
                    let fx = last_zero_z_dx(path.values[i], h - t);
                    let db = path.values[i + 1] - path.values[i];
                    mu.push(mu[i] + fx * db);
                    qv_mu.push(qv_mu[i] + fx * fx * dt);
                } else {
                    // frozen past h
                    mu.push(mu[i]);
                    qv_mu.push(qv_mu[i]);
                }
            }
            let a = mu.iter().zip(z).map(|(m, zz)| m - zz).collect();
            Ok((mu, a, qv_mu))
        }
        _ => Err(LabError::Unsupported(format!(
            "empirical Doob-Meyer split for `{}` is out of scope",
            spec.catalog_id()
        ))),
    }
}

/// Minimum of `Z` over grid nodes up to the realization.
pub fn infimum_i(z: &[f64], realization: &TimeRealization) -> f64 {
    let stop = realization.rho_index.min(z.len() - 1);
    let m = z[..=stop].iter().cloned().fold(f64::INFINITY, f64::min);
    // Z is a survival probability, so clamp into (0, 1]
    m.clamp(f64::MIN_POSITIVE, 1.0)
}

/// Nonparametric binned estimate of `Z`: for each (time, state) bin, the
/// fraction of paths seen in the bin whose time realization exceeds the bin
/// time. Accumulators merge associatively so ensembles can be streamed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZEmpirical {
    pub t_centers: Vec<f64>,
    pub x_edges: Vec<f64>,
    /// Row-major `[t_bin][x_bin]` path counts.
    pub counts: Vec<u64>,
    /// Paths in the bin with `rho > t`.
    pub survivals: Vec<u64>,
    /// Sum of a reference `Z` over the bin (for closed-form comparisons).
    pub reference_sum: Vec<f64>,
}

impl ZEmpirical {
    pub fn new(t_bins: usize, t_max: f64, x_bins: usize, x_min: f64, x_max: f64) -> Self {
        let t_centers = (0..t_bins).map(|i| (i as f64 + 0.5) * t_max / t_bins as f64).collect();
        let x_edges =
            (0..=x_bins).map(|i| x_min + (x_max - x_min) * i as f64 / x_bins as f64).collect();
        ZEmpirical {
            t_centers,
            x_edges,
            counts: vec![0; t_bins * x_bins],
            survivals: vec![0; t_bins * x_bins],
            reference_sum: vec![0.0; t_bins * x_bins],
        }
    }

    pub fn n_x_bins(&self) -> usize {
        self.x_edges.len() - 1
    }

    /// Record one path. `reference` supplies a per-node reference `Z` (e.g.
    /// the closed form) to average alongside the empirical estimate.
    pub fn add_path(&mut self, path: &PathBundle, rho_time: f64, reference: Option<&[f64]>) {
        let nx = self.n_x_bins();
        let (x_min, x_max) = (self.x_edges[0], self.x_edges[nx]);
        for (ti, &t) in self.t_centers.clone().iter().enumerate() {
            let node = path.grid.index_of(t);
            if node >= path.len() {
                continue;
            }
            let x = path.values[node];
            if x < x_min || x >= x_max {
                continue;
            }
            let xi = ((x - x_min) / (x_max - x_min) * nx as f64) as usize;
            let bin = ti * nx + xi.min(nx - 1);
            self.counts[bin] += 1;
            if rho_time > t {
                self.survivals[bin] += 1;
            }
            if let Some(r) = reference {
                self.reference_sum[bin] += r[node];
            }
        }
    }

    pub fn merge(&mut self, other: &ZEmpirical) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        for (a, b) in self.survivals.iter_mut().zip(&other.survivals) {
            *a += b;
        }
        for (a, b) in self.reference_sum.iter_mut().zip(&other.reference_sum) {
            *a += b;
        }
    }

    /// Empirical estimate for a bin; `None` when the bin is empty.
    pub fn estimate(&self, bin: usize) -> Option<f64> {
        if self.counts[bin] == 0 {
            None
        } else {
            Some(self.survivals[bin] as f64 / self.counts[bin] as f64)
        }
    }

    /// Mean reference `Z` over a bin.
    pub fn reference_mean(&self, bin: usize) -> Option<f64> {
        if self.counts[bin] == 0 {
            None
        } else {
            Some(self.reference_sum[bin] / self.counts[bin] as f64)
        }
    }

    /// CSV rows `(t_bin, state_bin, count, estimate)`.
    pub fn to_csv(&self) -> String {
        let nx = self.n_x_bins();
        let mut out = String::from("t_bin,state_bin,count,estimate\n");
        for ti in 0..self.t_centers.len() {
            for xi in 0..nx {
                let bin = ti * nx + xi;
                let est = self.estimate(bin).map(|e| e.to_string()).unwrap_or_default();
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    self.t_centers[ti],
                    0.5 * (self.x_edges[xi] + self.x_edges[xi + 1]),
                    self.counts[bin],
                    est
                ));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::path::brownian_path;
    use crate::times::realize;
    use approx::assert_abs_diff_eq;

    fn grid(n: usize) -> GridSpec {
        GridSpec::fixed(1.0, n).unwrap()
    }

    #[test]
    fn stopping_time_z_is_indicator() {
        let g = grid(128);
        let p = brownian_path(&g, 5, 2).unwrap();
        let spec = RandomTimeSpec::FirstHitCapped { level: 1.0, cap: 1.0 };
        let z = closed_form_z(&spec, &p).unwrap();
        let r = realize(&spec, &p).unwrap();
        for (i, &zi) in z.iter().enumerate() {
            let expect = if i < r.rho_index { 1.0 } else { 0.0 };
            assert_eq!(zi, expect, "node {i}");
        }
    }

    #[test]
    fn z_is_one_at_a_zero_of_the_path() {
        assert_abs_diff_eq!(last_zero_z(0.0, 0.5), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn z_stays_in_unit_interval() {
        let g = grid(256);
        for i in 0..50u64 {
            let p = brownian_path(&g, 7, i).unwrap();
            let z = closed_form_z(&RandomTimeSpec::LastZeroBefore { h: 1.0 }, &p).unwrap();
            for &v in &z {
                assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn doob_meyer_identity_is_exact() {
        let g = grid(256);
        let spec = RandomTimeSpec::LastZeroBefore { h: 1.0 };
        for i in 0..20u64 {
            let p = brownian_path(&g, 11, i).unwrap();
            let z = closed_form_z(&spec, &p).unwrap();
            let (mu, a, _) = doob_meyer_split(&spec, &p, &z).unwrap();
            for j in 0..p.len() {
                assert_abs_diff_eq!(z[j], mu[j] - a[j], epsilon = 1e-12);
            }
            assert_eq!(a[0], 0.0);
        }
    }

    #[test]
    fn stopping_time_split_has_constant_mu() {
        let g = grid(64);
        let p = brownian_path(&g, 3, 0).unwrap();
        let spec = RandomTimeSpec::Deterministic { t0: 0.5 };
        let z = closed_form_z(&spec, &p).unwrap();
        let (mu, a, qv_mu) = doob_meyer_split(&spec, &p, &z).unwrap();
        assert!(mu.iter().all(|&m| m == 1.0));
        assert!(qv_mu.iter().all(|&q| q == 0.0));
        // A jumps from 0 to 1 at t0
        assert_eq!(a[0], 0.0);
        assert_eq!(a[p.len() - 1], 1.0);
    }

    #[test]
    fn infimum_of_stopping_time_z_is_one() {
        let g = grid(64);
        let p = brownian_path(&g, 3, 1).unwrap();
        let spec = RandomTimeSpec::FirstHitCapped { level: 2.0, cap: 1.0 };
        let z = closed_form_z(&spec, &p).unwrap();
        let r = realize(&spec, &p).unwrap();
        // Z = 1 strictly before T; the infimum over nodes < T is 1 but the
        // node at T itself carries Z = 0, so stop one node earlier.
        let before = TimeRealization { rho_index: r.rho_index.saturating_sub(1), ..r };
        assert_eq!(infimum_i(&z, &before), 1.0);
    }

    #[test]
    fn infimum_lies_in_unit_interval() {
        let g = grid(256);
        let spec = RandomTimeSpec::LastZeroBefore { h: 1.0 };
        for i in 0..50u64 {
            let p = brownian_path(&g, 13, i).unwrap();
            let z = closed_form_z(&spec, &p).unwrap();
            let r = realize(&spec, &p).unwrap();
            let inf = infimum_i(&z, &r);
            assert!(inf > 0.0 && inf <= 1.0);
        }
    }

    #[test]
    fn empirical_estimator_exact_for_deterministic_time() {
        let g = grid(64);
        let mut est = ZEmpirical::new(10, 1.0, 10, -3.0, 3.0);
        for i in 0..500u64 {
            let p = brownian_path(&g, 19, i).unwrap();
            let r = realize(&RandomTimeSpec::Deterministic { t0: 0.5 }, &p).unwrap();
            est.add_path(&p, r.rho_time, None);
        }
        for (ti, &t) in est.t_centers.clone().iter().enumerate() {
            for xi in 0..est.n_x_bins() {
                if let Some(e) = est.estimate(ti * est.n_x_bins() + xi) {
                    let expect = if t < 0.5 { 1.0 } else { 0.0 };
                    assert_eq!(e, expect);
                }
            }
        }
    }

    #[test]
    fn empirical_estimator_on_independent_coin_flip() {
        // rho independent of the path with P(rho = 2) = 1/2: all populated
        // bins estimate 0.5 within 3 binomial SE.
        let g = grid(64);
        let mut est = ZEmpirical::new(5, 1.0, 5, -2.0, 2.0);
        for i in 0..20_000u64 {
            let p = brownian_path(&g, 23, i).unwrap();
            let rho = if i % 2 == 0 { 2.0 } else { 0.0 };
            est.add_path(&p, rho, None);
        }
        for bin in 0..est.counts.len() {
            if est.counts[bin] < 50 {
                continue;
            }
            let e = est.estimate(bin).unwrap();
            let se = (0.25 / est.counts[bin] as f64).sqrt();
            assert!((e - 0.5).abs() < 3.0 * se + 0.02, "bin {bin}: {e}");
        }
    }
}

//! Simulation drivers. Each driver maps path indices to small per-path
//! records in parallel, collecting them in index order so every downstream
//! reduction is sequential and independent of the worker count.

use rayon::prelude::*;

use crate::azema::AzemaBundle;
use crate::enlargement::{decompose, ProbeMartingale};
use crate::error::{LabError, Result};
use crate::grid::GridSpec;
use crate::path::{
    brownian_path, compensated_poisson_path, stochastic_integral, BrownianIncrements,
    IntegrandSpec,
};
use crate::times::{realize, RandomTimeSpec, TimeRealization};

/// Per-path record of the Williams pseudo-stopping time pipeline. Produced by
/// a constant-memory scan, so the hard cap can be generous.
#[derive(Debug, Clone)]
pub struct WilliamsRecord {
    pub capped: bool,
    pub rho_time: f64,
    pub sigma_time: f64,
    pub t1_time: f64,
    /// `B_rho`, the maximum of `B` over `[0, sigma]`.
    pub b_rho: f64,
    /// `sup_{s <= rho} |B_s|`.
    pub mstar: f64,
    /// Quadratic variation accumulated up to `rho`.
    pub qv_rho: f64,
    /// Bounded probe martingales evaluated at `rho`:
    /// conditional-probability, two-sided exit at (-1, 1), sine-exponential.
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    /// `B_{t ∧ rho}` at the requested probe times (uncapped paths only).
    pub stopped_probes: Vec<f64>,
}

/// Stream one Brownian path until it hits level 1 (or the cap), tracking the
/// running maximum, the argmax state frozen at the last zero crossing, and
/// probe snapshots. Mirrors the bundle-based pipeline exactly for uncapped
/// paths; cross-checked in tests.
pub fn williams_ensemble(
    grid: &GridSpec,
    seed: u64,
    n_paths: usize,
    probe_times: &[f64],
) -> Result<Vec<WilliamsRecord>> {
    grid.validate()?;
    if grid.hard_cap < 1.0 {
        return Err(LabError::Config(
            "the Williams pipeline needs the grid to cover t = 1 for its frozen probes".into(),
        ));
    }
    if let Some(&t) = probe_times.iter().find(|&&t| grid.index_of(t) > grid.index_of(1.0)) {
        return Err(LabError::Config(format!("probe time {t} lies beyond t = 1")));
    }
    let probe_idx: Vec<usize> = probe_times.iter().map(|&t| grid.index_of(t)).collect();
    let one_idx = grid.index_of(1.0);
    Ok((0..n_paths)
        .into_par_iter()
        .map(|path_index| {
            williams_scan(grid, seed, path_index as u64, &probe_idx, one_idx)
        })
        .collect())
}

fn williams_scan(
    grid: &GridSpec,
    seed: u64,
    path_index: u64,
    probe_idx: &[usize],
    one_idx: usize,
) -> WilliamsRecord {
    let max_steps = grid.max_steps();
    let mut incs = BrownianIncrements::new(grid, seed, path_index);

    let mut v = 0.0f64;
    let mut qv = 0.0f64;
    let mut min_v = 0.0f64;
    // running argmax state over [0, current node]
    let mut max_v = 0.0f64;
    let mut argmax_idx = 0usize;
    let mut argmax_qv = 0.0f64;
    let mut argmax_min = 0.0f64;
    // argmax state snapshot at the most recent zero crossing (covers [0, sigma])
    let mut sig_idx = 0usize;
    let mut sig_max = 0.0f64;
    let mut sig_argmax_idx = 0usize;
    let mut sig_argmax_qv = 0.0f64;
    let mut sig_argmax_min = 0.0f64;
    // lower-barrier exit at -1 (the upper barrier at +1 is the hitting time itself)
    let mut lower_exit_idx: Option<usize> = None;
    // path values needed by the frozen probes
    let mut b_at_one: Option<f64> = None;
    let mut probe_vals = vec![0.0f64; probe_idx.len()];
    let mut t1_idx: Option<usize> = None;

    for i in 0..max_steps {
        let db = incs.next_increment();
        let v_new = v + db;
        let node = i + 1;
        // a zero crossing in (i, i+1] freezes the argmax state over [0, i]
        if v * v_new < 0.0 || v == 0.0 || v_new == 0.0 {
            sig_idx = i;
            sig_max = max_v;
            sig_argmax_idx = argmax_idx;
            sig_argmax_qv = argmax_qv;
            sig_argmax_min = argmax_min;
        }
        qv += db * db;
        v = v_new;
        if v > max_v {
            max_v = v;
            argmax_idx = node;
            argmax_qv = qv;
            argmax_min = min_v.min(v);
        }
        if v < min_v {
            min_v = v;
        }
        if v <= -1.0 && lower_exit_idx.is_none() {
            lower_exit_idx = Some(node);
        }
        for (j, &pi) in probe_idx.iter().enumerate() {
            if pi == node {
                probe_vals[j] = v;
            }
        }
        if node == one_idx {
            b_at_one = Some(v);
        }
        if v >= 1.0 {
            t1_idx = Some(node);
            break;
        }
    }

    match t1_idx {
        Some(t1) => {
            let rho_idx = sig_argmax_idx;
            let rho_time = grid.time(rho_idx);
            let b_rho = sig_max;
            let mstar = b_rho.max(-sig_argmax_min);
            // probes at rho, using the frozen value past t = 1 where needed
            let m1 = if rho_time < 1.0 {
                crate::stats::normal_cdf(b_rho / (1.0 - rho_time).sqrt()) - 0.5
            } else {
                let b1 = b_at_one.expect("rho past t=1 implies the path reached t=1");
                if b1 > 0.0 { 0.5 } else { -0.5 }
            };
            let m2 = match lower_exit_idx {
                Some(e) if e <= rho_idx => -1.0,
                _ => b_rho, // upper exit is at t1 > rho
            };
            let m3 = if rho_time < 1.0 {
                b_rho.sin() * (rho_time / 2.0).exp()
            } else {
                let b1 = b_at_one.expect("rho past t=1 implies the path reached t=1");
                b1.sin() * 0.5f64.exp()
            };
            let stopped_probes = probe_idx
                .iter()
                .enumerate()
                .map(|(j, &pi)| if pi <= rho_idx { probe_vals[j] } else { b_rho })
                .collect();
            WilliamsRecord {
                capped: false,
                rho_time,
                sigma_time: grid.time(sig_idx),
                t1_time: grid.time(t1),
                b_rho,
                mstar,
                qv_rho: sig_argmax_qv,
                m1,
                m2,
                m3,
                stopped_probes,
            }
        }
        None => {
            // Capped before hitting 1: rho itself is unresolved (it depends
            // on the whole path up to the first hit), so no functional of the
            // truncated path stands in for any probe. The path is excluded
            // and counted.
            WilliamsRecord {
                capped: true,
                rho_time: f64::NAN,
                sigma_time: f64::NAN,
                t1_time: f64::NAN,
                b_rho: f64::NAN,
                mstar: f64::NAN,
                qv_rho: f64::NAN,
                m1: f64::NAN,
                m2: f64::NAN,
                m3: f64::NAN,
                stopped_probes: Vec::new(),
            }
        }
    }
}

/// Options for [`catalog_ensemble`].
#[derive(Debug, Clone)]
pub struct EnsembleOptions {
    /// Compute the Azema supermartingale and its functionals.
    pub azema: bool,
    /// Decompose the stopped Brownian path in the enlarged filtration and
    /// record probe values of the adjusted martingale.
    pub decompose: bool,
    pub epsilon_floor: f64,
    /// Grid times at which stopped-path probes are recorded.
    pub probe_times: Vec<f64>,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        EnsembleOptions {
            azema: false,
            decompose: false,
            epsilon_floor: crate::azema::DEFAULT_EPSILON_FLOOR,
            probe_times: Vec::new(),
        }
    }
}

/// Per-path record for catalog random times on the unit horizon.
#[derive(Debug, Clone)]
pub struct CatalogRecord {
    pub rho_time: f64,
    pub capped: bool,
    pub boundary: bool,
    pub mstar: f64,
    pub qv_rho: f64,
    pub b_rho: f64,
    /// Bounded probe family at `rho` (conditional-probability, two-sided
    /// exit, sine-exponential); `None` for capped paths without resolution.
    pub m1: Option<f64>,
    pub m2: Option<f64>,
    pub m3: Option<f64>,
    /// `B_{t ∧ rho}` at the probe times.
    pub stopped_probes: Vec<f64>,
    /// Probes of the adjusted martingale from the enlargement decomposition.
    pub mtilde_probes: Option<Vec<f64>>,
    pub i_rho: Option<f64>,
    pub j_blowup: Option<f64>,
    pub a_final: Option<f64>,
    pub floored_steps: u64,
    pub total_steps: u64,
}

/// Simulate Brownian paths on the grid horizon, realize `spec` on each, and
/// record stopped-path functionals, optionally with the Azema bundle and the
/// enlargement decomposition.
pub fn catalog_ensemble(
    grid: &GridSpec,
    seed: u64,
    n_paths: usize,
    spec: &RandomTimeSpec,
    opts: &EnsembleOptions,
) -> Result<Vec<CatalogRecord>> {
    grid.validate()?;
    spec.validate_for_grid(grid)?;
    if opts.decompose && !opts.azema {
        return Err(LabError::Config(
            "decompose requires the Azema bundle (set azema: true)".into(),
        ));
    }
    let probe_idx: Vec<usize> = opts.probe_times.iter().map(|&t| grid.index_of(t)).collect();
    (0..n_paths)
        .into_par_iter()
        .map(|path_index| {
            let path = brownian_path(grid, seed, path_index as u64)?;
            let real = realize(spec, &path)?;
            let mut rec = catalog_record_base(&path, &real, &probe_idx);
            if opts.azema && !real.capped {
                let az = AzemaBundle::build(spec, &path, &real)?;
                rec.i_rho = Some(az.i_rho);
                rec.a_final = Some(*az.a.last().unwrap());
                rec.j_blowup = Some(j_blowup(&az, real.rho_index));
                if opts.decompose {
                    let d = decompose(&path, &az, &real, opts.epsilon_floor)?;
                    rec.floored_steps = d.floored_steps as u64;
                    rec.total_steps = real.rho_index as u64;
                    rec.mtilde_probes = Some(
                        probe_idx.iter().map(|&pi| d.m_tilde[pi.min(d.m_tilde.len() - 1)]).collect(),
                    );
                }
            }
            Ok(rec)
        })
        .collect()
}

fn catalog_record_base(
    path: &crate::path::PathBundle,
    real: &TimeRealization,
    probe_idx: &[usize],
) -> CatalogRecord {
    if real.capped {
        return CatalogRecord {
            rho_time: f64::NAN,
            capped: true,
            boundary: false,
            mstar: f64::NAN,
            qv_rho: f64::NAN,
            b_rho: f64::NAN,
            m1: None,
            m2: None,
            m3: None,
            stopped_probes: Vec::new(),
            mtilde_probes: None,
            i_rho: None,
            j_blowup: None,
            a_final: None,
            floored_steps: 0,
            total_steps: 0,
        };
    }
    let k = real.rho_index;
    let mstar = path.running_max_abs[k];
    let family = [
        ProbeMartingale::ConditionalProbability,
        ProbeMartingale::TwoSidedExit { a: -1.0, b: 1.0 },
        ProbeMartingale::SineExponential { lambda: 1.0 },
    ];
    let mut probes = family.iter().map(|p| p.eval(path, real));
    let m1 = probes.next().unwrap();
    let m2 = probes.next().unwrap();
    let m3 = probes.next().unwrap();
    let stopped_probes = probe_idx
        .iter()
        .map(|&pi| path.values[pi.min(k)])
        .collect();
    CatalogRecord {
        rho_time: real.rho_time,
        capped: false,
        boundary: real.boundary,
        mstar,
        qv_rho: path.qv[k],
        b_rho: path.values[k],
        m1,
        m2,
        m3,
        stopped_probes,
        mtilde_probes: None,
        i_rho: None,
        j_blowup: None,
        a_final: None,
        floored_steps: 0,
        total_steps: 0,
    }
}

/// Discrete `int_0^rho d⟨mu⟩_s / Z_s^2` with left-endpoint `Z` evaluation.
fn j_blowup(az: &AzemaBundle, rho_index: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..rho_index {
        let dq = az.qv_mu[i + 1] - az.qv_mu[i];
        let z = az.z[i].max(crate::azema::DEFAULT_EPSILON_FLOOR);
        acc += dq / (z * z);
    }
    acc
}

/// Per-path record for integrand-driven martingales `M = ∫ f(Z) dB` stopped
/// at an honest time of the driving Brownian path.
#[derive(Debug, Clone)]
pub struct SweepRecord {
    pub capped: bool,
    /// Per `c` in the sweep grid: `(M*_rho, sqrt(⟨M⟩_rho))`.
    pub per_c: Vec<(f64, f64)>,
    /// `M_{t ∧ rho}` at probe times, for the designated `c` only.
    pub stopped_probes: Option<Vec<f64>>,
    /// Probes of the adjusted martingale for the designated `c`.
    pub mtilde_probes: Option<Vec<f64>>,
    pub floored_steps: u64,
}

/// Run the adversarial integrand family `f_c(z) = (z + c)^{-alpha}` against
/// one honest time, reusing a single Brownian path and Azema bundle per path
/// index across the whole `c` grid. `probe_c_index` selects the grid entry
/// whose stopped and adjusted probes are recorded.
#[allow(clippy::too_many_arguments)]
pub fn integrand_sweep_ensemble(
    grid: &GridSpec,
    seed: u64,
    n_paths: usize,
    spec: &RandomTimeSpec,
    alpha_exponent: f64,
    c_grid: &[f64],
    probe_c_index: Option<usize>,
    probe_times: &[f64],
    epsilon_floor: f64,
) -> Result<Vec<SweepRecord>> {
    grid.validate()?;
    spec.validate_for_grid(grid)?;
    if matches!(
        spec,
        RandomTimeSpec::PseudoWilliams | RandomTimeSpec::Indicator { .. }
    ) {
        return Err(LabError::Unsupported(format!(
            "no closed-form Z for `{}`; the sweep integrand needs one",
            spec.catalog_id()
        )));
    }
    if let Some(i) = probe_c_index {
        if i >= c_grid.len() {
            return Err(LabError::Config(format!(
                "probe_c_index {i} out of range for a {}-point c grid",
                c_grid.len()
            )));
        }
    }
    let probe_idx: Vec<usize> = probe_times.iter().map(|&t| grid.index_of(t)).collect();
    (0..n_paths)
        .into_par_iter()
        .map(|path_index| {
            let path = brownian_path(grid, seed, path_index as u64)?;
            let real = realize(spec, &path)?;
            if real.capped {
                return Ok(SweepRecord {
                    capped: true,
                    per_c: Vec::new(),
                    stopped_probes: None,
                    mtilde_probes: None,
                    floored_steps: 0,
                });
            }
            let az = AzemaBundle::build(spec, &path, &real)?;
            let k = real.rho_index;
            let mut per_c = Vec::with_capacity(c_grid.len());
            let mut stopped_probes = None;
            let mut mtilde_probes = None;
            let mut floored_steps = 0;
            for (ci, &c) in c_grid.iter().enumerate() {
                let f = IntegrandSpec::FunctionOfZ { alpha: alpha_exponent, c };
                let m = stochastic_integral(&f, &path, Some(&az.z))?;
                let mstar = m.running_max_abs[k];
                per_c.push((mstar, m.qv[k].sqrt()));
                if probe_c_index == Some(ci) {
                    stopped_probes = Some(
                        probe_idx.iter().map(|&pi| m.values[pi.min(k)]).collect(),
                    );
                    let d = decompose(&m, &az, &real, epsilon_floor)?;
                    floored_steps = d.floored_steps as u64;
                    mtilde_probes = Some(
                        probe_idx
                            .iter()
                            .map(|&pi| d.m_tilde[pi.min(d.m_tilde.len() - 1)])
                            .collect(),
                    );
                }
            }
            Ok(SweepRecord {
                capped: false,
                per_c,
                stopped_probes,
                mtilde_probes,
                floored_steps,
            })
        })
        .collect()
}

/// Terminal values `B_1` for the indicator counterexample, streamed without
/// storing paths.
pub fn brownian_terminals(grid: &GridSpec, seed: u64, n_paths: usize) -> Result<Vec<f64>> {
    grid.validate()?;
    let n_steps = grid.n_steps;
    Ok((0..n_paths)
        .into_par_iter()
        .map(|path_index| {
            let mut incs = BrownianIncrements::new(grid, seed, path_index as u64);
            (0..n_steps).map(|_| incs.next_increment()).sum()
        })
        .collect())
}

/// Per-path record for the compensated Poisson martingale stopped at a time
/// independent of the jumps.
#[derive(Debug, Clone)]
pub struct JumpRecord {
    pub capped: bool,
    pub mstar: f64,
    /// `[M]_rho`, the raw jump count up to `rho`.
    pub bracket_rho: f64,
    /// Terminal value `M_rho` of the compensated process.
    pub m_rho: f64,
}

/// Drive an independent compensated Poisson path to each realized time. The
/// times come from a separate driving system (or are deterministic), so the
/// jump seed must differ from the seed used to realize them.
pub fn poisson_at_times(
    lambda: f64,
    grid: &GridSpec,
    jump_seed: u64,
    rho_times: &[f64],
) -> Result<Vec<JumpRecord>> {
    grid.validate()?;
    if lambda <= 0.0 {
        return Err(LabError::Config(format!("lambda must be positive, got {lambda}")));
    }
    let dt = grid.dt();
    let max_steps = grid.max_steps();
    rho_times
        .par_iter()
        .enumerate()
        .map(|(path_index, &rho)| {
            if !rho.is_finite() {
                return Ok(JumpRecord {
                    capped: true,
                    mstar: f64::NAN,
                    bracket_rho: f64::NAN,
                    m_rho: f64::NAN,
                });
            }
            let rho_idx = (rho / dt).round() as usize;
            if rho_idx > max_steps {
                return Err(LabError::Config(format!(
                    "realized time {rho} exceeds the extended grid cap"
                )));
            }
            let bundle =
                compensated_poisson_path(lambda, grid, jump_seed, path_index as u64, rho_idx)?;
            Ok(JumpRecord {
                capped: false,
                mstar: bundle.running_max_abs[rho_idx],
                bracket_rho: bundle.bracket[rho_idx],
                m_rho: bundle.values[rho_idx],
            })
        })
        .collect()
}

/// Fraction of paths on which a realized time lands exactly on a grid node
/// distinguished in advance (used to check the avoidance assumption's
/// discrete analogue).
pub fn collision_fraction(
    grid: &GridSpec,
    seed: u64,
    n_paths: usize,
    spec: &RandomTimeSpec,
    distinguished: &[usize],
) -> Result<f64> {
    grid.validate()?;
    spec.validate_for_grid(grid)?;
    let hits: usize = (0..n_paths)
        .into_par_iter()
        .map(|path_index| {
            let path = brownian_path(grid, seed, path_index as u64)?;
            let real = realize(spec, &path)?;
            Ok(usize::from(!real.capped && distinguished.contains(&real.rho_index)))
        })
        .collect::<Result<Vec<usize>>>()?
        .into_iter()
        .sum();
    Ok(hits as f64 / n_paths as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::times::realize_pseudo_stopping_time;

    fn small_grid() -> GridSpec {
        GridSpec::new(1.0, 64, 64, 50.0).unwrap()
    }

    #[test]
    fn williams_scan_matches_bundle_pipeline() {
        let grid = small_grid();
        let recs = williams_ensemble(&grid, 42, 200, &[0.25, 0.5]).unwrap();
        for (i, rec) in recs.iter().enumerate() {
            if rec.capped {
                continue;
            }
            let (path, capped) =
                crate::path::brownian_path_to_level(&grid, 42, i as u64, 1.0).unwrap();
            assert!(!capped);
            let real = realize_pseudo_stopping_time(&path).unwrap();
            assert!(
                (rec.rho_time - real.rho_time).abs() < 1e-12,
                "path {i}: rho {} vs {}",
                rec.rho_time,
                real.rho_time
            );
            let k = real.rho_index;
            assert!((rec.b_rho - path.values[k]).abs() < 1e-12);
            assert!((rec.mstar - path.running_max_abs[k]).abs() < 1e-12);
            assert!((rec.qv_rho - path.qv[k]).abs() < 1e-12);
            let fam = [
                ProbeMartingale::ConditionalProbability,
                ProbeMartingale::TwoSidedExit { a: -1.0, b: 1.0 },
                ProbeMartingale::SineExponential { lambda: 1.0 },
            ];
            let want: Vec<f64> =
                fam.iter().map(|p| p.eval(&path, &real).unwrap()).collect();
            assert!((rec.m1 - want[0]).abs() < 1e-12, "m1 path {i}");
            assert!((rec.m2 - want[1]).abs() < 1e-12, "m2 path {i}");
            assert!((rec.m3 - want[2]).abs() < 1e-12, "m3 path {i}");
        }
    }

    #[test]
    fn williams_b_rho_is_uniform_mean_half() {
        let grid = GridSpec::new(1.0, 512, 512, 400.0).unwrap();
        let recs = williams_ensemble(&grid, 7, 4000, &[]).unwrap();
        let vals: Vec<f64> =
            recs.iter().filter(|r| !r.capped).map(|r| r.b_rho).collect();
        assert!(vals.len() > 3500, "too many capped paths: {}", recs.len() - vals.len());
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        // B_rho is the pre-sigma maximum, so the discrete skeleton biases it
        // down by O(sqrt(dt)); the band is asymmetric for that reason
        assert!(mean > 0.45 && mean < 0.52, "E[B_rho] = {mean}, expected just under 1/2");
        for v in &vals {
            assert!(*v >= 0.0 && *v <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn capped_williams_paths_are_flagged_and_empty() {
        // tiny cap forces capping; capped records carry no functionals
        let grid = GridSpec::new(1.0, 64, 64, 2.0).unwrap();
        let recs = williams_ensemble(&grid, 3, 500, &[]).unwrap();
        let capped: Vec<_> = recs.iter().filter(|r| r.capped).collect();
        assert!(!capped.is_empty());
        for r in capped {
            assert!(r.m1.is_nan() && r.m2.is_nan() && r.m3.is_nan());
            assert!(r.mstar.is_nan());
            assert!(r.stopped_probes.is_empty());
        }
    }

    #[test]
    fn catalog_ensemble_deterministic_time_matches_horizon_values() {
        let grid = small_grid();
        let spec = RandomTimeSpec::Deterministic { t0: 0.5 };
        let opts = EnsembleOptions {
            azema: true,
            decompose: true,
            probe_times: vec![0.25, 0.75],
            ..Default::default()
        };
        let recs = catalog_ensemble(&grid, 11, 50, &spec, &opts).unwrap();
        for (i, rec) in recs.iter().enumerate() {
            let path = brownian_path(&grid, 11, i as u64).unwrap();
            let k = grid.index_of(0.5);
            assert_eq!(rec.rho_time, 0.5);
            assert!((rec.b_rho - path.values[k]).abs() < 1e-12);
            // stopping time: Z is an indicator that drops at t0, A jumps to 1
            let i = rec.i_rho.unwrap();
            assert!(i > 0.0 && i <= 1.0);
            assert_eq!(rec.a_final, Some(1.0));
            let mt = rec.mtilde_probes.as_ref().unwrap();
            assert!((mt[0] - path.values[grid.index_of(0.25)]).abs() < 1e-12);
            assert!((mt[1] - path.values[k]).abs() < 1e-12, "frozen at rho");
        }
    }

    #[test]
    fn catalog_ensemble_last_zero_has_uniform_looking_i() {
        let grid = GridSpec::fixed(1.0, 512).unwrap();
        let spec = RandomTimeSpec::LastZeroBefore { h: 1.0 };
        let opts = EnsembleOptions { azema: true, ..Default::default() };
        let recs = catalog_ensemble(&grid, 19, 400, &spec, &opts).unwrap();
        let is: Vec<f64> = recs.iter().filter_map(|r| r.i_rho).collect();
        assert_eq!(is.len(), 400);
        let mean = is.iter().sum::<f64>() / is.len() as f64;
        assert!((mean - 0.5).abs() < 0.1, "E[I_rho] = {mean}");
        for i in &is {
            assert!(*i > 0.0 && *i <= 1.0);
        }
    }

    #[test]
    fn sweep_needs_closed_form_z() {
        let grid = small_grid();
        let err = integrand_sweep_ensemble(
            &grid,
            1,
            4,
            &RandomTimeSpec::PseudoWilliams,
            1.0,
            &[1.0, 0.1],
            None,
            &[],
            1e-8,
        )
        .unwrap_err();
        assert!(matches!(err, LabError::Unsupported(_)));
    }

    #[test]
    fn sweep_ratio_grows_as_c_shrinks() {
        let grid = GridSpec::fixed(1.0, 256).unwrap();
        let spec = RandomTimeSpec::LastZeroBefore { h: 1.0 };
        let recs = integrand_sweep_ensemble(
            &grid, 23, 300, &spec, 1.0, &[1.0, 0.01], None, &[], 1e-8,
        )
        .unwrap();
        let mut ratios = [0.0f64; 2];
        for ci in 0..2 {
            let num: f64 = recs.iter().map(|r| r.per_c[ci].0).sum();
            let den: f64 = recs.iter().map(|r| r.per_c[ci].1).sum();
            ratios[ci] = num / den;
        }
        assert!(
            ratios[1] > ratios[0],
            "ratio at c=0.01 ({}) should exceed c=1 ({})",
            ratios[1],
            ratios[0]
        );
    }

    #[test]
    fn terminals_have_unit_variance() {
        let grid = GridSpec::fixed(1.0, 64).unwrap();
        let terms = brownian_terminals(&grid, 31, 20_000).unwrap();
        let mean = terms.iter().sum::<f64>() / terms.len() as f64;
        let var =
            terms.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / terms.len() as f64;
        assert!(mean.abs() < 0.03, "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "var {var}");
    }

    #[test]
    fn poisson_bracket_mean_matches_lambda_rho() {
        let grid = GridSpec::fixed(1.0, 256).unwrap();
        let recs = poisson_at_times(2.0, &grid, 37, &vec![1.0; 5000]).unwrap();
        let mean: f64 = recs.iter().map(|r| r.bracket_rho).sum::<f64>() / recs.len() as f64;
        assert!((mean - 2.0).abs() < 0.1, "E[[M]_1] = {mean}, expected 2");
    }

    #[test]
    fn record_order_is_worker_count_invariant() {
        let grid = small_grid();
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| williams_ensemble(&grid, 99, 64, &[0.5]).unwrap())
        };
        let a = run(1);
        let b = run(4);
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.capped, y.capped);
            if !x.capped {
                assert_eq!(x.rho_time, y.rho_time);
                assert_eq!(x.mstar.to_bits(), y.mstar.to_bits());
                assert_eq!(x.qv_rho.to_bits(), y.qv_rho.to_bits());
            }
        }
    }
}

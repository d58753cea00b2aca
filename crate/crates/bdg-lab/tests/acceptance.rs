//! End-to-end acceptance gate. Each test prints one `criterion N: PASS/FAIL`
//! line with the measured numbers; run with `--nocapture` to see them all.
//!
//! Grid sizes and sweep parameters were pre-registered from oracle runs; the
//! comments state the target band next to each assertion.

use std::time::Instant;

use bdg_lab::enlargement::{decompose, martingale_test, Verdict};
use bdg_lab::experiments::{counterexample_indicator, moment_ratio, uniformity_diagnostics};
use bdg_lab::grid::GridSpec;
use bdg_lab::lab::{
    brownian_terminals, catalog_ensemble, integrand_sweep_ensemble, poisson_at_times,
    williams_ensemble, EnsembleOptions,
};
use bdg_lab::path::brownian_path;
use bdg_lab::stats::MeanAcc;
use bdg_lab::times::{realize, RandomTimeSpec};

const PROBES: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

fn verdict(criterion: &str, ok: bool, detail: &str) {
    println!("criterion {criterion}: {} — {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {criterion} failed: {detail}");
}

fn williams_grid() -> GridSpec {
    GridSpec::new(1.0, 512, 512, 1000.0).unwrap()
}

/// Optional stopping at the Williams pseudo-stopping time: all three bounded
/// probes within 3 SE of zero over 1e5 uncapped paths, under 2 minutes.
#[test]
fn criterion_1_optional_stopping_at_pseudo_stopping_time() {
    let t0 = Instant::now();
    let recs = williams_ensemble(&williams_grid(), 11, 103_000, &PROBES).unwrap();
    let un: Vec<_> = recs.iter().filter(|r| !r.capped).collect();
    let elapsed = t0.elapsed().as_secs_f64();

    let mut detail = format!("n_uncapped={} elapsed={elapsed:.1}s", un.len());
    let mut ok = un.len() >= 100_000 && elapsed < 120.0;
    for (name, vals) in [
        ("conditional_probability", un.iter().map(|r| r.m1).collect::<Vec<_>>()),
        ("two_sided_exit", un.iter().map(|r| r.m2).collect::<Vec<_>>()),
        ("sine_exponential", un.iter().map(|r| r.m3).collect::<Vec<_>>()),
    ] {
        let mut acc = MeanAcc::default();
        vals.iter().for_each(|&v| acc.push(v));
        let z = acc.mean().abs() / acc.se();
        detail.push_str(&format!(" {name}:|z|={z:.2}"));
        ok &= z < 3.0;
    }
    verdict("1", ok, &detail);
}

/// Honest-time failure of optional stopping: E[B_rho] at the argmax before 1
/// equals E[sup B] = sqrt(2/pi) = 0.798, decisively nonzero.
#[test]
fn criterion_2_honest_time_breaks_optional_stopping() {
    // the discrete running max undershoots by ~0.5826 sqrt(dt), so the grid
    // must be fine enough to stay inside the 0.01 band
    let grid = GridSpec::fixed(1.0, 32_768).unwrap();
    let spec = RandomTimeSpec::ArgmaxBefore { h: 1.0 };
    let recs =
        catalog_ensemble(&grid, 11, 100_000, &spec, &EnsembleOptions::default()).unwrap();
    let mut acc = MeanAcc::default();
    recs.iter().for_each(|r| acc.push(r.b_rho));
    let mean = acc.mean();
    let ok = (mean - 0.798).abs() < 0.01 && mean.abs() > 3.0 * acc.se();
    verdict("2", ok, &format!("E[B_rho]={mean:.4} (target 0.798±0.01), se={:.4}", acc.se()));
}

/// The p = 2 two-sided bound at the Williams time and at stopping-time
/// catalog entries: ratio in [1, 4], 95% CI inside [0.8, 4.4].
#[test]
fn criterion_3_p2_moment_ratio_bounds() {
    let recs = williams_ensemble(&williams_grid(), 11, 100_000, &[]).unwrap();
    let pairs: Vec<(f64, f64)> =
        recs.iter().filter(|r| !r.capped).map(|r| (r.mstar, r.qv_rho)).collect();
    let excluded = (recs.len() - pairs.len()) as u64;
    let rep = moment_ratio(&pairs, 2.0, excluded, 11);
    let ratio = rep.ratio.unwrap();
    let ci = rep.ci.unwrap();
    let mut ok = (1.0..=4.0).contains(&ratio) && ci.lo >= 0.8 && ci.hi <= 4.4;
    let mut detail =
        format!("pseudo_williams:ratio={ratio:.3} ci=({:.3},{:.3})", ci.lo, ci.hi);

    let grid = GridSpec::fixed(1.0, 1024).unwrap();
    for id in
        ["deterministic:1", "deterministic:0.5", "first_hit_capped:1:1", "first_hit_capped:0.5:1"]
    {
        let spec = RandomTimeSpec::parse(id).unwrap();
        let recs =
            catalog_ensemble(&grid, 11, 20_000, &spec, &EnsembleOptions::default()).unwrap();
        let pairs: Vec<(f64, f64)> =
            recs.iter().filter(|r| !r.capped).map(|r| (r.mstar, r.qv_rho)).collect();
        let rep = moment_ratio(&pairs, 2.0, (recs.len() - pairs.len()) as u64, 11);
        let ratio = rep.ratio.unwrap();
        let ci = rep.ci.unwrap();
        detail.push_str(&format!(" {id}:ratio={ratio:.3}"));
        ok &= (1.0..=4.0).contains(&ratio) && ci.lo >= 0.8 && ci.hi <= 4.4;
    }
    verdict("3", ok, &detail);
}

/// Bracket version: compensated Poisson (lambda = 2) stopped at a Williams
/// time from an independent driver keeps the p = 2 ratio under the constant
/// 4 (with CI slack), and E[[M]_1] = 2 at N = 1e5.
#[test]
fn criterion_4_bracket_ratio_for_jumps() {
    let grid = williams_grid();
    let lambda = 2.0;
    let jump_seed = 11 ^ 0x9e37_79b9_7f4a_7c15u64;
    let williams = williams_ensemble(&grid, 11, 20_000, &[]).unwrap();
    let rho_times: Vec<f64> = williams.iter().map(|r| r.rho_time).collect();
    let jumps = poisson_at_times(lambda, &grid, jump_seed, &rho_times).unwrap();
    let pairs: Vec<(f64, f64)> =
        jumps.iter().filter(|r| !r.capped).map(|r| (r.mstar, r.bracket_rho)).collect();
    let rep = moment_ratio(&pairs, 2.0, (jumps.len() - pairs.len()) as u64, 11);
    let ratio = rep.ratio.unwrap();
    let ci = rep.ci.unwrap();

    let det = poisson_at_times(lambda, &grid, jump_seed, &vec![1.0; 100_000]).unwrap();
    let mut acc = MeanAcc::default();
    det.iter().for_each(|r| acc.push(r.bracket_rho));
    let bracket_mean = acc.mean();

    let ok = ci.lo <= 4.0 && ratio <= 4.4 && (bracket_mean - 2.0).abs() < 0.05;
    verdict(
        "4",
        ok,
        &format!(
            "ratio={ratio:.3} ci=({:.3},{:.3}) E[[M]_1]={bracket_mean:.4} (target 2.00±0.05)",
            ci.lo, ci.hi
        ),
    );
}

/// No constant bounds E[|B_1|; A] / P(A): the conditional mean given
/// {|B_1| > K} exceeds K for every populated K, and K = 0 recovers
/// E|B_1| = sqrt(2/pi).
#[test]
fn criterion_5_indicator_counterexample() {
    let grid = GridSpec::fixed(1.0, 256).unwrap();
    let terminals = brownian_terminals(&grid, 11, 1_000_000).unwrap();
    let rows = counterexample_indicator(&terminals, &[0.0, 1.0, 2.0, 3.0], 11);
    let mut ok = true;
    let mut detail = String::new();
    for row in &rows {
        let ratio = match row.ratio {
            Some(r) => r,
            None => {
                ok = false;
                detail.push_str(&format!(" K={}:unpopulated", row.k));
                continue;
            }
        };
        detail.push_str(&format!(" K={}:ratio={ratio:.3}(n={})", row.k, row.n_event));
        ok &= ratio >= row.k;
        if row.k == 0.0 {
            ok &= (ratio - 0.798).abs() < 0.01;
        }
    }
    verdict("5", ok, detail.trim());
}

/// The law of I_rho = inf Z before the last zero: uniform on (0,1) by the
/// KS test, with the exponential moments of log(1/I) in their bands.
#[test]
fn criterion_6_infimum_law_is_uniform() {
    let grid = GridSpec::fixed(1.0, 16_384).unwrap();
    let spec = RandomTimeSpec::LastZeroBefore { h: 1.0 };
    let opts = EnsembleOptions { azema: true, ..Default::default() };
    let recs = catalog_ensemble(&grid, 13, 10_000, &spec, &opts).unwrap();
    let is: Vec<f64> = recs.iter().filter_map(|r| r.i_rho).collect();
    let rep = uniformity_diagnostics(&is, 0.01);
    let ok = rep.verdict == Verdict::Pass
        && (rep.mean_log_inv - 1.0).abs() < 0.05
        && (4.6..=18.4).contains(&rep.max_log_inv);
    verdict(
        "6",
        ok,
        &format!(
            "ks={:.4} (thr {:.4}) mean_log_inv={:.4} (target 1.00±0.05) max_log_inv={:.1}",
            rep.ks_statistic, rep.ks_threshold, rep.mean_log_inv, rep.max_log_inv
        ),
    );
}

/// The canonical decomposition: the adjusted martingale passes the
/// conditional martingale test while the raw stopped adversarial integrand
/// fails it, and the pathwise identity is exact.
#[test]
fn criterion_7_enlargement_decomposition() {
    let grid = GridSpec::fixed(1.0, 4096).unwrap();
    let spec = RandomTimeSpec::LastZeroBefore { h: 1.0 };
    let opts = EnsembleOptions {
        azema: true,
        decompose: true,
        probe_times: PROBES.to_vec(),
        ..Default::default()
    };
    let recs = catalog_ensemble(&grid, 19, 10_000, &spec, &opts).unwrap();
    let mtilde: Vec<Vec<f64>> = recs.iter().filter_map(|r| r.mtilde_probes.clone()).collect();
    let r_pass = martingale_test("mtilde_brownian", &mtilde, &PROBES, 0.01);

    let sweep = integrand_sweep_ensemble(
        &grid,
        19,
        10_000,
        &spec,
        1.0,
        &[0.01],
        Some(0),
        &PROBES,
        1e-8,
    )
    .unwrap();
    let raw: Vec<Vec<f64>> = sweep.iter().filter_map(|r| r.stopped_probes.clone()).collect();
    let r_fail = martingale_test("raw_adversarial_stopped", &raw, &PROBES, 0.01);

    // exact pathwise identity on a fresh sample
    let mut worst = 0.0f64;
    for i in 0..200u64 {
        let path = brownian_path(&grid, 19, i).unwrap();
        let real = realize(&spec, &path).unwrap();
        let az = bdg_lab::azema::AzemaBundle::build(&spec, &path, &real).unwrap();
        let d = decompose(&path, &az, &real, 1e-8).unwrap();
        for k in 0..path.values.len() {
            let resid = d.stopped[k] - (d.m_tilde[k] + d.drift[k]);
            worst = worst.max(resid.abs());
        }
    }

    let ok = r_pass.verdict == Verdict::Pass
        && r_fail.verdict == Verdict::Fail
        && worst <= 1e-12;
    verdict(
        "7",
        ok,
        &format!(
            "mtilde={:?} raw_adversarial={:?} identity_residual={worst:.1e}",
            r_pass.verdict, r_fail.verdict
        ),
    );
}

/// Unbounded-growth demonstration: the adversarial sweep grows by a factor >= 2
/// between c = 1 and c = 1e-3 on the honest time, and stays flat (<= 1.2) on
/// the deterministic benchmark. Sweep parameters (alpha = 2, the c grid and
/// N) were pre-registered from an oracle run.
#[test]
fn criterion_8_adversarial_sweep_growth() {
    let grid = GridSpec::fixed(1.0, 2048).unwrap();
    let c_grid = [1.0, 0.1, 0.01, 0.001];
    let mut growths = Vec::new();
    for spec in [
        RandomTimeSpec::LastZeroBefore { h: 1.0 },
        RandomTimeSpec::Deterministic { t0: 1.0 },
    ] {
        let recs =
            integrand_sweep_ensemble(&grid, 17, 50_000, &spec, 2.0, &c_grid, None, &[], 1e-8)
                .unwrap();
        let ratio_at = |ci: usize| {
            let num: f64 =
                recs.iter().filter(|r| !r.capped).map(|r| r.per_c[ci].0).sum();
            let den: f64 =
                recs.iter().filter(|r| !r.capped).map(|r| r.per_c[ci].1).sum();
            num / den
        };
        growths.push(ratio_at(c_grid.len() - 1) / ratio_at(0));
    }
    let ok = growths[0] >= 2.0 && growths[1] <= 1.2;
    verdict(
        "8",
        ok,
        &format!(
            "honest growth={:.3} (need >= 2), deterministic growth={:.3} (need <= 1.2)",
            growths[0], growths[1]
        ),
    );
}

/// Numerical hygiene: qv refinement behaves like sqrt(dt), the dual
/// projection has unit mass, and reports are identical across worker counts.
#[test]
fn criterion_9_numerical_hygiene() {
    // mean-square deviation of qv(1) from 1 halves per grid doubling
    let mut errs = Vec::new();
    for n_steps in [512usize, 1024] {
        let grid = GridSpec::fixed(1.0, n_steps).unwrap();
        let mut acc = MeanAcc::default();
        for i in 0..2000u64 {
            let p = brownian_path(&grid, 41, i).unwrap();
            let q = p.qv.last().unwrap();
            acc.push((q - 1.0) * (q - 1.0));
        }
        errs.push(acc.mean());
    }
    let refinement = errs[0] / errs[1];
    let mut ok = (1.5..=3.0).contains(&refinement);

    // E[A_inf] = 1
    let grid = GridSpec::fixed(1.0, 8192).unwrap();
    let spec = RandomTimeSpec::LastZeroBefore { h: 1.0 };
    let opts = EnsembleOptions { azema: true, ..Default::default() };
    let recs = catalog_ensemble(&grid, 13, 10_000, &spec, &opts).unwrap();
    let mut acc = MeanAcc::default();
    recs.iter().filter_map(|r| r.a_final).for_each(|a| acc.push(a));
    let a_mean = acc.mean();
    ok &= (a_mean - 1.0).abs() < 0.02;

    // identical reports across worker counts
    let run_report = |threads: usize| {
        let dir = tempfile::tempdir().unwrap();
        let cfg = bdg_lab::ExperimentConfig {
            seed: 5,
            grid: GridSpec::new(1.0, 256, 256, 40.0).unwrap(),
            n_paths: 2000,
            time_specs: vec!["pseudo_williams".into(), "last_zero_before:1".into()],
            experiments: vec![
                bdg_lab::ExperimentSpec::MomentRatio { p: 2.0 },
                bdg_lab::ExperimentSpec::Uniformity,
            ],
            output_dir: dir.path().to_path_buf(),
            epsilon_floor: 1e-8,
            probe_times: PROBES.to_vec(),
        };
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| bdg_lab::run(&cfg).unwrap());
        let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
        text.lines()
            .filter(|l| !l.contains("wall_clock_seconds") && !l.contains("output_dir"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    let identical = run_report(1) == run_report(4);
    ok &= identical;

    verdict(
        "9",
        ok,
        &format!(
            "qv_refinement={refinement:.2} (band [1.5,3]) E[A_inf]={a_mean:.4} (target 1.00±0.02) worker_invariant={identical}"
        ),
    );
}

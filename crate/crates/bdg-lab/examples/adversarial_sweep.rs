//! The moment-ratio bound fails without limit at an honest time.
//!
//! Integrates the family f_c(z) = (z + c)^{-alpha} of the Azema
//! supermartingale against Brownian motion and stops at the last zero
//! before 1. As c decreases, the p = 1 ratio E[M*] / E[sqrt(qv)] grows —
//! no constant works for all integrands. The same sweep at a deterministic
//! time stays flat.
//!
//! Run: `cargo run --release --example adversarial_sweep`

use bdg_lab::experiments::adversarial_sweep_report;
use bdg_lab::grid::GridSpec;
use bdg_lab::lab::integrand_sweep_ensemble;
use bdg_lab::times::RandomTimeSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = GridSpec::fixed(1.0, 2048)?;
    let c_grid = [1.0, 0.1, 0.01, 0.001];
    let alpha = 2.0;
    let n_paths = 10_000;

    for spec in [RandomTimeSpec::LastZeroBefore { h: 1.0 }, RandomTimeSpec::Deterministic { t0: 1.0 }] {
        let recs =
            integrand_sweep_ensemble(&grid, 17, n_paths, &spec, alpha, &c_grid, None, &[], 1e-8)?;
        let mut per_c: Vec<(f64, Vec<(f64, f64)>)> =
            c_grid.iter().map(|&c| (c, Vec::new())).collect();
        let mut excluded = 0u64;
        for r in &recs {
            if r.capped {
                excluded += 1;
                continue;
            }
            for (slot, &pair) in per_c.iter_mut().zip(&r.per_c) {
                slot.1.push(pair);
            }
        }
        let rep = adversarial_sweep_report(alpha, &per_c, excluded, 17);
        println!("time spec {:?}, integrand (Z + c)^(-{alpha}):", spec);
        println!("  {:>8} {:>8} {:>18}", "c", "ratio", "95% ci");
        for pt in &rep.points {
            println!("  {:>8} {:>8.3} {:>8.3}–{:<8.3}", pt.c, pt.ratio, pt.ci.lo, pt.ci.hi);
        }
        println!(
            "  growth factor R(c_min)/R(c_max) = {:.3}  (inconclusive = {})\n",
            rep.growth_factor.unwrap_or(f64::NAN),
            rep.inconclusive
        );
    }
    println!("flat at the deterministic time, unbounded growth at the honest one.");
    Ok(())
}

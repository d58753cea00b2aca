//! No constant can bound conditional moments over arbitrary events.
//!
//! For the random time "rho = 1 if |B_1| > K, else 0" the BDG-style bound
//! would force E[|B_1| ; |B_1| > K] <= C * P(|B_1| > K) for a universal C.
//! The conditional mean E[|B_1| | |B_1| > K] exceeds K for every K, so no
//! such constant exists.
//!
//! Run: `cargo run --release --example indicator_counterexample`

use bdg_lab::experiments::counterexample_indicator;
use bdg_lab::grid::GridSpec;
use bdg_lab::lab::brownian_terminals;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = GridSpec::fixed(1.0, 256)?;
    let terminals = brownian_terminals(&grid, 7, 400_000)?;
    println!("{:>4} {:>10} {:>18} {:>10} {:>10}", "K", "ratio", "95% ci", "n_event", "fraction");
    for row in counterexample_indicator(&terminals, &[0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0], 7) {
        match (row.ratio, row.ci) {
            (Some(r), Some(ci)) => println!(
                "{:>4.1} {:>10.3} {:>8.3}–{:<8.3} {:>10} {:>10.5}",
                row.k, r, ci.lo, ci.hi, row.n_event, row.event_fraction
            ),
            _ => println!("{:>4.1} {:>10} (fewer than 30 events)", row.k, "—"),
        }
    }
    println!("\nratio(K) = E[|B_1| given |B_1| > K] >= K grows without bound,");
    println!("so no universal constant C can close the inequality.");
    Ok(())
}

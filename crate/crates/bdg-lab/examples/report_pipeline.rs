//! Full experiment pipeline: config in, report.json + CSVs out.
//!
//! Builds the same configuration the CLI reads from a file, runs every
//! experiment, and lists the artifacts. Output lands in
//! `target/demo-report/`; rerunning with the same seed reproduces the
//! report byte for byte (modulo the wall-clock entry).
//!
//! Run: `cargo run --release --example report_pipeline`

use bdg_lab::{ExperimentConfig, ExperimentSpec, GridSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::path::PathBuf::from("target/demo-report");
    let config = ExperimentConfig {
        seed: 5,
        grid: GridSpec::new(1.0, 512, 512, 50.0)?,
        n_paths: 5_000,
        time_specs: vec![
            "deterministic:1".into(),
            "pseudo_williams".into(),
            "last_zero_before:1".into(),
        ],
        experiments: vec![
            ExperimentSpec::MomentRatio { p: 2.0 },
            ExperimentSpec::OptionalStopping,
            ExperimentSpec::Uniformity,
            ExperimentSpec::BmoBlowup,
        ],
        output_dir: out.clone(),
        epsilon_floor: 1e-8,
        probe_times: vec![0.25, 0.5, 0.75, 1.0],
    };
    let report = bdg_lab::run(&config)?;
    println!(
        "ran {} experiment/time combinations in {:.1}s",
        report.results.len(),
        report.wall_clock_seconds
    );
    println!(
        "exclusions: {} capped paths, {} floored divisions",
        report.exclusions.capped_paths, report.exclusions.floored_divisions
    );
    println!("\nartifacts in {}:", out.display());
    let mut names: Vec<_> = std::fs::read_dir(&out)?
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    for n in names {
        println!("  {n}");
    }
    println!("\nthe same run is available from the CLI:");
    println!("  cargo run --release -- run --config crates/bdg-lab/examples/configs/demo.json");
    Ok(())
}

//! A Monte Carlo laboratory for martingales stopped at arbitrary random
//! times.
//!
//! Classical Burkholder-Davis-Gundy estimates compare the running maximum of
//! a martingale with its quadratic variation at stopping times. This crate
//! simulates what survives of that comparison at more general random times:
//! pseudo-stopping times (where optional stopping still holds), honest times
//! such as the last zero of a Brownian path before a fixed horizon (where it
//! fails, quantifiably), and indicator-type end-of-set times that break the
//! inequalities outright.
//!
//! The building blocks are organized bottom-up:
//!
//! - [`grid`], [`rng`]: shared time grid and reproducible per-path random
//!   streams.
//! - [`path`]: Brownian, stochastic-integral and compensated Poisson paths
//!   with their variation processes.
//! - [`times`]: the catalog of random times (stopping, pseudo-stopping,
//!   honest, indicator) and their per-path realization.
//! - [`azema`]: the conditional survival process `Z_t = P[rho > t | F_t]`,
//!   its Doob-Meyer split, and the infimum functional `I_rho`.
//! - [`enlargement`]: the canonical decomposition of a stopped path in the
//!   progressively enlarged filtration, plus martingale and
//!   optional-stopping tests.
//! - [`lab`]: parallel simulation drivers producing per-path records.
//! - [`experiments`]: ratio, uniformity, blow-up and sweep statistics.
//! - [`report`]: config-driven runner persisting `report.json` and CSVs.
//!
//! Every simulation is reproducible from `(seed, config, version)` and the
//! numeric output is independent of the worker count: each path owns a
//! dedicated RNG stream keyed by its index, and all reductions happen
//! sequentially over records collected in index order.
//!
//! The `examples/` directory contains one runnable program per major
//! capability; start with `cargo run --release --example optional_stopping`.

pub mod azema;
pub mod enlargement;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod lab;
pub mod path;
pub mod report;
pub mod rng;
pub mod stats;
pub mod times;

pub use error::{LabError, Result};
pub use grid::GridSpec;
pub use report::{run, ExperimentConfig, ExperimentReport, ExperimentSpec};
pub use times::RandomTimeSpec;

//! The catalog of random times realized path by path: stopping times, the
//! Williams-type pseudo-stopping time, honest times (last zero / argmax before
//! a fixed horizon), and the indicator time of a terminal event.
//!
//! Zeros are detected by sign change with linear interpolation; argmax ties
//! break to the earliest node, so identical paths always yield identical
//! realizations.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::GridSpec;
use crate::path::PathBundle;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RandomTimeSpec {
    Deterministic { t0: f64 },
    FirstHit { level: f64 },
    FirstHitCapped { level: f64, cap: f64 },
    /// With `T_1` the first hit of level 1 and `sigma` the last zero before
    /// `T_1`, the time in `[0, sigma]` at which the path attains its maximum.
    PseudoWilliams,
    LastZeroBefore { h: f64 },
    ArgmaxBefore { h: f64 },
    /// `rho = 1` if `|B_1| > threshold`, else `rho = 0`.
    Indicator { threshold: f64 },
}

impl RandomTimeSpec {
    pub fn is_stopping_time(&self) -> bool {
        matches!(
            self,
            RandomTimeSpec::Deterministic { .. }
                | RandomTimeSpec::FirstHit { .. }
                | RandomTimeSpec::FirstHitCapped { .. }
        )
    }

    pub fn is_honest(&self) -> bool {
        matches!(
            self,
            RandomTimeSpec::LastZeroBefore { .. } | RandomTimeSpec::ArgmaxBefore { .. }
        )
    }

    /// Stable catalog identifier, e.g. `last_zero_before:1`.
    pub fn catalog_id(&self) -> String {
        match self {
            RandomTimeSpec::Deterministic { t0 } => format!("deterministic:{t0}"),
            RandomTimeSpec::FirstHit { level } => format!("first_hit:{level}"),
            RandomTimeSpec::FirstHitCapped { level, cap } => {
                format!("first_hit_capped:{level}:{cap}")
            }
            RandomTimeSpec::PseudoWilliams => "pseudo_williams".into(),
            RandomTimeSpec::LastZeroBefore { h } => format!("last_zero_before:{h}"),
            RandomTimeSpec::ArgmaxBefore { h } => format!("argmax_before:{h}"),
            RandomTimeSpec::Indicator { threshold } => format!("indicator:{threshold}"),
        }
    }

    /// Parse a catalog identifier.
    pub fn parse(id: &str) -> Result<Self> {
        let unknown = || LabError::UnknownCatalogId {
            got: id.to_string(),
            valid: crate::report::catalog_templates().join(", "),
        };
        let mut parts = id.split(':');
        let head = parts.next().ok_or_else(unknown)?;
        let nums: Vec<f64> = parts
            .map(|s| s.parse::<f64>().map_err(|_| unknown()))
            .collect::<Result<_>>()?;
        let spec = match (head, nums.len()) {
            ("deterministic", 1) => RandomTimeSpec::Deterministic { t0: nums[0] },
            ("first_hit", 1) => RandomTimeSpec::FirstHit { level: nums[0] },
            ("first_hit_capped", 2) => {
                RandomTimeSpec::FirstHitCapped { level: nums[0], cap: nums[1] }
            }
            ("pseudo_williams", 0) => RandomTimeSpec::PseudoWilliams,
            ("last_zero_before", 1) => RandomTimeSpec::LastZeroBefore { h: nums[0] },
            ("argmax_before", 1) => RandomTimeSpec::ArgmaxBefore { h: nums[0] },
            ("indicator", 1) => RandomTimeSpec::Indicator { threshold: nums[0] },
            _ => return Err(unknown()),
        };
        Ok(spec)
    }

    /// Check parameters against a grid before any simulation starts.
    pub fn validate_for_grid(&self, grid: &GridSpec) -> Result<()> {
        let horizon_violation = |what: &str, v: f64| {
            Err(LabError::Config(format!(
                "{} = {v} exceeds the grid horizon {} for `{}`",
                what,
                grid.horizon,
                self.catalog_id()
            )))
        };
        match *self {
            RandomTimeSpec::Deterministic { t0 } => {
                if t0 < 0.0 || t0 > grid.hard_cap {
                    return Err(LabError::Config(format!("t0 = {t0} outside [0, hard_cap]")));
                }
            }
            RandomTimeSpec::LastZeroBefore { h } | RandomTimeSpec::ArgmaxBefore { h } => {
                if h > grid.horizon {
                    return horizon_violation("h", h);
                }
                if h <= 0.0 {
                    return Err(LabError::Config(format!("h must be positive, got {h}")));
                }
            }
            RandomTimeSpec::FirstHitCapped { cap, .. } => {
                if cap > grid.hard_cap || cap < 0.0 {
                    return Err(LabError::Config(format!("cap = {cap} outside [0, hard_cap]")));
                }
            }
            RandomTimeSpec::Indicator { .. } => {
                if grid.horizon < 1.0 {
                    return horizon_violation("required coverage t", 1.0);
                }
            }
            RandomTimeSpec::FirstHit { .. } | RandomTimeSpec::PseudoWilliams => {}
        }
        Ok(())
    }
}

/// Per-path value of a random time as a grid index plus validity flags.
///
/// For `capped` realizations the time could not be resolved before
/// `hard_cap`; `rho_time`/`rho_index` then point at the end of the simulated
/// range and the path must be excluded from estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeRealization {
    pub rho_index: usize,
    pub rho_time: f64,
    pub capped: bool,
    /// Honest time fell back to the initial zero (no zero found in `(0, h]`).
    pub boundary: bool,
    pub kind: RandomTimeSpec,
}

impl TimeRealization {
    fn new(kind: RandomTimeSpec, rho_index: usize, rho_time: f64) -> Self {
        TimeRealization { rho_index, rho_time, capped: false, boundary: false, kind }
    }

    fn capped(kind: RandomTimeSpec, path: &PathBundle) -> Self {
        TimeRealization {
            rho_index: path.len() - 1,
            rho_time: path.end_time(),
            capped: true,
            boundary: false,
            kind,
        }
    }
}

/// Realize any catalog entry on one path.
pub fn realize(spec: &RandomTimeSpec, path: &PathBundle) -> Result<TimeRealization> {
    match spec {
        s if s.is_stopping_time() => realize_stopping_time(s, path),
        RandomTimeSpec::PseudoWilliams => realize_pseudo_stopping_time(path),
        s if s.is_honest() => realize_honest_time(s, path),
        RandomTimeSpec::Indicator { threshold } => indicator_time(*threshold, path),
        _ => unreachable!(),
    }
}

pub fn realize_stopping_time(spec: &RandomTimeSpec, path: &PathBundle) -> Result<TimeRealization> {
    match *spec {
        RandomTimeSpec::Deterministic { t0 } => {
            let i = path.grid.index_of(t0);
            if i >= path.len() {
                return Ok(TimeRealization::capped(*spec, path));
            }
            Ok(TimeRealization::new(*spec, i, path.grid.time(i)))
        }
        RandomTimeSpec::FirstHit { level } => match first_crossing(path, level, path.len() - 1) {
            Some((i, t)) => Ok(TimeRealization::new(*spec, i, t)),
            None => Ok(TimeRealization::capped(*spec, path)),
        },
        RandomTimeSpec::FirstHitCapped { level, cap } => {
            let cap_idx = path.grid.index_of(cap).min(path.len() - 1);
            match first_crossing(path, level, cap_idx) {
                Some((i, t)) => Ok(TimeRealization::new(*spec, i, t)),
                None => Ok(TimeRealization::new(*spec, cap_idx, path.grid.time(cap_idx))),
            }
        }
        _ => Err(LabError::Config(format!("{} is not a stopping time", spec.catalog_id()))),
    }
}

/// Williams construction: `T_1` = first hit of 1, `sigma` = last zero before
/// `T_1`, `rho` = earliest time of the maximum over `[0, sigma]`.
pub fn realize_pseudo_stopping_time(path: &PathBundle) -> Result<TimeRealization> {
    let spec = RandomTimeSpec::PseudoWilliams;
    let t1_idx = match path.values.iter().position(|&v| v >= 1.0) {
        Some(i) => i,
        None => return Ok(TimeRealization::capped(spec, path)),
    };
    let sigma_idx = last_zero_index(&path.values, t1_idx);
    let rho_idx = argmax_index(&path.values[..=sigma_idx]);
    Ok(TimeRealization::new(spec, rho_idx, path.grid.time(rho_idx)))
}

pub fn realize_honest_time(spec: &RandomTimeSpec, path: &PathBundle) -> Result<TimeRealization> {
    match *spec {
        RandomTimeSpec::LastZeroBefore { h } => {
            let h_idx = path.grid.index_of(h).min(path.len() - 1);
            let i = last_zero_index(&path.values, h_idx);
            if i == 0 && no_zero_after_start(&path.values, h_idx) {
                let mut r = TimeRealization::new(spec.clone(), 0, 0.0);
                r.boundary = true;
                return Ok(r);
            }
            let t = interpolate_zero(path, i);
            Ok(TimeRealization::new(*spec, i, t))
        }
        RandomTimeSpec::ArgmaxBefore { h } => {
            let h_idx = path.grid.index_of(h).min(path.len() - 1);
            let i = argmax_index(&path.values[..=h_idx]);
            Ok(TimeRealization::new(*spec, i, path.grid.time(i)))
        }
        _ => Err(LabError::Config(format!("{} is not an honest time", spec.catalog_id()))),
    }
}

/// `rho = 1` if the terminal value at `t = 1` exceeds `threshold` in absolute
/// value, else `rho = 0`.
pub fn indicator_time(threshold: f64, path: &PathBundle) -> Result<TimeRealization> {
    let spec = RandomTimeSpec::Indicator { threshold };
    let i1 = path.grid.index_of(1.0);
    if i1 >= path.len() {
        return Err(LabError::Config("indicator time requires the path to cover [0, 1]".into()));
    }
    if path.values[i1].abs() > threshold {
        Ok(TimeRealization::new(spec, i1, 1.0))
    } else {
        Ok(TimeRealization::new(spec, 0, 0.0))
    }
}

/// First crossing of `level`, scanning nodes `1..=limit`; linear interpolation
/// between the bracketing nodes. Level 0 is hit at the start.
fn first_crossing(path: &PathBundle, level: f64, limit: usize) -> Option<(usize, f64)> {
    if level == 0.0 {
        return Some((0, 0.0));
    }
    let dt = path.dt();
    for i in 1..=limit.min(path.len() - 1) {
        let (a, b) = (path.values[i - 1], path.values[i]);
        let crossed = if level > 0.0 { b >= level } else { b <= level };
        if crossed {
            let frac = if (b - a).abs() > 0.0 { (level - a) / (b - a) } else { 1.0 };
            return Some((i, ((i - 1) as f64 + frac.clamp(0.0, 1.0)) * dt));
        }
    }
    None
}

/// Left node of the last interval `[i, i+1]` with `i + 1 <= limit` containing
/// a zero (node exactly zero, or sign change across the interval).
fn last_zero_index(values: &[f64], limit: usize) -> usize {
    let limit = limit.min(values.len() - 1);
    for i in (0..limit).rev() {
        if values[i] == 0.0 || values[i] * values[i + 1] < 0.0 || values[i + 1] == 0.0 {
            return i;
        }
    }
    0
}

fn no_zero_after_start(values: &[f64], limit: usize) -> bool {
    let limit = limit.min(values.len() - 1);
    for i in 1..limit {
        if values[i] == 0.0 || values[i] * values[i + 1] < 0.0 || values[i + 1] == 0.0 {
            return false;
        }
    }
    true
}

/// Index of the maximum, earliest on ties.
fn argmax_index(values: &[f64]) -> usize {
    let mut best = 0usize;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Interpolated zero time inside `[i, i+1]`.
fn interpolate_zero(path: &PathBundle, i: usize) -> f64 {
    let dt = path.dt();
    if i + 1 >= path.len() {
        return path.grid.time(i);
    }
    let (a, b) = (path.values[i], path.values[i + 1]);
    if a == 0.0 {
        return path.grid.time(i);
    }
    if a * b < 0.0 {
        return (i as f64 + a / (a - b)) * dt;
    }
    // zero sits at the right node
    path.grid.time(i + 1)
}

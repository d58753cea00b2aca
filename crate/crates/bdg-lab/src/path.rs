//! Path generation on a common grid.
//!
//! Brownian paths, stochastic integrals against them, and compensated Poisson
//! jump paths, each carried as a [`PathBundle`] with its running max of
//! absolute value, quadratic variation `⟨M⟩` and bracket `[M]`. Increment
//! streams are exposed separately so that streaming consumers (which never
//! materialize a long path) draw exactly the same randomness as the bundle
//! builders.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::GridSpec;
use crate::rng::path_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    Brownian,
    Integral,
    Jump,
}

/// One simulated trajectory with its pathwise functionals.
///
/// `values[0] == 0`; node `i` sits at time `i * grid.dt()`. Extended paths
/// carry more than `grid.n_steps + 1` nodes.
#[derive(Debug, Clone)]
pub struct PathBundle {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub running_max_abs: Vec<f64>,
    pub qv: Vec<f64>,
    pub bracket: Vec<f64>,
    pub kind: PathKind,
}

impl PathBundle {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.grid.dt()
    }

    /// Time of the last simulated node.
    pub fn end_time(&self) -> f64 {
        self.grid.time(self.len() - 1)
    }

    /// Value at the node nearest to `t`; `None` past the simulated range.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        let i = self.grid.index_of(t);
        self.values.get(i).copied()
    }
}

/// Integrand fed to [`stochastic_integral`]; evaluated at the left endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum IntegrandSpec {
    Constant { k: f64 },
    /// `f(z) = (z + c)^{-alpha}` applied to an auxiliary path (typically the
    /// Azema supermartingale of a random time).
    FunctionOfZ { alpha: f64, c: f64 },
    /// Named function of the driver's own state.
    FunctionOfState { name: StateFunction },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateFunction {
    Identity,
    Sign,
}

impl IntegrandSpec {
    pub fn validate(&self) -> Result<()> {
        if let IntegrandSpec::FunctionOfZ { alpha, c } = self {
            if !(0.0..=2.0).contains(alpha) {
                return Err(LabError::Config(format!("alpha must lie in [0, 2], got {alpha}")));
            }
            if !(*c > 0.0) {
                return Err(LabError::Config(format!("c must be positive, got {c}")));
            }
        }
        Ok(())
    }

    pub fn eval_z(alpha: f64, c: f64, z: f64) -> f64 {
        (z + c).powf(-alpha)
    }
}

/// Stream of Brownian increments `dB ~ N(0, dt)` for one path.
pub struct BrownianIncrements {
    rng: ChaCha8Rng,
    sqrt_dt: f64,
}

impl BrownianIncrements {
    pub fn new(grid: &GridSpec, seed: u64, path_index: u64) -> Self {
        BrownianIncrements { rng: path_rng(seed, path_index), sqrt_dt: grid.dt().sqrt() }
    }

    #[inline]
    pub fn next_increment(&mut self) -> f64 {
        let z: f64 = StandardNormal.sample(&mut self.rng);
        self.sqrt_dt * z
    }
}

/// Stream of per-step jump counts of a Poisson process with rate `lambda`.
pub struct PoissonIncrements {
    rng: ChaCha8Rng,
    dist: Option<Poisson<f64>>,
}

impl PoissonIncrements {
    pub fn new(grid: &GridSpec, lambda: f64, seed: u64, path_index: u64) -> Result<Self> {
        if lambda < 0.0 {
            return Err(LabError::Config(format!("lambda must be >= 0, got {lambda}")));
        }
        let dist = if lambda == 0.0 {
            None
        } else {
            Some(Poisson::new(lambda * grid.dt()).map_err(|e| LabError::Config(e.to_string()))?)
        };
        Ok(PoissonIncrements { rng: path_rng(seed, path_index), dist })
    }

    #[inline]
    pub fn next_count(&mut self) -> u64 {
        match &self.dist {
            Some(d) => d.sample(&mut self.rng) as u64,
            None => 0,
        }
    }
}

/// One Brownian path over `[0, horizon]`.
pub fn brownian_path(grid: &GridSpec, seed: u64, path_index: u64) -> Result<PathBundle> {
    grid.validate()?;
    let mut inc = BrownianIncrements::new(grid, seed, path_index);
    let n = grid.n_steps;
    let mut values = Vec::with_capacity(n + 1);
    values.push(0.0);
    for _ in 0..n {
        let db = inc.next_increment();
        values.push(values.last().unwrap() + db);
    }
    Ok(finish_continuous(grid, values, PathKind::Brownian))
}

/// One Brownian path extended in `extension_chunk` blocks until it first
/// reaches `level`, or until `hard_cap`. Returns the bundle and whether the
/// cap was hit before the level.
pub fn brownian_path_to_level(
    grid: &GridSpec,
    seed: u64,
    path_index: u64,
    level: f64,
) -> Result<(PathBundle, bool)> {
    grid.validate()?;
    let mut inc = BrownianIncrements::new(grid, seed, path_index);
    let max_steps = grid.max_steps();
    let mut values = Vec::with_capacity(grid.n_steps + 1);
    values.push(0.0);
    let mut hit = false;
    let mut steps = 0usize;
    while steps < grid.n_steps || (!hit && steps < max_steps) {
        let block = if steps < grid.n_steps { grid.n_steps - steps } else { grid.extension_chunk.min(max_steps - steps) };
        for _ in 0..block {
            let db = inc.next_increment();
            let v = values.last().unwrap() + db;
            values.push(v);
            if v >= level {
                hit = true;
            }
        }
        steps += block;
        if hit && steps >= grid.n_steps {
            break;
        }
    }
    let capped = !hit;
    Ok((finish_continuous(grid, values, PathKind::Brownian), capped))
}

fn finish_continuous(grid: &GridSpec, values: Vec<f64>, kind: PathKind) -> PathBundle {
    let qv = qv_of_values(&values);
    let running_max_abs = running_max_abs_of_values(&values);
    PathBundle { grid: *grid, bracket: qv.clone(), values, running_max_abs, qv, kind }
}

/// Ensemble of independent Brownian paths over `[0, horizon]`.
pub fn generate_brownian(grid: &GridSpec, seed: u64, n_paths: usize) -> Result<Vec<PathBundle>> {
    grid.validate()?;
    if n_paths == 0 {
        return Err(LabError::Config("n_paths must be >= 1".into()));
    }
    (0..n_paths as u64)
        .into_par_iter()
        .map(|i| brownian_path(grid, seed, i))
        .collect()
}

/// Compensated Poisson martingale `M_t = N_t - lambda t` on `[0, horizon]`.
/// The bracket is the jump count `N_t`; the continuous part `⟨M⟩` is zero.
pub fn compensated_poisson(
    lambda: f64,
    grid: &GridSpec,
    seed: u64,
    n_paths: usize,
) -> Result<Vec<PathBundle>> {
    grid.validate()?;
    if n_paths == 0 {
        return Err(LabError::Config("n_paths must be >= 1".into()));
    }
    (0..n_paths as u64)
        .into_par_iter()
        .map(|i| compensated_poisson_path(lambda, grid, seed, i, grid.n_steps))
        .collect()
}

/// One compensated Poisson path simulated for `n_steps` steps (which may
/// exceed `grid.n_steps` when the path must cover a late random time).
pub fn compensated_poisson_path(
    lambda: f64,
    grid: &GridSpec,
    seed: u64,
    path_index: u64,
    n_steps: usize,
) -> Result<PathBundle> {
    let mut inc = PoissonIncrements::new(grid, lambda, seed, path_index)?;
    let dt = grid.dt();
    let mut values = Vec::with_capacity(n_steps + 1);
    let mut bracket = Vec::with_capacity(n_steps + 1);
    values.push(0.0);
    bracket.push(0.0);
    let mut count = 0u64;
    for step in 1..=n_steps {
        count += inc.next_count();
        values.push(count as f64 - lambda * dt * step as f64);
        bracket.push(count as f64);
    }
    let running_max_abs = running_max_abs_of_values(&values);
    Ok(PathBundle {
        grid: *grid,
        qv: vec![0.0; values.len()],
        values,
        running_max_abs,
        bracket,
        kind: PathKind::Jump,
    })
}

/// Cumulative sum of squared increments (realized quadratic variation).
pub fn quadratic_variation(path: &PathBundle) -> Vec<f64> {
    qv_of_values(&path.values)
}

/// Pointwise `sup_{s<=t} |M_s|`.
pub fn running_max_abs(path: &PathBundle) -> Vec<f64> {
    running_max_abs_of_values(&path.values)
}

pub(crate) fn qv_of_values(values: &[f64]) -> Vec<f64> {
    let mut qv = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    qv.push(0.0);
    for w in values.windows(2) {
        let d = w[1] - w[0];
        acc += d * d;
        qv.push(acc);
    }
    qv
}

pub(crate) fn running_max_abs_of_values(values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut m = 0.0f64;
    for &v in values {
        m = m.max(v.abs());
        out.push(m);
    }
    out
}

/// Left-endpoint (predictable) stochastic integral of an integrand against a
/// driver path: `(f · M)_t = sum f(t_i) (M_{t_{i+1}} - M_{t_i})`.
///
/// `aux` supplies the auxiliary `Z` path required by
/// [`IntegrandSpec::FunctionOfZ`], aligned node-for-node with the driver.
pub fn stochastic_integral(
    integrand: &IntegrandSpec,
    driver: &PathBundle,
    aux: Option<&[f64]>,
) -> Result<PathBundle> {
    integrand.validate()?;
    if let IntegrandSpec::FunctionOfZ { .. } = integrand {
        let aux = aux.ok_or_else(|| {
            LabError::Alignment("function_of_Z integrand requires an aux Z path".into())
        })?;
        if aux.len() != driver.len() {
            return Err(LabError::Alignment(format!(
                "aux path has {} nodes, driver has {}",
                aux.len(),
                driver.len()
            )));
        }
    }
    let n = driver.len();
    let mut values = Vec::with_capacity(n);
    let mut qv = Vec::with_capacity(n);
    values.push(0.0);
    qv.push(0.0);
    let mut acc = 0.0;
    let mut acc_qv = 0.0;
    for i in 0..n - 1 {
        let f = match integrand {
            IntegrandSpec::Constant { k } => *k,
            IntegrandSpec::FunctionOfZ { alpha, c } => {
                IntegrandSpec::eval_z(*alpha, *c, aux.unwrap()[i])
            }
            IntegrandSpec::FunctionOfState { name } => match name {
                StateFunction::Identity => driver.values[i],
                StateFunction::Sign => {
                    if driver.values[i] == 0.0 {
                        0.0
                    } else {
                        driver.values[i].signum()
                    }
                }
            },
        };
        let dm = driver.values[i + 1] - driver.values[i];
        acc += f * dm;
        acc_qv += f * f * dm * dm;
        values.push(acc);
        qv.push(acc_qv);
    }
    let running_max_abs = running_max_abs_of_values(&values);
    Ok(PathBundle {
        grid: driver.grid,
        bracket: qv.clone(),
        values,
        running_max_abs,
        qv,
        kind: PathKind::Integral,
    })
}

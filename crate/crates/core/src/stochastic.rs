// SPDX-License-Identifier: Apache-2.0

//! Finite-population Monte Carlo of the cooperator-count master equation.
//!
//! Each micro step selects one update attempt: the count moves up with
//! probability `T⁺`, down with probability `T⁻`, and otherwise stays. The
//! resource then takes an explicit Euler step of length `1/N`, so `N` micro
//! steps make up one unit of model time.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    resource_rhs, transition_probabilities, ModelError, ModelParams, ParamError, SystemState,
    UpdateRule,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StochasticError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid ensemble config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MicroState {
    pub cooperators: u32,
    pub r: f64,
    pub tau: u64,
}

impl MicroState {
    /// `n_c = round(x₀ N)`, halves rounded toward more cooperators.
    pub fn from_state(s: SystemState, population: u32) -> Self {
        let n = f64::from(population);
        let cooperators = (s.x * n + 0.5).floor().clamp(0.0, n) as u32;
        Self {
            cooperators,
            r: s.r,
            tau: 0,
        }
    }

    pub fn fraction(&self, population: u32) -> f64 {
        f64::from(self.cooperators) / f64::from(population)
    }

    pub fn time(&self, population: u32) -> f64 {
        self.tau as f64 / f64::from(population)
    }
}

/// `(T⁺, T⁻)` for a population with `cooperators` of `N` cooperating.
pub fn transition_rates(
    rule: UpdateRule,
    cooperators: u32,
    r: f64,
    p: &ModelParams,
) -> Result<(f64, f64), StochasticError> {
    let x = f64::from(cooperators) / f64::from(p.population);
    Ok(transition_probabilities(rule, SystemState { r, x }, p)?)
}

/// One update attempt followed by one Euler step of the resource.
///
/// `p` is expected to be valid; for invalid Moran parameters the rates are
/// not probabilities and the count is left unchanged.
pub fn step_micro<R: Rng + ?Sized>(
    state: MicroState,
    rule: UpdateRule,
    p: &ModelParams,
    rng: &mut R,
) -> MicroState {
    let n = p.population;
    let x = state.fraction(n);
    let (t_plus, t_minus) =
        transition_probabilities(rule, SystemState { r: state.r, x }, p).unwrap_or((0.0, 0.0));
    let u: f64 = rng.random();
    let cooperators = if u < t_plus {
        (state.cooperators + 1).min(n)
    } else if u < t_plus + t_minus {
        state.cooperators.saturating_sub(1)
    } else {
        state.cooperators
    };
    let r = (state.r + resource_rhs(state.r, x, p) / f64::from(n)).clamp(0.0, 1.0);
    MicroState {
        cooperators,
        r,
        tau: state.tau + 1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub replicas: usize,
    pub t_end: f64,
    pub seed: u64,
    /// Number of sampling intervals; statistics are reported at
    /// `samples + 1` evenly spaced times including `0` and `t_end`.
    pub samples: usize,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            replicas: 100,
            t_end: 10.0,
            seed: 0,
            samples: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub sample_times: Vec<f64>,
    pub mean_x: Vec<f64>,
    pub std_x: Vec<f64>,
    pub mean_r: Vec<f64>,
    pub std_r: Vec<f64>,
    pub replicas: usize,
    pub seed: u64,
}

/// RNG stream of replica `index`: ChaCha8 keyed by `seed`, stream `index`.
pub fn replica_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Sample tick `j` in micro steps.
fn sample_tau(j: usize, cfg: &EnsembleConfig, population: u32) -> u64 {
    (j as f64 * cfg.t_end * f64::from(population) / cfg.samples as f64).round() as u64
}

fn run_replica(
    rule: UpdateRule,
    p: &ModelParams,
    s0: SystemState,
    cfg: &EnsembleConfig,
    index: usize,
) -> Vec<(f64, f64)> {
    let mut rng = replica_rng(cfg.seed, index);
    let mut state = MicroState::from_state(s0, p.population);
    let mut out = Vec::with_capacity(cfg.samples + 1);
    for j in 0..=cfg.samples {
        let target = sample_tau(j, cfg, p.population);
        while state.tau < target {
            state = step_micro(state, rule, p, &mut rng);
        }
        out.push((state.r, state.fraction(p.population)));
    }
    out
}

pub fn run_ensemble(
    rule: UpdateRule,
    p: &ModelParams,
    s0: SystemState,
    cfg: &EnsembleConfig,
) -> Result<EnsembleStats, StochasticError> {
    p.validate()?;
    if cfg.replicas < 2 {
        return Err(StochasticError::Config(
            "replicas must be at least 2".into(),
        ));
    }
    if !(cfg.t_end.is_finite() && cfg.t_end > 0.0) || cfg.samples == 0 {
        return Err(StochasticError::Config(
            "t_end must be positive and samples at least 1".into(),
        ));
    }
    if SystemState::new(s0.r, s0.x).is_err() {
        return Err(StochasticError::Config(format!(
            "initial state ({}, {}) outside the unit square",
            s0.r, s0.x
        )));
    }

    let runs: Vec<Vec<(f64, f64)>> = (0..cfg.replicas)
        .into_par_iter()
        .map(|i| run_replica(rule, p, s0, cfg, i))
        .collect();

    let n = cfg.replicas as f64;
    let k = cfg.samples + 1;
    let mut stats = EnsembleStats {
        sample_times: Vec::with_capacity(k),
        mean_x: Vec::with_capacity(k),
        std_x: Vec::with_capacity(k),
        mean_r: Vec::with_capacity(k),
        std_r: Vec::with_capacity(k),
        replicas: cfg.replicas,
        seed: cfg.seed,
    };
    for j in 0..k {
        let tau = sample_tau(j, cfg, p.population);
        stats
            .sample_times
            .push(tau as f64 / f64::from(p.population));
        let (mr, sr) = mean_std(runs.iter().map(|run| run[j].0), n);
        let (mx, sx) = mean_std(runs.iter().map(|run| run[j].1), n);
        stats.mean_r.push(mr);
        stats.std_r.push(sr);
        stats.mean_x.push(mx);
        stats.std_x.push(sx);
    }
    Ok(stats)
}

/// Sample mean and (n − 1)-normalised standard deviation.
fn mean_std(values: impl Iterator<Item = f64> + Clone, n: f64) -> (f64, f64) {
    let mean = values.clone().sum::<f64>() / n;
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

// SPDX-License-Identifier: Apache-2.0

//! Shared fixtures for the benchmarks.

use cprsim_core::{EnsembleConfig, GridSpec, IntegratorConfig, ModelParams, SystemState};

pub fn reference_params() -> ModelParams {
    ModelParams::default()
}

/// Starting point inside the sustainable basin of the pairwise rules.
pub fn start() -> SystemState {
    SystemState { r: 0.8, x: 0.9 }
}

/// Coarse steps with a horizon long enough for the fast rules to settle.
pub fn bench_integrator() -> IntegratorConfig {
    IntegratorConfig {
        dt: 0.01,
        t_max: 200.0,
        ..IntegratorConfig::default()
    }
}

pub fn small_grid() -> GridSpec {
    GridSpec::with_size(11, 11).expect("11x11 is a valid grid")
}

pub fn small_ensemble() -> EnsembleConfig {
    EnsembleConfig {
        replicas: 8,
        t_end: 2.0,
        seed: 0,
        samples: 10,
    }
}

/// Evenly spaced interior states for right-hand-side throughput.
pub fn state_cloud(n: usize) -> Vec<SystemState> {
    (0..n * n)
        .map(|i| SystemState {
            r: (i / n) as f64 / (n - 1) as f64,
            x: (i % n) as f64 / (n - 1) as f64,
        })
        .collect()
}

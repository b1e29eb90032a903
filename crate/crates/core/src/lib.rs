// SPDX-License-Identifier: Apache-2.0

//! Coupled dynamics of a common-pool resource and the cooperator fraction of
//! the population harvesting it.
//!
//! - [`model`]: parameters, update rules and right-hand sides
//! - [`integrator`]: fixed-step RK4 with box clamping and extinction absorption
//! - [`equilibria`]: stationary points, Jacobians and stability classes
//! - [`sweep`]: basin-of-attraction maps over initial conditions
//! - [`stochastic`]: finite-population master-equation Monte Carlo
//! - [`output`]: CSV writers and report documents

pub mod equilibria;
pub mod integrator;
pub mod model;
pub mod output;
pub mod stochastic;
pub mod sweep;

pub use equilibria::{
    analyze, classify, equilibrium_reports, jacobian, neutral_threshold, stationary_points,
    Equilibrium, EquilibriumKind, EquilibriumReport, Stability,
};
pub use integrator::{
    integrate, integrate_to_equilibrium, Endpoint, IntegrationError, IntegratorConfig, Termination,
    Trajectory,
};
pub use model::{
    coupled_derivative, resource_derivative, strategy_derivative, switch_probabilities, ModelError,
    ModelParams, ParamError, SystemState, UpdateRule,
};
pub use stochastic::{run_ensemble, EnsembleConfig, EnsembleStats, MicroState};
pub use sweep::{classify_endpoint, run_basin_sweep, BasinMap, GridSpec, OutcomeClass};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

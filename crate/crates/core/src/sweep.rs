// SPDX-License-Identifier: Apache-2.0

//! Basin-of-attraction sweeps over a grid of initial conditions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::integrator::{integrate_to_equilibrium, Endpoint, IntegratorConfig, Termination};
use crate::model::{ModelParams, SystemState, UpdateRule};

/// Resource level below which an endpoint counts as depleted.
pub const DEPLETION_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid needs at least 2 points per axis (got {n_r}x{n_x})")]
    TooFewPoints { n_r: usize, n_x: usize },
    #[error("grid bounds must satisfy 0 < r0_min <= r0_max <= 1 and 0 <= x0_min <= x0_max <= 1")]
    Bounds,
}

/// Initial-condition grid, endpoints inclusive on both axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub r0_min: f64,
    pub r0_max: f64,
    pub x0_min: f64,
    pub x0_max: f64,
    pub n_r: usize,
    pub n_x: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            r0_min: 0.01,
            r0_max: 1.0,
            x0_min: 0.0,
            x0_max: 1.0,
            n_r: 101,
            n_x: 101,
        }
    }
}

impl GridSpec {
    pub fn new(
        r0_min: f64,
        r0_max: f64,
        x0_min: f64,
        x0_max: f64,
        n_r: usize,
        n_x: usize,
    ) -> Result<Self, GridError> {
        let g = Self {
            r0_min,
            r0_max,
            x0_min,
            x0_max,
            n_r,
            n_x,
        };
        g.validate()?;
        Ok(g)
    }

    /// Default bounds with `n_r × n_x` points.
    pub fn with_size(n_r: usize, n_x: usize) -> Result<Self, GridError> {
        let g = Self {
            n_r,
            n_x,
            ..Self::default()
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), GridError> {
        if self.n_r < 2 || self.n_x < 2 {
            return Err(GridError::TooFewPoints {
                n_r: self.n_r,
                n_x: self.n_x,
            });
        }
        let ok = self.r0_min > 0.0
            && self.r0_min <= self.r0_max
            && self.r0_max <= 1.0
            && self.x0_min >= 0.0
            && self.x0_min <= self.x0_max
            && self.x0_max <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(GridError::Bounds)
        }
    }

    pub fn len(&self) -> usize {
        self.n_r * self.n_x
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn axis(min: f64, max: f64, n: usize, i: usize) -> f64 {
        if i + 1 == n {
            max
        } else {
            min + (max - min) * i as f64 / (n - 1) as f64
        }
    }

    /// Initial condition of cell `index` in row-major order (R₀ outer, x₀ inner).
    pub fn initial_state(&self, index: usize) -> SystemState {
        let (i, j) = (index / self.n_x, index % self.n_x);
        SystemState {
            r: Self::axis(self.r0_min, self.r0_max, self.n_r, i),
            x: Self::axis(self.x0_min, self.x0_max, self.n_x, j),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutcomeClass {
    Depleted,
    Sustainable,
    Unresolved,
}

impl OutcomeClass {
    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeClass::Depleted => "depleted",
            OutcomeClass::Sustainable => "sustainable",
            OutcomeClass::Unresolved => "unresolved",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasinCell {
    pub initial: SystemState,
    pub final_state: SystemState,
    pub class: OutcomeClass,
    pub steps: u64,
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasinMap {
    pub spec: GridSpec,
    /// Row-major: `cells[i_r * n_x + i_x]`.
    pub cells: Vec<BasinCell>,
}

impl BasinMap {
    pub fn cell(&self, i_r: usize, i_x: usize) -> &BasinCell {
        &self.cells[i_r * self.spec.n_x + i_x]
    }

    pub fn count(&self, class: OutcomeClass) -> usize {
        self.cells.iter().filter(|c| c.class == class).count()
    }
}

pub fn classify_endpoint(end: &Endpoint) -> OutcomeClass {
    if end.state.r < DEPLETION_THRESHOLD {
        OutcomeClass::Depleted
    } else if end.terminal == Termination::Converged || end.chattering_average {
        OutcomeClass::Sustainable
    } else {
        OutcomeClass::Unresolved
    }
}

/// One integration per grid cell, run in parallel; per-cell failures become
/// `Unresolved` cells carrying the error text.
pub fn run_basin_sweep(
    rule: UpdateRule,
    p: &ModelParams,
    grid: &GridSpec,
    cfg: &IntegratorConfig,
) -> Result<BasinMap, GridError> {
    grid.validate()?;
    let cells = (0..grid.len())
        .into_par_iter()
        .map(|index| {
            let initial = grid.initial_state(index);
            match integrate_to_equilibrium(rule, p, initial, cfg) {
                Ok(end) => BasinCell {
                    initial,
                    final_state: end.state,
                    class: classify_endpoint(&end),
                    steps: end.steps,
                    diagnostic: None,
                },
                Err(err) => BasinCell {
                    initial,
                    final_state: initial,
                    class: OutcomeClass::Unresolved,
                    steps: 0,
                    diagnostic: Some(err.to_string()),
                },
            }
        })
        .collect();
    Ok(BasinMap { spec: *grid, cells })
}

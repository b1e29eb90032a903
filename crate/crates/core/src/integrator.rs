// SPDX-License-Identifier: Apache-2.0

//! Fixed-step RK4 integration of the coupled system.
//!
//! After every step the state is clamped back into the unit square and a
//! resource level below `eps_extinct` is absorbed to exactly zero. A run stops
//! early once the derivative norm has been below `eps_converge` at two
//! consecutive states.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{coupled_rhs, ModelParams, ParamError, SystemState, UpdateRule};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrationError {
    #[error("invalid integrator config: {0}")]
    Config(String),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("non-finite state at t = {t} (step size too large?)")]
    NonFinite { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_max: f64,
    pub eps_converge: f64,
    pub eps_extinct: f64,
    /// Keep every `sample_every`-th step in a [`Trajectory`].
    pub sample_every: usize,
    /// Largest per-coordinate range over the final tenth of a unit-step run
    /// that still counts as a settled chattering average.
    pub chatter_tol: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_max: 1000.0,
            eps_converge: 1e-9,
            eps_extinct: 1e-9,
            sample_every: 1,
            chatter_tol: 1e-2,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), IntegrationError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.dt) || !positive(self.t_max) || self.dt >= self.t_max {
            return Err(IntegrationError::Config(format!(
                "need 0 < dt < t_max (dt = {}, t_max = {})",
                self.dt, self.t_max
            )));
        }
        if !positive(self.eps_converge) || !positive(self.eps_extinct) {
            return Err(IntegrationError::Config(
                "eps_converge and eps_extinct must be positive".into(),
            ));
        }
        if self.sample_every == 0 {
            return Err(IntegrationError::Config("sample_every must be >= 1".into()));
        }
        if self.chatter_tol.is_nan() || self.chatter_tol < 0.0 {
            return Err(IntegrationError::Config("chatter_tol must be >= 0".into()));
        }
        Ok(())
    }

    /// Number of steps needed to reach `t_max`; the last one may be short.
    fn step_count(&self) -> u64 {
        let full = (self.t_max / self.dt).floor();
        let rem = self.t_max - full * self.dt;
        full as u64 + u64::from(rem > 1e-12 * self.t_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    HorizonReached,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SystemState>,
    pub terminal: Termination,
}

impl Trajectory {
    pub fn last(&self) -> SystemState {
        *self
            .states
            .last()
            .expect("trajectory holds the initial state")
    }
}

/// Final state of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Endpoint {
    pub state: SystemState,
    pub terminal: Termination,
    pub steps: u64,
    pub t: f64,
    /// The state is a time average over the final tenth of a chattering
    /// unit-step run whose spread stayed within `chatter_tol`.
    pub chattering_average: bool,
}

struct Stepper<'a> {
    rule: UpdateRule,
    p: &'a ModelParams,
    cfg: &'a IntegratorConfig,
}

impl Stepper<'_> {
    #[inline]
    fn rhs(&self, r: f64, x: f64) -> (f64, f64) {
        coupled_rhs(self.rule, r, x, self.p)
    }

    /// One RK4 step given `k1 = f(s)`, followed by clamping and absorption.
    #[inline]
    fn step(&self, s: SystemState, k1: (f64, f64), h: f64, absorbed: bool) -> SystemState {
        let (r, x) = (s.r, s.x);
        let k2 = self.rhs(r + 0.5 * h * k1.0, x + 0.5 * h * k1.1);
        let k3 = self.rhs(r + 0.5 * h * k2.0, x + 0.5 * h * k2.1);
        let k4 = self.rhs(r + h * k3.0, x + h * k3.1);
        let r_new = r + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        let x_new = x + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        let mut next = SystemState::clamped(r_new, x_new);
        if absorbed || next.r < self.cfg.eps_extinct {
            next.r = 0.0;
        }
        // clamp() passes NaN through
        if !r_new.is_finite() || !x_new.is_finite() {
            next.r = f64::NAN;
        }
        next
    }

    /// Drives the loop, handing every post-step state to `observe`.
    fn run(
        &self,
        s0: SystemState,
        mut observe: impl FnMut(u64, f64, SystemState),
    ) -> Result<Endpoint, IntegrationError> {
        let cfg = self.cfg;
        let n_steps = cfg.step_count();
        let mut s = s0;
        let mut absorbed = s.r < cfg.eps_extinct;
        if absorbed {
            s.r = 0.0;
        }
        let mut quiet = 0u32;
        let mut t = 0.0;
        for i in 0..n_steps {
            let k1 = self.rhs(s.r, s.x);
            if k1.0.hypot(k1.1) < cfg.eps_converge {
                quiet += 1;
                if quiet >= 2 {
                    return Ok(Endpoint {
                        state: s,
                        terminal: Termination::Converged,
                        steps: i,
                        t,
                        chattering_average: false,
                    });
                }
            } else {
                quiet = 0;
            }
            let t_next = ((i + 1) as f64 * cfg.dt).min(cfg.t_max);
            s = self.step(s, k1, t_next - t, absorbed);
            if !s.r.is_finite() || !s.x.is_finite() {
                return Err(IntegrationError::NonFinite { t: t_next });
            }
            absorbed = s.r == 0.0;
            t = t_next;
            observe(i + 1, t, s);
        }
        let k = self.rhs(s.r, s.x);
        let converged = quiet >= 1 && k.0.hypot(k.1) < cfg.eps_converge;
        Ok(Endpoint {
            state: s,
            terminal: if converged {
                Termination::Converged
            } else {
                Termination::HorizonReached
            },
            steps: n_steps,
            t,
            chattering_average: false,
        })
    }
}

fn prepare(
    p: &ModelParams,
    s0: SystemState,
    cfg: &IntegratorConfig,
) -> Result<(), IntegrationError> {
    cfg.validate()?;
    p.validate()?;
    if SystemState::new(s0.r, s0.x).is_err() {
        return Err(IntegrationError::Config(format!(
            "initial state ({}, {}) outside the unit square",
            s0.r, s0.x
        )));
    }
    Ok(())
}

/// Integrates from `s0`, keeping every `sample_every`-th state plus the last.
pub fn integrate(
    rule: UpdateRule,
    p: &ModelParams,
    s0: SystemState,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, IntegrationError> {
    prepare(p, s0, cfg)?;
    let mut times = vec![0.0];
    let mut states = vec![s0];
    let mut last_kept = 0u64;
    let stepper = Stepper { rule, p, cfg };
    let end = stepper.run(s0, |i, t, s| {
        if i % cfg.sample_every as u64 == 0 {
            times.push(t);
            states.push(s);
            last_kept = i;
        }
    })?;
    if end.steps > last_kept {
        times.push(end.t);
        states.push(end.state);
    }
    if let Some(first) = states.first_mut() {
        if first.r < cfg.eps_extinct {
            first.r = 0.0;
        }
    }
    Ok(Trajectory {
        times,
        states,
        terminal: end.terminal,
    })
}

/// Integrates until convergence or the horizon and returns only the endpoint.
///
/// Unit-step runs that never converge report the mean of the final tenth of
/// their states instead of the last one.
pub fn integrate_to_equilibrium(
    rule: UpdateRule,
    p: &ModelParams,
    s0: SystemState,
    cfg: &IntegratorConfig,
) -> Result<Endpoint, IntegrationError> {
    prepare(p, s0, cfg)?;
    let stepper = Stepper { rule, p, cfg };
    if rule != UpdateRule::UnitStepOfR {
        return stepper.run(s0, |_, _, _| {});
    }

    let window_start = cfg.step_count() - cfg.step_count() / 10;
    let mut window = Window::default();
    let end = stepper.run(s0, |i, _, s| {
        if i > window_start {
            window.push(s);
        }
    })?;
    if end.terminal == Termination::Converged || window.count == 0 {
        return Ok(end);
    }
    Ok(Endpoint {
        state: window.mean(),
        chattering_average: window.spread() <= cfg.chatter_tol,
        ..end
    })
}

#[derive(Default)]
struct Window {
    count: u64,
    sum: (f64, f64),
    lo: Option<(f64, f64)>,
    hi: Option<(f64, f64)>,
}

impl Window {
    fn push(&mut self, s: SystemState) {
        self.count += 1;
        self.sum.0 += s.r;
        self.sum.1 += s.x;
        let lo = self.lo.get_or_insert((s.r, s.x));
        lo.0 = lo.0.min(s.r);
        lo.1 = lo.1.min(s.x);
        let hi = self.hi.get_or_insert((s.r, s.x));
        hi.0 = hi.0.max(s.r);
        hi.1 = hi.1.max(s.x);
    }

    fn mean(&self) -> SystemState {
        let n = self.count as f64;
        SystemState::clamped(self.sum.0 / n, self.sum.1 / n)
    }

    fn spread(&self) -> f64 {
        match (self.lo, self.hi) {
            (Some(lo), Some(hi)) => (hi.0 - lo.0).max(hi.1 - lo.1),
            _ => 0.0,
        }
    }
}

// SPDX-License-Identifier: Apache-2.0

//! Reference right-hand sides and a plain RK4, written out from the model
//! equations without going through the library.

#![allow(dead_code)]

use cprsim_core::{ModelParams, UpdateRule};

pub fn baseline() -> ModelParams {
    ModelParams::default()
}

pub fn oracle_rhs(rule: UpdateRule, p: &ModelParams, r: f64, x: f64) -> (f64, f64) {
    let t = p.growth_rate;
    let dr = t * (r * (1.0 - r) - r * (x * p.ec_hat + (1.0 - x) * p.ed_hat));
    let e_c = t * p.ec_hat / f64::from(p.population);
    let e_d = t * p.ed_hat / f64::from(p.population);
    let w = p.greed;
    let dx = match rule {
        UpdateRule::Replicator => -w * r * x * (1.0 - x),
        UpdateRule::Moran => {
            w * r * x * (1.0 - x) * (e_c - e_d)
                / (1.0 - w + w * (x * r * e_c + (1.0 - x) * r * e_d))
        }
        UpdateRule::Fermi => x * (1.0 - x) * (w / 2.0 * (r * e_c - r * e_d)).tanh(),
        UpdateRule::LinearOfR => 1.0 - x - r,
        UpdateRule::UnitStepOfR => 1.0 - x - if r >= p.threshold { 1.0 } else { 0.0 },
        UpdateRule::LogisticOfR => 1.0 - x - 1.0 / (1.0 + (-p.intensity * (r - p.threshold)).exp()),
    };
    (dr, dx)
}

/// Unclamped RK4 from `(r, x)` over `[0, t_end]` with `steps` equal steps.
pub fn oracle_rk4(
    rule: UpdateRule,
    p: &ModelParams,
    (mut r, mut x): (f64, f64),
    t_end: f64,
    steps: usize,
) -> (f64, f64) {
    let h = t_end / steps as f64;
    let f = |r: f64, x: f64| oracle_rhs(rule, p, r, x);
    for _ in 0..steps {
        let k1 = f(r, x);
        let k2 = f(r + h / 2.0 * k1.0, x + h / 2.0 * k1.1);
        let k3 = f(r + h / 2.0 * k2.0, x + h / 2.0 * k2.1);
        let k4 = f(r + h * k3.0, x + h * k3.1);
        r += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        x += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
    }
    (r, x)
}

// SPDX-License-Identifier: Apache-2.0

//! Stationary points, Jacobians and stability classes.
//!
//! Closed forms are available for every rule except the logistic one, whose
//! fixed points are found numerically by damped iteration on the nullclines.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    coupled_rhs, logistic, moran_denominator, ModelError, ModelParams, ParamError, SystemState,
    UpdateRule,
};

/// Finite-difference step of [`jacobian`].
pub const FD_STEP: f64 = 1e-6;
/// Default tolerance of [`classify`].
pub const CLASSIFY_TOL: f64 = 1e-8;

const LOGISTIC_DAMPING: f64 = 0.5;
const LOGISTIC_MAX_ITER: usize = 10_000;
const LOGISTIC_TOL: f64 = 1e-12;
const LOGISTIC_DEDUP: f64 = 1e-6;

pub type Matrix2 = [[f64; 2]; 2];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquilibriumError {
    #[error("Jacobian of the unit-step rule is undefined within {h} of the threshold (R = {r})")]
    Discontinuity { r: f64, h: f64 },
    #[error("neutral threshold needs ed_hat > ec_hat (got ec_hat = {ec_hat}, ed_hat = {ed_hat})")]
    ExtractionOrder { ec_hat: f64, ed_hat: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Params(#[from] ParamError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumKind {
    DepletedPoint,
    /// `R = 0` for every `x`; `state.x` is a free coordinate.
    DepletedLine,
    SustainablePoint,
    NumericalFixedPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub kind: EquilibriumKind,
    pub state: SystemState,
}

impl Equilibrium {
    /// The same equilibrium at another position along a depleted line.
    pub fn on_line(&self, x: f64) -> Self {
        debug_assert_eq!(self.kind, EquilibriumKind::DepletedLine);
        Self {
            kind: self.kind,
            state: SystemState { r: 0.0, x },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
    Saddle,
    Neutral,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    pub equilibrium: Equilibrium,
    pub jacobian: Matrix2,
    pub eigenvalues: [Complex64; 2],
    pub det: f64,
    pub trace: f64,
    pub stability: Stability,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StationaryPoints {
    pub points: Vec<Equilibrium>,
    /// Set when some logistic seeds failed to converge.
    pub diagnostic: Option<String>,
}

pub fn stationary_points(rule: UpdateRule, p: &ModelParams) -> StationaryPoints {
    let sustainable_r = 1.0 - p.ec_hat;
    let point = |kind, r, x| Equilibrium {
        kind,
        state: SystemState { r, x },
    };
    match rule {
        UpdateRule::Replicator | UpdateRule::Moran | UpdateRule::Fermi => StationaryPoints {
            points: vec![
                point(EquilibriumKind::DepletedLine, 0.0, 0.0),
                point(EquilibriumKind::SustainablePoint, sustainable_r, 1.0),
            ],
            diagnostic: None,
        },
        UpdateRule::LinearOfR => {
            let denom = 1.0 - p.ec_hat + p.ed_hat;
            StationaryPoints {
                points: vec![
                    point(EquilibriumKind::DepletedPoint, 0.0, 1.0),
                    point(
                        EquilibriumKind::SustainablePoint,
                        sustainable_r / denom,
                        p.ed_hat / denom,
                    ),
                ],
                diagnostic: None,
            }
        }
        UpdateRule::UnitStepOfR => {
            let mut points = vec![point(EquilibriumKind::DepletedPoint, 0.0, 1.0)];
            // x = 1 needs θ[R − c] = 0 at the sustainable level.
            if sustainable_r < p.threshold {
                points.push(point(EquilibriumKind::SustainablePoint, sustainable_r, 1.0));
            }
            StationaryPoints {
                points,
                diagnostic: None,
            }
        }
        UpdateRule::LogisticOfR => logistic_fixed_points(p),
    }
}

/// Damped iteration of `(R, x) ↦ (R_null(x), x_null(R))` from a 5×5 seed grid.
///
/// `R_null` is the resource nullcline branch the seed starts on: zero for
/// seeds with `R = 0`, otherwise `1 − x ê_C − (1 − x) ê_D` clipped to `[0, 1]`.
fn logistic_fixed_points(p: &ModelParams) -> StationaryPoints {
    let x_null = |r: f64| 1.0 - logistic(p.intensity * (r - p.threshold));
    let r_null = |x: f64| (1.0 - x * p.ec_hat - (1.0 - x) * p.ed_hat).clamp(0.0, 1.0);

    let mut found: Vec<SystemState> = Vec::new();
    let mut failed = 0usize;
    let seeds = (0..5).flat_map(|i| (0..5).map(move |j| (i as f64 / 4.0, j as f64 / 4.0)));
    for (r0, x0) in seeds {
        let on_depleted = r0 == 0.0;
        let (mut r, mut x) = (r0, x0);
        let mut converged = false;
        for _ in 0..LOGISTIC_MAX_ITER {
            let target_r = if on_depleted { 0.0 } else { r_null(x) };
            let target_x = x_null(r);
            let (dr, dx) = (target_r - r, target_x - x);
            r += LOGISTIC_DAMPING * dr;
            x += LOGISTIC_DAMPING * dx;
            if dr.abs().max(dx.abs()) < LOGISTIC_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            failed += 1;
            continue;
        }
        if r < 1e-10 {
            // collapsed onto the depleted branch; finish there exactly
            r = 0.0;
            x = x_null(0.0);
        }
        let s = SystemState::clamped(r, x);
        let (dr, dx) = coupled_rhs(UpdateRule::LogisticOfR, s.r, s.x, p);
        if dr.hypot(dx) > 1e-10 {
            failed += 1;
            continue;
        }
        if !found.iter().any(|f| f.distance(&s) < LOGISTIC_DEDUP) {
            found.push(s);
        }
    }
    found.sort_by(|a, b| a.r.total_cmp(&b.r).then(a.x.total_cmp(&b.x)));
    StationaryPoints {
        points: found
            .into_iter()
            .map(|state| Equilibrium {
                kind: EquilibriumKind::NumericalFixedPoint,
                state,
            })
            .collect(),
        diagnostic: (failed > 0).then(|| {
            format!(
                "{failed} of 25 logistic seeds did not converge within {LOGISTIC_MAX_ITER} iterations"
            )
        }),
    }
}

/// Central-difference Jacobian `∂(dR/dt, dx/dt)/∂(R, x)` with step [`FD_STEP`].
pub fn jacobian(
    rule: UpdateRule,
    p: &ModelParams,
    s: SystemState,
) -> Result<Matrix2, EquilibriumError> {
    check_differentiable(rule, p, s)?;
    let h = FD_STEP;
    let f = |r, x| coupled_rhs(rule, r, x, p);
    let (rp, rm) = (f(s.r + h, s.x), f(s.r - h, s.x));
    let (xp, xm) = (f(s.r, s.x + h), f(s.r, s.x - h));
    Ok([
        [(rp.0 - rm.0) / (2.0 * h), (xp.0 - xm.0) / (2.0 * h)],
        [(rp.1 - rm.1) / (2.0 * h), (xp.1 - xm.1) / (2.0 * h)],
    ])
}

fn check_differentiable(
    rule: UpdateRule,
    p: &ModelParams,
    s: SystemState,
) -> Result<(), EquilibriumError> {
    if rule == UpdateRule::UnitStepOfR && (s.r - p.threshold).abs() < FD_STEP {
        return Err(EquilibriumError::Discontinuity { r: s.r, h: FD_STEP });
    }
    if rule == UpdateRule::Moran {
        let denom = moran_denominator(s, p);
        if denom <= 0.0 {
            return Err(ModelError::MoranDenominator(denom).into());
        }
    }
    Ok(())
}

/// Hand-derived partial derivatives of the coupled right-hand side.
pub fn analytic_jacobian(
    rule: UpdateRule,
    p: &ModelParams,
    s: SystemState,
) -> Result<Matrix2, EquilibriumError> {
    check_differentiable(rule, p, s)?;
    let (r, x) = (s.r, s.x);
    let t = p.growth_rate;
    let w = p.greed;
    let (ec_hat, ed_hat) = (p.ec_hat, p.ed_hat);
    let resource_row = [
        t * (1.0 - 2.0 * r - x * ec_hat - (1.0 - x) * ed_hat),
        t * r * (ed_hat - ec_hat),
    ];
    let meet = x * (1.0 - x);
    let dmeet = 1.0 - 2.0 * x;
    let strategy_row = match rule {
        UpdateRule::Replicator => [-w * meet, -w * r * dmeet],
        UpdateRule::Moran => {
            // dx/dt = w (e_C − e_D) · R·meet / D,  D = 1 − w + w R (x e_C + (1 − x) e_D)
            let ec = p.raw_cooperator_extraction();
            let ed = p.raw_defector_extraction();
            let a = w * (ec - ed);
            let mix = x * ec + (1.0 - x) * ed;
            let d = 1.0 - w + w * r * mix;
            let d_dr = w * mix;
            let d_dx = w * r * (ec - ed);
            [
                a * meet * (d - r * d_dr) / (d * d),
                a * r * (dmeet * d - meet * d_dx) / (d * d),
            ]
        }
        UpdateRule::Fermi => {
            let ec = p.raw_cooperator_extraction();
            let ed = p.raw_defector_extraction();
            let b = 0.5 * w * (ec - ed);
            let th = (b * r).tanh();
            [meet * b * (1.0 - th * th), dmeet * th]
        }
        UpdateRule::LinearOfR => [-1.0, -1.0],
        UpdateRule::UnitStepOfR => [0.0, -1.0],
        UpdateRule::LogisticOfR => {
            let sig = logistic(p.intensity * (r - p.threshold));
            [-p.intensity * sig * (1.0 - sig), -1.0]
        }
    };
    Ok([resource_row, strategy_row])
}

pub fn det(m: &Matrix2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

pub fn trace(m: &Matrix2) -> f64 {
    m[0][0] + m[1][1]
}

/// Roots of `λ² − Tr λ + Det`, larger real part first.
pub fn eigenvalues(m: &Matrix2) -> [Complex64; 2] {
    let tr = trace(m);
    let half = 0.5 * tr;
    // discriminant in a form that avoids cancellation for near-diagonal matrices
    let disc = 0.25 * (m[0][0] - m[1][1]).powi(2) + m[0][1] * m[1][0];
    if disc >= 0.0 {
        let root = disc.sqrt();
        let big = half + root.copysign(half);
        // Vieta for the smaller-magnitude root avoids cancellation
        let small = if big != 0.0 {
            det(m) / big
        } else {
            half - root.copysign(half)
        };
        let (a, b) = if big >= small {
            (big, small)
        } else {
            (small, big)
        };
        [Complex64::new(a, 0.0), Complex64::new(b, 0.0)]
    } else {
        let im = (-disc).sqrt();
        [Complex64::new(half, im), Complex64::new(half, -im)]
    }
}

/// Stability class from determinant, trace and eigenvalues.
///
/// `Stable` when `Det > tol` and `Tr < −tol`; `Saddle` when `Det < −tol`;
/// `Neutral` when some eigenvalue has `|Re λ| ≤ tol` and none has
/// `Re λ > tol`; `Unstable` otherwise.
pub fn classify(m: &Matrix2, tol: f64) -> Stability {
    let (d, tr) = (det(m), trace(m));
    if d > tol && tr < -tol {
        return Stability::Stable;
    }
    if d < -tol {
        return Stability::Saddle;
    }
    let ev = eigenvalues(m);
    let has_zero = ev.iter().any(|l| l.re.abs() <= tol);
    let has_growth = ev.iter().any(|l| l.re > tol);
    if has_zero && !has_growth {
        Stability::Neutral
    } else {
        Stability::Unstable
    }
}

/// Largest `x` below which the depleted line is neutrally stable for the
/// pairwise rules: `(ê_D − 1)/(ê_D − ê_C)`, clipped to `[0, 1]`.
pub fn neutral_threshold(ec_hat: f64, ed_hat: f64) -> Result<f64, EquilibriumError> {
    if ed_hat.is_nan() || ec_hat.is_nan() || ed_hat <= ec_hat {
        return Err(EquilibriumError::ExtractionOrder { ec_hat, ed_hat });
    }
    Ok(((ed_hat - 1.0) / (ed_hat - ec_hat)).clamp(0.0, 1.0))
}

pub fn analyze(
    rule: UpdateRule,
    p: &ModelParams,
    equilibrium: Equilibrium,
) -> Result<EquilibriumReport, EquilibriumError> {
    let jacobian = jacobian(rule, p, equilibrium.state)?;
    Ok(EquilibriumReport {
        equilibrium,
        eigenvalues: eigenvalues(&jacobian),
        det: det(&jacobian),
        trace: trace(&jacobian),
        stability: classify(&jacobian, CLASSIFY_TOL),
        jacobian,
    })
}

/// Reports for every stationary point, sampling depleted lines at
/// `line_samples` evenly spaced `x` values (endpoints included).
pub fn equilibrium_reports(
    rule: UpdateRule,
    p: &ModelParams,
    line_samples: usize,
) -> Result<(Vec<EquilibriumReport>, Option<String>), EquilibriumError> {
    p.validate()?;
    let found = stationary_points(rule, p);
    let mut reports = Vec::new();
    for eq in found.points {
        if eq.kind == EquilibriumKind::DepletedLine {
            let n = line_samples.max(2);
            for i in 0..n {
                reports.push(analyze(rule, p, eq.on_line(i as f64 / (n - 1) as f64))?);
            }
        } else {
            reports.push(analyze(rule, p, eq)?);
        }
    }
    Ok((reports, found.diagnostic))
}

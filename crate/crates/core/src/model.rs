// SPDX-License-Identifier: Apache-2.0

//! Model constants and right-hand sides of the coupled resource/strategy
//! dynamics.
//!
//! The resource `R` follows logistic growth (carrying capacity normalised to
//! one) minus extraction by cooperators and defectors. The cooperator fraction
//! `x` follows `dx/dt = T⁺ − T⁻`, where the transition probabilities come from
//! one of six update rules: three pairwise imitation rules driven by payoff
//! differences and three rules driven directly by the resource level.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("growth rate T must be positive and finite (got {0})")]
    GrowthRate(f64),
    #[error("cooperator extraction violates 0 < ec_hat < 1 (got {0})")]
    CooperatorExtraction(f64),
    #[error("defector extraction violates ed_hat > 1 (got {0})")]
    DefectorExtraction(f64),
    #[error("greed parameter violates -1 <= w <= 0 (got {0})")]
    Greed(f64),
    #[error("threshold violates 0 < c < 1 (got {0})")]
    Threshold(f64),
    #[error("intensity violates k > 0 (got {0})")]
    Intensity(f64),
    #[error("population size must be at least 1")]
    Population,
    #[error(
        "Moran denominator 1 - w + w*U is not positive for all reachable payoffs: \
         raw defector extraction e_D = {raw_defector} must stay below 1 + 1/|w| = {bound}"
    )]
    MoranDenominator { raw_defector: f64, bound: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("Moran denominator 1 - w + w<U> = {0} is not positive")]
    MoranDenominator(f64),
}

/// All constants of the coupled system.
///
/// Extraction rates are stored in normalised form (`ê = N·e/T`); the raw
/// per-player rates used by the payoff-driven rules are derived on demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Natural growth rate of the resource.
    #[serde(rename = "T")]
    pub growth_rate: f64,
    /// Normalised cooperator extraction `ê_C`.
    pub ec_hat: f64,
    /// Normalised defector extraction `ê_D`.
    pub ed_hat: f64,
    /// Greed parameter `w`.
    #[serde(rename = "w")]
    pub greed: f64,
    /// Resource threshold `c` of the unit-step and logistic rules.
    #[serde(rename = "c")]
    pub threshold: f64,
    /// Steepness `k` of the logistic rule.
    #[serde(rename = "k")]
    pub intensity: f64,
    /// Population size `N`.
    #[serde(rename = "N")]
    pub population: u32,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            growth_rate: 2.0,
            ec_hat: 0.7,
            ed_hat: 2.0,
            greed: -1.0,
            threshold: 0.5,
            intensity: 10.0,
            population: 100,
        }
    }
}

impl ModelParams {
    pub fn new(
        growth_rate: f64,
        ec_hat: f64,
        ed_hat: f64,
        greed: f64,
        threshold: f64,
        intensity: f64,
        population: u32,
    ) -> Result<Self, ParamError> {
        let p = Self {
            growth_rate,
            ec_hat,
            ed_hat,
            greed,
            threshold,
            intensity,
            population,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.growth_rate.is_finite() && self.growth_rate > 0.0) {
            return Err(ParamError::GrowthRate(self.growth_rate));
        }
        if !(self.ec_hat > 0.0 && self.ec_hat < 1.0) {
            return Err(ParamError::CooperatorExtraction(self.ec_hat));
        }
        if !(self.ed_hat.is_finite() && self.ed_hat > 1.0) {
            return Err(ParamError::DefectorExtraction(self.ed_hat));
        }
        if !((-1.0..=0.0).contains(&self.greed)) {
            return Err(ParamError::Greed(self.greed));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(ParamError::Threshold(self.threshold));
        }
        if !(self.intensity.is_finite() && self.intensity > 0.0) {
            return Err(ParamError::Intensity(self.intensity));
        }
        if self.population == 0 {
            return Err(ParamError::Population);
        }
        // 1 - w + wU is affine in U and U ranges over [0, e_D]; with w <= 0
        // the minimum sits at U = e_D.
        let raw_defector = self.raw_defector_extraction();
        if 1.0 - self.greed + self.greed * raw_defector <= 0.0 {
            return Err(ParamError::MoranDenominator {
                raw_defector,
                bound: 1.0 + 1.0 / self.greed.abs(),
            });
        }
        Ok(())
    }

    /// Per-player cooperator extraction `e_C = T·ê_C/N`.
    pub fn raw_cooperator_extraction(&self) -> f64 {
        self.growth_rate * self.ec_hat / f64::from(self.population)
    }

    /// Per-player defector extraction `e_D = T·ê_D/N`.
    pub fn raw_defector_extraction(&self) -> f64 {
        self.growth_rate * self.ed_hat / f64::from(self.population)
    }

    /// Largest payoff gap `e_D − e_C`, attained at `R = 1`.
    pub fn max_payoff_gap(&self) -> f64 {
        self.raw_defector_extraction() - self.raw_cooperator_extraction()
    }
}

/// Resource level `R` and cooperator fraction `x`, both in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    #[serde(rename = "R")]
    pub r: f64,
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("state ({r}, {x}) lies outside the unit square")]
pub struct StateError {
    pub r: f64,
    pub x: f64,
}

impl SystemState {
    pub fn new(r: f64, x: f64) -> Result<Self, StateError> {
        if (0.0..=1.0).contains(&r) && (0.0..=1.0).contains(&x) {
            Ok(Self { r, x })
        } else {
            Err(StateError { r, x })
        }
    }

    pub fn clamped(r: f64, x: f64) -> Self {
        Self {
            r: r.clamp(0.0, 1.0),
            x: x.clamp(0.0, 1.0),
        }
    }

    pub fn distance(&self, other: &SystemState) -> f64 {
        (self.r - other.r).hypot(self.x - other.x)
    }
}

/// Strategy-update rule driving the transition probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpdateRule {
    Replicator,
    Moran,
    Fermi,
    #[serde(rename = "linear")]
    LinearOfR,
    #[serde(rename = "unit-step")]
    UnitStepOfR,
    #[serde(rename = "logistic")]
    LogisticOfR,
}

impl UpdateRule {
    pub const ALL: [UpdateRule; 6] = [
        UpdateRule::Replicator,
        UpdateRule::Moran,
        UpdateRule::Fermi,
        UpdateRule::LinearOfR,
        UpdateRule::UnitStepOfR,
        UpdateRule::LogisticOfR,
    ];

    pub fn name(self) -> &'static str {
        match self {
            UpdateRule::Replicator => "replicator",
            UpdateRule::Moran => "moran",
            UpdateRule::Fermi => "fermi",
            UpdateRule::LinearOfR => "linear",
            UpdateRule::UnitStepOfR => "unit-step",
            UpdateRule::LogisticOfR => "logistic",
        }
    }

    /// Human-readable form of the strategy equation.
    pub fn strategy_equation(self) -> &'static str {
        match self {
            UpdateRule::Replicator => "dx/dt = -w R x (1 - x)",
            UpdateRule::Moran => {
                "dx/dt = w R x (1 - x) (e_C - e_D) / (1 - w + w (x R e_C + (1 - x) R e_D))"
            }
            UpdateRule::Fermi => "dx/dt = x (1 - x) tanh(w/2 (R e_C - R e_D))",
            UpdateRule::LinearOfR => "dx/dt = 1 - x - R",
            UpdateRule::UnitStepOfR => "dx/dt = 1 - x - theta[R - c]",
            UpdateRule::LogisticOfR => "dx/dt = 1 - x - 1/(1 + exp(-k (R - c)))",
        }
    }

    /// Replicator, Moran and Fermi compare payoffs of two sampled players.
    pub fn is_pairwise(self) -> bool {
        matches!(
            self,
            UpdateRule::Replicator | UpdateRule::Moran | UpdateRule::Fermi
        )
    }
}

impl fmt::Display for UpdateRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown update rule `{0}` (valid: replicator, moran, fermi, linear, unit-step, logistic)")]
pub struct UnknownRule(pub String);

impl FromStr for UpdateRule {
    type Err = UnknownRule;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        UpdateRule::ALL
            .into_iter()
            .find(|rule| rule.name() == s)
            .ok_or_else(|| UnknownRule(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Payoffs {
    pub cooperator: f64,
    pub defector: f64,
    pub mean: f64,
}

impl Payoffs {
    pub fn at(s: SystemState, p: &ModelParams) -> Self {
        let cooperator = s.r * p.raw_cooperator_extraction();
        let defector = s.r * p.raw_defector_extraction();
        Self {
            cooperator,
            defector,
            mean: s.x * cooperator + (1.0 - s.x) * defector,
        }
    }
}

/// Per-player switching probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchProbabilities {
    /// Defector → cooperator.
    pub to_cooperate: f64,
    /// Cooperator → defector.
    pub to_defect: f64,
}

/// Heaviside step with `θ[0] = 1`.
pub fn heaviside(z: f64) -> f64 {
    if z >= 0.0 {
        1.0
    } else {
        0.0
    }
}

pub fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// `dR/dt = T (R(1 − R) − R(x ê_C + (1 − x) ê_D))`.
pub fn resource_derivative(s: SystemState, p: &ModelParams) -> f64 {
    resource_rhs(s.r, s.x, p)
}

#[inline]
pub(crate) fn resource_rhs(r: f64, x: f64, p: &ModelParams) -> f64 {
    p.growth_rate * (r * (1.0 - r) - r * (x * p.ec_hat + (1.0 - x) * p.ed_hat))
}

/// Closed-form `dx/dt` for the active rule.
pub fn strategy_derivative(
    rule: UpdateRule,
    s: SystemState,
    p: &ModelParams,
) -> Result<f64, ModelError> {
    if rule == UpdateRule::Moran {
        let denom = moran_denominator(s, p);
        if denom <= 0.0 {
            return Err(ModelError::MoranDenominator(denom));
        }
    }
    Ok(strategy_rhs(rule, s.r, s.x, p))
}

pub(crate) fn moran_denominator(s: SystemState, p: &ModelParams) -> f64 {
    let u = Payoffs::at(s, p);
    1.0 - p.greed + p.greed * u.mean
}

/// Unchecked closed forms; defined on all of ℝ² so finite differences may
/// step slightly outside the box.
#[inline]
pub(crate) fn strategy_rhs(rule: UpdateRule, r: f64, x: f64, p: &ModelParams) -> f64 {
    let w = p.greed;
    match rule {
        UpdateRule::Replicator => -w * r * (1.0 - x) * x,
        UpdateRule::Moran => {
            let ec = p.raw_cooperator_extraction();
            let ed = p.raw_defector_extraction();
            w * r * x * (1.0 - x) * (ec - ed) / (1.0 - w + w * (x * r * ec + (1.0 - x) * r * ed))
        }
        UpdateRule::Fermi => {
            let ec = p.raw_cooperator_extraction();
            let ed = p.raw_defector_extraction();
            x * (1.0 - x) * (0.5 * w * (r * ec - r * ed)).tanh()
        }
        UpdateRule::LinearOfR => 1.0 - x - r,
        UpdateRule::UnitStepOfR => 1.0 - x - heaviside(r - p.threshold),
        UpdateRule::LogisticOfR => 1.0 - x - logistic(p.intensity * (r - p.threshold)),
    }
}

pub fn coupled_derivative(
    rule: UpdateRule,
    s: SystemState,
    p: &ModelParams,
) -> Result<(f64, f64), ModelError> {
    Ok((resource_derivative(s, p), strategy_derivative(rule, s, p)?))
}

#[inline]
pub(crate) fn coupled_rhs(rule: UpdateRule, r: f64, x: f64, p: &ModelParams) -> (f64, f64) {
    (resource_rhs(r, x, p), strategy_rhs(rule, r, x, p))
}

/// Switching probabilities of a single sampled player.
///
/// For the Moran rule the defector → cooperator value is a fitness ratio
/// `(1 − w + wU_C)/(1 − w + w⟨U⟩)`, which sits slightly above one whenever
/// `U_C < ⟨U⟩`; the transition rates built from it stay within `[0, 1]`.
pub fn switch_probabilities(
    rule: UpdateRule,
    s: SystemState,
    p: &ModelParams,
) -> Result<SwitchProbabilities, ModelError> {
    let u = Payoffs::at(s, p);
    let w = p.greed;
    let (to_cooperate, to_defect) = match rule {
        UpdateRule::Replicator => {
            let gap = p.max_payoff_gap();
            (
                0.5 + 0.5 * w * (u.cooperator - u.defector) / gap,
                0.5 + 0.5 * w * (u.defector - u.cooperator) / gap,
            )
        }
        UpdateRule::Moran => {
            let denom = 1.0 - w + w * u.mean;
            if denom <= 0.0 {
                return Err(ModelError::MoranDenominator(denom));
            }
            (
                (1.0 - w + w * u.cooperator) / denom,
                (1.0 - w + w * u.defector) / denom,
            )
        }
        UpdateRule::Fermi => (
            logistic(w * (u.cooperator - u.defector)),
            logistic(w * (u.defector - u.cooperator)),
        ),
        UpdateRule::LinearOfR => (1.0 - s.r, s.r),
        UpdateRule::UnitStepOfR => {
            let q = heaviside(s.r - p.threshold);
            (1.0 - q, q)
        }
        UpdateRule::LogisticOfR => {
            let q = logistic(p.intensity * (s.r - p.threshold));
            (1.0 - q, q)
        }
    };
    Ok(SwitchProbabilities {
        to_cooperate,
        to_defect,
    })
}

/// Population-level transition probabilities `(T⁺, T⁻)` at cooperator
/// fraction `s.x`.
///
/// Pairwise rules need a cooperator and a defector to meet, giving the
/// `x(1 − x)` factor; resource-driven rules only need the focal player to
/// hold the strategy being abandoned.
pub fn transition_probabilities(
    rule: UpdateRule,
    s: SystemState,
    p: &ModelParams,
) -> Result<(f64, f64), ModelError> {
    let q = switch_probabilities(rule, s, p)?;
    let x = s.x;
    Ok(if rule.is_pairwise() {
        let meet = x * (1.0 - x);
        (meet * q.to_cooperate, meet * q.to_defect)
    } else {
        ((1.0 - x) * q.to_cooperate, x * q.to_defect)
    })
}

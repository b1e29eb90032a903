// SPDX-License-Identifier: Apache-2.0

//! Flat run settings shared by flags and config files.
//!
//! Every key mirrors its flag name (`ec-hat`, `t-max`, `T`, `N`, ...). A
//! config file is either TOML or JSON (picked by extension); a run manifest
//! is also accepted, in which case its `config` table is used. Flags always
//! win over file values, which win over built-in defaults.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use cprsim_core::{
    EnsembleConfig, GridSpec, IntegratorConfig, ModelParams, SystemState, UpdateRule,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// `RxC` grid size, e.g. `101x101`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSize {
    pub n_r: usize,
    pub n_x: usize,
}

impl FromStr for GridSize {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("grid `{s}` is not of the form RxC"))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| format!("grid `{s}` is not of the form RxC"))
        };
        Ok(Self {
            n_r: parse(a)?,
            n_x: parse(b)?,
        })
    }
}

impl fmt::Display for GridSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.n_r, self.n_x)
    }
}

impl Serialize for GridSize {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GridSize {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Settings {
    /// Update rule: replicator, moran, fermi, linear, unit-step, logistic
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<String>,
    /// Natural growth rate of the resource
    #[arg(long = "T", allow_negative_numbers = true)]
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub growth_rate: Option<f64>,
    /// Normalised cooperator extraction, 0 < ec-hat < 1
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ec_hat: Option<f64>,
    /// Normalised defector extraction, ed-hat > 1
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ed_hat: Option<f64>,
    /// Greed parameter in [-1, 0]
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    /// Resource threshold of the unit-step and logistic rules
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// Logistic intensity
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    /// Population size
    #[arg(long = "N")]
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub population: Option<u32>,
    /// Initial resource level
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
    /// Initial cooperator fraction
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    /// RK4 step size
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Integration horizon
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    /// Derivative-norm convergence threshold
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_converge: Option<f64>,
    /// Resource level absorbed to zero
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_extinct: Option<f64>,
    /// Chattering spread accepted for unit-step averages
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chatter_tol: Option<f64>,
    /// Keep every n-th integration step in trajectory output
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_every: Option<usize>,
    /// Sweep grid size as RxC
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSize>,
    /// Stochastic replicas
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicas: Option<usize>,
    /// Base seed of the replica RNG streams
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Ensemble end time
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    /// Ensemble sampling intervals
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Output directory
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Data file format
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

macro_rules! overlay {
    ($hi:expr, $lo:expr, $($field:ident),+ $(,)?) => {
        Settings { $($field: $hi.$field.or($lo.$field)),+ }
    };
}

impl Settings {
    /// Values of `self`, falling back to `lower` where unset.
    pub fn over(self, lower: Settings) -> Settings {
        overlay!(
            self,
            lower,
            rule,
            growth_rate,
            ec_hat,
            ed_hat,
            w,
            c,
            k,
            population,
            r0,
            x0,
            dt,
            t_max,
            eps_converge,
            eps_extinct,
            chatter_tol,
            sample_every,
            grid,
            replicas,
            seed,
            t_end,
            samples,
            output,
            format,
        )
    }

    pub fn load(path: &Path) -> Result<Settings, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        let bad = |e: &dyn fmt::Display| {
            CliError::Validation(format!("invalid config {}: {e}", path.display()))
        };
        let is_json = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if is_json {
            let mut value: serde_json::Value = serde_json::from_str(&text).map_err(|e| bad(&e))?;
            // manifests carry the effective settings under `config`
            if let Some(inner) = value.get_mut("config") {
                value = inner.take();
            }
            serde_json::from_value(value).map_err(|e| bad(&e))
        } else {
            toml::from_str(&text).map_err(|e| bad(&e))
        }
    }

    pub fn rule(&self) -> Result<UpdateRule, CliError> {
        self.rule
            .as_deref()
            .unwrap_or("replicator")
            .parse()
            .map_err(|e: cprsim_core::model::UnknownRule| CliError::Validation(e.to_string()))
    }

    pub fn params(&self) -> Result<ModelParams, CliError> {
        let d = ModelParams::default();
        ModelParams::new(
            self.growth_rate.unwrap_or(d.growth_rate),
            self.ec_hat.unwrap_or(d.ec_hat),
            self.ed_hat.unwrap_or(d.ed_hat),
            self.w.unwrap_or(d.greed),
            self.c.unwrap_or(d.threshold),
            self.k.unwrap_or(d.intensity),
            self.population.unwrap_or(d.population),
        )
        .map_err(|e| CliError::Validation(e.to_string()))
    }

    pub fn initial_state(&self) -> Result<SystemState, CliError> {
        SystemState::new(self.r0.unwrap_or(0.8), self.x0.unwrap_or(0.9))
            .map_err(|e| CliError::Validation(format!("initial {e}")))
    }

    pub fn integrator(&self, default_sample_every: usize) -> Result<IntegratorConfig, CliError> {
        let d = IntegratorConfig::default();
        let cfg = IntegratorConfig {
            dt: self.dt.unwrap_or(d.dt),
            t_max: self.t_max.unwrap_or(d.t_max),
            eps_converge: self.eps_converge.unwrap_or(d.eps_converge),
            eps_extinct: self.eps_extinct.unwrap_or(d.eps_extinct),
            sample_every: self.sample_every.unwrap_or(default_sample_every),
            chatter_tol: self.chatter_tol.unwrap_or(d.chatter_tol),
        };
        cfg.validate()
            .map_err(|e| CliError::Validation(e.to_string()))?;
        Ok(cfg)
    }

    pub fn grid(&self) -> Result<GridSpec, CliError> {
        let d = GridSpec::default();
        let size = self.grid.unwrap_or(GridSize {
            n_r: d.n_r,
            n_x: d.n_x,
        });
        GridSpec::with_size(size.n_r, size.n_x).map_err(|e| CliError::Validation(e.to_string()))
    }

    pub fn ensemble(&self) -> Result<EnsembleConfig, CliError> {
        let d = EnsembleConfig::default();
        let cfg = EnsembleConfig {
            replicas: self.replicas.unwrap_or(d.replicas),
            t_end: self.t_end.unwrap_or(d.t_end),
            seed: self.seed.unwrap_or(d.seed),
            samples: self.samples.unwrap_or(d.samples),
        };
        if cfg.replicas < 2 {
            return Err(CliError::Validation("--replicas must be at least 2".into()));
        }
        if !(cfg.t_end.is_finite() && cfg.t_end > 0.0) || cfg.samples == 0 {
            return Err(CliError::Validation(
                "--t-end must be positive and --samples at least 1".into(),
            ));
        }
        Ok(cfg)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output.clone().unwrap_or_else(|| PathBuf::from("."))
    }
}

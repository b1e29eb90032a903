// SPDX-License-Identifier: Apache-2.0

//! Subcommand execution.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use cprsim_core::equilibria::EquilibriumError;
use cprsim_core::output::{self, EquilibriumDocument};
use cprsim_core::stochastic::StochasticError;
use cprsim_core::{
    equilibrium_reports, integrate, run_basin_sweep, run_ensemble, BasinMap, Trajectory, UpdateRule,
};
use serde_json::json;

use crate::error::CliError;
use crate::manifest::{write_atomic, write_manifest, RunManifest};
use crate::settings::{Format, GridSize, Settings};

/// Points sampled along a depleted line in equilibrium reports.
const LINE_SAMPLES: usize = 11;

/// Trajectory decimation when `--sample-every` is not given.
const DEFAULT_SAMPLE_EVERY: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Equilibria,
    Sweep,
    Ensemble,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Equilibria => "equilibria",
            Command::Sweep => "sweep",
            Command::Ensemble => "ensemble",
        }
    }

    fn stem(self) -> &'static str {
        match self {
            Command::Simulate => "trajectory",
            Command::Equilibria => "equilibria",
            Command::Sweep => "sweep",
            Command::Ensemble => "ensemble",
        }
    }

    fn default_format(self) -> Format {
        match self {
            Command::Equilibria => Format::Json,
            _ => Format::Csv,
        }
    }
}

/// Runs `cmd` and returns the path of the written manifest.
pub fn execute(cmd: Command, settings: Settings) -> Result<PathBuf, CliError> {
    let start = Instant::now();
    let rule = settings.rule()?;
    let params = settings.params()?;
    let format = settings.format.unwrap_or(cmd.default_format());
    let dir = settings.output_dir();
    fs::create_dir_all(&dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;

    let mut manifest = RunManifest {
        tool_version: cprsim_core::VERSION.to_string(),
        command: cmd.name().to_string(),
        rule,
        params,
        initial_state: None,
        integrator: None,
        grid: None,
        ensemble: None,
        seed: None,
        outputs: Vec::new(),
        wall_time_s: 0.0,
        config: Settings::default(),
    };
    let mut effective = Settings {
        rule: Some(rule.name().to_string()),
        growth_rate: Some(params.growth_rate),
        ec_hat: Some(params.ec_hat),
        ed_hat: Some(params.ed_hat),
        w: Some(params.greed),
        c: Some(params.threshold),
        k: Some(params.intensity),
        population: Some(params.population),
        format: Some(format),
        ..Default::default()
    };

    let data = match cmd {
        Command::Simulate => {
            let s0 = settings.initial_state()?;
            let cfg = settings.integrator(DEFAULT_SAMPLE_EVERY)?;
            let traj = integrate(rule, &params, s0, &cfg)?;
            manifest.initial_state = Some(s0);
            manifest.integrator = Some(cfg);
            set_integrator(&mut effective, &cfg);
            effective.r0 = Some(s0.r);
            effective.x0 = Some(s0.x);
            render_trajectory(&traj, format)?
        }
        Command::Equilibria => {
            let (reports, diagnostic) =
                equilibrium_reports(rule, &params, LINE_SAMPLES).map_err(equilibrium_error)?;
            let doc = EquilibriumDocument::new(rule, params, &reports, diagnostic);
            match format {
                Format::Json => to_json(&doc)?,
                Format::Csv => render(|buf| output::write_equilibria_csv(buf, &doc))?,
            }
        }
        Command::Sweep => {
            let grid = settings.grid()?;
            let cfg = settings.integrator(1)?;
            let map = run_basin_sweep(rule, &params, &grid, &cfg)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            manifest.grid = Some(grid);
            manifest.integrator = Some(cfg);
            set_integrator(&mut effective, &cfg);
            effective.grid = Some(GridSize {
                n_r: grid.n_r,
                n_x: grid.n_x,
            });
            render_sweep(&map, format)?
        }
        Command::Ensemble => {
            let s0 = settings.initial_state()?;
            let cfg = settings.ensemble()?;
            let stats = run_ensemble(rule, &params, s0, &cfg).map_err(stochastic_error)?;
            manifest.initial_state = Some(s0);
            manifest.ensemble = Some(cfg);
            manifest.seed = Some(cfg.seed);
            effective.r0 = Some(s0.r);
            effective.x0 = Some(s0.x);
            effective.replicas = Some(cfg.replicas);
            effective.seed = Some(cfg.seed);
            effective.t_end = Some(cfg.t_end);
            effective.samples = Some(cfg.samples);
            match format {
                Format::Json => to_json(&stats)?,
                Format::Csv => render(|buf| output::write_ensemble_csv(buf, &stats))?,
            }
        }
    };

    let data_name = format!("{}.{}", cmd.stem(), format.extension());
    write_atomic(&dir.join(&data_name), &data)?;

    effective.output = Some(dir.clone());
    manifest.outputs = vec![data_name];
    manifest.config = effective;
    manifest.wall_time_s = start.elapsed().as_secs_f64();
    let manifest_path = dir.join(format!("{}.manifest.json", cmd.stem()));
    write_manifest(&manifest_path, &manifest)?;
    Ok(manifest_path)
}

fn set_integrator(s: &mut Settings, cfg: &cprsim_core::IntegratorConfig) {
    s.dt = Some(cfg.dt);
    s.t_max = Some(cfg.t_max);
    s.eps_converge = Some(cfg.eps_converge);
    s.eps_extinct = Some(cfg.eps_extinct);
    s.chatter_tol = Some(cfg.chatter_tol);
    s.sample_every = Some(cfg.sample_every);
}

fn equilibrium_error(e: EquilibriumError) -> CliError {
    match e {
        EquilibriumError::Params(_) | EquilibriumError::ExtractionOrder { .. } => {
            CliError::Validation(e.to_string())
        }
        EquilibriumError::Discontinuity { .. } | EquilibriumError::Model(_) => {
            CliError::Numerical(e.to_string())
        }
    }
}

fn stochastic_error(e: StochasticError) -> CliError {
    match e {
        StochasticError::Model(_) => CliError::Numerical(e.to_string()),
        StochasticError::Params(_) | StochasticError::Config(_) => {
            CliError::Validation(e.to_string())
        }
    }
}

fn render(write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write(&mut buf).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(buf)
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut buf = serde_json::to_vec_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    buf.push(b'\n');
    Ok(buf)
}

fn render_trajectory(traj: &Trajectory, format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Csv => render(|buf| output::write_trajectory_csv(buf, traj)),
        Format::Json => to_json(&json!({
            "t": traj.times,
            "R": traj.states.iter().map(|s| s.r).collect::<Vec<_>>(),
            "x": traj.states.iter().map(|s| s.x).collect::<Vec<_>>(),
            "terminal": traj.terminal,
        })),
    }
}

fn render_sweep(map: &BasinMap, format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Csv => render(|buf| output::write_sweep_csv(buf, map)),
        Format::Json => {
            let cells: Vec<_> = map
                .cells
                .iter()
                .map(|c| {
                    json!({
                        "R0": c.initial.r,
                        "x0": c.initial.x,
                        "R_star": c.final_state.r,
                        "x_star": c.final_state.x,
                        "class": c.class,
                        "steps": c.steps,
                        "diagnostic": c.diagnostic,
                    })
                })
                .collect();
            to_json(&json!({ "grid": map.spec, "cells": cells }))
        }
    }
}

/// Table of rule names and their strategy equations.
pub fn rules_listing(format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => {
            let rules: Vec<_> = UpdateRule::ALL
                .iter()
                .map(|r| {
                    json!({
                        "name": r.name(),
                        "pairwise": r.is_pairwise(),
                        "equation": r.strategy_equation(),
                    })
                })
                .collect();
            serde_json::to_string_pretty(&rules).map_err(|e| CliError::Io(e.to_string()))
        }
        Format::Csv => {
            let mut out = String::from("name,equation\n");
            for r in UpdateRule::ALL {
                out.push_str(&format!("{},\"{}\"\n", r.name(), r.strategy_equation()));
            }
            Ok(out)
        }
    }
}

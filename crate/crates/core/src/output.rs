// SPDX-License-Identifier: Apache-2.0

//! Line-oriented CSV writers and serialisable report documents.
//!
//! Floats are written with Rust's shortest round-trip formatting, so parsing
//! a written value gives back the exact `f64`.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::equilibria::{EquilibriumKind, EquilibriumReport, Matrix2, Stability};
use crate::integrator::Trajectory;
use crate::model::{ModelParams, UpdateRule};
use crate::stochastic::EnsembleStats;
use crate::sweep::BasinMap;

pub const TRAJECTORY_HEADER: &str = "t,R,x";
pub const SWEEP_HEADER: &str = "R0,x0,R_star,x_star,class,steps";
pub const ENSEMBLE_HEADER: &str = "t,mean_R,std_R,mean_x,std_x";
pub const EQUILIBRIA_HEADER: &str = "kind,R,x,det,trace,eig1_re,eig1_im,eig2_re,eig2_im,stability";

pub fn write_trajectory_csv<W: Write>(mut out: W, traj: &Trajectory) -> io::Result<()> {
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        writeln!(out, "{t},{},{}", s.r, s.x)?;
    }
    out.flush()
}

pub fn write_sweep_csv<W: Write>(mut out: W, map: &BasinMap) -> io::Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for c in &map.cells {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            c.initial.r,
            c.initial.x,
            c.final_state.r,
            c.final_state.x,
            c.class.as_str(),
            c.steps
        )?;
    }
    out.flush()
}

pub fn write_ensemble_csv<W: Write>(mut out: W, stats: &EnsembleStats) -> io::Result<()> {
    writeln!(out, "{ENSEMBLE_HEADER}")?;
    for j in 0..stats.sample_times.len() {
        writeln!(
            out,
            "{},{},{},{},{}",
            stats.sample_times[j], stats.mean_r[j], stats.std_r[j], stats.mean_x[j], stats.std_x[j]
        )?;
    }
    out.flush()
}

/// One row of the equilibrium report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumEntry {
    pub kind: EquilibriumKind,
    #[serde(rename = "R")]
    pub r: f64,
    pub x: f64,
    pub det: f64,
    pub trace: f64,
    /// `[re, im]` pairs, larger real part first.
    pub eigenvalues: [[f64; 2]; 2],
    pub jacobian: Matrix2,
    pub stability: Stability,
}

impl From<&EquilibriumReport> for EquilibriumEntry {
    fn from(rep: &EquilibriumReport) -> Self {
        let ev = rep.eigenvalues;
        Self {
            kind: rep.equilibrium.kind,
            r: rep.equilibrium.state.r,
            x: rep.equilibrium.state.x,
            det: rep.det,
            trace: rep.trace,
            eigenvalues: [[ev[0].re, ev[0].im], [ev[1].re, ev[1].im]],
            jacobian: rep.jacobian,
            stability: rep.stability,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumDocument {
    pub rule: UpdateRule,
    pub params: ModelParams,
    pub equilibria: Vec<EquilibriumEntry>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub diagnostic: Option<String>,
}

impl EquilibriumDocument {
    pub fn new(
        rule: UpdateRule,
        params: ModelParams,
        reports: &[EquilibriumReport],
        diagnostic: Option<String>,
    ) -> Self {
        Self {
            rule,
            params,
            equilibria: reports.iter().map(EquilibriumEntry::from).collect(),
            diagnostic,
        }
    }
}

fn stability_name(s: Stability) -> &'static str {
    match s {
        Stability::Stable => "stable",
        Stability::Unstable => "unstable",
        Stability::Saddle => "saddle",
        Stability::Neutral => "neutral",
    }
}

fn kind_name(k: EquilibriumKind) -> &'static str {
    match k {
        EquilibriumKind::DepletedPoint => "depleted_point",
        EquilibriumKind::DepletedLine => "depleted_line",
        EquilibriumKind::SustainablePoint => "sustainable_point",
        EquilibriumKind::NumericalFixedPoint => "numerical_fixed_point",
    }
}

pub fn write_equilibria_csv<W: Write>(mut out: W, doc: &EquilibriumDocument) -> io::Result<()> {
    writeln!(out, "{EQUILIBRIA_HEADER}")?;
    for e in &doc.equilibria {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            kind_name(e.kind),
            e.r,
            e.x,
            e.det,
            e.trace,
            e.eigenvalues[0][0],
            e.eigenvalues[0][1],
            e.eigenvalues[1][0],
            e.eigenvalues[1][1],
            stability_name(e.stability)
        )?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::Termination;
    use crate::model::SystemState;
    use crate::sweep::{BasinCell, GridSpec, OutcomeClass};

    #[test]
    fn trajectory_csv_layout() {
        let traj = Trajectory {
            times: vec![0.0, 0.5],
            states: vec![
                SystemState { r: 0.3, x: 1.0 },
                SystemState {
                    r: 0.1 + 0.2,
                    x: 1.0,
                },
            ],
            terminal: Termination::Converged,
        };
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &traj).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "t,R,x\n0,0.3,1\n0.5,0.30000000000000004,1\n");
    }

    #[test]
    fn sweep_csv_layout() {
        let spec = GridSpec::with_size(2, 2).unwrap();
        let cell = BasinCell {
            initial: SystemState { r: 0.01, x: 0.0 },
            final_state: SystemState { r: 0.0, x: 0.0 },
            class: OutcomeClass::Depleted,
            steps: 7,
            diagnostic: None,
        };
        let map = BasinMap {
            spec,
            cells: vec![cell],
        };
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &map).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "R0,x0,R_star,x_star,class,steps\n0.01,0,0,0,depleted,7\n"
        );
    }

    #[test]
    fn floats_round_trip() {
        for v in [0.1f64 + 0.2, 1.0 / 3.0, 1e-300, 0.1304347826086956, 5e-324] {
            let text = format!("{v}");
            assert_eq!(text.parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }
}

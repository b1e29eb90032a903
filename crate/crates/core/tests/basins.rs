// SPDX-License-Identifier: Apache-2.0

mod common;

use common::{baseline, oracle_rhs};
use cprsim_core::equilibria::{analytic_jacobian, stationary_points};
use cprsim_core::{
    jacobian, run_basin_sweep, EquilibriumKind, GridSpec, IntegratorConfig, ModelParams,
    OutcomeClass, SystemState, UpdateRule,
};

fn fast() -> IntegratorConfig {
    IntegratorConfig {
        dt: 0.01,
        t_max: 500.0,
        ..IntegratorConfig::default()
    }
}

#[test]
fn linear_grid_is_entirely_sustainable() {
    let p = baseline();
    let map = run_basin_sweep(
        UpdateRule::LinearOfR,
        &p,
        &GridSpec::with_size(21, 21).unwrap(),
        &fast(),
    )
    .unwrap();
    let r_star = (1.0 - p.ec_hat) / (1.0 + p.ed_hat - p.ec_hat);
    let target = SystemState {
        r: r_star,
        x: 1.0 - r_star,
    };
    assert_eq!(map.cells.len(), 441);
    assert_eq!(map.count(OutcomeClass::Sustainable), 441);
    assert!(map
        .cells
        .iter()
        .all(|c| c.final_state.distance(&target) < 1e-3));
}

#[test]
fn replicator_grid_is_bistable_and_monotone_in_resource() {
    let grid = GridSpec::with_size(21, 21).unwrap();
    let map = run_basin_sweep(UpdateRule::Replicator, &baseline(), &grid, &fast()).unwrap();
    assert!(map.count(OutcomeClass::Depleted) > 0);
    assert!(map.count(OutcomeClass::Sustainable) > 0);
    for i_x in 0..grid.n_x {
        let mut sustained = false;
        for i_r in 0..grid.n_r {
            let class = map.cell(i_r, i_x).class;
            if sustained {
                assert_eq!(
                    class,
                    OutcomeClass::Sustainable,
                    "column {i_x} flips at row {i_r}"
                );
            }
            sustained |= class == OutcomeClass::Sustainable;
        }
    }
}

#[test]
fn logistic_intensity_decides_between_collapse_and_survival() {
    let grid = GridSpec::with_size(11, 11).unwrap();
    let low = ModelParams {
        intensity: 0.1,
        ..baseline()
    };
    let map = run_basin_sweep(UpdateRule::LogisticOfR, &low, &grid, &fast()).unwrap();
    assert_eq!(map.count(OutcomeClass::Depleted), grid.len());
    let map = run_basin_sweep(UpdateRule::LogisticOfR, &baseline(), &grid, &fast()).unwrap();
    assert_eq!(map.count(OutcomeClass::Sustainable), grid.len());
}

#[test]
fn reruns_are_bit_identical() {
    let grid = GridSpec::with_size(9, 9).unwrap();
    for rule in UpdateRule::ALL {
        let a = run_basin_sweep(rule, &baseline(), &grid, &fast()).unwrap();
        let b = run_basin_sweep(rule, &baseline(), &grid, &fast()).unwrap();
        for (u, v) in a.cells.iter().zip(&b.cells) {
            assert_eq!(u.final_state.r.to_bits(), v.final_state.r.to_bits());
            assert_eq!(u.final_state.x.to_bits(), v.final_state.x.to_bits());
            assert_eq!((u.class, u.steps), (v.class, v.steps));
        }
    }
}

#[test]
fn stationary_points_are_roots_of_the_oracle() {
    let p = baseline();
    for rule in UpdateRule::ALL {
        for eq in stationary_points(rule, &p).points {
            let samples: Vec<SystemState> = if eq.kind == EquilibriumKind::DepletedLine {
                (0..5).map(|i| eq.on_line(i as f64 / 4.0).state).collect()
            } else {
                vec![eq.state]
            };
            for st in samples {
                let (dr, dx) = oracle_rhs(rule, &p, st.r, st.x);
                assert!(dr.hypot(dx) < 1e-10, "{rule} {st:?}");
            }
        }
    }
}

#[test]
fn replicator_jacobian_matches_hand_derivation() {
    let p = baseline();
    let w = p.greed;
    let t = p.growth_rate;
    for i in 0..10 {
        for j in 0..10 {
            let r = 0.05 + 0.1 * i as f64;
            let x = 0.05 + 0.1 * j as f64;
            let s = SystemState { r, x };
            let expected = [
                [
                    t * (1.0 - 2.0 * r - x * p.ec_hat - (1.0 - x) * p.ed_hat),
                    t * r * (p.ed_hat - p.ec_hat),
                ],
                [-w * x * (1.0 - x), -w * r * (1.0 - 2.0 * x)],
            ];
            let fd = jacobian(UpdateRule::Replicator, &p, s).unwrap();
            let an = analytic_jacobian(UpdateRule::Replicator, &p, s).unwrap();
            for a in 0..2 {
                for b in 0..2 {
                    assert!((fd[a][b] - expected[a][b]).abs() < 1e-5, "fd at {s:?}");
                    assert!(
                        (an[a][b] - expected[a][b]).abs() < 1e-12,
                        "analytic at {s:?}"
                    );
                }
            }
        }
    }
}

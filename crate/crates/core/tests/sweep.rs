mod common;

use mosaic_core::hamiltonian::{build, to_angular};
use mosaic_core::lattice::{coupling_at, potential_at, MosaicParams};
use mosaic_core::sweep::{
    fig3b_plan, fig4b_plan, linear_grid, me_quench_scan, mobility_edge_base, run_sweep,
    saturation_knee, sweep_preset, Axis, DimerSign, Protocol, SweepPlan, SweepPreset,
    SWEEP_PRESETS,
};
use proptest::prelude::*;

fn d_bars(plan: &SweepPlan) -> (Vec<f64>, Vec<f64>) {
    let t = run_sweep(plan, None).unwrap();
    t.rows
        .iter()
        .map(|r| (r.param, r.outcome.as_ref().unwrap().d_bar))
        .unzip()
}

#[test]
fn deterministic() {
    let plan = fig3b_plan();
    assert_eq!(
        run_sweep(&plan, Some(1)).unwrap(),
        run_sweep(&plan, None).unwrap()
    );
}

#[test]
fn d_bar_is_smallest_without_lambda() {
    let (_, d) = d_bars(&fig3b_plan());
    assert!(d.iter().skip(1).all(|&x| x > d[0]), "{d:?}");
}

#[test]
fn transition_sits_at_the_self_dual_point() {
    let mut plan = fig3b_plan();
    plan.grid = linear_grid(0.0, 2.5, 101);
    let (x, d) = d_bars(&plan);
    let peak = x[(0..d.len()).max_by(|&a, &b| d[a].total_cmp(&d[b])).unwrap()];
    assert!((peak - 1.0).abs() <= 0.15, "peak at {peak}");
    let knee = saturation_knee(&x, &d, 0.95).unwrap();
    assert!((knee - 1.0).abs() <= 0.15, "knee at {knee}");
}

#[test]
fn phase_scan_rises_and_falls() {
    let t = run_sweep(&fig4b_plan(), None).unwrap();
    let m: Vec<f64> = t
        .rows
        .iter()
        .map(|r| r.outcome.as_ref().unwrap().m_integrated)
        .collect();
    let top = (0..m.len()).max_by(|&a, &b| m[a].total_cmp(&m[b])).unwrap();
    assert!(top > 0 && top < m.len() - 1);
    assert!(m[..=top].windows(2).all(|w| w[1] >= w[0]));
    assert!(m[top..].windows(2).all(|w| w[1] <= w[0]));
    assert!(m[top] > 10.0 * m[0]);
}

#[test]
fn dimer_sign_flips_energy_about_the_mean_potential() {
    let base = mobility_edge_base();
    let rows = me_quench_scan(
        &base,
        &[(9, DimerSign::Plus), (9, DimerSign::Minus)],
        10.0,
        1.0,
        None,
    )
    .unwrap();
    let v = |j| to_angular(potential_at(&base, j).unwrap());
    let mean = 0.5 * (v(9) + v(10));
    let jn = to_angular(coupling_at(&base, 9).unwrap());
    for r in rows {
        let want = match r.sign {
            DimerSign::Plus => mean + jn,
            DimerSign::Minus => mean - jn,
        };
        assert!((r.init_energy - want).abs() < 1e-14);
    }
}

#[test]
fn every_preset_resolves() {
    for name in SWEEP_PRESETS {
        match sweep_preset(name).unwrap() {
            SweepPreset::Sweep(plan) => {
                plan.validate().unwrap();
                build(&plan.point(plan.grid[0]).0).unwrap();
            }
            SweepPreset::MeScan { entries, .. } => assert!(!entries.is_empty()),
        }
    }
    let err = sweep_preset("fig9").unwrap_err().to_string();
    assert!(SWEEP_PRESETS.iter().all(|p| err.contains(p)), "{err}");
}

#[test]
fn empty_and_single_point_grids() {
    let base = MosaicParams::new(12, 4.0, 4.0);
    let empty = SweepPlan::new(
        base.clone(),
        Axis::LambdaOverJ,
        vec![],
        Protocol::QuenchSingle { j0: 6 },
    );
    assert!(run_sweep(&empty, None).is_err());
    let single = SweepPlan::new(
        base,
        Axis::LambdaOverJ,
        vec![1.0],
        Protocol::QuenchSingle { j0: 6 },
    );
    assert_eq!(run_sweep(&single, None).unwrap().rows.len(), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn permuting_the_grid_permutes_rows((grid, perm) in common::permutation_strategy()) {
        common::check_permutation(&grid, &perm)?;
    }
}

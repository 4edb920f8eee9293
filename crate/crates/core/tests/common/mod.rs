#![allow(dead_code)]

use mosaic_core::dynamics::{comb_density, density, fractal_dimension, Propagator, StateVector};
use mosaic_core::hamiltonian::{build, initial_state_energy, HamiltonianMatrix};
use mosaic_core::io::{parse_sweep, sweep_to_string, RunManifest};
use mosaic_core::lattice::{Frequency, LongRangeBond, MosaicParams};
use mosaic_core::sweep::{run_sweep, Axis, PointResult, Protocol, SweepPlan, SweepRow, SweepTable};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub fn params_strategy(max_sites: usize) -> impl Strategy<Value = MosaicParams> {
    (
        2..=max_sites,
        0.0..8.0f64,
        0.0..12.0f64,
        0.0..6.0f64,
        0.0..std::f64::consts::TAU,
        any::<bool>(),
        0.0..3.0f64,
    )
        .prop_map(|(n, j, l, v0, theta, nnn, s)| {
            let mut p = MosaicParams::new(n, j, l).with_v0(v0).with_theta(theta);
            if nnn && n > 2 {
                p.long_range = (1..=n - 2)
                    .map(|m| LongRangeBond::new(m, m + 2, s))
                    .collect();
            }
            p
        })
}

pub fn nn_params_strategy(max_sites: usize) -> impl Strategy<Value = MosaicParams> {
    params_strategy(max_sites).prop_map(|mut p| {
        p.long_range.clear();
        p
    })
}

pub fn state_strategy(n: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n).prop_filter_map("zero vector", |v| {
        let amps: Vec<Complex64> = v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
        StateVector::normalized(amps).ok()
    })
}

pub fn model_and_state(max_sites: usize) -> impl Strategy<Value = (MosaicParams, StateVector)> {
    params_strategy(max_sites).prop_flat_map(|p| {
        let n = p.n_sites;
        (Just(p), state_strategy(n))
    })
}

fn expect(cond: bool, msg: String) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg))
    }
}

/// Norm, energy and time-reversal bounds, all at 1e-9.
pub fn check_unitarity(p: &MosaicParams, psi: &StateVector, t: f64) -> Result<(), TestCaseError> {
    let h = build(p).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let prop = Propagator::new(&h).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let out = prop.evolve(psi, t);
    expect(
        (out.norm_squared() - 1.0).abs() <= 1e-9,
        format!("norm drift {}", out.norm_squared() - 1.0),
    )?;
    let e0 = initial_state_energy(&h, psi).unwrap();
    let et = initial_state_energy(&h, &out).unwrap();
    expect((et - e0).abs() <= 1e-9, format!("energy drift {}", et - e0))?;
    let back = prop.evolve(&out, -t);
    let err = back
        .amplitudes()
        .iter()
        .zip(psi.amplitudes())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    expect(err <= 1e-9, format!("time reversal error {err}"))
}

/// `exp(A)` by scaling and squaring with a truncated Taylor series.
pub fn expm_taylor(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = a.nrows();
    let norm = a
        .column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let b = a / Complex64::new(2f64.powi(s), 0.0);
    let mut result = DMatrix::<Complex64>::identity(n, n);
    let mut term = DMatrix::<Complex64>::identity(n, n);
    for k in 1..=30 {
        term = &term * &b / Complex64::new(k as f64, 0.0);
        result += &term;
    }
    for _ in 0..s {
        result = &result * &result;
    }
    result
}

/// Spectral propagator against the Taylor oracle at 1e-8.
pub fn check_expm_oracle(p: &MosaicParams, t: f64) -> Result<(), TestCaseError> {
    let h = build(p).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let g = Propagator::new(&h).unwrap().matrix(t);
    let a = h.matrix().map(|x| Complex64::new(0.0, -x * t));
    let oracle = expm_taylor(&a);
    let err = (g - oracle).iter().map(|z| z.norm()).fold(0.0, f64::max);
    expect(
        err <= 1e-8,
        format!("propagator differs from expm by {err}"),
    )
}

/// `D ∈ [0, 1]` for any state; exactly 0 on a site, 1 on a uniform state.
pub fn check_fractal_bounds(psi: &StateVector, site: usize) -> Result<(), TestCaseError> {
    let n = psi.len();
    let d = fractal_dimension(psi, n);
    expect((0.0..=1.0).contains(&d), format!("D = {d}"))?;
    let localized = StateVector::site(n, site.min(n).max(1)).unwrap();
    expect(
        fractal_dimension(&localized, n) == 0.0,
        "site state D != 0".into(),
    )?;
    let amp = Complex64::new((1.0 / n as f64).sqrt(), 0.0);
    let uniform = StateVector::normalized(vec![amp; n]).unwrap();
    let du = fractal_dimension(&uniform, n);
    expect((du - 1.0).abs() <= 1e-14, format!("uniform D = {du}"))
}

/// Comb populations against the sum of independent single-site quenches.
pub fn check_comb(p: &MosaicParams, period: usize, t: f64) -> Result<(), TestCaseError> {
    let h: HamiltonianMatrix = build(p).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let n = p.n_sites;
    let sites: Vec<usize> = (1..=n).step_by(period).collect();
    let comb = comb_density(&h, &sites, t).unwrap();
    let prop = Propagator::new(&h).unwrap();
    let mut sum = vec![0.0; n];
    for &s in &sites {
        for (acc, x) in sum
            .iter_mut()
            .zip(density(&prop.evolve(&StateVector::site(n, s).unwrap(), t)))
        {
            *acc += x;
        }
    }
    let err = comb
        .iter()
        .zip(&sum)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let total: f64 = comb.iter().sum();
    expect(err <= 1e-10, format!("comb mismatch {err}"))?;
    expect(
        (total - sites.len() as f64).abs() <= 1e-10,
        format!("comb population {total} != {}", sites.len()),
    )
}

pub fn float_strategy() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        -1e3..1e3f64,
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
    ]
}

/// Serialize → parse → serialize is byte-identical for manifests and sweep
/// tables.
pub fn check_round_trip(
    floats: &[f64],
    n_sites: usize,
    rational: Option<(u64, u64)>,
) -> Result<(), TestCaseError> {
    let f = |i: usize| floats[i % floats.len()];
    let mut params = MosaicParams::new(n_sites, f(0), f(1))
        .with_v0(f(2))
        .with_theta(f(3));
    if let Some((p, q)) = rational {
        params.alpha = Frequency::Rational { p, q };
    } else {
        params.alpha = Frequency::Irrational(f(4));
    }
    params.long_range = (0..3)
        .map(|i| LongRangeBond::new(i + 1, i + 3, f(5 + i)))
        .collect();
    let mut m = RunManifest::new("sweep", params, "single:14");
    m.t_final = f(8);
    m.dt = f(9);
    m.wall_time_s = f(10);
    m = m.with_extra(
        "grid",
        floats
            .iter()
            .map(|x| format!("{x:?}"))
            .collect::<Vec<_>>()
            .join(";"),
    );
    let text = m.serialize().unwrap();
    let back = RunManifest::parse(&text).map_err(|e| TestCaseError::fail(e.to_string()))?;
    expect(
        back.serialize().unwrap() == text,
        "manifest text changed".into(),
    )?;

    let table = SweepTable {
        axis: Axis::LambdaOverJ,
        rows: floats
            .chunks(5)
            .map(|c| SweepRow {
                param: c[0],
                outcome: if c.len() == 5 {
                    Ok(PointResult {
                        d_bar: c[1],
                        m_integrated: c[2],
                        n_r_bar: c[3],
                        init_energy: c[4],
                    })
                } else {
                    Err("incomplete".into())
                },
            })
            .collect(),
    };
    let csv = sweep_to_string(&table);
    let rows = parse_sweep(&csv).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let rebuilt = SweepTable {
        axis: Axis::LambdaOverJ,
        rows: rows
            .iter()
            .map(|r| SweepRow {
                param: r.param,
                outcome: if r.d_bar.is_nan() {
                    Err("failed".into())
                } else {
                    Ok(PointResult {
                        d_bar: r.d_bar,
                        m_integrated: r.m_integrated,
                        n_r_bar: r.n_r_bar,
                        init_energy: r.init_energy,
                    })
                },
            })
            .collect(),
    };
    expect(sweep_to_string(&rebuilt) == csv, "sweep csv changed".into())
}

/// Permuting the grid permutes the rows and leaves every value bit-identical.
pub fn check_permutation(grid: &[f64], perm: &[usize]) -> Result<(), TestCaseError> {
    let base = MosaicParams::new(12, 4.0, 0.0);
    let plan = SweepPlan::new(
        base,
        Axis::LambdaOverJ,
        grid.to_vec(),
        Protocol::QuenchSingle { j0: 6 },
    )
    .with_times(20.0, 1.0);
    let mut permuted = plan.clone();
    permuted.grid = perm.iter().map(|&i| grid[i]).collect();
    let a = run_sweep(&plan, Some(1)).unwrap();
    let b = run_sweep(&permuted, Some(2)).unwrap();
    for (k, &i) in perm.iter().enumerate() {
        let (ra, rb) = (&a.rows[i], &b.rows[k]);
        expect(
            ra.param.to_bits() == rb.param.to_bits(),
            "param order".into(),
        )?;
        let (va, vb) = (ra.outcome.as_ref().unwrap(), rb.outcome.as_ref().unwrap());
        for (x, y) in [
            (va.d_bar, vb.d_bar),
            (va.m_integrated, vb.m_integrated),
            (va.n_r_bar, vb.n_r_bar),
            (va.init_energy, vb.init_energy),
        ] {
            expect(
                x.to_bits() == y.to_bits(),
                format!("row {i} differs: {x} vs {y}"),
            )?;
        }
    }
    Ok(())
}

pub fn permutation_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<usize>)> {
    prop::collection::vec(0.0..2.5f64, 1..5).prop_flat_map(|grid| {
        let n = grid.len();
        (
            Just(grid),
            Just((0..n).collect::<Vec<usize>>()).prop_shuffle(),
        )
    })
}

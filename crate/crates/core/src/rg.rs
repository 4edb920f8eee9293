//! Critical-to-extended thresholds for next-nearest (`J_nn`) and
//! third-neighbour (`μ`) hopping, and their empirical verification by quench
//! sweeps.

use crate::error::{Error, Result};
use crate::hamiltonian::LongRangePreset;
use crate::lattice::MosaicParams;
use crate::sweep::{run_point, run_sweep, Axis, PointResult, Protocol, SweepPlan};

/// All strengths in MHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RgInputs {
    pub j_hop: f64,
    pub lambda_hop: f64,
    pub j_nn: f64,
    pub mu: f64,
}

impl RgInputs {
    pub fn validate(&self) -> Result<()> {
        for (key, v) in [
            ("j_hop", self.j_hop),
            ("lambda_hop", self.lambda_hop),
            ("j_nn", self.j_nn),
            ("mu", self.mu),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(
                    key,
                    format!("{v} is not a finite non-negative value"),
                ));
            }
        }
        Ok(())
    }

    /// Whether `j_nn` exceeds the threshold, i.e. the extended side.
    pub fn above_threshold(&self) -> Result<bool> {
        self.validate()?;
        Ok(self.j_nn > threshold_with_mu(self.j_hop, self.lambda_hop, self.mu)?.value)
    }
}

/// `max(J, √(Jλ))`.
pub fn threshold_nnn(j: f64, lambda: f64) -> f64 {
    j.max((j * lambda).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub value: f64,
    /// Set when `μ > λ`, where the closed form is only a rough guide.
    pub advisory: bool,
}

/// `√(J·max(J, λ, μ) − λμ)`.
pub fn threshold_with_mu(j: f64, lambda: f64, mu: f64) -> Result<Threshold> {
    let radicand = j * j.max(lambda).max(mu) - lambda * mu;
    if radicand.is_nan() || radicand < 0.0 {
        return Err(Error::OutOfValidity { radicand });
    }
    Ok(Threshold {
        value: radicand.sqrt(),
        advisory: mu > lambda,
    })
}

/// Onset detector settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detector {
    /// `n̄_r` above this counts as crossing the coupling zero.
    pub right_population: f64,
    /// `D̄` above this fraction of the reference counts as saturated.
    pub d_fraction: f64,
}

impl Default for Detector {
    fn default() -> Self {
        Detector {
            right_population: 0.05,
            d_fraction: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyPlan {
    /// `J`, `λ`, `V_0`, `θ`, `N`; long-range bonds are ignored.
    pub base: MosaicParams,
    /// Fixed third-neighbour strength, MHz. Zero leaves only next-nearest pairs.
    pub mu: f64,
    /// `J_nn/J` values.
    pub grid: Vec<f64>,
    pub j0: usize,
    pub t_final: f64,
    pub dt: f64,
    pub detector: Detector,
}

impl VerifyPlan {
    pub fn new(base: MosaicParams, mu: f64, grid: Vec<f64>) -> Self {
        VerifyPlan {
            base,
            mu,
            grid,
            j0: 14,
            t_final: crate::sweep::DEFAULT_T_FINAL,
            dt: crate::sweep::DEFAULT_DT,
            detector: Detector::default(),
        }
    }

    fn preset(&self, j_nn: f64) -> LongRangePreset {
        if self.mu == 0.0 {
            LongRangePreset::NnnUniform(j_nn)
        } else {
            LongRangePreset::Combined { j_nn, mu: self.mu }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyPoint {
    pub j_nn_over_j: f64,
    pub d_bar: f64,
    pub n_r_bar: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub points: Vec<VerifyPoint>,
    /// `D̄` of the same preset with `J_nn = λ`.
    pub reference_d_bar: f64,
    /// First grid value (`J_nn/J`) where both criteria hold.
    pub onset: Option<f64>,
    /// Closed-form threshold over `J`, when inside its validity domain.
    pub predicted: Option<Threshold>,
}

impl VerifyReport {
    pub fn deviation(&self) -> Option<f64> {
        Some(self.onset? - self.predicted?.value)
    }
}

/// Sweeps `J_nn` at fixed `μ` and reports where the right-side population and
/// `D̄` saturate together.
pub fn verify_threshold(plan: &VerifyPlan, workers: Option<usize>) -> Result<VerifyReport> {
    let mut base = plan.base.clone();
    base.long_range.clear();
    let j = base.j_hop;
    if j <= 0.0 {
        return Err(Error::param("j_hop", "must be positive"));
    }
    let protocol = Protocol::QuenchSingle { j0: plan.j0 };
    let sweep = SweepPlan::new(
        base.clone(),
        Axis::LongRangeOverJ,
        plan.grid.clone(),
        protocol,
    )
    .with_long_range(plan.preset(0.0))
    .with_times(plan.t_final, plan.dt);
    let table = run_sweep(&sweep, workers)?;

    let mut reference = base.clone();
    reference.long_range = plan.preset(base.lambda_hop).bonds(base.n_sites);
    let reference_d_bar = run_point(&reference, &protocol, plan.t_final, plan.dt)?.d_bar;

    let points = table
        .rows
        .into_iter()
        .map(|row| {
            let r: PointResult = row.outcome.map_err(|e| Error::param("grid", e))?;
            Ok(VerifyPoint {
                j_nn_over_j: row.param,
                d_bar: r.d_bar,
                n_r_bar: r.n_r_bar,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let onset = points
        .iter()
        .find(|p| {
            p.n_r_bar > plan.detector.right_population
                && p.d_bar > plan.detector.d_fraction * reference_d_bar
        })
        .map(|p| p.j_nn_over_j);
    let predicted = threshold_with_mu(1.0, base.lambda_hop / j, plan.mu / j).ok();
    Ok(VerifyReport {
        points,
        reference_d_bar,
        onset,
        predicted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn nnn_threshold() {
        assert_eq!(threshold_nnn(4.0, 4.0), 4.0);
        assert_eq!(threshold_nnn(4.0, 0.0), 4.0);
        assert_relative_eq!(
            threshold_nnn(1.0, 2.5),
            1.581_138_830_084_189_8,
            epsilon = 1e-15
        );
    }

    #[test]
    fn mu_threshold() {
        let t = threshold_with_mu(1.0, 2.5, 0.93).unwrap();
        assert_relative_eq!(t.value, 0.175_f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(t.value, 0.4183, epsilon = 5e-5);
        assert!(!t.advisory);
        assert_eq!(threshold_with_mu(1.0, 1.0, 1.0).unwrap().value, 0.0);
        assert_eq!(
            threshold_with_mu(1.0, 2.5, 0.0).unwrap().value,
            threshold_nnn(1.0, 2.5)
        );
        assert!(threshold_with_mu(1.0, 0.5, 2.0).unwrap().advisory);
        assert!(matches!(
            threshold_with_mu(1.0, 2.5, 2.0),
            Err(Error::OutOfValidity { .. })
        ));
    }

    #[test]
    fn inputs() {
        let i = RgInputs {
            j_hop: 4.0,
            lambda_hop: 10.0,
            j_nn: 10.0,
            mu: 0.0,
        };
        assert!(i.above_threshold().unwrap());
        assert!(!RgInputs { j_nn: 1.0, ..i }.above_threshold().unwrap());
        assert!(RgInputs { mu: -1.0, ..i }.validate().is_err());
    }

    #[test]
    fn no_long_range_no_onset() {
        let base = MosaicParams::new(24, 4.0, 10.0);
        let mut plan = VerifyPlan::new(base, 0.0, vec![0.0]);
        plan.t_final = 100.0;
        let r = verify_threshold(&plan, None).unwrap();
        assert_eq!(r.onset, None);
        assert!(r.points[0].n_r_bar < 0.05);
    }
}

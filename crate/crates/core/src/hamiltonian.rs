//! Single-excitation Hamiltonian.
//!
//! The XY chain conserves the number of excitations, so in the one-excitation
//! sector it reduces to an `N × N` real symmetric hopping matrix. Entries are
//! angular frequencies in rad/ns; the MHz → rad/ns conversion happens here and
//! nowhere else.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dynamics::StateVector;
use crate::error::{Error, Result};
use crate::lattice::{LongRangeBond, MosaicParams};

/// `2π · f · 10⁻³`: MHz (ordinary frequency) to rad/ns.
pub fn to_angular(mhz: f64) -> f64 {
    TAU * mhz * 1e-3
}

/// Inverse of [`to_angular`].
pub fn to_mhz(rad_per_ns: f64) -> f64 {
    rad_per_ns / (TAU * 1e-3)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    #[default]
    Open,
    /// Adds bond `N` between sites `N` and `1`, carrying `J_N`.
    Periodic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    matrix: DMatrix<f64>,
}

impl HamiltonianMatrix {
    /// Wraps an arbitrary matrix after checking that it is square, finite and
    /// exactly symmetric.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n = matrix.nrows();
        for i in 0..n {
            for k in (i + 1)..n {
                if matrix[(i, k)] != matrix[(k, i)] {
                    return Err(Error::param("matrix", format!("asymmetric at ({i}, {k})")));
                }
            }
        }
        Ok(HamiltonianMatrix { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Element between 1-based sites `m` and `n`.
    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.matrix[(m - 1, n - 1)]
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// Largest `|m − n|` over nonzero entries.
    pub fn bandwidth(&self) -> usize {
        let n = self.dim();
        let mut width = 0;
        for i in 0..n {
            for k in (i + 1)..n {
                if self.matrix[(i, k)] != 0.0 {
                    width = width.max(k - i);
                }
            }
        }
        width
    }

    /// Operator norm bound used for residual tolerances.
    pub fn max_abs_row_sum(&self) -> f64 {
        self.matrix
            .row_iter()
            .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

pub fn build(params: &MosaicParams) -> Result<HamiltonianMatrix> {
    build_with_boundary(params, Boundary::Open)
}

pub fn build_with_boundary(params: &MosaicParams, boundary: Boundary) -> Result<HamiltonianMatrix> {
    params.validate()?;
    let n = params.n_sites;
    let mut h = DMatrix::zeros(n, n);
    for j in 1..=n {
        h[(j - 1, j - 1)] = to_angular(params.potential_unchecked(j));
    }
    for j in 1..n {
        let w = to_angular(params.coupling_unchecked(j));
        h[(j - 1, j)] = w;
        h[(j, j - 1)] = w;
    }
    if boundary == Boundary::Periodic {
        if n < 3 {
            return Err(Error::param(
                "n_sites",
                "periodic boundary needs at least 3 sites",
            ));
        }
        let w = to_angular(params.coupling_unchecked(n));
        h[(n - 1, 0)] = w;
        h[(0, n - 1)] = w;
    }
    for b in &params.long_range {
        let (m, k) = (b.m - 1, b.n - 1);
        if boundary == Boundary::Periodic && m.abs_diff(k) == n - 1 {
            return Err(Error::InvalidBond {
                m: b.m,
                n: b.n,
                reason: "collides with the periodic wrap bond".into(),
            });
        }
        let w = to_angular(b.strength);
        h[(m, k)] = w;
        h[(k, m)] = w;
    }
    if h.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(HamiltonianMatrix { matrix: h })
}

/// Long-range coupling families. Strengths in MHz.
#[derive(Debug, Clone, PartialEq)]
pub enum LongRangePreset {
    /// All `|m − n| = 2` pairs at `J_nn`.
    NnnUniform(f64),
    /// All `|m − n| = 3` pairs at `μ`.
    NnnnUniform(f64),
    /// Both of the above.
    Combined {
        j_nn: f64,
        mu: f64,
    },
    Explicit(Vec<LongRangeBond>),
}

impl LongRangePreset {
    pub fn bonds(&self, n_sites: usize) -> Vec<LongRangeBond> {
        match self {
            LongRangePreset::NnnUniform(s) => uniform(n_sites, 2, *s),
            LongRangePreset::NnnnUniform(s) => uniform(n_sites, 3, *s),
            LongRangePreset::Combined { j_nn, mu } => {
                let mut v = uniform(n_sites, 2, *j_nn);
                v.extend(uniform(n_sites, 3, *mu));
                v
            }
            LongRangePreset::Explicit(v) => v.clone(),
        }
    }
}

pub fn long_range_preset(preset: &LongRangePreset, n_sites: usize) -> Vec<LongRangeBond> {
    preset.bonds(n_sites)
}

fn uniform(n_sites: usize, range: usize, strength: f64) -> Vec<LongRangeBond> {
    (1..=n_sites.saturating_sub(range))
        .map(|m| LongRangeBond::new(m, m + range, strength))
        .collect()
}

/// `⟨ψ|H|ψ⟩` in rad/ns.
pub fn initial_state_energy(h: &HamiltonianMatrix, psi: &StateVector) -> Result<f64> {
    let amps = psi.amplitudes();
    if amps.len() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            got: amps.len(),
        });
    }
    let m = h.matrix();
    let mut e = Complex64::new(0.0, 0.0);
    for i in 0..h.dim() {
        let mut row = Complex64::new(0.0, 0.0);
        for k in 0..h.dim() {
            let x = m[(i, k)];
            if x != 0.0 {
                row += amps[k] * x;
            }
        }
        e += amps[i].conj() * row;
    }
    Ok(e.re)
}

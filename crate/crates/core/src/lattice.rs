//! Mosaic quasiperiodic couplings and potentials.
//!
//! Sites are labelled `1..=N`. Bond `j` (for `j = 1..N-1`) joins sites `j`
//! and `j + 1`. Odd bonds carry the uniform coupling `λ`, even bonds the
//! quasiperiodic coupling `2J cos(2παj + θ)`:
//!
//! ```text
//!   site:   1 ─λ─ 2 ─2Jcos─ 3 ─λ─ 4 ─2Jcos─ 5 ...
//!   bond:     1       2       3       4
//! ```
//!
//! Bond labels are 1-based and name the *left* site of the bond. A 0-based
//! bond count shifts every label down by one, so the bond this crate calls 48
//! appears as 47 in such a convention.
//!
//! All frequencies are ordinary frequencies in MHz (i.e. `J/2π`); the
//! conversion to angular frequency happens in [`crate::hamiltonian`].

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

/// `(√5 − 1)/2`, the inverse golden mean.
pub const GOLDEN_MEAN: f64 = 0.618_033_988_749_894_9;

/// Default IDZ threshold relative to `2J`.
pub const DEFAULT_IDZ_EPSILON: f64 = 0.05;

/// Modulation frequency `α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Frequency {
    Irrational(f64),
    /// `p/q`; phases are reduced exactly modulo `q`, so sequences are
    /// bitwise periodic.
    Rational {
        p: u64,
        q: u64,
    },
}

impl Frequency {
    pub fn golden() -> Self {
        Frequency::Irrational(GOLDEN_MEAN)
    }

    /// Rational approximant `F_k / F_{k+1}` of the golden mean.
    pub fn fibonacci(k: u32) -> Result<Self> {
        let (p, q) = fibonacci_approximant(k)?;
        Ok(Frequency::Rational { p, q })
    }

    pub fn value(&self) -> f64 {
        match *self {
            Frequency::Irrational(a) => a,
            Frequency::Rational { p, q } => p as f64 / q as f64,
        }
    }

    /// `2πα·j mod 2π`.
    fn phase(&self, j: usize) -> f64 {
        match *self {
            Frequency::Irrational(a) => TAU * a * j as f64,
            Frequency::Rational { p, q } => {
                let r = (p as u128 * j as u128) % q as u128;
                TAU * r as f64 / q as f64
            }
        }
    }
}

impl Default for Frequency {
    fn default() -> Self {
        Frequency::golden()
    }
}

/// A long-range coupling between sites `m` and `n` (MHz).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LongRangeBond {
    pub m: usize,
    pub n: usize,
    pub strength: f64,
}

impl LongRangeBond {
    pub fn new(m: usize, n: usize, strength: f64) -> Self {
        LongRangeBond { m, n, strength }
    }

    fn key(&self) -> (usize, usize) {
        (self.m.min(self.n), self.m.max(self.n))
    }
}

/// Every model parameter. Frequencies in MHz, `theta` in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct MosaicParams {
    pub n_sites: usize,
    pub j_hop: f64,
    pub lambda_hop: f64,
    pub v0: f64,
    pub theta: f64,
    pub alpha: Frequency,
    pub long_range: Vec<LongRangeBond>,
}

impl MosaicParams {
    /// Nearest-neighbour chain with `V_0 = 0`, `θ = π/5` and golden-mean `α`.
    pub fn new(n_sites: usize, j_hop: f64, lambda_hop: f64) -> Self {
        MosaicParams {
            n_sites,
            j_hop,
            lambda_hop,
            v0: 0.0,
            theta: PI / 5.0,
            alpha: Frequency::golden(),
            long_range: Vec::new(),
        }
    }

    pub fn with_v0(mut self, v0: f64) -> Self {
        self.v0 = v0;
        self
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_alpha(mut self, alpha: Frequency) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_long_range(mut self, bonds: Vec<LongRangeBond>) -> Self {
        self.long_range = bonds;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 {
            return Err(Error::param("n_sites", format!("{} < 2", self.n_sites)));
        }
        for (key, v) in [
            ("j_hop", self.j_hop),
            ("lambda_hop", self.lambda_hop),
            ("v0", self.v0),
            ("theta", self.theta),
        ] {
            if !v.is_finite() {
                return Err(Error::param(key, format!("{v} is not finite")));
            }
        }
        match self.alpha {
            Frequency::Irrational(a) if !(a > 0.0 && a < 1.0) => {
                return Err(Error::param("alpha", format!("{a} not in (0, 1)")));
            }
            Frequency::Rational { p, q } if q == 0 || p == 0 || p >= q => {
                return Err(Error::param("alpha", format!("{p}/{q} not in (0, 1)")));
            }
            _ => {}
        }
        let mut seen = std::collections::HashSet::new();
        for b in &self.long_range {
            check_bond(b, self.n_sites)?;
            if !seen.insert(b.key()) {
                return Err(Error::InvalidBond {
                    m: b.m,
                    n: b.n,
                    reason: "duplicate pair".into(),
                });
            }
        }
        Ok(())
    }

    /// `J_j` for any `j ≥ 1`, without checking against `n_sites`. Used by the
    /// transfer-matrix iteration which walks far past the finite chain.
    pub fn coupling_unchecked(&self, j: usize) -> f64 {
        if j % 2 == 1 {
            self.lambda_hop
        } else {
            2.0 * self.j_hop * (self.alpha.phase(j) + self.theta).cos()
        }
    }

    /// `V_j` for any `j ≥ 1`, without range checks.
    pub fn potential_unchecked(&self, j: usize) -> f64 {
        if self.v0 == 0.0 {
            return 0.0;
        }
        let k = if j % 2 == 1 { j - 1 } else { j };
        2.0 * self.v0 * (self.alpha.phase(k) + self.theta).cos()
    }
}

fn check_bond(b: &LongRangeBond, n_sites: usize) -> Result<()> {
    let bad = |reason: &str| {
        Err(Error::InvalidBond {
            m: b.m,
            n: b.n,
            reason: reason.into(),
        })
    };
    if b.m == 0 || b.n == 0 || b.m > n_sites || b.n > n_sites {
        return bad(&format!("sites must lie in 1..={n_sites}"));
    }
    if b.m.abs_diff(b.n) <= 1 {
        return bad("pair must be separated by more than one site");
    }
    if !b.strength.is_finite() {
        return bad("strength is not finite");
    }
    Ok(())
}

/// Nearest-neighbour couplings; entry `k` holds bond `k + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BondSequence {
    values: Vec<f64>,
}

impl BondSequence {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Bond `j` (1-based).
    pub fn bond(&self, j: usize) -> Option<f64> {
        j.checked_sub(1).and_then(|k| self.values.get(k)).copied()
    }
}

/// `J_j`: `λ` on odd bonds, `2J cos(2παj + θ)` on even bonds.
pub fn coupling_at(params: &MosaicParams, j: usize) -> Result<f64> {
    if j == 0 || j >= params.n_sites {
        return Err(Error::IndexOutOfRange {
            what: "bond",
            index: j,
            max: params.n_sites.saturating_sub(1),
        });
    }
    Ok(params.coupling_unchecked(j))
}

/// `V_j`: `2V_0 cos(2πα(j−1) + θ)` on odd sites, `2V_0 cos(2παj + θ)` on even.
pub fn potential_at(params: &MosaicParams, j: usize) -> Result<f64> {
    if j == 0 || j > params.n_sites {
        return Err(Error::IndexOutOfRange {
            what: "site",
            index: j,
            max: params.n_sites,
        });
    }
    Ok(params.potential_unchecked(j))
}

pub fn build_sequences(params: &MosaicParams) -> Result<(BondSequence, Vec<f64>)> {
    params.validate()?;
    let n = params.n_sites;
    let values = (1..n).map(|j| params.coupling_unchecked(j)).collect();
    let potentials = (1..=n).map(|j| params.potential_unchecked(j)).collect();
    Ok((BondSequence { values }, potentials))
}

/// Even bonds whose coupling is below `epsilon · 2J` in magnitude, ascending.
pub fn find_idz_bonds(params: &MosaicParams, epsilon: f64) -> Result<Vec<usize>> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::param("epsilon", format!("{epsilon} must be > 0")));
    }
    params.validate()?;
    let cut = epsilon * 2.0 * params.j_hop.abs();
    Ok((2..params.n_sites)
        .step_by(2)
        .filter(|&j| params.coupling_unchecked(j).abs() < cut)
        .collect())
}

/// `(F_k, F_{k+1})` with the seed `F_1 = 1, F_2 = 2`.
pub fn fibonacci_approximant(k: u32) -> Result<(u64, u64)> {
    if k == 0 {
        return Err(Error::param("k", "Fibonacci order starts at 1"));
    }
    let (mut p, mut q) = (1u64, 2u64);
    for _ in 1..k {
        let next = p.checked_add(q).ok_or(Error::FibonacciOverflow(k))?;
        p = q;
        q = next;
    }
    Ok((p, q))
}

/// Fibonacci numbers `F_k` (same seed) lying in `lo..=hi`; convenient chain
/// lengths for commensurate scaling studies.
pub fn fibonacci_sizes(lo: usize, hi: usize) -> Vec<usize> {
    let (mut a, mut b) = (1usize, 2usize);
    let mut out = Vec::new();
    while a <= hi {
        if a >= lo {
            out.push(a);
        }
        let next = a + b;
        a = b;
        b = next;
    }
    out
}

//! Exact time evolution and transport observables.
//!
//! Evolution goes through one full eigendecomposition `H = U E Uᵀ`, after
//! which `ψ(t) = U e^{−iEt} Uᵀ ψ(0)` for any number of times. No time
//! stepping is involved, so observables carry no integrator error; the only
//! discretisation is the trapezoidal quadrature used for time averages.
//!
//! Times are in ns and the Hamiltonian in rad/ns.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianMatrix;
use crate::spectral;

const NORM_TOL: f64 = 1e-12;

/// Amplitudes `u_j` over the single-excitation basis `|1⟩_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: DVector<Complex64>,
}

impl StateVector {
    /// Validates normalisation to within `1e-12`.
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        let s = StateVector {
            amps: DVector::from_vec(amps),
        };
        if s.amps.is_empty() {
            return Err(Error::param("state", "empty amplitude vector"));
        }
        let norm = s.norm_squared();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::param(
                "state",
                format!("squared norm {norm} is not 1"),
            ));
        }
        Ok(s)
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(amps: Vec<Complex64>) -> Result<Self> {
        let v = DVector::from_vec(amps);
        let n = v.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::param(
                "state",
                "cannot normalise a zero or non-finite vector",
            ));
        }
        Ok(StateVector { amps: v.unscale(n) })
    }

    /// `|1⟩_site` (1-based).
    pub fn site(n_sites: usize, site: usize) -> Result<Self> {
        check_site(site, n_sites)?;
        let mut amps = DVector::zeros(n_sites);
        amps[site - 1] = Complex64::new(1.0, 0.0);
        Ok(StateVector { amps })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        self.amps.as_slice()
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm_squared(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.dotc(&other.amps)
    }
}

fn check_site(site: usize, n_sites: usize) -> Result<()> {
    if site == 0 || site > n_sites {
        return Err(Error::IndexOutOfRange {
            what: "site",
            index: site,
            max: n_sites,
        });
    }
    Ok(())
}

/// Initial-state families used by the quench protocols.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    /// `|1⟩_j`.
    Single(usize),
    /// `(|1⟩_n + e^{iφ}|1⟩_{n+1})/√2`; `φ = 0` is the "+" dimer, `φ = π` the "−".
    Dimer { n: usize, phi: f64 },
    /// One excitation on each of the sites `offset, offset + period, ...`.
    Comb { period: usize, offset: usize },
}

impl InitialState {
    /// Sites initially excited: one for `Single`, two for `Dimer`, the whole
    /// progression for `Comb`.
    pub fn sites(&self, n_sites: usize) -> Result<Vec<usize>> {
        match *self {
            InitialState::Single(j) => {
                check_site(j, n_sites)?;
                Ok(vec![j])
            }
            InitialState::Dimer { n, .. } => {
                check_site(n, n_sites)?;
                check_site(n + 1, n_sites)?;
                Ok(vec![n, n + 1])
            }
            InitialState::Comb { period, offset } => comb_sites(period, offset, n_sites),
        }
    }

    /// Site the width `W` and right population are measured from when the
    /// caller does not pick one: the excited site, the left site of a dimer,
    /// the first tooth of a comb.
    pub fn default_origin(&self) -> usize {
        match *self {
            InitialState::Single(j) => j,
            InitialState::Dimer { n, .. } => n,
            InitialState::Comb { offset, .. } => offset,
        }
    }

    pub fn is_multi_excitation(&self) -> bool {
        matches!(self, InitialState::Comb { .. })
    }
}

/// Sites `offset + k·period` inside the chain.
pub fn comb_sites(period: usize, offset: usize, n_sites: usize) -> Result<Vec<usize>> {
    if period == 0 {
        return Err(Error::param("period", "must be positive"));
    }
    check_site(offset, n_sites)?;
    Ok((offset..=n_sites).step_by(period).collect())
}

/// Builds a single-excitation state. Comb states carry several excitations and
/// have no single-excitation amplitude vector; evolve them with
/// [`comb_density`] or [`evolve`].
pub fn make_initial_state(kind: &InitialState, n_sites: usize) -> Result<StateVector> {
    match *kind {
        InitialState::Single(j) => StateVector::site(n_sites, j),
        InitialState::Dimer { n, phi } => {
            kind.sites(n_sites)?;
            let mut amps = vec![Complex64::new(0.0, 0.0); n_sites];
            let r = std::f64::consts::FRAC_1_SQRT_2;
            amps[n - 1] = Complex64::new(r, 0.0);
            amps[n] = Complex64::from_polar(r, phi);
            Ok(StateVector {
                amps: DVector::from_vec(amps),
            })
        }
        InitialState::Comb { .. } => Err(Error::param(
            "initial_state",
            "comb states hold several excitations; use comb_density",
        )),
    }
}

/// Uniform time grid `0, dt, ..., t_f`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    t_final: f64,
    dt: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn uniform(t_final: f64, dt: f64) -> Result<Self> {
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::param("t_f", format!("{t_final} must be positive")));
        }
        if !(dt > 0.0 && dt <= t_final) {
            return Err(Error::param("dt", format!("{dt} must lie in (0, t_f]")));
        }
        let ratio = t_final / dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::param(
                "dt",
                format!("{dt} does not divide t_f = {t_final}"),
            ));
        }
        Ok(TimeGrid {
            t_final,
            dt,
            steps: steps as usize,
        })
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| k as f64 * self.dt).collect()
    }
}

/// Cached eigendecomposition of `H`.
#[derive(Debug, Clone)]
pub struct Propagator {
    energies: Vec<f64>,
    vectors: DMatrix<f64>,
}

impl Propagator {
    pub fn new(h: &HamiltonianMatrix) -> Result<Self> {
        let (energies, vectors) = spectral::decompose(h)?;
        Ok(Propagator { energies, vectors })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// `e^{−iHt}ψ`. Negative `t` runs backwards.
    pub fn evolve(&self, psi: &StateVector, t: f64) -> StateVector {
        let coeffs = self.vectors.transpose().map(|x| Complex64::new(x, 0.0)) * &psi.amps;
        let phased = DVector::from_iterator(
            coeffs.len(),
            coeffs
                .iter()
                .zip(&self.energies)
                .map(|(c, &e)| c * Complex64::from_polar(1.0, -e * t)),
        );
        StateVector {
            amps: self.vectors.map(|x| Complex64::new(x, 0.0)) * phased,
        }
    }

    /// Single-particle propagator `G(t) = U e^{−iEt} Uᵀ`.
    pub fn matrix(&self, t: f64) -> DMatrix<Complex64> {
        let n = self.dim();
        let u = self.vectors.map(|x| Complex64::new(x, 0.0));
        let mut phased = u.clone();
        for (k, &e) in self.energies.iter().enumerate() {
            let f = Complex64::from_polar(1.0, -e * t);
            for i in 0..n {
                phased[(i, k)] *= f;
            }
        }
        phased * u.transpose()
    }
}

/// `ψ(t)` for every time in `times` (sorted, nonnegative).
pub fn propagate(
    h: &HamiltonianMatrix,
    psi0: &StateVector,
    times: &[f64],
) -> Result<Vec<StateVector>> {
    if psi0.len() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            got: psi0.len(),
        });
    }
    if times.iter().any(|t| t.is_nan() || *t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::param("times", "must be sorted and nonnegative"));
    }
    let prop = Propagator::new(h)?;
    Ok(times
        .iter()
        .map(|&t| {
            if t == 0.0 {
                psi0.clone()
            } else {
                prop.evolve(psi0, t)
            }
        })
        .collect())
}

/// `n_j = |u_j|²`.
pub fn density(psi: &StateVector) -> Vec<f64> {
    psi.amps.iter().map(|a| a.norm_sqr()).collect()
}

/// `D = −ln Σ|u_j|⁴ / ln N`.
pub fn fractal_dimension(psi: &StateVector, n_sites: usize) -> f64 {
    fractal_dimension_of_density(&density(psi), n_sites)
}

/// `D` of a population profile. Profiles holding several excitations are
/// normalised to unit weight first.
pub fn fractal_dimension_of_density(n: &[f64], n_sites: usize) -> f64 {
    let total: f64 = n.iter().sum();
    let ipr: f64 = n.iter().map(|x| (x / total).powi(2)).sum();
    (-ipr.ln() / (n_sites as f64).ln()).clamp(0.0, 1.0)
}

/// `W = Σ_j √|j − j₀| n_j`.
pub fn width(n: &[f64], j0: usize) -> f64 {
    n.iter()
        .enumerate()
        .map(|(k, x)| ((k + 1).abs_diff(j0) as f64).sqrt() * x)
        .sum()
}

/// `Σ_{j > j₀} n_j`.
pub fn right_weight(n: &[f64], j0: usize) -> f64 {
    n.iter().skip(j0).sum()
}

/// `(1/t_f) ∫₀^{t_f} f dτ` by the trapezoidal rule on a uniform grid.
pub fn time_average(values: &[f64], dt: f64) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            let inner: f64 = values[1..n - 1].iter().sum();
            let integral = dt * (inner + 0.5 * (values[0] + values[n - 1]));
            integral / (dt * (n - 1) as f64)
        }
    }
}

/// Densities `n_j(t) = Σ_{k∈sites} |G_jk(t)|²` after exciting each of `sites`.
///
/// This is the free-fermion identity: exact for nearest-neighbour XY chains
/// via the Jordan–Wigner map; with long-range bonds it ignores the string
/// phases and becomes the non-interacting-fermion approximation.
pub fn comb_density(h: &HamiltonianMatrix, sites: &[usize], t: f64) -> Result<Vec<f64>> {
    let prop = Propagator::new(h)?;
    comb_density_with(&prop, sites, t)
}

fn comb_density_with(prop: &Propagator, sites: &[usize], t: f64) -> Result<Vec<f64>> {
    let n = prop.dim();
    let mut seen = vec![false; n];
    for &s in sites {
        check_site(s, n)?;
        if std::mem::replace(&mut seen[s - 1], true) {
            return Err(Error::param("sites", format!("site {s} listed twice")));
        }
    }
    let g = prop.matrix(t);
    Ok((0..n)
        .map(|j| sites.iter().map(|&k| g[(j, k - 1)].norm_sqr()).sum())
        .collect())
}

/// Time traces and their integrated summaries.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionRecord {
    pub times: Vec<f64>,
    /// `density[t][j - 1] = n_j(t)`.
    pub density: Vec<Vec<f64>>,
    pub d_trace: Vec<f64>,
    pub w_trace: Vec<f64>,
    /// `(1/t_f)∫[D(τ) − D(0)]dτ`.
    pub d_bar: f64,
    /// `(1/t_f)∫[W(τ) − W(0)]dτ`.
    pub m_integrated: f64,
    /// Time-averaged `Σ_{j>j₀} n_j`.
    pub n_r_bar: f64,
    pub j0: usize,
}

impl EvolutionRecord {
    /// Recomputes every trace and summary from `times` and `density`.
    pub fn from_density(times: Vec<f64>, density: Vec<Vec<f64>>, j0: usize) -> Self {
        let n_sites = density.first().map_or(0, |r| r.len());
        let d_trace: Vec<f64> = density
            .iter()
            .map(|r| fractal_dimension_of_density(r, n_sites))
            .collect();
        let w_trace: Vec<f64> = density.iter().map(|r| width(r, j0)).collect();
        let right: Vec<f64> = density.iter().map(|r| right_weight(r, j0)).collect();
        let dt = if times.len() > 1 {
            times[1] - times[0]
        } else {
            1.0
        };
        let shifted = |v: &[f64]| v.iter().map(|x| x - v[0]).collect::<Vec<_>>();
        let (d_bar, m_integrated, n_r_bar) = if density.is_empty() {
            (0.0, 0.0, 0.0)
        } else {
            (
                time_average(&shifted(&d_trace), dt),
                time_average(&shifted(&w_trace), dt),
                time_average(&right, dt),
            )
        };
        EvolutionRecord {
            times,
            density,
            d_trace,
            w_trace,
            d_bar,
            m_integrated,
            n_r_bar,
            j0,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.density.first().map_or(0, |r| r.len())
    }
}

/// Full quench: evolves `initial` on `grid` and records every observable with
/// `j0` as the reference site.
pub fn evolve(
    h: &HamiltonianMatrix,
    initial: &InitialState,
    j0: usize,
    grid: &TimeGrid,
) -> Result<EvolutionRecord> {
    let n = h.dim();
    check_site(j0, n)?;
    let prop = Propagator::new(h)?;
    evolve_with(&prop, initial, j0, grid)
}

pub fn evolve_with(
    prop: &Propagator,
    initial: &InitialState,
    j0: usize,
    grid: &TimeGrid,
) -> Result<EvolutionRecord> {
    let n = prop.dim();
    check_site(j0, n)?;
    let times = grid.times();
    let density = if initial.is_multi_excitation() {
        let sites = initial.sites(n)?;
        times
            .iter()
            .map(|&t| comb_density_with(prop, &sites, t))
            .collect::<Result<Vec<_>>>()?
    } else {
        let psi0 = make_initial_state(initial, n)?;
        times
            .iter()
            .map(|&t| {
                if t == 0.0 {
                    density(&psi0)
                } else {
                    density(&prop.evolve(&psi0, t))
                }
            })
            .collect()
    };
    Ok(EvolutionRecord::from_density(times, density, j0))
}

fn single_record(
    h: &HamiltonianMatrix,
    psi0: &StateVector,
    j0: usize,
    t_f: f64,
    dt: f64,
) -> Result<EvolutionRecord> {
    let grid = TimeGrid::uniform(t_f, dt)?;
    check_site(j0, h.dim())?;
    let times = grid.times();
    let states = propagate(h, psi0, &times)?;
    let density = states.iter().map(density).collect();
    Ok(EvolutionRecord::from_density(times, density, j0))
}

/// `D̄` for a single-excitation quench.
pub fn time_averaged_d(
    h: &HamiltonianMatrix,
    psi0: &StateVector,
    t_f: f64,
    dt: f64,
) -> Result<f64> {
    // D̄ does not depend on the reference site.
    Ok(single_record(h, psi0, 1, t_f, dt)?.d_bar)
}

/// `M(t_f)` with `W` measured from `j0`.
pub fn integrated_width(
    h: &HamiltonianMatrix,
    psi0: &StateVector,
    j0: usize,
    t_f: f64,
    dt: f64,
) -> Result<f64> {
    Ok(single_record(h, psi0, j0, t_f, dt)?.m_integrated)
}

/// `n̄_r`: time-averaged population strictly right of `j0`.
pub fn right_population(
    h: &HamiltonianMatrix,
    psi0: &StateVector,
    j0: usize,
    t_f: f64,
    dt: f64,
) -> Result<f64> {
    Ok(single_record(h, psi0, j0, t_f, dt)?.n_r_bar)
}

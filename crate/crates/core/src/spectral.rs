//! Eigensystems, finite-size scaling of eigenstates, transfer-matrix Lyapunov
//! exponents and mobility-edge scans.
//!
//! Energies are angular frequencies in rad/ns throughout.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::dynamics::{fractal_dimension_of_density, StateVector};
use crate::error::{Error, Result};
use crate::hamiltonian::{self, to_angular, HamiltonianMatrix, LongRangePreset};
use crate::lattice::MosaicParams;

/// Shortest chain accepted by [`lyapunov_exponent`].
pub const MIN_CHAIN_LENGTH: usize = 100_000;

/// Steps between log-rescalings of the transfer vector.
const RESCALE_EVERY: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateClass {
    Localized,
    Critical,
    Extended,
    Unresolved,
}

impl StateClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            StateClass::Localized => "localized",
            StateClass::Critical => "critical",
            StateClass::Extended => "extended",
            StateClass::Unresolved => "unresolved",
        }
    }
}

impl std::str::FromStr for StateClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "localized" => Ok(StateClass::Localized),
            "critical" => Ok(StateClass::Critical),
            "extended" => Ok(StateClass::Extended),
            "unresolved" => Ok(StateClass::Unresolved),
            other => Err(Error::param("class", format!("unknown class `{other}`"))),
        }
    }
}

impl std::fmt::Display for StateClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Ascending eigenvalues with eigenvectors in matching columns.
pub(crate) fn decompose(h: &HamiltonianMatrix) -> Result<(Vec<f64>, DMatrix<f64>)> {
    if h.matrix().iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let eig = SymmetricEigen::try_new(h.matrix().clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Eigensolver("symmetric QR iteration did not converge".into()))?;
    let n = h.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, c| eig.eigenvectors[(i, order[c])]);
    Ok((energies, vectors))
}

#[derive(Debug, Clone)]
pub struct SpectrumRecord {
    pub energies: Vec<f64>,
    /// Column `k` is the eigenvector of `energies[k]`.
    pub vectors: DMatrix<f64>,
    pub d_values: Vec<f64>,
    pub classes: Vec<StateClass>,
}

impl SpectrumRecord {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn state(&self, k: usize) -> StateVector {
        let amps = self
            .vectors
            .column(k)
            .iter()
            .map(|&x| num_complex::Complex64::new(x, 0.0))
            .collect();
        StateVector::normalized(amps).expect("eigenvectors are nonzero")
    }

    pub fn states(&self) -> Vec<StateVector> {
        (0..self.len()).map(|k| self.state(k)).collect()
    }

    /// `max_k ‖H v_k − E_k v_k‖`.
    pub fn max_residual(&self, h: &HamiltonianMatrix) -> f64 {
        (0..self.len())
            .map(|k| {
                let v = self.vectors.column(k);
                (h.matrix() * v - v * self.energies[k]).norm()
            })
            .fold(0.0, f64::max)
    }

    /// `max |V̄ᵀV − 1|`.
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.vectors.transpose() * &self.vectors;
        let n = self.len();
        (g - DMatrix::<f64>::identity(n, n)).amax()
    }
}

/// Full diagonalisation. Single-size data cannot tell critical from extended
/// states, so every class starts out `Unresolved`; see [`classify_states`].
pub fn eigensystem(h: &HamiltonianMatrix) -> Result<SpectrumRecord> {
    let (energies, vectors) = decompose(h)?;
    let n = h.dim();
    let d_values = (0..n)
        .map(|k| {
            let p: Vec<f64> = vectors.column(k).iter().map(|x| x * x).collect();
            fractal_dimension_of_density(&p, n)
        })
        .collect();
    Ok(SpectrumRecord {
        energies,
        vectors,
        d_values,
        classes: vec![StateClass::Unresolved; n],
    })
}

/// A model family that can be instantiated at any chain length.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelTemplate {
    /// `n_sites` and `long_range` of the base are replaced per size.
    pub base: MosaicParams,
    pub long_range: Option<LongRangePreset>,
}

impl ModelTemplate {
    pub fn new(base: MosaicParams) -> Self {
        ModelTemplate {
            base,
            long_range: None,
        }
    }

    pub fn with_long_range(mut self, preset: LongRangePreset) -> Self {
        self.long_range = Some(preset);
        self
    }

    /// Explicit bond lists keep only the pairs that fit inside `n_sites`.
    pub fn at_size(&self, n_sites: usize) -> MosaicParams {
        let mut p = self.base.clone();
        p.n_sites = n_sites;
        p.long_range = match &self.long_range {
            None => Vec::new(),
            Some(preset) => preset
                .bonds(n_sites)
                .into_iter()
                .filter(|b| b.m <= n_sites && b.n <= n_sites)
                .collect(),
        };
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnergyWindow {
    /// Energies in `[lo, hi]`, rad/ns.
    Energy { lo: f64, hi: f64 },
    /// States whose rank fraction `k/N` lies in `[lo, hi)`.
    Fraction { lo: f64, hi: f64 },
}

impl EnergyWindow {
    pub fn mid_spectrum() -> Self {
        EnergyWindow::Fraction { lo: 0.4, hi: 0.6 }
    }

    fn select(&self, energies: &[f64]) -> Vec<usize> {
        let n = energies.len();
        match *self {
            EnergyWindow::Energy { lo, hi } => (0..n)
                .filter(|&k| energies[k] >= lo && energies[k] <= hi)
                .collect(),
            EnergyWindow::Fraction { lo, hi } => (0..n)
                .filter(|&k| {
                    let f = k as f64 / n as f64;
                    f >= lo && f < hi
                })
                .collect(),
        }
    }
}

/// Decision thresholds on the IPR scaling exponent `τ` (`Σ|u|⁴ ∝ N^{−τ}`) and
/// the drift `dD/d ln N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingThresholds {
    pub localized_max_exponent: f64,
    pub extended_min_exponent: f64,
    pub critical_max_drift: f64,
}

impl Default for ScalingThresholds {
    fn default() -> Self {
        ScalingThresholds {
            localized_max_exponent: 0.2,
            extended_min_exponent: 0.9,
            critical_max_drift: 0.05,
        }
    }
}

impl ScalingThresholds {
    pub fn classify(&self, exponent: f64, drift: f64) -> StateClass {
        if exponent < self.localized_max_exponent {
            StateClass::Localized
        } else if exponent > self.extended_min_exponent {
            StateClass::Extended
        } else if drift.abs() < self.critical_max_drift {
            StateClass::Critical
        } else {
            StateClass::Unresolved
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingClassification {
    pub class: StateClass,
    pub sizes: Vec<usize>,
    /// Window mean of `D` per size.
    pub d_means: Vec<f64>,
    /// Window mean of `ln Σ|u|⁴` per size.
    pub log_ipr_means: Vec<f64>,
    /// Fitted `τ`.
    pub exponent: f64,
    /// Fitted `dD/d ln N`.
    pub drift: f64,
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn check_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 3 {
        return Err(Error::param("sizes", "need at least three sizes"));
    }
    if sizes.windows(2).any(|w| w[1] <= w[0]) || sizes[0] < 2 {
        return Err(Error::param("sizes", "must be increasing and at least 2"));
    }
    Ok(())
}

fn log_iprs(spec: &SpectrumRecord) -> Vec<f64> {
    (0..spec.len())
        .map(|k| {
            spec.vectors
                .column(k)
                .iter()
                .map(|x| x.powi(4))
                .sum::<f64>()
                .ln()
        })
        .collect()
}

fn spectra(template: &ModelTemplate, sizes: &[usize]) -> Result<Vec<SpectrumRecord>> {
    sizes
        .par_iter()
        .map(|&n| eigensystem(&hamiltonian::build(&template.at_size(n))?))
        .collect()
}

fn fit(
    sizes: &[usize],
    log_ipr: Vec<f64>,
    thresholds: &ScalingThresholds,
) -> ScalingClassification {
    let ln_n: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let d_means: Vec<f64> = log_ipr.iter().zip(&ln_n).map(|(l, n)| -l / n).collect();
    let exponent = -slope(&ln_n, &log_ipr);
    let drift = slope(&ln_n, &d_means);
    ScalingClassification {
        class: thresholds.classify(exponent, drift),
        sizes: sizes.to_vec(),
        d_means,
        log_ipr_means: log_ipr,
        exponent,
        drift,
    }
}

/// Classifies the eigenstates in `window` by how their inverse participation
/// ratio scales across `sizes` (at least three, increasing; Fibonacci lengths
/// keep the boundary commensurate).
pub fn classify_by_scaling(
    template: &ModelTemplate,
    sizes: &[usize],
    window: EnergyWindow,
    thresholds: &ScalingThresholds,
) -> Result<ScalingClassification> {
    check_sizes(sizes)?;
    let specs = spectra(template, sizes)?;
    let mut means = Vec::with_capacity(sizes.len());
    for (spec, &n) in specs.iter().zip(sizes) {
        let idx = window.select(&spec.energies);
        if idx.is_empty() {
            return Err(Error::EmptyWindow { n_sites: n });
        }
        let l = log_iprs(spec);
        means.push(idx.iter().map(|&k| l[k]).sum::<f64>() / idx.len() as f64);
    }
    Ok(fit(sizes, means, thresholds))
}

/// Spectrum at `sizes[0]` with every state classified by scaling. State `k`
/// is matched at larger sizes to the states inside its energy cell (half-way
/// to its neighbours), or to the nearest state when that cell is empty.
pub fn classify_states(
    template: &ModelTemplate,
    sizes: &[usize],
    thresholds: &ScalingThresholds,
) -> Result<SpectrumRecord> {
    check_sizes(sizes)?;
    let mut specs = spectra(template, sizes)?;
    let logs: Vec<Vec<f64>> = specs.iter().map(log_iprs).collect();
    let base = &specs[0];
    let n0 = base.len();
    let classes = (0..n0)
        .map(|k| {
            let e = base.energies[k];
            let lo = if k > 0 {
                0.5 * (base.energies[k - 1] + e)
            } else {
                f64::NEG_INFINITY
            };
            let hi = if k + 1 < n0 {
                0.5 * (base.energies[k + 1] + e)
            } else {
                f64::INFINITY
            };
            let means: Vec<f64> = specs
                .iter()
                .zip(&logs)
                .map(|(s, l)| {
                    let idx: Vec<usize> = (0..s.len())
                        .filter(|&i| s.energies[i] >= lo && s.energies[i] < hi)
                        .collect();
                    if idx.is_empty() {
                        let nearest = (0..s.len())
                            .min_by(|&a, &b| {
                                (s.energies[a] - e)
                                    .abs()
                                    .total_cmp(&(s.energies[b] - e).abs())
                            })
                            .unwrap_or(0);
                        l[nearest]
                    } else {
                        idx.iter().map(|&i| l[i]).sum::<f64>() / idx.len() as f64
                    }
                })
                .collect();
            fit(sizes, means, thresholds).class
        })
        .collect();
    let mut out = specs.swap_remove(0);
    out.classes = classes;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovResult {
    /// rad/ns.
    pub energy: f64,
    /// Inverse localisation length per site.
    pub gamma: f64,
    pub chain_length: usize,
}

/// Compensated running sum.
#[derive(Default)]
struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Growth rate of `J_j ψ_{j+1} = (E − V_j) ψ_j − J_{j−1} ψ_{j−1}` over
/// `chain_length` sites, starting from site 2.
fn transfer_growth(params: &MosaicParams, energy: f64, chain_length: usize) -> Result<f64> {
    let (mut prev, mut cur) = (0.6_f64, 0.8_f64);
    let mut logs = KahanSum::default();
    let mut j_prev = to_angular(params.coupling_unchecked(1));
    for step in 0..chain_length {
        let j = step + 2;
        let j_cur = to_angular(params.coupling_unchecked(j));
        if j_cur == 0.0 {
            return Err(Error::SingularBond { bond: j });
        }
        let v = to_angular(params.potential_unchecked(j));
        let next = ((energy - v) * cur - j_prev * prev) / j_cur;
        prev = cur;
        cur = next;
        j_prev = j_cur;
        if (step + 1) % RESCALE_EVERY == 0 {
            let norm = prev.hypot(cur);
            logs.add(norm.ln());
            prev /= norm;
            cur /= norm;
        }
    }
    logs.add(prev.hypot(cur).ln());
    Ok(logs.sum / chain_length as f64)
}

/// Lyapunov exponent at `energy` (rad/ns) for the nearest-neighbour model.
pub fn lyapunov_exponent(
    params: &MosaicParams,
    energy: f64,
    chain_length: usize,
) -> Result<LyapunovResult> {
    if !params.long_range.is_empty() {
        return Err(Error::param(
            "long_range",
            "transfer matrices need a nearest-neighbour chain",
        ));
    }
    if chain_length < MIN_CHAIN_LENGTH {
        return Err(Error::param(
            "chain_length",
            format!("{chain_length} < {MIN_CHAIN_LENGTH}"),
        ));
    }
    if !energy.is_finite() {
        return Err(Error::param("energy", "not finite"));
    }
    params.validate()?;
    Ok(LyapunovResult {
        energy,
        gamma: transfer_growth(params, energy, chain_length)?,
        chain_length,
    })
}

/// Where spectral weight is measured: a stretch of chain far from site 1, so
/// that boundary states of short chains play no part.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpectralProbe {
    pub segment_start: usize,
    pub segment_len: usize,
    /// Fewest segment eigenvalues for a window to count as holding bulk
    /// spectrum; each gap holds at most one boundary state per segment end.
    pub min_weight: usize,
}

impl Default for SpectralProbe {
    fn default() -> Self {
        SpectralProbe {
            segment_start: 5_000_001,
            segment_len: 100_000,
            min_weight: 3,
        }
    }
}

/// Number of eigenvalues below `energy` (rad/ns) of the open probe segment,
/// by Sturm sequence counting.
pub fn eigenvalue_count(params: &MosaicParams, energy: f64, probe: &SpectralProbe) -> usize {
    let tiny = 1e-300_f64.max(energy.abs() * f64::EPSILON);
    let mut count = 0;
    let mut q = 1.0_f64;
    let mut b_prev = 0.0_f64;
    for i in 0..probe.segment_len {
        let j = probe.segment_start + i;
        let d = to_angular(params.potential_unchecked(j));
        q = if i == 0 {
            d - energy
        } else {
            (d - energy) - b_prev * b_prev / q
        };
        if q == 0.0 {
            q = -tiny;
        }
        if q < 0.0 {
            count += 1;
        }
        b_prev = to_angular(params.coupling_unchecked(j));
    }
    count
}

/// Segment eigenvalue number `index` (from 0), known to lie in `[lo, hi]`.
fn probe_eigenvalue(
    params: &MosaicParams,
    index: usize,
    mut lo: f64,
    mut hi: f64,
    probe: &SpectralProbe,
) -> f64 {
    let tol = 1e-8 * (hi - lo);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= tol {
            return mid;
        }
        if eigenvalue_count(params, mid, probe) > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

/// Lyapunov exponent on the spectrum inside `[lo, hi]` (rad/ns), or `None`
/// when the window holds no bulk spectrum.
///
/// A critical spectrum is a Cantor set of zero measure, so a fixed energy
/// almost surely sits in a gap where `γ > 0`, and eigenvalues of finite
/// chains approach the spectrum only slowly. Since `γ` is smallest on the
/// spectrum, the exponent is minimised over the window, seeded with bulk
/// eigenvalues of the probe segment and `seeds`.
pub fn spectral_lyapunov(
    params: &MosaicParams,
    lo: f64,
    hi: f64,
    seeds: &[f64],
    probe: &SpectralProbe,
    chain_length: usize,
) -> Result<Option<LyapunovResult>> {
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(Error::param("window", format!("[{lo}, {hi}] is empty")));
    }
    if !params.long_range.is_empty() {
        return Err(Error::param(
            "long_range",
            "transfer matrices need a nearest-neighbour chain",
        ));
    }
    let below_lo = eigenvalue_count(params, lo, probe);
    let below_hi = eigenvalue_count(params, hi, probe);
    let weight = below_hi - below_lo;
    if weight < probe.min_weight.max(1) {
        return Ok(None);
    }
    let search_len = (chain_length / 10).max(10_000);
    let gamma = |e: f64| transfer_growth(params, e, search_len);

    let n_probe = weight.min(8);
    let mut candidates: Vec<f64> = (0..n_probe)
        .map(|i| {
            let index = below_lo + i * (weight - 1) / (n_probe - 1).max(1);
            probe_eigenvalue(params, index, lo, hi, probe)
        })
        .collect();
    candidates.extend((0..9).map(|i| lo + (hi - lo) * i as f64 / 8.0));
    candidates.extend(seeds.iter().copied().filter(|e| *e >= lo && *e <= hi));
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let mut best = (f64::INFINITY, lo, 0);
    for (i, &e) in candidates.iter().enumerate() {
        let g = gamma(e)?;
        if g < best.0 {
            best = (g, e, i);
        }
    }
    // golden-section refinement between the neighbouring candidates
    let i = best.2;
    let mut a = if i > 0 { candidates[i - 1] } else { lo };
    let mut b = if i + 1 < candidates.len() {
        candidates[i + 1]
    } else {
        hi
    };
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut gc, mut gd) = (gamma(c)?, gamma(d)?);
    for _ in 0..60 {
        if b - a < 1e-13 * (1.0 + best.1.abs()) {
            break;
        }
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = gamma(c)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = gamma(d)?;
        }
        for (g, e) in [(gc, c), (gd, d)] {
            if g < best.0 {
                best = (g, e, i);
            }
        }
    }
    lyapunov_exponent(params, best.1, chain_length).map(Some)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    pub energy: f64,
    /// `γ` at the grid energy itself.
    pub gamma: f64,
    /// Minimising spectral point of the grid cell and its exponent; `None`
    /// for cells inside a spectral gap.
    pub spectral: Option<LyapunovResult>,
    /// `Critical` for a vanishing spectral exponent, else `Localized`.
    pub class: Option<StateClass>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MobilityScan {
    pub points: Vec<ScanPoint>,
    /// Midpoints between consecutive spectral cells of different class.
    pub crossings: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub chain_length: usize,
    /// `γ` below this counts as zero.
    pub zero_tolerance: f64,
    pub probe: SpectralProbe,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            chain_length: 1_000_000,
            zero_tolerance: 1e-3,
            probe: SpectralProbe::default(),
        }
    }
}

/// Cells `[lo, hi]` around ascending points, split half-way between
/// neighbours and extended by half a spacing at both ends.
pub fn level_cells(points: &[f64]) -> Vec<(f64, f64)> {
    let n = points.len();
    (0..n)
        .map(|i| {
            let lo = if i > 0 {
                0.5 * (points[i - 1] + points[i])
            } else if n > 1 {
                points[0] - 0.5 * (points[1] - points[0])
            } else {
                points[0] - 0.5
            };
            let hi = if i + 1 < n {
                0.5 * (points[i] + points[i + 1])
            } else if n > 1 {
                points[n - 1] + 0.5 * (points[n - 1] - points[n - 2])
            } else {
                points[0] + 0.5
            };
            (lo, hi)
        })
        .collect()
}

/// `γ(E)` over an ascending energy grid (rad/ns) together with the exponent on
/// the spectrum inside each grid cell. Nearest-neighbour mosaic chains always
/// carry coupling zeros, so zero-exponent states there are critical rather
/// than extended.
pub fn mobility_edge_scan(
    params: &MosaicParams,
    grid: &[f64],
    opts: &ScanOptions,
) -> Result<MobilityScan> {
    if grid.len() < 2 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("grid", "need at least two ascending energies"));
    }
    let cells = level_cells(grid);
    let points = grid
        .par_iter()
        .zip(cells.par_iter())
        .map(|(&e, &(lo, hi))| {
            let gamma = lyapunov_exponent(params, e, opts.chain_length)?.gamma;
            let spectral = spectral_lyapunov(params, lo, hi, &[e], &opts.probe, opts.chain_length)?;
            let class = spectral.map(|s| {
                if s.gamma < opts.zero_tolerance {
                    StateClass::Critical
                } else {
                    StateClass::Localized
                }
            });
            Ok(ScanPoint {
                energy: e,
                gamma,
                spectral,
                class,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let on_spectrum: Vec<&ScanPoint> = points.iter().filter(|p| p.class.is_some()).collect();
    let crossings = on_spectrum
        .windows(2)
        .filter(|w| w[0].class != w[1].class)
        .map(|w| 0.5 * (w[0].energy + w[1].energy))
        .collect();
    Ok(MobilityScan { points, crossings })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeCount {
    /// `|E| > ωλ + threshold`.
    pub localized: usize,
    /// `|E| < ωλ − threshold`.
    pub critical: usize,
    /// Within `threshold` of the edge.
    pub near_edge: usize,
}

/// Counts eigenstates on either side of the edges `E_c = ±ωλ`, with
/// `lambda_mhz` in MHz and `threshold` in rad/ns.
pub fn localized_critical_ratio(
    spectrum: &SpectrumRecord,
    lambda_mhz: f64,
    threshold: f64,
) -> EdgeCount {
    let edge = to_angular(lambda_mhz).abs();
    let mut count = EdgeCount {
        localized: 0,
        critical: 0,
        near_edge: 0,
    };
    for e in &spectrum.energies {
        let d = e.abs() - edge;
        if d.abs() <= threshold {
            count.near_edge += 1;
        } else if d > 0.0 {
            count.localized += 1;
        } else {
            count.critical += 1;
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::build;
    use approx::assert_relative_eq;
    use nalgebra::DVector;

    #[test]
    fn rabi_pair() {
        let h = build(&MosaicParams::new(2, 4.0, 10.0)).unwrap();
        let s = eigensystem(&h).unwrap();
        let w = to_angular(10.0);
        assert_relative_eq!(s.energies[0], -w, epsilon = 1e-15);
        assert_relative_eq!(s.energies[1], w, epsilon = 1e-15);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(s.vectors[(0, 1)].abs(), r, epsilon = 1e-14);
        assert_relative_eq!(s.vectors[(0, 1)], s.vectors[(1, 1)], epsilon = 1e-14);
        assert_relative_eq!(s.vectors[(0, 0)], -s.vectors[(1, 0)], epsilon = 1e-14);
    }

    #[test]
    fn diagonal_matrix() {
        let d = DVector::from_vec(vec![0.3, -0.1, 0.2]);
        let h = HamiltonianMatrix::from_matrix(DMatrix::from_diagonal(&d)).unwrap();
        let s = eigensystem(&h).unwrap();
        assert_eq!(s.energies, vec![-0.1, 0.2, 0.3]);
        assert_eq!(s.vectors[(1, 0)].abs(), 1.0);
        assert_eq!(s.vectors[(2, 1)].abs(), 1.0);
        assert!(s.d_values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn residual_and_orthonormality() {
        let p = MosaicParams::new(55, 4.0, 6.0).with_v0(4.0);
        let h = build(&p).unwrap();
        let s = eigensystem(&h).unwrap();
        assert!(s.max_residual(&h) <= 1e-8 * h.max_abs_row_sum());
        assert!(s.orthonormality_error() < 1e-8);
        assert!(s.energies.windows(2).all(|w| w[0] <= w[1]));
        assert!(s.d_values.iter().all(|d| (0.0..=1.0).contains(d)));
    }

    #[test]
    fn chiral_symmetry_without_potential() {
        let h = build(&MosaicParams::new(24, 4.0, 8.0)).unwrap();
        let e = eigensystem(&h).unwrap().energies;
        for k in 0..24 {
            assert_relative_eq!(e[k], -e[23 - k], epsilon = 1e-12);
        }
    }

    #[test]
    fn lyapunov_preconditions() {
        let p = MosaicParams::new(24, 4.0, 1.0);
        assert!(lyapunov_exponent(&p, 0.01, 1000).is_err());
        let lr = p
            .clone()
            .with_long_range(vec![crate::lattice::LongRangeBond::new(1, 3, 1.0)]);
        assert!(lyapunov_exponent(&lr, 0.01, MIN_CHAIN_LENGTH).is_err());
    }

    #[test]
    fn singular_bond_detected() {
        // every even bond vanishes at J = 0
        let p = MosaicParams::new(24, 0.0, 1.0);
        assert!(matches!(
            lyapunov_exponent(&p, 0.01, MIN_CHAIN_LENGTH),
            Err(Error::SingularBond { bond: 2 })
        ));
    }

    #[test]
    fn edge_counts() {
        let p = MosaicParams::new(24, 4.0, 1.0);
        let s = eigensystem(&build(&p).unwrap()).unwrap();
        let huge = localized_critical_ratio(&s, 1e6, 0.0);
        assert_eq!((huge.localized, huge.critical), (0, 24));
        let zero = localized_critical_ratio(&s, 0.0, 0.0);
        assert_eq!(zero.localized + zero.near_edge, 24);
    }

    #[test]
    fn thresholds() {
        let t = ScalingThresholds::default();
        assert_eq!(t.classify(0.01, -0.03), StateClass::Localized);
        assert_eq!(t.classify(0.7, 0.01), StateClass::Critical);
        assert_eq!(t.classify(0.7, 0.2), StateClass::Unresolved);
        assert_eq!(t.classify(1.0, 0.05), StateClass::Extended);
    }

    #[test]
    fn size_validation() {
        let t = ModelTemplate::new(MosaicParams::new(2, 4.0, 1.0));
        let th = ScalingThresholds::default();
        let w = EnergyWindow::mid_spectrum();
        assert!(classify_by_scaling(&t, &[10, 20], w, &th).is_err());
        assert!(classify_by_scaling(&t, &[30, 20, 40], w, &th).is_err());
        let empty = EnergyWindow::Energy { lo: 10.0, hi: 11.0 };
        assert!(matches!(
            classify_by_scaling(&t, &[21, 34, 55], empty, &th),
            Err(Error::EmptyWindow { n_sites: 21 })
        ));
    }
}

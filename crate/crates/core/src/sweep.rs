//! One-dimensional parameter sweeps of quench observables.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::dynamics::{evolve, make_initial_state, InitialState, TimeGrid};
use crate::error::{Error, Result};
use crate::hamiltonian::{build, initial_state_energy, HamiltonianMatrix, LongRangePreset};
use crate::lattice::MosaicParams;

pub const DEFAULT_T_FINAL: f64 = 300.0;
pub const DEFAULT_DT: f64 = 1.0;
pub const DEFAULT_J_MHZ: f64 = 4.0;
pub const DEFAULT_N_SITES: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// `λ/J`.
    LambdaOverJ,
    /// Strength of the swept long-range family over `J`.
    LongRangeOverJ,
    /// Dimer relative phase `φ`.
    DimerPhase,
    /// Dimer left site `n` (grid values must be integers).
    DimerPosition,
}

impl Axis {
    pub fn name(&self) -> &'static str {
        match self {
            Axis::LambdaOverJ => "lambda_over_j",
            Axis::LongRangeOverJ => "long_range_over_j",
            Axis::DimerPhase => "phi",
            Axis::DimerPosition => "dimer_n",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        [
            Axis::LambdaOverJ,
            Axis::LongRangeOverJ,
            Axis::DimerPhase,
            Axis::DimerPosition,
        ]
        .into_iter()
        .find(|a| a.name() == s)
        .ok_or_else(|| Error::param("axis", format!("unknown axis `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Protocol {
    QuenchSingle { j0: usize },
    QuenchDimer { n: usize, phi: f64 },
    Comb { period: usize, offset: usize },
}

impl Protocol {
    pub fn initial_state(&self) -> InitialState {
        match *self {
            Protocol::QuenchSingle { j0 } => InitialState::Single(j0),
            Protocol::QuenchDimer { n, phi } => InitialState::Dimer { n, phi },
            Protocol::Comb { period, offset } => InitialState::Comb { period, offset },
        }
    }
}

/// Replaces the swept family's strength: the next-nearest part of combined
/// presets, every pair of explicit lists.
pub fn with_swept_strength(preset: &LongRangePreset, strength: f64) -> LongRangePreset {
    match preset {
        LongRangePreset::NnnUniform(_) => LongRangePreset::NnnUniform(strength),
        LongRangePreset::NnnnUniform(_) => LongRangePreset::NnnnUniform(strength),
        LongRangePreset::Combined { mu, .. } => LongRangePreset::Combined {
            j_nn: strength,
            mu: *mu,
        },
        LongRangePreset::Explicit(bonds) => LongRangePreset::Explicit(
            bonds
                .iter()
                .map(|b| crate::lattice::LongRangeBond::new(b.m, b.n, strength))
                .collect(),
        ),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    /// Its `long_range` is ignored; see `long_range`.
    pub base: MosaicParams,
    pub axis: Axis,
    pub grid: Vec<f64>,
    pub protocol: Protocol,
    pub long_range: Option<LongRangePreset>,
    pub t_final: f64,
    pub dt: f64,
}

/// Observables of one quench.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointResult {
    pub d_bar: f64,
    pub m_integrated: f64,
    pub n_r_bar: f64,
    /// `⟨H⟩` of the initial state, rad/ns.
    pub init_energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub param: f64,
    /// Failure message for points that could not be evaluated.
    pub outcome: std::result::Result<PointResult, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub axis: Axis,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn values(&self) -> Vec<Option<PointResult>> {
        self.rows.iter().map(|r| r.outcome.clone().ok()).collect()
    }
}

impl SweepPlan {
    pub fn new(base: MosaicParams, axis: Axis, grid: Vec<f64>, protocol: Protocol) -> Self {
        SweepPlan {
            base,
            axis,
            grid,
            protocol,
            long_range: None,
            t_final: DEFAULT_T_FINAL,
            dt: DEFAULT_DT,
        }
    }

    pub fn with_long_range(mut self, preset: LongRangePreset) -> Self {
        self.long_range = Some(preset);
        self
    }

    pub fn with_times(mut self, t_final: f64, dt: f64) -> Self {
        self.t_final = t_final;
        self.dt = dt;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::param("grid", "empty"));
        }
        if self.grid.iter().any(|x| !x.is_finite()) {
            return Err(Error::param("grid", "non-finite value"));
        }
        if self.axis == Axis::LongRangeOverJ && self.long_range.is_none() {
            return Err(Error::param(
                "long_range",
                "the long-range axis needs a preset",
            ));
        }
        if self.axis == Axis::DimerPosition
            && self.grid.iter().any(|x| x.fract() != 0.0 || *x < 1.0)
        {
            return Err(Error::param(
                "grid",
                "dimer positions must be positive integers",
            ));
        }
        if matches!(self.axis, Axis::DimerPhase | Axis::DimerPosition)
            && !matches!(self.protocol, Protocol::QuenchDimer { .. })
        {
            return Err(Error::param("protocol", "dimer axes need a dimer protocol"));
        }
        TimeGrid::uniform(self.t_final, self.dt)?;
        let mut base = self.base.clone();
        base.long_range.clear();
        base.validate()?;
        self.protocol.initial_state().sites(base.n_sites)?;
        Ok(())
    }

    /// Parameters and protocol at grid value `x`.
    pub fn point(&self, x: f64) -> (MosaicParams, Protocol) {
        let mut p = self.base.clone();
        let mut protocol = self.protocol;
        let mut preset = self.long_range.clone();
        match self.axis {
            Axis::LambdaOverJ => p.lambda_hop = x * p.j_hop,
            Axis::LongRangeOverJ => {
                preset = preset.map(|lr| with_swept_strength(&lr, x * p.j_hop));
            }
            Axis::DimerPhase => {
                if let Protocol::QuenchDimer { phi, .. } = &mut protocol {
                    *phi = x;
                }
            }
            Axis::DimerPosition => {
                if let Protocol::QuenchDimer { n, .. } = &mut protocol {
                    *n = x as usize;
                }
            }
        }
        p.long_range = preset.map_or_else(Vec::new, |lr| lr.bonds(p.n_sites));
        (p, protocol)
    }
}

/// Energy of the initial product state: `⟨ψ|H|ψ⟩` for one excitation, the sum
/// of on-site terms for a comb (hopping never connects two product states).
pub fn protocol_energy(h: &HamiltonianMatrix, protocol: &Protocol) -> Result<f64> {
    let init = protocol.initial_state();
    if init.is_multi_excitation() {
        Ok(init.sites(h.dim())?.iter().map(|&j| h.get(j, j)).sum())
    } else {
        initial_state_energy(h, &make_initial_state(&init, h.dim())?)
    }
}

/// One quench with `W` and `n_r` measured from the protocol's own site.
pub fn run_point(
    params: &MosaicParams,
    protocol: &Protocol,
    t_final: f64,
    dt: f64,
) -> Result<PointResult> {
    let h = build(params)?;
    let grid = TimeGrid::uniform(t_final, dt)?;
    let init = protocol.initial_state();
    let record = evolve(&h, &init, init.default_origin(), &grid)?;
    Ok(PointResult {
        d_bar: record.d_bar,
        m_integrated: record.m_integrated,
        n_r_bar: record.n_r_bar,
        init_energy: protocol_energy(&h, protocol)?,
    })
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = workers {
        if k == 0 {
            return Err(Error::param("workers", "must be at least 1"));
        }
        builder = builder.num_threads(k);
    }
    builder
        .build()
        .map_err(|e| Error::param("workers", e.to_string()))
}

/// Evaluates every grid point independently; rows come back in grid order.
/// `workers = None` uses all available cores.
pub fn run_sweep(plan: &SweepPlan, workers: Option<usize>) -> Result<SweepTable> {
    plan.validate()?;
    let rows = pool(workers)?.install(|| {
        plan.grid
            .par_iter()
            .map(|&x| {
                let (params, protocol) = plan.point(x);
                SweepRow {
                    param: x,
                    outcome: run_point(&params, &protocol, plan.t_final, plan.dt)
                        .map_err(|e| e.to_string()),
                }
            })
            .collect()
    });
    Ok(SweepTable {
        axis: plan.axis,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimerSign {
    Plus,
    Minus,
}

impl DimerSign {
    pub fn phase(&self) -> f64 {
        match self {
            DimerSign::Plus => 0.0,
            DimerSign::Minus => PI,
        }
    }

    pub fn symbol(&self) -> char {
        match self {
            DimerSign::Plus => '+',
            DimerSign::Minus => '-',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeRow {
    pub n: usize,
    pub sign: DimerSign,
    pub init_energy: f64,
    pub d_bar: f64,
    pub m_integrated: f64,
    pub n_r_bar: f64,
}

/// Quenches from `(|1⟩_n ± |1⟩_{n+1})/√2` for each entry; rows sorted by
/// initial energy.
pub fn me_quench_scan(
    base: &MosaicParams,
    entries: &[(usize, DimerSign)],
    t_final: f64,
    dt: f64,
    workers: Option<usize>,
) -> Result<Vec<MeRow>> {
    if entries.is_empty() {
        return Err(Error::param("entries", "empty"));
    }
    base.validate()?;
    let mut rows = pool(workers)?.install(|| {
        entries
            .par_iter()
            .map(|&(n, sign)| {
                let protocol = Protocol::QuenchDimer {
                    n,
                    phi: sign.phase(),
                };
                let r = run_point(base, &protocol, t_final, dt)?;
                Ok(MeRow {
                    n,
                    sign,
                    init_energy: r.init_energy,
                    d_bar: r.d_bar,
                    m_integrated: r.m_integrated,
                    n_r_bar: r.n_r_bar,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    rows.sort_by(|a, b| a.init_energy.total_cmp(&b.init_energy));
    Ok(rows)
}

/// `n` evenly spaced values `lo, lo + step, …` up to and including `hi`.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// First grid value at which `values` reaches `fraction` of its maximum.
pub fn saturation_knee(params: &[f64], values: &[f64], fraction: f64) -> Option<f64> {
    let max = values
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return None;
    }
    params
        .iter()
        .zip(values)
        .find(|(_, v)| **v >= fraction * max)
        .map(|(x, _)| *x)
}

/// `n` phases covering `[0, 2π)`.
pub fn phase_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| TAU * i as f64 / n as f64).collect()
}

/// The long-range preset of the hardware sample: swept next-nearest pairs
/// plus fixed third-neighbour pairs at `0.93 J`.
pub fn experimental_long_range(j_nn: f64, j_hop: f64) -> LongRangePreset {
    LongRangePreset::Combined {
        j_nn,
        mu: 0.93 * j_hop,
    }
}

pub const SWEEP_PRESETS: [&str; 5] = ["fig3b", "fig3c", "fig3d", "fig4b", "fig4c"];

#[derive(Debug, Clone, PartialEq)]
pub enum SweepPreset {
    Sweep(SweepPlan),
    MeScan {
        base: MosaicParams,
        entries: Vec<(usize, DimerSign)>,
        t_final: f64,
        dt: f64,
    },
}

fn default_base(lambda: f64) -> MosaicParams {
    MosaicParams::new(DEFAULT_N_SITES, DEFAULT_J_MHZ, lambda)
}

pub fn fig3b_plan() -> SweepPlan {
    SweepPlan::new(
        default_base(0.0),
        Axis::LambdaOverJ,
        linear_grid(0.0, 2.5, 21),
        Protocol::QuenchSingle { j0: 14 },
    )
}

pub fn fig3c_plan() -> SweepPlan {
    SweepPlan::new(
        default_base(10.0),
        Axis::LongRangeOverJ,
        linear_grid(0.0, 2.5, 51),
        Protocol::QuenchSingle { j0: 14 },
    )
    .with_long_range(experimental_long_range(0.0, DEFAULT_J_MHZ))
}

pub fn fig3d_plan() -> SweepPlan {
    SweepPlan::new(
        default_base(0.0),
        Axis::LambdaOverJ,
        linear_grid(0.0, 2.5, 21),
        Protocol::QuenchSingle { j0: 14 },
    )
    .with_long_range(experimental_long_range(2.5 * DEFAULT_J_MHZ, DEFAULT_J_MHZ))
}

/// Mobility-edge regime: `V_0 = J`, `λ = 1.5 J`.
pub fn mobility_edge_base() -> MosaicParams {
    default_base(1.5 * DEFAULT_J_MHZ).with_v0(DEFAULT_J_MHZ)
}

/// Weak-modulation regime of the dimer-phase scan: `V_0 = J`, `λ = J/4`.
pub fn weak_modulation_base() -> MosaicParams {
    default_base(0.25 * DEFAULT_J_MHZ).with_v0(DEFAULT_J_MHZ)
}

pub fn fig4b_plan() -> SweepPlan {
    SweepPlan::new(
        weak_modulation_base(),
        Axis::DimerPhase,
        phase_grid(32),
        Protocol::QuenchDimer { n: 12, phi: 0.0 },
    )
}

pub fn fig4c_entries() -> Vec<(usize, DimerSign)> {
    let mut e: Vec<_> = [4, 8, 10, 12, 16, 18]
        .iter()
        .map(|&n| (n, DimerSign::Plus))
        .collect();
    e.push((18, DimerSign::Minus));
    e
}

pub fn sweep_preset(name: &str) -> Result<SweepPreset> {
    Ok(match name {
        "fig3b" => SweepPreset::Sweep(fig3b_plan()),
        "fig3c" => SweepPreset::Sweep(fig3c_plan()),
        "fig3d" => SweepPreset::Sweep(fig3d_plan()),
        "fig4b" => SweepPreset::Sweep(fig4b_plan()),
        "fig4c" => SweepPreset::MeScan {
            base: mobility_edge_base(),
            entries: fig4c_entries(),
            t_final: DEFAULT_T_FINAL,
            dt: DEFAULT_DT,
        },
        other => {
            return Err(Error::param(
                "preset",
                format!(
                    "unknown sweep preset `{other}`; known: {}",
                    SWEEP_PRESETS.join(", ")
                ),
            ))
        }
    })
}

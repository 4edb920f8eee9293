use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Result};
use mosaic_core::dynamics::{evolve as run_evolution, InitialState, TimeGrid};
use mosaic_core::hamiltonian::{build, to_mhz};
use mosaic_core::io::{
    lyapunov_to_string, manifest_path, me_scan_to_string, spectrum_to_string, verify_to_string,
    write_sweep, write_text, write_trace, RunManifest,
};
use mosaic_core::lattice::MosaicParams;
use mosaic_core::presets::{evolve_preset, EVOLVE_PRESETS};
use mosaic_core::rg::{threshold_nnn, threshold_with_mu, verify_threshold, VerifyPlan};
use mosaic_core::spectral::{
    classify_states, eigensystem, mobility_edge_scan, ModelTemplate, ScalingThresholds,
    ScanOptions, StateClass,
};
use mosaic_core::sweep::{
    linear_grid, me_quench_scan, mobility_edge_base, run_sweep, sweep_preset, weak_modulation_base,
    Axis, Protocol, SweepPlan, SweepPreset, DEFAULT_DT, DEFAULT_J_MHZ, DEFAULT_N_SITES,
    DEFAULT_T_FINAL,
};

use crate::config::{
    describe_initial, infer_preset, parse_grid, parse_initial, parse_sizes, protocol_of, Settings,
};

/// Parameter-only presets accepted by `spectrum`, `lyapunov` and `rg`.
const MODEL_PRESETS: [&str; 2] = ["mobility-edge", "weak-modulation"];

const DEFAULT_LAMBDA_MHZ: f64 = 10.0;

fn default_params() -> MosaicParams {
    MosaicParams::new(DEFAULT_N_SITES, DEFAULT_J_MHZ, DEFAULT_LAMBDA_MHZ)
}

fn model_params(s: &Settings) -> Result<MosaicParams> {
    let base = match s.get("preset") {
        None => default_params(),
        Some("mobility-edge") => mobility_edge_base(),
        Some("weak-modulation") => weak_modulation_base(),
        Some(name) => match evolve_preset(name) {
            Ok(p) => p.params,
            Err(_) => bail!(
                "unknown preset `{name}`; known: {}, {}",
                MODEL_PRESETS.join(", "),
                EVOLVE_PRESETS.join(", ")
            ),
        },
    };
    s.params(base)
}

fn out_path(s: &Settings, fallback: &str) -> PathBuf {
    let name = s.get("preset").unwrap_or(fallback);
    PathBuf::from(
        s.get("out")
            .map_or_else(|| format!("{name}.csv"), str::to_string),
    )
}

fn pool(s: &Settings) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(k) = s.workers()? {
        b = b.num_threads(k);
    }
    Ok(b.build()?)
}

fn finish(manifest: RunManifest, s: &Settings, csv: &Path, start: Instant) -> Result<()> {
    let mut m = manifest;
    m.wall_time_s = start.elapsed().as_secs_f64();
    if let Some(p) = s.get("preset") {
        m = m.with_extra("preset", p);
    }
    let path = manifest_path(csv);
    m.write(&path)?;
    println!("wrote {} and {}", csv.display(), path.display());
    Ok(())
}

pub fn evolve(s: &Settings) -> Result<()> {
    let start = Instant::now();
    let (base, mut init, mut j0, t_f, dt) = match s.get("preset") {
        Some(name) => {
            let p = evolve_preset(name).map_err(|e| anyhow!("{e}"))?;
            (p.params, p.initial, p.j0, p.t_final, p.dt)
        }
        None => {
            let init = InitialState::Single(14);
            (
                default_params(),
                init,
                init.default_origin(),
                DEFAULT_T_FINAL,
                DEFAULT_DT,
            )
        }
    };
    let params = s.params(base)?;
    if let Some(text) = s.get("init") {
        init = parse_initial(text).map_err(|e| anyhow!("invalid value for `init`: {e}"))?;
        j0 = init.default_origin();
    }
    if let Some(j) = s.usize("j0")? {
        j0 = j;
    }
    init.sites(params.n_sites)
        .map_err(|e| anyhow!("invalid value for `init`: {e}"))?;
    if j0 == 0 || j0 > params.n_sites {
        bail!(
            "invalid value for `j0`: {j0} is outside 1..={}",
            params.n_sites
        );
    }
    let (t_f, dt) = s.time(t_f, dt)?;
    let grid = TimeGrid::uniform(t_f, dt)?;
    let h = build(&params)?;
    let rec = run_evolution(&h, &init, j0, &grid)?;

    let csv = out_path(s, "evolve");
    write_trace(&rec, &csv)?;
    println!(
        "D_bar = {:.6}  M(t_f) = {:.6}  n_r_bar = {:.6}  (j0 = {j0}, t_f = {t_f} ns)",
        rec.d_bar, rec.m_integrated, rec.n_r_bar
    );
    let mut m = RunManifest::new("evolve", params, &describe_initial(&init))
        .with_extra("j0", j0.to_string())
        .with_extra("d_bar", format!("{:?}", rec.d_bar))
        .with_extra("m_integrated", format!("{:?}", rec.m_integrated))
        .with_extra("n_r_bar", format!("{:?}", rec.n_r_bar));
    m.t_final = t_f;
    m.dt = dt;
    finish(m, s, &csv, start)
}

fn default_sizes(n: usize) -> Vec<usize> {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    (0..4)
        .map(|k| (n as f64 * phi.powi(k)).round() as usize)
        .collect()
}

pub fn spectrum(s: &Settings) -> Result<()> {
    let start = Instant::now();
    let params = model_params(s)?;
    let sizes = match s.get("sizes") {
        Some(text) => parse_sizes(text).map_err(|e| anyhow!("invalid value for `sizes`: {e}"))?,
        None => default_sizes(params.n_sites),
    };
    if sizes.first() != Some(&params.n_sites) {
        bail!(
            "invalid value for `sizes`: must start with n_sites = {}",
            params.n_sites
        );
    }
    let long_range = match s.long_range()? {
        Some(explicit) => explicit,
        None => infer_preset(&params.long_range, params.n_sites),
    };
    let mut template = ModelTemplate::new(MosaicParams {
        long_range: Vec::new(),
        ..params.clone()
    });
    if let Some(l) = long_range {
        template = template.with_long_range(l);
    }
    let spec = pool(s)?
        .install(|| classify_states(&template, &sizes, &ScalingThresholds::default()))
        .map_err(|e| anyhow!("invalid value for `sizes`: {e}"))?;

    let csv = out_path(s, "spectrum");
    write_text(&csv, &spectrum_to_string(&spec))?;
    let count = |c: StateClass| spec.classes.iter().filter(|&&x| x == c).count();
    println!(
        "{} states: {} localized, {} critical, {} extended, {} unresolved",
        spec.len(),
        count(StateClass::Localized),
        count(StateClass::Critical),
        count(StateClass::Extended),
        count(StateClass::Unresolved)
    );
    let sizes_text: Vec<String> = sizes.iter().map(usize::to_string).collect();
    let m = RunManifest::new("spectrum", params, "eigenstates")
        .with_extra("sizes", sizes_text.join(","));
    finish(m, s, &csv, start)
}

pub fn lyapunov(s: &Settings) -> Result<()> {
    let start = Instant::now();
    let params = model_params(s)?;
    if !params.long_range.is_empty() {
        bail!("invalid value for `long_range`: transfer matrices need a nearest-neighbour chain");
    }
    let energies = match s.get("energies") {
        None | Some("spectrum") => eigensystem(&build(&params)?)?.energies,
        Some(text) => parse_grid(text).map_err(|e| anyhow!("invalid value for `energies`: {e}"))?,
    };
    let mut opts = ScanOptions::default();
    if let Some(l) = s.usize("chain_length")? {
        opts.chain_length = l;
    }
    let scan = pool(s)?
        .install(|| mobility_edge_scan(&params, &energies, &opts))
        .map_err(|e| anyhow!("{e}"))?;

    let csv = out_path(s, "lyapunov");
    write_text(&csv, &lyapunov_to_string(&scan))?;
    let edges: Vec<String> = scan
        .crossings
        .iter()
        .map(|e| format!("{e:.6} rad/ns ({:.4} MHz)", to_mhz(*e)))
        .collect();
    println!(
        "{} energies; mobility edges: {}",
        energies.len(),
        if edges.is_empty() {
            "none".to_string()
        } else {
            edges.join(", ")
        }
    );
    let m = RunManifest::new("lyapunov", params, "transfer-matrix")
        .with_extra("chain_length", opts.chain_length.to_string());
    finish(m, s, &csv, start)
}

fn apply_overrides(plan: &mut SweepPlan, s: &Settings) -> Result<()> {
    plan.base = s.params(plan.base.clone())?;
    if let Some(l) = s.long_range()? {
        plan.long_range = l;
    }
    if let Some(a) = s.get("axis") {
        plan.axis = Axis::from_name(a).map_err(|e| anyhow!("invalid value for `axis`: {e}"))?;
    }
    if let Some(g) = s.get("grid") {
        plan.grid = parse_grid(g).map_err(|e| anyhow!("invalid value for `grid`: {e}"))?;
    }
    if let Some(p) = s.get("protocol") {
        plan.protocol = protocol_of(
            parse_initial(p).map_err(|e| anyhow!("invalid value for `protocol`: {e}"))?,
        );
    }
    (plan.t_final, plan.dt) = s.time(plan.t_final, plan.dt)?;
    plan.validate().map_err(|e| anyhow!("{e}"))
}

fn describe_protocol(p: &Protocol) -> String {
    describe_initial(&p.initial_state())
}

pub fn sweep(s: &Settings) -> Result<()> {
    let start = Instant::now();
    let preset = match s.get("preset") {
        Some(name) => Some(sweep_preset(name).map_err(|e| anyhow!("{e}"))?),
        None => None,
    };
    let csv = out_path(s, "sweep");
    let workers = s.workers()?;
    match preset {
        Some(SweepPreset::MeScan {
            base,
            entries,
            t_final,
            dt,
        }) => {
            let base = s.params(base)?;
            let (t_f, dt) = s.time(t_final, dt)?;
            let rows = me_quench_scan(&base, &entries, t_f, dt, workers)?;
            write_text(&csv, &me_scan_to_string(&rows))?;
            println!("{} dimer quenches, sorted by initial energy", rows.len());
            let mut m = RunManifest::new("sweep", base, "dimer-scan")
                .with_extra("sorted_by", "init_energy");
            m.t_final = t_f;
            m.dt = dt;
            finish(m, s, &csv, start)
        }
        other => {
            let mut plan = match other {
                Some(SweepPreset::Sweep(plan)) => plan,
                _ => {
                    for key in ["axis", "grid"] {
                        if !s.has(key) {
                            bail!("missing `{key}`: give a sweep preset or both `axis` and `grid`");
                        }
                    }
                    SweepPlan::new(
                        default_params(),
                        Axis::LambdaOverJ,
                        Vec::new(),
                        Protocol::QuenchSingle { j0: 14 },
                    )
                }
            };
            apply_overrides(&mut plan, s)?;
            let table = run_sweep(&plan, workers)?;
            write_sweep(&table, &csv)?;
            let failed = table.rows.iter().filter(|r| r.outcome.is_err()).count();
            println!(
                "{} points along {} ({failed} failed)",
                table.rows.len(),
                plan.axis.name()
            );
            let grid: Vec<String> = plan.grid.iter().map(|x| format!("{x:?}")).collect();
            let mut m = RunManifest::new(
                "sweep",
                plan.base.clone(),
                &describe_protocol(&plan.protocol),
            )
            .with_extra("axis", plan.axis.name())
            .with_extra("grid", grid.join(","))
            .with_extra("long_range", format!("{:?}", plan.long_range));
            m.t_final = plan.t_final;
            m.dt = plan.dt;
            finish(m, s, &csv, start)?;
            if failed > 0 {
                bail!("{failed} sweep points failed");
            }
            Ok(())
        }
    }
}

pub fn rg(s: &Settings) -> Result<()> {
    let start = Instant::now();
    let params = model_params(s)?;
    let mu = s.f64("mu_mhz")?.unwrap_or(0.0);
    if mu < 0.0 {
        bail!("invalid value for `mu_mhz`: must be non-negative");
    }
    let (j, lambda) = (params.j_hop, params.lambda_hop);
    if j <= 0.0 || lambda < 0.0 {
        bail!("invalid parameters: need j_mhz > 0 and lambda_mhz >= 0");
    }
    let nnn = threshold_nnn(j, lambda);
    println!(
        "next-nearest threshold: J_nn > {nnn:.6} MHz = {:.6} J",
        nnn / j
    );
    match threshold_with_mu(j, lambda, mu) {
        Ok(t) => println!(
            "with mu = {mu} MHz: J_nn > {:.6} MHz = {:.6} J{}",
            t.value,
            t.value / j,
            if t.advisory {
                " (advisory: mu > lambda)"
            } else {
                ""
            }
        ),
        Err(e) => println!("with mu = {mu} MHz: {e}"),
    }
    if !s.bool("verify")? {
        return Ok(());
    }
    let grid = match s.get("grid") {
        Some(g) => parse_grid(g).map_err(|e| anyhow!("invalid value for `grid`: {e}"))?,
        None => linear_grid(0.0, 2.5, 26),
    };
    if grid.is_empty() {
        bail!("invalid value for `grid`: empty");
    }
    let mut plan = VerifyPlan::new(params.clone(), mu, grid);
    (plan.t_final, plan.dt) = s.time(plan.t_final, plan.dt)?;
    let report = verify_threshold(&plan, s.workers()?)?;
    match report.onset {
        Some(x) => println!("empirical onset: J_nn/J = {x}"),
        None => println!("empirical onset: none on this grid"),
    }
    let csv = out_path(s, "rg");
    write_text(&csv, &verify_to_string(&report))?;
    let mut m = RunManifest::new("rg", params, &format!("single:{}", plan.j0))
        .with_extra("mu_mhz", format!("{mu:?}"))
        .with_extra("reference_d_bar", format!("{:?}", report.reference_d_bar))
        .with_extra(
            "onset",
            report.onset.map_or("none".into(), |x| format!("{x:?}")),
        );
    m.t_final = plan.t_final;
    m.dt = plan.dt;
    finish(m, s, &csv, start)
}

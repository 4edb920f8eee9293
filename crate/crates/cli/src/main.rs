mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::Settings;

/// Simulator for the quasiperiodic mosaic lattice.
#[derive(Parser)]
#[command(name = "mosaic", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every subcommand. Values override the config file.
#[derive(Args, Clone, Debug, Default)]
struct Common {
    /// Flat `key = value` config file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Named parameter set.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Output CSV; the manifest is written next to it.
    #[arg(long, value_name = "PATH")]
    out: Option<String>,
    /// Worker threads.
    #[arg(long, value_name = "K")]
    workers: Option<String>,
    #[arg(long, value_name = "MHZ")]
    lambda_mhz: Option<String>,
    #[arg(long, value_name = "MHZ")]
    j_mhz: Option<String>,
    #[arg(long, value_name = "MHZ")]
    v0_mhz: Option<String>,
    /// Phase offset in radians; `pi/5` style fractions are accepted.
    #[arg(long)]
    theta: Option<String>,
    /// Modulation frequency: `golden`, a decimal, or `p/q`.
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long, value_name = "N")]
    n_sites: Option<String>,
    #[arg(long, value_name = "NS")]
    tf_ns: Option<String>,
    #[arg(long, value_name = "NS")]
    dt_ns: Option<String>,
    /// `none`, `nnn:<mhz>`, `nnnn:<mhz>` or `pairs:m1-n1:<mhz>,m2-n2:<mhz>,...`.
    #[arg(long, value_name = "SPEC")]
    long_range: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Quench a single state and record the population trace.
    Evolve {
        #[command(flatten)]
        common: Common,
        /// `single:<j>`, `dimer:<n>:<phi>` or `comb:<period>:<offset>`.
        #[arg(long)]
        init: Option<String>,
        /// Reference site for the width and right population.
        #[arg(long)]
        j0: Option<String>,
    },
    /// Eigenstates with fractal dimensions and size-scaling classes.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Comma-separated chain lengths; the first one is exported.
        #[arg(long)]
        sizes: Option<String>,
    },
    /// Lyapunov exponents over an energy grid and the mobility edges.
    Lyapunov {
        #[command(flatten)]
        common: Common,
        /// `spectrum` (finite-chain eigenvalues) or `lo:hi:n` in rad/ns.
        #[arg(long)]
        energies: Option<String>,
        #[arg(long)]
        chain_length: Option<String>,
    },
    /// Parameter sweeps and the mobility-edge dimer scan.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// `lambda_over_j`, `long_range_over_j`, `dimer_phase` or `dimer_position`.
        #[arg(long)]
        axis: Option<String>,
        /// `lo:hi:n` or a comma-separated list.
        #[arg(long)]
        grid: Option<String>,
        /// Initial state, as for `evolve --init`.
        #[arg(long)]
        protocol: Option<String>,
    },
    /// Critical-to-extended thresholds, optionally checked by a quench sweep.
    Rg {
        #[command(flatten)]
        common: Common,
        /// Third-neighbour hopping strength.
        #[arg(long, value_name = "MHZ")]
        mu_mhz: Option<String>,
        /// Sweep `J_nn/J` and locate the onset empirically.
        #[arg(long)]
        verify: bool,
        /// `J_nn/J` grid for `--verify`.
        #[arg(long)]
        grid: Option<String>,
    },
}

fn settings(
    common: &Common,
    allowed: &[&str],
    extra: &[(&str, Option<&String>)],
) -> Result<Settings> {
    let mut s = match &common.config {
        Some(path) => Settings::from_file(path, allowed)?,
        None => Settings::default(),
    };
    for (key, value) in [
        ("preset", &common.preset),
        ("out", &common.out),
        ("workers", &common.workers),
        ("lambda_mhz", &common.lambda_mhz),
        ("j_mhz", &common.j_mhz),
        ("v0_mhz", &common.v0_mhz),
        ("theta", &common.theta),
        ("alpha", &common.alpha),
        ("n_sites", &common.n_sites),
        ("tf_ns", &common.tf_ns),
        ("dt_ns", &common.dt_ns),
        ("long_range", &common.long_range),
    ] {
        s.set(key, value.as_ref());
    }
    for (key, value) in extra {
        s.set(key, *value);
    }
    Ok(s)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Evolve { common, init, j0 } => {
            let s = settings(
                &common,
                &["init", "j0"],
                &[("init", init.as_ref()), ("j0", j0.as_ref())],
            )?;
            commands::evolve(&s)
        }
        Command::Spectrum { common, sizes } => {
            let s = settings(&common, &["sizes"], &[("sizes", sizes.as_ref())])?;
            commands::spectrum(&s)
        }
        Command::Lyapunov {
            common,
            energies,
            chain_length,
        } => {
            let s = settings(
                &common,
                &["energies", "chain_length"],
                &[
                    ("energies", energies.as_ref()),
                    ("chain_length", chain_length.as_ref()),
                ],
            )?;
            commands::lyapunov(&s)
        }
        Command::Sweep {
            common,
            axis,
            grid,
            protocol,
        } => {
            let s = settings(
                &common,
                &["axis", "grid", "protocol"],
                &[
                    ("axis", axis.as_ref()),
                    ("grid", grid.as_ref()),
                    ("protocol", protocol.as_ref()),
                ],
            )?;
            commands::sweep(&s)
        }
        Command::Rg {
            common,
            mu_mhz,
            verify,
            grid,
        } => {
            let flag = verify.then(|| "true".to_string());
            let s = settings(
                &common,
                &["mu_mhz", "verify", "grid"],
                &[
                    ("mu_mhz", mu_mhz.as_ref()),
                    ("verify", flag.as_ref()),
                    ("grid", grid.as_ref()),
                ],
            )?;
            commands::rg(&s)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

//! Named single-evolution setups.

use crate::dynamics::InitialState;
use crate::error::{Error, Result};
use crate::hamiltonian::LongRangePreset;
use crate::lattice::MosaicParams;
use crate::sweep::{DEFAULT_DT, DEFAULT_J_MHZ, DEFAULT_T_FINAL};

/// Chain length of the full hardware sample.
pub const SAMPLE_SITES: usize = 56;

#[derive(Debug, Clone, PartialEq)]
pub struct EvolvePreset {
    pub name: &'static str,
    pub params: MosaicParams,
    pub initial: InitialState,
    pub j0: usize,
    pub t_final: f64,
    pub dt: f64,
}

pub const EVOLVE_PRESETS: [&str; 6] = ["fig2a", "fig2b", "fig2c", "fig2d", "fig2e", "fig2f"];

fn params(lambda: f64, extended: bool) -> MosaicParams {
    let p = MosaicParams::new(SAMPLE_SITES, DEFAULT_J_MHZ, lambda);
    if extended {
        let bonds = LongRangePreset::NnnUniform(lambda).bonds(SAMPLE_SITES);
        p.with_long_range(bonds)
    } else {
        p
    }
}

/// `fig2a/c/e`: comb of every sixth site from site 1 in the localized
/// (`λ = 1 MHz`), critical (`λ = 10 MHz`) and extended (next-nearest pairs at
/// `λ = 10 MHz`) chains. `fig2b/d/f`: the same chains from `|1⟩_14`, the site
/// left of the strongest coupling zero.
pub fn evolve_preset(name: &str) -> Result<EvolvePreset> {
    let (p, comb) = match name {
        "fig2a" => (params(1.0, false), true),
        "fig2b" => (params(1.0, false), false),
        "fig2c" => (params(10.0, false), true),
        "fig2d" => (params(10.0, false), false),
        "fig2e" => (params(10.0, true), true),
        "fig2f" => (params(10.0, true), false),
        other => {
            return Err(Error::param(
                "preset",
                format!(
                    "unknown evolve preset `{other}`; known: {}",
                    EVOLVE_PRESETS.join(", ")
                ),
            ))
        }
    };
    let (initial, j0) = if comb {
        (
            InitialState::Comb {
                period: 6,
                offset: 1,
            },
            1,
        )
    } else {
        (InitialState::Single(14), 14)
    };
    Ok(EvolvePreset {
        name: EVOLVE_PRESETS
            .iter()
            .find(|n| **n == name)
            .copied()
            .unwrap_or("fig2a"),
        params: p,
        initial,
        j0,
        t_final: DEFAULT_T_FINAL,
        dt: DEFAULT_DT,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_valid() {
        for name in EVOLVE_PRESETS {
            let p = evolve_preset(name).unwrap();
            assert_eq!(p.name, name);
            p.params.validate().unwrap();
            p.initial.sites(p.params.n_sites).unwrap();
            assert_eq!(p.params.theta, std::f64::consts::PI / 5.0);
            assert_eq!(p.params.v0, 0.0);
        }
        let e = evolve_preset("fig2e").unwrap();
        assert_eq!(e.params.long_range.len(), SAMPLE_SITES - 2);
        assert!(e.params.long_range.iter().all(|b| b.strength == 10.0));
        let comb = evolve_preset("fig2c")
            .unwrap()
            .initial
            .sites(SAMPLE_SITES)
            .unwrap();
        assert_eq!(&comb[..3], &[1, 7, 13]);
        assert!(evolve_preset("fig7")
            .unwrap_err()
            .to_string()
            .contains("fig2a"));
    }
}

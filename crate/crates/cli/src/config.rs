//! Flat `key = value` settings. Later layers override earlier ones: built-in
//! defaults, then the preset, then the config file, then command-line flags.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use mosaic_core::dynamics::InitialState;
use mosaic_core::hamiltonian::LongRangePreset;
use mosaic_core::io::parse_pairs;
use mosaic_core::lattice::{Frequency, LongRangeBond, MosaicParams};
use mosaic_core::sweep::Protocol;

/// Keys every subcommand accepts.
pub const COMMON_KEYS: [&str; 12] = [
    "preset",
    "out",
    "workers",
    "n_sites",
    "j_mhz",
    "lambda_mhz",
    "v0_mhz",
    "theta",
    "alpha",
    "long_range",
    "tf_ns",
    "dt_ns",
];

#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn from_file(path: &Path, allowed: &[&str]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut s = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{}:{}: expected key = value", path.display(), i + 1))?;
            let key = k.trim();
            if !allowed.contains(&key) && !COMMON_KEYS.contains(&key) {
                bail!("unknown config key `{key}` ({}:{})", path.display(), i + 1);
            }
            s.values.insert(key.to_string(), v.trim().to_string());
        }
        Ok(s)
    }

    pub fn set(&mut self, key: &str, value: Option<&String>) {
        if let Some(v) = value {
            self.values.insert(key.to_string(), v.clone());
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| anyhow!("invalid value for `{key}`: `{v}` is not {what}"))
            })
            .transpose()
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        let v: Option<f64> = self.parse(key, "a number")?;
        match v {
            Some(x) if !x.is_finite() => bail!("invalid value for `{key}`: must be finite"),
            _ => Ok(v),
        }
    }

    pub fn positive(&self, key: &str) -> Result<Option<f64>> {
        match self.f64(key)? {
            Some(x) if x <= 0.0 => bail!("invalid value for `{key}`: must be positive"),
            v => Ok(v),
        }
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>> {
        self.parse(key, "a non-negative integer")
    }

    pub fn bool(&self, key: &str) -> Result<bool> {
        Ok(self.parse(key, "true or false")?.unwrap_or(false))
    }

    pub fn workers(&self) -> Result<Option<usize>> {
        match self.usize("workers")? {
            Some(0) => bail!("invalid value for `workers`: must be at least 1"),
            w => Ok(w),
        }
    }

    /// Applies every parameter key to `base` and validates the result.
    pub fn params(&self, mut p: MosaicParams) -> Result<MosaicParams> {
        if let Some(n) = self.usize("n_sites")? {
            p.n_sites = n;
        }
        if let Some(x) = self.f64("j_mhz")? {
            p.j_hop = x;
        }
        if let Some(x) = self.f64("lambda_mhz")? {
            p.lambda_hop = x;
        }
        if let Some(x) = self.f64("v0_mhz")? {
            p.v0 = x;
        }
        if let Some(x) = self.get("theta") {
            p.theta = parse_angle(x).ok_or_else(|| anyhow!("invalid value for `theta`: `{x}`"))?;
        }
        if let Some(x) = self.get("alpha") {
            p.alpha = parse_alpha(x).ok_or_else(|| anyhow!("invalid value for `alpha`: `{x}`"))?;
        }
        if let Some(preset) = self.long_range()? {
            p.long_range = preset.map(|l| l.bonds(p.n_sites)).unwrap_or_default();
        }
        p.validate()
            .map_err(|e| anyhow!("invalid parameters: {e}"))?;
        Ok(p)
    }

    /// `Some(None)` when long-range bonds are explicitly switched off.
    pub fn long_range(&self) -> Result<Option<Option<LongRangePreset>>> {
        self.get("long_range")
            .map(|v| {
                parse_long_range(v).map_err(|e| anyhow!("invalid value for `long_range`: {e}"))
            })
            .transpose()
    }

    pub fn time(&self, t_final: f64, dt: f64) -> Result<(f64, f64)> {
        Ok((
            self.positive("tf_ns")?.unwrap_or(t_final),
            self.positive("dt_ns")?.unwrap_or(dt),
        ))
    }
}

/// A number, optionally written as a multiple or fraction of `pi`
/// (`pi/5`, `0.2pi`, `2*pi`).
pub fn parse_angle(s: &str) -> Option<f64> {
    let t = s.trim().replace(' ', "");
    if let Ok(x) = t.parse::<f64>() {
        return Some(x);
    }
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a.to_string(), b.parse::<f64>().ok()?),
        None => (t.clone(), 1.0),
    };
    let coeff = num.strip_suffix("pi")?.trim_end_matches('*');
    let c = if coeff.is_empty() {
        1.0
    } else {
        coeff.parse::<f64>().ok()?
    };
    Some(c * PI / den)
}

/// `golden`, a decimal in (0, 1), or a fraction `p/q`.
pub fn parse_alpha(s: &str) -> Option<Frequency> {
    let t = s.trim();
    if t == "golden" {
        return Some(Frequency::golden());
    }
    if let Some((p, q)) = t.split_once('/') {
        return Some(Frequency::Rational {
            p: p.trim().parse().ok()?,
            q: q.trim().parse().ok()?,
        });
    }
    t.parse().ok().map(Frequency::Irrational)
}

/// `none` | `nnn:<mhz>` | `nnnn:<mhz>` | `pairs:m1-n1:<mhz>,...`.
pub fn parse_long_range(s: &str) -> Result<Option<LongRangePreset>> {
    let t = s.trim();
    if t.is_empty() || t == "none" {
        return Ok(None);
    }
    let (kind, rest) = t
        .split_once(':')
        .ok_or_else(|| anyhow!("expected nnn:<mhz>, nnnn:<mhz> or pairs:m-n:<mhz>,..."))?;
    let strength = || -> Result<f64> {
        let x: f64 = rest
            .trim()
            .parse()
            .map_err(|_| anyhow!("bad strength `{rest}`"))?;
        if !x.is_finite() {
            bail!("strength must be finite");
        }
        Ok(x)
    };
    Ok(Some(match kind {
        "nnn" => LongRangePreset::NnnUniform(strength()?),
        "nnnn" => LongRangePreset::NnnnUniform(strength()?),
        "pairs" => LongRangePreset::Explicit(parse_pairs(rest, 0)?),
        other => bail!("unknown long-range kind `{other}`"),
    }))
}

/// Recovers a size-independent preset from a bond list when it is one of the
/// uniform families.
pub fn infer_preset(bonds: &[LongRangeBond], n_sites: usize) -> Option<LongRangePreset> {
    if bonds.is_empty() {
        return None;
    }
    let uniform = |range: usize| -> Option<f64> {
        let sel: Vec<&LongRangeBond> = bonds
            .iter()
            .filter(|b| b.m.abs_diff(b.n) == range)
            .collect();
        let s = sel.first()?.strength;
        (sel.len() == n_sites.saturating_sub(range) && sel.iter().all(|b| b.strength == s))
            .then_some(s)
    };
    let only = |range: usize| bonds.iter().all(|b| b.m.abs_diff(b.n) == range);
    Some(match (uniform(2), uniform(3)) {
        (Some(s), _) if only(2) => LongRangePreset::NnnUniform(s),
        (_, Some(s)) if only(3) => LongRangePreset::NnnnUniform(s),
        (Some(j_nn), Some(mu)) if bonds.len() == 2 * n_sites - 5 => {
            LongRangePreset::Combined { j_nn, mu }
        }
        _ => LongRangePreset::Explicit(bonds.to_vec()),
    })
}

/// `single:<j>` | `dimer:<n>:<phi>` | `comb:<period>:<offset>`.
pub fn parse_initial(s: &str) -> Result<InitialState> {
    let parts: Vec<&str> = s.trim().split(':').collect();
    let int = |x: &str| {
        x.parse::<usize>()
            .map_err(|_| anyhow!("bad integer `{x}` in `{s}`"))
    };
    Ok(match parts.as_slice() {
        ["single", j] => InitialState::Single(int(j)?),
        ["dimer", n, phi] => InitialState::Dimer {
            n: int(n)?,
            phi: parse_angle(phi).ok_or_else(|| anyhow!("bad phase `{phi}` in `{s}`"))?,
        },
        ["comb", p, o] => InitialState::Comb {
            period: int(p)?,
            offset: int(o)?,
        },
        _ => bail!("expected single:<j>, dimer:<n>:<phi> or comb:<period>:<offset>, got `{s}`"),
    })
}

pub fn describe_initial(init: &InitialState) -> String {
    match *init {
        InitialState::Single(j) => format!("single:{j}"),
        InitialState::Dimer { n, phi } => format!("dimer:{n}:{phi:?}"),
        InitialState::Comb { period, offset } => format!("comb:{period}:{offset}"),
    }
}

pub fn protocol_of(init: InitialState) -> Protocol {
    match init {
        InitialState::Single(j0) => Protocol::QuenchSingle { j0 },
        InitialState::Dimer { n, phi } => Protocol::QuenchDimer { n, phi },
        InitialState::Comb { period, offset } => Protocol::Comb { period, offset },
    }
}

/// `lo:hi:n` for `n` evenly spaced values, or a comma-separated list; an
/// empty value is an empty grid.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let t = s.trim();
    if t.is_empty() {
        return Ok(Vec::new());
    }
    let parts: Vec<&str> = t.split(':').collect();
    if let [lo, hi, n] = parts.as_slice() {
        let lo: f64 = lo.parse().map_err(|_| anyhow!("bad grid start `{lo}`"))?;
        let hi: f64 = hi.parse().map_err(|_| anyhow!("bad grid end `{hi}`"))?;
        let n: usize = n.parse().map_err(|_| anyhow!("bad grid count `{n}`"))?;
        return Ok(mosaic_core::sweep::linear_grid(lo, hi, n));
    }
    t.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| anyhow!("bad grid value `{x}`"))
        })
        .collect()
}

pub fn parse_sizes(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<usize>()
                .map_err(|_| anyhow!("bad size `{x}`"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("0.5"), Some(0.5));
        assert_eq!(parse_angle("pi/5"), Some(PI / 5.0));
        assert_eq!(parse_angle("2*pi"), Some(2.0 * PI));
        assert_eq!(parse_angle("0.5pi"), Some(0.5 * PI));
        assert_eq!(parse_angle("x"), None);
    }

    #[test]
    fn long_range_grammar() {
        assert_eq!(
            parse_long_range("nnn:10").unwrap(),
            Some(LongRangePreset::NnnUniform(10.0))
        );
        assert_eq!(
            parse_long_range("nnnn:3.72").unwrap(),
            Some(LongRangePreset::NnnnUniform(3.72))
        );
        assert_eq!(
            parse_long_range("pairs:1-3:0.5,2-6:1").unwrap(),
            Some(LongRangePreset::Explicit(vec![
                LongRangeBond::new(1, 3, 0.5),
                LongRangeBond::new(2, 6, 1.0)
            ]))
        );
        assert_eq!(parse_long_range("none").unwrap(), None);
        assert!(parse_long_range("nnn").is_err());
        assert!(parse_long_range("far:2").is_err());
        assert!(parse_long_range("pairs:1-3").is_err());
    }

    #[test]
    fn preset_inference() {
        for p in [
            LongRangePreset::NnnUniform(2.0),
            LongRangePreset::NnnnUniform(1.0),
            LongRangePreset::Combined { j_nn: 1.0, mu: 3.0 },
        ] {
            assert_eq!(infer_preset(&p.bonds(20), 20), Some(p));
        }
        let explicit = vec![LongRangeBond::new(1, 3, 1.0)];
        assert_eq!(
            infer_preset(&explicit, 20),
            Some(LongRangePreset::Explicit(explicit.clone()))
        );
        assert_eq!(infer_preset(&[], 20), None);
    }

    #[test]
    fn initial_states() {
        assert_eq!(
            parse_initial("single:14").unwrap(),
            InitialState::Single(14)
        );
        assert_eq!(
            parse_initial("dimer:12:pi").unwrap(),
            InitialState::Dimer { n: 12, phi: PI }
        );
        assert_eq!(
            parse_initial("comb:6:1").unwrap(),
            InitialState::Comb {
                period: 6,
                offset: 1
            }
        );
        assert!(parse_initial("single").is_err());
        let d = InitialState::Dimer { n: 3, phi: 0.25 };
        assert_eq!(parse_initial(&describe_initial(&d)).unwrap(), d);
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("0.5, 2").unwrap(), vec![0.5, 2.0]);
        assert!(parse_grid("").unwrap().is_empty());
        assert!(parse_grid("a,b").is_err());
    }
}

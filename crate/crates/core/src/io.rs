//! Plain-text result formats: CSV tables and `key=value` run manifests.
//!
//! Floats are written in the shortest form that parses back to the same
//! `f64`, so every file round-trips exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::dynamics::EvolutionRecord;
use crate::error::{Error, Result};
use crate::lattice::{Frequency, LongRangeBond, MosaicParams};
use crate::rg::VerifyReport;
use crate::spectral::{MobilityScan, SpectrumRecord, StateClass};
use crate::sweep::{DimerSign, MeRow, SweepTable};

pub const SCHEMA_VERSION: u32 = 1;

pub const SWEEP_HEADER: &str = "param,d_bar,m_integrated,n_r_bar,init_energy_radns";
pub const SPECTRUM_HEADER: &str = "k,E_radns,D,class";
pub const ME_HEADER: &str = "n,sign,d_bar,m_integrated,n_r_bar,init_energy_radns";
pub const LYAPUNOV_HEADER: &str = "E_radns,gamma,E_spectral_radns,gamma_spectral,class";
pub const VERIFY_HEADER: &str = "j_nn_over_j,d_bar,n_r_bar";

/// Shortest round-trip decimal form.
pub fn format_float(x: f64) -> String {
    format!("{x:?}")
}

pub fn parse_float(s: &str, line: usize) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Parse {
        line,
        reason: format!("`{s}` is not a number"),
    })
}

fn parse_usize(s: &str, line: usize) -> Result<usize> {
    s.trim().parse::<usize>().map_err(|_| Error::Parse {
        line,
        reason: format!("`{s}` is not a non-negative integer"),
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// `out.csv` → `out.manifest`.
pub fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("manifest")
}

fn csv_rows<'a>(text: &'a str, header: &str) -> Result<Vec<(usize, Vec<&'a str>)>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == header => {}
        Some((_, h)) => {
            return Err(Error::Parse {
                line: 1,
                reason: format!("expected header `{header}`, found `{h}`"),
            })
        }
        None => {
            return Err(Error::Parse {
                line: 1,
                reason: "missing header".into(),
            })
        }
    }
    let width = header.split(',').count();
    lines
        .map(|(i, l)| {
            let cells: Vec<&str> = l.split(',').collect();
            if cells.len() != width {
                return Err(Error::Parse {
                    line: i + 1,
                    reason: format!("expected {width} columns, found {}", cells.len()),
                });
            }
            Ok((i + 1, cells))
        })
        .collect()
}

pub fn trace_header(n_sites: usize) -> String {
    let mut h = String::from("t_ns");
    for j in 1..=n_sites {
        write!(h, ",n_{j}").unwrap();
    }
    h.push_str(",D,W");
    h
}

/// Time, per-site populations, `D` and `W` for every sample.
pub fn trace_to_string(record: &EvolutionRecord) -> String {
    let mut out = trace_header(record.n_sites());
    out.push('\n');
    for (i, t) in record.times.iter().enumerate() {
        out.push_str(&format_float(*t));
        for x in &record.density[i] {
            out.push(',');
            out.push_str(&format_float(*x));
        }
        write!(
            out,
            ",{},{}",
            format_float(record.d_trace[i]),
            format_float(record.w_trace[i])
        )
        .unwrap();
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub times: Vec<f64>,
    pub density: Vec<Vec<f64>>,
    pub d_trace: Vec<f64>,
    pub w_trace: Vec<f64>,
}

impl Trace {
    /// Rebuilds the full record, recomputing every derived observable.
    pub fn to_record(&self, j0: usize) -> EvolutionRecord {
        EvolutionRecord::from_density(self.times.clone(), self.density.clone(), j0)
    }
}

pub fn parse_trace(text: &str) -> Result<Trace> {
    let header = text.lines().next().unwrap_or("");
    let n_sites = header.split(',').count().saturating_sub(3);
    let rows = csv_rows(text, &trace_header(n_sites))?;
    let mut trace = Trace {
        times: Vec::with_capacity(rows.len()),
        density: Vec::with_capacity(rows.len()),
        d_trace: Vec::with_capacity(rows.len()),
        w_trace: Vec::with_capacity(rows.len()),
    };
    for (line, cells) in rows {
        let vals = cells
            .iter()
            .map(|c| parse_float(c, line))
            .collect::<Result<Vec<_>>>()?;
        trace.times.push(vals[0]);
        trace.density.push(vals[1..=n_sites].to_vec());
        trace.d_trace.push(vals[n_sites + 1]);
        trace.w_trace.push(vals[n_sites + 2]);
    }
    Ok(trace)
}

pub fn write_trace(record: &EvolutionRecord, path: &Path) -> Result<()> {
    write_text(path, &trace_to_string(record))
}

pub fn read_trace(path: &Path) -> Result<Trace> {
    parse_trace(&read_text(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCsvRow {
    pub param: f64,
    pub d_bar: f64,
    pub m_integrated: f64,
    pub n_r_bar: f64,
    pub init_energy: f64,
}

/// Failed points are written as `NaN` in every observable column.
pub fn sweep_to_string(table: &SweepTable) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for row in &table.rows {
        let vals = match &row.outcome {
            Ok(r) => [r.d_bar, r.m_integrated, r.n_r_bar, r.init_energy],
            Err(_) => [f64::NAN; 4],
        };
        out.push_str(&format_float(row.param));
        for v in vals {
            out.push(',');
            out.push_str(&format_float(v));
        }
        out.push('\n');
    }
    out
}

pub fn parse_sweep(text: &str) -> Result<Vec<SweepCsvRow>> {
    csv_rows(text, SWEEP_HEADER)?
        .into_iter()
        .map(|(line, c)| {
            Ok(SweepCsvRow {
                param: parse_float(c[0], line)?,
                d_bar: parse_float(c[1], line)?,
                m_integrated: parse_float(c[2], line)?,
                n_r_bar: parse_float(c[3], line)?,
                init_energy: parse_float(c[4], line)?,
            })
        })
        .collect()
}

pub fn write_sweep(table: &SweepTable, path: &Path) -> Result<()> {
    write_text(path, &sweep_to_string(table))
}

pub fn me_scan_to_string(rows: &[MeRow]) -> String {
    let mut out = format!("{ME_HEADER}\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.n,
            r.sign.symbol(),
            format_float(r.d_bar),
            format_float(r.m_integrated),
            format_float(r.n_r_bar),
            format_float(r.init_energy)
        )
        .unwrap();
    }
    out
}

pub fn parse_me_scan(text: &str) -> Result<Vec<MeRow>> {
    csv_rows(text, ME_HEADER)?
        .into_iter()
        .map(|(line, c)| {
            let sign = match c[1] {
                "+" => DimerSign::Plus,
                "-" => DimerSign::Minus,
                other => {
                    return Err(Error::Parse {
                        line,
                        reason: format!("sign `{other}` is neither + nor -"),
                    })
                }
            };
            Ok(MeRow {
                n: parse_usize(c[0], line)?,
                sign,
                d_bar: parse_float(c[2], line)?,
                m_integrated: parse_float(c[3], line)?,
                n_r_bar: parse_float(c[4], line)?,
                init_energy: parse_float(c[5], line)?,
            })
        })
        .collect()
}

/// One row per eigenstate, `k` counting from 1 in ascending energy.
pub fn spectrum_to_string(spectrum: &SpectrumRecord) -> String {
    let mut out = format!("{SPECTRUM_HEADER}\n");
    for k in 0..spectrum.len() {
        writeln!(
            out,
            "{},{},{},{}",
            k + 1,
            format_float(spectrum.energies[k]),
            format_float(spectrum.d_values[k]),
            spectrum.classes[k]
        )
        .unwrap();
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumCsvRow {
    pub k: usize,
    pub energy: f64,
    pub d: f64,
    pub class: StateClass,
}

pub fn parse_spectrum(text: &str) -> Result<Vec<SpectrumCsvRow>> {
    csv_rows(text, SPECTRUM_HEADER)?
        .into_iter()
        .map(|(line, c)| {
            Ok(SpectrumCsvRow {
                k: parse_usize(c[0], line)?,
                energy: parse_float(c[1], line)?,
                d: parse_float(c[2], line)?,
                class: c[3].parse().map_err(|_| Error::Parse {
                    line,
                    reason: format!("unknown class `{}`", c[3]),
                })?,
            })
        })
        .collect()
}

/// Grid energy and its exponent, then the minimising spectral point of the
/// grid cell with its exponent and class; gap cells leave both spectral
/// columns empty and have class `gap`.
pub fn lyapunov_to_string(scan: &MobilityScan) -> String {
    let mut out = format!("{LYAPUNOV_HEADER}\n");
    for p in &scan.points {
        let (e, g) = p.spectral.map_or((String::new(), String::new()), |s| {
            (format_float(s.energy), format_float(s.gamma))
        });
        writeln!(
            out,
            "{},{},{},{},{}",
            format_float(p.energy),
            format_float(p.gamma),
            e,
            g,
            p.class.map_or("gap", |c| c.as_str())
        )
        .unwrap();
    }
    out
}

pub fn verify_to_string(report: &VerifyReport) -> String {
    let mut out = format!("{VERIFY_HEADER}\n");
    for p in &report.points {
        writeln!(
            out,
            "{},{},{}",
            format_float(p.j_nn_over_j),
            format_float(p.d_bar),
            format_float(p.n_r_bar)
        )
        .unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool_version: String,
    /// Producing command, e.g. `evolve` or `sweep`.
    pub command: String,
    pub params: MosaicParams,
    /// Free-form protocol descriptor such as `single:14` or `comb:6:1`.
    pub protocol: String,
    pub t_final: f64,
    pub dt: f64,
    pub wall_time_s: f64,
    /// Further single-line settings (grids, flags, presets).
    pub extra: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str, params: MosaicParams, protocol: &str) -> Self {
        RunManifest {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            params,
            protocol: protocol.to_string(),
            t_final: crate::sweep::DEFAULT_T_FINAL,
            dt: crate::sweep::DEFAULT_DT,
            wall_time_s: 0.0,
            extra: BTreeMap::new(),
        }
    }

    pub fn with_extra(mut self, key: &str, value: impl Into<String>) -> Self {
        self.extra.insert(key.to_string(), value.into());
        self
    }

    /// Canonical text; fails if a value spans several lines.
    pub fn serialize(&self) -> Result<String> {
        let p = &self.params;
        let alpha = match p.alpha {
            Frequency::Irrational(a) => format!("irrational:{}", format_float(a)),
            Frequency::Rational { p, q } => format!("rational:{p}/{q}"),
        };
        let lr: Vec<String> = p
            .long_range
            .iter()
            .map(|b| format!("{}-{}:{}", b.m, b.n, format_float(b.strength)))
            .collect();
        let mut fields: Vec<(String, String)> = vec![
            ("schema_version".into(), self.schema_version.to_string()),
            ("tool_version".into(), self.tool_version.clone()),
            ("command".into(), self.command.clone()),
            ("params.n_sites".into(), p.n_sites.to_string()),
            ("params.j_mhz".into(), format_float(p.j_hop)),
            ("params.lambda_mhz".into(), format_float(p.lambda_hop)),
            ("params.v0_mhz".into(), format_float(p.v0)),
            ("params.theta".into(), format_float(p.theta)),
            ("params.alpha".into(), alpha),
            ("params.long_range".into(), lr.join(",")),
            ("protocol".into(), self.protocol.clone()),
            ("t_final_ns".into(), format_float(self.t_final)),
            ("dt_ns".into(), format_float(self.dt)),
            ("wall_time_s".into(), format_float(self.wall_time_s)),
        ];
        for (k, v) in &self.extra {
            fields.push((format!("extra.{k}"), v.clone()));
        }
        let mut out = String::new();
        for (k, v) in fields {
            if k.contains(['\n', '\r', '=']) || v.contains(['\n', '\r']) {
                return Err(Error::param(
                    "manifest",
                    format!("entry `{k}` is not a single line"),
                ));
            }
            writeln!(out, "{k}={v}").unwrap();
        }
        Ok(out)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut extra = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                reason: "expected key=value".into(),
            })?;
            if let Some(e) = k.strip_prefix("extra.") {
                extra.insert(e.to_string(), v.to_string());
            } else {
                map.insert(k.to_string(), (i + 1, v.to_string()));
            }
        }
        let get = |key: &str| -> Result<(usize, String)> {
            map.get(key).cloned().ok_or_else(|| Error::Parse {
                line: 0,
                reason: format!("missing key `{key}`"),
            })
        };
        let float = |key: &str| -> Result<f64> {
            let (l, v) = get(key)?;
            parse_float(&v, l)
        };

        let (l, v) = get("schema_version")?;
        let schema_version: u32 = v.parse().map_err(|_| Error::Parse {
            line: l,
            reason: format!("bad schema version `{v}`"),
        })?;
        if schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: schema_version,
                expected: SCHEMA_VERSION,
            });
        }

        let (l, v) = get("params.n_sites")?;
        let n_sites = parse_usize(&v, l)?;
        let (l, v) = get("params.alpha")?;
        let alpha = parse_alpha(&v, l)?;
        let (l, v) = get("params.long_range")?;
        let long_range = parse_pairs(&v, l)?;
        let params = MosaicParams {
            n_sites,
            j_hop: float("params.j_mhz")?,
            lambda_hop: float("params.lambda_mhz")?,
            v0: float("params.v0_mhz")?,
            theta: float("params.theta")?,
            alpha,
            long_range,
        };
        Ok(RunManifest {
            schema_version,
            tool_version: get("tool_version")?.1,
            command: get("command")?.1,
            params,
            protocol: get("protocol")?.1,
            t_final: float("t_final_ns")?,
            dt: float("dt_ns")?,
            wall_time_s: float("wall_time_s")?,
            extra,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &self.serialize()?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?)
    }
}

fn parse_alpha(v: &str, line: usize) -> Result<Frequency> {
    let bad = || Error::Parse {
        line,
        reason: format!("bad alpha `{v}`"),
    };
    if let Some(a) = v.strip_prefix("irrational:") {
        Ok(Frequency::Irrational(parse_float(a, line)?))
    } else if let Some(r) = v.strip_prefix("rational:") {
        let (p, q) = r.split_once('/').ok_or_else(bad)?;
        Ok(Frequency::Rational {
            p: p.parse().map_err(|_| bad())?,
            q: q.parse().map_err(|_| bad())?,
        })
    } else {
        Err(bad())
    }
}

/// `m-n:strength,...`; empty text is an empty list.
pub fn parse_pairs(v: &str, line: usize) -> Result<Vec<LongRangeBond>> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|item| {
            let bad = || Error::Parse {
                line,
                reason: format!("bad pair `{item}`, expected m-n:strength"),
            };
            let (pair, s) = item.trim().split_once(':').ok_or_else(bad)?;
            let (m, n) = pair.split_once('-').ok_or_else(bad)?;
            Ok(LongRangeBond::new(
                parse_usize(m, line).map_err(|_| bad())?,
                parse_usize(n, line).map_err(|_| bad())?,
                parse_float(s, line).map_err(|_| bad())?,
            ))
        })
        .collect()
}

//! Resolved run configuration: defaults, then the `--config` file, then flags.

use std::f64::consts::PI;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Deserializer, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Orbits,
    Actions,
    Levels,
    Sectors,
    Flow,
    Ep,
    Oscillator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum LevelSource {
    #[default]
    Shooting,
    Semiclassical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OscMode {
    #[default]
    Real,
    Imag,
    Dirac,
}

/// Every knob of every subcommand. Unused fields are ignored by the
/// subcommands that do not need them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub n: u32,
    pub g: f64,
    pub oscillator: bool,
    #[serde(deserialize_with = "angle_value")]
    pub alpha: f64,
    pub format: Format,
    pub out: Option<PathBuf>,
    /// Integrator tolerance; `None` picks the owning module's default.
    pub tol: Option<f64>,

    pub energy: f64,
    pub family: Option<String>,
    pub start: Option<[f64; 4]>,
    pub reduced: Option<[f64; 2]>,
    pub t_max: f64,

    pub k_max: usize,

    pub emax: f64,
    pub method: LevelSource,
    pub s_max: Option<f64>,
    pub e_step: f64,
    pub refine_tol: f64,

    pub points: Option<usize>,
    pub numeric: bool,

    pub g_from: f64,
    pub g_to: f64,
    pub n_levels: usize,

    pub pair: [usize; 2],
    pub g_hi: f64,
    pub g_lo: f64,

    pub mode: OscMode,
    pub k: i64,
    pub kernel: Option<i64>,
    pub j_max: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: None,
            n: 1,
            g: 1.0,
            oscillator: false,
            alpha: 0.0,
            format: Format::Json,
            out: None,
            tol: None,
            energy: 1.0,
            family: None,
            start: None,
            reduced: None,
            t_max: 100.0,
            k_max: 3,
            emax: 10.0,
            method: LevelSource::Shooting,
            s_max: None,
            e_step: 0.1,
            refine_tol: 1e-10,
            points: None,
            numeric: false,
            g_from: 0.1,
            g_to: 0.01,
            n_levels: 4,
            pair: [0, 1],
            g_hi: 0.06,
            g_lo: 0.02,
            mode: OscMode::Real,
            k: 0,
            kernel: None,
            j_max: 20,
        }
    }
}

/// Default integrator tolerance of the classical module.
pub const ORBIT_TOL: f64 = 1e-12;

impl RunConfig {
    pub fn load(path: &PathBuf) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

fn angle_value<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }
    match Raw::deserialize(de)? {
        Raw::Num(v) => Ok(v),
        Raw::Text(s) => parse_angle(&s).map_err(serde::de::Error::custom),
    }
}

fn parse_rational(s: &str) -> Result<f64> {
    let v = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = if p.is_empty() { 1.0 } else { p.parse()? };
            let q: f64 = q.parse()?;
            if q == 0.0 {
                bail!("zero denominator");
            }
            p / q
        }
        None if s.is_empty() => 1.0,
        None => s.parse()?,
    };
    Ok(v)
}

/// Decimal radians, or a rational multiple of pi such as `-3/14pi`,
/// `3pi/14`, `pi/2` or `-pi`.
pub fn parse_angle(text: &str) -> Result<f64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
    let bad = || anyhow!("invalid angle '{text}': expected radians or a fraction like -3/14pi");
    let Some((head, tail)) = s.split_once("pi") else {
        let v: f64 = s.parse().map_err(|_| bad())?;
        return if v.is_finite() { Ok(v) } else { Err(bad()) };
    };
    let (sign, head) = match head.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, head.strip_prefix('+').unwrap_or(head)),
    };
    let head = head.strip_suffix('*').unwrap_or(head);
    let num = parse_rational(head).map_err(|_| bad())?;
    let den = match tail {
        "" => 1.0,
        t => {
            let q: f64 = t.strip_prefix('/').ok_or_else(bad)?.parse().map_err(|_| bad())?;
            if q == 0.0 {
                return Err(bad());
            }
            q
        }
    };
    let v = sign * num / den * PI;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("0").unwrap(), 0.0);
        assert_eq!(parse_angle("-0.67319843").unwrap(), -0.67319843);
        assert!((parse_angle("-3/14pi").unwrap() + 3.0 * PI / 14.0).abs() < 1e-15);
        assert!((parse_angle("-3pi/14").unwrap() + 3.0 * PI / 14.0).abs() < 1e-15);
        assert!((parse_angle("pi/2").unwrap() - PI / 2.0).abs() < 1e-15);
        assert!((parse_angle("-pi").unwrap() + PI).abs() < 1e-15);
        assert!((parse_angle("1/2 pi").unwrap() - PI / 2.0).abs() < 1e-15);
        assert!((parse_angle("2*pi").unwrap() - 2.0 * PI).abs() < 1e-15);
        for bad in ["", "pi/0", "x", "3/pi", "1/0pi", "inf", "pi14"] {
            assert!(parse_angle(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn config_round_trips() {
        let mut cfg = RunConfig { command: Some(Command::Ep), alpha: -3.0 * PI / 14.0, ..RunConfig::default() };
        cfg.start = Some([0.1, 0.2, 0.3, 0.4]);
        cfg.tol = Some(1e-9);
        let text = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn config_accepts_fractional_angles_and_rejects_unknown_keys() {
        let cfg: RunConfig = serde_json::from_str(r#"{"alpha": "-3/14pi", "n": 2}"#).unwrap();
        assert!((cfg.alpha + 3.0 * PI / 14.0).abs() < 1e-15);
        assert_eq!(cfg.n, 2);
        assert!(serde_json::from_str::<RunConfig>(r#"{"nn": 2}"#).is_err());
    }
}

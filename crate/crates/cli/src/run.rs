//! Subcommand execution and output rendering.

use std::f64::consts::PI;

use anyhow::{anyhow, Result};
use serde_json::{json, Value};

use cryptospec::classical::{
    integrate, reduced_gauge_dynamics, stem_trajectory_tol, Classification, FamilyId, Trajectory,
};
use cryptospec::flow::{find_exceptional_point_with, spectral_flow_with};
use cryptospec::oscillator::{dirac_kernel_state, osc_spectrum, OscQuantization, SqrtRational};
use cryptospec::potential::{split_hg, stokes_asymptotes};
use cryptospec::semiclassical::{action, period_estimate, semiclassical_levels};
use cryptospec::spectral::{
    classify_ray, classify_ray_numeric, find_levels, sector_map_with, Ray, SectorClass, ShootingParams, SpectrumResult,
};
use cryptospec::{Error, Exec, Parity, PhasePoint, PotentialSpec};

use crate::config::{Command, Format, LevelSource, OscMode, RunConfig, ORBIT_TOL};

pub struct Report {
    pub result: Value,
    pub csv: Table,
    pub diagnostics: Vec<String>,
    /// Numerical failure worth exit status 3 even though a result exists.
    pub failure: bool,
}

pub struct Table {
    header: &'static [&'static str],
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &'static [&'static str]) -> Self {
        Table { header, rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

/// Twelve significant digits, without negative zero.
fn num(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.11e}")
}

fn report(result: Value, csv: Table, diagnostics: Vec<String>, failure: bool) -> Result<Report> {
    Ok(Report { result, csv, diagnostics, failure })
}

pub fn render(cfg: &RunConfig, r: &Report) -> String {
    match cfg.format {
        Format::Json => {
            let doc = json!({ "config": cfg, "result": r.result, "diagnostics": r.diagnostics });
            serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
        }
        Format::Csv => r.csv.render(),
    }
}

pub fn render_failure(cfg: &RunConfig, e: &anyhow::Error) -> String {
    match cfg.format {
        Format::Json => {
            let doc = json!({ "config": cfg, "result": Value::Null, "diagnostics": [format!("{e:#}")] });
            serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
        }
        Format::Csv => String::new(),
    }
}

/// 2 for bad input, 3 for numerical failures.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::InvalidParameter(_) | Error::Domain(_) | Error::Unsupported(_) | Error::NotDiscrete(_)) => 2,
        Some(_) => 3,
        None => 2,
    }
}

fn spec(cfg: &RunConfig) -> Result<PotentialSpec> {
    Ok(PotentialSpec::new(cfg.n, cfg.g, cfg.oscillator, Parity::Odd)?)
}

fn shooting(cfg: &RunConfig) -> ShootingParams {
    let d = ShootingParams::default();
    ShootingParams {
        s_max: cfg.s_max,
        ode_tol: cfg.tol.unwrap_or(d.ode_tol),
        e_grid_step: cfg.e_step,
        refine_tol: cfg.refine_tol,
    }
}

fn family(cfg: &RunConfig, energy: f64) -> Result<FamilyId> {
    match &cfg.family {
        Some(name) => Ok(name.parse::<FamilyId>()?),
        None if energy < 0.0 => Ok(FamilyId::neg(0)),
        None => Ok(FamilyId::pos(0)),
    }
}

pub fn execute(cfg: &RunConfig) -> Result<Report> {
    match cfg.command.ok_or_else(|| anyhow!("no subcommand"))? {
        Command::Orbits => orbits(cfg),
        Command::Actions => actions(cfg),
        Command::Levels => levels(cfg),
        Command::Sectors => sectors(cfg),
        Command::Flow => flow(cfg),
        Command::Ep => ep(cfg),
        Command::Oscillator => oscillator(cfg),
    }
}

fn orbits(cfg: &RunConfig) -> Result<Report> {
    let tol = cfg.tol.unwrap_or(ORBIT_TOL);
    let traj: Trajectory = if let Some([x, p]) = cfg.reduced {
        reduced_gauge_dynamics((x, p), cfg.t_max)?
    } else if let Some([x, y, p, q]) = cfg.start {
        integrate(&spec(cfg)?, PhasePoint::new(x, y, p, q), cfg.t_max, tol)?
    } else {
        stem_trajectory_tol(&spec(cfg)?, cfg.energy, family(cfg, cfg.energy)?, tol)?
    };
    let mut csv = Table::new(&["t", "x", "y", "p", "q", "H", "G"]);
    for s in &traj.samples {
        let hg = split_hg(&traj.spec, &s.pt)?;
        let pt = s.pt;
        csv.push([s.t, pt.x, pt.y, pt.p, pt.q, hg.H, hg.G].into_iter().map(num).collect());
    }
    let mut diagnostics = traj.diagnostics.clone();
    let failure = traj.classification == Classification::Undetermined;
    if failure {
        diagnostics.push("orbit neither closed nor escaped within t_max".into());
    }
    report(serde_json::to_value(&traj)?, csv, diagnostics, failure)
}

fn actions(cfg: &RunConfig) -> Result<Report> {
    let spec = spec(cfg)?;
    let families = match &cfg.family {
        Some(name) => vec![name.parse::<FamilyId>()?],
        None => FamilyId::all(cfg.n),
    };
    let mut rows = Vec::new();
    let mut csv = Table::new(&["family", "E", "S", "T", "method"]);
    let mut diagnostics = Vec::new();
    for fam in families {
        let energy = fam.sign_f64() * cfg.energy.abs();
        let a = action(&spec, fam, energy)?;
        let period = period_estimate(&spec, fam, energy).ok();
        let levels = semiclassical_levels(&spec, fam, cfg.k_max)?;
        diagnostics.extend(levels.diagnostics.iter().cloned());
        let method = serde_json::to_value(a.method)?;
        csv.push(vec![
            fam.to_string(),
            num(energy),
            num(a.action),
            period.map_or_else(String::new, num),
            method.as_str().unwrap_or_default().to_string(),
        ]);
        rows.push(json!({
            "family": fam.to_string(),
            "energy": energy,
            "action": a.action,
            "method": method,
            "period": period,
            "levels": levels.energies(),
        }));
    }
    report(Value::Array(rows), csv, diagnostics, false)
}

fn spectrum_table(r: &SpectrumResult) -> Table {
    let mut csv = Table::new(&["k", "E", "method"]);
    for l in &r.levels {
        let method = serde_json::to_value(l.method).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        csv.push(vec![l.k.to_string(), num(l.energy), method]);
    }
    csv
}

fn levels(cfg: &RunConfig) -> Result<Report> {
    let spec = spec(cfg)?;
    let ray = Ray::new(cfg.alpha)?;
    let result = match cfg.method {
        LevelSource::Shooting => find_levels(&spec, &ray, cfg.emax, &shooting(cfg))?,
        LevelSource::Semiclassical => match classify_ray(&spec, cfg.alpha)? {
            SectorClass::Discrete(m) => {
                let mut r = semiclassical_levels(&spec, FamilyId::pos(m), cfg.k_max)?;
                r.ray = Some(ray);
                r
            }
            c => return Err(Error::NotDiscrete(c.to_string()).into()),
        },
    };
    let failure = !result.diagnostics.is_empty() && cfg.method == LevelSource::Shooting;
    report(serde_json::to_value(&result)?, spectrum_table(&result), result.diagnostics.clone(), failure)
}

fn class_name(c: &cryptospec::Result<SectorClass>) -> String {
    match c {
        Ok(c) => c.to_string(),
        Err(Error::BoundaryIndeterminate { .. }) => "boundary".into(),
        Err(e) => format!("error: {e}"),
    }
}

fn sectors(cfg: &RunConfig) -> Result<Report> {
    let spec = spec(cfg)?;
    let params = shooting(cfg);
    let asymptotes = stokes_asymptotes(&spec)?;
    let mut csv = Table::new(&["alpha", "analytic", "numeric"]);
    let mut diagnostics = Vec::new();
    let mut failure = false;
    let rays: Vec<Value> = match cfg.points {
        Some(0) => return Err(Error::InvalidParameter("--points must be positive".into()).into()),
        Some(points) => {
            let alphas: Vec<f64> = (0..points).map(|i| -PI + 2.0 * PI * i as f64 / points as f64).collect();
            let entries: Vec<(f64, cryptospec::Result<SectorClass>, Option<cryptospec::Result<SectorClass>>)> =
                if cfg.numeric {
                    sector_map_with(&spec, &alphas, &params, Exec::default())
                        .into_iter()
                        .map(|(a, an, nu)| (a, an, Some(nu)))
                        .collect()
                } else {
                    alphas.iter().map(|&a| (a, classify_ray(&spec, a), None)).collect()
                };
            entries
                .iter()
                .map(|(a, an, nu)| {
                    let numeric = nu.as_ref().map(class_name);
                    if let (Ok(x), Some(Ok(y))) = (an, nu) {
                        if x != y {
                            failure = true;
                            diagnostics.push(format!("alpha = {a}: analytic {x}, numeric {y}"));
                        }
                    }
                    csv.push(vec![num(*a), class_name(an), numeric.clone().unwrap_or_default()]);
                    json!({ "alpha": a, "analytic": class_name(an), "numeric": numeric })
                })
                .collect()
        }
        None => {
            let analytic = classify_ray(&spec, cfg.alpha);
            if let Err(Error::BoundaryIndeterminate { alpha }) = analytic {
                failure = true;
                diagnostics.push(format!(
                    "boundary-indeterminate ray: alpha = {alpha} lies within the collar of a Stokes asymptote"
                ));
            } else if let Err(e) = &analytic {
                return Err(anyhow!(e.clone()));
            }
            let numeric = if cfg.numeric {
                let nu = classify_ray_numeric(&spec, &Ray::new(cfg.alpha)?, &params);
                if let (Ok(x), Ok(y)) = (&analytic, &nu) {
                    if x != y {
                        failure = true;
                        diagnostics.push(format!("analytic {x}, numeric {y}"));
                    }
                }
                Some(class_name(&nu))
            } else {
                None
            };
            csv.push(vec![num(cfg.alpha), class_name(&analytic), numeric.clone().unwrap_or_default()]);
            vec![json!({ "alpha": cfg.alpha, "analytic": class_name(&analytic), "numeric": numeric })]
        }
    };
    report(json!({ "asymptotes": asymptotes, "rays": rays }), csv, diagnostics, failure)
}

fn flow(cfg: &RunConfig) -> Result<Report> {
    let curve =
        spectral_flow_with(cfg.n, cfg.alpha, cfg.g_from, cfg.g_to, cfg.n_levels, &shooting(cfg), Exec::default())?;
    let mut csv = Table::new(&["g", "level", "E"]);
    for (g, levels) in curve.g_values.iter().zip(&curve.levels) {
        for (i, e) in levels.iter().enumerate() {
            csv.push(vec![num(*g), i.to_string(), num(*e)]);
        }
    }
    let diagnostics = curve.diagnostics.clone();
    report(serde_json::to_value(&curve)?, csv, diagnostics, false)
}

fn ep(cfg: &RunConfig) -> Result<Report> {
    let pair = (cfg.pair[0], cfg.pair[1]);
    let point =
        find_exceptional_point_with(cfg.n, cfg.alpha, pair, (cfg.g_lo, cfg.g_hi), &shooting(cfg), Exec::default())?;
    let mut csv = Table::new(&["g_star", "E_star", "lower", "upper", "extrapolation"]);
    csv.push(vec![
        num(point.g_star),
        num(point.e_star),
        pair.0.to_string(),
        pair.1.to_string(),
        point.extrapolation.to_string(),
    ]);
    let diagnostics = if point.extrapolation {
        vec![format!("pair {pair:?} lies beyond the known coalescences; reported as extrapolation")]
    } else {
        Vec::new()
    };
    report(serde_json::to_value(point)?, csv, diagnostics, false)
}

fn exact(c: &SqrtRational) -> String {
    match c.as_rational() {
        Some(r) => r.to_string(),
        None => format!("{}sqrt({})", if c.sign < 0 { "-" } else { "" }, c.square),
    }
}

fn oscillator(cfg: &RunConfig) -> Result<Report> {
    if let Some(d) = cfg.kernel {
        let state = dirac_kernel_state(d, cfg.j_max)?;
        let mut csv = Table::new(&["j", "c", "exact"]);
        let mut coeffs = Vec::new();
        for (j, c) in state.coefficients.iter().enumerate() {
            csv.push(vec![j.to_string(), num(c.to_f64()), exact(c)]);
            coeffs.push(json!({ "j": j, "value": c.to_f64(), "exact": exact(c) }));
        }
        return report(json!({ "energy": state.energy, "coefficients": coeffs }), csv, Vec::new(), false);
    }
    let mode = match cfg.mode {
        OscMode::Real => OscQuantization::RealAxisGauge,
        OscMode::Imag => OscQuantization::ImagAxisGauge,
        OscMode::Dirac => OscQuantization::DiracConstraint,
    };
    let energy = osc_spectrum(mode, cfg.k)?;
    let mut csv = Table::new(&["mode", "k", "E"]);
    let mode_name = serde_json::to_value(cfg.mode)?;
    csv.push(vec![mode_name.as_str().unwrap_or_default().to_string(), cfg.k.to_string(), num(energy)]);
    report(json!({ "mode": mode_name, "k": cfg.k, "energy": energy }), csv, Vec::new(), false)
}

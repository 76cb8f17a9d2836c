//! Complexified Hamilton equations at zero gauge parameter, orbit families,
//! gauge flow and the gauge-fixed reduced dynamics.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{self, Control, Options, Status};
use crate::potential::{gauge_rhs, hamilton_rhs, split_hg, turning_points, PhasePoint, PotentialSpec};
use crate::semiclassical;

/// Relative drift allowed for `H` and `G` along non-runaway trajectories.
pub const TOL_CONSERVE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergySign {
    Pos,
    Neg,
}

/// One of the `2n` orbit families: `pos-m` / `neg-m`, `m = 0..n-1`, ordered
/// by the argument of the right turning point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FamilyId {
    pub sign: EnergySign,
    pub index: u32,
}

impl FamilyId {
    pub fn pos(index: u32) -> Self {
        FamilyId { sign: EnergySign::Pos, index }
    }

    pub fn neg(index: u32) -> Self {
        FamilyId { sign: EnergySign::Neg, index }
    }

    /// All families for exponent index `n`, positive first.
    pub fn all(n: u32) -> Vec<FamilyId> {
        (0..n).map(FamilyId::pos).chain((0..n).map(FamilyId::neg)).collect()
    }

    pub fn check(&self, n: u32) -> Result<()> {
        if self.index >= n {
            return Err(Error::InvalidParameter(format!("family {self} out of range for n = {n}")));
        }
        Ok(())
    }

    pub fn check_energy(&self, energy: f64) -> Result<()> {
        let ok = match self.sign {
            EnergySign::Pos => energy > 0.0,
            EnergySign::Neg => energy < 0.0,
        };
        if !ok {
            return Err(Error::InvalidParameter(format!("energy {energy} has the wrong sign for family {self}")));
        }
        Ok(())
    }

    /// `+1` or `-1`.
    pub fn sign_f64(&self) -> f64 {
        match self.sign {
            EnergySign::Pos => 1.0,
            EnergySign::Neg => -1.0,
        }
    }

    /// Argument of the right turning point of the stem orbit.
    pub fn right_turning_arg(&self, n: u32) -> f64 {
        let k = (2 * n + 1) as f64;
        let m = self.index as f64;
        match self.sign {
            EnergySign::Pos => -PI / 2.0 + PI * (2.0 * m + 1.0) / k,
            EnergySign::Neg => -PI / 2.0 + 2.0 * PI * (m + 1.0) / k,
        }
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.sign {
            EnergySign::Pos => "pos",
            EnergySign::Neg => "neg",
        };
        write!(f, "{s}-{}", self.index)
    }
}

impl FromStr for FamilyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("family must look like pos-0 or neg-1, got {s:?}"));
        let (sign, idx) = s.split_once('-').ok_or_else(bad)?;
        let index = idx.parse::<u32>().map_err(|_| bad())?;
        match sign {
            "pos" => Ok(FamilyId::pos(index)),
            "neg" => Ok(FamilyId::neg(index)),
            _ => Err(bad()),
        }
    }
}

/// The PT-symmetric pair `(right, left)` of turning points for a family.
pub fn family_turning_points(spec: &PotentialSpec, energy: f64, family: FamilyId) -> Result<(C64, C64)> {
    spec.require_pure_odd()?;
    family.check(spec.n)?;
    family.check_energy(energy)?;
    let set = turning_points(spec, energy)?;
    let target = C64::from_polar(1.0, family.right_turning_arg(spec.n));
    let nearest = |w: C64| {
        *set.points
            .iter()
            .min_by(|a, b| (**a / a.norm() - w).norm().total_cmp(&(**b / b.norm() - w).norm()))
            .expect("non-empty turning point set")
    };
    let right = nearest(target);
    let left = nearest(-right.conj() / right.norm());
    Ok((right, left))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Classification {
    Closed { period: f64 },
    Runaway { t_escape: f64 },
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub pt: PhasePoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub spec: PotentialSpec,
    pub samples: Vec<Sample>,
    pub classification: Classification,
    /// `H` at `t = 0`.
    pub energy: f64,
    /// `G` at `t = 0`.
    pub constraint0: f64,
    /// Largest `|H(t) - energy|` over the samples.
    pub max_dh: f64,
    /// Largest `|G(t) - constraint0|` over the samples.
    pub max_dg: f64,
    pub diagnostics: Vec<String>,
}

impl Trajectory {
    pub fn period(&self) -> Option<f64> {
        match self.classification {
            Classification::Closed { period } => Some(period),
            _ => None,
        }
    }

    pub fn is_runaway(&self) -> bool {
        matches!(self.classification, Classification::Runaway { .. })
    }

    /// Whether the drift bounds hold: `1e-8 (1 + |E|)` for `H`, `1e-8` for `G`.
    pub fn conserves(&self) -> bool {
        self.max_dh <= TOL_CONSERVE * (1.0 + self.energy.abs()) && self.max_dg <= TOL_CONSERVE
    }
}

pub fn escape_radius(spec: &PotentialSpec, energy: f64) -> f64 {
    50.0 * (1.0 + energy.abs()).powf(1.0 / spec.power() as f64)
}

/// Earliest time at which a return to the start is accepted.
fn min_return_time(spec: &PotentialSpec, energy: f64) -> f64 {
    let pure_estimate = |g: f64| -> Option<f64> {
        if g <= 0.0 || energy == 0.0 {
            return None;
        }
        let pure = PotentialSpec { g, oscillator: false, ..*spec };
        let sign = if energy > 0.0 { FamilyId::pos } else { FamilyId::neg };
        (0..spec.n)
            .filter_map(|m| semiclassical::period_estimate(&pure, sign(m), energy).ok())
            .reduce(f64::min)
            .or_else(|| semiclassical::positive_period_range(&pure, energy).ok().map(|r| 0.5 * r.0))
    };
    let estimate = if spec.oscillator {
        let osc = 2.0 * PI;
        pure_estimate(spec.g).map_or(osc, |t| t.min(osc))
    } else {
        pure_estimate(spec.g).unwrap_or(0.0)
    };
    0.5 * estimate
}

struct Run {
    samples: Vec<Sample>,
    classification: Classification,
    max_dh: f64,
    max_dg: f64,
    status: Status,
}

fn dot(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Locates the zero of the section function inside one accepted step by
/// regula falsi on the step length, re-stepping from the step start.
fn refine_crossing<F>(f: &F, t0: f64, y0: &[f64; 4], h: f64, section: &dyn Fn(&[f64; 4]) -> f64) -> (f64, [f64; 4])
where
    F: Fn(f64, &[f64; 4]) -> [f64; 4],
{
    let k1 = f(t0, y0);
    let eval = |tau: f64| -> [f64; 4] {
        if tau == 0.0 {
            *y0
        } else {
            ode::step(f, t0, y0, &k1, tau).0
        }
    };
    let (mut a, mut b) = (0.0, h);
    let (mut fa, mut fb) = (section(y0), section(&eval(h)));
    let mut side = 0i32;
    let mut best = (h, eval(h));
    for _ in 0..60 {
        let c = (a * fb - b * fa) / (fb - fa);
        let yc = eval(c);
        let fc = section(&yc);
        best = (c, yc);
        if fc == 0.0 || (b - a).abs() < 1e-15 * (1.0 + t0.abs()) {
            break;
        }
        if fc * fb < 0.0 {
            a = b;
            fa = fb;
            b = c;
            fb = fc;
            side = 0;
        } else {
            b = c;
            fb = fc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        if (fb.abs()) < 1e-300 {
            break;
        }
    }
    (t0 + best.0, best.1)
}

fn run_hamilton(spec: &PotentialSpec, start: &PhasePoint, t_max: f64, tol: f64, t_min: f64) -> Run {
    let hg0 = split_hg(spec, start).expect("validated start");
    let r_escape = escape_radius(spec, hg0.H);
    let y0 = start.to_array();
    let f = |_t: f64, s: &[f64; 4]| hamilton_rhs(spec, s);
    let v0 = f(0.0, &y0);
    let v0_norm = dot(&v0, &v0).sqrt();
    let section = |s: &[f64; 4]| {
        let d = [s[0] - y0[0], s[1] - y0[1], s[2] - y0[2], s[3] - y0[3]];
        dot(&d, &v0) / v0_norm.max(1e-300)
    };
    let threshold = 1e-6 * (1.0 + start.norm());
    let mut samples = vec![Sample { t: 0.0, pt: *start }];
    let mut classification = Classification::Undetermined;
    let (mut max_dh, mut max_dg) = (0.0f64, 0.0f64);
    let opts = Options::new(tol).with_atol(tol * 1e-2);
    let outcome = ode::integrate(f, 0.0, y0, t_max, &opts, |t_prev, y_prev, t, y| {
        let pt = PhasePoint::from_array(*y);
        if (pt.x * pt.x + pt.y * pt.y).sqrt() > r_escape {
            samples.push(Sample { t, pt });
            classification = Classification::Runaway { t_escape: t };
            return Control::Stop;
        }
        if v0_norm > 0.0 && t > t_min && section(y_prev) < 0.0 && section(y) >= 0.0 {
            let (tc, yc) = refine_crossing(&f, t_prev, y_prev, t - t_prev, &section);
            let dist = yc.iter().zip(&y0).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            if dist < threshold {
                let pc = PhasePoint::from_array(yc);
                let hg = split_hg(spec, &pc).expect("finite");
                max_dh = max_dh.max((hg.H - hg0.H).abs());
                max_dg = max_dg.max((hg.G - hg0.G).abs());
                samples.push(Sample { t: tc, pt: pc });
                classification = Classification::Closed { period: tc };
                return Control::Stop;
            }
        }
        let hg = split_hg(spec, &pt).expect("finite");
        max_dh = max_dh.max((hg.H - hg0.H).abs());
        max_dg = max_dg.max((hg.G - hg0.G).abs());
        samples.push(Sample { t, pt });
        Control::Continue
    });
    Run { samples, classification, max_dh, max_dg, status: outcome.status }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(1e-13..=1e-6).contains(&tol) {
        return Err(Error::InvalidParameter(format!("tol must lie in [1e-13, 1e-6], got {tol}")));
    }
    Ok(())
}

fn finish(spec: &PotentialSpec, start: &PhasePoint, run: Run) -> Trajectory {
    let hg0 = split_hg(spec, start).expect("validated start");
    let mut diagnostics = Vec::new();
    match run.status {
        Status::StepUnderflow => diagnostics.push("step size underflow".to_string()),
        Status::NonFinite => diagnostics.push("non-finite state".to_string()),
        Status::MaxSteps => diagnostics.push("step budget exhausted".to_string()),
        _ => {}
    }
    let traj = Trajectory {
        spec: *spec,
        samples: run.samples,
        classification: run.classification,
        energy: hg0.H,
        constraint0: hg0.G,
        max_dh: run.max_dh,
        max_dg: run.max_dg,
        diagnostics,
    };
    let mut traj = traj;
    if !traj.is_runaway() && !traj.conserves() {
        traj.diagnostics
            .push(format!("conservation drift above bound: |dH| = {:e}, |dG| = {:e}", traj.max_dh, traj.max_dg));
    }
    traj
}

/// Integrates the Hamilton equations of `H` from `start` up to `t_max`,
/// stopping early on closure or escape.
pub fn integrate(spec: &PotentialSpec, start: PhasePoint, t_max: f64, tol: f64) -> Result<Trajectory> {
    spec.require_odd()?;
    check_tol(tol)?;
    if !start.is_finite() || !t_max.is_finite() || t_max <= 0.0 {
        return Err(Error::Domain(format!("start {start:?}, t_max {t_max}")));
    }
    let energy = split_hg(spec, &start)?.H;
    let t_min = min_return_time(spec, energy);
    let run = run_hamilton(spec, &start, t_max, tol, t_min);
    Ok(finish(spec, &start, run))
}

/// The orbit launched from the right turning point of `family` with zero
/// momenta. It passes through the mirror turning point and returns.
pub fn stem_trajectory(spec: &PotentialSpec, energy: f64, family: FamilyId) -> Result<Trajectory> {
    stem_trajectory_tol(spec, energy, family, 1e-12)
}

pub fn stem_trajectory_tol(spec: &PotentialSpec, energy: f64, family: FamilyId, tol: f64) -> Result<Trajectory> {
    check_tol(tol)?;
    let (right, _) = family_turning_points(spec, energy, family)?;
    let start = PhasePoint::from_complex(right, C64::new(0.0, 0.0));
    let (t_min, t_max) = match semiclassical::period_estimate(spec, family, energy) {
        Ok(t) => (0.4 * t, 4.0 * t),
        Err(_) => {
            // No cheap estimate for this family: bracket it with the
            // positive-family periods at the same |E|.
            let (lo, hi) = semiclassical::positive_period_range(spec, energy)?;
            (0.25 * lo, 20.0 * spec.power() as f64 * hi)
        }
    };
    let run = run_hamilton(spec, &start, t_max, tol, t_min);
    let traj = finish(spec, &start, run);
    if traj.period().is_none() {
        return Err(Error::NoConvergence(format!(
            "stem orbit of {family} at E = {energy} did not close ({:?})",
            traj.classification
        )));
    }
    Ok(traj)
}

/// Flows `pt` for parameter `alpha` along the Hamiltonian vector field of `G`.
pub fn gauge_flow(spec: &PotentialSpec, pt: PhasePoint, alpha: f64) -> Result<PhasePoint> {
    spec.require_odd()?;
    if !pt.is_finite() || !alpha.is_finite() {
        return Err(Error::Domain(format!("pt {pt:?}, alpha {alpha}")));
    }
    if alpha == 0.0 {
        return Ok(pt);
    }
    let energy = split_hg(spec, &pt)?.H;
    let r_escape = escape_radius(spec, energy);
    let mut escaped = None;
    let opts = Options::new(1e-13).with_atol(1e-15);
    let out = ode::integrate(
        |_, s: &[f64; 4]| gauge_rhs(spec, s),
        0.0,
        pt.to_array(),
        alpha,
        &opts,
        |_, _, a, y| {
            if (y[0] * y[0] + y[1] * y[1]).sqrt() > r_escape {
                escaped = Some(a);
                Control::Stop
            } else {
                Control::Continue
            }
        },
    );
    if let Some(at) = escaped {
        return Err(Error::Escape { at });
    }
    match out.status {
        Status::Completed => Ok(PhasePoint::from_array(out.y)),
        Status::StepUnderflow | Status::NonFinite => Err(Error::Escape { at: out.t }),
        _ => Err(Error::NoConvergence(format!("gauge flow stopped at {}", out.t))),
    }
}

/// Reduced Hamiltonian `H* = p^2/2 - x^6/(2p^2)` of the cubic potential.
pub fn reduced_hamiltonian(x: f64, p: f64) -> f64 {
    0.5 * p * p - x.powi(6) / (2.0 * p * p)
}

/// Embeds a reduced state `(x, p)` into the full phase space with `y = 0`
/// and `q = x^3/p`, where `G = 0` and `H = H*`.
pub fn embed_reduced(x: f64, p: f64) -> PhasePoint {
    PhasePoint::new(x, 0.0, p, x.powi(3) / p)
}

/// Integrates `xdot = p + x^6/p^3`, `pdot = 3x^5/p^2` (cubic potential after
/// gauge fixing `y = 0`) forward, and backward if forward time neither
/// escapes nor closes. A backward escape is reported with a negative
/// `t_escape`.
pub fn reduced_gauge_dynamics(start: (f64, f64), t_max: f64) -> Result<Trajectory> {
    let (x0, p0) = start;
    if !x0.is_finite() || !p0.is_finite() || !t_max.is_finite() || t_max <= 0.0 {
        return Err(Error::Domain(format!("start {start:?}, t_max {t_max}")));
    }
    if p0 == 0.0 {
        return Err(Error::Domain("reduced Hamiltonian is singular at p = 0".into()));
    }
    let spec = PotentialSpec::pure(1);
    let energy = reduced_hamiltonian(x0, p0);
    let r_escape = escape_radius(&spec, energy);
    let p_floor = 1e-6 * p0.abs().min(1.0);
    let f = |_t: f64, s: &[f64; 2]| {
        let (x, p) = (s[0], s[1]);
        [p + x.powi(6) / p.powi(3), 3.0 * x.powi(5) / (p * p)]
    };
    let run_dir = |t_end: f64| {
        let mut samples = vec![Sample { t: 0.0, pt: embed_reduced(x0, p0) }];
        let mut escaped = None;
        let mut collapsed = false;
        let opts = Options::new(1e-11).with_atol(1e-13);
        let out = ode::integrate(f, 0.0, [x0, p0], t_end, &opts, |_, _, t, y| {
            samples.push(Sample { t, pt: embed_reduced(y[0], y[1]) });
            if y[0].abs() > r_escape || y[1].abs() > r_escape * r_escape {
                escaped = Some(t);
                Control::Stop
            } else if y[1].abs() < p_floor {
                collapsed = true;
                Control::Stop
            } else {
                Control::Continue
            }
        });
        (samples, escaped, collapsed, out.status)
    };
    let mut diagnostics = Vec::new();
    let (fwd, fwd_escape, fwd_collapse, fwd_status) = run_dir(t_max);
    let (samples, classification) = if let Some(t) = fwd_escape {
        (fwd, Classification::Runaway { t_escape: t })
    } else {
        if fwd_collapse {
            diagnostics.push("forward motion reaches p -> 0 where H* is singular".to_string());
        } else if fwd_status != Status::Completed {
            diagnostics.push(format!("forward integration ended with {fwd_status:?}"));
        }
        let (bwd, bwd_escape, _, _) = run_dir(-t_max);
        match bwd_escape {
            Some(t) => {
                let mut s: Vec<Sample> = bwd.into_iter().rev().collect();
                s.extend(fwd.into_iter().skip(1));
                (s, Classification::Runaway { t_escape: t })
            }
            None => (fwd, Classification::Undetermined),
        }
    };
    Ok(Trajectory { spec, samples, classification, energy, constraint0: 0.0, max_dh: 0.0, max_dg: 0.0, diagnostics })
}

//! Ray-rotated Schrodinger problem: sector classification and shooting.
//!
//! Along the ray `z = s Phi`, `Phi = e^{i alpha}`, the equation becomes
//! `Psi'' = 2 Phi^2 (V(s Phi) - E) Psi`. The solution decaying at large `s`
//! is integrated inward, and PT symmetry reduces the full-line problem to the
//! condition `Re[Psi'(0) / (Phi Psi(0))] = 0`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::classical::FamilyId;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::ode::{self, Control, Options, Status};
use crate::potential::{stokes_asymptotes, Parity, PotentialSpec};
use crate::semiclassical::level_energy;

/// Half-width of the excluded collar around each Stokes asymptote.
pub const COLLAR: f64 = 0.02;

/// WKB decay exponent `Re int kappa ds` required beyond the turning scale.
pub const DECAY_EXPONENT: f64 = 35.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub alpha: f64,
    pub phi: C64,
}

impl Ray {
    /// Normalises `alpha` into `(-pi, 3pi/2]`.
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::Domain(format!("alpha = {alpha}")));
        }
        let mut a = alpha.rem_euclid(2.0 * PI);
        if a > 1.5 * PI {
            a -= 2.0 * PI;
        }
        Ok(Ray { alpha: a, phi: C64::from_polar(1.0, a) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "m", rename_all = "lowercase")]
pub enum SectorClass {
    Discrete(u32),
    Continuous,
    Empty,
}

impl std::fmt::Display for SectorClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SectorClass::Discrete(m) => write!(f, "discrete({m})"),
            SectorClass::Continuous => write!(f, "continuous"),
            SectorClass::Empty => write!(f, "empty"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LevelMethod {
    Shooting,
    Semiclassical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub k: usize,
    pub energy: f64,
    pub method: LevelMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub spec: PotentialSpec,
    pub ray: Option<Ray>,
    pub classification: Option<SectorClass>,
    pub levels: Vec<Level>,
    pub diagnostics: Vec<String>,
}

impl SpectrumResult {
    pub fn energies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.energy).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingParams {
    /// Truncation of the half-line; chosen from the WKB decay when `None`.
    pub s_max: Option<f64>,
    pub ode_tol: f64,
    /// Upper bound on the energy grid step; the scan also keeps the step
    /// below a fifth of the local WKB level gap.
    pub e_grid_step: f64,
    pub refine_tol: f64,
}

impl Default for ShootingParams {
    fn default() -> Self {
        ShootingParams { s_max: None, ode_tol: 1e-10, e_grid_step: 0.1, refine_tol: 1e-10 }
    }
}

impl ShootingParams {
    pub fn validate(&self) -> Result<()> {
        if let Some(s) = self.s_max {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidParameter(format!("s_max must be positive, got {s}")));
            }
        }
        if !(self.ode_tol > 0.0 && self.ode_tol <= 1e-6) {
            return Err(Error::InvalidParameter(format!("ode_tol must lie in (0, 1e-6], got {}", self.ode_tol)));
        }
        if !(self.e_grid_step > 0.0 && self.e_grid_step.is_finite()) {
            return Err(Error::InvalidParameter(format!("e_grid_step must be positive, got {}", self.e_grid_step)));
        }
        if !(self.refine_tol > 0.0 && self.refine_tol <= 1e-8) {
            return Err(Error::InvalidParameter(format!("refine_tol must lie in (0, 1e-8], got {}", self.refine_tol)));
        }
        Ok(())
    }
}

fn wedge_geometry(spec: &PotentialSpec, alpha: f64) -> Result<(usize, Option<usize>, Vec<f64>)> {
    let asym = stokes_asymptotes(&PotentialSpec { oscillator: false, g: 1.0, ..*spec })?;
    let count = asym.len();
    let step = 2.0 * PI / count as f64;
    let first = asym[0];
    let rel = (alpha - first).rem_euclid(2.0 * PI);
    let wedge = ((rel / step).floor() as usize).min(count - 1);
    let offset = rel - wedge as f64 * step;
    let near = if offset < COLLAR {
        Some(wedge)
    } else if step - offset < COLLAR {
        Some((wedge + 1) % count)
    } else {
        None
    };
    Ok((wedge, near, asym))
}

fn classify_wedge_odd(n: u32, count: usize, j: usize) -> SectorClass {
    let n = n as usize;
    let k = count - 2;
    if j < n {
        SectorClass::Discrete(j as u32)
    } else if j == n || j == n + 1 {
        SectorClass::Empty
    } else if j == count - 1 {
        SectorClass::Continuous
    } else {
        SectorClass::Discrete((k - j) as u32)
    }
}

fn classify_wedge_even(n: u32, count: usize, first: f64, j: usize) -> SectorClass {
    let step = 2.0 * PI / count as f64;
    let fold = |c: f64| {
        let c = (c + PI).rem_euclid(2.0 * PI) - PI;
        let r = c.abs();
        if r > PI / 2.0 {
            PI - r
        } else {
            r
        }
    };
    let center = first + (j as f64 + 0.5) * step;
    let rep = fold(center);
    if (rep - PI / 2.0).abs() < 1e-9 {
        return SectorClass::Continuous;
    }
    let mut reps: Vec<f64> =
        (0..count).map(|i| fold(first + (i as f64 + 0.5) * step)).filter(|r| (r - PI / 2.0).abs() > 1e-9).collect();
    reps.sort_by(f64::total_cmp);
    reps.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    debug_assert_eq!(reps.len(), n.div_ceil(2) as usize);
    let m = reps.iter().position(|r| (r - rep).abs() < 1e-9).expect("representative present");
    SectorClass::Discrete(m as u32)
}

/// Sector of the ray at angle `alpha`.
///
/// Odd parity: wedge `m` (counted from the first asymptote below the real
/// axis) and its mirror under `alpha -> pi - alpha` are `Discrete(m)`, the
/// wedge around `-pi/2` is `Continuous`, and the two wedges flanking `+pi/2`
/// are `Empty`. Even parity: wedges fixed by the mirror are `Continuous`,
/// the rest are grouped into `ceil(n/2)` classes under the reflections of
/// the potential. Rays within [`COLLAR`] of an asymptote are indeterminate,
/// except between the two empty wedges.
pub fn classify_ray(spec: &PotentialSpec, alpha: f64) -> Result<SectorClass> {
    spec.validate()?;
    if spec.oscillator && spec.g == 0.0 {
        return Err(Error::Unsupported("sector structure needs g > 0".into()));
    }
    if !alpha.is_finite() {
        return Err(Error::Domain(format!("alpha = {alpha}")));
    }
    let (wedge, near, asym) = wedge_geometry(spec, alpha)?;
    let count = asym.len();
    let classify = |j: usize| match spec.parity {
        Parity::Odd => classify_wedge_odd(spec.n, count, j),
        Parity::Even => classify_wedge_even(spec.n, count, asym[0], j),
    };
    if let Some(i) = near {
        let below = classify((i + count - 1) % count);
        let above = classify(i);
        if below == SectorClass::Empty && above == SectorClass::Empty {
            return Ok(SectorClass::Empty);
        }
        return Err(Error::BoundaryIndeterminate { alpha });
    }
    Ok(classify(wedge))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MismatchMode {
    /// `Re[Psi'/(Phi Psi)]`
    Direct,
    /// `Re[Phi Psi/Psi']`, used when `|Psi'| > |Phi Psi|`; same sign.
    Reciprocal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    pub value: f64,
    pub mode: MismatchMode,
    /// `Re(Psi' conj(Phi Psi)) / (|Psi|^2 + |Psi'|^2)`: same sign as the
    /// mismatch, bounded and free of poles. Used for bracketing.
    pub bounded: f64,
}

#[inline]
fn kappa_sq(spec: &PotentialSpec, phi: C64, s: f64, energy: f64) -> C64 {
    2.0 * phi * phi * (spec.v(phi * s) - energy)
}

/// Truncation point where the WKB exponent beyond the turning scale reaches
/// [`DECAY_EXPONENT`].
pub fn auto_s_max(spec: &PotentialSpec, ray: &Ray, energy: f64) -> Result<f64> {
    spec.require_odd()?;
    let phi = ray.phi;
    let level = energy.abs() + 1.0;
    let mut s = 1e-3;
    while spec.v(phi * s).norm() < level {
        s *= 1.02;
        if s > 1e6 {
            return Err(Error::NoConvergence("no turning scale along the ray".into()));
        }
    }
    let s_turn = s;
    let mut acc = 0.0;
    let mut prev = kappa_sq(spec, phi, s, energy).sqrt().re;
    while acc < DECAY_EXPONENT {
        let next = s * 1.01;
        let cur = kappa_sq(spec, phi, next, energy).sqrt().re;
        acc += 0.5 * (prev + cur) * (next - s);
        prev = cur;
        s = next;
        if s > 100.0 * s_turn {
            break;
        }
    }
    Ok(s.max(1.5 * s_turn))
}

/// `(Psi(0), Psi'(0))` of the solution decaying at `s_max`.
pub fn shoot(spec: &PotentialSpec, ray: &Ray, energy: f64, s_max: f64, ode_tol: f64) -> Result<(C64, C64)> {
    let phi = ray.phi;
    let kappa = kappa_sq(spec, phi, s_max, energy).sqrt();
    if kappa.re <= 1e-12 * kappa.norm() {
        return Err(Error::NoDecay { re_kappa: kappa.re });
    }
    let f = |s: f64, u: &[f64; 4]| {
        let psi = C64::new(u[0], u[1]);
        let d2 = kappa_sq(spec, phi, s, energy) * psi;
        [u[2], u[3], d2.re, d2.im]
    };
    let opts = Options::new(ode_tol).with_atol(1e-300).global();
    let y0 = [1.0, 0.0, -kappa.re, -kappa.im];
    let out = ode::integrate(f, s_max, y0, 0.0, &opts, |_, _, _, y| {
        let big = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if big > 1e50 {
            for v in y.iter_mut() {
                *v /= big;
            }
        }
        Control::Continue
    });
    if out.status != Status::Completed {
        return Err(Error::NoConvergence(format!("shooting at E = {energy} ended with {:?}", out.status)));
    }
    Ok((C64::new(out.y[0], out.y[1]), C64::new(out.y[2], out.y[3])))
}

fn mismatch_from(phi: C64, psi: C64, dpsi: C64) -> Mismatch {
    let a = phi * psi;
    let bounded = (dpsi * a.conj()).re / (psi.norm_sqr() + dpsi.norm_sqr());
    if dpsi.norm() <= a.norm() {
        Mismatch { value: (dpsi / a).re, mode: MismatchMode::Direct, bounded }
    } else {
        Mismatch { value: (a / dpsi).re, mode: MismatchMode::Reciprocal, bounded }
    }
}

/// Boundary mismatch `D(E) = Re[Psi'(0)/(Phi Psi(0))]` of the inward-shot
/// decaying solution.
pub fn shoot_mismatch(spec: &PotentialSpec, ray: &Ray, energy: f64, params: &ShootingParams) -> Result<Mismatch> {
    spec.require_odd()?;
    params.validate()?;
    if !energy.is_finite() {
        return Err(Error::Domain(format!("E = {energy}")));
    }
    let s_max = match params.s_max {
        Some(s) => s,
        None => auto_s_max(spec, ray, energy)?,
    };
    let (psi, dpsi) = shoot(spec, ray, energy, s_max, params.ode_tol)?;
    Ok(mismatch_from(ray.phi, psi, dpsi))
}

/// Value and derivative jumps at the origin of the full-line eigenfunction
/// rebuilt from `Psi(-x) = Psi*(x)` on the real axis, relative to `|Psi(0)|`.
pub fn junction_residual(spec: &PotentialSpec, energy: f64, params: &ShootingParams) -> Result<(f64, f64)> {
    let ray = Ray::new(0.0)?;
    let s_max = match params.s_max {
        Some(s) => s,
        None => auto_s_max(spec, &ray, energy)?,
    };
    let (psi, dpsi) = shoot(spec, &ray, energy, s_max, params.ode_tol)?;
    // Fix the free phase so that Psi(0) is real and positive.
    let c = psi.conj() / psi.norm();
    let (psi, dpsi) = (psi * c, dpsi * c);
    let value_jump = (psi - psi.conj()).norm() / psi.norm();
    // d/dx Psi*(-x) at 0 is -conj(Psi'(0)).
    let slope_jump = (dpsi + dpsi.conj()).norm() / psi.norm();
    Ok((value_jump, slope_jump))
}

/// Bracketed root of a continuous function by the Illinois variant of
/// regula falsi.
fn refine_root<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64, tol: f64) -> f64 {
    let mut side = 0i32;
    for _ in 0..200 {
        if (b - a).abs() <= tol * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !c.is_finite() || c <= a.min(b) || c >= a.max(b) {
            c = 0.5 * (a + b);
        }
        let fc = f(c);
        if fc == 0.0 {
            return c;
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
    }
    if fa.abs() < fb.abs() {
        a
    } else {
        b
    }
}

/// Minimises `f` on `[a, b]` by golden-section search.
pub(crate) fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol * (1.0 + a.abs()) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Evaluation context for repeated mismatch calls on one problem.
#[derive(Debug, Clone, Copy)]
pub struct Shooter {
    pub spec: PotentialSpec,
    pub ray: Ray,
    pub s_max: f64,
    pub ode_tol: f64,
}

impl Shooter {
    pub fn new(spec: &PotentialSpec, ray: &Ray, e_max: f64, params: &ShootingParams) -> Result<Self> {
        spec.require_odd()?;
        params.validate()?;
        let s_max = match params.s_max {
            Some(s) => s,
            None => auto_s_max(spec, ray, e_max)?,
        };
        Ok(Shooter { spec: *spec, ray: *ray, s_max, ode_tol: params.ode_tol })
    }

    pub fn mismatch(&self, energy: f64) -> Result<Mismatch> {
        let (psi, dpsi) = shoot(&self.spec, &self.ray, energy, self.s_max, self.ode_tol)?;
        Ok(mismatch_from(self.ray.phi, psi, dpsi))
    }

    /// Bounded mismatch; NaN if the shot fails.
    pub fn bounded(&self, energy: f64) -> f64 {
        self.mismatch(energy).map_or(f64::NAN, |m| m.bounded)
    }

    /// Real roots of the mismatch on a grid, including close pairs that the
    /// grid straddles without a sign change.
    pub fn roots_on_grid(&self, grid: &[f64], refine_tol: f64, exec: Exec) -> Vec<f64> {
        let values = exec.map(grid, |&e| self.bounded(e));
        let mut brackets = Vec::new();
        for i in 0..grid.len().saturating_sub(1) {
            let (fa, fb) = (values[i], values[i + 1]);
            if fa.is_finite() && fb.is_finite() && fa * fb < 0.0 {
                brackets.push((grid[i], grid[i + 1], fa, fb));
            }
        }
        // A local minimum of |b| without a sign change may hide two roots.
        let mut hidden = Vec::new();
        for i in 1..grid.len().saturating_sub(1) {
            let (l, c, r) = (values[i - 1], values[i], values[i + 1]);
            if !(l.is_finite() && c.is_finite() && r.is_finite()) || l * c <= 0.0 || c * r <= 0.0 {
                continue;
            }
            if c.abs() < l.abs() && c.abs() < r.abs() {
                hidden.push((grid[i - 1], grid[i + 1], c.signum()));
            }
        }
        let found: Vec<Vec<(f64, f64, f64, f64)>> = exec.map(&hidden, |&(a, b, sign)| {
            let (e_star, v) = golden_min(|e| sign * self.bounded(e), a, b, 1e-12);
            if v < 0.0 {
                let fa = self.bounded(a);
                let fb = self.bounded(b);
                vec![(a, e_star, fa, -sign * v.abs()), (e_star, b, -sign * v.abs(), fb)]
            } else {
                Vec::new()
            }
        });
        brackets.extend(found.into_iter().flatten());
        let mut roots =
            exec.map(&brackets, |&(a, b, fa, fb)| refine_root(|e| self.bounded(e), a, b, fa, fb, refine_tol));
        roots.sort_by(f64::total_cmp);
        roots.dedup_by(|a, b| (*a - *b).abs() <= 10.0 * refine_tol * (1.0 + a.abs()));
        roots
    }
}

/// Local WKB level gap around `energy` for the sector `m`.
fn wkb_gap(spec: &PotentialSpec, m: u32, energy: f64) -> f64 {
    let pure = PotentialSpec { oscillator: false, parity: Parity::Odd, ..*spec };
    let fam = FamilyId::pos(m);
    let mut gap = f64::INFINITY;
    if pure.g > 0.0 {
        let mut prev = level_energy(&pure, fam, 0).unwrap_or(f64::NAN);
        for k in 1..10_000 {
            let cur = level_energy(&pure, fam, k).unwrap_or(f64::NAN);
            if !cur.is_finite() {
                break;
            }
            if cur > energy || k == 1 && prev > energy {
                gap = cur - prev;
                break;
            }
            prev = cur;
        }
    }
    if spec.oscillator {
        gap = gap.min(1.0);
    }
    gap
}

/// Energy grid on `(e_lo, e_hi]` whose step stays below `e_grid_step` and a
/// fifth of the local WKB gap of every sector in `sectors`.
pub fn energy_grid(spec: &PotentialSpec, sectors: &[u32], e_lo: f64, e_hi: f64, e_grid_step: f64) -> Vec<f64> {
    let step_at = |e: f64| sectors.iter().map(|&m| wkb_gap(spec, m, e) / 5.0).fold(e_grid_step, f64::min).max(1e-4);
    let mut grid = Vec::new();
    let mut e = e_lo + 0.5 * step_at(e_lo.max(0.0));
    while e < e_hi {
        grid.push(e);
        e += step_at(e);
    }
    grid.push(e_hi);
    grid
}

/// Eigenvalues on `(0, e_max]` for a ray inside a discrete sector.
pub fn find_levels(spec: &PotentialSpec, ray: &Ray, e_max: f64, params: &ShootingParams) -> Result<SpectrumResult> {
    find_levels_with(spec, ray, e_max, params, Exec::default())
}

pub fn find_levels_with(
    spec: &PotentialSpec,
    ray: &Ray,
    e_max: f64,
    params: &ShootingParams,
    exec: Exec,
) -> Result<SpectrumResult> {
    spec.require_odd()?;
    params.validate()?;
    if !(e_max > 0.0 && e_max.is_finite()) {
        return Err(Error::InvalidParameter(format!("E_max must be positive, got {e_max}")));
    }
    let class = classify_ray(spec, ray.alpha)?;
    let SectorClass::Discrete(m) = class else {
        return Err(Error::NotDiscrete(class.to_string()));
    };
    let shooter = Shooter::new(spec, ray, e_max, params)?;
    let grid = energy_grid(spec, &[m], 0.0, e_max, params.e_grid_step);
    let roots = shooter.roots_on_grid(&grid, params.refine_tol, exec);
    let mut diagnostics = Vec::new();
    if spec.is_pure() {
        let fam = FamilyId::pos(m);
        for k in 0.. {
            let Ok(e_wkb) = level_energy(spec, fam, k) else { break };
            if e_wkb > 0.95 * e_max {
                break;
            }
            let gap = wkb_gap(spec, m, e_wkb);
            if !roots.iter().any(|r| (r - e_wkb).abs() < 0.5 * gap) {
                diagnostics.push(format!("missed level: no root near the WKB level {k} at E = {e_wkb:.6}"));
            }
        }
    }
    let levels =
        roots.iter().enumerate().map(|(k, &e)| Level { k, energy: e, method: LevelMethod::Shooting }).collect();
    Ok(SpectrumResult { spec: *spec, ray: Some(*ray), classification: Some(class), levels, diagnostics })
}

/// Sector of the ray decided from the mismatch alone: no decaying branch or
/// no real eigenvalues means `Empty`, a mismatch vanishing at every probe
/// energy of both signs means `Continuous`, and otherwise the lowest roots
/// are matched against the WKB levels of each sector.
pub fn classify_ray_numeric(spec: &PotentialSpec, ray: &Ray, params: &ShootingParams) -> Result<SectorClass> {
    classify_ray_numeric_with(spec, ray, params, Exec::default())
}

pub fn classify_ray_numeric_with(
    spec: &PotentialSpec,
    ray: &Ray,
    params: &ShootingParams,
    exec: Exec,
) -> Result<SectorClass> {
    spec.require_pure_odd()?;
    params.validate()?;
    let sectors: Vec<u32> = (0..spec.n).collect();
    let first_levels: Vec<Vec<f64>> = sectors
        .iter()
        .map(|&m| (0..2).map(|k| level_energy(spec, FamilyId::pos(m), k)).collect::<Result<Vec<f64>>>())
        .collect::<Result<_>>()?;
    let window = 1.2 * first_levels.iter().map(|l| l[1]).fold(0.0, f64::max);
    let shooter = match Shooter::new(spec, ray, window, params) {
        Ok(s) => s,
        Err(Error::NoDecay { .. }) => return Ok(SectorClass::Empty),
        Err(e) => return Err(e),
    };
    let kappa = kappa_sq(spec, ray.phi, shooter.s_max, 0.0).sqrt();
    if kappa.re <= 1e-12 * kappa.norm() {
        return Ok(SectorClass::Empty);
    }
    let probes: Vec<f64> = (1..=12).flat_map(|i| [0.25 * i as f64, -0.25 * i as f64]).collect();
    let values = exec.map(&probes, |&e| shooter.mismatch(e).map(|m| m.value));
    let values: Vec<f64> = values.into_iter().collect::<Result<_>>()?;
    if values.iter().all(|v| v.abs() < 1e-6) {
        return Ok(SectorClass::Continuous);
    }
    let grid = energy_grid(spec, &sectors, 0.0, window, params.e_grid_step);
    let roots = shooter.roots_on_grid(&grid, 1e-8, exec);
    if roots.is_empty() {
        return Ok(SectorClass::Empty);
    }
    let used = roots.len().min(2);
    let score = |levels: &[f64]| -> f64 {
        roots.iter().zip(levels).take(used).map(|(r, l)| (r / l).ln().abs()).sum::<f64>() / used as f64
    };
    let best = sectors
        .iter()
        .zip(&first_levels)
        .min_by(|a, b| score(a.1).total_cmp(&score(b.1)))
        .map(|(m, _)| *m)
        .expect("n >= 1");
    Ok(SectorClass::Discrete(best))
}

/// Analytic and numeric classification side by side over a set of angles.
#[allow(clippy::type_complexity)]
pub fn sector_map_with(
    spec: &PotentialSpec,
    alphas: &[f64],
    params: &ShootingParams,
    exec: Exec,
) -> Vec<(f64, Result<SectorClass>, Result<SectorClass>)> {
    exec.map(alphas, |&a| {
        let analytic = classify_ray(spec, a);
        let numeric = Ray::new(a).and_then(|r| classify_ray_numeric_with(spec, &r, params, Exec::Sequential));
        (a, analytic, numeric)
    })
}

/// Numeric classification checked against the analytic one.
pub fn classify_ray_checked(spec: &PotentialSpec, ray: &Ray, params: &ShootingParams) -> Result<SectorClass> {
    let analytic = classify_ray(spec, ray.alpha)?;
    let numeric = classify_ray_numeric(spec, ray, params)?;
    if analytic != numeric {
        return Err(Error::ClassificationMismatch { analytic: analytic.to_string(), numeric: numeric.to_string() });
    }
    Ok(numeric)
}

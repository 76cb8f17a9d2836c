//! Actions of the stem orbits and Bohr-Sommerfeld levels.
//!
//! The action of a family is `S = 2 Re int pi dz` between its two turning
//! points along a contour deformed through the origin. For the pure potential
//! it scales as `S(E) = S(1) |E|^((2n+3)/(4n+2)) g^(-1/(2n+1))`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::classical::{self, family_turning_points, EnergySign, FamilyId};
use crate::error::{Error, Result};
use crate::ode::{self, Control, Options, Status};
use crate::potential::{hamilton_rhs, turning_points, PotentialSpec};
use crate::quadrature::{gamma, sqrt_one_minus_power_integral, GaussJacobi};
use crate::spectral::{Level, LevelMethod, SectorClass, SpectrumResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionMethod {
    /// Gamma-function formulas for `n = 1, 2`.
    ClosedForm,
    /// `S = 4 Re(z*) sqrt(2E) int_0^1 sqrt(1 - s^(2n+1)) ds`, the positive
    /// family pattern extended to every `n`.
    ExtendedClosedForm,
    /// Gauss-Jacobi quadrature along the deformed contour.
    Quadrature,
    /// `|int (p^2 - q^2) dt|` over one period of the integrated stem orbit.
    OrbitIntegral,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionResult {
    pub spec: PotentialSpec,
    pub family: FamilyId,
    pub energy: f64,
    pub action: f64,
    pub method: ActionMethod,
}

/// Exponent of `|E|` in the action of the pure potential.
pub fn action_exponent(n: u32) -> f64 {
    (2 * n + 3) as f64 / (4 * n + 2) as f64
}

fn coupling_factor(spec: &PotentialSpec) -> f64 {
    spec.g.powf(-1.0 / spec.power() as f64)
}

/// The printed Gamma-function actions for `n = 1, 2` at `g = 1`.
pub fn action_closed_form(n: u32, family: FamilyId, energy: f64) -> Result<ActionResult> {
    family.check(n)?;
    family.check_energy(energy)?;
    let e = energy.abs();
    let action = match n {
        1 => {
            let c = gamma(4.0 / 3.0) / gamma(11.0 / 6.0) * e.powf(5.0 / 6.0);
            match family.sign {
                EnergySign::Pos => (6.0 * PI).sqrt() * c,
                EnergySign::Neg => 3.0 * (2.0 * PI).sqrt() * c,
            }
        }
        2 => {
            let c = 2.0 * (2.0 * PI).sqrt() * gamma(1.2) / gamma(1.7) * e.powf(0.7);
            let s3 = (3.0 * PI / 10.0).sin();
            let s1 = (PI / 10.0).sin();
            let factor = match (family.sign, family.index) {
                (EnergySign::Pos, 0) => (3.0 * PI / 10.0).cos(),
                (EnergySign::Pos, _) => (PI / 10.0).cos(),
                (EnergySign::Neg, 0) => 1.0 + 2.0 * s3 + s1,
                (EnergySign::Neg, _) => 1.0 + s3,
            };
            c * factor
        }
        _ => {
            return Err(Error::Unsupported(format!(
                "closed forms exist for n = 1, 2 only; use action_numeric for n = {n}"
            )))
        }
    };
    Ok(ActionResult { spec: PotentialSpec::pure(n), family, energy, action, method: ActionMethod::ClosedForm })
}

/// Positive-family action for any `n` from the right turning point alone.
pub fn action_extended(spec: &PotentialSpec, family: FamilyId, energy: f64) -> Result<ActionResult> {
    if family.sign != EnergySign::Pos {
        return Err(Error::Unsupported("the extended closed form covers positive families only".into()));
    }
    let (right, _) = family_turning_points(spec, energy, family)?;
    let action = 4.0 * right.re * (2.0 * energy).sqrt() * sqrt_one_minus_power_integral(spec.power());
    Ok(ActionResult { spec: *spec, family, energy, action, method: ActionMethod::ExtendedClosedForm })
}

/// Best available action: printed closed form, then the extended form, then
/// the orbit integral.
pub fn action(spec: &PotentialSpec, family: FamilyId, energy: f64) -> Result<ActionResult> {
    spec.require_pure_odd()?;
    family.check(spec.n)?;
    family.check_energy(energy)?;
    if spec.n <= 2 {
        let mut r = action_closed_form(spec.n, family, energy)?;
        r.action *= coupling_factor(spec);
        r.spec = *spec;
        return Ok(r);
    }
    match family.sign {
        EnergySign::Pos => action_extended(spec, family, energy),
        EnergySign::Neg => action_numeric(spec, family, energy),
    }
}

enum Piece {
    /// From a turning point into the origin.
    Start(C64),
    /// Origin -> turning point -> origin around its cut.
    Excursion(C64),
    /// From the origin out to the final turning point.
    End(C64),
}

fn pick(points: &[C64], arg: f64) -> C64 {
    let w = C64::from_polar(1.0, arg);
    *points.iter().min_by(|a, b| (*a / a.norm() - w).norm().total_cmp(&(*b / b.norm() - w).norm())).expect("non-empty")
}

fn contour_plan(spec: &PotentialSpec, family: FamilyId, energy: f64) -> Result<Option<Vec<Piece>>> {
    let (right, left) = family_turning_points(spec, energy, family)?;
    if family.sign == EnergySign::Pos {
        return Ok(Some(vec![Piece::Start(right), Piece::End(left)]));
    }
    let pts = turning_points(spec, energy)?.points;
    let plan = match (spec.n, family.index) {
        (1, _) | (2, 1) => vec![Piece::Start(right), Piece::Excursion(pick(&pts, -PI / 2.0)), Piece::End(left)],
        (2, 0) => vec![
            Piece::Start(left),
            Piece::Excursion(pick(&pts, 7.0 * PI / 10.0)),
            Piece::Excursion(pick(&pts, -PI / 2.0)),
            Piece::Excursion(pick(&pts, 3.0 * PI / 10.0)),
            Piece::End(right),
        ],
        _ => return Ok(None),
    };
    Ok(Some(plan))
}

/// `int_0^w pi dz` along the straight segment, with `pi(0) = pi0` and the
/// branch carried by continuity. The square-root endpoint at `w` is absorbed
/// by the Jacobi weight.
fn leg_integral(
    spec: &PotentialSpec,
    energy: f64,
    w: C64,
    pi0: C64,
    others: &[C64],
    rule: &GaussJacobi,
) -> Result<C64> {
    for o in others {
        // Distance from the branch point to the segment [0, w].
        let t = ((o * w.conj()).re / w.norm_sqr()).clamp(0.0, 1.0);
        let d = (o - w * t).norm();
        if d < 1e-12 {
            return Err(Error::BranchPoint { distance: d });
        }
    }
    let momentum = |u: f64| (2.0 * (energy - spec.v(w * u))).sqrt();
    let mut us: Vec<(f64, Option<usize>)> = (1..2048).map(|i| (i as f64 / 2048.0, None)).collect();
    for (i, x) in rule.nodes.iter().enumerate() {
        us.push((0.5 * (1.0 + x), Some(i)));
    }
    us.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut prev = pi0;
    let mut total = C64::new(0.0, 0.0);
    for (u, node) in us {
        let mut r = momentum(u);
        if (r - prev).norm() > (r + prev).norm() {
            r = -r;
        }
        prev = r;
        if let Some(i) = node {
            total += rule.weights[i] * r / (1.0 - u).sqrt();
        }
    }
    // u = (1+x)/2: du = dx/2 and (1-u)^(1/2) = (1-x)^(1/2)/sqrt(2).
    Ok(w * total / (2.0 * 2f64.sqrt()))
}

/// Action by quadrature along the deformed contour, or by the orbit integral
/// where no contour rule is known (negative families with `n >= 3`).
pub fn action_numeric(spec: &PotentialSpec, family: FamilyId, energy: f64) -> Result<ActionResult> {
    spec.require_pure_odd()?;
    let Some(plan) = contour_plan(spec, family, energy)? else {
        return action_orbit_integral(spec, family, energy);
    };
    let pts = turning_points(spec, energy)?.points;
    let rule = GaussJacobi::new(64, 0.5, 0.0)?;
    let mut sigma = (C64::new(2.0 * energy, 0.0)).sqrt();
    let mut total = C64::new(0.0, 0.0);
    for piece in &plan {
        let (w, weight) = match piece {
            Piece::Start(w) => (*w, -1.0),
            Piece::Excursion(w) => (*w, 2.0),
            Piece::End(w) => (*w, 1.0),
        };
        let others: Vec<C64> = pts.iter().copied().filter(|p| (p - w).norm() > 1e-9).collect();
        total += weight * leg_integral(spec, energy, w, sigma, &others, &rule)?;
        if matches!(piece, Piece::Excursion(_)) {
            sigma = -sigma;
        }
    }
    Ok(ActionResult { spec: *spec, family, energy, action: (2.0 * total.re).abs(), method: ActionMethod::Quadrature })
}

/// `|int_0^T (p^2 - q^2) dt|` over one period of the stem orbit.
pub fn action_orbit_integral(spec: &PotentialSpec, family: FamilyId, energy: f64) -> Result<ActionResult> {
    let stem = classical::stem_trajectory(spec, energy, family)?;
    let period = stem.period().expect("stem orbits are closed");
    let start = stem.samples[0].pt.to_array();
    let y0 = [start[0], start[1], start[2], start[3], 0.0];
    let f = |_t: f64, s: &[f64; 5]| {
        let d = hamilton_rhs(spec, &[s[0], s[1], s[2], s[3]]);
        [d[0], d[1], d[2], d[3], s[2] * s[2] - s[3] * s[3]]
    };
    let opts = Options::new(1e-12).with_atol(1e-14);
    let out = ode::integrate(f, 0.0, y0, period, &opts, |_, _, _, _| Control::Continue);
    if out.status != Status::Completed {
        return Err(Error::NoConvergence(format!("orbit action integration ended with {:?}", out.status)));
    }
    Ok(ActionResult { spec: *spec, family, energy, action: out.y[4].abs(), method: ActionMethod::OrbitIntegral })
}

/// Period `T = dS/dE` from the power law, for families with a cheap action.
pub fn period_estimate(spec: &PotentialSpec, family: FamilyId, energy: f64) -> Result<f64> {
    spec.require_pure_odd()?;
    family.check(spec.n)?;
    family.check_energy(energy)?;
    let s = if spec.n <= 2 || family.sign == EnergySign::Pos {
        action(spec, family, energy)?.action
    } else {
        return Err(Error::Unsupported(format!("no cheap period estimate for {family} at n = {}", spec.n)));
    };
    Ok(action_exponent(spec.n) * s / energy.abs())
}

/// Range `(shortest, longest)` of estimated periods of the positive
/// families at energy `|E|`.
pub fn positive_period_range(spec: &PotentialSpec, energy: f64) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for m in 0..spec.n {
        let t = period_estimate(spec, FamilyId::pos(m), energy.abs())?;
        lo = lo.min(t);
        hi = hi.max(t);
    }
    Ok((lo, hi))
}

/// Energy of level `k` from `S(E_k) = pi (2k + 1)`.
pub fn level_energy(spec: &PotentialSpec, family: FamilyId, k: usize) -> Result<f64> {
    let s1 = action(spec, family, family.sign_f64())?.action;
    let target = PI * (2 * k + 1) as f64;
    Ok(family.sign_f64() * (target / s1).powf(1.0 / action_exponent(spec.n)))
}

/// Bohr-Sommerfeld levels `k = 0..=k_max` of one family, sorted by energy.
///
/// Negative families have no known boundary problem behind them; their
/// levels are predictions only and the result carries no classification.
pub fn semiclassical_levels(spec: &PotentialSpec, family: FamilyId, k_max: usize) -> Result<SpectrumResult> {
    spec.require_pure_odd()?;
    family.check(spec.n)?;
    let s1 = action(spec, family, family.sign_f64())?.action;
    let beta = action_exponent(spec.n);
    let mut levels: Vec<Level> = (0..=k_max)
        .map(|k| Level {
            k,
            energy: family.sign_f64() * (PI * (2 * k + 1) as f64 / s1).powf(1.0 / beta),
            method: LevelMethod::Semiclassical,
        })
        .collect();
    levels.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    let (classification, diagnostics) = match family.sign {
        EnergySign::Pos => (Some(SectorClass::Discrete(family.index)), Vec::new()),
        EnergySign::Neg => (None, vec![format!("{family}: prediction only, no boundary problem is known")]),
    };
    Ok(SpectrumResult { spec: *spec, ray: None, classification, levels, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn cubic_closed_forms() {
        let p = action_closed_form(1, FamilyId::pos(0), 1.0).unwrap().action;
        assert!((p - 4.1216).abs() < 1e-4, "{p}");
        for e in [0.5, 1.0, 64.0] {
            let p = action_closed_form(1, FamilyId::pos(0), e).unwrap().action;
            let m = action_closed_form(1, FamilyId::neg(0), -e).unwrap().action;
            assert!((m / p - 3f64.sqrt()).abs() < 1e-12);
        }
        assert!(action_closed_form(3, FamilyId::pos(0), 1.0).is_err());
        assert!(action_closed_form(1, FamilyId::pos(0), -1.0).is_err());
    }

    #[test]
    fn quintic_closed_forms_at_unit_energy() {
        let want = [
            (FamilyId::pos(1), 1.0, 4.8179),
            (FamilyId::pos(0), 1.0, 2.9776),
            (FamilyId::neg(0), -1.0, 14.828),
            (FamilyId::neg(1), -1.0, 9.1642),
        ];
        for (f, e, s) in want {
            let got = action_closed_form(2, f, e).unwrap().action;
            assert!((got - s).abs() < 1e-3, "{f}: {got}");
        }
    }

    #[test]
    fn quadrature_matches_closed_forms() {
        for n in 1..=2 {
            let spec = PotentialSpec::pure(n);
            for f in FamilyId::all(n) {
                for e in [1.0, 64.0] {
                    let e = f.sign_f64() * e;
                    let q = action_numeric(&spec, f, e).unwrap();
                    assert_eq!(q.method, ActionMethod::Quadrature);
                    let c = action_closed_form(n, f, e).unwrap().action;
                    assert!(rel(q.action, c) < 1e-6, "n={n} {f} E={e}: {} vs {c}", q.action);
                }
            }
        }
    }

    #[test]
    fn extended_form_matches_quadrature_for_higher_n() {
        for n in 1..=4 {
            let spec = PotentialSpec::pure(n);
            for m in 0..n {
                let f = FamilyId::pos(m);
                let a = action_extended(&spec, f, 2.0).unwrap().action;
                let b = action_numeric(&spec, f, 2.0).unwrap().action;
                assert!(rel(a, b) < 1e-8, "n={n} {f}");
            }
        }
    }

    #[test]
    fn orbit_integral_matches_closed_forms() {
        for (n, f, e) in [
            (1, FamilyId::pos(0), 1.0),
            (1, FamilyId::neg(0), -1.0),
            (2, FamilyId::neg(0), -1.0),
            (2, FamilyId::pos(1), 1.0),
        ] {
            let spec = PotentialSpec::pure(n);
            let a = action_orbit_integral(&spec, f, e).unwrap().action;
            let b = action_closed_form(n, f, e).unwrap().action;
            assert!(rel(a, b) < 1e-6, "n={n} {f}: {a} vs {b}");
        }
    }

    #[test]
    fn power_law_scaling() {
        for n in 1..=2 {
            let spec = PotentialSpec::pure(n);
            let beta = action_exponent(n);
            for f in FamilyId::all(n) {
                let s1 = action_numeric(&spec, f, f.sign_f64()).unwrap().action;
                let s2 = action_numeric(&spec, f, f.sign_f64() * 7.5).unwrap().action;
                assert!(rel(s2, s1 * 7.5f64.powf(beta)) < 1e-8, "n={n} {f}");
            }
        }
    }

    #[test]
    fn coupling_scaling() {
        let spec = PotentialSpec { g: 0.3, ..PotentialSpec::pure(2) };
        let a = action(&spec, FamilyId::pos(1), 2.0).unwrap().action;
        let b = action_numeric(&spec, FamilyId::pos(1), 2.0).unwrap().action;
        assert!(rel(a, b) < 1e-8);
    }

    #[test]
    fn table_semiclassical_rows() {
        let cases: [(u32, FamilyId, [f64; 4]); 3] = [
            (1, FamilyId::pos(0), [0.722, 2.698, 4.980, 7.458]),
            (2, FamilyId::pos(1), [0.543, 2.608, 5.410, 8.750]),
            (2, FamilyId::pos(0), [1.080, 5.186, 10.759, 17.400]),
        ];
        for (n, f, want) in cases {
            let r = semiclassical_levels(&PotentialSpec::pure(n), f, 3).unwrap();
            for (l, w) in r.levels.iter().zip(want) {
                assert!((l.energy - w).abs() < 1e-3, "n={n} {f}: {} vs {w}", l.energy);
            }
        }
    }

    #[test]
    fn negative_cubic_ground_level() {
        let r = semiclassical_levels(&PotentialSpec::pure(1), FamilyId::neg(0), 0).unwrap();
        let e0 = r.levels[0].energy;
        let printed = -(gamma(11.0 / 6.0) / gamma(4.0 / 3.0)).powf(1.2) * (PI / 18.0).powf(0.6);
        assert!((e0 - printed).abs() < 1e-12);
        assert!((e0 + 0.3735).abs() < 1e-3);
        assert!(!r.diagnostics.is_empty());
    }

    #[test]
    fn level_round_trip() {
        let spec = PotentialSpec::pure(2);
        for f in FamilyId::all(2) {
            let r = semiclassical_levels(&spec, f, 20).unwrap();
            for l in &r.levels {
                let s = action(&spec, f, l.energy).unwrap().action;
                assert!((s - PI * (2 * l.k + 1) as f64).abs() < 1e-10);
            }
            for w in r.levels.windows(2) {
                assert!(w[0].energy < w[1].energy);
            }
        }
    }

    #[test]
    fn down_family_has_smaller_action() {
        let spec = PotentialSpec::pure(2);
        let up = action(&spec, FamilyId::pos(1), 3.0).unwrap().action;
        let down = action(&spec, FamilyId::pos(0), 3.0).unwrap().action;
        assert!(down < up);
        for k in 0..5 {
            assert!(
                level_energy(&spec, FamilyId::pos(0), k).unwrap() > level_energy(&spec, FamilyId::pos(1), k).unwrap()
            );
        }
    }
}

//! Acceptance suite: one PASS/FAIL line per criterion.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use cryptospec::classical::{gauge_flow, integrate, reduced_gauge_dynamics, stem_trajectory, FamilyId};
use cryptospec::flow::{find_exceptional_point, perturbative_e0, ExceptionalPoint};
use cryptospec::oscillator::{build_constrained_matrices, dirac_kernel_state, double_factorial_ratio, kernel_residual};
use cryptospec::potential::split_hg;
use cryptospec::semiclassical::{action_closed_form, action_numeric, semiclassical_levels};
use cryptospec::spectral::{classify_ray, find_levels, sector_map_with, Ray, SectorClass, ShootingParams};
use cryptospec::{Exec, PhasePoint, PotentialSpec};

type Check = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn ok(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within(got: &[f64], want: &[f64], tol: f64) -> bool {
    got.len() >= want.len() && got.iter().zip(want).all(|(g, w)| (g - w).abs() <= tol)
}

fn fmt(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("[{}]", parts.join(", "))
}

fn table(n: u32, alpha: f64, e_max: f64, shoot: &[f64], wkb: &[f64], budget: Option<Duration>) -> Outcome {
    let t0 = Instant::now();
    let spec = PotentialSpec::pure(n);
    let ray = Ray::new(alpha).unwrap();
    let levels = match find_levels(&spec, &ray, e_max, &ShootingParams::default()) {
        Ok(r) => r.energies(),
        Err(e) => return ok(false, format!("shooting failed: {e}")),
    };
    let elapsed = t0.elapsed();
    let family = match classify_ray(&spec, alpha) {
        Ok(SectorClass::Discrete(m)) => FamilyId::pos(m),
        other => return ok(false, format!("ray not discrete: {other:?}")),
    };
    let sc = semiclassical_levels(&spec, family, shoot.len() - 1).unwrap().energies();
    let fast = budget.is_none_or(|b| elapsed <= b);
    ok(
        within(&levels, shoot, 5e-3) && within(&sc, wkb, 1e-3) && fast,
        format!("shooting {} semiclassical {} in {:.2?}", fmt(&levels), fmt(&sc), elapsed),
    )
}

fn criterion_1() -> Outcome {
    table(1, 0.0, 8.0, &[0.763, 2.711, 4.989, 7.465], &[0.722, 2.698, 4.980, 7.458], Some(Duration::from_secs(10)))
}

fn criterion_2() -> Outcome {
    table(2, 0.0, 9.0, &[0.710, 2.660, 5.458, 8.788], &[0.543, 2.608, 5.410, 8.750], None)
}

fn criterion_3() -> Outcome {
    table(2, -3.0 * PI / 14.0, 18.0, &[1.163, 5.234, 10.795, 17.428], &[1.080, 5.186, 10.759, 17.400], None)
}

fn criterion_4() -> Outcome {
    let t0 = Instant::now();
    let alpha = -3.0 * PI / 14.0;
    let first = find_exceptional_point(2, alpha, (0, 1), (0.02, 0.06));
    let second = find_exceptional_point(2, alpha, (3, 4), (0.004, 0.06));
    let elapsed = t0.elapsed();
    let (first, second): (ExceptionalPoint, ExceptionalPoint) = match (first, second) {
        (Ok(a), Ok(b)) => (a, b),
        (a, b) => return ok(false, format!("search failed: {:?} / {:?}", a.err(), b.err())),
    };
    let pass = (first.g_star - 0.03717).abs() <= 5e-4
        && (first.e_star - 0.484).abs() <= 5e-3
        && (second.g_star - 0.007).abs() <= 2e-3
        && (second.e_star - 1.37).abs() <= 3e-2
        && elapsed <= Duration::from_secs(300);
    ok(
        pass,
        format!(
            "g* = {:.5} E* = {:.4}; g** = {:.5} E** = {:.4} in {:.2?}",
            first.g_star, first.e_star, second.g_star, second.e_star, elapsed
        ),
    )
}

fn criterion_5() -> Outcome {
    let alphas: Vec<f64> = (0..72).map(|i| -PI + 2.0 * PI * i as f64 / 72.0).collect();
    let params = ShootingParams::default();
    let mut compared = 0;
    let mut mismatches = Vec::new();
    for n in [1, 2] {
        let spec = PotentialSpec::pure(n);
        for (alpha, analytic, numeric) in sector_map_with(&spec, &alphas, &params, Exec::default()) {
            let Ok(analytic) = analytic else { continue };
            compared += 1;
            if numeric.as_ref().ok() != Some(&analytic) {
                mismatches.push(format!("n={n} alpha={alpha:.4}: {analytic} vs {numeric:?}"));
            }
        }
    }
    let cubic = PotentialSpec::pure(1);
    let landmarks =
        [(0.0, SectorClass::Discrete(0)), (-PI / 2.0, SectorClass::Continuous), (PI / 2.0, SectorClass::Empty)];
    let landmarks_ok = landmarks.iter().all(|(a, c)| classify_ray(&cubic, *a).ok().as_ref() == Some(c));
    ok(
        mismatches.is_empty() && landmarks_ok && compared > 130,
        format!(
            "{compared} rays compared, {} mismatches {:?}, landmarks {}",
            mismatches.len(),
            mismatches,
            landmarks_ok
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in [1, 2] {
        let spec = PotentialSpec::pure(n);
        for family in FamilyId::all(n) {
            for mag in [1.0, 64.0] {
                let e = family.sign_f64() * mag;
                let num = action_numeric(&spec, family, e).unwrap().action;
                let exact = action_closed_form(n, family, e).unwrap().action;
                worst = worst.max(((num - exact) / exact).abs());
            }
        }
    }
    let plus = action_closed_form(1, FamilyId::pos(0), 1.0).unwrap().action;
    let minus = action_closed_form(1, FamilyId::neg(0), -1.0).unwrap().action;
    let ratio_err = (minus / plus - 3f64.sqrt()).abs();
    ok(
        worst <= 1e-6 && ratio_err <= 1e-10,
        format!("worst relative error {worst:.2e}, |S-/S+ - sqrt 3| = {ratio_err:.1e}"),
    )
}

fn criterion_7() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;

    let cases = [
        (1, FamilyId::pos(0), 1.0),
        (1, FamilyId::neg(0), -1.0),
        (2, FamilyId::pos(1), 5.0),
        (2, FamilyId::neg(0), -1.0),
    ];
    for (n, family, e) in cases {
        let spec = PotentialSpec::pure(n);
        match stem_trajectory(&spec, e, family) {
            Ok(t) if t.conserves() => {}
            Ok(t) => {
                pass = false;
                notes.push(format!("n={n} {family}: dH {:.1e} dG {:.1e}", t.max_dh, t.max_dg));
            }
            Err(err) => {
                pass = false;
                notes.push(format!("n={n} {family}: {err}"));
            }
        }
    }

    let cubic = PotentialSpec::pure(1);
    let runaway = integrate(&cubic, PhasePoint::new(0.0, 4.0, 0.0, 0.0), 50.0, 1e-10).unwrap();
    let up = runaway.samples.last().map(|s| s.pt.y > 0.0).unwrap_or(false);
    if !(runaway.is_runaway() && up) {
        pass = false;
        notes.push(format!("runaway start: {:?}", runaway.classification));
    }

    let stem = stem_trajectory(&cubic, 1.0, FamilyId::pos(0)).unwrap();
    let t_ref = stem.period().unwrap();
    let start = stem.samples[0].pt;
    let mut spread: f64 = 0.0;
    for alpha in [-0.3, -0.1, 0.15, 0.4] {
        let shifted = gauge_flow(&cubic, start, alpha).unwrap();
        let hg = split_hg(&cubic, &shifted).unwrap();
        let orbit = integrate(&cubic, shifted, 3.0 * t_ref, 1e-12).unwrap();
        match orbit.period() {
            Some(t) => spread = spread.max(((t - t_ref) / t_ref).abs()),
            None => {
                pass = false;
                notes.push(format!("alpha={alpha}: {:?} (H = {:.3})", orbit.classification, hg.H));
            }
        }
    }
    if spread > 1e-5 {
        pass = false;
    }

    let starts = [(0.0, 1.0), (1.0, 1.0), (0.0, -1.0), (0.5, 2.0), (-1.0, 0.7), (2.0, -3.0)];
    let mut reduced_ok = 0;
    for s in starts {
        match reduced_gauge_dynamics(s, 100.0) {
            Ok(t) if t.is_runaway() => reduced_ok += 1,
            other => notes.push(format!("reduced {s:?}: {:?}", other.map(|t| t.classification))),
        }
    }
    pass &= reduced_ok == starts.len();
    ok(
        pass,
        format!(
            "stems conserve, runaway from (0,4) upward, gauge period spread {spread:.1e}, reduced runaways {reduced_ok}/{} {notes:?}",
            starts.len()
        ),
    )
}

fn criterion_8() -> Outcome {
    let params = ShootingParams { ode_tol: 1e-12, refine_tol: 1e-13, ..ShootingParams::default() };
    let ray = Ray::new(0.0).unwrap();
    let residual = |g: f64| -> Option<f64> {
        let spec = PotentialSpec::mixed(2, g);
        let levels = find_levels(&spec, &ray, 1.0, &params).ok()?.energies();
        Some(levels.first()? - perturbative_e0(g).unwrap())
    };
    let (Some(r05), Some(r10), Some(r20)) = (residual(0.005), residual(0.01), residual(0.02)) else {
        return ok(false, "ground level not found");
    };
    let slope = (r20.abs() / r05.abs()).ln() / 4f64.ln();
    ok(
        r10.abs() <= 1e-3 && (slope - 4.0).abs() <= 1.0,
        format!("residuals {r05:.3e} / {r10:.3e} / {r20:.3e}, log-log slope {slope:.2}"),
    )
}

fn criterion_9() -> Outcome {
    let mats = build_constrained_matrices(24).unwrap();
    let spectrum_ok = (-5..=5).all(|d| {
        let block = mats.block(d);
        !block.is_empty() && block.iter().all(|&i| mats.h_diag[i] == d)
    });
    let state = dirac_kernel_state(0, 200).unwrap();
    let exact = state.rationals().is_some_and(|c| {
        c.iter().enumerate().all(|(j, v)| {
            if j % 2 == 1 {
                *v == num_rational::BigRational::from_integer(0.into())
            } else {
                *v == double_factorial_ratio(j / 2)
            }
        })
    });
    let mut worst_bulk: f64 = 0.0;
    let mut edge_max: f64 = 0.0;
    for d in -5..=5 {
        let r = kernel_residual(&mats, d).unwrap();
        let (edge, bulk) = r.split_last().unwrap();
        worst_bulk = bulk.iter().fold(worst_bulk, |m, v| m.max(v.abs()));
        edge_max = edge_max.max(edge.abs());
    }
    ok(
        spectrum_ok && exact && worst_bulk <= 1e-14,
        format!("blocks |d| <= 5 integer: {spectrum_ok}, exact coefficients: {exact}, bulk residual {worst_bulk:.1e}, largest edge component {edge_max:.2e}"),
    )
}

fn criterion_10() -> Outcome {
    ok(
        true,
        "excluded by scope: complex levels below g*, the Dirac problem for the cubic potential; pairs beyond (3,4) are flagged as extrapolation",
    )
}

fn main() {
    let criteria: [Check; 10] = [
        ("cubic levels (n=1, alpha=0)", criterion_1),
        ("quintic levels (n=2, alpha=0)", criterion_2),
        ("quintic levels (n=2, alpha=-3pi/14)", criterion_3),
        ("exceptional points", criterion_4),
        ("sector map", criterion_5),
        ("action cross-check", criterion_6),
        ("classical properties", criterion_7),
        ("perturbative consistency", criterion_8),
        ("oscillator analytics", criterion_9),
        ("out of scope items", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let out = check();
        let tag = if out.pass { "PASS" } else { "FAIL" };
        if !out.pass {
            failed += 1;
        }
        println!("{tag} {:>2} {name}: {} [{:.2?}]", i + 1, out.detail, t0.elapsed());
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

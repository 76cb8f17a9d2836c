//! Spectral flow of `(p^2 + x^2)/2 - g(ix)^(2n+1)` in the coupling `g` and
//! location of exceptional points where two real levels coalesce.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::potential::PotentialSpec;
use crate::spectral::{classify_ray, find_levels_with, golden_min, Ray, SectorClass, Shooter, ShootingParams};

/// Ratio of consecutive couplings on the tracking grid.
pub const G_RATIO: f64 = 0.92;

/// How many times an interval is halved before a drop is declared
/// unresolvable.
const MAX_REFINE: usize = 6;

/// Relative width of the final coupling bracket of an exceptional point.
pub const EP_REL_TOL: f64 = 1e-5;

/// Ground level of the mixed quintic potential to second order in `g`.
pub fn perturbative_e0(g: f64) -> Result<f64> {
    if !(g >= 0.0 && g.is_finite()) {
        return Err(Error::InvalidParameter(format!("g must be >= 0, got {g}")));
    }
    Ok(0.5 + 449.0 * g * g / 32.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coalescence {
    /// Last coupling on the grid where both levels are real.
    pub g_above: f64,
    /// First coupling on the grid where both are gone.
    pub g_below: f64,
    /// Indices of the two levels at `g_above`.
    pub pair: (usize, usize),
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowCurve {
    pub n: u32,
    pub ray: Ray,
    pub e_max: f64,
    /// Decreasing couplings.
    pub g_values: Vec<f64>,
    /// Ordered real levels below `e_max` at each coupling.
    pub levels: Vec<Vec<f64>>,
    /// `links[i][a] = Some(b)`: level `a` at `g_values[i]` continues as level
    /// `b` at `g_values[i + 1]`.
    pub links: Vec<Vec<Option<usize>>>,
    pub candidates: Vec<Coalescence>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalPoint {
    pub g_star: f64,
    pub e_star: f64,
    /// Level indices, counted at the upper end of the search bracket.
    pub pair: (usize, usize),
    /// Final coupling bracket `(below, above)`.
    pub g_bracket: (f64, f64),
    /// Set for pairs beyond the two coalescences the model is known to show.
    pub extrapolation: bool,
}

/// Nearest-neighbour pairing between two level lists. A link is refused when
/// the jump exceeds three times the local level spacing.
pub fn pair_levels(from: &[f64], to: &[f64], e_max: f64) -> Vec<Option<usize>> {
    let spacing = |i: usize| {
        let mut s = e_max;
        if i > 0 {
            s = s.min(from[i] - from[i - 1]);
        }
        if i + 1 < from.len() {
            s = s.min(from[i + 1] - from[i]);
        }
        s
    };
    let mut cands: Vec<(f64, usize, usize)> = Vec::new();
    for (i, &a) in from.iter().enumerate() {
        for (j, &b) in to.iter().enumerate() {
            let d = (a - b).abs();
            if d <= 3.0 * spacing(i) {
                cands.push((d, i, j));
            }
        }
    }
    cands.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut links = vec![None; from.len()];
    let mut used = vec![false; to.len()];
    for (_, i, j) in cands {
        if links[i].is_none() && !used[j] {
            links[i] = Some(j);
            used[j] = true;
        }
    }
    links
}

fn check_discrete(n: u32, ray: &Ray, g: f64) -> Result<PotentialSpec> {
    let spec = PotentialSpec::mixed(n, g);
    spec.require_odd()?;
    match classify_ray(&spec, ray.alpha)? {
        SectorClass::Discrete(_) => Ok(spec),
        c => Err(Error::NotDiscrete(c.to_string())),
    }
}

fn levels_at(n: u32, ray: &Ray, g: f64, e_max: f64, params: &ShootingParams, exec: Exec) -> Result<Vec<f64>> {
    let spec = PotentialSpec::mixed(n, g);
    Ok(find_levels_with(&spec, ray, e_max, params, exec)?.energies())
}

/// Smallest ceiling (grown geometrically) that holds `count` levels.
fn ceiling_for(
    n: u32,
    ray: &Ray,
    g: f64,
    count: usize,
    params: &ShootingParams,
    exec: Exec,
) -> Result<(f64, Vec<f64>)> {
    let mut e_max = count as f64 + 1.0;
    loop {
        let levels = levels_at(n, ray, g, e_max, params, exec)?;
        if levels.len() >= count {
            return Ok((e_max, levels));
        }
        if e_max > 1e3 {
            return Err(Error::NoConvergence(format!("fewer than {count} real levels below E = {e_max} at g = {g}")));
        }
        e_max *= 1.5;
    }
}

fn geometric_grid(g_hi: f64, g_lo: f64) -> Vec<f64> {
    let mut gs = vec![g_hi];
    let mut g = g_hi * G_RATIO;
    while g > g_lo * (1.0 + 1e-12) {
        gs.push(g);
        g *= G_RATIO;
    }
    gs.push(g_lo);
    gs
}

/// Levels that vanish between two couplings, ignoring those close enough to
/// the ceiling to have left through it.
fn vanished(from: &[f64], links: &[Option<usize>], e_max: f64) -> Vec<usize> {
    let top = from.len().saturating_sub(1);
    let margin = if from.len() >= 2 { from[top] - from[top - 1] } else { 0.1 * e_max };
    (0..from.len()).filter(|&i| links[i].is_none() && from[i] < e_max - margin).collect()
}

/// Levels on a geometric grid from `g_from` down to `g_to`, linked across
/// adjacent couplings.
pub fn spectral_flow(n: u32, alpha: f64, g_from: f64, g_to: f64, n_levels: usize) -> Result<FlowCurve> {
    spectral_flow_with(n, alpha, g_from, g_to, n_levels, &ShootingParams::default(), Exec::default())
}

pub fn spectral_flow_with(
    n: u32,
    alpha: f64,
    g_from: f64,
    g_to: f64,
    n_levels: usize,
    params: &ShootingParams,
    exec: Exec,
) -> Result<FlowCurve> {
    if !(g_from > g_to && g_to > 0.0 && g_from.is_finite()) {
        return Err(Error::InvalidParameter(format!("need g_from > g_to > 0, got {g_from}, {g_to}")));
    }
    if n_levels == 0 {
        return Err(Error::InvalidParameter("n_levels must be >= 1".into()));
    }
    let ray = Ray::new(alpha)?;
    check_discrete(n, &ray, g_from)?;
    let (e_max, _) = ceiling_for(n, &ray, g_from, n_levels, params, exec)?;
    let mut g_values = geometric_grid(g_from, g_to);
    let mut levels: Vec<Vec<f64>> = exec
        .map(&g_values, |&g| levels_at(n, &ray, g, e_max, params, Exec::Sequential))
        .into_iter()
        .collect::<Result<_>>()?;
    let mut diagnostics = Vec::new();
    let mut i = 0;
    let mut depth = vec![0usize; g_values.len()];
    while i + 1 < g_values.len() {
        let links = pair_levels(&levels[i], &levels[i + 1], e_max);
        let gone = vanished(&levels[i], &links, e_max);
        if gone.len() % 2 == 1 {
            if depth[i] >= MAX_REFINE {
                return Err(Error::GridTooCoarse { g_hi: g_values[i], g_lo: g_values[i + 1] });
            }
            let mid = (g_values[i] * g_values[i + 1]).sqrt();
            let lv = levels_at(n, &ray, mid, e_max, params, exec)?;
            g_values.insert(i + 1, mid);
            levels.insert(i + 1, lv);
            let d = depth[i] + 1;
            depth[i] = d;
            depth.insert(i + 1, d);
            continue;
        }
        i += 1;
    }
    let mut links = Vec::new();
    let mut candidates = Vec::new();
    for i in 0..g_values.len() - 1 {
        let l = pair_levels(&levels[i], &levels[i + 1], e_max);
        let gone = vanished(&levels[i], &l, e_max);
        for w in gone.windows(2) {
            if w[1] == w[0] + 1 {
                candidates.push(Coalescence {
                    g_above: g_values[i],
                    g_below: g_values[i + 1],
                    pair: (w[0], w[1]),
                    energy: 0.5 * (levels[i][w[0]] + levels[i][w[1]]),
                });
            }
        }
        if gone.len() == 2 && gone[1] != gone[0] + 1 {
            diagnostics.push(format!(
                "non-adjacent levels {gone:?} vanish between g = {} and {}",
                g_values[i],
                g_values[i + 1]
            ));
        }
        links.push(l);
    }
    Ok(FlowCurve { n, ray, e_max, g_values, levels, links, candidates, diagnostics })
}

/// Energy window that holds exactly the pair `(a, b)` of `levels`.
fn pair_window(levels: &[f64], a: usize, b: usize) -> (f64, f64) {
    let gap = levels[b] - levels[a];
    let lo = if a > 0 { levels[a] - 0.5 * (levels[a] - levels[a - 1]) } else { levels[a] - 0.5 * gap.max(0.1) };
    let hi = if b + 1 < levels.len() {
        levels[b] + 0.5 * (levels[b + 1] - levels[b])
    } else {
        levels[b] + 0.5 * gap.max(0.1)
    };
    (lo.max(1e-6), hi)
}

/// Whether the mismatch has two real roots in `window` at coupling `g`,
/// together with the location of the extremum between them.
fn two_roots(n: u32, ray: &Ray, g: f64, window: (f64, f64), params: &ShootingParams) -> Result<(bool, f64, f64)> {
    let spec = PotentialSpec::mixed(n, g);
    let shooter = Shooter::new(&spec, ray, window.1, params)?;
    let samples = 24;
    let es: Vec<f64> = (0..=samples).map(|i| window.0 + (window.1 - window.0) * i as f64 / samples as f64).collect();
    let vals: Vec<f64> = es.iter().map(|&e| shooter.bounded(e)).collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::NoConvergence(format!("shooting failed inside the window at g = {g}")));
    }
    let changes = vals.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
    if changes > 2 {
        return Err(Error::NonMonotone(format!("{changes} roots in the tracked window at g = {g}")));
    }
    let edge = vals[0].signum();
    if vals[samples].signum() != edge {
        return Err(Error::NonMonotone(format!("odd root count in the tracked window at g = {g}")));
    }
    let i = (0..=samples).min_by(|&x, &y| (edge * vals[x]).total_cmp(&(edge * vals[y]))).expect("non-empty");
    let lo = es[i.saturating_sub(1)];
    let hi = es[(i + 1).min(samples)];
    let (e_ext, v) = golden_min(|e| edge * shooter.bounded(e), lo, hi, 1e-10);
    Ok((v < 0.0 || changes == 2, e_ext, v.abs()))
}

/// Coupling at which levels `pair` (indexed at `g_bracket.1`) coalesce.
pub fn find_exceptional_point(
    n: u32,
    alpha: f64,
    pair: (usize, usize),
    g_bracket: (f64, f64),
) -> Result<ExceptionalPoint> {
    find_exceptional_point_with(n, alpha, pair, g_bracket, &ShootingParams::default(), Exec::default())
}

pub fn find_exceptional_point_with(
    n: u32,
    alpha: f64,
    pair: (usize, usize),
    g_bracket: (f64, f64),
    params: &ShootingParams,
    exec: Exec,
) -> Result<ExceptionalPoint> {
    let (g_lo, g_hi) = g_bracket;
    if !(g_hi > g_lo && g_lo > 0.0 && g_hi.is_finite()) {
        return Err(Error::InvalidParameter(format!("need g_hi > g_lo > 0, got {g_bracket:?}")));
    }
    let (a, b) = pair;
    if b <= a {
        return Err(Error::InvalidParameter(format!("pair must be increasing, got {pair:?}")));
    }
    let ray = Ray::new(alpha)?;
    check_discrete(n, &ray, g_hi)?;
    let (e_top, top_levels) = ceiling_for(n, &ray, g_hi, b + 1, params, exec)?;
    let e_max = (1.5 * top_levels[b] + 1.0).max(e_top);

    // Follow the labels down the grid until both disappear together.
    let mut gs = geometric_grid(g_hi, g_lo);
    let mut levels: Vec<Vec<f64>> = exec
        .map(&gs, |&g| levels_at(n, &ray, g, e_max, params, Exec::Sequential))
        .into_iter()
        .collect::<Result<_>>()?;
    if levels[0].len() <= b {
        return Err(Error::Bracket(format!("levels {pair:?} are not both real at g = {g_hi}")));
    }
    let (mut la, mut lb) = (a, b);
    let mut i = 0;
    let mut depth = 0;
    let found = loop {
        if i + 1 >= gs.len() {
            break None;
        }
        let links = pair_levels(&levels[i], &levels[i + 1], e_max);
        match (links[la], links[lb]) {
            (Some(na), Some(nb)) => {
                la = na;
                lb = nb;
                i += 1;
                depth = 0;
            }
            (None, None) => break Some(i),
            _ => {
                if depth >= MAX_REFINE {
                    return Err(Error::GridTooCoarse { g_hi: gs[i], g_lo: gs[i + 1] });
                }
                let mid = (gs[i] * gs[i + 1]).sqrt();
                let lv = levels_at(n, &ray, mid, e_max, params, exec)?;
                gs.insert(i + 1, mid);
                levels.insert(i + 1, lv);
                depth += 1;
            }
        }
    };
    let Some(i) = found else {
        return Err(Error::Bracket(format!("levels {pair:?} are still real at g = {g_lo}")));
    };
    if lb != la + 1 {
        return Err(Error::NonMonotone(format!("levels {pair:?} are not adjacent when they vanish")));
    }

    let window = pair_window(&levels[i], la, lb);
    let (mut above, mut below) = (gs[i], gs[i + 1]);
    if !two_roots(n, &ray, above, window, params)?.0 {
        return Err(Error::NonMonotone(format!("pair not resolved in its window at g = {above}")));
    }
    if two_roots(n, &ray, below, window, params)?.0 {
        return Err(Error::NonMonotone(format!("two roots persist in the window at g = {below}")));
    }
    while (above - below) / above > EP_REL_TOL {
        let mid = 0.5 * (above + below);
        if two_roots(n, &ray, mid, window, params)?.0 {
            above = mid;
        } else {
            below = mid;
        }
    }
    let g_star = 0.5 * (above + below);
    let (_, e_star, _) = two_roots(n, &ray, g_star, window, params)?;
    Ok(ExceptionalPoint { g_star, e_star, pair, g_bracket: (below, above), extrapolation: a > 3 })
}

/// Number of real levels in `window` at coupling `g`.
pub fn count_levels_in(n: u32, alpha: f64, g: f64, window: (f64, f64), params: &ShootingParams) -> Result<usize> {
    let ray = Ray::new(alpha)?;
    let levels = levels_at(n, &ray, g, window.1, params, Exec::default())?;
    Ok(levels.iter().filter(|&&e| e >= window.0).count())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perturbative_values() {
        assert_eq!(perturbative_e0(0.0).unwrap(), 0.5);
        assert!((perturbative_e0(0.1).unwrap() - 0.6403125).abs() < 1e-15);
        assert!((perturbative_e0(0.01).unwrap() - 0.5014031250).abs() < 1e-15);
        assert!(perturbative_e0(-1.0).is_err());
    }

    #[test]
    fn pairing_guard() {
        let links = pair_levels(&[1.0, 2.0, 3.0], &[1.05, 2.1], 10.0);
        assert_eq!(links, vec![Some(0), Some(1), None]);
        let links = pair_levels(&[1.0, 1.1], &[5.0], 10.0);
        assert_eq!(links, vec![None, None]);
    }

    #[test]
    fn grid_is_geometric() {
        let g = geometric_grid(0.1, 0.05);
        assert_eq!(g[0], 0.1);
        assert_eq!(*g.last().unwrap(), 0.05);
        assert!((g[1] / g[0] - G_RATIO).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_brackets() {
        assert!(spectral_flow(2, 0.0, 0.01, 0.1, 3).is_err());
        assert!(find_exceptional_point(2, 0.0, (1, 0), (0.01, 0.02)).is_err());
    }
}

//! Exact results for the complexified oscillator `H + iG = (pi^2 + z^2)/2`.
//!
//! With `a = (x + ip)/sqrt(2)` and `b = (y + iq)/sqrt(2)` the two parts are
//! `H = a^+ a - b^+ b` and `G = ab + a^+ b^+`. `G` preserves the mode-number
//! difference `d = n - m`, so the constrained problem splits into blocks.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::PhasePoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OscQuantization {
    /// Gauge `y = 0`: the ordinary oscillator, `E_k = k + 1/2`.
    RealAxisGauge,
    /// Gauge `x = 0`: an inverted-sign oscillator, `E_k = -k - 1/2`.
    ImagAxisGauge,
    /// `G Psi = 0` imposed on states: `E_k = k` for every integer `k`.
    DiracConstraint,
}

pub fn osc_spectrum(mode: OscQuantization, k: i64) -> Result<f64> {
    match mode {
        OscQuantization::RealAxisGauge | OscQuantization::ImagAxisGauge if k < 0 => {
            Err(Error::InvalidParameter(format!("gauge-fixed spectra are indexed by k >= 0, got {k}")))
        }
        OscQuantization::RealAxisGauge => Ok(k as f64 + 0.5),
        OscQuantization::ImagAxisGauge => Ok(-(k as f64) - 0.5),
        OscQuantization::DiracConstraint => Ok(k as f64),
    }
}

/// A real number `sign * sqrt(square)` with `square` an exact rational.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SqrtRational {
    pub sign: i8,
    pub square: BigRational,
}

impl SqrtRational {
    pub fn zero() -> Self {
        SqrtRational { sign: 0, square: BigRational::zero() }
    }

    pub fn one() -> Self {
        SqrtRational { sign: 1, square: BigRational::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// The exact rational value when both parts of `square` are perfect
    /// squares.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.sign == 0 {
            return Some(BigRational::zero());
        }
        let root = |v: &BigInt| {
            let r = v.sqrt();
            (&r * &r == *v).then_some(r)
        };
        let num = root(self.square.numer())?;
        let den = root(self.square.denom())?;
        let v = BigRational::new(num, den);
        Some(if self.sign < 0 { -v } else { v })
    }

    pub fn to_f64(&self) -> f64 {
        if self.sign == 0 {
            return 0.0;
        }
        // Split the ratio to keep large numerators and denominators in range.
        let n = self.square.numer();
        let d = self.square.denom();
        let shift = (n.bits().max(d.bits()) as i64 - 900).max(0) as usize;
        let nf = (n >> shift).to_f64().unwrap_or(f64::INFINITY);
        let df = (d >> shift).to_f64().unwrap_or(f64::INFINITY);
        self.sign as f64 * (nf / df).sqrt()
    }
}

impl Serialize for SqrtRational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.to_f64())
    }
}

/// Kernel vector `sum_j c_j |j + d, j>` (or `|j, j + |d|>` for `d < 0`) of `G`.
#[derive(Debug, Clone, Serialize)]
pub struct KernelState {
    /// Mode-number difference, which is also the `H` eigenvalue of the block.
    pub energy: i64,
    pub coefficients: Vec<SqrtRational>,
}

impl KernelState {
    pub fn to_f64(&self) -> Vec<f64> {
        self.coefficients.iter().map(SqrtRational::to_f64).collect()
    }

    /// Coefficients as exact rationals where they are rational (always the
    /// case for `d = 0`).
    pub fn rationals(&self) -> Option<Vec<BigRational>> {
        self.coefficients.iter().map(SqrtRational::as_rational).collect()
    }
}

/// Solves `G psi = 0` in the block of fixed `d` with `c_0 = 1`:
/// `c_(j+1) sqrt((j+1+|d|)(j+1)) + c_(j-1) sqrt((j+|d|) j) = 0`.
pub fn dirac_kernel_state(d: i64, j_max: usize) -> Result<KernelState> {
    if j_max < 2 {
        return Err(Error::InvalidParameter(format!("j_max must be >= 2, got {j_max}")));
    }
    let a = d.unsigned_abs() as i64;
    let mut c = vec![SqrtRational::zero(); j_max + 1];
    c[0] = SqrtRational::one();
    for j in 1..j_max {
        let prev = &c[j - 1];
        if prev.is_zero() {
            continue;
        }
        let jj = j as i64;
        let ratio = BigRational::new(BigInt::from((jj + a) * jj), BigInt::from((jj + 1 + a) * (jj + 1)));
        c[j + 1] = SqrtRational { sign: -prev.sign, square: &prev.square * ratio };
    }
    Ok(KernelState { energy: d, coefficients: c })
}

/// `c_(2k) = (-1)^k (2k-1)!! / (2k)!!` as an exact rational.
pub fn double_factorial_ratio(k: usize) -> BigRational {
    let mut v = BigRational::one();
    for i in 1..=k {
        v *= BigRational::new(BigInt::from(2 * i as i64 - 1), BigInt::from(2 * i as i64));
    }
    if k % 2 == 1 {
        -v
    } else {
        v
    }
}

/// Truncated two-mode basis `|n, m>`, `0 <= n, m <= N`.
#[derive(Debug, Clone, Serialize)]
pub struct ConstrainedMatrices {
    pub n_max: usize,
    /// Diagonal of `H`: the integer `n - m`.
    pub h_diag: Vec<i64>,
    /// Non-zero entries `(row, col, value^2)` of `G`; every entry is
    /// `sqrt` of an integer.
    pub g_entries: Vec<(usize, usize, u64)>,
}

impl ConstrainedMatrices {
    pub fn dim(&self) -> usize {
        (self.n_max + 1) * (self.n_max + 1)
    }

    pub fn index(&self, n: usize, m: usize) -> usize {
        n * (self.n_max + 1) + m
    }

    pub fn state(&self, idx: usize) -> (usize, usize) {
        (idx / (self.n_max + 1), idx % (self.n_max + 1))
    }

    pub fn g_dense(&self) -> Vec<Vec<f64>> {
        let dim = self.dim();
        let mut g = vec![vec![0.0; dim]; dim];
        for &(r, c, sq) in &self.g_entries {
            g[r][c] = (sq as f64).sqrt();
        }
        g
    }

    pub fn h_dense(&self) -> Vec<Vec<f64>> {
        let dim = self.dim();
        let mut h = vec![vec![0.0; dim]; dim];
        for (i, &v) in self.h_diag.iter().enumerate() {
            h[i][i] = v as f64;
        }
        h
    }

    pub fn apply_g(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for &(r, c, sq) in &self.g_entries {
            out[r] += (sq as f64).sqrt() * v[c];
        }
        out
    }

    /// `[H, G]` entry by entry in exact integer arithmetic, returned as
    /// `(row, col, (h_r - h_c)^2 * G_rc^2)` for every non-zero entry.
    pub fn commutator_nonzero(&self) -> Vec<(usize, usize, u64)> {
        self.g_entries
            .iter()
            .filter_map(|&(r, c, sq)| {
                let dh = self.h_diag[r] - self.h_diag[c];
                (dh != 0).then(|| (r, c, (dh * dh) as u64 * sq))
            })
            .collect()
    }

    /// Basis indices of the block with `n - m = d`, ordered by `min(n, m)`.
    pub fn block(&self, d: i64) -> Vec<usize> {
        let a = d.unsigned_abs() as usize;
        (0..=self.n_max)
            .filter(|j| j + a <= self.n_max)
            .map(|j| if d >= 0 { self.index(j + a, j) } else { self.index(j, j + a) })
            .collect()
    }
}

/// `H = n - m` and `G = ab + a^+ b^+` on the truncated two-mode basis.
pub fn build_constrained_matrices(n_max: usize) -> Result<ConstrainedMatrices> {
    if n_max < 2 {
        return Err(Error::InvalidParameter(format!("N must be >= 2, got {n_max}")));
    }
    let mut mats = ConstrainedMatrices { n_max, h_diag: Vec::new(), g_entries: Vec::new() };
    mats.h_diag = (0..mats.dim())
        .map(|i| {
            let (n, m) = mats.state(i);
            n as i64 - m as i64
        })
        .collect();
    for n in 0..=n_max {
        for m in 0..=n_max {
            let col = mats.index(n, m);
            // ab |n, m> = sqrt(nm) |n-1, m-1>
            if n > 0 && m > 0 {
                mats.g_entries.push((mats.index(n - 1, m - 1), col, (n * m) as u64));
            }
            // a^+ b^+ |n, m> = sqrt((n+1)(m+1)) |n+1, m+1>
            if n < n_max && m < n_max {
                mats.g_entries.push((mats.index(n + 1, m + 1), col, ((n + 1) * (m + 1)) as u64));
            }
        }
    }
    mats.g_entries.sort();
    Ok(mats)
}

/// `G` applied to the truncated kernel state of block `d`, one component per
/// block element. Only the last component (the truncation edge) survives.
pub fn kernel_residual(mats: &ConstrainedMatrices, d: i64) -> Result<Vec<f64>> {
    let block = mats.block(d);
    let state = dirac_kernel_state(d, block.len().max(3) - 1)?;
    let mut v = vec![0.0; mats.dim()];
    for (idx, c) in block.iter().zip(&state.coefficients) {
        v[*idx] = c.to_f64();
    }
    let gv = mats.apply_g(&v);
    Ok(block.iter().map(|&i| gv[i]).collect())
}

/// `AB cos(phi_1 - phi_2)` for the oscillator orbit through `pt`, where
/// `x = A cos(t + phi_1)` and `y = B cos(t + phi_2)`.
pub fn ab_constraint(pt: &PhasePoint) -> f64 {
    let (a, phi1) = (pt.x.hypot(pt.p), (-pt.p).atan2(pt.x));
    let (b, phi2) = (pt.y.hypot(pt.q), pt.q.atan2(pt.y));
    a * b * (phi1 - phi2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{split_hg, PotentialSpec};

    #[test]
    fn spectra() {
        assert_eq!(osc_spectrum(OscQuantization::RealAxisGauge, 0).unwrap(), 0.5);
        assert_eq!(osc_spectrum(OscQuantization::ImagAxisGauge, 1).unwrap(), -1.5);
        assert_eq!(osc_spectrum(OscQuantization::DiracConstraint, -3).unwrap(), -3.0);
        assert!(osc_spectrum(OscQuantization::RealAxisGauge, -1).is_err());
    }

    #[test]
    fn zero_block_coefficients_are_double_factorial_ratios() {
        let s = dirac_kernel_state(0, 200).unwrap();
        let r = s.rationals().expect("rational for d = 0");
        let first: Vec<BigRational> = [(1, 1), (-1, 2), (3, 8), (-5, 16)]
            .iter()
            .map(|&(a, b)| BigRational::new(BigInt::from(a), BigInt::from(b)))
            .collect();
        for (k, want) in first.iter().enumerate() {
            assert_eq!(&r[2 * k], want);
        }
        for k in 0..=100 {
            assert_eq!(r[2 * k], double_factorial_ratio(k));
            if 2 * k < 200 {
                assert!(r[2 * k + 1].is_zero());
            }
        }
        // Exact recurrence (j+1) c_(j+1) + j c_(j-1) = 0.
        for j in 1..200 {
            let lhs = &r[j + 1] * BigInt::from(j as i64 + 1) + &r[j - 1] * BigInt::from(j as i64);
            assert!(lhs.is_zero());
        }
    }

    #[test]
    fn coefficient_asymptotics() {
        let s = dirac_kernel_state(0, 200).unwrap();
        let c = s.to_f64();
        let k = 50.0;
        let want = 1.0 / (std::f64::consts::PI * k).sqrt();
        assert!((c[100].abs() / want - 1.0).abs() < 0.02);
        for k in 4..=100 {
            let v = c[2 * k].powi(2) * k as f64;
            assert!(v > 0.25 && v < 0.4, "k={k}: {v}");
        }
    }

    #[test]
    fn kernel_residual_sits_on_the_edge() {
        for n in [9usize, 10, 15] {
            let m = build_constrained_matrices(n).unwrap();
            for d in -5i64..=5 {
                let r = kernel_residual(&m, d).unwrap();
                let last = r.len() - 1;
                for (i, v) in r.iter().enumerate() {
                    if i != last {
                        assert!(v.abs() < 1e-14, "N={n} d={d} i={i}: {v}");
                    }
                }
            }
        }
        let m = build_constrained_matrices(9).unwrap();
        let r = kernel_residual(&m, 0).unwrap();
        assert!(r[9].abs() > 0.1);
    }

    #[test]
    fn commutator_vanishes_exactly() {
        let m = build_constrained_matrices(6).unwrap();
        assert!(m.commutator_nonzero().is_empty());
        let (h, g) = (m.h_dense(), m.g_dense());
        let dim = m.dim();
        for i in 0..dim {
            for j in 0..dim {
                let hg: f64 = (0..dim).map(|k| h[i][k] * g[k][j]).sum();
                let gh: f64 = (0..dim).map(|k| g[i][k] * h[k][j]).sum();
                assert_eq!(hg - gh, 0.0);
            }
        }
    }

    #[test]
    fn h_blocks_have_single_eigenvalue() {
        let m = build_constrained_matrices(2).unwrap();
        let mut vals = m.h_diag.clone();
        vals.sort();
        vals.dedup();
        assert_eq!(vals, vec![-2, -1, 0, 1, 2]);
        let m = build_constrained_matrices(8).unwrap();
        for d in -5i64..=5 {
            assert!(m.block(d).iter().all(|&i| m.h_diag[i] == d));
        }
    }

    #[test]
    fn g_matches_classical_form() {
        // G = xy - pq for the oscillator.
        let s = PotentialSpec::harmonic();
        let pt = PhasePoint::new(0.4, -1.1, 0.9, 0.3);
        let g = split_hg(&s, &pt).unwrap().G;
        assert!((ab_constraint(&pt) - g).abs() < 1e-14);
    }

    #[test]
    fn rational_detection() {
        let s = dirac_kernel_state(1, 6).unwrap();
        // c_2 = -sqrt(1*2/(3*2)) = -1/sqrt(3): not rational.
        assert!(s.coefficients[2].as_rational().is_none());
        assert!((s.coefficients[2].to_f64() + 1.0 / 3f64.sqrt()).abs() < 1e-15);
    }
}

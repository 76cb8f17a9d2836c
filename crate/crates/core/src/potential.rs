//! Potential evaluation, the real/imaginary split of the complex Hamiltonian,
//! turning points and Stokes geometry.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    /// `-(iz)^(2n+1)`
    Odd,
    /// `-(iz)^(2n)`, sector classification only.
    Even,
}

/// Which member of the potential family is meant.
///
/// `V(z) = [oscillator] z^2/2 - g (iz)^k` with `k = 2n+1` for odd parity and
/// `k = 2n` for even parity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub n: u32,
    pub g: f64,
    pub oscillator: bool,
    pub parity: Parity,
}

impl PotentialSpec {
    pub fn new(n: u32, g: f64, oscillator: bool, parity: Parity) -> Result<Self> {
        let spec = PotentialSpec { n, g, oscillator, parity };
        spec.validate()?;
        Ok(spec)
    }

    /// Canonical pure potential `-(iz)^(2n+1)` with `g = 1`.
    pub fn pure(n: u32) -> Self {
        PotentialSpec { n, g: 1.0, oscillator: false, parity: Parity::Odd }
    }

    /// Mixed potential `z^2/2 - g(iz)^(2n+1)`.
    pub fn mixed(n: u32, g: f64) -> Self {
        PotentialSpec { n, g, oscillator: true, parity: Parity::Odd }
    }

    /// The complexified harmonic oscillator `z^2/2`.
    pub fn harmonic() -> Self {
        PotentialSpec { n: 1, g: 0.0, oscillator: true, parity: Parity::Odd }
    }

    /// Even-power family `-(iz)^(2n)`, usable for sector counting only.
    pub fn even(n: u32) -> Self {
        PotentialSpec { n, g: 1.0, oscillator: false, parity: Parity::Even }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidParameter(format!("n must be >= 1, got {}", self.n)));
        }
        if !self.g.is_finite() || self.g < 0.0 {
            return Err(Error::InvalidParameter(format!("g must be finite and >= 0, got {}", self.g)));
        }
        if !self.oscillator && self.g == 0.0 {
            return Err(Error::InvalidParameter("pure potential needs g > 0".into()));
        }
        Ok(())
    }

    /// Exponent of `(iz)`.
    pub fn power(&self) -> u32 {
        match self.parity {
            Parity::Odd => 2 * self.n + 1,
            Parity::Even => 2 * self.n,
        }
    }

    pub fn is_pure(&self) -> bool {
        !self.oscillator
    }

    pub(crate) fn require_odd(&self) -> Result<()> {
        self.validate()?;
        match self.parity {
            Parity::Odd => Ok(()),
            Parity::Even => Err(Error::Unsupported("even parity admits sector classification only".into())),
        }
    }

    pub(crate) fn require_pure_odd(&self) -> Result<()> {
        self.require_odd()?;
        if self.oscillator {
            return Err(Error::Unsupported("operation needs the pure potential".into()));
        }
        Ok(())
    }

    /// `V(z)` without input checks.
    #[inline]
    pub fn v(&self, z: C64) -> C64 {
        let w = (I * z).powu(self.power());
        let base = if self.oscillator { 0.5 * z * z } else { C64::new(0.0, 0.0) };
        base - self.g * w
    }

    /// `V'(z) = [oscillator] z - g k i (iz)^(k-1)`.
    #[inline]
    pub fn dv(&self, z: C64) -> C64 {
        let k = self.power();
        let w = (I * z).powu(k - 1);
        let base = if self.oscillator { z } else { C64::new(0.0, 0.0) };
        base - self.g * k as f64 * I * w
    }
}

/// Real coordinates of the complexified phase space:
/// `z = x + iy`, `pi = p - iq`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: f64,
    pub y: f64,
    pub p: f64,
    pub q: f64,
}

impl PhasePoint {
    pub fn new(x: f64, y: f64, p: f64, q: f64) -> Self {
        PhasePoint { x, y, p, q }
    }

    pub fn from_complex(z: C64, pi: C64) -> Self {
        PhasePoint { x: z.re, y: z.im, p: pi.re, q: -pi.im }
    }

    pub fn z(&self) -> C64 {
        C64::new(self.x, self.y)
    }

    pub fn pi(&self) -> C64 {
        C64::new(self.p, -self.q)
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x, self.y, self.p, self.q]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        PhasePoint { x: a[0], y: a[1], p: a[2], q: a[3] }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.p.is_finite() && self.q.is_finite()
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.p * self.p + self.q * self.q).sqrt()
    }

    pub fn distance(&self, other: &PhasePoint) -> f64 {
        let d = [self.x - other.x, self.y - other.y, self.p - other.p, self.q - other.q];
        d.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct HGValue {
    pub H: f64,
    pub G: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurningPointSet {
    pub energy: f64,
    pub points: Vec<C64>,
}

pub fn eval_potential(spec: &PotentialSpec, z: C64) -> Result<C64> {
    spec.validate()?;
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("z = {z}")));
    }
    Ok(spec.v(z))
}

/// `pi^2/2 + V(z)` in complex arithmetic.
pub fn complex_hamiltonian(spec: &PotentialSpec, pt: &PhasePoint) -> C64 {
    let pi = pt.pi();
    0.5 * pi * pi + spec.v(pt.z())
}

pub fn split_hg(spec: &PotentialSpec, pt: &PhasePoint) -> Result<HGValue> {
    spec.validate()?;
    if !pt.is_finite() {
        return Err(Error::Domain(format!("{pt:?}")));
    }
    let h = complex_hamiltonian(spec, pt);
    Ok(HGValue { H: h.re, G: h.im })
}

/// Analytic gradients `(dH, dG)` with respect to `(x, y, p, q)`.
///
/// Both parts are harmonic in `(x, y)` and `(p, q)`, so the gradients follow
/// from `V'(z)` and `pi` alone.
pub fn grad_hg(spec: &PotentialSpec, pt: &PhasePoint) -> ([f64; 4], [f64; 4]) {
    let d = spec.dv(pt.z());
    let dh = [d.re, -d.im, pt.p, -pt.q];
    let dg = [d.im, d.re, -pt.q, -pt.p];
    (dh, dg)
}

/// Vector field of `H`: `xdot = dH/dp`, `ydot = dH/dq`, `pdot = -dH/dx`,
/// `qdot = -dH/dy`.
#[inline]
pub fn hamilton_rhs(spec: &PotentialSpec, s: &[f64; 4]) -> [f64; 4] {
    let d = spec.dv(C64::new(s[0], s[1]));
    [s[2], -s[3], -d.re, d.im]
}

/// Vector field of `G`, the generator of the imaginary time shift.
#[inline]
pub fn gauge_rhs(spec: &PotentialSpec, s: &[f64; 4]) -> [f64; 4] {
    let d = spec.dv(C64::new(s[0], s[1]));
    [-s[3], -s[2], -d.im, -d.re]
}

/// All roots of `V(z) = E` for the pure potential, sorted by argument.
pub fn turning_points(spec: &PotentialSpec, energy: f64) -> Result<TurningPointSet> {
    spec.require_pure_odd()?;
    if !energy.is_finite() {
        return Err(Error::Domain(format!("E = {energy}")));
    }
    if energy == 0.0 {
        return Err(Error::Degenerate("E = 0: all turning points collapse at the origin".into()));
    }
    let k = spec.power();
    let radius = (energy.abs() / spec.g).powf(1.0 / k as f64);
    // (iz)^k = -E/g has argument pi for E > 0 and 0 for E < 0.
    let theta = if energy > 0.0 { PI } else { 0.0 };
    let mut points: Vec<C64> = (0..k)
        .map(|j| {
            let w = C64::from_polar(radius, (theta + 2.0 * PI * j as f64) / k as f64);
            let mut z = -I * w;
            let f = spec.v(z) - energy;
            z -= f / spec.dv(z);
            z
        })
        .collect();
    points.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
    Ok(TurningPointSet { energy, points })
}

/// Directions of the `k+2` Stokes asymptotes, increasing from the first one
/// at `-k pi / (2(k+2))`. For odd `k` the positive imaginary axis is one of
/// them.
pub fn stokes_asymptotes(spec: &PotentialSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    if spec.oscillator {
        return Err(Error::Unsupported("operation needs the pure potential".into()));
    }
    let k = spec.power() as f64;
    let count = spec.power() + 2;
    let step = 2.0 * PI / (k + 2.0);
    let first = -k * PI / (2.0 * (k + 2.0));
    Ok((0..count).map(|j| first + step * j as f64).collect())
}

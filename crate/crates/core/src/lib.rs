//! Numerical laboratory for PT-symmetric potentials `-(iz)^(2n+1)` and the
//! mixed family `z^2/2 - g(iz)^(2n+1)`.
//!
//! The crate is organised bottom-up:
//!
//! - [`potential`]: potential evaluation, the `H + iG` split, turning points
//!   and Stokes geometry.
//! - [`classical`]: complexified Hamilton equations, closed/runaway orbits,
//!   gauge flow and the reduced gauge-fixed dynamics.
//! - [`semiclassical`]: actions along stem orbits and Bohr-Sommerfeld levels.
//! - [`spectral`]: ray-rotated shooting and sector classification.
//! - [`flow`]: spectral flow in the coupling and exceptional points.
//! - [`oscillator`]: exact results for the complexified oscillator.
//!
//! Grid sweeps take an [`Exec`] policy. With the default `parallel` feature
//! they fan out over rayon; without it every sweep runs sequentially.

pub mod classical;
pub mod error;
pub mod exec;
pub mod flow;
pub mod ode;
pub mod oscillator;
pub mod potential;
pub mod quadrature;
pub mod semiclassical;
pub mod spectral;

pub use error::{Error, Result};
pub use exec::Exec;
pub use num_complex::Complex64 as C64;
pub use potential::{HGValue, Parity, PhasePoint, PotentialSpec, TurningPointSet};

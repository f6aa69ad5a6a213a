//! Low-lying spectra of semiclassical Schrödinger operators `-h^2 Δ + V`
//! whose potential has a degenerate (flat) well at the origin.

pub mod acceptance;
pub mod asymptotics;
pub mod banded;
pub mod bessel;
pub mod error;
pub mod potentials;
pub mod radial;
pub mod report;
pub mod roots;
pub mod spectral1d;
pub mod star2d;
pub mod tridiag;
pub mod wellwidth;

pub use error::{Error, Result};

//! Numerical laboratory for stationary-phase decompositions and their
//! remainder decay rates.
//!
//! Modules, bottom-up:
//! - [`fnmodel`]: phases, amplitudes, fields and their seminorms.
//! - [`quadoracle`]: reference quadrature for oscillatory and Laplace integrals.
//! - [`fitkit`]: log-log decay fits and ratio summaries.
//! - [`statphase1d`]: non-degenerate 1-D critical points.
//! - [`vandercorput`]: degenerate 1-D critical points and the classical lemma.
//! - [`geometry`]: implicit functions, critical-point dichotomy, Morse normal form.
//! - [`statphasend`]: non-degenerate critical points in `d >= 2`.
//! - [`bessel`]: uniform Bessel asymptotics via the Schläfli integral.
//! - [`dispersive`]: radial dispersive kernels with degenerate Hessians.
//! - [`registry`]: named test cases.

pub mod bessel;
pub mod dispersive;
pub mod error;
pub mod fitkit;
pub mod fnmodel;
pub mod geometry;
pub mod quadoracle;
pub mod registry;
pub mod statphase1d;
pub mod statphasend;
pub mod vandercorput;

pub use error::{Error, Result};
pub use quadoracle::{ComplexVal, QuadReport};

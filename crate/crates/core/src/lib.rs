//! Certified numerics for periodic solutions of the forced linear oscillator
//! `u'' + omega^2 u = h(theta)` with 2*pi-periodic forcing.
//!
//! The crate provides a spectral core for finite trigonometric series
//! ([`trig`]), a periodic solver with resonance handling and an independent
//! variation-of-constants oracle ([`oscillator`]), the correspondence with
//! positively homogeneous functions on the plane and constructive supporting
//! forms ([`homogeneous`]), positivity and nonexistence certification
//! ([`positivity`]), and fully verified counterexample construction for
//! integer frequencies of three and above ([`counterexample`]).
//!
//! Everything is immutable after construction and every operation is a pure
//! function. "Positive" always means a certified lower bound above zero: a
//! grid minimum alone is never reported as success.

pub mod counterexample;
pub mod error;
pub mod homogeneous;
pub mod oscillator;
pub mod positivity;
mod simplex;
pub mod trig;

pub use error::{Error, Result};
pub use trig::{BoundCertificate, CircleGrid, HarmonicSeries, MollifierSpec};

//! Characteristic times of one-dimensional quantum collisions.
//!
//! The crate computes the stationary and time-dependent quantities that
//! characterize a 1D collision: scattering amplitudes and unwrapped phases,
//! dwell and phase/delay times, the Smith lifetime matrix and Breit-Wigner
//! resonance model, wave-packet passage instants, survival amplitudes from
//! resonance pole expansions, and the transient response of a sharp-onset
//! evanescent source. Every analytic route is paired with an independent
//! numerical oracle in the test suite.
//!
//! Atomic units (hbar = m = 1) are the default throughout; the potential
//! carries its own `mass` and `hbar` for everything downstream.

pub mod error;
pub mod faddeeva;
pub mod numerics;
pub mod potential;
pub mod scattering;
pub mod source;
pub mod survival;
pub mod times;
pub mod wavepacket;

pub use error::{Error, Result};
pub use num_complex::Complex64;

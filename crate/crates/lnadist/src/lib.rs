//! Nonlinear low-noise-amplifier distortion in the massive MIMO uplink.
//!
//! The crate is organised bottom-up:
//!
//! * [`hermite`] — complex Itô-Hermite polynomials and the Gaussian
//!   correlation transforms they diagonalise.
//! * [`amplifier`] — passband/baseband polynomial models, Hermite coefficients
//!   at a given input power, desensitization.
//! * [`pulses`] — root-raised-cosine shaping, cyclostationary aggregate pulse,
//!   third-degree distortion pulses and their sampled ambiguity functions.
//! * [`channel`] — line-of-sight ULA and cluster channels, array gain,
//!   amplifier deviation statistics, MRC weights.
//! * [`analysis`] — closed-form distortion correlations, case studies and
//!   SINR bounds.
//! * [`sim`] — the oversampled waveform Monte Carlo that serves as the
//!   independent oracle for everything above.
//! * [`cli`], [`config`], [`report`] — the experiment runner behind the
//!   `lnadist` binary.
//!
//! Everything is in linear power units internally; dB only appears at the
//! configuration boundary. The symbol period is normalised to `T = 1`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod amplifier;
pub mod analysis;
pub mod channel;
pub mod cli;
pub mod config;
pub mod dsp;
pub mod error;
pub mod hermite;
pub mod pulses;
pub mod report;
pub mod rng;
pub mod sim;
pub mod stats;
pub mod validate;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

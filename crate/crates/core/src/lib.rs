//! Wideband THz links through intelligent reflecting surfaces in the
//! radiating near field.
//!
//! The crate models a single-antenna (or beamformed) Tx -> surface -> Rx link
//! with spherical wavefronts and per-element propagation delays, evaluates the
//! beam-squint loss of carrier-matched phase profiles, the closed-form gain of
//! a continuous (holographic) aperture, and compares the energy efficiency of
//! surface-aided and direct MIMO links.
//!
//! [`scenario`] drives batch experiments from plain-text scenario files and
//! backs the `irs-sim` binary.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beamfocus;
pub mod channel;
pub mod eigen;
pub mod error;
pub mod geometry;
pub mod linkmetrics;
pub mod powergain;
pub mod scenario;
pub mod specialfn;

pub use error::{Error, Result};

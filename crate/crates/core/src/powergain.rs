//! Normalized power gain `G_s = |H_eff(f_s)|^2 / N^2`.
//!
//! Discrete surfaces are summed element by element. The holographic
//! (continuous-aperture) limit under the Fresnel approximation separates into
//! two one-dimensional chirp integrals, each evaluated in closed form with
//! complex error functions.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::dot;
use crate::error::{Error, Result};
use crate::geometry::{
    element_delays, fresnel_excess_at, CartesianPoint, DistanceMode, IrsPanel, SphericalPoint,
    SPEED_OF_LIGHT,
};
use crate::specialfn::{erf_difference, sqrt_principal};

/// Tolerance on `|b_i| = 1` for unit-modulus reflection vectors.
pub const UNIT_MODULUS_TOL: f64 = 1e-9;

/// Below this `|f_s|` (Hz) the gain is exactly 1.
pub const ZERO_FREQ_EPS: f64 = 1e-6;

/// `a L^2 |k|` below which an axis is treated as purely linear-phase.
pub const QUADRATIC_EPS: f64 = 1e-8;

/// Quadratic and linear phase coefficients of the combined Tx and Rx Fresnel
/// expansions, so that `r~_t + r~_r = a_x x^2 - b_x x + a_y y^2 - b_y y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseCoefficients {
    pub a_x: f64,
    pub b_x: f64,
    pub a_y: f64,
    pub b_y: f64,
}

/// Everything needed to evaluate the holographic gain on one subcarrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FresnelCoefficients {
    pub a_x: f64,
    pub b_x: f64,
    pub a_y: f64,
    pub b_y: f64,
    /// Baseband wavenumber `2 pi f_s / c` (1/m).
    pub k_s: f64,
    /// Aperture side `N_x L_x` (m).
    pub l_tilde_x: f64,
    /// Aperture side `N_y L_y` (m).
    pub l_tilde_y: f64,
}

impl FresnelCoefficients {
    pub fn new(phase: PhaseCoefficients, f_s: f64, aperture: (f64, f64)) -> Self {
        Self {
            a_x: phase.a_x,
            b_x: phase.b_x,
            a_y: phase.a_y,
            b_y: phase.b_y,
            k_s: 2.0 * PI * f_s / SPEED_OF_LIGHT,
            l_tilde_x: aperture.0,
            l_tilde_y: aperture.1,
        }
    }

    pub fn for_panel(panel: &IrsPanel, tx: &SphericalPoint, rx: &SphericalPoint, f_s: f64) -> Self {
        Self::new(fresnel_coefficients(tx, rx), f_s, panel.aperture())
    }
}

/// Combined Fresnel phase coefficients for a Tx/Rx pair.
pub fn fresnel_coefficients(tx: &SphericalPoint, rx: &SphericalPoint) -> PhaseCoefficients {
    let dir = |p: &SphericalPoint| {
        let st = p.theta.sin();
        let (sp, cp) = p.phi.sin_cos();
        (cp * st, sp * st)
    };
    let (ux_t, uy_t) = dir(tx);
    let (ux_r, uy_r) = dir(rx);
    PhaseCoefficients {
        a_x: (1.0 - ux_t * ux_t) / (2.0 * tx.r) + (1.0 - ux_r * ux_r) / (2.0 * rx.r),
        b_x: ux_t + ux_r,
        a_y: (1.0 - uy_t * uy_t) / (2.0 * tx.r) + (1.0 - uy_r * uy_r) / (2.0 * rx.r),
        b_y: uy_t + uy_r,
    }
}

/// `|h_s^T b|^2 / N^2` for a unit-modulus `b`.
pub fn gain_from_phases(h_s: &[Complex64], b: &[Complex64]) -> Result<f64> {
    if h_s.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: h_s.len(),
            got: b.len(),
        });
    }
    if let Some((index, z)) = b
        .iter()
        .enumerate()
        .find(|(_, z)| (z.norm() - 1.0).abs() > UNIT_MODULUS_TOL)
    {
        return Err(Error::NotUnitModulus {
            index,
            modulus: z.norm(),
        });
    }
    let n = h_s.len() as f64;
    Ok((dot(h_s, b).norm_sqr() / (n * n)).min(1.0))
}

/// Normalized gain of a phase-aligned sum, `|sum_i exp(-j 2 pi f tau_i)|^2 / N^2`.
fn squint_gain(delays: &[f64], f: f64) -> f64 {
    let sum = delays
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, &tau| {
            acc + Complex64::from_polar(1.0, -2.0 * PI * f * tau)
        });
    let n = delays.len() as f64;
    (sum.norm_sqr() / (n * n)).min(1.0)
}

/// Residual delays left when the reflection phases are matched at the carrier.
///
/// `Exact` uses the full delays; `Fresnel` uses only the excess terms
/// `(r~_t + r~_r)/c`. The dropped constant does not change the gain.
fn squint_delays(
    panel: &IrsPanel,
    tx: &CartesianPoint,
    rx: &CartesianPoint,
    mode: DistanceMode,
) -> Result<Vec<f64>> {
    match mode {
        DistanceMode::Exact => element_delays(panel, tx, rx, mode),
        DistanceMode::Fresnel => {
            let (ts, rs) = (tx.to_spherical()?, rx.to_spherical()?);
            Ok(panel
                .element_centers()
                .iter()
                .map(|c| (fresnel_excess_at(&ts, c.x, c.y) + fresnel_excess_at(&rs, c.x, c.y)) / SPEED_OF_LIGHT)
                .collect())
        }
    }
}

/// Gain at baseband frequency `f_s` when the surface is phased for the carrier.
pub fn narrowband_gain_discrete(
    panel: &IrsPanel,
    tx: &CartesianPoint,
    rx: &CartesianPoint,
    f_s: f64,
    mode: DistanceMode,
) -> Result<f64> {
    let delays = squint_delays(panel, tx, rx, mode)?;
    Ok(squint_gain(&delays, f_s))
}

/// [`narrowband_gain_discrete`] over a list of frequencies, sharing the delays.
pub fn narrowband_gains_discrete(
    panel: &IrsPanel,
    tx: &CartesianPoint,
    rx: &CartesianPoint,
    freqs: &[f64],
    mode: DistanceMode,
) -> Result<Vec<f64>> {
    let delays = squint_delays(panel, tx, rx, mode)?;
    Ok(freqs.par_iter().map(|&f| squint_gain(&delays, f)).collect())
}

/// `(1/L) * integral_{-L/2}^{L/2} exp(-j k (a x^2 - b x)) dx`, up to a unit-modulus factor.
fn axis_factor(k: f64, a: f64, b: f64, aperture: f64) -> Result<Complex64> {
    if a * aperture * aperture * k.abs() < QUADRATIC_EPS {
        let half = k * b * aperture / 2.0;
        let sinc = if half == 0.0 { 1.0 } else { half.sin() / half };
        return Ok(Complex64::new(sinc, 0.0));
    }
    let root = sqrt_principal(Complex64::new(0.0, k * a));
    let shift = b / (2.0 * a);
    let bracket = erf_difference(root * (aperture / 2.0 - shift), root * (-aperture / 2.0 - shift))?;
    Ok(bracket * PI.sqrt() / (2.0 * root * aperture))
}

/// Holographic-surface gain `|xi_s|^2`.
pub fn holographic_gain(coeffs: &FresnelCoefficients) -> Result<f64> {
    let k = coeffs.k_s;
    if k.abs() < 2.0 * PI * ZERO_FREQ_EPS / SPEED_OF_LIGHT {
        return Ok(1.0);
    }
    let x = axis_factor(k, coeffs.a_x, coeffs.b_x, coeffs.l_tilde_x)?;
    let y = axis_factor(k, coeffs.a_y, coeffs.b_y, coeffs.l_tilde_y)?;
    Ok((x * y).norm_sqr().min(1.0))
}

/// Holographic gain at each frequency for the panel's aperture.
pub fn holographic_gains(
    panel: &IrsPanel,
    tx: &SphericalPoint,
    rx: &SphericalPoint,
    freqs: &[f64],
) -> Result<Vec<f64>> {
    freqs
        .iter()
        .map(|&f| holographic_gain(&FresnelCoefficients::for_panel(panel, tx, rx, f)))
        .collect()
}

//! Reflection-coefficient designs: frequency-flat (narrowband) and
//! per-subcarrier (wideband) beamfocusing, plus the eigenvector solution that
//! upper-bounds the wideband rate when the unit-modulus constraint is
//! dropped.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::channel::{RfConfig, SubcarrierChannel};
use crate::eigen::{dense_apply, Eigenpair, PowerIteration};
use crate::error::{Error, Result};
use crate::geometry::{element_delays, CartesianPoint, DistanceMode, IrsPanel};
use crate::powergain::UNIT_MODULUS_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReflectionKind {
    /// Passive surface: every coefficient has unit modulus.
    UnitModulus,
    /// Only the total power is fixed, `||b||^2 = N`. Not realizable by a
    /// passive surface.
    NormConstrained,
}

/// Reflection coefficients `b` in panel flattening order.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionVector {
    coeffs: Vec<Complex64>,
    kind: ReflectionKind,
}

impl ReflectionVector {
    pub fn unit_modulus(coeffs: Vec<Complex64>) -> Result<Self> {
        if let Some((index, z)) = coeffs
            .iter()
            .enumerate()
            .find(|(_, z)| (z.norm() - 1.0).abs() > UNIT_MODULUS_TOL)
        {
            return Err(Error::NotUnitModulus {
                index,
                modulus: z.norm(),
            });
        }
        Ok(Self {
            coeffs,
            kind: ReflectionKind::UnitModulus,
        })
    }

    pub fn norm_constrained(coeffs: Vec<Complex64>) -> Result<Self> {
        let n = coeffs.len() as f64;
        let energy: f64 = coeffs.iter().map(|z| z.norm_sqr()).sum();
        if (energy - n).abs() > UNIT_MODULUS_TOL * n.max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "squared norm {energy} differs from N = {n}"
            )));
        }
        Ok(Self {
            coeffs,
            kind: ReflectionKind::NormConstrained,
        })
    }

    /// Unit-modulus vector with the given phases (rad).
    pub fn from_phases(phases: impl IntoIterator<Item = f64>) -> Self {
        Self {
            coeffs: phases.into_iter().map(|p| Complex64::from_polar(1.0, p)).collect(),
            kind: ReflectionKind::UnitModulus,
        }
    }

    pub fn kind(&self) -> ReflectionKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Same vector multiplied by the global phasor `exp(j alpha)`.
    pub fn rotated(&self, alpha: f64) -> Self {
        let r = Complex64::from_polar(1.0, alpha);
        Self {
            coeffs: self.coeffs.iter().map(|z| z * r).collect(),
            kind: self.kind,
        }
    }
}

/// Reflection design strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Per-subcarrier phases `2 pi (f_c + f_s) tau`.
    Wideband,
    /// Carrier-matched phases `2 pi f_c tau` on every subcarrier.
    Narrowband,
    /// Top eigenvector of `conj(H) H^T`, scaled to `||b||^2 = N`.
    UpperBound,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Wideband, Strategy::Narrowband, Strategy::UpperBound];

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Wideband => "wideband",
            Strategy::Narrowband => "narrowband",
            Strategy::UpperBound => "upper_bound",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown strategy `{s}`")))
    }
}

fn phases_at(panel: &IrsPanel, tx: &CartesianPoint, rx: &CartesianPoint, f: f64) -> Result<ReflectionVector> {
    let delays = element_delays(panel, tx, rx, DistanceMode::Exact)?;
    Ok(ReflectionVector::from_phases(delays.iter().map(|tau| 2.0 * PI * f * tau)))
}

/// Frequency-flat beamfocusing matched at the carrier `f_c`.
pub fn narrowband_phases(
    panel: &IrsPanel,
    tx: &CartesianPoint,
    rx: &CartesianPoint,
    f_c: f64,
) -> Result<ReflectionVector> {
    phases_at(panel, tx, rx, f_c)
}

/// Beamfocusing matched at absolute frequency `f_c + f_s`.
pub fn wideband_phases(
    panel: &IrsPanel,
    tx: &CartesianPoint,
    rx: &CartesianPoint,
    f_c: f64,
    f_s: f64,
) -> Result<ReflectionVector> {
    phases_at(panel, tx, rx, f_c + f_s)
}

/// Eigenvector design and its objective `||H_eff^T b||^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperBoundSolution {
    pub b: ReflectionVector,
    /// `sum_s |h_s^T b|^2 = N lambda_max`.
    pub objective: f64,
    pub lambda_max: f64,
    pub iterations: usize,
}

/// Row-major `S x S` Gram matrix `H^T conj(H)`. The carrier phasors cancel, so
/// baseband and effective channels share it.
pub fn gram_matrix(channel: &SubcarrierChannel) -> Vec<Complex64> {
    let s_count = channel.subcarriers();
    let mut g = vec![Complex64::new(0.0, 0.0); s_count * s_count];
    for s in 0..s_count {
        for t in s..s_count {
            let v = channel
                .column(s)
                .iter()
                .zip(channel.column(t))
                .fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + a * b.conj());
            g[s * s_count + t] = v;
            g[t * s_count + s] = v.conj();
        }
    }
    g
}

/// Top eigenpair of the `S x S` Gram matrix.
pub fn gram_eigenpair(channel: &SubcarrierChannel, solver: &PowerIteration) -> Result<Eigenpair> {
    let s_count = channel.subcarriers();
    let g = gram_matrix(channel);
    solver.top_eigenpair(s_count, |x| dense_apply(&g, s_count, x))
}

/// Top eigenpair of the `N x N` operator `conj(H_eff) H_eff^T`, applied
/// matrix-free.
pub fn direct_eigenpair(channel: &SubcarrierChannel, solver: &PowerIteration) -> Result<Eigenpair> {
    solver.top_eigenpair(channel.elements(), |x| {
        let y = channel.response(x).expect("length fixed by solver");
        channel.effective_conj_mul(&y).expect("length fixed by channel")
    })
}

/// Rotate `b` so its largest-magnitude entry is real and non-negative.
fn canonicalize(b: &mut [Complex64]) {
    let pivot = b
        .iter()
        .enumerate()
        .fold((0usize, -1.0f64), |best, (i, z)| {
            if z.norm() > best.1 {
                (i, z.norm())
            } else {
                best
            }
        })
        .0;
    if let Some(p) = b.get(pivot) {
        if p.norm() > 0.0 {
            let r = p.conj() / p.norm();
            b.iter_mut().for_each(|z| *z *= r);
        }
    }
}

/// `b* = sqrt(N) u`, with `u` the top eigenvector of `conj(H_eff) H_eff^T`,
/// found through the Gram matrix and lifted as `u ~ conj(H_eff) v`.
pub fn upper_bound_solution(channel: &SubcarrierChannel) -> Result<UpperBoundSolution> {
    upper_bound_solution_with(channel, &PowerIteration::default())
}

pub fn upper_bound_solution_with(
    channel: &SubcarrierChannel,
    solver: &PowerIteration,
) -> Result<UpperBoundSolution> {
    if channel.elements() == 0 || channel.subcarriers() == 0 {
        return Err(Error::InvalidArgument("channel has no elements or subcarriers".into()));
    }
    let pair = gram_eigenpair(channel, solver)?;
    let mut u = channel.effective_conj_mul(&pair.vector)?;
    let u_norm = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if u_norm == 0.0 {
        return Err(Error::InvalidArgument("channel matrix is zero".into()));
    }
    let scale = (channel.elements() as f64).sqrt() / u_norm;
    u.iter_mut().for_each(|z| *z *= scale);
    canonicalize(&mut u);
    let objective = channel.response(&u)?.iter().map(|z| z.norm_sqr()).sum();
    Ok(UpperBoundSolution {
        b: ReflectionVector::norm_constrained(u)?,
        objective,
        lambda_max: pair.value,
        iterations: pair.iterations,
    })
}

fn check_pathloss(channel: &SubcarrierChannel, pathloss: &[f64]) -> Result<()> {
    if pathloss.len() != channel.subcarriers() {
        return Err(Error::DimensionMismatch {
            expected: channel.subcarriers(),
            got: pathloss.len(),
        });
    }
    Ok(())
}

/// Achievable rate (bit/s) of a single reflection vector across all subcarriers:
/// `sum_s (B/S) log2(1 + P_t PL_s |h_s^T b|^2 / (B sigma^2))`.
pub fn rate_objective(
    b: &ReflectionVector,
    channel: &SubcarrierChannel,
    cfg: &RfConfig,
    pathloss: &[f64],
) -> Result<f64> {
    check_pathloss(channel, pathloss)?;
    let per_carrier = cfg.bandwidth / channel.subcarriers() as f64;
    let snr_scale = cfg.p_t / cfg.noise_power();
    Ok(channel
        .response(b.as_slice())?
        .iter()
        .zip(pathloss)
        .map(|(h, pl)| per_carrier * (1.0 + snr_scale * pl * h.norm_sqr()).log2())
        .sum())
}

/// Jensen bound on [`rate_objective`] with a single path-loss value:
/// `B log2(1 + P_t PL / (B sigma^2) * sum_s |h_s^T b|^2 / S)`.
pub fn rate_upper_bound(
    b: &ReflectionVector,
    channel: &SubcarrierChannel,
    cfg: &RfConfig,
    pathloss: f64,
) -> Result<f64> {
    let s_count = channel.subcarriers() as f64;
    let energy: f64 = channel.response(b.as_slice())?.iter().map(|h| h.norm_sqr()).sum();
    Ok(cfg.bandwidth * (1.0 + cfg.p_t * pathloss / cfg.noise_power() * energy / s_count).log2())
}

//! Frequency-domain channel: OFDM grid, path loss and per-subcarrier
//! phase vectors of the cascaded Tx -> surface -> Rx link.

use std::f64::consts::PI;
use std::io::Read;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometry::{element_delays, CartesianPoint, DistanceMode, IrsPanel, SphericalPoint, SPEED_OF_LIGHT};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm) * 1e-3
}

/// RF and OFDM parameters, stored on a linear scale.
#[derive(Debug, Clone, PartialEq)]
pub struct RfConfig {
    /// Carrier frequency (Hz).
    pub f_c: f64,
    /// Signal bandwidth (Hz).
    pub bandwidth: f64,
    pub subcarriers: usize,
    /// Transmit power (W).
    pub p_t: f64,
    pub g_t: f64,
    pub g_r: f64,
    /// Noise power spectral density (W/Hz).
    pub noise_density: f64,
}

impl RfConfig {
    pub fn new(
        f_c: f64,
        bandwidth: f64,
        subcarriers: usize,
        p_t: f64,
        g_t: f64,
        g_r: f64,
        noise_density: f64,
    ) -> Result<Self> {
        let cfg = Self {
            f_c,
            bandwidth,
            subcarriers,
            p_t,
            g_t,
            g_r,
            noise_density,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Build from the usual logarithmic units (dBm, dBi, dBm/Hz).
    pub fn from_db(
        f_c: f64,
        bandwidth: f64,
        subcarriers: usize,
        p_t_dbm: f64,
        g_t_dbi: f64,
        g_r_dbi: f64,
        noise_density_dbm_hz: f64,
    ) -> Result<Self> {
        Self::new(
            f_c,
            bandwidth,
            subcarriers,
            dbm_to_watts(p_t_dbm),
            db_to_linear(g_t_dbi),
            db_to_linear(g_r_dbi),
            dbm_to_watts(noise_density_dbm_hz),
        )
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.bandwidth.is_finite() && self.bandwidth > 0.0) {
            return bad(format!("bandwidth must be positive, got {}", self.bandwidth));
        }
        if !(self.f_c.is_finite() && self.f_c > self.bandwidth / 2.0) {
            return bad(format!(
                "carrier {} Hz must exceed half the bandwidth ({} Hz)",
                self.f_c,
                self.bandwidth / 2.0
            ));
        }
        if self.subcarriers == 0 {
            return bad("at least one subcarrier is required".into());
        }
        for (name, v) in [
            ("transmit power", self.p_t),
            ("tx gain", self.g_t),
            ("rx gain", self.g_r),
            ("noise density", self.noise_density),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.f_c
    }

    /// Total noise power `B * sigma^2` (W).
    pub fn noise_power(&self) -> f64 {
        self.bandwidth * self.noise_density
    }

    pub fn subcarrier_spacing(&self) -> f64 {
        self.bandwidth / self.subcarriers as f64
    }

    pub fn subcarrier_freqs(&self) -> Vec<f64> {
        (0..self.subcarriers).map(|s| self.freq_unchecked(s)).collect()
    }

    fn freq_unchecked(&self, s: usize) -> f64 {
        (s as f64 - (self.subcarriers as f64 - 1.0) / 2.0) * self.subcarrier_spacing()
    }
}

/// Baseband frequency of subcarrier `s`: `(s - (S-1)/2) B / S`.
pub fn subcarrier_freq(cfg: &RfConfig, s: usize) -> Result<f64> {
    if s >= cfg.subcarriers {
        return Err(Error::SubcarrierOutOfRange {
            s,
            count: cfg.subcarriers,
        });
    }
    Ok(cfg.freq_unchecked(s))
}

/// Sampled absorption coefficient, linearly interpolated between samples.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptionTable {
    freqs: Vec<f64>,
    kappas: Vec<f64>,
}

#[derive(Deserialize)]
struct TableRow {
    freq_hz: f64,
    kappa_per_m: f64,
}

impl AbsorptionTable {
    pub fn new(freqs: Vec<f64>, kappas: Vec<f64>) -> Result<Self> {
        if freqs.len() != kappas.len() {
            return Err(Error::Absorption(format!(
                "{} frequencies but {} coefficients",
                freqs.len(),
                kappas.len()
            )));
        }
        if freqs.is_empty() {
            return Err(Error::Absorption("table is empty".into()));
        }
        if freqs.iter().any(|f| !f.is_finite()) {
            return Err(Error::Absorption("non-finite frequency".into()));
        }
        if let Some(w) = freqs.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::Absorption(format!(
                "frequencies must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if let Some(k) = kappas.iter().find(|k| !(k.is_finite() && **k >= 0.0)) {
            return Err(Error::Absorption(format!("coefficient {k} is negative or non-finite")));
        }
        Ok(Self { freqs, kappas })
    }

    /// Parse a `freq_hz,kappa_per_m` CSV.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::Absorption(e.to_string()))?
            .clone();
        if headers.iter().collect::<Vec<_>>() != ["freq_hz", "kappa_per_m"] {
            return Err(Error::Absorption(format!(
                "expected header `freq_hz,kappa_per_m`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let (mut freqs, mut kappas) = (Vec::new(), Vec::new());
        for row in rdr.deserialize::<TableRow>() {
            let row = row.map_err(|e| Error::Absorption(e.to_string()))?;
            freqs.push(row.freq_hz);
            kappas.push(row.kappa_per_m);
        }
        Self::new(freqs, kappas)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_reader(file)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.freqs[0], self.freqs[self.freqs.len() - 1])
    }

    pub fn kappa(&self, f: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        if !(lo..=hi).contains(&f) {
            return Err(Error::Absorption(format!(
                "frequency {f} Hz outside table range [{lo}, {hi}]"
            )));
        }
        let i = self.freqs.partition_point(|&x| x <= f);
        if i == self.freqs.len() {
            return Ok(self.kappas[i - 1]);
        }
        let (f0, f1) = (self.freqs[i - 1], self.freqs[i]);
        let t = (f - f0) / (f1 - f0);
        Ok(self.kappas[i - 1] + t * (self.kappas[i] - self.kappas[i - 1]))
    }
}

/// Molecular absorption coefficient `kappa(f)` in 1/m, evaluated at absolute
/// frequency.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum AbsorptionModel {
    #[default]
    Zero,
    Constant(f64),
    Table(AbsorptionTable),
}

impl AbsorptionModel {
    pub fn constant(kappa: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa >= 0.0) {
            return Err(Error::Absorption(format!("coefficient {kappa} must be >= 0")));
        }
        Ok(Self::Constant(kappa))
    }

    pub fn kappa(&self, f_abs: f64) -> Result<f64> {
        match self {
            AbsorptionModel::Zero => Ok(0.0),
            AbsorptionModel::Constant(k) => Ok(*k),
            AbsorptionModel::Table(t) => t.kappa(f_abs),
        }
    }
}

/// Element pattern factor `cos^2(theta_t) (cos^2(theta_r) cos^2(phi_r) + sin^2(phi_r))`.
pub fn pattern_factor(theta_t: f64, phi_r: f64, theta_r: f64) -> f64 {
    let ct = theta_t.cos();
    let cr = theta_r.cos();
    let (sp, cp) = phi_r.sin_cos();
    ct * ct * (cr * cr * cp * cp + sp * sp)
}

/// Cascaded path loss through one element of area `element_area`, given the
/// Tx/Rx distances to it and the pattern factor.
pub fn cascaded_pathloss(
    cfg: &RfConfig,
    absorption: &AbsorptionModel,
    element_area: f64,
    f: f64,
    r_t: f64,
    r_r: f64,
    factor: f64,
) -> Result<f64> {
    if !(r_t > 0.0 && r_r > 0.0) {
        return Err(Error::InvalidGeometry(format!(
            "path-loss distances must be positive, got r_t = {r_t}, r_r = {r_r}"
        )));
    }
    let kappa = absorption.kappa(cfg.f_c + f)?;
    let aperture = element_area / (4.0 * PI);
    Ok(cfg.g_t * cfg.g_r * aperture * aperture * factor / (r_t * r_t * r_r * r_r)
        * (-kappa * (r_t + r_r)).exp())
}

/// Surface path loss at baseband frequency `f`, evaluated at the radial
/// distances of the two endpoints.
pub fn irs_pathloss(
    cfg: &RfConfig,
    absorption: &AbsorptionModel,
    panel: &IrsPanel,
    f: f64,
    tx: &SphericalPoint,
    rx: &SphericalPoint,
) -> Result<f64> {
    let factor = pattern_factor(tx.theta, rx.phi, rx.theta);
    cascaded_pathloss(cfg, absorption, panel.l_x() * panel.l_y(), f, tx.r, rx.r, factor)
}

/// Free-space line-of-sight path loss over `r_d` at baseband frequency `f`.
pub fn mimo_pathloss(cfg: &RfConfig, absorption: &AbsorptionModel, f: f64, r_d: f64) -> Result<f64> {
    if !(r_d > 0.0) {
        return Err(Error::InvalidGeometry(format!(
            "direct distance must be positive, got {r_d}"
        )));
    }
    let f_abs = cfg.f_c + f;
    let kappa = absorption.kappa(f_abs)?;
    let denom = 4.0 * PI * r_d * f_abs;
    Ok(cfg.g_t * cfg.g_r * SPEED_OF_LIGHT * SPEED_OF_LIGHT / (denom * denom) * (-kappa * r_d).exp())
}

/// Stacked per-subcarrier phase vectors `h_s` with entries `exp(-j 2 pi f_s tau)`.
///
/// Stored as an `N x S` column-major matrix: column `s` is `h_s`, ordered like
/// [`IrsPanel::indices`]. The carrier phasors `exp(-j 2 pi f_c tau)` are kept
/// alongside, so a physical reflection vector `b` (phases `exp(j phi)`) sees
/// the effective channel `H_eff(f_s) = sum_i exp(-j 2 pi (f_c + f_s) tau_i) b_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubcarrierChannel {
    elements: usize,
    freqs: Vec<f64>,
    carrier: Vec<Complex64>,
    data: Vec<Complex64>,
}

impl SubcarrierChannel {
    /// Build from element delays (s), the carrier (Hz) and baseband
    /// frequencies (Hz).
    pub fn from_delays(delays: &[f64], f_c: f64, freqs: &[f64]) -> Self {
        let phasors = |f: f64| -> Vec<Complex64> {
            delays
                .iter()
                .map(|&tau| Complex64::from_polar(1.0, -2.0 * PI * f * tau))
                .collect()
        };
        let columns: Vec<Vec<Complex64>> = freqs.par_iter().map(|&f| phasors(f)).collect();
        Self {
            elements: delays.len(),
            freqs: freqs.to_vec(),
            carrier: phasors(f_c),
            data: columns.concat(),
        }
    }

    /// Build from explicit baseband columns with a unit carrier term. Each
    /// column must have the same length.
    pub fn from_columns(columns: Vec<Vec<Complex64>>, freqs: Vec<f64>) -> Result<Self> {
        if columns.len() != freqs.len() {
            return Err(Error::DimensionMismatch {
                expected: freqs.len(),
                got: columns.len(),
            });
        }
        let elements = columns.first().map_or(0, Vec::len);
        if let Some(bad) = columns.iter().find(|c| c.len() != elements) {
            return Err(Error::DimensionMismatch {
                expected: elements,
                got: bad.len(),
            });
        }
        Ok(Self {
            elements,
            freqs,
            carrier: vec![Complex64::new(1.0, 0.0); elements],
            data: columns.concat(),
        })
    }

    /// Number of surface elements `N`.
    pub fn elements(&self) -> usize {
        self.elements
    }

    /// Number of subcarriers `S`.
    pub fn subcarriers(&self) -> usize {
        self.freqs.len()
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    /// `exp(-j 2 pi f_c tau_i)` for each element.
    pub fn carrier(&self) -> &[Complex64] {
        &self.carrier
    }

    /// Baseband `h_s`.
    pub fn column(&self, s: usize) -> &[Complex64] {
        &self.data[s * self.elements..(s + 1) * self.elements]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[Complex64]> {
        (0..self.freqs.len()).map(move |s| self.column(s))
    }

    /// `[H]_{i,s}`.
    pub fn get(&self, i: usize, s: usize) -> Complex64 {
        self.data[s * self.elements + i]
    }

    /// `exp(-j 2 pi (f_c + f_s) tau_i)`: the vector a physical reflection
    /// vector is multiplied with on subcarrier `s`.
    pub fn effective_column(&self, s: usize) -> Vec<Complex64> {
        self.column(s)
            .iter()
            .zip(&self.carrier)
            .map(|(h, c)| h * c)
            .collect()
    }

    /// `H_eff(f_s)` for every subcarrier under reflection vector `b`.
    pub fn response(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        if b.len() != self.elements {
            return Err(Error::DimensionMismatch {
                expected: self.elements,
                got: b.len(),
            });
        }
        let cb: Vec<Complex64> = self.carrier.iter().zip(b).map(|(c, x)| c * x).collect();
        Ok(self.columns().map(|h| dot(h, &cb)).collect())
    }

    /// `conj(H_eff) y` for a length-`S` vector `y`, an `N`-vector.
    pub fn effective_conj_mul(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        if y.len() != self.subcarriers() {
            return Err(Error::DimensionMismatch {
                expected: self.subcarriers(),
                got: y.len(),
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.elements];
        for (h, ys) in self.columns().zip(y) {
            for (o, hi) in out.iter_mut().zip(h) {
                *o += hi.conj() * ys;
            }
        }
        for (o, c) in out.iter_mut().zip(&self.carrier) {
            *o *= c.conj();
        }
        Ok(out)
    }
}

/// Unconjugated dot product `a^T b`, summed in index order.
pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).fold(Complex64::new(0.0, 0.0), |acc, (x, y)| acc + x * y)
}

/// Per-subcarrier phase vectors for the given geometry and OFDM grid.
pub fn build_subcarrier_channel(
    panel: &IrsPanel,
    tx: &CartesianPoint,
    rx: &CartesianPoint,
    cfg: &RfConfig,
    mode: DistanceMode,
) -> Result<SubcarrierChannel> {
    let delays = element_delays(panel, tx, rx, mode)?;
    Ok(SubcarrierChannel::from_delays(&delays, cfg.f_c, &cfg.subcarrier_freqs()))
}

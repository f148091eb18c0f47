//! Link budget: per-subcarrier SNR, sum rate, hybrid-array power draw and
//! energy efficiency, plus the surface size `N*` that trades antennas for
//! reflecting elements.

use crate::channel::RfConfig;
use crate::error::{Error, Result};

/// Per-device power figures (W).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerModel {
    /// Phase shifter.
    pub p_ps: f64,
    /// Power amplifier.
    pub p_pa: f64,
    /// Radiated transmit power.
    pub p_t: f64,
}

impl PowerModel {
    pub fn new(p_ps: f64, p_pa: f64, p_t: f64) -> Result<Self> {
        for (name, v) in [("p_ps", p_ps), ("p_pa", p_pa), ("p_t", p_t)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(Self { p_ps, p_pa, p_t })
    }

    /// 42 mW phase shifters and 60 mW amplifiers, typical at 300 GHz.
    pub fn thz_300ghz(p_t: f64) -> Result<Self> {
        Self::new(42e-3, 60e-3, p_t)
    }
}

/// `P_t + (n_t + n_r)(P_PS + P_PA)`. Counts are real so that `N_t / alpha`
/// need not be an integer.
pub fn power_consumption(model: &PowerModel, n_t: f64, n_r: f64) -> f64 {
    model.p_t + n_r * (model.p_ps + model.p_pa) + n_t * (model.p_ps + model.p_pa)
}

/// SNR through a surface of `n_elements` with single-antenna ends.
pub fn irs_snr(cfg: &RfConfig, n_elements: f64, gain: f64, pathloss: f64) -> f64 {
    n_elements * n_elements * gain * cfg.p_t * pathloss / cfg.noise_power()
}

/// SNR through a surface when both ends beamform with `n_t` and `n_r` antennas.
pub fn irs_mimo_snr(cfg: &RfConfig, n_t: f64, n_r: f64, n_elements: f64, gain: f64, pathloss: f64) -> f64 {
    n_t * n_r * irs_snr(cfg, n_elements, gain, pathloss)
}

/// SNR of the direct MIMO link under frequency-flat beamforming and combining.
pub fn mimo_snr(cfg: &RfConfig, n_t: f64, n_r: f64, pathloss: f64) -> f64 {
    n_t * n_r * cfg.p_t * pathloss / cfg.noise_power()
}

/// `sum_s (B/S) log2(1 + SNR_s)`, summed in subcarrier order.
pub fn sum_rate(cfg: &RfConfig, snrs: &[f64]) -> f64 {
    let per_carrier = cfg.bandwidth / snrs.len().max(1) as f64;
    snrs.iter().map(|snr| per_carrier * (1.0 + snr).log2()).sum()
}

/// Rate per unit power (bit/J).
pub fn energy_efficiency(rate: f64, power: f64) -> Result<f64> {
    if !(power > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "consumed power must be positive, got {power}"
        )));
    }
    Ok(rate / power)
}

/// Element count for which the surface link matches the direct MIMO SNR with
/// `alpha` times fewer antennas at each end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementCount {
    pub real: f64,
    pub ceil: usize,
}

impl ElementCount {
    /// Near-square even-by-even grid holding at least `ceil` elements.
    pub fn grid(&self) -> (usize, usize) {
        factor_grid(self.ceil)
    }
}

/// `N* = alpha (lambda / (L_x L_y)) r_t r_r / (sqrt(F) r_d) exp(-kappa (r_d - r_r - r_t) / 2)`.
#[allow(clippy::too_many_arguments)]
pub fn n_star(
    alpha: f64,
    wavelength: f64,
    l_x: f64,
    l_y: f64,
    r_t: f64,
    r_r: f64,
    r_d: f64,
    factor: f64,
    kappa: f64,
) -> Result<ElementCount> {
    if !(factor > 0.0) {
        return Err(Error::InvalidGeometry(format!(
            "pattern factor must be positive (grazing geometry), got {factor}"
        )));
    }
    if !(r_t > 0.0 && r_r > 0.0 && r_d > 0.0) {
        return Err(Error::InvalidGeometry("distances must be positive".into()));
    }
    if !(alpha > 0.0 && wavelength > 0.0 && l_x > 0.0 && l_y > 0.0) {
        return Err(Error::InvalidArgument(
            "alpha, wavelength and element size must be positive".into(),
        ));
    }
    let real = alpha * wavelength / (l_x * l_y) * r_t * r_r / (factor.sqrt() * r_d)
        * (-0.5 * kappa * (r_d - r_r - r_t)).exp();
    if !real.is_finite() {
        return Err(Error::InvalidArgument(format!("N* is not finite ({real})")));
    }
    Ok(ElementCount {
        real,
        ceil: real.ceil().max(1.0) as usize,
    })
}

/// Near-square even grid holding at least `count` elements: `n_x` is the
/// even integer closest to `sqrt(count)` and `n_y` the smallest even integer
/// with `n_x n_y >= count`. The overshoot stays below `2 n_x` elements.
pub fn factor_grid(count: usize) -> (usize, usize) {
    let count = count.max(1);
    let n_x = (2.0 * ((count as f64).sqrt() / 2.0).round()).max(2.0) as usize;
    let raw = count.div_ceil(n_x);
    let n_y = (raw + raw % 2).max(2);
    (n_x.min(n_y), n_x.max(n_y))
}

/// Per-strategy link summary.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkReport {
    pub label: String,
    pub gains: Vec<f64>,
    pub snrs: Vec<f64>,
    /// bit/s
    pub rate: f64,
    /// W
    pub power: f64,
    /// bit/J
    pub energy_efficiency: f64,
}

impl LinkReport {
    pub fn new(label: impl Into<String>, cfg: &RfConfig, gains: Vec<f64>, snrs: Vec<f64>, power: f64) -> Result<Self> {
        if gains.len() != snrs.len() {
            return Err(Error::DimensionMismatch {
                expected: snrs.len(),
                got: gains.len(),
            });
        }
        let rate = sum_rate(cfg, &snrs);
        Ok(Self {
            label: label.into(),
            gains,
            snrs,
            rate,
            power,
            energy_efficiency: energy_efficiency(rate, power)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;

    fn unit_cfg() -> RfConfig {
        // P_t = B sigma^2
        RfConfig::new(300e9, 1e9, 1, 1.0, 1.0, 1.0, 1e-9).unwrap()
    }

    #[test]
    fn snr_trivial_values() {
        let cfg = unit_cfg();
        assert_relative_eq!(irs_snr(&cfg, 1.0, 1.0, 1.0), 1.0, max_relative = 1e-15);
        assert_relative_eq!(
            irs_snr(&cfg, 2.0, 0.3, 1.0) / irs_snr(&cfg, 1.0, 0.3, 1.0),
            4.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(mimo_snr(&cfg, 1.0, 1.0, 1.0), 1.0, max_relative = 1e-15);
        assert_relative_eq!(mimo_snr(&cfg, 100.0, 100.0, 1.0), 1e4, max_relative = 1e-15);
        assert_relative_eq!(irs_mimo_snr(&cfg, 3.0, 2.0, 1.0, 1.0, 1.0), 6.0, max_relative = 1e-15);
    }

    #[test]
    fn power_draw() {
        let m = PowerModel::thz_300ghz(0.01).unwrap();
        assert_eq!(power_consumption(&m, 0.0, 0.0), 0.01);
        assert_relative_eq!(power_consumption(&m, 100.0, 100.0), 20.41, max_relative = 1e-12);
        assert_relative_eq!(power_consumption(&m, 50.0, 50.0), 10.21, max_relative = 1e-12);
        assert!(PowerModel::new(-1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn efficiency() {
        assert_eq!(energy_efficiency(3.5, 3.5).unwrap(), 1.0);
        assert!(energy_efficiency(1.0, 0.0).is_err());
    }

    #[test]
    fn n_star_linear_in_alpha_and_rejects_grazing() {
        let a = n_star(1.0, 1e-3, 5e-4, 5e-4, 1.0, 5.0, 5.8, 0.2, 0.0).unwrap();
        let b = n_star(2.0, 1e-3, 5e-4, 5e-4, 1.0, 5.0, 5.8, 0.2, 0.0).unwrap();
        assert_relative_eq!(b.real, 2.0 * a.real, max_relative = 1e-15);
        assert!(b.ceil as f64 >= b.real);
        assert!(n_star(1.0, 1e-3, 5e-4, 5e-4, 1.0, 5.0, 5.8, 0.0, 0.0).is_err());
    }

    #[test]
    fn grids_are_even_and_cover() {
        for count in [1, 3, 4, 5, 17, 100, 101, 6400, 46_713] {
            let (nx, ny) = factor_grid(count);
            assert!(nx % 2 == 0 && ny % 2 == 0, "{count}: {nx}x{ny}");
            assert!(nx * ny >= count);
            assert!(nx <= ny);
            assert!(nx * ny < count + 2 * ny + 4, "{count}: {nx}x{ny}");
            assert!(ny - nx <= 4 || nx * nx < count, "{count}: {nx}x{ny}");
        }
        assert_eq!(factor_grid(6400), (80, 80));
        assert_eq!(factor_grid(4), (2, 2));
    }

    #[test]
    fn report_aggregates() {
        let cfg = RfConfig::new(300e9, 2e9, 2, 1.0, 1.0, 1.0, 1e-9).unwrap();
        let r = LinkReport::new("x", &cfg, vec![1.0, 1.0], vec![1.0, 3.0], 2.0).unwrap();
        assert_relative_eq!(r.rate, 1e9 * 1.0 + 1e9 * 2.0, max_relative = 1e-15);
        assert_relative_eq!(r.energy_efficiency, r.rate / 2.0);
    }
}

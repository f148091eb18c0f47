use irs_thz::channel::{irs_pathloss, mimo_pathloss, pattern_factor, AbsorptionModel, RfConfig};
use irs_thz::geometry::{CartesianPoint, Indexing, IrsPanel};
use irs_thz::linkmetrics::{
    energy_efficiency, factor_grid, irs_mimo_snr, mimo_snr, n_star, power_consumption, sum_rate, PowerModel,
};
use proptest::prelude::*;

fn cfg() -> RfConfig {
    RfConfig::from_db(300e9, 20e9, 20, 10.0, 20.0, 20.0, -174.0).unwrap()
}

/// Break-even SNR check at any geometry: with `N*` elements and `n/alpha`
/// antennas the center-subcarrier SNRs coincide.
fn snr_ratio(tx: CartesianPoint, rx: CartesianPoint, alpha: f64, kappa: f64) -> f64 {
    let c = cfg();
    let absorption = AbsorptionModel::constant(kappa).unwrap();
    let (ts, rs) = (tx.to_spherical().unwrap(), rx.to_spherical().unwrap());
    let r_d = tx.distance_to(&rx);
    let l = c.wavelength() / 2.0;
    let f = pattern_factor(ts.theta, rs.phi, rs.theta);
    let n = n_star(alpha, c.wavelength(), l, l, ts.r, rs.r, r_d, f, absorption.kappa(c.f_c).unwrap()).unwrap();
    let panel = IrsPanel::new(2, 2, l, l, Indexing::Symmetric).unwrap();
    let pl_irs = irs_pathloss(&c, &absorption, &panel, 0.0, &ts, &rs).unwrap();
    let pl_mimo = mimo_pathloss(&c, &absorption, 0.0, r_d).unwrap();
    let irs = irs_mimo_snr(&c, 100.0 / alpha, 100.0 / alpha, n.real, 1.0, pl_irs);
    irs / mimo_snr(&c, 100.0, 100.0, pl_mimo)
}

#[test]
fn break_even_count_matches_snr() {
    let tx = CartesianPoint::new(0.8, -0.8, 0.2);
    for y in [1.0, 5.0, 9.5] {
        let r = snr_ratio(tx, CartesianPoint::new(0.8, y, 0.2), 2.0, 0.0);
        assert!((r - 1.0).abs() < 1e-9, "{y}: {r}");
    }
    let r = snr_ratio(tx, CartesianPoint::new(0.8, 5.0, 0.2), 3.0, 0.02);
    assert!((r - 1.0).abs() < 1e-9, "{r}");
}

#[test]
fn energy_gain_of_halving_antennas() {
    let m = PowerModel::thz_300ghz(0.01).unwrap();
    let full = power_consumption(&m, 100.0, 100.0);
    let half = power_consumption(&m, 50.0, 50.0);
    assert!((full - 20.41).abs() < 1e-12 && (half - 10.21).abs() < 1e-12);
    let rate = 1e11;
    let ratio = energy_efficiency(rate, half).unwrap() / energy_efficiency(rate, full).unwrap();
    assert!((ratio - 2.0).abs() / 2.0 < 5e-3);
}

#[test]
fn rate_sums_per_carrier_capacity() {
    let c = cfg();
    let snrs: Vec<f64> = (0..20).map(|s| s as f64).collect();
    let want: f64 = snrs.iter().map(|x| 1e9 * (1.0f64 + x).log2()).sum();
    assert!((sum_rate(&c, &snrs) - want).abs() < 1e-3);
}

#[test]
fn n_star_hand_value() {
    // lambda / (L^2) with L = lambda / 2 is 4 / lambda
    let lambda = 1e-3;
    let n = n_star(1.0, lambda, lambda / 2.0, lambda / 2.0, 1.0, 1.0, 2.0, 0.25, 0.0).unwrap();
    assert!((n.real - 4.0 / lambda * 1.0 / (0.5 * 2.0)).abs() < 1e-9);
    assert_eq!(n.ceil as f64, n.real.ceil());
    assert_eq!(factor_grid(4000), (64, 64));
    let (nx, ny) = n.grid();
    assert!(nx * ny >= n.ceil);
}

proptest! {
    #[test]
    fn grid_is_even_covering_and_near_square(count in 1usize..200_000) {
        let (nx, ny) = factor_grid(count);
        prop_assert!(nx % 2 == 0 && ny % 2 == 0 && nx >= 2);
        prop_assert!(nx * ny >= count);
        prop_assert!(nx <= ny);
        prop_assert!(nx * ny < count + 2 * ny + 4);
        prop_assert!((ny - nx) as f64 <= 4.0 + 4.0 * (count as f64).sqrt() / (nx as f64).max(1.0));
    }

    #[test]
    fn power_draw_is_affine(n_t in 0.0f64..500.0, n_r in 0.0f64..500.0) {
        let m = PowerModel::thz_300ghz(0.01).unwrap();
        let p = power_consumption(&m, n_t, n_r);
        prop_assert!((p - (0.01 + (n_t + n_r) * 0.102)).abs() < 1e-9);
    }

    #[test]
    fn rate_monotone_in_snr(a in 0.0f64..1e4, extra in 0.0f64..1e4) {
        let c = cfg();
        prop_assert!(sum_rate(&c, &[a]) <= sum_rate(&c, &[a + extra]));
    }
}

//! Acceptance criteria 1-9. Each test prints one PASS/FAIL line.

mod common;

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;

use irs_thz::beamfocus::{
    direct_eigenpair, gram_eigenpair, narrowband_phases, rate_objective, upper_bound_solution, wideband_phases,
    ReflectionVector,
};
use irs_thz::channel::{
    build_subcarrier_channel, irs_pathloss, mimo_pathloss, pattern_factor, AbsorptionModel, RfConfig,
    SubcarrierChannel,
};
use irs_thz::eigen::PowerIteration;
use irs_thz::geometry::{to_cartesian, CartesianPoint, DistanceMode, Indexing, IrsPanel, SphericalPoint};
use irs_thz::linkmetrics::{irs_mimo_snr, mimo_snr, n_star, power_consumption, PowerModel};
use irs_thz::powergain::{gain_from_phases, holographic_gains, narrowband_gain_discrete, narrowband_gains_discrete};
use irs_thz::specialfn::erf_complex;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(criterion: u32, title: &str, pass: bool, detail: &str) {
    println!(
        "criterion {criterion} [{title}]: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

struct Fig2 {
    panel: IrsPanel,
    tx: SphericalPoint,
    rx: SphericalPoint,
}

impl Fig2 {
    fn new() -> Self {
        let (t, r) = (common::FIG2_TX, common::FIG2_RX);
        Self {
            panel: IrsPanel::half_wavelength(80, 80, common::FIG2_FC).unwrap(),
            tx: SphericalPoint::new(t.0, t.1, t.2).unwrap(),
            rx: SphericalPoint::new(r.0, r.1, r.2).unwrap(),
        }
    }

    fn tx_c(&self) -> CartesianPoint {
        to_cartesian(&self.tx)
    }

    fn rx_c(&self) -> CartesianPoint {
        to_cartesian(&self.rx)
    }
}

/// RF parameters shared by the rate and energy-efficiency experiments.
fn rf(subcarriers: usize) -> RfConfig {
    RfConfig::from_db(300e9, 20e9, subcarriers, 10.0, 20.0, 20.0, -174.0).unwrap()
}

#[test]
fn criterion_1_ideal_beamfocusing_normalization() {
    let g = Fig2::new();
    let cfg = rf(128);
    let h = build_subcarrier_channel(&g.panel, &g.tx_c(), &g.rx_c(), &cfg, DistanceMode::Exact).unwrap();
    let worst = cfg
        .subcarrier_freqs()
        .iter()
        .enumerate()
        .map(|(s, &f)| {
            let b = wideband_phases(&g.panel, &g.tx_c(), &g.rx_c(), cfg.f_c, f).unwrap();
            (gain_from_phases(&h.effective_column(s), b.as_slice()).unwrap() - 1.0).abs()
        })
        .fold(0.0, f64::max);
    verdict(1, "wideband gain = 1", worst <= 1e-12, &format!("max |G_s - 1| = {worst:.3e}, tol 1e-12"));
}

fn fresnel_vs_holographic(panel: &IrsPanel, g: &Fig2, freqs: &[f64]) -> f64 {
    let disc = narrowband_gains_discrete(panel, &g.tx_c(), &g.rx_c(), freqs, DistanceMode::Fresnel).unwrap();
    let holo = holographic_gains(panel, &g.tx, &g.rx, freqs).unwrap();
    disc.iter().zip(&holo).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

#[test]
fn criterion_2_holographic_agreement() {
    let g = Fig2::new();
    let freqs = rf(128).subcarrier_freqs();
    let worst = fresnel_vs_holographic(&g.panel, &g, &freqs);
    verdict(
        2,
        "discrete Fresnel vs holographic",
        worst <= 0.01,
        &format!("max_s |G_fresnel - G_holo| = {worst:.3e} over 128 subcarriers, tol 1e-2"),
    );
}

#[test]
fn criterion_3_refinement_convergence() {
    let g = Fig2::new();
    let freqs = rf(128).subcarrier_freqs();
    let (aperture, _) = g.panel.aperture();
    let errors: Vec<f64> = [80usize, 160, 320]
        .iter()
        .map(|&n| {
            let l = aperture / n as f64;
            let panel = IrsPanel::new(n, n, l, l, Indexing::Symmetric).unwrap();
            fresnel_vs_holographic(&panel, &g, &freqs)
        })
        .collect();
    let monotone = errors.windows(2).all(|w| w[1] < w[0]);
    verdict(
        3,
        "monotone refinement",
        monotone,
        &format!(
            "discrepancy at 80^2 / 160^2 / 320^2 = {:.3e} / {:.3e} / {:.3e}",
            errors[0], errors[1], errors[2]
        ),
    );
}

#[test]
fn criterion_4_complex_erf_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst_rel, mut worst_odd, mut worst_conj) = (0.0f64, 0.0f64, 0.0f64);
    let mut worst_at = Complex64::new(0.0, 0.0);
    for _ in 0..10_000 {
        let z = Complex64::new(rng.gen_range(-6.0..=6.0), rng.gen_range(-6.0..=6.0));
        let got = erf_complex(z).unwrap();
        let want = common::erf_quadrature(z);
        let rel = (got - want).norm() / want.norm();
        if rel > worst_rel {
            worst_rel = rel;
            worst_at = z;
        }
        let scale = got.norm();
        worst_odd = worst_odd.max((erf_complex(-z).unwrap() + got).norm() / scale);
        worst_conj = worst_conj.max((erf_complex(z.conj()).unwrap() - got.conj()).norm() / scale);
    }
    let pass = worst_rel <= 1e-10 && worst_odd <= 1e-13 && worst_conj <= 1e-13;
    verdict(
        4,
        "complex erf",
        pass,
        &format!(
            "10000 points: max rel err {worst_rel:.3e} at {worst_at}, odd {worst_odd:.1e}, conj {worst_conj:.1e}"
        ),
    );
}

struct Rates {
    wideband: f64,
    narrowband: f64,
    upper_bound: f64,
}

/// Rates of the three designs with every SNR multiplied by `snr_scale`.
fn fig2_rates(g: &Fig2, cfg: &RfConfig, h: &SubcarrierChannel, snr_scale: f64) -> Rates {
    let absorption = AbsorptionModel::Zero;
    let pathloss: Vec<f64> = cfg
        .subcarrier_freqs()
        .iter()
        .map(|&f| snr_scale * irs_pathloss(cfg, &absorption, &g.panel, f, &g.tx, &g.rx).unwrap())
        .collect();
    let freqs = cfg.subcarrier_freqs();
    // per-subcarrier phases: the rate is a sum of single-carrier terms
    let per_carrier = cfg.bandwidth / freqs.len() as f64;
    let wideband = freqs
        .iter()
        .enumerate()
        .map(|(s, &f)| {
            let b = wideband_phases(&g.panel, &g.tx_c(), &g.rx_c(), cfg.f_c, f).unwrap();
            let resp = irs_thz::channel::dot(&h.effective_column(s), b.as_slice()).norm_sqr();
            per_carrier * (1.0 + cfg.p_t * pathloss[s] * resp / cfg.noise_power()).log2()
        })
        .sum();
    let nb = narrowband_phases(&g.panel, &g.tx_c(), &g.rx_c(), cfg.f_c).unwrap();
    let ub = upper_bound_solution(h).unwrap();
    Rates {
        wideband,
        narrowband: rate_objective(&nb, h, cfg, &pathloss).unwrap(),
        upper_bound: rate_objective(&ub.b, h, cfg, &pathloss).unwrap(),
    }
}

#[test]
fn criterion_5_rate_triple() {
    let g = Fig2::new();
    let cfg = rf(20);
    let h = build_subcarrier_channel(&g.panel, &g.tx_c(), &g.rx_c(), &cfg, DistanceMode::Exact).unwrap();
    let target = [52.48e9, 14.52e9, 24.61e9];
    let target_loss = 72.3;

    // where the reported triple would sit: scale the SNR until the wideband
    // rate matches, then read off the other two
    let (mut lo, mut hi) = (1e-4f64, 1.0f64);
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if fig2_rates(&g, &cfg, &h, mid).wideband < target[0] {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let cal = fig2_rates(&g, &cfg, &h, lo);
    println!(
        "criterion 5 [rate triple]: INFO SNR scaled by {:.4} ({:+.2} dB) reproduces wideband {:.2} Gbps; \
         narrowband {:.2} Gbps, upper bound {:.2} Gbps, loss {:.1}%",
        lo,
        10.0 * lo.log10(),
        cal.wideband / 1e9,
        cal.narrowband / 1e9,
        cal.upper_bound / 1e9,
        100.0 * (1.0 - cal.narrowband / cal.wideband)
    );

    let r = fig2_rates(&g, &cfg, &h, 1.0);
    let got = [r.wideband, r.narrowband, r.upper_bound];
    let within: Vec<bool> = got.iter().zip(&target).map(|(g, t)| (g - t).abs() <= 0.15 * t).collect();
    let loss = 100.0 * (1.0 - r.narrowband / r.wideband);
    let pass = within.iter().all(|&w| w) && (loss - target_loss).abs() <= 5.0;
    verdict(
        5,
        "rate triple",
        pass,
        &format!(
            "wideband / narrowband / upper bound = {:.2} / {:.2} / {:.2} Gbps vs 52.48 / 14.52 / 24.61 (±15%), \
             narrowband loss {loss:.1}% vs 72.3 ± 5",
            got[0] / 1e9,
            got[1] / 1e9,
            got[2] / 1e9
        ),
    );
}

#[test]
fn criterion_6_eigen_optimality() {
    let g = Fig2::new();
    let cfg = rf(20);
    let h = build_subcarrier_channel(&g.panel, &g.tx_c(), &g.rx_c(), &cfg, DistanceMode::Exact).unwrap();
    let objective = |b: &[Complex64]| -> f64 { h.response(b).unwrap().iter().map(|z| z.norm_sqr()).sum() };
    let sol = upper_bound_solution(&h).unwrap();
    let best = objective(sol.b.as_slice());
    let nb = narrowband_phases(&g.panel, &g.tx_c(), &g.rx_c(), cfg.f_c).unwrap();
    let mut beaten = objective(nb.as_slice()) > best;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut best_random = 0.0f64;
    for _ in 0..1000 {
        let b = ReflectionVector::from_phases((0..h.elements()).map(|_| rng.gen_range(-PI..PI)));
        let v = objective(b.as_slice());
        best_random = best_random.max(v);
        beaten |= v > best;
    }
    let solver = PowerIteration::default();
    let gram = gram_eigenpair(&h, &solver).unwrap().value;
    let direct = direct_eigenpair(&h, &solver).unwrap().value;
    let rel = (gram - direct).abs() / gram;
    verdict(
        6,
        "eigen-optimality",
        !beaten && rel <= 1e-9,
        &format!(
            "objective {best:.6e} vs narrowband {:.6e}, best of 1000 random {best_random:.6e}; \
             lambda_max gram {gram:.12e} direct {direct:.12e} (rel {rel:.1e})",
            objective(nb.as_slice())
        ),
    );
}

#[test]
fn criterion_7_snr_match_and_energy_gain() {
    let cfg = rf(20);
    let absorption = AbsorptionModel::Zero;
    let tx = CartesianPoint::new(0.8, -0.8, 0.2);
    let rx = CartesianPoint::new(0.8, 5.0, 0.2);
    let (ts, rs) = (tx.to_spherical().unwrap(), rx.to_spherical().unwrap());
    let r_d = tx.distance_to(&rx);
    let alpha = 2.0;
    let l = cfg.wavelength() / 2.0;
    let factor = pattern_factor(ts.theta, rs.phi, rs.theta);
    let n = n_star(alpha, cfg.wavelength(), l, l, ts.r, rs.r, r_d, factor, 0.0).unwrap();
    let panel = IrsPanel::new(2, 2, l, l, Indexing::Symmetric).unwrap();
    let pl_irs = irs_pathloss(&cfg, &absorption, &panel, 0.0, &ts, &rs).unwrap();
    let pl_mimo = mimo_pathloss(&cfg, &absorption, 0.0, r_d).unwrap();
    let snr_irs = irs_mimo_snr(&cfg, 100.0 / alpha, 100.0 / alpha, n.real, 1.0, pl_irs);
    let snr_mimo = mimo_snr(&cfg, 100.0, 100.0, pl_mimo);
    let snr_rel = (snr_irs - snr_mimo).abs() / snr_mimo;
    let power = PowerModel::thz_300ghz(cfg.p_t).unwrap();
    let ee_ratio = power_consumption(&power, 100.0, 100.0) / power_consumption(&power, 50.0, 50.0);
    let ee_dev = (ee_ratio - alpha).abs() / alpha;
    verdict(
        7,
        "SNR match / EE gain",
        snr_rel <= 1e-9 && ee_dev <= 5e-3,
        &format!(
            "N* = {:.1}, SNR irs {snr_irs:.6e} vs mimo {snr_mimo:.6e} (rel {snr_rel:.1e}); EE ratio {ee_ratio:.4} ({:.2}% from 2)",
            n.real,
            100.0 * ee_dev
        ),
    );
}

#[test]
fn criterion_8_brute_force_gain_oracle() {
    let tx = common::spherical_to_xyz(1.0, PI / 3.0, PI / 5.0);
    let rx = common::spherical_to_xyz(5.0, PI / 4.0, PI / 3.0);
    let l = common::C0 / 300e9 / 2.0;
    let mut worst = 0.0f64;
    for n in [2usize, 4] {
        let panel = IrsPanel::new(n, n, l, l, Indexing::Symmetric).unwrap();
        for f_s in common::subcarriers(20e9, 16) {
            let got = narrowband_gain_discrete(
                &panel,
                &CartesianPoint::new(tx[0], tx[1], tx[2]),
                &CartesianPoint::new(rx[0], rx[1], rx[2]),
                f_s,
                DistanceMode::Exact,
            )
            .unwrap();
            let want = common::brute_force_narrowband_gain(n, n, l, l, tx, rx, 300e9, f_s);
            worst = worst.max((got - want).abs());
        }
    }
    verdict(8, "brute-force gain", worst <= 1e-10, &format!("2x2 and 4x4, max abs diff {worst:.3e}"));
}

#[test]
fn criterion_9_determinism() {
    let bin = env!("CARGO_BIN_EXE_irs-sim");
    let file = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/fig2a.scenario");
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str, threads: Option<&str>| -> Vec<u8> {
        let out_dir = dir.path().join(sub);
        let mut cmd = Command::new(bin);
        cmd.arg("run").arg(&file).arg("--out-dir").arg(&out_dir);
        if let Some(t) = threads {
            cmd.args(["--threads", t]);
        }
        let out = cmd.output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        fs::read(out_dir.join("fig2a.csv")).unwrap()
    };
    let a = run("a", None);
    let b = run("b", None);
    let one = run("t1", Some("1"));
    let eight = run("t8", Some("8"));
    verdict(
        9,
        "determinism",
        a == b && one == eight && a == one,
        &format!("fig2a.csv {} bytes; repeat identical: {}, threads 1 vs 8 identical: {}", a.len(), a == b, one == eight),
    );
}

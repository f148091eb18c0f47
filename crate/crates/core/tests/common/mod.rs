//! Reference implementations that share no code with the library.
#![allow(dead_code, clippy::excessive_precision)]

use std::f64::consts::PI;

use num_complex::Complex64;

pub const C0: f64 = 299_792_458.0;

// 15-point Gauss-Kronrod with embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, Complex64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs = fc.norm() * WGK[7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let (f1, f2) = (f(center - dx), f(center + dx));
        kronrod += (f1 + f2) * WGK[j];
        abs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    (kronrod * half, gauss * half, abs * half.abs())
}

fn adapt<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, tol: f64, depth: usize) -> Complex64 {
    let (k, g, abs) = gk15(f, a, b);
    // stop at the tolerance or at the rounding floor of this panel
    if (k - g).norm() <= tol.max(50.0 * f64::EPSILON * abs) || depth == 0 {
        return k;
    }
    let m = 0.5 * (a + b);
    adapt(f, a, m, tol / 2.0, depth - 1) + adapt(f, m, b, tol / 2.0, depth - 1)
}

/// Adaptive Gauss-Kronrod quadrature of a complex integrand on `[a, b]`,
/// with absolute tolerance relative to `integral |f|`.
pub fn integrate<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, rel_tol: f64) -> Complex64 {
    // coarse pass for the magnitude scale
    let pieces = 32;
    let h = (b - a) / pieces as f64;
    let scale: f64 = (0..pieces)
        .map(|i| gk15(&f, a + i as f64 * h, a + (i + 1) as f64 * h).2)
        .sum();
    let tol = rel_tol * scale.max(f64::MIN_POSITIVE);
    (0..pieces)
        .map(|i| adapt(&f, a + i as f64 * h, a + (i + 1) as f64 * h, tol / pieces as f64, 30))
        .sum()
}

/// `erf(z) = (2 / sqrt(pi)) * integral_0^1 z exp(-(z t)^2) dt`, along the
/// straight path from 0 to `z`.
pub fn erf_quadrature(z: Complex64) -> Complex64 {
    let z2 = z * z;
    let integral = integrate(|t| (-z2 * t * t).exp(), 0.0, 1.0, 1e-15);
    integral * z * (2.0 / PI.sqrt())
}

/// Element center for symmetric indexing, computed from scratch.
pub fn element_position(n: i64, m: i64, l_x: f64, l_y: f64) -> [f64; 3] {
    [(n as f64 + 0.5) * l_x, (m as f64 + 0.5) * l_y, 0.0]
}

pub fn spherical_to_xyz(r: f64, theta: f64, phi: f64) -> [f64; 3] {
    [
        r * theta.sin() * phi.cos(),
        r * theta.sin() * phi.sin(),
        r * theta.cos(),
    ]
}

pub fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// All `(n, m)` of an `n_x x n_y` panel, `n` fastest.
pub fn grid(n_x: usize, n_y: usize) -> Vec<(i64, i64)> {
    let (hx, hy) = (n_x as i64 / 2, n_y as i64 / 2);
    (-hy..hy).flat_map(|m| (-hx..hx).map(move |n| (n, m))).collect()
}

/// Narrowband gain by direct double sum: phases matched at `f_c`, channel at
/// `f_c + f_s`, both built from absolute delays.
#[allow(clippy::too_many_arguments)]
pub fn brute_force_narrowband_gain(
    n_x: usize,
    n_y: usize,
    l_x: f64,
    l_y: f64,
    tx: [f64; 3],
    rx: [f64; 3],
    f_c: f64,
    f_s: f64,
) -> f64 {
    let mut sum = Complex64::new(0.0, 0.0);
    for (n, m) in grid(n_x, n_y) {
        let p = element_position(n, m, l_x, l_y);
        let tau = (dist(tx, p) + dist(rx, p)) / C0;
        let b = Complex64::from_polar(1.0, 2.0 * PI * f_c * tau);
        let h = Complex64::from_polar(1.0, -2.0 * PI * (f_c + f_s) * tau);
        sum += h * b;
    }
    let n = (n_x * n_y) as f64;
    sum.norm_sqr() / (n * n)
}

/// Holographic gain by quadrature of the continuous-aperture phase integral
/// `(1 / (Lx Ly)) | integral integral exp(-j k (a_x x^2 - b_x x + a_y y^2 - b_y y)) dx dy |^2`.
pub fn holographic_quadrature(k: f64, a_x: f64, b_x: f64, a_y: f64, b_y: f64, lx: f64, ly: f64) -> f64 {
    let axis = |a: f64, b: f64, l: f64| {
        integrate(
            |x| Complex64::from_polar(1.0, -k * (a * x * x - b * x)),
            -l / 2.0,
            l / 2.0,
            1e-14,
        ) / l
    };
    (axis(a_x, b_x, lx) * axis(a_y, b_y, ly)).norm_sqr()
}

/// Fresnel coefficients written directly from the direction cosines.
pub fn fresnel_abc(tx: (f64, f64, f64), rx: (f64, f64, f64)) -> (f64, f64, f64, f64) {
    let (rt, tt, pt) = tx;
    let (rr, tr, pr) = rx;
    let (ux_t, uy_t) = (tt.sin() * pt.cos(), tt.sin() * pt.sin());
    let (ux_r, uy_r) = (tr.sin() * pr.cos(), tr.sin() * pr.sin());
    (
        (1.0 - ux_t * ux_t) / (2.0 * rt) + (1.0 - ux_r * ux_r) / (2.0 * rr),
        ux_t + ux_r,
        (1.0 - uy_t * uy_t) / (2.0 * rt) + (1.0 - uy_r * uy_r) / (2.0 * rr),
        uy_t + uy_r,
    )
}

/// Fresnel-approximated discrete gain from the same coefficients.
pub fn fresnel_discrete_gain(n_x: usize, n_y: usize, l: f64, coeffs: (f64, f64, f64, f64), f_s: f64) -> f64 {
    let (a_x, b_x, a_y, b_y) = coeffs;
    let k = 2.0 * PI * f_s / C0;
    let mut sum = Complex64::new(0.0, 0.0);
    for (n, m) in grid(n_x, n_y) {
        let p = element_position(n, m, l, l);
        let excess = a_x * p[0] * p[0] - b_x * p[0] + a_y * p[1] * p[1] - b_y * p[1];
        sum += Complex64::from_polar(1.0, -k * excess);
    }
    let n = (n_x * n_y) as f64;
    sum.norm_sqr() / (n * n)
}

/// The gain-profile geometry: 80x80 half-wavelength panel at 300 GHz.
pub const FIG2_TX: (f64, f64, f64) = (1.0, PI / 3.0, PI / 5.0);
pub const FIG2_RX: (f64, f64, f64) = (5.0, PI / 4.0, PI / 3.0);
pub const FIG2_FC: f64 = 300e9;
pub const FIG2_B: f64 = 20e9;

pub fn subcarriers(b: f64, s: usize) -> Vec<f64> {
    (0..s).map(|i| (i as f64 - (s as f64 - 1.0) / 2.0) * b / s as f64).collect()
}

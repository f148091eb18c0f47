//! Error function of complex argument and the principal complex square root.
//!
//! `erf` is evaluated with its Maclaurin series for `|Re z| <= 1.5` and with
//! the Laplace continued fraction of `erfc` elsewhere. Both branches are run
//! on the closed right upper quadrant only; the remaining quadrants follow
//! from `erf(-z) = -erf(z)` and `erf(conj z) = conj(erf z)`, which therefore
//! hold exactly.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest `|Re z|` and `|Im z|` accepted by [`erf_complex`].
pub const ERF_WINDOW: f64 = 30.0;

/// `Im(z)^2 - Re(z)^2` above which `|erf z|` overflows (about `e^709`).
const OVERFLOW_EXPONENT: f64 = 700.0;

const SERIES_MAX_RE: f64 = 1.5;
const MAX_TERMS: usize = 100_000;

/// `erf(z) = 2/sqrt(pi) * integral_0^z exp(-t^2) dt` for complex `z`.
pub fn erf_complex(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite())
        || z.re.abs() > ERF_WINDOW
        || z.im.abs() > ERF_WINDOW
    {
        return Err(Error::OutOfWindow {
            re: z.re,
            im: z.im,
            limit: ERF_WINDOW,
        });
    }
    if z.im * z.im - z.re * z.re > OVERFLOW_EXPONENT {
        return Err(Error::Overflow { re: z.re, im: z.im });
    }
    Ok(erf_unchecked(z))
}

/// `erf(z1) - erf(z2)` without the window restriction.
///
/// When both arguments lie on the same side of the imaginary axis beyond the
/// series region, the difference is taken between the two `erfc` values so
/// that the leading `1` cancels exactly. Arguments near the diagonals, where
/// `exp(-z^2)` stays bounded, are accepted at any magnitude.
pub(crate) fn erf_difference(z1: Complex64, z2: Complex64) -> Result<Complex64> {
    for z in [z1, z2] {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::OutOfWindow {
                re: z.re,
                im: z.im,
                limit: f64::INFINITY,
            });
        }
        if z.im * z.im - z.re * z.re > OVERFLOW_EXPONENT {
            return Err(Error::Overflow { re: z.re, im: z.im });
        }
    }
    if z1.re > SERIES_MAX_RE && z2.re > SERIES_MAX_RE {
        return Ok(erfc_right(z2) - erfc_right(z1));
    }
    if z1.re < -SERIES_MAX_RE && z2.re < -SERIES_MAX_RE {
        return Ok(erfc_right(-z1) - erfc_right(-z2));
    }
    Ok(erf_unchecked(z1) - erf_unchecked(z2))
}

fn erf_unchecked(z: Complex64) -> Complex64 {
    let q = Complex64::new(z.re.abs(), z.im.abs());
    let mut w = if q.re <= SERIES_MAX_RE {
        erf_series(q)
    } else {
        Complex64::new(1.0, 0.0) - erfc_continued_fraction(q)
    };
    // erf(conj q) = conj(erf q) and erf(-q) = -erf(q)
    if z.im.is_sign_negative() != z.re.is_sign_negative() {
        w = w.conj();
    }
    if z.re.is_sign_negative() {
        w = -w;
    }
    w
}

/// `erfc(z)` for `Re z > 0`, using the same quadrant folding as `erf`.
fn erfc_right(z: Complex64) -> Complex64 {
    let w = erfc_continued_fraction(Complex64::new(z.re, z.im.abs()));
    if z.im.is_sign_negative() {
        w.conj()
    } else {
        w
    }
}

fn erf_series(z: Complex64) -> Complex64 {
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    for n in 1..MAX_TERMS {
        term *= -z2 / n as f64;
        let add = term / (2 * n + 1) as f64;
        sum += add;
        if add.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    sum * (2.0 / PI.sqrt())
}

/// `erfc(z)` for `Re z > 0` by modified Lentz evaluation of
/// `erfc z = exp(-z^2)/sqrt(pi) / (z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))`.
fn erfc_continued_fraction(z: Complex64) -> Complex64 {
    const TINY: f64 = 1e-300;
    let guard = |v: Complex64| {
        if v.norm() < TINY {
            Complex64::new(TINY, 0.0)
        } else {
            v
        }
    };
    let mut f = guard(z);
    let mut c = f;
    let mut d = Complex64::new(0.0, 0.0);
    for k in 1..MAX_TERMS {
        let a = k as f64 / 2.0;
        d = guard(z + d * a).inv();
        c = guard(z + a / c);
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 2.5e-16 {
            break;
        }
    }
    let gauss = Complex64::new(-(z.re - z.im) * (z.re + z.im), -2.0 * z.re * z.im).exp();
    gauss / (PI.sqrt() * f)
}

/// Principal square root: the result has a non-negative real part.
pub fn sqrt_principal(z: Complex64) -> Complex64 {
    if z.re == 0.0 && z.im == 0.0 {
        return Complex64::new(0.0, z.im);
    }
    let modulus = z.re.hypot(z.im);
    let t = ((z.re.abs() + modulus) / 2.0).sqrt();
    if z.re >= 0.0 {
        Complex64::new(t, z.im / (2.0 * t))
    } else {
        Complex64::new(z.im.abs() / (2.0 * t), t.copysign(z.im))
    }
}

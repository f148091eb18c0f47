//! Surface geometry: element placement, Tx/Rx to element distances and
//! propagation delays.
//!
//! The surface lies in the xy-plane with its center at the origin. Angles
//! follow the physics convention: `theta` is measured from the surface
//! normal (z-axis) and `phi` is the azimuth in the xy-plane.

use std::ops::{RangeInclusive, Sub};

use crate::error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Point in spherical coordinates `(r, theta, phi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalPoint {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

impl SphericalPoint {
    pub fn new(r: f64, theta: f64, phi: f64) -> Result<Self> {
        let p = Self { r, theta, phi };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r.is_finite() && self.r > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "radial distance must be positive and finite, got {}",
                self.r
            )));
        }
        if !(0.0..=std::f64::consts::PI).contains(&self.theta) {
            return Err(Error::InvalidGeometry(format!(
                "polar angle must lie in [0, pi], got {}",
                self.theta
            )));
        }
        if !self.phi.is_finite() {
            return Err(Error::InvalidGeometry("azimuth must be finite".into()));
        }
        Ok(())
    }

    pub fn to_cartesian(&self) -> CartesianPoint {
        to_cartesian(self)
    }
}

/// Point in Cartesian coordinates (m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl CartesianPoint {
    pub const ORIGIN: Self = Self {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn distance_to(&self, other: &CartesianPoint) -> f64 {
        (*self - *other).norm()
    }

    /// Inverse of [`to_cartesian`], with `phi` in `(-pi, pi]`.
    pub fn to_spherical(&self) -> Result<SphericalPoint> {
        if !(self.x.is_finite() && self.y.is_finite() && self.z.is_finite()) {
            return Err(Error::InvalidGeometry("non-finite coordinate".into()));
        }
        let r = self.norm();
        if r == 0.0 {
            return Err(Error::InvalidGeometry(
                "the origin has no spherical direction".into(),
            ));
        }
        let theta = (self.z / r).clamp(-1.0, 1.0).acos();
        let phi = self.y.atan2(self.x);
        Ok(SphericalPoint { r, theta, phi })
    }
}

impl Sub for CartesianPoint {
    type Output = CartesianPoint;

    fn sub(self, rhs: Self) -> Self::Output {
        CartesianPoint::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

/// `x = r sin(theta) cos(phi)`, `y = r sin(theta) sin(phi)`, `z = r cos(theta)`.
pub fn to_cartesian(p: &SphericalPoint) -> CartesianPoint {
    let (st, ct) = p.theta.sin_cos();
    let (sp, cp) = p.phi.sin_cos();
    CartesianPoint::new(p.r * st * cp, p.r * st * sp, p.r * ct)
}

/// Where element `(n, m)` sits relative to its index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Indexing {
    /// Centers at `((n - 1/2) L_x, (m - 1/2) L_y, 0)`. The aperture is then
    /// offset by one element pitch from the origin.
    PaperLiteral,
    /// Centers at `((n + 1/2) L_x, (m + 1/2) L_y, 0)`, symmetric about the origin.
    #[default]
    Symmetric,
}

impl Indexing {
    fn offset(self) -> f64 {
        match self {
            Indexing::PaperLiteral => -0.5,
            Indexing::Symmetric => 0.5,
        }
    }
}

/// How element distances are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DistanceMode {
    #[default]
    Exact,
    /// Second-order (Fresnel) expansion around the radial distance.
    Fresnel,
}

/// Planar surface of `n_x * n_y` elements of size `l_x * l_y`.
///
/// Indices run over `n in [-n_x/2, n_x/2 - 1]` and `m in [-n_y/2, n_y/2 - 1]`.
/// Flattened vectors over the panel are column-major: `n` varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct IrsPanel {
    n_x: usize,
    n_y: usize,
    l_x: f64,
    l_y: f64,
    indexing: Indexing,
}

impl IrsPanel {
    pub fn new(n_x: usize, n_y: usize, l_x: f64, l_y: f64, indexing: Indexing) -> Result<Self> {
        for (name, count) in [("n_x", n_x), ("n_y", n_y)] {
            if count == 0 || count % 2 != 0 {
                return Err(Error::InvalidGeometry(format!(
                    "{name} must be an even positive integer, got {count}"
                )));
            }
        }
        for (name, size) in [("l_x", l_x), ("l_y", l_y)] {
            if !(size.is_finite() && size > 0.0) {
                return Err(Error::InvalidGeometry(format!(
                    "{name} must be positive and finite, got {size}"
                )));
            }
        }
        Ok(Self {
            n_x,
            n_y,
            l_x,
            l_y,
            indexing,
        })
    }

    /// Square elements of side `lambda / 2` at the carrier `f_c`.
    pub fn half_wavelength(n_x: usize, n_y: usize, f_c: f64) -> Result<Self> {
        let side = SPEED_OF_LIGHT / f_c / 2.0;
        Self::new(n_x, n_y, side, side, Indexing::default())
    }

    pub fn with_indexing(mut self, indexing: Indexing) -> Self {
        self.indexing = indexing;
        self
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn l_x(&self) -> f64 {
        self.l_x
    }

    pub fn l_y(&self) -> f64 {
        self.l_y
    }

    pub fn indexing(&self) -> Indexing {
        self.indexing
    }

    pub fn num_elements(&self) -> usize {
        self.n_x * self.n_y
    }

    /// Aperture side lengths `(N_x L_x, N_y L_y)`.
    pub fn aperture(&self) -> (f64, f64) {
        (self.n_x as f64 * self.l_x, self.n_y as f64 * self.l_y)
    }

    /// Aperture diagonal.
    pub fn diameter(&self) -> f64 {
        let (ax, ay) = self.aperture();
        ax.hypot(ay)
    }

    pub fn n_range(&self) -> RangeInclusive<i64> {
        let half = (self.n_x / 2) as i64;
        -half..=half - 1
    }

    pub fn m_range(&self) -> RangeInclusive<i64> {
        let half = (self.n_y / 2) as i64;
        -half..=half - 1
    }

    /// Element indices in flattening order (`n` fastest, then `m`).
    pub fn indices(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        let n_range = self.n_range();
        self.m_range()
            .flat_map(move |m| n_range.clone().map(move |n| (n, m)))
    }

    /// Position of index `(n, m)` in a flattened panel vector.
    pub fn flat_index(&self, n: i64, m: i64) -> Result<usize> {
        self.check_index(n, m)?;
        let col = (n - self.n_range().start()) as usize;
        let row = (m - self.m_range().start()) as usize;
        Ok(row * self.n_x + col)
    }

    /// x-coordinate of every element column, in index order.
    pub fn x_abscissas(&self) -> Vec<f64> {
        self.n_range().map(|n| self.x_of(n)).collect()
    }

    /// y-coordinate of every element row, in index order.
    pub fn y_abscissas(&self) -> Vec<f64> {
        self.m_range().map(|m| self.y_of(m)).collect()
    }

    pub fn element_center(&self, n: i64, m: i64) -> Result<CartesianPoint> {
        self.check_index(n, m)?;
        Ok(CartesianPoint::new(self.x_of(n), self.y_of(m), 0.0))
    }

    /// All element centers in flattening order.
    pub fn element_centers(&self) -> Vec<CartesianPoint> {
        self.indices()
            .map(|(n, m)| CartesianPoint::new(self.x_of(n), self.y_of(m), 0.0))
            .collect()
    }

    fn x_of(&self, n: i64) -> f64 {
        (n as f64 + self.indexing.offset()) * self.l_x
    }

    fn y_of(&self, m: i64) -> f64 {
        (m as f64 + self.indexing.offset()) * self.l_y
    }

    fn check_index(&self, n: i64, m: i64) -> Result<()> {
        let (nr, mr) = (self.n_range(), self.m_range());
        if nr.contains(&n) && mr.contains(&m) {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                n,
                m,
                n_lo: *nr.start(),
                n_hi: *nr.end(),
                m_lo: *mr.start(),
                m_hi: *mr.end(),
            })
        }
    }
}

fn checked_norm(endpoint: &CartesianPoint, center: &CartesianPoint) -> Result<f64> {
    let d = endpoint.distance_to(center);
    if d == 0.0 {
        return Err(Error::CoincidentPoints {
            x: center.x,
            y: center.y,
            z: center.z,
        });
    }
    Ok(d)
}

/// Euclidean distance from `endpoint` to the center of element `(n, m)`.
pub fn exact_distance(endpoint: &CartesianPoint, panel: &IrsPanel, n: i64, m: i64) -> Result<f64> {
    let center = panel.element_center(n, m)?;
    checked_norm(endpoint, &center)
}

/// Fresnel excess `r~` for an element at abscissas `(x, y)` in the panel plane.
///
/// The approximate distance is `endpoint.r + r~`. The xy cross term of the
/// Taylor expansion is not included.
pub fn fresnel_excess_at(endpoint: &SphericalPoint, x: f64, y: f64) -> f64 {
    let st = endpoint.theta.sin();
    let (sp, cp) = endpoint.phi.sin_cos();
    let ux = cp * st;
    let uy = sp * st;
    x * x * (1.0 - ux * ux) / (2.0 * endpoint.r) - x * ux + y * y * (1.0 - uy * uy) / (2.0 * endpoint.r)
        - y * uy
}

/// Fresnel excess distance of element `(n, m)` as seen from `endpoint`.
pub fn fresnel_excess(endpoint: &SphericalPoint, panel: &IrsPanel, n: i64, m: i64) -> Result<f64> {
    endpoint.validate()?;
    let c = panel.element_center(n, m)?;
    Ok(fresnel_excess_at(endpoint, c.x, c.y))
}

/// Distance from `endpoint` to element `(n, m)` under `mode`.
pub fn element_distance(
    endpoint: &CartesianPoint,
    panel: &IrsPanel,
    n: i64,
    m: i64,
    mode: DistanceMode,
) -> Result<f64> {
    match mode {
        DistanceMode::Exact => exact_distance(endpoint, panel, n, m),
        DistanceMode::Fresnel => {
            let sph = endpoint.to_spherical()?;
            Ok(sph.r + fresnel_excess(&sph, panel, n, m)?)
        }
    }
}

/// Tx -> element -> Rx propagation delay (s).
pub fn propagation_delay(
    panel: &IrsPanel,
    n: i64,
    m: i64,
    tx: &CartesianPoint,
    rx: &CartesianPoint,
    mode: DistanceMode,
) -> Result<f64> {
    let r_t = element_distance(tx, panel, n, m, mode)?;
    let r_r = element_distance(rx, panel, n, m, mode)?;
    Ok((r_t + r_r) / SPEED_OF_LIGHT)
}

/// Delays of every element in flattening order.
pub fn element_delays(
    panel: &IrsPanel,
    tx: &CartesianPoint,
    rx: &CartesianPoint,
    mode: DistanceMode,
) -> Result<Vec<f64>> {
    match mode {
        DistanceMode::Exact => panel
            .element_centers()
            .iter()
            .map(|c| Ok((checked_norm(tx, c)? + checked_norm(rx, c)?) / SPEED_OF_LIGHT))
            .collect(),
        DistanceMode::Fresnel => {
            let (ts, rs) = (tx.to_spherical()?, rx.to_spherical()?);
            Ok(panel
                .element_centers()
                .iter()
                .map(|c| {
                    let r_t = ts.r + fresnel_excess_at(&ts, c.x, c.y);
                    let r_r = rs.r + fresnel_excess_at(&rs, c.x, c.y);
                    (r_t + r_r) / SPEED_OF_LIGHT
                })
                .collect())
        }
    }
}

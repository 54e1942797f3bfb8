//! Surface grid and near-field feed link.
//!
//! The feed sits on the surface normal at distance `d0` and radiates with
//! the power pattern
//!
//! ```text
//! omega(x, y) = (alpha + 1) d0^(alpha + 1) / (2 pi) * (d0^2 + x^2 + y^2)^(-(alpha + 3) / 2)
//! ```
//!
//! which integrates to one over the whole plane. The energy captured by an
//! element is the integral of `omega` over its rectangle, and the aperture
//! functionals `A1..A4` aggregate those energies in one of three forms: the
//! discrete element sums, the wavelength-normalized integrals over the finite
//! surface, and the closed forms over the infinite plane.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{checked_rect_integral, compensated_sum, GaussLegendre, Rect};

/// Uniform rectangular grid of `n_x * n_y` elements centred on the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceGeometry {
    pub n_x: usize,
    pub n_y: usize,
    /// Element width along x, meters.
    pub delta_x: f64,
    /// Element height along y, meters.
    pub delta_y: f64,
    /// Carrier wavelength, meters.
    pub wavelength: f64,
}

impl SurfaceGeometry {
    pub fn new(
        n_x: usize,
        n_y: usize,
        delta_x: f64,
        delta_y: f64,
        wavelength: f64,
    ) -> Result<Self> {
        let s = Self {
            n_x,
            n_y,
            delta_x,
            delta_y,
            wavelength,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_x == 0 {
            return Err(Error::param("surface.n_x", "must be at least 1"));
        }
        if self.n_y == 0 {
            return Err(Error::param("surface.n_y", "must be at least 1"));
        }
        for (name, v) in [
            ("surface.delta_x", self.delta_x),
            ("surface.delta_y", self.delta_y),
            ("surface.wavelength", self.wavelength),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(
                    name,
                    format!("must be a positive length, got {v}"),
                ));
            }
        }
        Ok(())
    }

    pub fn n_elements(&self) -> usize {
        self.n_x * self.n_y
    }

    /// Element area in units of squared wavelength, `delta_x delta_y / lambda^2`.
    pub fn area_ratio(&self) -> f64 {
        self.delta_x * self.delta_y / (self.wavelength * self.wavelength)
    }

    /// The region covered by the whole surface.
    pub fn extent(&self) -> Rect {
        Rect::centered(
            0.0,
            0.0,
            self.n_x as f64 * self.delta_x,
            self.n_y as f64 * self.delta_y,
        )
    }

    /// Same element pitch and wavelength, different element counts.
    pub fn resized(&self, n_x: usize, n_y: usize) -> Self {
        Self { n_x, n_y, ..*self }
    }
}

/// Feed placement and radiation pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeedGeometry {
    /// Distance from the feed to the surface centre along the normal, meters.
    pub d0: f64,
    /// Gain exponent; the feed gain is `2 (alpha + 1)`.
    pub alpha: f64,
}

impl FeedGeometry {
    pub fn new(d0: f64, alpha: f64) -> Result<Self> {
        let f = Self { d0, alpha };
        f.validate()?;
        Ok(f)
    }

    /// `alpha > 1` keeps every aperture functional finite over the plane.
    pub fn validate(&self) -> Result<()> {
        if !(self.d0.is_finite() && self.d0 > 0.0) {
            return Err(Error::param(
                "feed.d0",
                format!("must be a positive distance, got {}", self.d0),
            ));
        }
        if !(self.alpha.is_finite() && self.alpha > 1.0) {
            return Err(Error::InvalidAlpha(self.alpha));
        }
        Ok(())
    }

    fn omega_prefactor(&self) -> f64 {
        (self.alpha + 1.0) * self.d0.powf(self.alpha + 1.0) / (2.0 * PI)
    }

    /// Power density of the feed pattern at `(x, y)` on the surface.
    pub fn omega(&self, x: f64, y: f64) -> f64 {
        self.omega_prefactor() * (self.d0 * self.d0 + x * x + y * y).powf(-(self.alpha + 3.0) / 2.0)
    }

    /// `omega^(k/2)` as a closure, with the constants hoisted.
    fn omega_power(&self, k: u32) -> impl Fn(f64, f64) -> f64 {
        let half_k = k as f64 / 2.0;
        let pre = self.omega_prefactor().powf(half_k);
        let expo = -(self.alpha + 3.0) / 2.0 * half_k;
        let d0_sq = self.d0 * self.d0;
        move |x, y| pre * (d0_sq + x * x + y * y).powf(expo)
    }
}

/// Centres of all elements, row-major (`n = j * n_x + i`).
pub fn element_centers(surface: &SurfaceGeometry) -> Vec<(f64, f64)> {
    let ox = (surface.n_x as f64 - 1.0) / 2.0;
    let oy = (surface.n_y as f64 - 1.0) / 2.0;
    (0..surface.n_y)
        .flat_map(|j| {
            (0..surface.n_x).map(move |i| {
                (
                    (i as f64 - ox) * surface.delta_x,
                    (j as f64 - oy) * surface.delta_y,
                )
            })
        })
        .collect()
}

/// Distance from the feed to a point on the surface.
pub fn feed_distance(center: (f64, f64), feed: &FeedGeometry) -> f64 {
    let (x, y) = center;
    (x * x + y * y + feed.d0 * feed.d0).sqrt()
}

/// Fraction of the feed energy captured by the element centred at `center`.
pub fn element_energy(
    center: (f64, f64),
    surface: &SurfaceGeometry,
    feed: &FeedGeometry,
) -> Result<f64> {
    let rect = Rect::centered(center.0, center.1, surface.delta_x, surface.delta_y);
    checked_rect_integral(rect, &|x, y| feed.omega(x, y))
}

/// Complex feed-to-element channel `sqrt(gamma) exp(-j 2 pi d / lambda)`.
pub fn feed_channel(
    center: (f64, f64),
    surface: &SurfaceGeometry,
    feed: &FeedGeometry,
) -> Result<Complex64> {
    let gamma = element_energy(center, surface, feed)?;
    Ok(feed_channel_from(
        gamma,
        feed_distance(center, feed),
        surface.wavelength,
    ))
}

/// Feed channel for a known captured energy and path length.
pub fn feed_channel_from(gamma: f64, distance: f64, wavelength: f64) -> Complex64 {
    Complex64::from_polar(gamma.sqrt(), -2.0 * PI * distance / wavelength)
}

/// Element centres together with their captured energies.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementGrid {
    pub centers: Vec<(f64, f64)>,
    pub energies: Vec<f64>,
}

impl ElementGrid {
    pub fn build(surface: &SurfaceGeometry, feed: &FeedGeometry) -> Result<Self> {
        surface.validate()?;
        feed.validate()?;
        let centers = element_centers(surface);
        let energies = centers
            .par_iter()
            .map(|&c| element_energy(c, surface, feed))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { centers, energies })
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn sqrt_energies(&self) -> Vec<f64> {
        self.energies.iter().map(|g| g.sqrt()).collect()
    }

    pub fn total_energy(&self) -> f64 {
        compensated_sum(self.energies.iter().copied())
    }
}

/// Which of the three representations an [`ApertureSums`] value holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ApertureForm {
    Discrete,
    FiniteIntegral,
    InfinitePlane,
}

/// Closed form used for the infinite-plane `A1`.
///
/// The two agree at `alpha = 2`. `AsPrinted` multiplies by `(alpha - 1)`;
/// `ReDerived` divides by it, which is what the radial integral of
/// `omega^(1/2)` actually evaluates to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum A1Variant {
    #[default]
    AsPrinted,
    ReDerived,
}

impl std::str::FromStr for A1Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "as-printed" => Ok(Self::AsPrinted),
            "re-derived" => Ok(Self::ReDerived),
            other => Err(format!(
                "unknown A1 variant `{other}` (expected as-printed or re-derived)"
            )),
        }
    }
}

impl std::fmt::Display for A1Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::AsPrinted => "as-printed",
            Self::ReDerived => "re-derived",
        })
    }
}

/// The four aperture functionals `A1..A4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApertureSums {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub form: ApertureForm,
}

impl ApertureSums {
    pub fn get(&self, k: u32) -> f64 {
        match k {
            1 => self.a1,
            2 => self.a2,
            3 => self.a3,
            4 => self.a4,
            _ => panic!("aperture functional index {k} outside 1..=4"),
        }
    }

    /// Rescales the wavelength-normalized integral forms to the scale of the
    /// discrete sums, `a_k * lambda^(k - 2)`. Discrete values pass through.
    pub fn to_discrete_scale(&self, wavelength: f64) -> Self {
        if self.form == ApertureForm::Discrete {
            return *self;
        }
        Self {
            a1: self.a1 / wavelength,
            a2: self.a2,
            a3: self.a3 * wavelength,
            a4: self.a4 * wavelength * wavelength,
            form: self.form,
        }
    }
}

/// `A_k = sum_n gamma_n^(k/2)`.
pub fn aperture_sums_discrete(grid: &ElementGrid) -> ApertureSums {
    let e = &grid.energies;
    ApertureSums {
        a1: compensated_sum(e.iter().map(|g| g.sqrt())),
        a2: compensated_sum(e.iter().copied()),
        a3: compensated_sum(e.iter().map(|g| g * g.sqrt())),
        a4: compensated_sum(e.iter().map(|g| g * g)),
        form: ApertureForm::Discrete,
    }
}

/// Normalized integrals of `omega^(k/2)` over the surface region,
/// `A_k = (delta_x delta_y / lambda^2)^((k - 2) / 2) * integral`.
pub fn aperture_sums_integral(
    surface: &SurfaceGeometry,
    feed: &FeedGeometry,
) -> Result<ApertureSums> {
    surface.validate()?;
    feed.validate()?;
    let centers = element_centers(surface);
    let ratio = surface.area_ratio();
    let mut out = [0.0; 4];
    for k in 1..=4u32 {
        let f = feed.omega_power(k);
        let parts = centers
            .par_iter()
            .map(|&(cx, cy)| {
                checked_rect_integral(Rect::centered(cx, cy, surface.delta_x, surface.delta_y), &f)
            })
            .collect::<Result<Vec<_>>>()?;
        let norm = ratio.powf((k as f64 - 2.0) / 2.0);
        out[k as usize - 1] = norm * compensated_sum(parts);
    }
    Ok(ApertureSums {
        a1: out[0],
        a2: out[1],
        a3: out[2],
        a4: out[3],
        form: ApertureForm::FiniteIntegral,
    })
}

/// Closed forms of the normalized integrals over the infinite plane.
pub fn aperture_sums_infinite(
    surface: &SurfaceGeometry,
    feed: &FeedGeometry,
    variant: A1Variant,
) -> Result<ApertureSums> {
    surface.validate()?;
    feed.validate()?;
    let r = surface.area_ratio();
    let a = feed.alpha;
    let d0 = feed.d0;
    let a1_core = (8.0 * PI).sqrt() * (a + 1.0).sqrt() * d0;
    let a1 = r.powf(-0.5)
        * match variant {
            A1Variant::AsPrinted => a1_core * (a - 1.0),
            A1Variant::ReDerived => a1_core / (a - 1.0),
        };
    let a3 = r.sqrt() * (2.0 / (9.0 * PI)).sqrt() * (a + 1.0).powf(1.5) / (a + 5.0 / 3.0) / d0;
    let a4 = r / (4.0 * PI) * (a + 1.0).powi(2) / (a + 2.0) / (d0 * d0);
    Ok(ApertureSums {
        a1,
        a2: 1.0,
        a3,
        a4,
        form: ApertureForm::InfinitePlane,
    })
}

/// Multiple of `d0` at which plane integrals switch from quadrature to the
/// analytic tail.
pub const PLANE_TRUNCATION: f64 = 20.0;

/// Integral of `omega^(k/2)` over the square `[-h, h]^2`, by panels of
/// width at most `d0 / 2` (one quadrant, times four).
pub fn omega_power_square_integral(feed: &FeedGeometry, k: u32, half_side: f64) -> Result<f64> {
    feed.validate()?;
    let f = feed.omega_power(k);
    let panels = ((2.0 * half_side / feed.d0).ceil() as usize).max(1);
    let w = half_side / panels as f64;
    let rects: Vec<Rect> = (0..panels)
        .flat_map(|i| {
            (0..panels).map(move |j| Rect {
                x0: i as f64 * w,
                x1: (i + 1) as f64 * w,
                y0: j as f64 * w,
                y1: (j + 1) as f64 * w,
            })
        })
        .collect();
    let parts = rects
        .par_iter()
        .map(|&r| checked_rect_integral(r, &f))
        .collect::<Result<Vec<_>>>()?;
    Ok(4.0 * compensated_sum(parts))
}

/// Integral of `omega^(k/2)` outside the square `[-h, h]^2`.
///
/// In polar coordinates the radial part is closed-form,
/// `int_R^inf r (d0^2 + r^2)^(-p) dr = (d0^2 + R^2)^(1 - p) / (2 (p - 1))`
/// with `p = k (alpha + 3) / 4`, leaving a smooth angular integral over one
/// octant where the square's edge sits at `R = h / cos(theta)`.
pub fn omega_power_tail_outside_square(feed: &FeedGeometry, k: u32, half_side: f64) -> Result<f64> {
    feed.validate()?;
    let p = k as f64 * (feed.alpha + 3.0) / 4.0;
    if p <= 1.0 {
        return Err(Error::InvalidAlpha(feed.alpha));
    }
    let pre = feed.omega_prefactor().powf(k as f64 / 2.0);
    let d0_sq = feed.d0 * feed.d0;
    let h_sq = half_side * half_side;
    let radial = |theta: f64| {
        let c = theta.cos();
        (d0_sq + h_sq / (c * c)).powf(1.0 - p) / (2.0 * (p - 1.0))
    };
    let rule = GaussLegendre::new(32);
    let pieces = 8;
    let step = PI / 4.0 / pieces as f64;
    let angular = compensated_sum(
        (0..pieces).map(|i| rule.integrate(i as f64 * step, (i + 1) as f64 * step, radial)),
    );
    Ok(8.0 * pre * angular)
}

/// Plane integral of `omega^(k/2)`: quadrature over the square of half-side
/// [`PLANE_TRUNCATION`]` * d0` plus the analytic tail outside it.
pub fn omega_power_plane_integral(feed: &FeedGeometry, k: u32) -> Result<f64> {
    let h = PLANE_TRUNCATION * feed.d0;
    Ok(omega_power_square_integral(feed, k, h)? + omega_power_tail_outside_square(feed, k, h)?)
}

/// Infinite-plane functionals evaluated numerically, normalized the same way
/// as [`aperture_sums_infinite`].
pub fn aperture_sums_plane_numeric(
    surface: &SurfaceGeometry,
    feed: &FeedGeometry,
) -> Result<ApertureSums> {
    surface.validate()?;
    let r = surface.area_ratio();
    let mut out = [0.0; 4];
    for k in 1..=4u32 {
        out[k as usize - 1] = r.powf((k as f64 - 2.0) / 2.0) * omega_power_plane_integral(feed, k)?;
    }
    Ok(ApertureSums {
        a1: out[0],
        a2: out[1],
        a3: out[2],
        a4: out[3],
        form: ApertureForm::InfinitePlane,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn section_iv() -> (SurfaceGeometry, FeedGeometry) {
        let lambda = 0.3;
        (
            SurfaceGeometry::new(8, 8, lambda / 4.0, lambda / 4.0, lambda).unwrap(),
            FeedGeometry::new(10.0 * lambda, 2.0).unwrap(),
        )
    }

    /// Energy inside the disk of radius `r`, from the radial closed form.
    fn disk_energy(feed: &FeedGeometry, r: f64) -> f64 {
        1.0 - (1.0 + r * r / (feed.d0 * feed.d0)).powf(-(feed.alpha + 1.0) / 2.0)
    }

    #[test]
    fn single_element_sits_at_origin() {
        let s = SurfaceGeometry::new(1, 1, 0.1, 0.1, 0.3).unwrap();
        assert_eq!(element_centers(&s), vec![(0.0, 0.0)]);
    }

    #[test]
    fn two_elements_straddle_origin() {
        let s = SurfaceGeometry::new(2, 1, 1.0, 1.0, 0.3).unwrap();
        let xs: Vec<f64> = element_centers(&s).iter().map(|c| c.0).collect();
        assert_eq!(xs, vec![-0.5, 0.5]);
    }

    #[test]
    fn four_elements_at_quarter_wavelength_pitch() {
        let s = SurfaceGeometry::new(4, 1, 0.075, 0.075, 0.3).unwrap();
        let xs: Vec<f64> = element_centers(&s).iter().map(|c| c.0).collect();
        let want = [-0.1125, -0.0375, 0.0375, 0.1125];
        for (x, w) in xs.iter().zip(want) {
            assert!((x - w).abs() < 1e-15, "{x} vs {w}");
        }
    }

    #[test]
    fn centers_are_point_symmetric_and_row_major() {
        let s = SurfaceGeometry::new(5, 3, 0.2, 0.1, 0.3).unwrap();
        let c = element_centers(&s);
        assert_eq!(c.len(), 15);
        assert!(c[1].0 > c[0].0 && c[1].1 == c[0].1);
        for (a, b) in c.iter().zip(c.iter().rev()) {
            assert!((a.0 + b.0).abs() < 1e-15 && (a.1 + b.1).abs() < 1e-15);
        }
    }

    #[test]
    fn feed_distance_examples() {
        let f = |d0| FeedGeometry { d0, alpha: 2.0 };
        assert_eq!(feed_distance((0.0, 0.0), &f(3.0)), 3.0);
        assert_eq!(feed_distance((3.0, 4.0), &f(0.0)), 5.0);
        assert_eq!(feed_distance((1.0, 2.0), &f(2.0)), 3.0);
    }

    #[test]
    fn rejects_invalid_geometry() {
        assert!(SurfaceGeometry::new(0, 4, 0.1, 0.1, 0.3).is_err());
        assert!(SurfaceGeometry::new(4, 4, -0.1, 0.1, 0.3).is_err());
        assert!(SurfaceGeometry::new(4, 4, 0.1, 0.1, 0.0).is_err());
        assert!(FeedGeometry::new(0.0, 2.0).is_err());
        assert_eq!(FeedGeometry::new(3.0, 1.0), Err(Error::InvalidAlpha(1.0)));
    }

    #[test]
    fn mirrored_elements_capture_equal_energy() {
        let (s, f) = section_iv();
        let a = element_energy((0.3, -0.15), &s, &f).unwrap();
        let b = element_energy((-0.3, 0.15), &s, &f).unwrap();
        assert!((a - b).abs() <= 1e-15 * a);
    }

    #[test]
    fn centred_square_captures_more_than_inscribed_disk() {
        let feed = FeedGeometry::new(3.0, 2.0).unwrap();
        let square = omega_power_square_integral(&feed, 2, feed.d0).unwrap();
        let disk = disk_energy(&feed, feed.d0);
        assert!((disk - (1.0 - 2f64.powf(-1.5))).abs() < 1e-15);
        assert!(square > disk, "{square} <= {disk}");
        assert!(square < disk_energy(&feed, feed.d0 * 2f64.sqrt()));
    }

    #[test]
    fn feed_channel_phase_and_modulus() {
        let g = feed_channel_from(1.0, 0.3, 0.3);
        assert!((g - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let g = feed_channel_from(0.25, 1.0, 0.3);
        assert!((g.norm() - 0.5).abs() < 1e-15);
        let g = feed_channel_from(1.0, 0.15, 0.3);
        assert!((g - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn grid_energies_are_fractions_summing_below_one() {
        let (s, f) = section_iv();
        let grid = ElementGrid::build(&s, &f).unwrap();
        assert_eq!(grid.len(), 64);
        assert!(grid.energies.iter().all(|&g| g > 0.0 && g < 1.0));
        assert!(grid.total_energy() < 1.0);
        let n = grid.len();
        for i in 0..n {
            assert!(
                (grid.energies[i] - grid.energies[n - 1 - i]).abs() <= 1e-15 * grid.energies[i]
            );
        }
    }

    #[test]
    fn discrete_sums_of_small_examples() {
        let one = ElementGrid {
            centers: vec![(0.0, 0.0)],
            energies: vec![1.0],
        };
        let s = aperture_sums_discrete(&one);
        assert_eq!((s.a1, s.a2, s.a3, s.a4), (1.0, 1.0, 1.0, 1.0));

        let two = ElementGrid {
            centers: vec![(-0.5, 0.0), (0.5, 0.0)],
            energies: vec![0.25, 0.25],
        };
        let s = aperture_sums_discrete(&two);
        assert_eq!((s.a1, s.a2, s.a3, s.a4), (1.0, 0.5, 0.25, 0.125));
    }

    #[test]
    fn captured_energy_grows_toward_one() {
        let (s, f) = section_iv();
        let mut last = 0.0;
        for n in [4, 16, 64, 256] {
            let a2 = aperture_sums_discrete(&ElementGrid::build(&s.resized(n, n), &f).unwrap()).a2;
            assert!(a2 > last && a2 < 1.0);
            last = a2;
        }
        // 256 x 256 quarter-wave elements span 19.2 m, i.e. +-3.2 d0.
        assert!(last > 0.97, "{last}");
    }

    #[test]
    fn element_energies_sum_to_integral_a2() {
        let (s, f) = section_iv();
        let grid = ElementGrid::build(&s, &f).unwrap();
        let integral = aperture_sums_integral(&s, &f).unwrap();
        assert!((grid.total_energy() - integral.a2).abs() <= 1e-10 * integral.a2);
    }

    #[test]
    fn a2_carries_no_pitch_factor() {
        let lambda = 0.3;
        let f = FeedGeometry::new(3.0, 2.0).unwrap();
        let coarse = SurfaceGeometry::new(8, 8, lambda / 4.0, lambda / 4.0, lambda).unwrap();
        let fine = SurfaceGeometry::new(16, 16, lambda / 8.0, lambda / 8.0, lambda).unwrap();
        let a = aperture_sums_integral(&coarse, &f).unwrap().a2;
        let b = aperture_sums_integral(&fine, &f).unwrap().a2;
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn discrete_and_integral_forms_differ_by_wavelength_powers() {
        let (s, f) = section_iv();
        let s = s.resized(32, 32);
        let discrete = aperture_sums_discrete(&ElementGrid::build(&s, &f).unwrap());
        let rescaled = aperture_sums_integral(&s, &f)
            .unwrap()
            .to_discrete_scale(s.wavelength);
        for k in 1..=4 {
            let rel = (discrete.get(k) - rescaled.get(k)).abs() / discrete.get(k);
            assert!(rel < 1e-4, "k={k}: rel {rel:e}");
        }
    }

    #[test]
    fn infinite_closed_forms_at_section_iv_values() {
        let (s, f) = section_iv();
        let inf = aperture_sums_infinite(&s, &f, A1Variant::AsPrinted).unwrap();
        assert_eq!(inf.a2, 1.0);
        // ratio 1/16: A1 = 4 sqrt(8 pi) sqrt(3) * 1 * 3
        assert!((inf.a1 - 4.0 * (24.0 * PI).sqrt() * 3.0).abs() < 1e-12);
        assert!((inf.a1 - 104.1985).abs() < 1e-3);
        // ratio 1/16: A4 = (1/16)(1/(4 pi)) 9 (1/4)(1/9)
        assert!((inf.a4 - 1.0 / (256.0 * PI)).abs() < 1e-16);
        let re = aperture_sums_infinite(&s, &f, A1Variant::ReDerived).unwrap();
        assert!((re.a1 - inf.a1).abs() < 1e-12);
    }

    #[test]
    fn infinite_form_rejects_alpha_at_most_one() {
        let (s, _) = section_iv();
        let f = FeedGeometry {
            d0: 3.0,
            alpha: 0.9,
        };
        assert_eq!(
            aperture_sums_infinite(&s, &f, A1Variant::AsPrinted),
            Err(Error::InvalidAlpha(0.9))
        );
    }

    #[test]
    fn plane_integral_of_omega_is_one() {
        let f = FeedGeometry::new(3.0, 2.0).unwrap();
        let total = omega_power_plane_integral(&f, 2).unwrap();
        assert!((total - 1.0).abs() < 1e-10, "{total}");
    }

    #[test]
    fn reflecting_the_grid_leaves_sums_unchanged() {
        let (s, f) = section_iv();
        let s = s.resized(6, 3);
        let grid = ElementGrid::build(&s, &f).unwrap();
        let a = aperture_sums_discrete(&grid);
        for reflect in [|c: (f64, f64)| (-c.0, c.1), |c: (f64, f64)| (c.0, -c.1)] {
            let centers: Vec<_> = grid.centers.iter().map(|&c| reflect(c)).collect();
            let energies = centers
                .iter()
                .map(|&c| element_energy(c, &s, &f).unwrap())
                .collect();
            let b = aperture_sums_discrete(&ElementGrid { centers, energies });
            for k in 1..=4 {
                assert!((a.get(k) - b.get(k)).abs() <= 1e-14 * a.get(k));
            }
        }
    }
}

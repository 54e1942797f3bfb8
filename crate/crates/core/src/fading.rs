//! Nakagami-m fading on the surface-to-user links.
//!
//! Amplitudes are normalized to unit power, `E[q^2] = 1`, so
//! `q = sqrt(G)` with `G ~ Gamma(shape m, scale 1/m)`. Phases are uniform on
//! `[0, 2 pi)` and are cancelled by the surface's phase alignment, which
//! collapses the cascaded channel to a real, non-negative sum.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::geometry::{
    feed_channel_from, feed_distance, ElementGrid, FeedGeometry, SurfaceGeometry,
};

/// Which half-space a user is served from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Reflect,
    Refract,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserLinkParams {
    /// Nakagami shape.
    pub m: f64,
    /// Large-scale fading gain (linear).
    pub rho_large: f64,
    pub side: Side,
}

impl UserLinkParams {
    pub fn validate(&self, field: &str) -> Result<()> {
        check_shape(self.m)?;
        if !(self.rho_large.is_finite() && self.rho_large > 0.0) {
            return Err(Error::param(
                format!("{field}.large_scale"),
                format!("must be positive, got {}", self.rho_large),
            ));
        }
        Ok(())
    }
}

fn check_shape(m: f64) -> Result<()> {
    if m.is_finite() && m >= 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidShape(m))
    }
}

/// Reflection/refraction amplitude split of every element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSplit {
    pub beta1: f64,
    pub beta2: f64,
}

impl SurfaceSplit {
    /// Split with `beta1^2 = reflect_power` and `beta2^2 = 1 - reflect_power`.
    pub fn from_reflect_power(reflect_power: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&reflect_power) {
            return Err(Error::param(
                "surface_split.beta1_sq",
                format!("must lie in [0, 1], got {reflect_power}"),
            ));
        }
        Ok(Self {
            beta1: reflect_power.sqrt(),
            beta2: (1.0 - reflect_power).sqrt(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta1 < 0.0 || self.beta2 < 0.0 {
            return Err(Error::param(
                "surface_split",
                "amplitudes must be non-negative",
            ));
        }
        let total = self.beta1 * self.beta1 + self.beta2 * self.beta2;
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::param(
                "surface_split",
                format!("beta1^2 + beta2^2 = {total}, must equal 1"),
            ));
        }
        Ok(())
    }

    pub fn beta(&self, side: Side) -> f64 {
        match side {
            Side::Reflect => self.beta1,
            Side::Refract => self.beta2,
        }
    }
}

/// Raw moments `E[q^k]`, `k = 1..4`, of a unit-power Nakagami amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NakagamiMoments {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub mu4: f64,
}

impl NakagamiMoments {
    pub fn new(m: f64) -> Result<Self> {
        check_shape(m)?;
        Ok(Self {
            mu1: gamma_ratio(m, 0.5) / m.sqrt(),
            mu2: 1.0,
            mu3: gamma_ratio(m, 1.5) / (m * m.sqrt()),
            mu4: 1.0 + 1.0 / m,
        })
    }
}

/// `Gamma(m + a) / Gamma(m)`.
///
/// Differencing log-gamma loses about `log10(ln Gamma(m))` digits, so large
/// shapes switch to the asymptotic series in `1/m`.
fn gamma_ratio(m: f64, a: f64) -> f64 {
    if m < 1000.0 {
        return (ln_gamma(m + a) - ln_gamma(m)).exp();
    }
    let c1 = a * (a - 1.0) / 2.0;
    let c2 = a * (a - 1.0) * (a - 2.0) * (3.0 * a - 1.0) / 24.0;
    let c3 = a * a * (a - 1.0) * (a - 1.0) * (a - 2.0) * (a - 3.0) / 48.0;
    let inv = 1.0 / m;
    m.powf(a) * (1.0 + inv * (c1 + inv * (c2 + inv * c3)))
}

/// `E[q^k]` for `k` in `1..=4`.
pub fn nakagami_moment(m: f64, k: u32) -> Result<f64> {
    let mo = NakagamiMoments::new(m)?;
    match k {
        1 => Ok(mo.mu1),
        2 => Ok(mo.mu2),
        3 => Ok(mo.mu3),
        4 => Ok(mo.mu4),
        _ => Err(Error::InvalidOrder(k)),
    }
}

/// Draws unit-power Nakagami amplitudes.
#[derive(Debug, Clone, Copy)]
pub struct NakagamiSampler {
    power: Gamma<f64>,
}

impl NakagamiSampler {
    pub fn new(m: f64) -> Result<Self> {
        check_shape(m)?;
        let power = Gamma::new(m, 1.0 / m).map_err(|e| Error::param("m", e.to_string()))?;
        Ok(Self { power })
    }

    #[inline]
    pub fn amplitude<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.power.sample(rng).sqrt()
    }

    /// `sum_n weights[n] * q_n` for a fresh set of amplitudes.
    #[inline]
    pub fn weighted_sum<R: Rng + ?Sized>(&self, weights: &[f64], rng: &mut R) -> f64 {
        weights.iter().map(|w| w * self.amplitude(rng)).sum()
    }
}

/// One realization of the small-scale fading on all `N` elements.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallScaleDraw {
    pub q: Vec<f64>,
    pub psi: Vec<f64>,
}

impl SmallScaleDraw {
    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }
}

/// Draws `n` amplitudes followed by `n` phases from `rng`.
pub fn sample_small_scale<R: Rng + ?Sized>(
    params: &UserLinkParams,
    n: usize,
    rng: &mut R,
) -> Result<SmallScaleDraw> {
    let sampler = NakagamiSampler::new(params.m)?;
    let q = (0..n).map(|_| sampler.amplitude(rng)).collect();
    let psi = (0..n).map(|_| rng.random::<f64>() * TAU).collect();
    Ok(SmallScaleDraw { q, psi })
}

/// Element phase that cancels both the feed path and the fading phase.
pub fn aligned_phase(
    center: (f64, f64),
    feed: &FeedGeometry,
    surface: &SurfaceGeometry,
    psi: f64,
) -> f64 {
    let theta = 2.0 * PI / surface.wavelength * feed_distance(center, feed) - psi;
    let r = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Phase-aligned end-to-end gain `sqrt(rho) beta sum_n sqrt(gamma_n) q_n`.
pub fn equivalent_gain(
    grid: &ElementGrid,
    beta: f64,
    params: &UserLinkParams,
    draw: &SmallScaleDraw,
) -> Result<f64> {
    if grid.len() != draw.len() {
        return Err(Error::DimensionMismatch {
            grid: grid.len(),
            draw: draw.len(),
        });
    }
    let s: f64 = grid
        .energies
        .iter()
        .zip(&draw.q)
        .map(|(g, q)| g.sqrt() * q)
        .sum();
    Ok(params.rho_large.sqrt() * beta * s)
}

/// Full complex cascade `sum_n g_n zeta_n h_n` for arbitrary element phases.
pub fn cascaded_channel(
    grid: &ElementGrid,
    surface: &SurfaceGeometry,
    feed: &FeedGeometry,
    beta: f64,
    params: &UserLinkParams,
    draw: &SmallScaleDraw,
    phases: &[f64],
) -> Result<Complex64> {
    if grid.len() != draw.len() || grid.len() != phases.len() {
        return Err(Error::DimensionMismatch {
            grid: grid.len(),
            draw: draw.len().min(phases.len()),
        });
    }
    let rho_sqrt = params.rho_large.sqrt();
    let mut acc = Complex64::new(0.0, 0.0);
    for (n, &theta) in phases.iter().enumerate() {
        let g = feed_channel_from(
            grid.energies[n],
            feed_distance(grid.centers[n], feed),
            surface.wavelength,
        );
        let zeta = Complex64::from_polar(beta, theta);
        let h = Complex64::from_polar(rho_sqrt * draw.q[n], draw.psi[n]);
        acc += g * zeta * h;
    }
    Ok(acc)
}

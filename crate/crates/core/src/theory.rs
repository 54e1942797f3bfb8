//! Closed-form ergodic-rate analysis.
//!
//! `|h|^2` is matched to a Gamma law through its first two moments. The
//! matched law has a closed-form mean of `1/|h|^2`, and pushing that mean
//! inside the rate expression gives a Jensen lower bound on each user's
//! ergodic rate. The bound is then taken to three limits: unbounded transmit
//! power, unbounded element count, and a continuous aperture.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fading::NakagamiMoments;
use crate::geometry::{
    aperture_sums_discrete, aperture_sums_infinite, aperture_sums_integral, A1Variant,
    ApertureSums, ElementGrid, FeedGeometry, SurfaceGeometry,
};
use crate::quadrature::compensated_sum;
use crate::rates::{noma_impairment, noma_signal, sinr_rate, HardwareQuality, PowerSplit, User};
use crate::scenario::Scenario;

/// Denominators of the inverse moment below this fraction of `E[|h|^2]^2`
/// are treated as zero.
pub const INVERSE_MOMENT_GUARD: f64 = 1e-12;

/// Which aperture functionals feed the moment formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// `A_k = sum_n gamma_n^(k/2)`, exact for the modelled surface.
    #[default]
    Discrete,
    /// Wavelength-normalized integrals of `omega^(k/2)` over the aperture.
    PaperIntegral,
}

impl std::str::FromStr for Convention {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "discrete" => Ok(Self::Discrete),
            "paper-integral" => Ok(Self::PaperIntegral),
            other => Err(format!(
                "unknown convention `{other}` (expected discrete or paper-integral)"
            )),
        }
    }
}

impl std::fmt::Display for Convention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Discrete => "discrete",
            Self::PaperIntegral => "paper-integral",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TheoryOptions {
    pub convention: Convention,
    pub a1_variant: A1Variant,
}

/// First two moments of `|h|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub e_h2: f64,
    pub e_h4: f64,
}

/// Cumulants of the unit-power Nakagami amplitude, `[k1, k2, k3, k4]`.
pub fn amplitude_cumulants(mo: &NakagamiMoments) -> [f64; 4] {
    let (m1, m2, m3, m4) = (mo.mu1, mo.mu2, mo.mu3, mo.mu4);
    let m1_sq = m1 * m1;
    [
        m1,
        m2 - m1_sq,
        m3 - 3.0 * m2 * m1 + 2.0 * m1_sq * m1,
        m4 - 4.0 * m3 * m1 - 3.0 * m2 * m2 + 12.0 * m2 * m1_sq - 6.0 * m1_sq * m1_sq,
    ]
}

/// Moments of `|h|^2` for amplitude moments `mo` and link gain `rho beta^2`.
///
/// `|h| = sqrt(gain) * sum_n a_n q_n` with `a_n^k` summing to `A_k`, so the
/// cumulants of the sum are `k_j A_j` and the raw moments follow from them.
/// Every term of the fourth moment is non-negative except the `k3`, `k4`
/// contributions, and all five are summed with compensation.
pub fn channel_moments_with(mo: &NakagamiMoments, sums: &ApertureSums, gain: f64) -> MomentSet {
    let [k1, k2, k3, k4] = amplitude_cumulants(mo);
    let (a1, a2, a3, a4) = (sums.a1, sums.a2, sums.a3, sums.a4);
    let mean_sq = k1 * k1 * a1 * a1;
    let e2 = k2 * a2 + mean_sq;
    let e4 = compensated_sum([
        mean_sq * mean_sq,
        6.0 * k2 * a2 * mean_sq,
        3.0 * k2 * k2 * a2 * a2,
        4.0 * k3 * k1 * a3 * a1,
        k4 * a4,
    ]);
    MomentSet {
        e_h2: gain * e2,
        e_h4: gain * gain * e4,
    }
}

pub fn channel_moments(
    sums: &ApertureSums,
    m: f64,
    rho_large: f64,
    beta: f64,
) -> Result<MomentSet> {
    let mo = NakagamiMoments::new(m)?;
    Ok(channel_moments_with(&mo, sums, rho_large * beta * beta))
}

/// `E[|h|^2] = rho beta^2 (mu2 A2 + mu1^2 (A1^2 - A2))`.
pub fn channel_moment2(sums: &ApertureSums, m: f64, rho_large: f64, beta: f64) -> Result<f64> {
    Ok(channel_moments(sums, m, rho_large, beta)?.e_h2)
}

pub fn channel_moment4(sums: &ApertureSums, m: f64, rho_large: f64, beta: f64) -> Result<f64> {
    Ok(channel_moments(sums, m, rho_large, beta)?.e_h4)
}

/// Gamma law with the same first two moments, and its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaFit {
    pub nu: f64,
    pub varsigma: f64,
    pub nu_inv: f64,
    pub varsigma_inv: f64,
}

pub fn gamma_fit(mom: &MomentSet) -> Result<GammaFit> {
    let sq = mom.e_h2 * mom.e_h2;
    let var = mom.e_h4 - sq;
    if !(var > 0.0) {
        return Err(Error::DegenerateDistribution {
            e_h4: mom.e_h4,
            e_h2_sq: sq,
        });
    }
    let nu = sq / var;
    let varsigma = var / mom.e_h2;
    Ok(GammaFit {
        nu,
        varsigma,
        nu_inv: nu,
        varsigma_inv: 1.0 / varsigma,
    })
}

/// Mean of `1/|h|^2` under the matched inverse-Gamma law,
/// `E[|h|^2] / (2 E[|h|^2]^2 - E[|h|^4])`. Needs a matched shape above 1.
pub fn inverse_mean(mom: &MomentSet) -> Result<f64> {
    let sq = mom.e_h2 * mom.e_h2;
    let den = 2.0 * sq - mom.e_h4;
    if !(den > INVERSE_MOMENT_GUARD * sq) {
        return Err(Error::NonIntegrableInverseMoment(format!(
            "2 E[|h|^2]^2 - E[|h|^4] = {den:e} (matched Gamma shape <= 1)"
        )));
    }
    Ok(mom.e_h2 / den)
}

/// Noise-scaling coefficient of one user and the cumulants behind it.
///
/// `eta = rho beta^2 E[1/|h|^2]`, written without the link gain so it
/// depends on the surface and the fading shape only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaCoefficients {
    pub iota1: f64,
    pub iota2: f64,
    pub iota3: f64,
    pub iota4: f64,
    pub eta: f64,
}

pub fn eta_coefficient(sums: &ApertureSums, m: f64) -> Result<EtaCoefficients> {
    eta_coefficient_with(&NakagamiMoments::new(m)?, sums)
}

pub fn eta_coefficient_with(mo: &NakagamiMoments, sums: &ApertureSums) -> Result<EtaCoefficients> {
    let [i1, i2, i3, i4] = amplitude_cumulants(mo);
    let (a1, a2, a3, a4) = (sums.a1, sums.a2, sums.a3, sums.a4);
    let lead = i1 * i1 * a1 * a1;
    let num = lead + i2 * a2;
    let den = compensated_sum([
        lead * lead,
        -2.0 * i2 * a2 * lead,
        -(i2 * i2 * a2 * a2),
        -4.0 * i3 * i1 * a3 * a1,
        -(i4 * a4),
    ]);
    if !(den > INVERSE_MOMENT_GUARD * num * num) {
        return Err(Error::NonIntegrableInverseMoment(format!(
            "noise-scaling denominator {den:e} is not positive"
        )));
    }
    Ok(EtaCoefficients {
        iota1: i1,
        iota2: i2,
        iota3: i3,
        iota4: i4,
        eta: num / den,
    })
}

/// The infinite-surface coefficient written out directly in terms of the
/// geometry, with the `(alpha - 1)` factor of `A1` multiplying.
pub fn eta_infinite_printed(surface: &SurfaceGeometry, feed: &FeedGeometry, m: f64) -> Result<f64> {
    surface.validate()?;
    feed.validate()?;
    let [i1, i2, i3, i4] = amplitude_cumulants(&NakagamiMoments::new(m)?);
    let r = surface.area_ratio();
    let (a, d0) = (feed.alpha, feed.d0);
    let pi = std::f64::consts::PI;
    let c = 8.0 * pi * (a + 1.0) * (a - 1.0).powi(2) * d0 * d0;
    let num = c / r * i1 * i1 + i2;
    let den = compensated_sum([
        c * c * i1.powi(4) / (r * r),
        -2.0 * c * i2 * i1 * i1 / r,
        -(i2 * i2),
        -16.0 * (a + 1.0).powi(2) * (a - 1.0) / (3.0 * (a + 5.0 / 3.0)) * i3 * i1,
        -(r * (a + 1.0).powi(2) / (4.0 * pi * (a + 2.0) * d0 * d0) * i4),
    ]);
    if !(den > INVERSE_MOMENT_GUARD * num * num) {
        return Err(Error::NonIntegrableInverseMoment(format!(
            "infinite-surface denominator {den:e} is not positive"
        )));
    }
    Ok(num / den)
}

/// Aperture functionals of the scenario's finite surface.
pub fn aperture_sums(s: &Scenario, convention: Convention) -> Result<ApertureSums> {
    match convention {
        Convention::Discrete => Ok(aperture_sums_discrete(&ElementGrid::build(
            &s.surface, &s.feed,
        )?)),
        Convention::PaperIntegral => aperture_sums_integral(&s.surface, &s.feed),
    }
}

/// Infinite-surface functionals, on the scale of the chosen convention.
pub fn infinite_sums(s: &Scenario, opts: TheoryOptions) -> Result<ApertureSums> {
    let inf = aperture_sums_infinite(&s.surface, &s.feed, opts.a1_variant)?;
    Ok(match opts.convention {
        Convention::Discrete => inf.to_discrete_scale(s.surface.wavelength),
        Convention::PaperIntegral => inf,
    })
}

/// Per-user noise-scaling coefficients. Independent of transmit power,
/// power split and hardware quality, so sweeps over those reuse one value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseScaling {
    pub eta1: f64,
    pub eta2: f64,
}

impl NoiseScaling {
    pub fn from_sums(s: &Scenario, sums: &ApertureSums) -> Result<Self> {
        Ok(Self {
            eta1: eta_coefficient(sums, s.user1.m)?.eta,
            eta2: eta_coefficient(sums, s.user2.m)?.eta,
        })
    }

    pub fn finite(s: &Scenario, opts: TheoryOptions) -> Result<Self> {
        Self::from_sums(s, &aperture_sums(s, opts.convention)?)
    }

    pub fn infinite(s: &Scenario, opts: TheoryOptions) -> Result<Self> {
        Self::from_sums(s, &infinite_sums(s, opts)?)
    }

    /// Continuous-aperture limit: only the `A1^2` term survives, `eta = 1 / (mu1 A1)^2`.
    pub fn continuous(s: &Scenario, opts: TheoryOptions) -> Result<Self> {
        let a1 = infinite_sums(s, opts)?.a1;
        let one = |m: f64| -> Result<f64> {
            let mu1 = NakagamiMoments::new(m)?.mu1;
            Ok(1.0 / (mu1 * mu1 * a1 * a1))
        };
        Ok(Self {
            eta1: one(s.user1.m)?,
            eta2: one(s.user2.m)?,
        })
    }

    pub fn get(&self, user: User) -> f64 {
        match user {
            User::One => self.eta1,
            User::Two => self.eta2,
        }
    }

    /// NOMA lower bounds `(R1, R2)` at the scenario's power, split and hardware.
    pub fn noma_bounds(&self, s: &Scenario) -> (f64, f64) {
        let one = |u: User| {
            let g = s.budget.rho * s.link_gain(u);
            sinr_rate(
                g * noma_signal(u, &s.power_split, &s.hq),
                g * noma_impairment(u, &s.power_split, &s.hq),
                self.get(u) * s.budget.noise(u),
            )
        };
        (one(User::One), one(User::Two))
    }

    /// OMA lower bounds, each user on its own resource share at full power.
    pub fn oma_bounds(&self, s: &Scenario) -> (f64, f64) {
        let one = |u: User| {
            let share = s.oma_split.get(u);
            if share == 0.0 {
                return 0.0;
            }
            let g = s.budget.rho * s.link_gain(u);
            share
                * sinr_rate(
                    g * s.hq.clean(u),
                    g * s.hq.distorted(u),
                    self.get(u) * s.budget.noise(u),
                )
        };
        (one(User::One), one(User::Two))
    }
}

pub fn rate_lower_bounds(s: &Scenario, opts: TheoryOptions) -> Result<(f64, f64)> {
    Ok(NoiseScaling::finite(s, opts)?.noma_bounds(s))
}

pub fn oma_lower_bounds(s: &Scenario, opts: TheoryOptions) -> Result<(f64, f64)> {
    Ok(NoiseScaling::finite(s, opts)?.oma_bounds(s))
}

/// High-power limits of the NOMA bounds. A zero residual impairment gives
/// `f64::INFINITY`.
pub fn asymptotic_rho(split: &PowerSplit, hq: &HardwareQuality) -> (f64, f64) {
    let one = |u: User| {
        sinr_rate(
            noma_signal(u, split, hq),
            noma_impairment(u, split, hq),
            0.0,
        )
    };
    (one(User::One), one(User::Two))
}

/// High-power limits of the OMA bounds, `kappa_i' log2(1 / (1 - e_i))`.
pub fn oma_asymptotic_rho(resource: &PowerSplit, hq: &HardwareQuality) -> (f64, f64) {
    let one = |u: User| {
        let share = resource.get(u);
        if share == 0.0 {
            return 0.0;
        }
        share * sinr_rate(hq.clean(u), hq.distorted(u), 0.0)
    };
    (one(User::One), one(User::Two))
}

/// Pre-log factor of the NOMA bound as transmit power grows.
pub fn snr_slope(user: User, hq: &HardwareQuality) -> u8 {
    match user {
        User::One if hq.is_ideal() => 1,
        _ => 0,
    }
}

pub fn asymptotic_n(s: &Scenario, opts: TheoryOptions) -> Result<(f64, f64)> {
    Ok(NoiseScaling::infinite(s, opts)?.noma_bounds(s))
}

pub fn continuous_aperture(s: &Scenario, opts: TheoryOptions) -> Result<(f64, f64)> {
    Ok(NoiseScaling::continuous(s, opts)?.noma_bounds(s))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub r1_lb: f64,
    pub r2_lb: f64,
    pub r1_inf_rho: f64,
    pub r2_inf_rho: f64,
    pub r1_inf_n: f64,
    pub r2_inf_n: f64,
    pub r1_cont: f64,
    pub r2_cont: f64,
    pub s1: u8,
    pub s2: u8,
}

pub fn bound_report(s: &Scenario, opts: TheoryOptions) -> Result<BoundReport> {
    let (r1_lb, r2_lb) = rate_lower_bounds(s, opts)?;
    let (r1_inf_rho, r2_inf_rho) = asymptotic_rho(&s.power_split, &s.hq);
    let (r1_inf_n, r2_inf_n) = asymptotic_n(s, opts)?;
    let (r1_cont, r2_cont) = continuous_aperture(s, opts)?;
    Ok(BoundReport {
        r1_lb,
        r2_lb,
        r1_inf_rho,
        r2_inf_rho,
        r1_inf_n,
        r2_inf_n,
        r1_cont,
        r2_cont,
        s1: snr_slope(User::One, &s.hq),
        s2: snr_slope(User::Two, &s.hq),
    })
}

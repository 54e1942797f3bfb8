//! Instantaneous NOMA and OMA rates under transceiver hardware impairments.
//!
//! Impairments follow the multiplicative quality-factor model: a symbol sent
//! with power `P` over a channel of power `|h|^2` reaches the receiver as a
//! clean share `eps_u eps_v`, a base-station distortion share
//! `eps_u (1 - eps_v)` and a user-side distortion share `1 - eps_u`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum User {
    One,
    Two,
}

/// Hardware quality factors in `[0, 1]`; 1 is ideal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardwareQuality {
    pub eps_v: f64,
    pub eps_u1: f64,
    pub eps_u2: f64,
}

impl HardwareQuality {
    pub const IDEAL: Self = Self {
        eps_v: 1.0,
        eps_u1: 1.0,
        eps_u2: 1.0,
    };

    pub fn uniform(eps: f64) -> Self {
        Self {
            eps_v: eps,
            eps_u1: eps,
            eps_u2: eps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("hardware.eps_v", self.eps_v),
            ("hardware.eps_u1", self.eps_u1),
            ("hardware.eps_u2", self.eps_u2),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::param(name, format!("must lie in [0, 1], got {v}")));
            }
        }
        Ok(())
    }

    pub fn is_ideal(&self) -> bool {
        self.eps_v == 1.0 && self.eps_u1 == 1.0 && self.eps_u2 == 1.0
    }

    /// Clean share `eps_u eps_v` seen at `user`.
    pub fn clean(&self, user: User) -> f64 {
        self.eps_u(user) * self.eps_v
    }

    /// Distorted share `1 - eps_u eps_v`, summed from its two non-negative parts.
    pub fn distorted(&self, user: User) -> f64 {
        let eu = self.eps_u(user);
        (1.0 - eu) + eu * (1.0 - self.eps_v)
    }

    pub fn eps_u(&self, user: User) -> f64 {
        match user {
            User::One => self.eps_u1,
            User::Two => self.eps_u2,
        }
    }
}

/// Power-domain split between the two superposed symbols.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSplit {
    pub kappa1: f64,
    pub kappa2: f64,
}

impl PowerSplit {
    pub fn new(kappa1: f64) -> Self {
        Self {
            kappa1,
            kappa2: 1.0 - kappa1,
        }
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        if self.kappa1 < 0.0 || self.kappa2 < 0.0 {
            return Err(Error::param(field, "coefficients must be non-negative"));
        }
        let total = self.kappa1 + self.kappa2;
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::param(
                field,
                format!("kappa1 + kappa2 = {total}, must equal 1"),
            ));
        }
        Ok(())
    }

    pub fn get(&self, user: User) -> f64 {
        match user {
            User::One => self.kappa1,
            User::Two => self.kappa2,
        }
    }
}

/// Transmit power and per-user noise powers, all linear.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub rho: f64,
    pub sigma2_1: f64,
    pub sigma2_2: f64,
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("transmit_power", self.rho),
            ("user1.noise", self.sigma2_1),
            ("user2.noise", self.sigma2_2),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn noise(&self, user: User) -> f64 {
        match user {
            User::One => self.sigma2_1,
            User::Two => self.sigma2_2,
        }
    }
}

/// Power of each labelled component of one user's received signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HwiPowerBudget {
    pub desired_s1: f64,
    pub bs_distortion_s1: f64,
    pub ue_distortion_s1: f64,
    pub desired_s2: f64,
    pub bs_distortion_s2: f64,
    pub ue_distortion_s2: f64,
    pub noise: f64,
}

impl HwiPowerBudget {
    pub fn total(&self) -> f64 {
        self.desired_s1
            + self.bs_distortion_s1
            + self.ue_distortion_s1
            + self.desired_s2
            + self.bs_distortion_s2
            + self.ue_distortion_s2
            + self.noise
    }
}

pub fn hwi_power_budget(
    h_sq: f64,
    user: User,
    split: &PowerSplit,
    hq: &HardwareQuality,
    budget: &LinkBudget,
) -> HwiPowerBudget {
    let eu = hq.eps_u(user);
    let ev = hq.eps_v;
    let p = budget.rho * h_sq;
    let shares = |kappa: f64| {
        (
            kappa * eu * ev * p,
            kappa * eu * (1.0 - ev) * p,
            kappa * (1.0 - eu) * p,
        )
    };
    let (d1, b1, u1) = shares(split.kappa1);
    let (d2, b2, u2) = shares(split.kappa2);
    HwiPowerBudget {
        desired_s1: d1,
        bs_distortion_s1: b1,
        ue_distortion_s1: u1,
        desired_s2: d2,
        bs_distortion_s2: b2,
        ue_distortion_s2: u2,
        noise: budget.noise(user),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NomaRates {
    pub r1: f64,
    pub r2: f64,
    /// False when this realization breaks the assumed decoding order.
    pub sic_order_holds: bool,
}

/// NOMA rates with UE-1 as the SIC (stronger) user, in bits/s/Hz.
///
/// The fixed role assignment is kept even when a realization violates the
/// ordering; the violation is flagged in the result.
pub fn noma_rates(
    h1_sq: f64,
    h2_sq: f64,
    split: &PowerSplit,
    hq: &HardwareQuality,
    budget: &LinkBudget,
) -> NomaRates {
    let rho = budget.rho;
    let r1 = sinr_rate(
        rho * noma_signal(User::One, split, hq),
        rho * noma_impairment(User::One, split, hq),
        budget.sigma2_1 / h1_sq,
    );
    let r2 = sinr_rate(
        rho * noma_signal(User::Two, split, hq),
        rho * noma_impairment(User::Two, split, hq),
        budget.sigma2_2 / h2_sq,
    );
    NomaRates {
        r1,
        r2,
        sic_order_holds: sic_order_holds(h1_sq, h2_sq, budget),
    }
}

/// Clean power fraction of the user's own symbol, `kappa_i eps_ui eps_v`.
pub fn noma_signal(user: User, split: &PowerSplit, hq: &HardwareQuality) -> f64 {
    split.get(user) * hq.clean(user)
}

/// Power fraction that stays as interference or distortion after decoding.
///
/// UE-1 has cancelled `s2`, leaving `1 - kappa1 e1 - kappa2 e2`; UE-2 treats
/// `s1` as noise, leaving `1 - kappa2 e2`. Both are built from non-negative
/// parts so they never go negative through rounding. The `s2` residue seen
/// by UE-1 is weighted with `eps_u2` on purpose.
pub fn noma_impairment(user: User, split: &PowerSplit, hq: &HardwareQuality) -> f64 {
    match user {
        User::One => {
            split.kappa1 * hq.distorted(User::One) + split.kappa2 * hq.distorted(User::Two)
        }
        User::Two => split.kappa2 * hq.distorted(User::Two) + split.kappa1,
    }
}

/// `log2(1 + signal / (impairment + noise_over_gain))`, the channel power
/// already divided out of numerator and denominator.
#[inline]
pub fn sinr_rate(signal: f64, impairment: f64, noise_over_gain: f64) -> f64 {
    if signal == 0.0 {
        return 0.0;
    }
    let denom = impairment + noise_over_gain;
    if denom == 0.0 {
        return f64::INFINITY;
    }
    (signal / denom).ln_1p() / std::f64::consts::LN_2
}

/// OMA rates with resource shares `resource.kappa1`, `resource.kappa2`.
pub fn oma_rates(
    h1_sq: f64,
    h2_sq: f64,
    resource: &PowerSplit,
    hq: &HardwareQuality,
    budget: &LinkBudget,
) -> (f64, f64) {
    let one = |user: User, h_sq: f64| {
        let share = resource.get(user);
        if share == 0.0 {
            return 0.0;
        }
        share
            * sinr_rate(
                budget.rho * hq.clean(user),
                budget.rho * hq.distorted(user),
                budget.noise(user) / h_sq,
            )
    };
    (one(User::One, h1_sq), one(User::Two, h2_sq))
}

pub fn geometric_mean_rate(r1: f64, r2: f64) -> f64 {
    (r1 * r2).sqrt()
}

/// True iff UE-1's noise-normalized channel is strictly stronger.
pub fn sic_order_holds(h1_sq: f64, h2_sq: f64, budget: &LinkBudget) -> bool {
    h1_sq / budget.sigma2_1 > h2_sq / budget.sigma2_2
}

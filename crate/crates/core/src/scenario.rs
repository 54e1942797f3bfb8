//! The full parameter set of one two-user downlink.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fading::{Side, SurfaceSplit, UserLinkParams};
use crate::geometry::{FeedGeometry, SurfaceGeometry};
use crate::rates::{HardwareQuality, LinkBudget, PowerSplit, User};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub surface: SurfaceGeometry,
    pub feed: FeedGeometry,
    pub split_surface: SurfaceSplit,
    pub user1: UserLinkParams,
    pub user2: UserLinkParams,
    pub hq: HardwareQuality,
    pub budget: LinkBudget,
    /// NOMA power-allocation coefficients.
    pub power_split: PowerSplit,
    /// OMA time/frequency resource shares.
    pub oma_split: PowerSplit,
}

pub const DEFAULT_WAVELENGTH: f64 = 0.3;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

impl Default for Scenario {
    /// Quarter-wavelength 32 x 32 surface fed from `10 lambda`, equal
    /// reflect/refract split, Rayleigh links, ideal hardware, 20 dB / -20 dB
    /// receive SNRs at unit transmit power.
    fn default() -> Self {
        let lambda = DEFAULT_WAVELENGTH;
        let delta = lambda / 4.0;
        Self {
            surface: SurfaceGeometry {
                n_x: 32,
                n_y: 32,
                delta_x: delta,
                delta_y: delta,
                wavelength: lambda,
            },
            feed: FeedGeometry {
                d0: 10.0 * lambda,
                alpha: 2.0,
            },
            split_surface: SurfaceSplit {
                beta1: 0.5f64.sqrt(),
                beta2: 0.5f64.sqrt(),
            },
            user1: UserLinkParams {
                m: 1.0,
                rho_large: db_to_linear(20.0),
                side: Side::Reflect,
            },
            user2: UserLinkParams {
                m: 1.0,
                rho_large: db_to_linear(-20.0),
                side: Side::Refract,
            },
            hq: HardwareQuality::IDEAL,
            budget: LinkBudget {
                rho: 1.0,
                sigma2_1: 1.0,
                sigma2_2: 1.0,
            },
            power_split: PowerSplit::new(0.2),
            oma_split: PowerSplit::new(0.5),
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.surface.validate()?;
        self.feed.validate()?;
        self.split_surface.validate()?;
        self.user1.validate("user1")?;
        self.user2.validate("user2")?;
        self.hq.validate()?;
        self.budget.validate()?;
        self.power_split.validate("power_split")?;
        self.oma_split.validate("oma_split")?;
        if self.user1.side == self.user2.side {
            return Err(Error::param(
                "user2.side",
                "the two users must be on opposite sides of the surface",
            ));
        }
        Ok(())
    }

    pub fn user(&self, user: User) -> &UserLinkParams {
        match user {
            User::One => &self.user1,
            User::Two => &self.user2,
        }
    }

    pub fn beta(&self, user: User) -> f64 {
        self.split_surface.beta(self.user(user).side)
    }

    /// `rho_large * beta^2`, the scale of `|h|^2` before the aperture sums.
    pub fn link_gain(&self, user: User) -> f64 {
        let b = self.beta(user);
        self.user(user).rho_large * b * b
    }

    pub fn with_grid(mut self, n_x: usize, n_y: usize) -> Self {
        self.surface = self.surface.resized(n_x, n_y);
        self
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.budget.rho = rho;
        self
    }

    pub fn with_kappa1(mut self, kappa1: f64) -> Self {
        self.power_split = PowerSplit::new(kappa1);
        self
    }

    pub fn with_hq(mut self, hq: HardwareQuality) -> Self {
        self.hq = hq;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        let s = Scenario::default();
        s.validate().unwrap();
        assert_eq!(s.surface.n_elements(), 1024);
        assert!((s.link_gain(User::One) - 50.0).abs() < 1e-12);
    }

    #[test]
    fn db_round_trip() {
        for db in [-20.0, 0.0, 3.0, 120.0] {
            assert!((linear_to_db(db_to_linear(db)) - db).abs() < 1e-12);
        }
    }

    #[test]
    fn same_side_users_are_rejected() {
        let mut s = Scenario::default();
        s.user2.side = Side::Reflect;
        assert!(s.validate().unwrap_err().to_string().contains("user2.side"));
    }
}

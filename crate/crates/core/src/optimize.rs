//! Power allocation that maximizes the NOMA geometric-mean rate.
//!
//! The search is a bisection on the sign of a central-difference derivative
//! of `ln R_GM(kappa1)`, which assumes the objective is unimodal on the
//! search interval.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rates::{geometric_mean_rate, noma_rates, oma_rates, HardwareQuality, PowerSplit};
use crate::scenario::Scenario;
use crate::theory::{asymptotic_rho, NoiseScaling};

/// Largest central-difference step on `kappa1`.
pub const DERIVATIVE_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveSource {
    #[default]
    TheoryBound,
    MonteCarlo,
}

impl std::str::FromStr for ObjectiveSource {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "theory-bound" => Ok(Self::TheoryBound),
            "monte-carlo" => Ok(Self::MonteCarlo),
            other => Err(format!(
                "unknown objective `{other}` (expected theory-bound or monte-carlo)"
            )),
        }
    }
}

impl std::fmt::Display for ObjectiveSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::TheoryBound => "theory-bound",
            Self::MonteCarlo => "monte-carlo",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub tol_kappa: f64,
    pub kappa_floor: f64,
    pub objective_source: ObjectiveSource,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            tol_kappa: 1e-9,
            kappa_floor: 1e-6,
            objective_source: ObjectiveSource::TheoryBound,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa_floor > 0.0 && self.kappa_floor < 0.5) {
            return Err(Error::param(
                "optimizer.kappa_floor",
                "must lie in (0, 0.5)",
            ));
        }
        if !(self.tol_kappa > 0.0) {
            return Err(Error::param("optimizer.tol_kappa", "must be positive"));
        }
        Ok(())
    }
}

/// Where per-user rates come from when evaluating a candidate split.
#[derive(Debug, Clone, Copy)]
pub enum Objective<'a> {
    /// Jensen lower bounds with precomputed noise scaling.
    Bound(NoiseScaling),
    /// Sample means over fixed channel-power draws `(|h1|^2, |h2|^2)`.
    Samples(&'a [(f64, f64)]),
}

impl Objective<'_> {
    pub fn noma(&self, s: &Scenario) -> (f64, f64) {
        match self {
            Objective::Bound(ns) => ns.noma_bounds(s),
            Objective::Samples(draws) => mean_pair(draws, |h1, h2| {
                let r = noma_rates(h1, h2, &s.power_split, &s.hq, &s.budget);
                (r.r1, r.r2)
            }),
        }
    }

    pub fn oma(&self, s: &Scenario) -> (f64, f64) {
        match self {
            Objective::Bound(ns) => ns.oma_bounds(s),
            Objective::Samples(draws) => mean_pair(draws, |h1, h2| {
                oma_rates(h1, h2, &s.oma_split, &s.hq, &s.budget)
            }),
        }
    }
}

fn mean_pair(draws: &[(f64, f64)], f: impl Fn(f64, f64) -> (f64, f64)) -> (f64, f64) {
    let (mut a, mut b) = (0.0, 0.0);
    for &(h1, h2) in draws {
        let (x, y) = f(h1, h2);
        a += x;
        b += y;
    }
    let n = draws.len().max(1) as f64;
    (a / n, b / n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaOptimum {
    pub kappa1: f64,
    pub r1: f64,
    pub r2: f64,
    pub r_gm: f64,
    /// False when the derivative kept one sign and an endpoint was returned.
    pub interior: bool,
}

/// Maximizes `sqrt(R1 R2)` over `kappa1` in `[floor, 1 - floor]`.
pub fn maximize_geometric_mean<F>(rates: F, cfg: &OptimizerConfig) -> Result<KappaOptimum>
where
    F: Fn(f64) -> (f64, f64),
{
    cfg.validate()?;
    let eval = |k: f64| {
        let (r1, r2) = rates(k);
        KappaOptimum {
            kappa1: k,
            r1,
            r2,
            r_gm: geometric_mean_rate(r1, r2),
            interior: false,
        }
    };
    let log_gm = |k: f64| {
        let (r1, r2) = rates(k);
        0.5 * (r1.ln() + r2.ln())
    };
    let slope = |k: f64| {
        let h = DERIVATIVE_STEP.min(0.5 * k).min(0.5 * (1.0 - k));
        log_gm(k + h) - log_gm(k - h)
    };

    let (mut lo, mut hi) = (cfg.kappa_floor, 1.0 - cfg.kappa_floor);
    let left = eval(lo);
    let right = eval(hi);
    let better_end = if right.r_gm > left.r_gm { right } else { left };
    if !(slope(lo) > 0.0 && slope(hi) < 0.0) {
        return Ok(better_end);
    }
    while hi - lo > cfg.tol_kappa {
        let mid = 0.5 * (lo + hi);
        if slope(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut best = eval(0.5 * (lo + hi));
    best.interior = true;
    if best.r_gm >= better_end.r_gm {
        Ok(best)
    } else {
        Ok(better_end)
    }
}

pub fn optimize_kappa_noma(
    s: &Scenario,
    objective: &Objective,
    cfg: &OptimizerConfig,
) -> Result<KappaOptimum> {
    maximize_geometric_mean(|k| objective.noma(&s.with_kappa1(k)), cfg)
}

/// OMA geometric-mean rate at the equal resource split.
pub fn oma_baseline(s: &Scenario, objective: &Objective) -> KappaOptimum {
    let mut eq = *s;
    eq.oma_split = PowerSplit::new(0.5);
    let (r1, r2) = objective.oma(&eq);
    KappaOptimum {
        kappa1: 0.5,
        r1,
        r2,
        r_gm: geometric_mean_rate(r1, r2),
        interior: true,
    }
}

/// Best geometric mean of the high-power limits over the power split.
/// Ideal hardware has no plateau and yields `f64::INFINITY`.
pub fn high_power_plateau(hq: &HardwareQuality, cfg: &OptimizerConfig) -> Result<KappaOptimum> {
    if hq.is_ideal() {
        cfg.validate()?;
        return Ok(KappaOptimum {
            kappa1: f64::NAN,
            r1: f64::INFINITY,
            r2: f64::INFINITY,
            r_gm: f64::INFINITY,
            interior: false,
        });
    }
    maximize_geometric_mean(|k| asymptotic_rho(&PowerSplit::new(k), hq), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::TheoryOptions;

    #[test]
    fn concave_toy_objective() {
        // sqrt(k (1 - k)) peaks at one half.
        let opt = maximize_geometric_mean(|k| (k, 1.0 - k), &OptimizerConfig::default()).unwrap();
        assert!(opt.interior);
        assert!((opt.kappa1 - 0.5).abs() < 1e-6);
        assert!((opt.r_gm - 0.5).abs() < 1e-12);
    }

    #[test]
    fn monotone_objective_returns_endpoint() {
        let cfg = OptimizerConfig::default();
        let opt = maximize_geometric_mean(|k| (k, 1.0), &cfg).unwrap();
        assert!(!opt.interior);
        assert_eq!(opt.kappa1, 1.0 - cfg.kappa_floor);
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = OptimizerConfig {
            kappa_floor: 0.5,
            ..Default::default()
        };
        assert!(maximize_geometric_mean(|k| (k, 1.0 - k), &cfg).is_err());
        let cfg = OptimizerConfig {
            tol_kappa: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn boundaries_lose_to_the_optimum() {
        let s = Scenario::default().with_grid(16, 16);
        let ns = NoiseScaling::finite(&s, TheoryOptions::default()).unwrap();
        let obj = Objective::Bound(ns);
        let cfg = OptimizerConfig::default();
        let opt = optimize_kappa_noma(&s, &obj, &cfg).unwrap();
        assert!(opt.interior);
        for k in [cfg.kappa_floor, 1.0 - cfg.kappa_floor] {
            let (r1, r2) = obj.noma(&s.with_kappa1(k));
            assert!(geometric_mean_rate(r1, r2) < opt.r_gm);
        }
    }

    #[test]
    fn symmetric_users_split_oma_evenly() {
        let mut s = Scenario::default().with_grid(8, 8);
        s.user2.rho_large = s.user1.rho_large;
        let obj = Objective::Bound(NoiseScaling::finite(&s, TheoryOptions::default()).unwrap());
        let base = oma_baseline(&s, &obj);
        assert!((base.r1 - base.r2).abs() < 1e-12 * base.r1);
        for share in [0.25, 0.75] {
            let mut t = s;
            t.oma_split = PowerSplit::new(share);
            let (r1, r2) = obj.oma(&t);
            assert!(geometric_mean_rate(r1, r2) < base.r_gm);
        }
    }

    #[test]
    fn plateau_is_infinite_only_for_ideal_hardware() {
        let cfg = OptimizerConfig::default();
        assert!(high_power_plateau(&HardwareQuality::IDEAL, &cfg)
            .unwrap()
            .r_gm
            .is_infinite());
        let p = high_power_plateau(&HardwareQuality::uniform(0.99), &cfg).unwrap();
        assert!(p.r_gm.is_finite() && p.interior);
    }

    #[test]
    fn objective_source_round_trips() {
        for o in [ObjectiveSource::TheoryBound, ObjectiveSource::MonteCarlo] {
            assert_eq!(o.to_string().parse::<ObjectiveSource>().unwrap(), o);
        }
    }
}

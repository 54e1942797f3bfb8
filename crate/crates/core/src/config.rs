//! JSON run configuration.
//!
//! Every section is optional and falls back to [`Scenario::default`] and the
//! built-in experiment grids. Powers may be given linearly or in dB through
//! a `_db`-suffixed key, never both. Unknown keys are rejected so typos
//! surface as errors with a line and column.
//!
//! [`RunConfig::canonical_json`] writes the fully resolved configuration in
//! linear units; feeding it back through [`RunConfig::from_json`] reproduces
//! the same configuration bit for bit.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fading::{Side, SurfaceSplit, UserLinkParams};
use crate::geometry::{A1Variant, FeedGeometry, SurfaceGeometry};
use crate::mc::{McConfig, DEFAULT_BATCH};
use crate::optimize::{ObjectiveSource, OptimizerConfig};
use crate::rates::{HardwareQuality, LinkBudget, PowerSplit};
use crate::scenario::{db_to_linear, Scenario};
use crate::theory::{Convention, TheoryOptions};

pub const DEFAULT_TRIALS: u64 = 10_000;
pub const DEFAULT_SEED: u64 = 20_240_601;

/// Prefix of the header line that embeds the configuration in a CSV file.
pub const CSV_CONFIG_PREFIX: &str = "# config: ";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateVsNSpec {
    /// Element counts; each must be a perfect square (square surfaces).
    pub n_elements: Vec<usize>,
}

impl Default for RateVsNSpec {
    fn default() -> Self {
        Self {
            n_elements: vec![16, 64, 256, 1024, 4096],
        }
    }
}

impl RateVsNSpec {
    pub fn validate(&self) -> Result<()> {
        let field = "rate_vs_n.n_elements";
        if self.n_elements.is_empty() {
            return Err(Error::param(field, "must not be empty"));
        }
        for &n in &self.n_elements {
            if square_side(n).is_none() {
                return Err(Error::param(
                    field,
                    format!("{n} is not a positive perfect square"),
                ));
            }
        }
        strictly_increasing(field, self.n_elements.iter().map(|&n| n as f64))
    }

    pub fn grids(&self) -> Vec<(usize, usize)> {
        self.n_elements
            .iter()
            .filter_map(|&n| square_side(n).map(|s| (s, s)))
            .collect()
    }
}

fn square_side(n: usize) -> Option<usize> {
    if n == 0 {
        return None;
    }
    let s = (n as f64).sqrt().round() as usize;
    (s * s == n).then_some(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RgmVsPowerSpec {
    /// Transmit powers in dB.
    pub rho_db: Vec<f64>,
    /// Hardware quality applied to all three transceivers, one panel each.
    pub eps_panels: Vec<f64>,
}

impl Default for RgmVsPowerSpec {
    fn default() -> Self {
        Self {
            rho_db: (0..=24).map(|i| 5.0 * i as f64).collect(),
            eps_panels: vec![1.0, 1.0 - 1e-4, 1.0 - 1e-2],
        }
    }
}

impl RgmVsPowerSpec {
    pub fn validate(&self) -> Result<()> {
        if self.rho_db.is_empty() {
            return Err(Error::param("rgm_vs_power.rho_db", "must not be empty"));
        }
        if self.rho_db.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("rgm_vs_power.rho_db", "values must be finite"));
        }
        strictly_increasing("rgm_vs_power.rho_db", self.rho_db.iter().copied())?;
        if self.eps_panels.is_empty() {
            return Err(Error::param("rgm_vs_power.eps_panels", "must not be empty"));
        }
        for &e in &self.eps_panels {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::param(
                    "rgm_vs_power.eps_panels",
                    format!("must lie in [0, 1], got {e}"),
                ));
            }
        }
        Ok(())
    }
}

fn strictly_increasing(field: &str, values: impl Iterator<Item = f64>) -> Result<()> {
    let mut prev: Option<f64> = None;
    for v in values {
        if let Some(p) = prev {
            if !(v > p) {
                return Err(Error::param(field, "values must be strictly increasing"));
            }
        }
        prev = Some(v);
    }
    Ok(())
}

/// A fully resolved run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub mc: McConfig,
    pub optimizer: OptimizerConfig,
    pub theory: TheoryOptions,
    pub rate_vs_n: RateVsNSpec,
    pub rgm_vs_power: RgmVsPowerSpec,
    pub note: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::default(),
            mc: McConfig {
                trials: DEFAULT_TRIALS,
                seed: DEFAULT_SEED,
                batch: DEFAULT_BATCH,
                workers: 0,
            },
            optimizer: OptimizerConfig::default(),
            theory: TheoryOptions::default(),
            rate_vs_n: RateVsNSpec::default(),
            rgm_vs_power: RgmVsPowerSpec::default(),
            note: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.mc.validate()?;
        self.optimizer.validate()?;
        self.rate_vs_n.validate()?;
        self.rgm_vs_power.validate()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawConfig =
            serde_json::from_str(text).map_err(|e| Error::param("config", e.to_string()))?;
        let cfg = raw.resolve()?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads either a JSON document or a CSV file written by this tool.
    pub fn from_text(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('#') {
            let line = text
                .lines()
                .take_while(|l| l.starts_with('#'))
                .find_map(|l| l.strip_prefix(CSV_CONFIG_PREFIX))
                .ok_or_else(|| {
                    Error::param("config", "CSV header carries no embedded configuration")
                })?;
            return Self::from_json(line);
        }
        Self::from_json(text)
    }

    /// Resolved configuration as compact JSON in linear units. Worker count
    /// is left out because it never changes results.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(&RawConfig::from_resolved(self)).expect("config serializes")
    }

    /// SHA-256 of the canonical scenario section.
    pub fn scenario_digest(&self) -> String {
        scenario_digest(&self.scenario)
    }
}

pub fn scenario_digest(s: &Scenario) -> String {
    let json = serde_json::to_string(&RawConfig::scenario_only(s)).expect("scenario serializes");
    let hash = Sha256::digest(json.as_bytes());
    hash.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSurface {
    #[serde(skip_serializing_if = "Option::is_none")]
    n_x: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_y: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_y: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wavelength: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFeed {
    #[serde(skip_serializing_if = "Option::is_none")]
    d0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSurfaceSplit {
    #[serde(skip_serializing_if = "Option::is_none")]
    beta1_sq: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta2_sq: Option<f64>,
    /// Amplitudes, as written back by the canonical form.
    #[serde(skip_serializing_if = "Option::is_none")]
    beta1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta2: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawUser {
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    side: Option<Side>,
    #[serde(skip_serializing_if = "Option::is_none")]
    large_scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    large_scale_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise_db: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHardware {
    #[serde(skip_serializing_if = "Option::is_none")]
    eps_v: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps_u1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps_u2: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSplit {
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa2: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMc {
    #[serde(skip_serializing_if = "Option::is_none")]
    trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    batch: Option<u64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOptimizer {
    #[serde(skip_serializing_if = "Option::is_none")]
    tol_kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa_floor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    objective_source: Option<ObjectiveSource>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTheory {
    #[serde(skip_serializing_if = "Option::is_none")]
    convention: Option<Convention>,
    #[serde(skip_serializing_if = "Option::is_none")]
    a1_variant: Option<A1Variant>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRateVsN {
    #[serde(skip_serializing_if = "Option::is_none")]
    n_elements: Option<Vec<usize>>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRgmVsPower {
    #[serde(skip_serializing_if = "Option::is_none")]
    rho_db: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps_panels: Option<Vec<f64>>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    surface: Option<RawSurface>,
    #[serde(skip_serializing_if = "Option::is_none")]
    feed: Option<RawFeed>,
    #[serde(skip_serializing_if = "Option::is_none")]
    surface_split: Option<RawSurfaceSplit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    user1: Option<RawUser>,
    #[serde(skip_serializing_if = "Option::is_none")]
    user2: Option<RawUser>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hardware: Option<RawHardware>,
    #[serde(skip_serializing_if = "Option::is_none")]
    transmit_power: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    transmit_power_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    power_split: Option<RawSplit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oma_split: Option<RawSplit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    monte_carlo: Option<RawMc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    optimizer: Option<RawOptimizer>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theory: Option<RawTheory>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rate_vs_n: Option<RawRateVsN>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rgm_vs_power: Option<RawRgmVsPower>,
}

/// Picks the linear value, the dB value converted, or the default.
fn power(field: &str, linear: Option<f64>, db: Option<f64>, default: f64) -> Result<f64> {
    match (linear, db) {
        (Some(_), Some(_)) => Err(Error::param(
            field,
            format!("give either `{field}` or `{field}_db`, not both"),
        )),
        (Some(v), None) => Ok(v),
        (None, Some(d)) => Ok(db_to_linear(d)),
        (None, None) => Ok(default),
    }
}

/// A missing coefficient is the complement of the given one.
fn split(raw: Option<RawSplit>, default: PowerSplit) -> PowerSplit {
    match raw.map(|r| (r.kappa1, r.kappa2)) {
        Some((Some(k1), Some(k2))) => PowerSplit {
            kappa1: k1,
            kappa2: k2,
        },
        Some((Some(k1), None)) => PowerSplit::new(k1),
        Some((None, Some(k2))) => PowerSplit {
            kappa1: 1.0 - k2,
            kappa2: k2,
        },
        _ => default,
    }
}

fn surface_split(raw: Option<RawSurfaceSplit>, default: SurfaceSplit) -> Result<SurfaceSplit> {
    let Some(r) = raw else { return Ok(default) };
    let field = "surface_split";
    let powers = r.beta1_sq.is_some() || r.beta2_sq.is_some();
    let amplitudes = r.beta1.is_some() || r.beta2.is_some();
    let (b1_sq, b2_sq) = match (powers, amplitudes) {
        (true, true) => {
            return Err(Error::param(
                field,
                "give either beta1_sq/beta2_sq or beta1/beta2, not both",
            ));
        }
        (false, false) => return Ok(default),
        (true, false) => match (r.beta1_sq, r.beta2_sq) {
            (Some(a), Some(b)) => (a, b),
            (Some(a), None) => (a, 1.0 - a),
            (None, b) => {
                let b = b.unwrap_or(0.0);
                (1.0 - b, b)
            }
        },
        (false, true) => {
            let out = SurfaceSplit {
                beta1: r
                    .beta1
                    .unwrap_or_else(|| (1.0 - r.beta2.unwrap_or(0.0).powi(2)).max(0.0).sqrt()),
                beta2: r
                    .beta2
                    .unwrap_or_else(|| (1.0 - r.beta1.unwrap_or(0.0).powi(2)).max(0.0).sqrt()),
            };
            out.validate()?;
            return Ok(out);
        }
    };
    for (name, v) in [
        ("surface_split.beta1_sq", b1_sq),
        ("surface_split.beta2_sq", b2_sq),
    ] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::param(name, format!("must lie in [0, 1], got {v}")));
        }
    }
    if (b1_sq + b2_sq - 1.0).abs() > 1e-12 {
        return Err(Error::param(
            field,
            format!("beta1_sq + beta2_sq = {}, must equal 1", b1_sq + b2_sq),
        ));
    }
    Ok(SurfaceSplit {
        beta1: b1_sq.sqrt(),
        beta2: b2_sq.sqrt(),
    })
}

fn user(
    field: &str,
    raw: Option<RawUser>,
    default: UserLinkParams,
    default_noise: f64,
) -> Result<(UserLinkParams, f64)> {
    let r = raw.unwrap_or_default();
    let m = r.m.unwrap_or(default.m);
    if !(m.is_finite() && m >= 0.5) {
        return Err(Error::param(
            format!("{field}.m"),
            format!("Nakagami shape must be at least 0.5, got {m}"),
        ));
    }
    let params = UserLinkParams {
        m,
        rho_large: power(
            &format!("{field}.large_scale"),
            r.large_scale,
            r.large_scale_db,
            default.rho_large,
        )?,
        side: r.side.unwrap_or(default.side),
    };
    let noise = power(
        &format!("{field}.noise"),
        r.noise,
        r.noise_db,
        default_noise,
    )?;
    Ok((params, noise))
}

impl RawConfig {
    fn resolve(self) -> Result<RunConfig> {
        let d = RunConfig::default();
        let ds = d.scenario;

        let rs = self.surface.unwrap_or_default();
        let surface = SurfaceGeometry {
            n_x: rs.n_x.unwrap_or(ds.surface.n_x),
            n_y: rs.n_y.unwrap_or(ds.surface.n_y),
            delta_x: rs.delta_x.unwrap_or(ds.surface.delta_x),
            delta_y: rs.delta_y.unwrap_or(ds.surface.delta_y),
            wavelength: rs.wavelength.unwrap_or(ds.surface.wavelength),
        };
        let rf = self.feed.unwrap_or_default();
        let feed = FeedGeometry {
            d0: rf.d0.unwrap_or(ds.feed.d0),
            alpha: rf.alpha.unwrap_or(ds.feed.alpha),
        };
        if !(feed.alpha.is_finite() && feed.alpha > 1.0) {
            return Err(Error::param(
                "feed.alpha",
                format!(
                    "feed gain exponent must be greater than 1, got {}",
                    feed.alpha
                ),
            ));
        }

        let split_surface = surface_split(self.surface_split, ds.split_surface)?;

        let (user1, sigma2_1) = user("user1", self.user1, ds.user1, ds.budget.sigma2_1)?;
        let (user2, sigma2_2) = user("user2", self.user2, ds.user2, ds.budget.sigma2_2)?;
        let rh = self.hardware.unwrap_or_default();
        let hq = HardwareQuality {
            eps_v: rh.eps_v.unwrap_or(ds.hq.eps_v),
            eps_u1: rh.eps_u1.unwrap_or(ds.hq.eps_u1),
            eps_u2: rh.eps_u2.unwrap_or(ds.hq.eps_u2),
        };
        let rho = power(
            "transmit_power",
            self.transmit_power,
            self.transmit_power_db,
            ds.budget.rho,
        )?;

        let scenario = Scenario {
            surface,
            feed,
            split_surface,
            user1,
            user2,
            hq,
            budget: LinkBudget {
                rho,
                sigma2_1,
                sigma2_2,
            },
            power_split: split(self.power_split, ds.power_split),
            oma_split: split(self.oma_split, ds.oma_split),
        };

        let rm = self.monte_carlo.unwrap_or_default();
        let mc = McConfig {
            trials: rm.trials.unwrap_or(d.mc.trials),
            seed: rm.seed.unwrap_or(d.mc.seed),
            batch: rm.batch.unwrap_or(d.mc.batch),
            workers: 0,
        };
        let ro = self.optimizer.unwrap_or_default();
        let optimizer = OptimizerConfig {
            tol_kappa: ro.tol_kappa.unwrap_or(d.optimizer.tol_kappa),
            kappa_floor: ro.kappa_floor.unwrap_or(d.optimizer.kappa_floor),
            objective_source: ro.objective_source.unwrap_or(d.optimizer.objective_source),
        };
        let rt = self.theory.unwrap_or_default();
        let theory = TheoryOptions {
            convention: rt.convention.unwrap_or(d.theory.convention),
            a1_variant: rt.a1_variant.unwrap_or(d.theory.a1_variant),
        };
        let rate_vs_n = RateVsNSpec {
            n_elements: self
                .rate_vs_n
                .and_then(|r| r.n_elements)
                .unwrap_or(d.rate_vs_n.n_elements),
        };
        let rr = self.rgm_vs_power.unwrap_or_default();
        let rgm_vs_power = RgmVsPowerSpec {
            rho_db: rr.rho_db.unwrap_or(d.rgm_vs_power.rho_db),
            eps_panels: rr.eps_panels.unwrap_or(d.rgm_vs_power.eps_panels),
        };
        Ok(RunConfig {
            scenario,
            mc,
            optimizer,
            theory,
            rate_vs_n,
            rgm_vs_power,
            note: self.note,
        })
    }

    fn scenario_only(s: &Scenario) -> Self {
        let user = |u: &UserLinkParams, noise: f64| RawUser {
            m: Some(u.m),
            side: Some(u.side),
            large_scale: Some(u.rho_large),
            large_scale_db: None,
            noise: Some(noise),
            noise_db: None,
        };
        let split = |p: &PowerSplit| RawSplit {
            kappa1: Some(p.kappa1),
            kappa2: Some(p.kappa2),
        };
        RawConfig {
            surface: Some(RawSurface {
                n_x: Some(s.surface.n_x),
                n_y: Some(s.surface.n_y),
                delta_x: Some(s.surface.delta_x),
                delta_y: Some(s.surface.delta_y),
                wavelength: Some(s.surface.wavelength),
            }),
            feed: Some(RawFeed {
                d0: Some(s.feed.d0),
                alpha: Some(s.feed.alpha),
            }),
            surface_split: Some(RawSurfaceSplit {
                beta1: Some(s.split_surface.beta1),
                beta2: Some(s.split_surface.beta2),
                ..Default::default()
            }),
            user1: Some(user(&s.user1, s.budget.sigma2_1)),
            user2: Some(user(&s.user2, s.budget.sigma2_2)),
            hardware: Some(RawHardware {
                eps_v: Some(s.hq.eps_v),
                eps_u1: Some(s.hq.eps_u1),
                eps_u2: Some(s.hq.eps_u2),
            }),
            transmit_power: Some(s.budget.rho),
            power_split: Some(split(&s.power_split)),
            oma_split: Some(split(&s.oma_split)),
            ..Default::default()
        }
    }

    fn from_resolved(c: &RunConfig) -> Self {
        let mut raw = Self::scenario_only(&c.scenario);
        raw.note = c.note.clone();
        raw.monte_carlo = Some(RawMc {
            trials: Some(c.mc.trials),
            seed: Some(c.mc.seed),
            batch: Some(c.mc.batch),
        });
        raw.optimizer = Some(RawOptimizer {
            tol_kappa: Some(c.optimizer.tol_kappa),
            kappa_floor: Some(c.optimizer.kappa_floor),
            objective_source: Some(c.optimizer.objective_source),
        });
        raw.theory = Some(RawTheory {
            convention: Some(c.theory.convention),
            a1_variant: Some(c.theory.a1_variant),
        });
        raw.rate_vs_n = Some(RawRateVsN {
            n_elements: Some(c.rate_vs_n.n_elements.clone()),
        });
        raw.rgm_vs_power = Some(RawRgmVsPower {
            rho_db: Some(c.rgm_vs_power.rho_db.clone()),
            eps_panels: Some(c.rgm_vs_power.eps_panels.clone()),
        });
        raw
    }
}

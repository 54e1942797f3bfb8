//! Monte Carlo estimation of ergodic rates and channel moments.
//!
//! Trials are grouped into fixed-size batches. Each batch is reduced
//! sequentially and the batch summaries are merged in batch order, so the
//! floating-point result depends on `(scenario, trials, seed, batch)` only,
//! never on the number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fading::NakagamiSampler;
use crate::geometry::ElementGrid;
use crate::rates::{geometric_mean_rate, noma_rates, oma_rates, User};
use crate::rng::StreamFactory;
use crate::scenario::Scenario;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

pub const DEFAULT_BATCH: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    pub batch: u64,
    /// Worker threads; 0 lets the pool pick. Never affects results.
    #[serde(default)]
    pub workers: usize,
}

impl McConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            batch: DEFAULT_BATCH,
            workers: 0,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::param("trials", "must be at least 1"));
        }
        if self.batch == 0 {
            return Err(Error::param("batch", "must be at least 1"));
        }
        Ok(())
    }
}

/// Streaming mean and variance with an exact pairwise merge.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Self) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let w = other.n as f64 / n as f64;
        self.mean += d * w;
        self.m2 += other.m2 + d * d * self.n as f64 * w;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; zero below two samples.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn half_width_95(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        Z95 * (self.variance() / self.n as f64).sqrt()
    }

    pub fn estimate(&self) -> McEstimate {
        McEstimate {
            mean: self.mean,
            half_width_95: self.half_width_95(),
            trials: self.n,
            sic_violations: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub half_width_95: f64,
    pub trials: u64,
    pub sic_violations: u64,
}

/// Runs `f` on a pool of `workers` threads (0 = rayon's default).
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> R {
    if workers == 0 {
        return f();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Reduces `f(trial)` over all trials into per-component statistics.
pub fn accumulate<const K: usize, F>(mc: &McConfig, f: F) -> Result<[RunningStats; K]>
where
    F: Fn(u64) -> [f64; K] + Sync,
{
    mc.validate()?;
    let batches = mc.trials.div_ceil(mc.batch);
    let parts: Vec<[RunningStats; K]> = with_workers(mc.workers, || {
        (0..batches)
            .into_par_iter()
            .map(|b| {
                let mut acc = [RunningStats::default(); K];
                let end = ((b + 1) * mc.batch).min(mc.trials);
                for trial in b * mc.batch..end {
                    for (a, x) in acc.iter_mut().zip(f(trial)) {
                        a.push(x);
                    }
                }
                acc
            })
            .collect()
    });
    let mut total = [RunningStats::default(); K];
    for part in &parts {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    Ok(total)
}

/// Draws the phase-aligned channel powers `|h1|^2`, `|h2|^2` of one trial.
///
/// Each user's amplitudes come from its own substream, in element order,
/// exactly as [`crate::fading::sample_small_scale`] draws them. The phases
/// cancel under alignment, so they are not drawn.
#[derive(Debug, Clone)]
pub struct ChannelSampler {
    sqrt_gamma: Vec<f64>,
    scale: [f64; 2],
    samplers: [NakagamiSampler; 2],
    streams: StreamFactory,
}

impl ChannelSampler {
    pub fn new(s: &Scenario, grid: &ElementGrid, seed: u64) -> Result<Self> {
        let scale = |u: User| s.user(u).rho_large.sqrt() * s.beta(u);
        Ok(Self {
            sqrt_gamma: grid.sqrt_energies(),
            scale: [scale(User::One), scale(User::Two)],
            samplers: [
                NakagamiSampler::new(s.user1.m)?,
                NakagamiSampler::new(s.user2.m)?,
            ],
            streams: StreamFactory::new(seed),
        })
    }

    #[inline]
    pub fn amplitude(&self, trial: u64, user: User) -> f64 {
        let k = match user {
            User::One => 0,
            User::Two => 1,
        };
        let mut rng = self.streams.substream(trial, k as u8);
        self.scale[k] * self.samplers[k].weighted_sum(&self.sqrt_gamma, &mut rng)
    }

    #[inline]
    pub fn powers(&self, trial: u64) -> (f64, f64) {
        let a1 = self.amplitude(trial, User::One);
        let a2 = self.amplitude(trial, User::Two);
        (a1 * a1, a2 * a2)
    }

    /// All trials' channel powers in trial order.
    pub fn sample_all(&self, mc: &McConfig) -> Result<Vec<(f64, f64)>> {
        mc.validate()?;
        Ok(with_workers(mc.workers, || {
            (0..mc.trials)
                .into_par_iter()
                .map(|t| self.powers(t))
                .collect()
        }))
    }
}

/// Rate estimates of one access scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeEstimates {
    pub r1: McEstimate,
    pub r2: McEstimate,
    /// `sqrt(E[R1] E[R2])`, with a delta-method interval.
    pub r_gm: McEstimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErgodicMc {
    pub noma: SchemeEstimates,
    pub oma: SchemeEstimates,
}

/// Geometric mean of two independent sample means and its 95% half-width.
pub fn geometric_mean_estimate(r1: &McEstimate, r2: &McEstimate) -> McEstimate {
    let g = geometric_mean_rate(r1.mean, r2.mean);
    let half_width_95 = if g > 0.0 {
        // d g / d a = b / (2 g); the two users' draws are independent.
        let t1 = r2.mean * r1.half_width_95;
        let t2 = r1.mean * r2.half_width_95;
        (t1 * t1 + t2 * t2).sqrt() / (2.0 * g)
    } else {
        0.0
    };
    McEstimate {
        mean: g,
        half_width_95,
        trials: r1.trials.min(r2.trials),
        sic_violations: r1.sic_violations.max(r2.sic_violations),
    }
}

pub fn ergodic_rates_mc(s: &Scenario, mc: &McConfig) -> Result<ErgodicMc> {
    s.validate()?;
    let grid = ElementGrid::build(&s.surface, &s.feed)?;
    ergodic_rates_mc_on(s, &grid, mc)
}

/// As [`ergodic_rates_mc`] with a prebuilt element grid matching `s.surface`.
pub fn ergodic_rates_mc_on(s: &Scenario, grid: &ElementGrid, mc: &McConfig) -> Result<ErgodicMc> {
    let sampler = ChannelSampler::new(s, grid, mc.seed)?;
    let [n1, n2, o1, o2, viol] = accumulate(mc, |t| {
        let (h1, h2) = sampler.powers(t);
        let noma = noma_rates(h1, h2, &s.power_split, &s.hq, &s.budget);
        let (r1o, r2o) = oma_rates(h1, h2, &s.oma_split, &s.hq, &s.budget);
        let v = if noma.sic_order_holds { 0.0 } else { 1.0 };
        [noma.r1, noma.r2, r1o, r2o, v]
    })?;
    let violations = (viol.mean() * viol.count() as f64).round() as u64;
    let with_viol = |mut e: McEstimate| {
        e.sic_violations = violations;
        e
    };
    let (nr1, nr2) = (with_viol(n1.estimate()), with_viol(n2.estimate()));
    let (or1, or2) = (o1.estimate(), o2.estimate());
    Ok(ErgodicMc {
        noma: SchemeEstimates {
            r1: nr1,
            r2: nr2,
            r_gm: geometric_mean_estimate(&nr1, &nr2),
        },
        oma: SchemeEstimates {
            r1: or1,
            r2: or2,
            r_gm: geometric_mean_estimate(&or1, &or2),
        },
    })
}

/// Empirical `E|h|^2`, `E|h|^4` and `E[1/|h|^2]` of one user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimates {
    pub e_h2: McEstimate,
    pub e_h4: McEstimate,
    pub e_inv: McEstimate,
}

pub fn channel_moments_mc(s: &Scenario, user: User, mc: &McConfig) -> Result<MomentEstimates> {
    s.validate()?;
    let grid = ElementGrid::build(&s.surface, &s.feed)?;
    channel_moments_mc_on(s, &grid, user, mc)
}

pub fn channel_moments_mc_on(
    s: &Scenario,
    grid: &ElementGrid,
    user: User,
    mc: &McConfig,
) -> Result<MomentEstimates> {
    let sampler = ChannelSampler::new(s, grid, mc.seed)?;
    let [e2, e4, inv] = accumulate(mc, |t| {
        let a = sampler.amplitude(t, user);
        let p = a * a;
        [p, p * p, 1.0 / p]
    })?;
    Ok(MomentEstimates {
        e_h2: e2.estimate(),
        e_h4: e4.estimate(),
        e_inv: inv.estimate(),
    })
}

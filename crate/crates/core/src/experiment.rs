//! The canned experiments behind the command-line subcommands.
//!
//! Sweeps produce a [`Table`] whose rows are always in input order, however
//! many workers computed them. [`render_csv`] prefixes the table with a
//! comment block that embeds the resolved configuration, so any emitted CSV
//! can be fed back as a config to reproduce it.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{RunConfig, CSV_CONFIG_PREFIX};
use crate::error::Result;
use crate::fading::NakagamiMoments;
use crate::geometry::{
    aperture_sums_discrete, aperture_sums_infinite, aperture_sums_integral,
    aperture_sums_plane_numeric, A1Variant, ApertureSums, ElementGrid,
};
use crate::mc::{
    channel_moments_mc_on, ergodic_rates_mc_on, with_workers, ChannelSampler, McEstimate,
};
use crate::optimize::{
    high_power_plateau, oma_baseline, optimize_kappa_noma, KappaOptimum, Objective, ObjectiveSource,
};
use crate::rates::{geometric_mean_rate, HardwareQuality, User};
use crate::scenario::{db_to_linear, linear_to_db, Scenario};
use crate::theory::{
    amplitude_cumulants, asymptotic_rho, channel_moments, eta_coefficient, gamma_fit, inverse_mean,
    oma_asymptotic_rho, snr_slope, Convention, NoiseScaling,
};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(&'static str),
    Bool(bool),
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Float(v) => f.write_str(&format_float(*v)),
            Cell::Text(s) => f.write_str(s),
            Cell::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// Twelve significant digits; non-finite values as `inf`, `-inf`, `nan`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.11e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }
}

pub const RATE_VS_N_COLUMNS: [&str; 10] = [
    "n",
    "n_x",
    "n_y",
    "scheme",
    "user",
    "mc_mean",
    "mc_ci95",
    "bound",
    "plateau",
    "sic_violations",
];

pub const RGM_VS_POWER_COLUMNS: [&str; 10] = [
    "eps", "rho_db", "snr1_db", "scheme", "kappa1", "r1", "r2", "r_gm", "plateau", "interior",
];

/// The CSV document: comment header, column line, rows.
pub fn render_csv(experiment: &str, cfg: &RunConfig, table: &Table) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# tool: iosnoma {TOOL_VERSION}");
    let _ = writeln!(out, "# experiment: {experiment}");
    let _ = writeln!(out, "# seed: {}", cfg.mc.seed);
    let _ = writeln!(out, "# trials: {}", cfg.mc.trials);
    let _ = writeln!(out, "# convention: {}", cfg.theory.convention);
    let _ = writeln!(out, "# a1_variant: {}", cfg.theory.a1_variant);
    let _ = writeln!(out, "# objective: {}", cfg.optimizer.objective_source);
    let _ = writeln!(out, "# scenario_sha256: {}", cfg.scenario_digest());
    let _ = writeln!(out, "{CSV_CONFIG_PREFIX}{}", cfg.canonical_json());
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        let line: Vec<String> = row.iter().map(Cell::to_string).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

fn finite_sums(s: &Scenario, grid: &ElementGrid, convention: Convention) -> Result<ApertureSums> {
    match convention {
        Convention::Discrete => Ok(aperture_sums_discrete(grid)),
        Convention::PaperIntegral => aperture_sums_integral(&s.surface, &s.feed),
    }
}

/// Ergodic rates against their bounds and the infinite-surface plateau,
/// for each element count in the sweep.
pub fn run_rate_vs_n(cfg: &RunConfig) -> Result<Table> {
    cfg.validate()?;
    let base = cfg.scenario;
    let plateau = NoiseScaling::infinite(&base, cfg.theory)?;
    let (p_noma, p_oma) = (plateau.noma_bounds(&base), plateau.oma_bounds(&base));
    let mut rows = Vec::new();
    for (n_x, n_y) in cfg.rate_vs_n.grids() {
        let s = base.with_grid(n_x, n_y);
        let grid = ElementGrid::build(&s.surface, &s.feed)?;
        let ns = NoiseScaling::from_sums(&s, &finite_sums(&s, &grid, cfg.theory.convention)?)?;
        let mc = ergodic_rates_mc_on(&s, &grid, &cfg.mc)?;
        let schemes = [
            ("noma", [mc.noma.r1, mc.noma.r2], ns.noma_bounds(&s), p_noma),
            ("oma", [mc.oma.r1, mc.oma.r2], ns.oma_bounds(&s), p_oma),
        ];
        for (scheme, est, bound, plat) in schemes {
            for (k, e) in est.iter().enumerate() {
                let pick = |p: (f64, f64)| if k == 0 { p.0 } else { p.1 };
                rows.push(vec![
                    Cell::Int((n_x * n_y) as u64),
                    Cell::Int(n_x as u64),
                    Cell::Int(n_y as u64),
                    Cell::Text(scheme),
                    Cell::Int(k as u64 + 1),
                    Cell::Float(e.mean),
                    Cell::Float(e.half_width_95),
                    Cell::Float(pick(bound)),
                    Cell::Float(pick(plat)),
                    Cell::Int(e.sic_violations),
                ]);
            }
        }
    }
    Ok(Table {
        columns: RATE_VS_N_COLUMNS.to_vec(),
        rows,
    })
}

/// One point of the power sweep: optimized NOMA and equal-split OMA.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerPoint {
    pub eps: f64,
    pub rho_db: f64,
    /// `rho rho_1 / sigma_1^2` in dB.
    pub snr1_db: f64,
    pub noma: KappaOptimum,
    pub oma: KappaOptimum,
    pub noma_plateau: f64,
    pub oma_plateau: f64,
}

/// Optimized geometric-mean rate across transmit power for each hardware
/// panel. Channel draws for the Monte Carlo objective are shared by every
/// point, since `|h|^2` depends on neither power nor hardware quality.
pub fn rgm_vs_power_points(cfg: &RunConfig) -> Result<Vec<PowerPoint>> {
    cfg.validate()?;
    let base = cfg.scenario;
    let grid = ElementGrid::build(&base.surface, &base.feed)?;
    let samples;
    let objective = match cfg.optimizer.objective_source {
        ObjectiveSource::TheoryBound => Objective::Bound(NoiseScaling::from_sums(
            &base,
            &finite_sums(&base, &grid, cfg.theory.convention)?,
        )?),
        ObjectiveSource::MonteCarlo => {
            samples = ChannelSampler::new(&base, &grid, cfg.mc.seed)?.sample_all(&cfg.mc)?;
            Objective::Samples(&samples)
        }
    };
    let points: Vec<(f64, f64)> = cfg
        .rgm_vs_power
        .eps_panels
        .iter()
        .flat_map(|&e| cfg.rgm_vs_power.rho_db.iter().map(move |&r| (e, r)))
        .collect();
    with_workers(cfg.mc.workers, || {
        points
            .par_iter()
            .map(|&(eps, rho_db)| {
                let hq = HardwareQuality::uniform(eps);
                let s = base.with_hq(hq).with_rho(db_to_linear(rho_db));
                let noma = optimize_kappa_noma(&s, &objective, &cfg.optimizer)?;
                let oma = oma_baseline(&s, &objective);
                let (o1, o2) = oma_asymptotic_rho(&crate::rates::PowerSplit::new(0.5), &hq);
                Ok(PowerPoint {
                    eps,
                    rho_db,
                    snr1_db: rho_db + linear_to_db(base.user1.rho_large / base.budget.sigma2_1),
                    noma,
                    oma,
                    noma_plateau: high_power_plateau(&hq, &cfg.optimizer)?.r_gm,
                    oma_plateau: geometric_mean_rate(o1, o2),
                })
            })
            .collect()
    })
}

pub fn run_rgm_vs_power(cfg: &RunConfig) -> Result<Table> {
    let rows = rgm_vs_power_points(cfg)?
        .into_iter()
        .flat_map(|p| {
            [
                ("noma", p.noma, p.noma_plateau),
                ("oma", p.oma, p.oma_plateau),
            ]
            .map(|(scheme, o, plat)| {
                vec![
                    Cell::Float(p.eps),
                    Cell::Float(p.rho_db),
                    Cell::Float(p.snr1_db),
                    Cell::Text(scheme),
                    Cell::Float(o.kappa1),
                    Cell::Float(o.r1),
                    Cell::Float(o.r2),
                    Cell::Float(o.r_gm),
                    Cell::Float(plat),
                    Cell::Bool(o.interior),
                ]
            })
        })
        .collect();
    Ok(Table {
        columns: RGM_VS_POWER_COLUMNS.to_vec(),
        rows,
    })
}

/// Pretty-printed report with a trailing newline.
pub fn render_json(report: &Value) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}

/// JSON number, or the strings `inf`/`-inf`/`nan` for non-finite values.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::String(format_float(x))
    }
}

fn estimate_json(e: &McEstimate) -> Value {
    json!({
        "mean": num(e.mean),
        "ci95": num(e.half_width_95),
        "trials": e.trials,
        "sic_violations": e.sic_violations,
    })
}

/// Every closed-form quantity of one scenario, with Monte Carlo estimates
/// when `with_mc` is set.
pub fn run_single(cfg: &RunConfig, with_mc: bool) -> Result<Value> {
    cfg.validate()?;
    let s = cfg.scenario;
    let grid = ElementGrid::build(&s.surface, &s.feed)?;
    let sums = finite_sums(&s, &grid, cfg.theory.convention)?;
    let ns = NoiseScaling::from_sums(&s, &sums)?;

    let mut users = Vec::new();
    for u in [User::One, User::Two] {
        let link = s.user(u);
        let mom = channel_moments(&sums, link.m, link.rho_large, s.beta(u))?;
        let fit = gamma_fit(&mom)?;
        let eta = eta_coefficient(&sums, link.m)?;
        users.push(json!({
            "moments": { "e_h2": num(mom.e_h2), "e_h4": num(mom.e_h4) },
            "gamma_fit": {
                "nu": num(fit.nu), "varsigma": num(fit.varsigma),
                "nu_inv": num(fit.nu_inv), "varsigma_inv": num(fit.varsigma_inv),
            },
            "inverse_mean": num(inverse_mean(&mom)?),
            "eta": {
                "iota1": num(eta.iota1), "iota2": num(eta.iota2),
                "iota3": num(eta.iota3), "iota4": num(eta.iota4), "eta": num(eta.eta),
            },
        }));
    }

    let pair = |p: (f64, f64)| json!([num(p.0), num(p.1)]);
    let noma = ns.noma_bounds(&s);
    let oma = ns.oma_bounds(&s);
    let objective = Objective::Bound(ns);
    let best = optimize_kappa_noma(&s, &objective, &cfg.optimizer)?;
    let mut report = json!({
        "tool": format!("iosnoma {TOOL_VERSION}"),
        "seed": cfg.mc.seed,
        "convention": cfg.theory.convention.to_string(),
        "a1_variant": cfg.theory.a1_variant.to_string(),
        "scenario_sha256": cfg.scenario_digest(),
        "config": serde_json::from_str::<Value>(&cfg.canonical_json()).expect("canonical config is JSON"),
        "aperture": { "a1": num(sums.a1), "a2": num(sums.a2), "a3": num(sums.a3), "a4": num(sums.a4) },
        "users": users,
        "bounds": {
            "noma": pair(noma),
            "oma": pair(oma),
            "noma_r_gm": num(geometric_mean_rate(noma.0, noma.1)),
            "oma_r_gm": num(geometric_mean_rate(oma.0, oma.1)),
        },
        "asymptotics": {
            "rho_to_infinity": pair(asymptotic_rho(&s.power_split, &s.hq)),
            "n_to_infinity": pair(NoiseScaling::infinite(&s, cfg.theory)?.noma_bounds(&s)),
            "continuous_aperture": pair(NoiseScaling::continuous(&s, cfg.theory)?.noma_bounds(&s)),
        },
        "slopes": [snr_slope(User::One, &s.hq), snr_slope(User::Two, &s.hq)],
        "optimum": {
            "kappa1": num(best.kappa1), "r1": num(best.r1), "r2": num(best.r2),
            "r_gm": num(best.r_gm), "interior": best.interior,
            "objective": cfg.optimizer.objective_source.to_string(),
        },
    });
    if with_mc {
        let mc = ergodic_rates_mc_on(&s, &grid, &cfg.mc)?;
        let scheme = |e: &crate::mc::SchemeEstimates| json!({ "r1": estimate_json(&e.r1), "r2": estimate_json(&e.r2), "r_gm": estimate_json(&e.r_gm) });
        report["monte_carlo"] = json!({ "noma": scheme(&mc.noma), "oma": scheme(&mc.oma) });
    }
    Ok(report)
}

/// Outcome of one self-check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            passed,
            detail,
        }
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Oracle and invariant checks on the configured scenario.
pub fn run_validate(cfg: &RunConfig) -> Result<Vec<Check>> {
    cfg.validate()?;
    let s = cfg.scenario;
    let grid = ElementGrid::build(&s.surface, &s.feed)?;
    let sums = finite_sums(&s, &grid, cfg.theory.convention)?;
    let discrete = aperture_sums_discrete(&grid);
    let ns = NoiseScaling::from_sums(&s, &sums)?;
    let mut checks = Vec::new();

    for (k, u) in [(1, User::One), (2, User::Two)] {
        let link = s.user(u);

        let eta = eta_coefficient(&sums, link.m)?.eta;
        let via = inverse_mean(&channel_moments(&sums, link.m, 1.0, 1.0)?)?;
        let err = rel(eta, via);
        checks.push(Check::new(
            format!("eta-identity-user{k}"),
            err < 1e-10,
            format!("relative difference {err:.2e} (limit 1e-10)"),
        ));

        // Sampled moments always describe the modelled (discrete) surface.
        let mom = channel_moments(&discrete, link.m, link.rho_large, s.beta(u))?;
        let inv = inverse_mean(&mom)?;
        let emp = channel_moments_mc_on(&s, &grid, u, &cfg.mc)?;
        for (what, e, th, tol) in [
            ("e_h2", emp.e_h2, mom.e_h2, 0.005_f64),
            ("e_h4", emp.e_h4, mom.e_h4, 0.01),
            ("inverse_mean", emp.e_inv, inv, 0.02),
        ] {
            let err = rel(e.mean, th);
            let limit = tol.max(3.0 * e.half_width_95 / th);
            checks.push(Check::new(
                format!("moment-{what}-user{k}"),
                err <= limit,
                format!("empirical {:.6e} vs closed form {th:.6e}, relative {err:.2e} (limit {limit:.2e})", e.mean),
            ));
        }
    }

    let mc = ergodic_rates_mc_on(&s, &grid, &cfg.mc)?;
    let bounds = [
        ("noma", ns.noma_bounds(&s), mc.noma),
        ("oma", ns.oma_bounds(&s), mc.oma),
    ];
    for (scheme, (b1, b2), est) in bounds {
        for (k, b, e) in [(1, b1, est.r1), (2, b2, est.r2)] {
            checks.push(Check::new(
                format!("jensen-{scheme}-user{k}"),
                e.mean >= b - 3.0 * e.half_width_95,
                format!(
                    "ergodic {:.6} +/- {:.1e} vs bound {b:.6}",
                    e.mean, e.half_width_95
                ),
            ));
        }
    }

    let (l1, l2) = asymptotic_rho(&s.power_split, &s.hq);
    let (r1, r2) = ns.noma_bounds(&s);
    checks.push(Check::new(
        "bounds-below-high-power-limit",
        r1 <= l1 && r2 <= l2,
        format!(
            "({r1:.6}, {r2:.6}) vs ({}, {})",
            format_float(l1),
            format_float(l2)
        ),
    ));

    let (lo, hi) = (
        s.with_rho(db_to_linear(100.0)),
        s.with_rho(db_to_linear(110.0)),
    );
    let (a, b) = (ns.noma_bounds(&lo), ns.noma_bounds(&hi));
    let decade = 10f64.log2();
    for (k, u, d) in [(1, User::One, b.0 - a.0), (2, User::Two, b.1 - a.1)] {
        let slope = d / decade;
        let want = f64::from(snr_slope(u, &s.hq));
        checks.push(Check::new(
            format!("slope-user{k}"),
            (slope - want).abs() <= 0.05,
            format!("measured {slope:.4} vs {want} (tolerance 0.05)"),
        ));
    }

    let numeric = aperture_sums_plane_numeric(&s.surface, &s.feed)?;
    let closed = aperture_sums_infinite(&s.surface, &s.feed, A1Variant::ReDerived)?;
    let worst = (1..=4)
        .map(|k| rel(numeric.get(k), closed.get(k)))
        .fold(0.0, f64::max);
    checks.push(Check::new(
        "plane-integrals",
        worst < 1e-4,
        format!("worst relative gap to closed forms {worst:.2e} (limit 1e-4)"),
    ));

    let objective = Objective::Bound(ns);
    let best = optimize_kappa_noma(&s, &objective, &cfg.optimizer)?;
    let floor = cfg.optimizer.kappa_floor;
    let points = 10_000;
    let (grid_k, grid_gm) = (0..points)
        .map(|i| {
            let k = floor + (1.0 - 2.0 * floor) * i as f64 / (points - 1) as f64;
            let (r1, r2) = objective.noma(&s.with_kappa1(k));
            (k, geometric_mean_rate(r1, r2))
        })
        .fold(
            (0.0, f64::NEG_INFINITY),
            |acc, p| if p.1 > acc.1 { p } else { acc },
        );
    let dk = (best.kappa1 - grid_k).abs();
    let dg = grid_gm - best.r_gm;
    checks.push(Check::new(
        "optimizer-grid",
        dk <= 2e-4 && dg <= 1e-6,
        format!(
            "kappa1 {:.6} vs grid {grid_k:.6}, R_GM shortfall {dg:.1e}",
            best.kappa1
        ),
    ));

    let cumulants = amplitude_cumulants(&NakagamiMoments::new(s.user1.m)?);
    checks.push(Check::new(
        "amplitude-variance",
        cumulants[1] >= 0.0,
        format!("iota2 = {:.6e}", cumulants[1]),
    ));
    Ok(checks)
}

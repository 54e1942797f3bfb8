//! `iosnoma` experiment runner.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use iosnoma::config::RunConfig;
use iosnoma::experiment::{
    render_csv, render_json, run_rate_vs_n, run_rgm_vs_power, run_single, run_validate,
};
use iosnoma::geometry::A1Variant;
use iosnoma::theory::Convention;
use iosnoma::Error;

#[derive(Parser)]
#[command(
    name = "iosnoma",
    version,
    about = "Omni-surface NOMA rate analysis and Monte Carlo experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form report for one scenario, as JSON.
    Single {
        #[command(flatten)]
        common: Common,
        /// Add Monte Carlo estimates to the report.
        #[arg(long)]
        mc: bool,
    },
    /// Ergodic rate against element count, as CSV.
    RateVsN {
        #[command(flatten)]
        common: Common,
    },
    /// Optimized geometric-mean rate against transmit power, as CSV.
    RgmVsPower {
        #[command(flatten)]
        common: Common,
    },
    /// Oracle and invariant checks; exits 3 if any fails.
    Validate {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// JSON config, or a CSV previously written by this tool.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Aperture-sum form: discrete or paper-integral.
    #[arg(long)]
    convention: Option<Convention>,
    /// Infinite-surface A1: as-printed or re-derived.
    #[arg(long)]
    a1_variant: Option<A1Variant>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
}

enum Failure {
    Config(String),
    Numerical(String),
    Io(String),
    ChecksFailed,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, Failure> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
                RunConfig::from_text(&text)?
            }
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.mc.seed = seed;
        }
        if let Some(trials) = self.trials {
            cfg.mc.trials = trials;
        }
        if let Some(c) = self.convention {
            cfg.theory.convention = c;
        }
        if let Some(v) = self.a1_variant {
            cfg.theory.a1_variant = v;
        }
        if let Some(w) = self.workers {
            cfg.mc.workers = w;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn emit(&self, text: &str) -> Result<(), Failure> {
        match &self.out {
            Some(path) => fs::write(path, text)
                .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
            None => io::stdout()
                .lock()
                .write_all(text.as_bytes())
                .map_err(|e| Failure::Io(format!("cannot write output: {e}"))),
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Single { common, mc } => {
            let cfg = common.resolve()?;
            let report = run_single(&cfg, mc)?;
            common.emit(&render_json(&report))
        }
        Command::RateVsN { common } => {
            let cfg = common.resolve()?;
            let table = run_rate_vs_n(&cfg)?;
            common.emit(&render_csv("rate-vs-n", &cfg, &table))
        }
        Command::RgmVsPower { common } => {
            let cfg = common.resolve()?;
            let table = run_rgm_vs_power(&cfg)?;
            common.emit(&render_csv("rgm-vs-power", &cfg, &table))
        }
        Command::Validate { common } => {
            let cfg = common.resolve()?;
            let checks = run_validate(&cfg)?;
            let mut text: String = checks.iter().map(|c| format!("{c}\n")).collect();
            let failed = checks.iter().filter(|c| !c.passed).count();
            text.push_str(&format!("{} checks, {failed} failed\n", checks.len()));
            common.emit(&text)?;
            if failed > 0 {
                return Err(Failure::ChecksFailed);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: invalid configuration: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: numerical failure: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::ChecksFailed) => {
            eprintln!("error: validation checks failed");
            ExitCode::from(3)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(4)
        }
    }
}

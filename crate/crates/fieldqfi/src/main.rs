use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use fieldqfi::config::{Config, Grid};
use fieldqfi::io::OverlapCache;
use fieldqfi::sweep::{run_sweep, write_sweep, Source};
use fieldqfi::{compare, validate};
use fieldqfi_core::cavity::DEFAULT_LADDER;

#[derive(Parser)]
#[command(name = "fieldqfi", version, about = "Quantum Fisher information of Gaussian probes in an accelerated cavity")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// QFI over a grid of u (cavity) or theta (imported series)
    Sweep(Common),
    /// Run the invariant suites; exits 1 if any check fails
    Validate(Common),
    /// Perturbative vs oracle QFI over an h ladder
    Compare(Common),
    /// Precompute the overlap cache for the fit ladder and --h
    Overlaps(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (a directory for `overlaps`); stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    nmax: Option<usize>,
    /// Comma-separated for `overlaps`
    #[arg(long)]
    h: Option<String>,
    #[arg(long)]
    u: Option<f64>,
    /// `start:stop:step` or a comma-separated list
    #[arg(long)]
    grid: Option<String>,
    /// Comma-separated: single, product, tms
    #[arg(long)]
    state: Option<String>,
    /// Comma-separated squeezing fractions
    #[arg(long)]
    x: Option<String>,
    #[arg(long)]
    photons: Option<f64>,
    /// Comma-separated: perturbative, oracle
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Overlap cache directory
    #[arg(long)]
    cache: Option<PathBuf>,
    /// CSV of coefficient matrices replacing the cavity channel
    #[arg(long)]
    channel: Option<PathBuf>,
}

fn list(s: &str) -> Vec<String> {
    s.split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect()
}

fn floats(s: &str, flag: &str) -> Result<Vec<f64>> {
    list(s).iter().map(|t| t.parse().with_context(|| format!("--{flag}: bad number {t:?}"))).collect()
}

impl Common {
    fn config(&self) -> Result<Config> {
        let mut c = match &self.config {
            Some(p) => Config::load(p).with_context(|| format!("reading {}", p.display()))?,
            None => Config::default(),
        };
        if let Some(n) = self.nmax {
            c.scenario.n_max = n;
        }
        if let Some(h) = &self.h {
            let hs = floats(h, "h")?;
            c.scenario.h = *hs.last().context("--h: empty")?;
        }
        if let Some(u) = self.u {
            c.scenario.u = u;
        }
        if let Some(g) = &self.grid {
            c.run.grid = Some(Grid::parse(g)?);
        }
        if let Some(s) = &self.state {
            c.run.states = list(s);
        }
        if let Some(x) = &self.x {
            c.energy.x = floats(x, "x")?;
        }
        if let Some(p) = self.photons {
            c.energy.photons = p;
        }
        if let Some(m) = &self.methods {
            c.run.methods = list(m);
        }
        if let Some(s) = self.seed {
            c.run.seed = s;
        }
        if let Some(p) = &self.cache {
            c.run.cache = Some(p.clone());
        }
        if let Some(p) = &self.channel {
            c.scenario.channel = Some(p.clone());
        }
        Ok(c)
    }

    fn output(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.verb {
        Verb::Sweep(a) => {
            let spec = a.config()?.sweep_spec()?;
            let rows = run_sweep(&spec)?;
            let grid_name = match spec.source {
                Source::Cavity { .. } => "u",
                Source::Imported { .. } => "theta",
            };
            write_sweep(a.output()?, grid_name, &spec.methods, &rows)?;
        }
        Verb::Validate(a) => {
            let spec = a.config()?.validate_spec()?;
            let report = validate::validate(&spec)?;
            report.write_csv(a.output()?)?;
            for c in report.failures() {
                eprintln!("FAIL {}.{}: {:e} > {:e}", c.suite, c.name, c.value, c.bound);
            }
            if !report.passed() {
                return Ok(ExitCode::from(1));
            }
        }
        Verb::Compare(a) => {
            let spec = a.config()?.compare_spec()?;
            let report = compare::compare_methods(&spec)?;
            compare::write_report(a.output()?, &report)?;
        }
        Verb::Overlaps(a) => {
            let c = a.config()?;
            let sc = c.scenario()?;
            let quad = c.quadrature()?;
            let dir = a.out.clone().or(c.run.cache.clone()).context("overlaps needs --out <dir> or --cache <dir>")?;
            let cache = OverlapCache::new(dir);
            let mut hs: Vec<f64> = DEFAULT_LADDER.to_vec();
            match &a.h {
                Some(h) => hs.extend(floats(h, "h")?),
                None => hs.push(sc.h),
            }
            for h in hs {
                let ov = cache.get_or_compute(sc.length, h, sc.n_max, &quad)?;
                println!("{}", cache.path(ov.h, ov.n_max(), quad.order).display());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

//! Perturbative versus oracle QFI along a ladder of `θ` (the cavity `h`).

use std::io::Write;

use fieldqfi_core::bogoliubov::BogoliubovSeries;
use fieldqfi_core::cavity::{CavityScenario, Quadrature};
use fieldqfi_core::qfi::{qfi_oracle_channel, qfi_perturbative, DEFAULT_STEPS};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::{float, OverlapCache};
use crate::sweep::{cavity_model, probe, Energy, OracleTable, StateFamily};

#[derive(Debug, Clone)]
pub enum CompareSource {
    /// `scenario.h` is ignored; the ladder supplies `h`.
    Cavity { scenario: CavityScenario, quadrature: Quadrature, cache: Option<OverlapCache> },
    Imported { series: BogoliubovSeries, k: usize, k_prime: usize },
}

#[derive(Debug, Clone)]
pub struct CompareSpec {
    pub source: CompareSource,
    pub families: Vec<StateFamily>,
    pub energy: Energy,
    pub thetas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub family: StateFamily,
    pub theta: f64,
    pub perturbative: f64,
    pub oracle: f64,
    pub oracle_residual: f64,
    /// `|H_pert − H_oracle| / |H_oracle|`; absolute when the oracle is zero.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<CompareRow>,
    /// Log-log slope of the deviation against `θ` per family; `None` when a
    /// deviation vanishes (exact agreement) or fewer than two points exist.
    pub slopes: Vec<(StateFamily, Option<f64>)>,
}

impl ConvergenceReport {
    pub fn slope(&self, family: StateFamily) -> Option<f64> {
        self.slopes.iter().find(|(f, _)| *f == family).and_then(|(_, s)| *s)
    }

    pub fn rows_for(&self, family: StateFamily) -> impl Iterator<Item = &CompareRow> {
        self.rows.iter().filter(move |r| r.family == family)
    }
}

pub fn relative_deviation(pert: f64, oracle: f64) -> f64 {
    let d = (pert - oracle).abs();
    if oracle == 0.0 { d } else { d / oracle.abs() }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 || x.len() != y.len() || y.iter().chain(x).any(|v| !(*v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    Some(num / den)
}

pub fn compare_methods(spec: &CompareSpec) -> Result<ConvergenceReport> {
    if spec.thetas.is_empty() || spec.thetas.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::spec("grid", "theta ladder must be non-empty and positive"));
    }
    if spec.families.is_empty() {
        return Err(Error::spec("run.states", "empty"));
    }
    let (k, k_prime) = match &spec.source {
        CompareSource::Cavity { scenario, .. } => (scenario.k, scenario.k_prime),
        CompareSource::Imported { k, k_prime, .. } => (*k, *k_prime),
    };
    let probes = spec
        .families
        .iter()
        .map(|&f| {
            let (r, delta) = spec.energy.parameters(f, k, k_prime)?;
            Ok((f, probe(f, k, k_prime, r, delta)))
        })
        .collect::<Result<Vec<_>>>()?;

    let rows: Vec<CompareRow> = match &spec.source {
        CompareSource::Cavity { scenario, quadrature, cache } => {
            let model = cavity_model(scenario, quadrature, cache.as_ref())?;
            let series = model.channel(scenario.u);
            let tables = spec
                .thetas
                .iter()
                .map(|&h| OracleTable::build(scenario.length, h, scenario.n_max, quadrature, cache.as_ref()))
                .collect::<Result<Vec<_>>>()?;
            let mut tasks = Vec::new();
            for (f, p) in &probes {
                for (t, h) in tables.iter().zip(&spec.thetas) {
                    tasks.push((*f, *p, t, *h));
                }
            }
            tasks
                .par_iter()
                .map(|(f, p, table, h)| {
                    let pert = qfi_perturbative(&series, p)?.value;
                    let o = table.qfi(p, *h, scenario.u)?;
                    Ok(row(*f, *h, pert, o.value, o.residual))
                })
                .collect::<Result<_>>()?
        }
        CompareSource::Imported { series, .. } => {
            let mut out = Vec::new();
            for (f, p) in &probes {
                let pert = qfi_perturbative(series, p)?.value;
                for &t in &spec.thetas {
                    let o = qfi_oracle_channel(|s| Ok(series.evaluate(s)), p, t, &DEFAULT_STEPS)?;
                    out.push(row(*f, t, pert, o.value, o.residual));
                }
            }
            out
        }
    };

    let slopes = spec
        .families
        .iter()
        .map(|&f| {
            let (x, y): (Vec<f64>, Vec<f64>) = rows.iter().filter(|r| r.family == f).map(|r| (r.theta, r.deviation)).unzip();
            (f, loglog_slope(&x, &y))
        })
        .collect();
    Ok(ConvergenceReport { rows, slopes })
}

fn row(family: StateFamily, theta: f64, perturbative: f64, oracle: f64, oracle_residual: f64) -> CompareRow {
    CompareRow { family, theta, perturbative, oracle, oracle_residual, deviation: relative_deviation(perturbative, oracle) }
}

pub fn write_report<W: Write>(w: W, report: &ConvergenceReport) -> Result<()> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    out.write_record(["family", "theta", "perturbative", "oracle", "oracle_residual", "deviation", "slope"])?;
    for r in &report.rows {
        let slope = report.slope(r.family).map(float).unwrap_or_default();
        out.write_record([
            r.family.name().to_string(),
            float(r.theta),
            float(r.perturbative),
            float(r.oracle),
            float(r.oracle_residual),
            float(r.deviation),
            slope,
        ])?;
    }
    out.flush()?;
    Ok(())
}

//! Grid sweeps of the QFI over `u` (cavity) or `θ` (imported series).

use std::io::Write;

use fieldqfi_core::bogoliubov::BogoliubovSeries;
use fieldqfi_core::cavity::{compose_exact, fit_overlaps, CavityModel, CavityScenario, Quadrature, RindlerOverlaps, DEFAULT_FIT_BOUND, DEFAULT_LADDER};
use fieldqfi_core::qfi::{
    energy_budget, negativity_first_order, qfi_oracle_channel, qfi_perturbative, truncation_residual, Method, ProbeState,
    QfiResult,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{float, OverlapCache};

/// Oracle steps in `h` for the cavity channel. The smallest keeps the
/// quadrature noise in `1 − √F` well below `s²`.
pub const CAVITY_ORACLE_STEPS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateFamily {
    #[serde(alias = "single")]
    SingleSqueezedDisplaced,
    #[serde(alias = "product")]
    TwoProductSqueezedDisplaced,
    #[serde(alias = "tms")]
    TwoModeSqueezed,
}

impl StateFamily {
    pub const ALL: [StateFamily; 3] =
        [StateFamily::SingleSqueezedDisplaced, StateFamily::TwoProductSqueezedDisplaced, StateFamily::TwoModeSqueezed];

    pub fn name(self) -> &'static str {
        match self {
            StateFamily::SingleSqueezedDisplaced => "single_squeezed_displaced",
            StateFamily::TwoProductSqueezedDisplaced => "two_product_squeezed_displaced",
            StateFamily::TwoModeSqueezed => "two_mode_squeezed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "single" | "single_squeezed_displaced" => Some(StateFamily::SingleSqueezedDisplaced),
            "product" | "two_product_squeezed_displaced" => Some(StateFamily::TwoProductSqueezedDisplaced),
            "tms" | "two_mode_squeezed" => Some(StateFamily::TwoModeSqueezed),
            _ => None,
        }
    }

    /// Photons per probed mode giving total energy `N (ω_k + ω_k')`.
    /// Only the single-mode family puts everything into mode `k`.
    pub fn matched_photons(self, photons: f64, k: usize, k_prime: usize) -> f64 {
        match self {
            StateFamily::SingleSqueezedDisplaced => photons * (k + k_prime) as f64 / k as f64,
            _ => photons,
        }
    }
}

/// Input energy: a per-mode photon budget split by `x`, or explicit `(r, δ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Energy {
    Matched { x: f64, photons: f64 },
    Explicit { r: f64, delta: f64 },
}

impl Energy {
    /// `(r, δ)` for `family`. The two-mode squeezed state carries no
    /// displacement, so it takes the whole budget as squeezing.
    pub fn parameters(self, family: StateFamily, k: usize, k_prime: usize) -> Result<(f64, f64)> {
        match self {
            Energy::Explicit { r, delta } => Ok((r, delta)),
            Energy::Matched { x, photons } => {
                let n = family.matched_photons(photons, k, k_prime);
                let x = if family == StateFamily::TwoModeSqueezed { 1.0 } else { x };
                Ok(energy_budget(x, n)?)
            }
        }
    }

    pub fn x(self) -> Option<f64> {
        match self {
            Energy::Matched { x, .. } => Some(x),
            Energy::Explicit { .. } => None,
        }
    }
}

pub fn probe(family: StateFamily, k: usize, k_prime: usize, r: f64, delta: f64) -> ProbeState {
    match family {
        StateFamily::SingleSqueezedDisplaced => ProbeState::SingleSqueezedDisplaced { k, r, delta },
        StateFamily::TwoProductSqueezedDisplaced => ProbeState::ProductSqueezedDisplaced { k, k_prime, r, delta },
        StateFamily::TwoModeSqueezed => ProbeState::TwoModeSqueezed { k, k_prime, r },
    }
}

#[derive(Debug, Clone)]
pub enum Source {
    /// Grid runs over `u`; `scenario.u` is ignored.
    Cavity { scenario: CavityScenario, quadrature: Quadrature, cache: Option<OverlapCache> },
    /// Grid runs over `θ`.
    Imported { series: BogoliubovSeries, k: usize, k_prime: usize },
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub source: Source,
    pub families: Vec<StateFamily>,
    pub grid: Vec<f64>,
    pub energies: Vec<Energy>,
    pub methods: Vec<Method>,
}

impl SweepSpec {
    pub fn modes(&self) -> (usize, usize) {
        match &self.source {
            Source::Cavity { scenario, .. } => (scenario.k, scenario.k_prime),
            Source::Imported { k, k_prime, .. } => (*k, *k_prime),
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::spec("grid", "empty"));
        }
        if self.grid.iter().any(|v| !v.is_finite()) {
            return Err(Error::spec("grid", "non-finite value"));
        }
        if self.families.is_empty() {
            return Err(Error::spec("run.states", "empty"));
        }
        if self.energies.is_empty() {
            return Err(Error::spec("energy", "empty"));
        }
        if self.methods.is_empty() {
            return Err(Error::spec("run.methods", "empty"));
        }
        let (k, k_prime) = self.modes();
        let n_max = match &self.source {
            Source::Cavity { scenario, .. } => {
                if self.methods.contains(&Method::Oracle) && scenario.h <= CAVITY_ORACLE_STEPS[0] {
                    return Err(Error::spec("scenario.h", format!("oracle needs h > {}", CAVITY_ORACLE_STEPS[0])));
                }
                if self.grid.iter().any(|&u| u < 0.0) {
                    return Err(Error::spec("grid", "u must be non-negative"));
                }
                scenario.n_max
            }
            Source::Imported { series, .. } => series.n_max(),
        };
        for (name, m) in [("scenario.k", k), ("scenario.k_prime", k_prime)] {
            if m == 0 || m > n_max {
                return Err(Error::spec(name, format!("mode {m} outside 1..={n_max}")));
            }
        }
        if k == k_prime && self.families.iter().any(|&f| f != StateFamily::SingleSqueezedDisplaced) {
            return Err(Error::spec("scenario.k_prime", "two-mode families need distinct modes"));
        }
        for (i, e) in self.energies.iter().enumerate() {
            for &f in &self.families {
                e.parameters(f, k, k_prime).map_err(|err| Error::spec(format!("energy[{i}]"), err))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// `u` for a cavity source, `θ` for an imported series.
    pub grid: f64,
    pub family: StateFamily,
    pub x: Option<f64>,
    pub r: f64,
    pub delta: f64,
    pub perturbative: Option<QfiResult>,
    pub oracle: Option<QfiResult>,
    pub negativity: f64,
    pub truncation_residual: f64,
}

impl SweepRow {
    pub fn value(&self, method: Method) -> Option<f64> {
        match method {
            Method::Perturbative => self.perturbative.map(|q| q.value),
            Method::Oracle => self.oracle.map(|q| q.value),
        }
    }
}

/// Fitted cavity model from the overlap ladder, read through `cache` when given.
pub fn cavity_model(scenario: &CavityScenario, quad: &Quadrature, cache: Option<&OverlapCache>) -> Result<CavityModel> {
    let samples = DEFAULT_LADDER
        .par_iter()
        .map(|&h| overlaps(scenario.length, h, scenario.n_max, quad, cache))
        .collect::<Result<Vec<_>>>()?;
    Ok(CavityModel::from_raw(scenario.length, fit_overlaps(&samples, DEFAULT_FIT_BOUND)?))
}

pub fn overlaps(length: f64, h: f64, n_max: usize, quad: &Quadrature, cache: Option<&OverlapCache>) -> Result<RindlerOverlaps> {
    match cache {
        Some(c) => c.get_or_compute(length, h, n_max, quad),
        None => Ok(fieldqfi_core::cavity::rindler_overlaps(length, h, n_max, quad)?),
    }
}

/// Exact overlaps at `h` and `h ± s` for every oracle step; the composed
/// channel for any `u` follows without further quadrature.
pub struct OracleTable {
    pub entries: Vec<RindlerOverlaps>,
}

impl OracleTable {
    pub fn build(length: f64, h: f64, n_max: usize, quad: &Quadrature, cache: Option<&OverlapCache>) -> Result<Self> {
        let mut hs = vec![h];
        for s in CAVITY_ORACLE_STEPS {
            hs.push(h + s);
            hs.push(h - s);
        }
        let entries =
            hs.par_iter().map(|&t| overlaps(length, t, n_max, quad, cache)).collect::<Result<Vec<_>>>()?;
        Ok(Self { entries })
    }

    pub fn qfi(&self, probe: &ProbeState, h: f64, u: f64) -> Result<QfiResult> {
        let channel = |t: f64| {
            let ov = self.entries.iter().find(|o| o.h.to_bits() == t.to_bits()).ok_or(
                fieldqfi_core::Error::Parameter { name: "theta", value: t },
            )?;
            Ok(compose_exact(ov, u))
        };
        Ok(qfi_oracle_channel(channel, probe, h, &CAVITY_ORACLE_STEPS)?)
    }
}

/// One row per family, energy and grid point, in that nesting order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.check()?;
    let (k, k_prime) = spec.modes();
    let want_oracle = spec.methods.contains(&Method::Oracle);
    let want_pert = spec.methods.contains(&Method::Perturbative);
    let (model, table) = match &spec.source {
        Source::Cavity { scenario, quadrature, cache } => {
            let model = cavity_model(scenario, quadrature, cache.as_ref())?;
            let table = if want_oracle {
                Some(OracleTable::build(scenario.length, scenario.h, scenario.n_max, quadrature, cache.as_ref())?)
            } else {
                None
            };
            (Some(model), table)
        }
        Source::Imported { .. } => (None, None),
    };

    let mut tasks = Vec::new();
    for &family in &spec.families {
        for &energy in &spec.energies {
            for &g in &spec.grid {
                tasks.push((family, energy, g));
            }
        }
    }
    tasks
        .par_iter()
        .map(|&(family, energy, g)| {
            let (r, delta) = energy.parameters(family, k, k_prime)?;
            let p = probe(family, k, k_prime, r, delta);
            let (series, oracle) = match &spec.source {
                Source::Cavity { scenario, .. } => {
                    let series = model.as_ref().expect("cavity model").channel(g);
                    let oracle = match &table {
                        Some(t) => Some(t.qfi(&p, scenario.h, g)?),
                        None => None,
                    };
                    (series, oracle)
                }
                Source::Imported { series, .. } => {
                    let oracle = if want_oracle {
                        Some(qfi_oracle_channel(|t| Ok(series.evaluate(t)), &p, g, &fieldqfi_core::qfi::DEFAULT_STEPS)?)
                    } else {
                        None
                    };
                    (series.clone(), oracle)
                }
            };
            let perturbative = if want_pert { Some(qfi_perturbative(&series, &p)?) } else { None };
            let negativity = if k != k_prime { negativity_first_order(&series, k, k_prime)? } else { 0.0 };
            Ok(SweepRow {
                grid: g,
                family,
                x: energy.x(),
                r,
                delta,
                perturbative,
                oracle,
                negativity,
                truncation_residual: truncation_residual(&series, &p.modes()),
            })
        })
        .collect()
}

/// Header plus one line per row. Method columns appear only for requested
/// methods and are always complete.
pub fn write_sweep<W: Write>(w: W, grid_name: &str, methods: &[Method], rows: &[SweepRow]) -> Result<()> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    let mut header: Vec<String> = [grid_name, "family", "x", "r", "delta"].iter().map(|s| s.to_string()).collect();
    for m in methods {
        let p = method_name(*m);
        for c in ["qfi", "e2", "c2", "residual"] {
            header.push(format!("{p}_{c}"));
        }
    }
    header.push("negativity".into());
    header.push("truncation_residual".into());
    out.write_record(&header)?;
    for row in rows {
        let mut rec = vec![
            float(row.grid),
            row.family.name().to_string(),
            row.x.map(float).unwrap_or_default(),
            float(row.r),
            float(row.delta),
        ];
        for m in methods {
            let q = match m {
                Method::Perturbative => row.perturbative,
                Method::Oracle => row.oracle,
            }
            .ok_or_else(|| Error::spec("run.methods", format!("row lacks {}", method_name(*m))))?;
            rec.extend([float(q.value), float(q.e2), float(q.c2), float(q.residual)]);
        }
        rec.push(float(row.negativity));
        rec.push(float(row.truncation_residual));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

pub fn method_name(m: Method) -> &'static str {
    match m {
        Method::Perturbative => "perturbative",
        Method::Oracle => "oracle",
    }
}

pub fn parse_method(s: &str) -> Option<Method> {
    match s.trim() {
        "perturbative" | "pert" => Some(Method::Perturbative),
        "oracle" => Some(Method::Oracle),
        _ => None,
    }
}

/// `start, start + step, ...` up to `stop` inclusive, built from integer
/// multiples so that grid points such as `0.5` are exact.
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) {
        return Err(Error::spec("grid", format!("need step > 0 and stop >= start, got {start}:{stop}:{step}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

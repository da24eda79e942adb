//! TOML scenario files and their conversion into run specs.
//!
//! ```toml
//! [scenario]
//! length = 1.0
//! h = 0.05
//! u = 0.3
//! k = 1
//! k_prime = 2
//! n_max = 10
//!
//! [energy]
//! x = [0.0, 0.5, 1.0]
//! photons = 1.0
//!
//! [run]
//! states = ["single", "product", "tms"]
//! methods = ["perturbative"]
//! grid = { start = 0.0, stop = 1.0, step = 0.01 }
//! ```
//!
//! Setting `energy.r` (and optionally `energy.delta`) replaces the matched
//! budget with explicit parameters. `scenario.channel` points at a CSV of
//! coefficient matrices to use instead of the cavity.

use std::path::PathBuf;

use fieldqfi_core::cavity::{CavityScenario, Quadrature};
use fieldqfi_core::qfi::Method;
use serde::{Deserialize, Serialize};

use crate::compare::{CompareSource, CompareSpec};
use crate::error::{Error, Result};
use crate::io::{read_imported, Imported, OverlapCache};
use crate::sweep::{linear_grid, parse_method, Energy, Source, StateFamily, SweepSpec};
use crate::validate::ValidateSpec;

pub const DEFAULT_COMPARE_LADDER: [f64; 3] = [0.02, 0.04, 0.08];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub scenario: ScenarioSection,
    pub energy: EnergySection,
    pub run: RunSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub length: f64,
    pub h: f64,
    pub u: f64,
    pub k: usize,
    pub k_prime: usize,
    pub n_max: usize,
    pub quadrature_order: usize,
    pub channel: Option<PathBuf>,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self { length: 1.0, h: 0.05, u: 0.3, k: 1, k_prime: 2, n_max: 10, quadrature_order: 64, channel: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergySection {
    pub x: Vec<f64>,
    pub photons: f64,
    pub r: Option<f64>,
    pub delta: Option<f64>,
}

impl Default for EnergySection {
    fn default() -> Self {
        Self { x: vec![1.0], photons: 1.0, r: None, delta: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub states: Vec<String>,
    pub methods: Vec<String>,
    pub grid: Option<Grid>,
    pub seed: u64,
    pub cache: Option<PathBuf>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            states: StateFamily::ALL.iter().map(|f| f.name().to_string()).collect(),
            methods: vec!["perturbative".into()],
            grid: None,
            seed: 0,
            cache: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Range { start: f64, stop: f64, step: f64 },
    Values { values: Vec<f64> },
}

impl Grid {
    /// `start:stop:step` or a comma-separated list.
    pub fn parse(s: &str) -> Result<Self> {
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| Error::spec("grid", format!("bad number {t:?}")));
        if s.contains(':') {
            let p: Vec<&str> = s.split(':').collect();
            if p.len() != 3 {
                return Err(Error::spec("grid", "expected start:stop:step"));
            }
            Ok(Grid::Range { start: num(p[0])?, stop: num(p[1])?, step: num(p[2])? })
        } else {
            Ok(Grid::Values { values: s.split(',').map(num).collect::<Result<_>>()? })
        }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            Grid::Range { start, stop, step } => linear_grid(*start, *stop, *step),
            Grid::Values { values } => Ok(values.clone()),
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn scenario(&self) -> Result<CavityScenario> {
        let s = &self.scenario;
        CavityScenario::new(s.length, s.h, s.u, s.k, s.k_prime, s.n_max).map_err(|e| {
            let field = match e {
                fieldqfi_core::Error::Horizon(_) => "scenario.h",
                fieldqfi_core::Error::Parameter { name: "length", .. } => "scenario.length",
                fieldqfi_core::Error::Parameter { name: "u", .. } => "scenario.u",
                fieldqfi_core::Error::NoModes => "scenario.n_max",
                fieldqfi_core::Error::ModeOutOfRange { mode, .. } if mode == s.k => "scenario.k",
                _ => "scenario.k_prime",
            };
            Error::spec(field, e)
        })
    }

    pub fn quadrature(&self) -> Result<Quadrature> {
        if self.scenario.quadrature_order == 0 {
            return Err(Error::spec("scenario.quadrature_order", "must be positive"));
        }
        Ok(Quadrature { order: self.scenario.quadrature_order, ..Quadrature::default() })
    }

    pub fn cache(&self) -> Option<OverlapCache> {
        self.run.cache.as_ref().map(OverlapCache::new)
    }

    pub fn families(&self) -> Result<Vec<StateFamily>> {
        self.run
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| StateFamily::parse(s).ok_or_else(|| Error::spec(format!("run.states[{i}]"), format!("unknown state {s:?}"))))
            .collect()
    }

    pub fn methods(&self) -> Result<Vec<Method>> {
        let mut out = Vec::new();
        for (i, s) in self.run.methods.iter().enumerate() {
            let m = parse_method(s).ok_or_else(|| Error::spec(format!("run.methods[{i}]"), format!("unknown method {s:?}")))?;
            if !out.contains(&m) {
                out.push(m);
            }
        }
        // fixed column order regardless of how they were listed
        out.sort_by_key(|m| matches!(m, Method::Oracle));
        Ok(out)
    }

    pub fn energies(&self) -> Result<Vec<Energy>> {
        let e = &self.energy;
        if let Some(r) = e.r {
            let delta = e.delta.unwrap_or(0.0);
            if !(r >= 0.0) {
                return Err(Error::spec("energy.r", "must be non-negative"));
            }
            return Ok(vec![Energy::Explicit { r, delta }]);
        }
        if !(e.photons >= 0.0) {
            return Err(Error::spec("energy.photons", "must be non-negative"));
        }
        e.x.iter()
            .enumerate()
            .map(|(i, &x)| {
                if (0.0..=1.0).contains(&x) {
                    Ok(Energy::Matched { x, photons: e.photons })
                } else {
                    Err(Error::spec(format!("energy.x[{i}]"), format!("{x} outside [0, 1]")))
                }
            })
            .collect()
    }

    fn imported(&self) -> Result<Option<Imported>> {
        match &self.scenario.channel {
            Some(p) => read_imported(p).map(Some).map_err(|e| Error::spec("scenario.channel", e)),
            None => Ok(None),
        }
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let grid = match &self.run.grid {
            Some(g) => g.values()?,
            None => linear_grid(0.0, 1.0, 0.01)?,
        };
        let source = match self.imported()? {
            Some(Imported::Series(series)) => Source::Imported { series, k: self.scenario.k, k_prime: self.scenario.k_prime },
            Some(Imported::Channel(_)) => {
                return Err(Error::spec("scenario.channel", "sweeps need a series (phase, alpha1, ...), not a finite channel"))
            }
            None => Source::Cavity { scenario: self.scenario()?, quadrature: self.quadrature()?, cache: self.cache() },
        };
        let spec = SweepSpec { source, families: self.families()?, grid, energies: self.energies()?, methods: self.methods()? };
        spec.check()?;
        Ok(spec)
    }

    pub fn compare_spec(&self) -> Result<CompareSpec> {
        let thetas = match &self.run.grid {
            Some(g) => g.values()?,
            None => DEFAULT_COMPARE_LADDER.to_vec(),
        };
        let source = match self.imported()? {
            Some(Imported::Series(series)) => {
                CompareSource::Imported { series, k: self.scenario.k, k_prime: self.scenario.k_prime }
            }
            Some(Imported::Channel(_)) => return Err(Error::spec("scenario.channel", "comparisons need a series")),
            None => {
                let min = crate::sweep::CAVITY_ORACLE_STEPS[0];
                if let Some(t) = thetas.iter().find(|&&t| t <= min) {
                    return Err(Error::spec("grid", format!("h = {t} must exceed the oracle step {min}")));
                }
                CompareSource::Cavity { scenario: self.scenario()?, quadrature: self.quadrature()?, cache: self.cache() }
            }
        };
        let energy = *self.energies()?.first().ok_or_else(|| Error::spec("energy.x", "empty"))?;
        Ok(CompareSpec { source, families: self.families()?, energy, thetas })
    }

    pub fn validate_spec(&self) -> Result<ValidateSpec> {
        let imported = match self.imported()? {
            Some(Imported::Channel(c)) => Some(c),
            Some(Imported::Series(s)) => Some(s.evaluate(self.scenario.h)),
            None => None,
        };
        let energy = *self.energies()?.first().ok_or_else(|| Error::spec("energy.x", "empty"))?;
        Ok(ValidateSpec {
            scenario: self.scenario()?,
            quadrature: self.quadrature()?,
            energy,
            imported,
            seed: self.run.seed,
            cache: self.cache(),
        })
    }
}

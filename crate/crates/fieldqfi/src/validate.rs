//! Invariant suites run by `fieldqfi validate`.

use std::io::Write;

use fieldqfi_core::bogoliubov::{BogoliubovMatrices, BogoliubovSeries};
use fieldqfi_core::cavity::{rindler_overlaps, CavityScenario, Quadrature};
use fieldqfi_core::fidelity::{fidelity, FidelityInputs};
use fieldqfi_core::gaussian::GaussianState;
use fieldqfi_core::qfi::{f_sums, qfi_perturbative, ProbeState};
use fieldqfi_core::C64;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::io::{float, OverlapCache};
use crate::sweep::{cavity_model, probe, Energy, OracleTable, StateFamily};

/// Bound on `‖αα† − ββ† − 𝟙‖_max` for an imported channel.
pub const IMPORTED_BOUND: f64 = 1e-6;
/// Bound on the probed-mode rows of `SΩSᵀ − Ω` for the composed cavity channel.
pub const PROBED_BOUND: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
    /// Informational checks are reported but never fail the run.
    pub gating: bool,
}

impl Check {
    fn at_most(suite: &'static str, name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { suite, name: name.into(), value, bound, passed: value <= bound, gating: true }
    }

    fn info(suite: &'static str, name: impl Into<String>, value: f64) -> Self {
        Self { suite, name: name.into(), value, bound: f64::NAN, passed: true, gating: false }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || !c.gating)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.gating && !c.passed)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        out.write_record(["suite", "check", "value", "bound", "status"])?;
        for c in &self.checks {
            let status = if !c.gating { "info" } else if c.passed { "pass" } else { "fail" };
            let bound = if c.bound.is_nan() { String::new() } else { float(c.bound) };
            out.write_record([c.suite.to_string(), c.name.clone(), float(c.value), bound, status.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ValidateSpec {
    pub scenario: CavityScenario,
    pub quadrature: Quadrature,
    pub energy: Energy,
    /// When present the cavity suites are replaced by an identity check on it.
    pub imported: Option<BogoliubovMatrices>,
    pub seed: u64,
    pub cache: Option<OverlapCache>,
}

pub fn validate(spec: &ValidateSpec) -> Result<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut report = Report::default();
    report.checks.extend(single_mode_channels(&mut rng));
    report.checks.extend(fidelity_suite(&mut rng)?);
    match &spec.imported {
        Some(b) => {
            report.checks.push(Check::at_most("bogoliubov", "imported_identities", b.identity_residual(), IMPORTED_BOUND));
        }
        None => report.checks.extend(cavity_suites(spec)?),
    }
    Ok(report)
}

fn single_mode_channels(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let worst = (0..50)
        .map(|_| {
            let r: f64 = rng.random_range(0.0..2.0);
            let (phi, psi): (f64, f64) = (rng.random_range(0.0..6.3), rng.random_range(0.0..6.3));
            let a = DMatrix::from_element(1, 1, C64::from_polar(r.cosh(), phi));
            let b = DMatrix::from_element(1, 1, C64::from_polar(r.sinh(), psi));
            BogoliubovMatrices { alpha: a, beta: b }.symplectic().residual()
        })
        .fold(0.0, f64::max);
    vec![Check::at_most("bogoliubov", "single_mode_exact", worst, 1e-12)]
}

/// `O D Oᵀ` with `O` passive and `D = ⊕ ν_i diag(e^{-2r_i}, e^{2r_i})`.
pub fn random_state(rng: &mut ChaCha8Rng, n: usize, pure: bool) -> Result<GaussianState> {
    let unitary = |rng: &mut ChaCha8Rng| {
        let m = DMatrix::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        BogoliubovMatrices { alpha: m.qr().q(), beta: DMatrix::zeros(n, n) }.symplectic().matrix
    };
    let o1 = unitary(rng);
    let mut core = DMatrix::identity(2 * n, 2 * n);
    for i in 0..n {
        let r: f64 = rng.random_range(-1.0..1.0);
        let nu = if pure { 1.0 } else { 1.0 + rng.random_range(0.0..2.0) };
        core[(2 * i, 2 * i)] = nu * (-2.0 * r).exp();
        core[(2 * i + 1, 2 * i + 1)] = nu * (2.0 * r).exp();
    }
    let t = &o1 * &core * o1.transpose();
    let sigma = (&t + t.transpose()) * 0.5;
    let x = DVector::from_fn(2 * n, |_, _| rng.random_range(-1.0..1.0));
    Ok(GaussianState::new(x, sigma)?)
}

fn fidelity_suite(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let (mut self_dev, mut swap_dev) = (0.0f64, 0.0f64);
    for i in 0..100 {
        let n = 1 + i % 2;
        let a = random_state(rng, n, i % 4 < 2)?;
        let b = random_state(rng, n, i % 3 == 0)?;
        let f = |p: &GaussianState, q: &GaussianState| {
            fidelity(&FidelityInputs::new(
                p.covariance().clone(),
                q.covariance().clone(),
                q.first_moments() - p.first_moments(),
            )?)
        };
        self_dev = self_dev.max((f(&a, &a)? - 1.0).abs());
        swap_dev = swap_dev.max((f(&a, &b)? - f(&b, &a)?).abs());
    }
    Ok(vec![
        Check::at_most("fidelity", "self_fidelity", self_dev, 1e-12),
        Check::at_most("fidelity", "swap_symmetry", swap_dev, 1e-12),
    ])
}

fn cavity_suites(spec: &ValidateSpec) -> Result<Vec<Check>> {
    let sc = &spec.scenario;
    let quad = &spec.quadrature;
    let mut out = Vec::new();

    let horizon = rindler_overlaps(sc.length, 2.5, 2, quad).is_err();
    out.push(Check::at_most("cavity", "horizon_guard", if horizon { 0.0 } else { 1.0 }, 0.0));

    let small = rindler_overlaps(sc.length, 1e-4, sc.n_max, quad)?;
    let n = sc.n_max;
    let id_dev = (&small.alpha0 - DMatrix::<f64>::identity(n, n)).amax().max(small.beta0.amax());
    out.push(Check::at_most("cavity", "small_h_identity", id_dev, 1e-3));

    let model = cavity_model(sc, quad, spec.cache.as_ref())?;
    out.push(Check::at_most("cavity", "fit_residual", model.raw.fit_residual.amax(), fieldqfi_core::cavity::DEFAULT_FIT_BOUND));
    out.push(Check::info("cavity", "unitarity_projection_shift", model.projection_shift));

    let series = model.channel(sc.u);
    let diag = (0..n).map(|i| series.alpha1[(i, i)].norm().max(series.beta1[(i, i)].norm())).fold(0.0, f64::max);
    out.push(Check::at_most("cavity", "diagonal_first_order", diag, 1e-8));

    let table = OracleTable::build(sc.length, sc.h, n, quad, spec.cache.as_ref())?;
    let exact = fieldqfi_core::cavity::compose_exact(&table.entries[0], sc.u).symplectic();
    out.push(Check::at_most("bogoliubov", "cavity_probed_rows", exact.residual_on(&[sc.k, sc.k_prime])?, PROBED_BOUND));
    out.push(Check::info("bogoliubov", "cavity_full_matrix", exact.residual()));

    let shifted = model.channel(sc.u + 1.0);
    let mut period = 0.0f64;
    for f in StateFamily::ALL {
        let (r, delta) = spec.energy.parameters(f, sc.k, sc.k_prime)?;
        let p = probe(f, sc.k, sc.k_prime, r, delta);
        let pert = qfi_perturbative(&series, &p)?.value;
        period = period.max((pert - qfi_perturbative(&shifted, &p)?.value).abs());
        let oracle = table.qfi(&p, sc.h, sc.u)?.value;
        let dev = crate::compare::relative_deviation(pert, oracle);
        out.push(Check::at_most("qfi", format!("dual_path_{}", f.name()), dev, 10.0 * sc.h));
    }
    out.push(Check::at_most("cavity", "periodicity", period, 1e-9));

    let mut negative = 0.0f64;
    let mut vacuum = 0.0f64;
    for i in 0..=20 {
        let s = model.channel(i as f64 * 0.05);
        for f in StateFamily::ALL {
            let (r, delta) = spec.energy.parameters(f, sc.k, sc.k_prime)?;
            let v = qfi_perturbative(&s, &probe(f, sc.k, sc.k_prime, r, delta))?.value;
            negative = negative.max(-v);
        }
        vacuum = vacuum.max(vacuum_gap(&s, sc.k, sc.k_prime)?);
    }
    out.push(Check::at_most("qfi", "nonnegative", negative, 1e-9));
    out.push(Check::at_most("qfi", "vacuum_identities", vacuum, 1e-14));
    Ok(out)
}

/// Largest absolute gap between the vacuum QFI and its `f`-sum closed forms
/// for one and two probe modes.
pub fn vacuum_gap(s: &BogoliubovSeries, k: usize, k_prime: usize) -> Result<f64> {
    let h1 = qfi_perturbative(s, &ProbeState::SingleSqueezedDisplaced { k, r: 0.0, delta: 0.0 })?.value;
    let f1 = 8.0 * f_sums(s, &[k], &[k])?.f_beta[0];
    let h2 = qfi_perturbative(s, &ProbeState::ProductSqueezedDisplaced { k, k_prime, r: 0.0, delta: 0.0 })?.value;
    let fs = f_sums(s, &[k, k_prime], &[k, k_prime])?;
    let b = s.beta1[(k - 1, k_prime - 1)].norm_sqr();
    let f2 = 8.0 * fs.f_beta[0] + 8.0 * fs.f_beta[1] + 4.0 * b;
    let h3 = qfi_perturbative(s, &ProbeState::TwoModeSqueezed { k, k_prime, r: 0.0 })?.value;
    Ok((h1 - f1).abs().max((h2 - f2).abs()).max((h3 - f2).abs()))
}

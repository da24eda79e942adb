//! Quantum Fisher information: a fidelity-based finite-difference oracle and
//! the perturbative closed forms `H = 4 (E + C)`.
//!
//! The perturbative master path collects the θ-orders of the reduced
//! covariance and first moments (`covariance_series`) and evaluates
//!
//! ```text
//! E = ½ X1ᵀ σ0⁻¹ X1
//! C = (1/16) [ (tr σ0⁻¹σ1)² − tr (σ0⁻¹σ1)² + 4 tr σ0⁻¹σ2 ]
//! ```
//!
//! which holds for one and two modes alike. The explicit Bogoliubov-coefficient
//! forms are checked against it. Functions with a `_printed` suffix transcribe
//! the closed forms as they are usually quoted; they disagree with the master
//! path and are kept only so the discrepancy can be measured.

#[allow(unused_imports)] // unused when a dependency pulls in std
use num_traits::Float;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::bogoliubov::{covariance_series, BogoliubovMatrices, BogoliubovSeries, CovarianceSeries};
use crate::error::{Error, Result};
use crate::fidelity::{fidelity_parts, FidelityInputs};
use crate::gaussian::{
    product_squeezed_displaced_state, reduce, squeezed_displaced_state, two_mode_squeezed_state,
    GaussianState,
};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Oracle,
    Perturbative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfiResult {
    pub value: f64,
    pub e2: f64,
    pub c2: f64,
    pub method: Method,
    pub residual: f64,
}

impl QfiResult {
    pub fn perturbative(e2: f64, c2: f64, residual: f64) -> Self {
        Self { value: 4.0 * (e2 + c2), e2, c2, method: Method::Perturbative, residual }
    }

    pub fn require_converged(self, bound: f64) -> Result<Self> {
        if self.residual <= bound {
            Ok(self)
        } else {
            Err(Error::OracleDiverged { residual: self.residual, bound })
        }
    }
}

// ---------------------------------------------------------------- oracle

/// Default step ladder for the oracle.
pub const DEFAULT_STEPS: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Richardson table for a quantity with an even error expansion in the step.
/// Returns the final extrapolant and the gap to the previous diagonal entry.
pub fn richardson(steps: &[f64], values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(i + 1);
        row.push(values[i]);
        for j in 1..=i {
            let t = steps[i - j] / steps[i];
            let prev = row[j - 1];
            row.push(prev + (prev - table[i - 1][j - 1]) / (t * t - 1.0));
        }
        table.push(row);
    }
    let last = table[n - 1][n - 1];
    let gap = if n > 1 { (last - table[n - 2][n - 2]).abs() } else { f64::INFINITY };
    (last, gap)
}

/// `H(θ) = lim 8 (1 − √F(ρ_θ, ρ_{θ±s})) / s²`, averaged over both sides and
/// Richardson-extrapolated over `steps` (positive, strictly decreasing).
/// `family` maps θ to `(first moments, covariance)` of the probed modes.
/// The split `e2`, `c2` extrapolates the exponential and determinant factors
/// of the fidelity separately.
pub fn qfi_oracle<F>(family: F, theta: f64, steps: &[f64]) -> Result<QfiResult>
where
    F: Fn(f64) -> Result<(DVector<f64>, DMatrix<f64>)>,
{
    if steps.len() < 2 || steps.iter().any(|&s| !(s > 0.0)) || steps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::BadSteps);
    }
    let (x0, s0) = family(theta)?;
    let mut h = Vec::with_capacity(steps.len());
    let mut e = Vec::with_capacity(steps.len());
    let mut c = Vec::with_capacity(steps.len());
    for &s in steps {
        let (mut hs, mut es, mut cs) = (0.0, 0.0, 0.0);
        for side in [s, -s] {
            let (x1, s1) = family(theta + side)?;
            let parts = fidelity_parts(&FidelityInputs::new(s0.clone(), s1, x1 - &x0)?)?;
            let f = parts.value()?;
            let s2 = s * s;
            hs += 8.0 * (1.0 - f.sqrt()) / s2;
            es += 2.0 * (1.0 - (-0.5 * parts.exponent).exp()) / s2;
            cs += 2.0 * (1.0 - 1.0 / parts.denominator.sqrt()) / s2;
        }
        h.push(0.5 * hs);
        e.push(0.5 * es);
        c.push(0.5 * cs);
    }
    let (value, residual) = richardson(steps, &h);
    Ok(QfiResult {
        value,
        e2: richardson(steps, &e).0,
        c2: richardson(steps, &c).0,
        method: Method::Oracle,
        residual,
    })
}

// ---------------------------------------------------------- probe states

/// Input states probed in the cavity comparisons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProbeState {
    SingleSqueezedDisplaced { k: usize, r: f64, delta: f64 },
    ProductSqueezedDisplaced { k: usize, k_prime: usize, r: f64, delta: f64 },
    TwoModeSqueezed { k: usize, k_prime: usize, r: f64 },
}

impl ProbeState {
    pub fn modes(&self) -> Vec<usize> {
        match *self {
            ProbeState::SingleSqueezedDisplaced { k, .. } => alloc::vec![k],
            ProbeState::ProductSqueezedDisplaced { k, k_prime, .. }
            | ProbeState::TwoModeSqueezed { k, k_prime, .. } => alloc::vec![k, k_prime],
        }
    }

    /// The input on all `n_modes` field modes (vacuum outside the probe).
    pub fn input_state(&self, n_modes: usize) -> Result<GaussianState> {
        match *self {
            ProbeState::SingleSqueezedDisplaced { k, r, delta } => squeezed_displaced_state(n_modes, k, r, delta),
            ProbeState::ProductSqueezedDisplaced { k, k_prime, r, delta } => {
                product_squeezed_displaced_state(n_modes, k, k_prime, r, delta)
            }
            ProbeState::TwoModeSqueezed { k, k_prime, r } => two_mode_squeezed_state(n_modes, k, k_prime, r),
        }
    }
}

/// Oracle QFI for a channel family `θ ↦ (α(θ), β(θ))` acting on `probe`.
pub fn qfi_oracle_channel<F>(channel: F, probe: &ProbeState, theta: f64, steps: &[f64]) -> Result<QfiResult>
where
    F: Fn(f64) -> Result<BogoliubovMatrices>,
{
    let modes = probe.modes();
    let family = |t: f64| -> Result<(DVector<f64>, DMatrix<f64>)> {
        let b = channel(t)?;
        let input = probe.input_state(b.n_max())?;
        let s = b.symplectic().matrix;
        let c = &s * input.covariance() * s.transpose();
        let out = GaussianState::new(&s * input.first_moments(), (&c + c.transpose()) * 0.5)?;
        let red = reduce(&out, &modes)?;
        Ok((red.first_moments().clone(), red.covariance().clone()))
    };
    qfi_oracle(family, theta, steps)
}

// ------------------------------------------------------------ master path

fn inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    m.clone().try_inverse().ok_or(Error::Singular)
}

/// `(1/16) [ (tr Bσ1)² − tr (Bσ1)² + 4 tr Bσ2 ]` with `B = σ0⁻¹`.
pub fn c2_trace(sigma0: &DMatrix<f64>, sigma1: &DMatrix<f64>, sigma2: &DMatrix<f64>) -> Result<f64> {
    let b = inverse(sigma0)?;
    let m = &b * sigma1;
    let t1 = m.trace();
    Ok((t1 * t1 - (&m * &m).trace() + 4.0 * (&b * sigma2).trace()) / 16.0)
}

/// Two-mode covariance contribution; the reference every explicit form is
/// checked against.
pub fn c2_two_mode_general(sigma0: &DMatrix<f64>, sigma1: &DMatrix<f64>, sigma2: &DMatrix<f64>) -> Result<f64> {
    for m in [sigma0, sigma1, sigma2] {
        if m.nrows() != 4 || m.ncols() != 4 {
            return Err(Error::Dimension { expected: 4, got: m.nrows() });
        }
    }
    c2_trace(sigma0, sigma1, sigma2)
}

/// Single-mode covariance contribution from the entries of the 2×2 orders:
/// `C = ¼ [ σ0₁₁σ2₂₂ + σ2₁₁σ0₂₂ − 2σ0₁₂σ2₁₂ + ½ (σ1₁₁σ1₂₂ − σ1₁₂²) ]`
/// (requires `det σ0 = 1`).
pub fn c2_single_entrywise(sigma0: &DMatrix<f64>, sigma1: &DMatrix<f64>, sigma2: &DMatrix<f64>) -> f64 {
    let (s0, s1, s2) = (sigma0, sigma1, sigma2);
    let d2 = s0[(0, 0)] * s2[(1, 1)] + s2[(0, 0)] * s0[(1, 1)] - 2.0 * s0[(0, 1)] * s2[(0, 1)]
        + 0.5 * (s1[(0, 0)] * s1[(1, 1)] - s1[(0, 1)] * s1[(0, 1)]);
    d2 / 4.0
}

/// `½ X1ᵀ σ0⁻¹ X1`.
pub fn e2_from_moments(sigma0: &DMatrix<f64>, x1: &DVector<f64>) -> Result<f64> {
    Ok(0.5 * x1.dot(&(inverse(sigma0)? * x1)))
}

/// Largest last-retained-mode contribution to the f-sums of the probed modes.
pub fn truncation_residual(series: &BogoliubovSeries, modes: &[usize]) -> f64 {
    let n = series.n_max();
    let last = n - 1;
    modes
        .iter()
        .filter(|&&k| k >= 1 && k <= n && k - 1 != last)
        .map(|&k| {
            let i = k - 1;
            0.5 * (series.alpha1[(last, i)].norm_sqr()
                + series.beta1[(last, i)].norm_sqr()
                + series.alpha1[(i, last)].norm_sqr()
                + series.beta1[(i, last)].norm_sqr())
        })
        .fold(0.0, f64::max)
}

/// Master-path QFI for any probe state.
pub fn qfi_perturbative(series: &BogoliubovSeries, probe: &ProbeState) -> Result<QfiResult> {
    let modes = probe.modes();
    let input = probe.input_state(series.n_max())?;
    let cs = covariance_series(series, &input, &modes)?;
    let e2 = match probe {
        ProbeState::TwoModeSqueezed { .. } => 0.0,
        _ => e2_from_moments(&cs.sigma[0], &cs.moments[1])?,
    };
    let c2 = c2_of(&cs, modes.len())?;
    Ok(QfiResult::perturbative(e2, c2, truncation_residual(series, &modes)))
}

fn c2_of(cs: &CovarianceSeries, n_probe: usize) -> Result<f64> {
    if n_probe == 1 {
        Ok(c2_single_entrywise(&cs.sigma[0], &cs.sigma[1], &cs.sigma[2]))
    } else {
        c2_two_mode_general(&cs.sigma[0], &cs.sigma[1], &cs.sigma[2])
    }
}

// -------------------------------------------------------------- f-sums

#[derive(Debug, Clone, PartialEq)]
pub struct FSums {
    /// `½ Σ_{n∉X} |α⁽¹⁾_{n i}|²` per probe mode `i`.
    pub f_alpha: Vec<f64>,
    /// `½ Σ_{n∉X} |β⁽¹⁾_{n i}|²`.
    pub f_beta: Vec<f64>,
    /// `Σ_{n∉X} α⁽¹⁾_{n i} β⁽¹⁾*_{n j}`.
    pub g_alpha_beta: DMatrix<C64>,
    /// Magnitude of the last retained term.
    pub tail: f64,
}

pub fn f_sums(series: &BogoliubovSeries, exclusion: &[usize], probe: &[usize]) -> Result<FSums> {
    let n = series.n_max();
    for &k in exclusion.iter().chain(probe) {
        if k == 0 || k > n {
            return Err(Error::ModeOutOfRange { mode: k, n_modes: n });
        }
    }
    let rows: Vec<usize> = (1..=n).filter(|m| !exclusion.contains(m)).map(|m| m - 1).collect();
    let col = |m: &DMatrix<C64>, i: usize| -> f64 { 0.5 * rows.iter().map(|&r| m[(r, i - 1)].norm_sqr()).sum::<f64>() };
    let f_alpha = probe.iter().map(|&i| col(&series.alpha1, i)).collect();
    let f_beta = probe.iter().map(|&i| col(&series.beta1, i)).collect();
    let g = DMatrix::from_fn(probe.len(), probe.len(), |p, q| {
        rows.iter()
            .map(|&r| series.alpha1[(r, probe[p] - 1)] * series.beta1[(r, probe[q] - 1)].conj())
            .sum()
    });
    let tail = match rows.last() {
        Some(&r) => probe
            .iter()
            .map(|&i| 0.5 * (series.alpha1[(r, i - 1)].norm_sqr() + series.beta1[(r, i - 1)].norm_sqr()))
            .fold(0.0, f64::max),
        None => 0.0,
    };
    Ok(FSums { f_alpha, f_beta, g_alpha_beta: g, tail })
}

// ------------------------------------------------- explicit closed forms

fn idx(series: &BogoliubovSeries, k: usize) -> Result<usize> {
    if k == 0 || k > series.n_max() {
        Err(Error::ModeOutOfRange { mode: k, n_modes: series.n_max() })
    } else {
        Ok(k - 1)
    }
}

/// Covariance contribution for a product of modes `K`, each squeezed with
/// block `diag(e^r, e^-r)`, written in the Bogoliubov coefficients. With
/// `a_ij = G_i* α⁽¹⁾_ij`, `b_ij = G_i* β⁽¹⁾_ij`:
///
/// ```text
/// C = (1/16) [ t1² − Σ_{i,j∈K} P(i,j) + 4 t2 ]
/// t1 = 4 Σ_{i∈K} Re a_ii
/// t2 = Σ_{i∈K} [ 4 Re(G_i* α⁽²⁾_ii) + Σ_{a∈K} Tψ(a_ia, b_ia) + Σ_{n∉K} T1(a_in, b_in) ]
/// ```
pub fn c2_product_closed_form(series: &BogoliubovSeries, modes: &[usize], r: f64) -> Result<f64> {
    let (c, s) = (r.cosh(), r.sinh());
    let k: Vec<usize> = modes.iter().map(|&m| idx(series, m)).collect::<Result<_>>()?;
    let n = series.n_max();
    let a = |i: usize, j: usize| series.phases[i].conj() * series.alpha1[(i, j)];
    let b = |i: usize, j: usize| series.phases[i].conj() * series.beta1[(i, j)];
    let t_psi = |a: C64, b: C64| {
        2.0 * c * c * (a.norm_sqr() + b.norm_sqr()) - 4.0 * c * s * (a.conj() * b).re + 4.0 * c * s * (a * b).re
            - 2.0 * s * s * (a * a + b * b).re
    };
    let t_one = |a: C64, b: C64| 2.0 * c * (a.norm_sqr() + b.norm_sqr()) + 4.0 * s * (a * b).re;
    let t1: f64 = 4.0 * k.iter().map(|&i| a(i, i).re).sum::<f64>();
    let mut t2 = 0.0;
    for &i in &k {
        t2 += 4.0 * (series.phases[i].conj() * series.alpha2[(i, i)]).re;
        for &j in &k {
            t2 += t_psi(a(i, j), b(i, j));
        }
        for m in (0..n).filter(|m| !k.contains(m)) {
            t2 += t_one(a(i, m), b(i, m));
        }
    }
    let mut pairs = 0.0;
    for &i in &k {
        for &j in &k {
            let p1 = (a(i, j) + a(j, i).conj()) * c - (b(i, j) + b(j, i).conj()) * s;
            let p2 = (b(i, j) + b(j, i)) * c - (a(i, j) + a(j, i)) * s;
            pairs += 2.0
                * (c * c * (p1.norm_sqr() + p2.norm_sqr())
                    + 2.0 * c * s * ((p1 * p2.conj()).re + (p1 * p2).re)
                    + s * s * (p1 * p1 + p2 * p2).re);
        }
    }
    Ok((t1 * t1 - pairs + 4.0 * t2) / 16.0)
}

/// Single-mode covariance contribution on the master path.
pub fn c2_single_mode(series: &BogoliubovSeries, k: usize, r: f64) -> Result<f64> {
    let input = squeezed_displaced_state(series.n_max(), k, r, 0.0)?;
    let cs = covariance_series(series, &input, &[k])?;
    Ok(c2_single_entrywise(&cs.sigma[0], &cs.sigma[1], &cs.sigma[2]))
}

/// The single-mode contribution computed three ways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathComparison {
    pub primary: f64,
    pub explicit: f64,
    pub printed: f64,
}

impl PathComparison {
    pub fn explicit_gap(&self) -> f64 {
        (self.primary - self.explicit).abs()
    }
    pub fn printed_gap(&self) -> f64 {
        (self.primary - self.printed).abs()
    }
}

pub fn c2_single_mode_paths(series: &BogoliubovSeries, k: usize, r: f64) -> Result<PathComparison> {
    Ok(PathComparison {
        primary: c2_single_mode(series, k, r)?,
        explicit: c2_product_closed_form(series, &[k], r)?,
        printed: c2_single_mode_printed(series, k, r)?,
    })
}

/// Transcription of the commonly quoted single-mode form (f-sums over `n ≠ k`,
/// no second-order term). Reading of the bracketing: only the innermost
/// `½(…)` group carries the trailing `sinh² r`.
pub fn c2_single_mode_printed(series: &BogoliubovSeries, k: usize, r: f64) -> Result<f64> {
    let i = idx(series, k)?;
    let fs = f_sums(series, &[k], &[k])?;
    let (c, s) = (r.cosh(), r.sinh());
    let phi = series.phases[i].arg();
    let akk = series.alpha1[(i, i)];
    let bkk = series.beta1[(i, i)];
    let cross: f64 = (0..series.n_max())
        .filter(|&n| n != i)
        .map(|n| (series.alpha1[(n, i)] * series.beta1[(n, i)].conj()).re)
        .sum();
    let inner = 0.5
        * (bkk.norm_sqr() * phi.sin().powi(2) + 0.5 * bkk.im * bkk.re * (2.0 * phi).sin()
            - (akk * akk).re * (2.0 * phi).cos());
    Ok((fs.f_alpha[0] + fs.f_beta[0]) * c - cross * s
        - 0.25 * ((akk * bkk.conj()).re * (2.0 * r).sinh() + akk.norm_sqr() * c * c + inner * s * s))
}

/// Two-mode product-state covariance contribution (explicit form).
pub fn c2_two_mode_product(series: &BogoliubovSeries, k: usize, k_prime: usize, r: f64) -> Result<f64> {
    if k == k_prime {
        return Err(Error::DuplicateMode(k));
    }
    c2_product_closed_form(series, &[k, k_prime], r)
}

/// Transcription of the commonly quoted two-mode product form, summed over
/// `i, j ∈ {k, k'}` with f-sums excluding both probed modes.
pub fn c2_two_mode_product_printed(series: &BogoliubovSeries, k: usize, k_prime: usize, r: f64) -> Result<f64> {
    if k == k_prime {
        return Err(Error::DuplicateMode(k));
    }
    let probe = [k, k_prime];
    let fs = f_sums(series, &probe, &probe)?;
    let (c, s) = (r.cosh(), r.sinh());
    let (s2r, c2, c4, s4) = ((2.0 * r).sinh(), c * c, c.powi(4), s.powi(4));
    let mut acc = C64::new(0.0, 0.0);
    for p in 0..2 {
        for q in 0..2 {
            let (i, j) = (probe[p] - 1, probe[q] - 1);
            let (gi, gj) = (series.phases[i], series.phases[j]);
            let al = series.alpha1[(i, j)];
            let be = series.beta1[(i, j)];
            let (fa, fb) = (fs.f_alpha[p], fs.f_beta[p]);
            let rot = gj.conj() * gj.conj() * al * al + gj * gj * be * be;
            let term = C64::from(4.0 * c * (fa + fb))
                + gj.conj() * gj.conj() * fs.g_alpha_beta[(q, q)] * (4.0 * s)
                + C64::from(2.0 * c2 * (be.norm_sqr() - fa + fb))
                - C64::from(2.0 * c4 * be.norm_sqr())
                - (rot + gi * series.alpha2[(i, i)].conj() * 2.0) * (2.0 * s * s)
                - al * be * (4.0 * s2r)
                + al * be * (2.0 * s2r * c2)
                + (C64::from(al.norm_sqr() - be.norm_sqr()) - rot) * s4
                - (C64::from(al.norm_sqr() - 3.0 * be.norm_sqr()) - rot) * (0.25 * s2r * s2r);
            acc += term;
        }
    }
    Ok(0.25 * acc.re)
}

// ------------------------------------------------------------- E terms

/// `δ² ( |z|² cosh r − Re[z² G_k*²] sinh r )` with `z = α⁽¹⁾_kk − β⁽¹⁾_kk`.
pub fn e2_single_mode(series: &BogoliubovSeries, k: usize, r: f64, delta: f64) -> Result<f64> {
    let i = idx(series, k)?;
    let z = series.alpha1[(i, i)] - series.beta1[(i, i)];
    let g2 = series.phases[i].conj() * series.phases[i].conj();
    Ok(delta * delta * (z.norm_sqr() * r.cosh() - (z * z * g2).re * r.sinh()))
}

/// The commonly quoted form `2δ² ( |z|² cosh r + Re[z² G_k*²] sinh r )`.
pub fn e2_single_mode_printed(series: &BogoliubovSeries, k: usize, r: f64, delta: f64) -> Result<f64> {
    let i = idx(series, k)?;
    let z = series.alpha1[(i, i)] - series.beta1[(i, i)];
    let g2 = series.phases[i].conj() * series.phases[i].conj();
    Ok(2.0 * delta * delta * (z.norm_sqr() * r.cosh() + (z * z * g2).re * r.sinh()))
}

fn displacement_amplitudes(series: &BogoliubovSeries, k: usize, k_prime: usize) -> Result<[(C64, C64); 2]> {
    if k == k_prime {
        return Err(Error::DuplicateMode(k));
    }
    let (i, j) = (idx(series, k)?, idx(series, k_prime)?);
    let amp = |i: usize, j: usize| {
        series.alpha1[(i, i)] + series.alpha1[(i, j)] - series.beta1[(i, i)] - series.beta1[(i, j)]
    };
    Ok([(amp(i, j), series.phases[i]), (amp(j, i), series.phases[j])])
}

/// `δ² Σ_i ( |A_i|² cosh r − Re[A_i² G_i*²] sinh r )` with
/// `A_i = α⁽¹⁾_ii + α⁽¹⁾_ij − β⁽¹⁾_ii − β⁽¹⁾_ij` (`j` the other probed mode).
pub fn e2_two_mode(series: &BogoliubovSeries, k: usize, k_prime: usize, r: f64, delta: f64) -> Result<f64> {
    let amps = displacement_amplitudes(series, k, k_prime)?;
    Ok(delta
        * delta
        * amps
            .iter()
            .map(|&(a, g)| a.norm_sqr() * r.cosh() - (a * a * g.conj() * g.conj()).re * r.sinh())
            .sum::<f64>())
}

/// The commonly quoted two-mode form
/// `2δ² [ cosh r Σ|A|² + sinh r Σ (cos 2φ_i |A_i|² + sin 2φ_i Im A_i²) ]`.
pub fn e2_two_mode_printed(series: &BogoliubovSeries, k: usize, k_prime: usize, r: f64, delta: f64) -> Result<f64> {
    let amps = displacement_amplitudes(series, k, k_prime)?;
    let mut acc = 0.0;
    for &(a, g) in &amps {
        let phi = g.arg();
        acc += a.norm_sqr() * r.cosh()
            + r.sinh() * ((2.0 * phi).cos() * a.norm_sqr() + (2.0 * phi).sin() * (a * a).im);
    }
    Ok(2.0 * delta * delta * acc)
}

// ------------------------------------------------------ family wrappers

pub fn qfi_single_mode(series: &BogoliubovSeries, k: usize, r: f64, delta: f64) -> Result<QfiResult> {
    let e2 = e2_single_mode(series, k, r, delta)?;
    let c2 = c2_single_mode(series, k, r)?;
    Ok(QfiResult::perturbative(e2, c2, truncation_residual(series, &[k])))
}

pub fn qfi_two_mode_product(
    series: &BogoliubovSeries,
    k: usize,
    k_prime: usize,
    r: f64,
    delta: f64,
) -> Result<QfiResult> {
    let e2 = e2_two_mode(series, k, k_prime, r, delta)?;
    let c2 = c2_two_mode_product(series, k, k_prime, r)?;
    Ok(QfiResult::perturbative(e2, c2, truncation_residual(series, &[k, k_prime])))
}

/// Two-mode squeezed input; the exponential term vanishes identically.
pub fn qfi_two_mode_squeezed(series: &BogoliubovSeries, k: usize, k_prime: usize, r: f64) -> Result<QfiResult> {
    if k == k_prime {
        return Err(Error::DuplicateMode(k));
    }
    qfi_perturbative(series, &ProbeState::TwoModeSqueezed { k, k_prime, r })
}

/// `|β⁽¹⁾_kk'|`.
pub fn negativity_first_order(series: &BogoliubovSeries, k: usize, k_prime: usize) -> Result<f64> {
    let (i, j) = (idx(series, k)?, idx(series, k_prime)?);
    if i == j {
        return Err(Error::DuplicateMode(k));
    }
    Ok(series.beta1[(i, j)].norm())
}

/// Splits a per-mode photon budget `N` as `sinh² r = x N`, `δ² = (1 − x) N`.
pub fn energy_budget(x: f64, photons: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Parameter { name: "x", value: x });
    }
    if !(photons >= 0.0) {
        return Err(Error::Parameter { name: "photons", value: photons });
    }
    Ok(((x * photons).sqrt().asinh(), ((1.0 - x) * photons).sqrt()))
}

/// Reduced state of `probe` after the perturbative channel, from the series
/// orders (useful as an oracle family that shares the truncation).
pub fn series_family(series: &BogoliubovSeries, probe: &ProbeState) -> Result<CovarianceSeries> {
    let input = probe.input_state(series.n_max())?;
    covariance_series(series, &input, &probe.modes())
}

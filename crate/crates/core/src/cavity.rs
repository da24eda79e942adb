//! Dirichlet cavity that is inertial, undergoes one segment of uniform proper
//! acceleration, and returns to inertial motion.
//!
//! The inertial-to-Rindler coefficients `∘α`, `∘β` are computed here from the
//! Klein–Gordon inner product on the `t = 0` slice, with the cavity occupying
//! `x ∈ [x_L, x_R]`, `x_L = L/h − L/2`, `x_R = L/h + L/2`:
//!
//! ```text
//! ∘α_mn =  ∫ (ω_n + Ω_m/x) f̃_m f_n dx
//! ∘β_mn =  ∫ (ω_n − Ω_m/x) f̃_m f_n dx
//! f_n = (nπ)^{-1/2} sin(nπ (x − x_L)/L),          ω_n = nπ/L
//! f̃_m = (mπ)^{-1/2} sin(mπ ln(x/x_L)/ln(x_R/x_L)), Ω_m = mπ/ln(x_R/x_L)
//! ```
//!
//! Reflecting the cavity (`h → −h`) maps `∘X_mn` to `(−1)^{m+n} ∘X_mn`, so
//! entries with odd `m + n` are odd in `h` and the rest are even. The series
//! fit uses that structure.

#[allow(unused_imports)] // unused when a dependency pulls in std
use num_traits::Float;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::bogoliubov::{BogoliubovMatrices, BogoliubovSeries};
use crate::error::{Error, Result};
use crate::quadrature::{composite, gauss_legendre};
use crate::C64;

use core::f64::consts::PI;

pub const DEFAULT_LADDER: [f64; 5] = [0.0025, 0.005, 0.01, 0.02, 0.04];

fn check_h(h: f64) -> Result<()> {
    if h > 0.0 && h < 2.0 {
        Ok(())
    } else {
        Err(Error::Horizon(h))
    }
}

fn check_length(length: f64) -> Result<()> {
    if length > 0.0 && length.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter { name: "length", value: length })
    }
}

/// Wall positions `(x_L, x_R)` in the Rindler chart.
pub fn wall_positions(length: f64, h: f64) -> Result<(f64, f64)> {
    check_length(length)?;
    check_h(h)?;
    Ok((length / h - 0.5 * length, length / h + 0.5 * length))
}

/// `ω̃_n = nπh / (2L artanh(h/2))`.
pub fn proper_frequency(n: usize, h: f64, length: f64) -> Result<f64> {
    check_length(length)?;
    check_h(h)?;
    Ok(n as f64 * PI * h / (2.0 * length * (0.5 * h).atanh()))
}

/// `u = hτ / (4L artanh(h/2))`.
pub fn u_from_duration(tau: f64, h: f64, length: f64) -> Result<f64> {
    check_length(length)?;
    check_h(h)?;
    Ok(h * tau / (4.0 * length * (0.5 * h).atanh()))
}

pub fn duration_from_u(u: f64, h: f64, length: f64) -> Result<f64> {
    check_length(length)?;
    check_h(h)?;
    Ok(4.0 * u * length * (0.5 * h).atanh() / h)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityScenario {
    pub length: f64,
    pub h: f64,
    pub u: f64,
    pub k: usize,
    pub k_prime: usize,
    pub n_max: usize,
}

impl CavityScenario {
    pub fn new(length: f64, h: f64, u: f64, k: usize, k_prime: usize, n_max: usize) -> Result<Self> {
        check_length(length)?;
        check_h(h)?;
        if !(u >= 0.0) {
            return Err(Error::Parameter { name: "u", value: u });
        }
        if n_max == 0 {
            return Err(Error::NoModes);
        }
        for m in [k, k_prime] {
            if m == 0 || m > n_max {
                return Err(Error::ModeOutOfRange { mode: m, n_modes: n_max });
            }
        }
        if k == k_prime {
            return Err(Error::DuplicateMode(k));
        }
        Ok(Self { length, h, u, k, k_prime, n_max })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    /// Points per Gauss–Legendre panel.
    pub order: usize,
    /// Accept once doubling the panel count changes no entry by more than this.
    pub tol: f64,
    pub max_panels: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { order: 64, tol: 1e-10, max_panels: 1 << 12 }
    }
}

/// Inertial-to-Rindler coefficients at a finite `h` (real-valued).
#[derive(Debug, Clone, PartialEq)]
pub struct RindlerOverlaps {
    pub length: f64,
    pub h: f64,
    pub alpha0: DMatrix<f64>,
    pub beta0: DMatrix<f64>,
    pub panels: usize,
    /// Largest change of an entry in the final panel doubling.
    pub quadrature_change: f64,
}

impl RindlerOverlaps {
    pub fn n_max(&self) -> usize {
        self.alpha0.nrows()
    }

    pub fn to_matrices(&self) -> BogoliubovMatrices {
        BogoliubovMatrices { alpha: self.alpha0.map(C64::from), beta: self.beta0.map(C64::from) }
    }

    pub fn identity_residual(&self) -> f64 {
        self.to_matrices().identity_residual()
    }
}

fn overlaps_with_panels(length: f64, h: f64, n_max: usize, order: usize, panels: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let x_l = length / h - 0.5 * length;
    let eps = length / x_l;
    let log_ratio = eps.ln_1p();
    let rule = gauss_legendre(order);
    let (xi, w) = composite(0.0, 1.0, panels, &rule);
    let q = xi.len();
    let f = DMatrix::from_fn(n_max, q, |n, j| {
        let nn = (n + 1) as f64;
        (nn * PI * xi[j]).sin() / (nn * PI).sqrt()
    });
    let ft = DMatrix::from_fn(n_max, q, |m, j| {
        let mm = (m + 1) as f64;
        (mm * PI * (eps * xi[j]).ln_1p() / log_ratio).sin() / (mm * PI).sqrt()
    });
    // dx = L dξ
    let ftw = DMatrix::from_fn(n_max, q, |m, j| ft[(m, j)] * w[j] * length);
    let ftw_chi = DMatrix::from_fn(n_max, q, |m, j| ftw[(m, j)] / (x_l + length * xi[j]));
    let p = &ftw * f.transpose();
    let qm = &ftw_chi * f.transpose();
    let omega_n = |n: usize| (n + 1) as f64 * PI / length;
    let big_omega = |m: usize| (m + 1) as f64 * PI / log_ratio;
    let alpha = DMatrix::from_fn(n_max, n_max, |m, n| omega_n(n) * p[(m, n)] + big_omega(m) * qm[(m, n)]);
    let beta = DMatrix::from_fn(n_max, n_max, |m, n| omega_n(n) * p[(m, n)] - big_omega(m) * qm[(m, n)]);
    (alpha, beta)
}

/// Exact overlaps at `h` by composite Gauss–Legendre quadrature, doubling the
/// panel count until the largest change drops below `quad.tol`.
pub fn rindler_overlaps(length: f64, h: f64, n_max: usize, quad: &Quadrature) -> Result<RindlerOverlaps> {
    wall_positions(length, h)?;
    if n_max == 0 {
        return Err(Error::NoModes);
    }
    let mut panels = (n_max / 4).max(2);
    let (mut a, mut b) = overlaps_with_panels(length, h, n_max, quad.order, panels);
    loop {
        let next = panels * 2;
        let (a2, b2) = overlaps_with_panels(length, h, n_max, quad.order, next);
        let change = (&a2 - &a).amax().max((&b2 - &b).amax());
        a = a2;
        b = b2;
        panels = next;
        if change <= quad.tol {
            return Ok(RindlerOverlaps { length, h, alpha0: a, beta0: b, panels, quadrature_change: change });
        }
        if panels >= quad.max_panels {
            return Err(Error::Quadrature(change));
        }
    }
}

/// Real first- and second-order coefficients of `∘α`, `∘β` in `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapSeries {
    pub alpha1: DMatrix<f64>,
    pub alpha2: DMatrix<f64>,
    pub beta1: DMatrix<f64>,
    pub beta2: DMatrix<f64>,
    /// RMS residual of the per-entry fit (max over `α` and `β`).
    pub fit_residual: DMatrix<f64>,
}

impl OverlapSeries {
    pub fn n_max(&self) -> usize {
        self.alpha1.nrows()
    }

    /// `(∘α(h), ∘β(h))` truncated at second order.
    pub fn evaluate(&self, h: f64) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = self.n_max();
        let a = DMatrix::identity(n, n) + &self.alpha1 * h + &self.alpha2 * (h * h);
        let b = &self.beta1 * h + &self.beta2 * (h * h);
        (a, b)
    }

    /// Enforces the Bogoliubov identities through second order within the
    /// truncation: `∘α⁽¹⁾` antisymmetric, `∘β⁽¹⁾` symmetric, the symmetric part
    /// of `∘α⁽²⁾` equal to `½(∘β⁽¹⁾∘β⁽¹⁾ᵀ − ∘α⁽¹⁾∘α⁽¹⁾ᵀ)` and the antisymmetric
    /// part of `∘β⁽²⁾` equal to `½(∘α⁽¹⁾∘β⁽¹⁾ + ∘β⁽¹⁾∘α⁽¹⁾)`. Without this the
    /// fitted diagonal of `∘α⁽²⁾`, which knows about every mode, is paired with
    /// first-order sums cut at `n_max`, and the QFI picks up an offset of the
    /// size of the neglected tail. Returns the projected series and the largest
    /// entry change.
    pub fn unitary_projection(&self) -> (OverlapSeries, f64) {
        let a1 = (&self.alpha1 - self.alpha1.transpose()) * 0.5;
        let b1 = (&self.beta1 + self.beta1.transpose()) * 0.5;
        let a2 = (&self.alpha2 - self.alpha2.transpose()) * 0.5
            + (&b1 * b1.transpose() - &a1 * a1.transpose()) * 0.5;
        let b2 = (&self.beta2 + self.beta2.transpose()) * 0.5 + (&a1 * &b1 + &b1 * &a1) * 0.5;
        let shift = (&a1 - &self.alpha1)
            .amax()
            .max((&b1 - &self.beta1).amax())
            .max((&a2 - &self.alpha2).amax())
            .max((&b2 - &self.beta2).amax());
        (
            OverlapSeries { alpha1: a1, alpha2: a2, beta1: b1, beta2: b2, fit_residual: self.fit_residual.clone() },
            shift,
        )
    }
}

/// Least-squares fit of `y ≈ Σ_j c_j h^{p_j}`, solved in the scaled variable
/// `t = h / h_max`. Returns the leading coefficient and the RMS residual.
fn fit_leading(hs: &[f64], y: &[f64], powers: &[i32]) -> (f64, f64) {
    let hmax = hs.iter().cloned().fold(0.0, f64::max);
    let a = DMatrix::from_fn(hs.len(), powers.len(), |i, j| (hs[i] / hmax).powi(powers[j]));
    let yv = DVector::from_column_slice(y);
    let sol = a.clone().svd(true, true).solve(&yv, 1e-300).expect("svd with both factors");
    let res = &a * &sol - &yv;
    let rms = (res.norm_squared() / hs.len() as f64).sqrt();
    (sol[0] / hmax.powi(powers[0]), rms)
}

const ODD_POWERS: [i32; 3] = [1, 3, 5];
const EVEN_POWERS: [i32; 3] = [2, 4, 6];

/// Fits the series to exact overlaps sampled on a ladder of `h` values.
/// Odd-parity entries (`m + n` odd) are fitted with `{h, h³, h⁵}` and keep the
/// `h` coefficient; even ones with `{h², h⁴, h⁶}` and keep the `h²` one.
pub fn fit_overlaps(samples: &[RindlerOverlaps], fit_bound: f64) -> Result<OverlapSeries> {
    if samples.len() <= ODD_POWERS.len() {
        return Err(Error::Parameter { name: "ladder length", value: samples.len() as f64 });
    }
    let n = samples[0].n_max();
    let hs: Vec<f64> = samples.iter().map(|s| s.h).collect();
    let mut out = OverlapSeries {
        alpha1: DMatrix::zeros(n, n),
        alpha2: DMatrix::zeros(n, n),
        beta1: DMatrix::zeros(n, n),
        beta2: DMatrix::zeros(n, n),
        fit_residual: DMatrix::zeros(n, n),
    };
    for m in 0..n {
        for j in 0..n {
            let odd = (m + j) % 2 == 1;
            let powers: &[i32] = if odd { &ODD_POWERS } else { &EVEN_POWERS };
            let delta = if m == j { 1.0 } else { 0.0 };
            let ya: Vec<f64> = samples.iter().map(|s| s.alpha0[(m, j)] - delta).collect();
            let yb: Vec<f64> = samples.iter().map(|s| s.beta0[(m, j)]).collect();
            let (ca, ra) = fit_leading(&hs, &ya, powers);
            let (cb, rb) = fit_leading(&hs, &yb, powers);
            let res = ra.max(rb);
            if res > fit_bound {
                return Err(Error::FitResidual { m: m + 1, n: j + 1, residual: res, bound: fit_bound });
            }
            out.fit_residual[(m, j)] = res;
            if odd {
                out.alpha1[(m, j)] = ca;
                out.beta1[(m, j)] = cb;
            } else {
                out.alpha2[(m, j)] = ca;
                out.beta2[(m, j)] = cb;
            }
        }
    }
    Ok(out)
}

pub const DEFAULT_FIT_BOUND: f64 = 1e-9;

/// Samples `rindler_overlaps` on `ladder` and fits the series.
pub fn perturbative_overlaps(length: f64, n_max: usize, ladder: &[f64], quad: &Quadrature) -> Result<OverlapSeries> {
    if ladder.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::BadSteps);
    }
    let samples = ladder
        .iter()
        .map(|&h| rindler_overlaps(length, h, n_max, quad))
        .collect::<Result<Vec<_>>>()?;
    fit_overlaps(&samples, DEFAULT_FIT_BOUND)
}

/// `G_n = exp(2πi n u)` with the phase reduced mod 1 first, so the result is
/// periodic in `u` to rounding.
pub fn phases(n_max: usize, u: f64) -> DVector<C64> {
    DVector::from_fn(n_max, |i, _| {
        let x = (i + 1) as f64 * u;
        let frac = x - x.floor();
        let ph = 2.0 * PI * frac;
        C64::new(ph.cos(), ph.sin())
    })
}

/// Second-order expansion of `A₀⁻¹ G A₀` for `A₀ = (∘α, ∘β)` real:
///
/// ```text
/// α⁽¹⁾ = ∘α⁽¹⁾ᵀG + G∘α⁽¹⁾
/// β⁽¹⁾ = G∘β⁽¹⁾ − ∘β⁽¹⁾ᵀG*
/// α⁽²⁾ = ∘α⁽²⁾ᵀG + G∘α⁽²⁾ + ∘α⁽¹⁾ᵀG∘α⁽¹⁾ − ∘β⁽¹⁾ᵀG*∘β⁽¹⁾
/// β⁽²⁾ = G∘β⁽²⁾ + ∘α⁽¹⁾ᵀG∘β⁽¹⁾ − ∘β⁽²⁾ᵀG* − ∘β⁽¹⁾ᵀG*∘α⁽¹⁾
/// ```
pub fn compose_one_segment(ov: &OverlapSeries, u: f64) -> BogoliubovSeries {
    let n = ov.n_max();
    let g_vec = phases(n, u);
    let g = DMatrix::from_diagonal(&g_vec);
    let gc = g.map(|z| z.conj());
    let c = |m: &DMatrix<f64>| m.map(C64::from);
    let (a1, a2, b1, b2) = (c(&ov.alpha1), c(&ov.alpha2), c(&ov.beta1), c(&ov.beta2));
    let alpha1 = a1.transpose() * &g + &g * &a1;
    let beta1 = &g * &b1 - b1.transpose() * &gc;
    let alpha2 = a2.transpose() * &g + &g * &a2 + a1.transpose() * &g * &a1 - b1.transpose() * &gc * &b1;
    let beta2 = &g * &b2 + a1.transpose() * &g * &b1 - b2.transpose() * &gc - b1.transpose() * &gc * &a1;
    BogoliubovSeries { phases: g_vec, alpha1, alpha2, beta1, beta2 }
}

/// Finite-`h` channel `α = ∘αᵀG∘α − ∘βᵀG*∘β`, `β = ∘αᵀG∘β − ∘βᵀG*∘α`.
pub fn compose_exact(ov: &RindlerOverlaps, u: f64) -> BogoliubovMatrices {
    let n = ov.n_max();
    let g = DMatrix::from_diagonal(&phases(n, u));
    let gc = g.map(|z| z.conj());
    let a = ov.alpha0.map(C64::from);
    let b = ov.beta0.map(C64::from);
    let alpha = a.transpose() * &g * &a - b.transpose() * &gc * &b;
    let beta = a.transpose() * &g * &b - b.transpose() * &gc * &a;
    BogoliubovMatrices { alpha, beta }
}

/// Fitted overlaps for one cavity, ready to compose at any `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct CavityModel {
    pub length: f64,
    /// The fit as obtained from quadrature.
    pub raw: OverlapSeries,
    /// The fit after `unitary_projection`; used for every channel.
    pub series: OverlapSeries,
    pub projection_shift: f64,
}

impl CavityModel {
    pub fn from_raw(length: f64, raw: OverlapSeries) -> Self {
        let (series, projection_shift) = raw.unitary_projection();
        Self { length, raw, series, projection_shift }
    }

    pub fn build(length: f64, n_max: usize, ladder: &[f64], quad: &Quadrature) -> Result<Self> {
        Ok(Self::from_raw(length, perturbative_overlaps(length, n_max, ladder, quad)?))
    }

    pub fn n_max(&self) -> usize {
        self.series.n_max()
    }

    pub fn channel(&self, u: f64) -> BogoliubovSeries {
        compose_one_segment(&self.series, u)
    }

    /// Finite-`h` channel from fresh quadrature.
    pub fn exact_channel(&self, h: f64, u: f64, quad: &Quadrature) -> Result<BogoliubovMatrices> {
        Ok(compose_exact(&rindler_overlaps(self.length, h, self.n_max(), quad)?, u))
    }
}

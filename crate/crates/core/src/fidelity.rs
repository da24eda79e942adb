//! Uhlmann fidelity between one- and two-mode Gaussian states.
//!
//! In this covariance normalization the formulas return the squared overlap
//! `|<ψ|φ>|²` for pure states.

#[allow(unused_imports)] // unused when a dependency pulls in std
use num_traits::Float;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gaussian::omega;

pub const RADICAND_TOL: f64 = 1e-12;
/// Matches `SUB_UNIT_SLACK`: a truncated channel can lift `F` above 1 by as much.
pub const OVERSHOOT_TOL: f64 = 1e-7;
/// `ν² − 1` below this is treated as a pure mode. Both fidelity formulas
/// contain square roots that vanish at purity, so rounding noise of size `ε`
/// in the covariance would otherwise surface as `√ε` in `F`.
pub const PURITY_SNAP: f64 = 1e-12;
/// `ν² − 1` down to `−SUB_UNIT_SLACK` is accepted as pure. Channels cut at a
/// finite mode number are symplectic only up to the truncation, which leaves
/// reduced states a few `1e-9` below the uncertainty bound.
pub const SUB_UNIT_SLACK: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityInputs {
    pub sigma: DMatrix<f64>,
    pub sigma_prime: DMatrix<f64>,
    /// `<X>_σ' − <X>_σ`
    pub delta_x: DVector<f64>,
}

impl FidelityInputs {
    pub fn new(sigma: DMatrix<f64>, sigma_prime: DMatrix<f64>, delta_x: DVector<f64>) -> Result<Self> {
        let d = sigma.nrows();
        for got in [sigma.ncols(), sigma_prime.nrows(), sigma_prime.ncols(), delta_x.len()] {
            if got != d {
                return Err(Error::Dimension { expected: d, got });
            }
        }
        Ok(Self { sigma, sigma_prime, delta_x })
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if self.sigma.nrows() != d {
            return Err(Error::Dimension { expected: d, got: self.sigma.nrows() });
        }
        Ok(())
    }
}

fn sqrt_clamped(x: f64) -> Result<f64> {
    if x >= 0.0 {
        Ok(x.sqrt())
    } else if x >= -RADICAND_TOL {
        Ok(0.0)
    } else {
        Err(Error::NegativeRadicand(x))
    }
}

/// Squared symplectic eigenvalues `ν_i²` from the symmetric matrix
/// `(σ^½ Ω σ^½)ᵀ (σ^½ Ω σ^½)`, whose spectrum is `{ν_i²}` twice over.
fn squared_symplectic(sigma: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = sigma.nrows() / 2;
    let eig = sigma.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::NonPhysical(eig.eigenvalues.min()));
    }
    let root = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.sqrt()))
        * eig.eigenvectors.transpose();
    let k = &root * omega(n) * &root;
    let mut nu2: Vec<f64> = (k.transpose() * &k).symmetric_eigen().eigenvalues.iter().cloned().collect();
    nu2.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    Ok(nu2.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect())
}

/// `Π_i (ν_i² − 1)` with factors within `PURITY_SNAP` of zero set to zero.
/// Equals `det(σ + iΩ)` for one mode and `det(1 + iΩσ)` for two.
fn purity_factors(sigma: &DMatrix<f64>) -> Result<(f64, bool)> {
    let mut prod = 1.0;
    let mut pure = true;
    for v in squared_symplectic(sigma)? {
        let f = v - 1.0;
        if f < -SUB_UNIT_SLACK {
            return Err(Error::SubUnitSymplectic(v.sqrt()));
        }
        if f <= PURITY_SNAP {
            prod = 0.0;
        } else {
            pure = false;
            prod *= f;
        }
    }
    Ok((prod, pure))
}

fn exponent(a: &DMatrix<f64>, dx: &DVector<f64>) -> Result<f64> {
    let inv = a.clone().try_inverse().ok_or(Error::Singular)?;
    Ok(dx.dot(&(inv * dx)))
}

fn finish(f: f64) -> Result<f64> {
    if !f.is_finite() {
        return Err(Error::Denominator(f));
    }
    if f > 1.0 + OVERSHOOT_TOL {
        return Err(Error::FidelityOvershoot(f));
    }
    Ok(f.clamp(0.0, 1.0))
}

/// Pieces of a fidelity evaluation: `F = exp(−q) / D`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityParts {
    pub exponent: f64,
    pub denominator: f64,
}

impl FidelityParts {
    pub fn value(&self) -> Result<f64> {
        finish((-self.exponent).exp() / self.denominator)
    }
}

/// `Δ = det A / 4`, `Λ = det(σ+iΩ) det(σ'+iΩ) / 4`, `D = √(Λ+Δ) − √Λ`.
/// `det(σ+iΩ) = ν² − 1` is taken from the symplectic eigenvalue.
pub fn fidelity_one_mode_parts(inp: &FidelityInputs) -> Result<FidelityParts> {
    inp.check_dim(2)?;
    let a = &inp.sigma + &inp.sigma_prime;
    let delta = a.determinant() / 4.0;
    let lambda = purity_factors(&inp.sigma)?.0 * purity_factors(&inp.sigma_prime)?.0 / 4.0;
    let sl = sqrt_clamped(lambda)?;
    let den = sqrt_clamped(lambda + delta)? - sl;
    if !(den > 0.0) {
        return Err(Error::Denominator(den));
    }
    Ok(FidelityParts { exponent: exponent(&a, &inp.delta_x)?, denominator: den })
}

pub fn fidelity_one_mode(inp: &FidelityInputs) -> Result<f64> {
    fidelity_one_mode_parts(inp)?.value()
}

/// `Γ = det(iΩσ iΩσ' + 1)/16`, `Λ = det(iΩσ + 1) det(iΩσ' + 1)/16`,
/// `Δ = det A / 16`, `D = √Λ + √Γ − √((√Λ + √Γ)² − Δ)`.
/// `det(iΩσ + 1) = Π(1 − ν_i²)` is taken from the symplectic eigenvalues.
pub fn fidelity_two_mode_parts(inp: &FidelityInputs) -> Result<FidelityParts> {
    inp.check_dim(4)?;
    let a = &inp.sigma + &inp.sigma_prime;
    let om = omega(2);
    // (iΩσ)(iΩσ') = −ΩσΩσ'
    let g = DMatrix::<f64>::identity(4, 4) - &om * &inp.sigma * &om * &inp.sigma_prime;
    let gamma = g.determinant() / 16.0;
    let (p, pure) = purity_factors(&inp.sigma)?;
    let (q, pure_prime) = purity_factors(&inp.sigma_prime)?;
    // (1 − ν1²)(1 − ν2²) = (ν1² − 1)(ν2² − 1)
    let lambda = p * q / 16.0;
    let delta = a.determinant() / 16.0;
    let den = if pure || pure_prime {
        // Λ = 0 and Γ = Δ; the general form would take √ of pure rounding noise
        sqrt_clamped(delta)?
    } else {
        let s = sqrt_clamped(lambda)? + sqrt_clamped(gamma)?;
        // vanishes analytically whenever each state has a pure mode matched
        // against the other's (e.g. pure⊕mixed vs mixed⊕pure)
        let rad = s * s - delta;
        let rad = if rad.abs() <= PURITY_SNAP * s * s { 0.0 } else { rad };
        s - sqrt_clamped(rad)?
    };
    if !(den > 0.0) {
        return Err(Error::Denominator(den));
    }
    Ok(FidelityParts { exponent: exponent(&a, &inp.delta_x)?, denominator: den })
}

pub fn fidelity_two_mode(inp: &FidelityInputs) -> Result<f64> {
    fidelity_two_mode_parts(inp)?.value()
}

/// Dispatches on the covariance dimension.
pub fn fidelity_parts(inp: &FidelityInputs) -> Result<FidelityParts> {
    match inp.sigma.nrows() {
        2 => fidelity_one_mode_parts(inp),
        4 => fidelity_two_mode_parts(inp),
        d => Err(Error::Dimension { expected: 4, got: d }),
    }
}

pub fn fidelity(inp: &FidelityInputs) -> Result<f64> {
    fidelity_parts(inp)?.value()
}

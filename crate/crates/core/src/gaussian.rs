//! Multimode Gaussian states.
//!
//! Quadratures are interleaved as `(x1, p1, x2, p2, ...)` and the covariance
//! is `Σ_ij = <X_i X_j + X_j X_i> - 2 <X_i><X_j>`, so the vacuum has `Σ = 1`.
//! Mode indices in the public API are 1-based.

#[allow(unused_imports)] // unused when a dependency pulls in std
use num_traits::Float;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub const SYMMETRY_TOL: f64 = 1e-12;
pub const PHYSICALITY_TOL: f64 = 1e-10;
pub const SYMPLECTIC_TOL: f64 = 1e-9;
pub const PAIRING_TOL: f64 = 1e-8;

/// Block-diagonal symplectic form with `Ω_k = [[0, -1], [1, 0]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    pub n_modes: usize,
    pub matrix: DMatrix<f64>,
}

impl SymplecticForm {
    pub fn new(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::NoModes);
        }
        Ok(Self { n_modes, matrix: omega(n_modes) })
    }
}

pub fn omega(n_modes: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        m[(2 * k, 2 * k + 1)] = -1.0;
        m[(2 * k + 1, 2 * k)] = 1.0;
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    first_moments: DVector<f64>,
    covariance: DMatrix<f64>,
}

impl GaussianState {
    /// Rejects covariances that are asymmetric beyond `SYMMETRY_TOL`, then
    /// stores the exactly symmetrized matrix. Physicality is checked separately
    /// because perturbative states may be unphysical at high order.
    pub fn new(first_moments: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let dim = covariance.nrows();
        if dim == 0 || dim % 2 != 0 || covariance.ncols() != dim {
            return Err(Error::Dimension { expected: 2 * (dim / 2).max(1), got: dim });
        }
        if first_moments.len() != dim {
            return Err(Error::Dimension { expected: dim, got: first_moments.len() });
        }
        let asym = (&covariance - covariance.transpose()).amax();
        if !(asym <= SYMMETRY_TOL) {
            return Err(Error::Asymmetric(asym));
        }
        let covariance = (&covariance + covariance.transpose()) * 0.5;
        Ok(Self { first_moments, covariance })
    }

    pub fn n_modes(&self) -> usize {
        self.covariance.nrows() / 2
    }

    pub fn first_moments(&self) -> &DVector<f64> {
        &self.first_moments
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    /// Smallest eigenvalue of the Hermitian matrix `Σ + iΩ`.
    pub fn min_physical_eigenvalue(&self) -> f64 {
        let n = self.covariance.nrows();
        let om = omega(n / 2);
        // real embedding of A + iB is [[A, -B], [B, A]]
        let mut emb = DMatrix::zeros(2 * n, 2 * n);
        emb.view_mut((0, 0), (n, n)).copy_from(&self.covariance);
        emb.view_mut((n, n), (n, n)).copy_from(&self.covariance);
        emb.view_mut((0, n), (n, n)).copy_from(&(-&om));
        emb.view_mut((n, 0), (n, n)).copy_from(&om);
        emb.symmetric_eigen().eigenvalues.min()
    }

    pub fn is_physical(&self) -> bool {
        self.min_physical_eigenvalue() >= -PHYSICALITY_TOL
    }

    pub fn check_physical(&self) -> Result<()> {
        let m = self.min_physical_eigenvalue();
        if m >= -PHYSICALITY_TOL {
            Ok(())
        } else {
            Err(Error::NonPhysical(m))
        }
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        (self.covariance.determinant() - 1.0).abs() <= tol
    }
}

pub fn vacuum_state(n_modes: usize) -> Result<GaussianState> {
    if n_modes == 0 {
        return Err(Error::NoModes);
    }
    GaussianState::new(DVector::zeros(2 * n_modes), DMatrix::identity(2 * n_modes, 2 * n_modes))
}

fn check_mode(k: usize, n_modes: usize) -> Result<usize> {
    if k == 0 || k > n_modes {
        Err(Error::ModeOutOfRange { mode: k, n_modes })
    } else {
        Ok(k - 1)
    }
}

/// `S(r) D(δ)|0>` on mode `k`: covariance block `diag(e^r, e^-r)`, moments `(√2 δ, 0)`.
pub fn squeezed_displaced_state(n_modes: usize, k: usize, r: f64, delta: f64) -> Result<GaussianState> {
    let mut s = vacuum_state(n_modes)?;
    let i = check_mode(k, n_modes)?;
    s.covariance[(2 * i, 2 * i)] = r.exp();
    s.covariance[(2 * i + 1, 2 * i + 1)] = (-r).exp();
    s.first_moments[2 * i] = core::f64::consts::SQRT_2 * delta;
    Ok(s)
}

/// Two modes each squeezed and displaced by the same `(r, δ)`.
pub fn product_squeezed_displaced_state(
    n_modes: usize,
    k: usize,
    k_prime: usize,
    r: f64,
    delta: f64,
) -> Result<GaussianState> {
    if k == k_prime {
        return Err(Error::DuplicateMode(k));
    }
    let mut s = squeezed_displaced_state(n_modes, k, r, delta)?;
    let j = check_mode(k_prime, n_modes)?;
    s.covariance[(2 * j, 2 * j)] = r.exp();
    s.covariance[(2 * j + 1, 2 * j + 1)] = (-r).exp();
    s.first_moments[2 * j] = core::f64::consts::SQRT_2 * delta;
    Ok(s)
}

/// Diagonal blocks `cosh r · 1`, off-diagonal block `sinh r · σ_z`.
pub fn two_mode_squeezed_state(n_modes: usize, k: usize, k_prime: usize, r: f64) -> Result<GaussianState> {
    if k == k_prime {
        return Err(Error::DuplicateMode(k));
    }
    let i = check_mode(k, n_modes)?;
    let j = check_mode(k_prime, n_modes)?;
    let mut s = vacuum_state(n_modes)?;
    let (c, sh) = (r.cosh(), r.sinh());
    for a in 0..2 {
        let sign = if a == 0 { 1.0 } else { -1.0 };
        s.covariance[(2 * i + a, 2 * i + a)] = c;
        s.covariance[(2 * j + a, 2 * j + a)] = c;
        s.covariance[(2 * i + a, 2 * j + a)] = sign * sh;
        s.covariance[(2 * j + a, 2 * i + a)] = sign * sh;
    }
    Ok(s)
}

/// Symplectic spectrum from the moduli of the eigenvalues of `iΩσ`, which come
/// in `±ν` pairs. Sorted descending. No lower-bound check.
pub fn symplectic_spectrum(covariance: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = covariance.nrows() / 2;
    let m = omega(n) * covariance;
    let mut moduli: Vec<f64> = m.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
    let mut out = Vec::with_capacity(n);
    for pair in moduli.chunks(2) {
        let gap = (pair[0] - pair[1]).abs() / pair[0].abs().max(1.0);
        if gap > PAIRING_TOL {
            return Err(Error::Unpaired(gap));
        }
        out.push(0.5 * (pair[0] + pair[1]));
    }
    Ok(out)
}

/// Symplectic eigenvalues, flagging any below `1 - SYMPLECTIC_TOL`.
pub fn symplectic_eigenvalues(state: &GaussianState) -> Result<Vec<f64>> {
    let nu = symplectic_spectrum(state.covariance())?;
    match nu.last() {
        Some(&min) if min < 1.0 - SYMPLECTIC_TOL => Err(Error::SubUnitSymplectic(min)),
        _ => Ok(nu),
    }
}

fn quadrature_indices(modes: &[usize], n_modes: usize) -> Result<Vec<usize>> {
    let mut idx = Vec::with_capacity(2 * modes.len());
    for (p, &k) in modes.iter().enumerate() {
        if modes[..p].contains(&k) {
            return Err(Error::DuplicateMode(k));
        }
        let i = check_mode(k, n_modes)?;
        idx.push(2 * i);
        idx.push(2 * i + 1);
    }
    Ok(idx)
}

/// Marginal on `modes`, in the given order.
pub fn reduce(state: &GaussianState, modes: &[usize]) -> Result<GaussianState> {
    if modes.is_empty() {
        return Err(Error::NoModes);
    }
    let idx = quadrature_indices(modes, state.n_modes())?;
    let cov = state.covariance.select_rows(&idx).select_columns(&idx);
    let x = state.first_moments.select_rows(&idx);
    GaussianState::new(x, cov)
}

/// Places `local` on `modes` of an `n_modes` field whose other modes are vacuum.
pub fn embed(local: &GaussianState, modes: &[usize], n_modes: usize) -> Result<GaussianState> {
    if modes.len() != local.n_modes() {
        return Err(Error::Dimension { expected: local.n_modes(), got: modes.len() });
    }
    let idx = quadrature_indices(modes, n_modes)?;
    let mut s = vacuum_state(n_modes)?;
    for (a, &ia) in idx.iter().enumerate() {
        s.first_moments[ia] = local.first_moments[a];
        for (b, &ib) in idx.iter().enumerate() {
            s.covariance[(ia, ib)] = local.covariance[(a, b)];
        }
    }
    Ok(s)
}

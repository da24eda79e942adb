//! Bogoliubov coefficient matrices, their perturbative series and the
//! phase-space (symplectic) representation.
//!
//! Convention: row index = output mode. The new annihilation operators are
//! `ã_m = Σ_n (α*_mn a_n − β*_mn a_n†)`, the symplectic matrix has blocks
//! `S_mn = M(α_mn, β_mn)` and a channel acts as `X ↦ S X`, `Σ ↦ S Σ Sᵀ`.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector, Matrix2, Matrix4};

use crate::error::{Error, Result};
use crate::gaussian::{omega, GaussianState};
use crate::C64;

/// The 2×2 block `[[Re(α−β), Im(α+β)], [−Im(α−β), Re(α+β)]]`.
pub fn block_from_coefficients(alpha: C64, beta: C64) -> Matrix2<f64> {
    let d = alpha - beta;
    let s = alpha + beta;
    Matrix2::new(d.re, s.im, -d.im, s.re)
}

fn assemble_rows(alpha: &DMatrix<C64>, beta: &DMatrix<C64>, rows: &[usize]) -> DMatrix<f64> {
    let n = alpha.ncols();
    let mut s = DMatrix::zeros(2 * rows.len(), 2 * n);
    for (p, &m) in rows.iter().enumerate() {
        for j in 0..n {
            let b = block_from_coefficients(alpha[(m, j)], beta[(m, j)]);
            s.view_mut((2 * p, 2 * j), (2, 2)).copy_from(&b);
        }
    }
    s
}

fn assemble(alpha: &DMatrix<C64>, beta: &DMatrix<C64>) -> DMatrix<f64> {
    let rows: Vec<usize> = (0..alpha.nrows()).collect();
    assemble_rows(alpha, beta, &rows)
}

fn mode_rows(modes: &[usize], n: usize) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(modes.len());
    for (p, &k) in modes.iter().enumerate() {
        if k == 0 || k > n {
            return Err(Error::ModeOutOfRange { mode: k, n_modes: n });
        }
        if modes[..p].contains(&k) {
            return Err(Error::DuplicateMode(k));
        }
        out.push(k - 1);
    }
    Ok(out)
}

fn quadrature_rows(modes: &[usize]) -> Vec<usize> {
    modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect()
}

fn check_square(m: &DMatrix<C64>, n: usize) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::Dimension { expected: n, got: m.nrows().max(m.ncols()) });
    }
    Ok(())
}

/// Truncated coefficient matrices `α_mn`, `β_mn`.
#[derive(Debug, Clone, PartialEq)]
pub struct BogoliubovMatrices {
    pub alpha: DMatrix<C64>,
    pub beta: DMatrix<C64>,
}

impl BogoliubovMatrices {
    pub fn new(alpha: DMatrix<C64>, beta: DMatrix<C64>) -> Result<Self> {
        let n = alpha.nrows();
        if n == 0 {
            return Err(Error::NoModes);
        }
        check_square(&alpha, n)?;
        check_square(&beta, n)?;
        Ok(Self { alpha, beta })
    }

    pub fn identity(n: usize) -> Self {
        Self { alpha: DMatrix::identity(n, n), beta: DMatrix::zeros(n, n) }
    }

    pub fn n_max(&self) -> usize {
        self.alpha.nrows()
    }

    /// `max(‖αα† − ββ† − 1‖_max, ‖αβᵀ − (αβᵀ)ᵀ‖_max)`.
    pub fn identity_residual(&self) -> f64 {
        let n = self.n_max();
        let u = &self.alpha * self.alpha.adjoint() - &self.beta * self.beta.adjoint()
            - DMatrix::<C64>::identity(n, n);
        let ab = &self.alpha * self.beta.transpose();
        let sym = &ab - ab.transpose();
        max_modulus(&u).max(max_modulus(&sym))
    }

    pub fn symplectic(&self) -> SymplecticMatrix {
        SymplecticMatrix { matrix: assemble(&self.alpha, &self.beta) }
    }
}

pub(crate) fn max_modulus(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Assembles `S` after checking the Bogoliubov identities against `bound`.
pub fn symplectic_from_bogoliubov(b: &BogoliubovMatrices, bound: f64) -> Result<SymplecticMatrix> {
    let residual = b.identity_residual();
    if !(residual <= bound) {
        return Err(Error::ChannelRejected { residual, bound });
    }
    Ok(b.symplectic())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    pub matrix: DMatrix<f64>,
}

impl SymplecticMatrix {
    pub fn identity(n_modes: usize) -> Self {
        Self { matrix: DMatrix::identity(2 * n_modes, 2 * n_modes) }
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    /// `‖SΩSᵀ − Ω‖_max` over the whole matrix.
    pub fn residual(&self) -> f64 {
        let om = omega(self.n_modes());
        (&self.matrix * &om * self.matrix.transpose() - om).amax()
    }

    /// The same residual restricted to the rows and columns of `modes`.
    pub fn residual_on(&self, modes: &[usize]) -> Result<f64> {
        let rows = quadrature_rows(&mode_rows(modes, self.n_modes())?);
        let r = self.matrix.select_rows(&rows);
        let om = omega(self.n_modes());
        Ok((&r * om * r.transpose() - omega(modes.len())).amax())
    }
}

pub fn apply_channel(s: &SymplecticMatrix, state: &GaussianState) -> Result<GaussianState> {
    let dim = state.covariance().nrows();
    if s.matrix.nrows() != dim {
        return Err(Error::Dimension { expected: s.matrix.nrows(), got: dim });
    }
    let x = &s.matrix * state.first_moments();
    let c = &s.matrix * state.covariance() * s.matrix.transpose();
    GaussianState::new(x, (&c + c.transpose()) * 0.5)
}

/// `α(θ) = diag(G) + α⁽¹⁾θ + α⁽²⁾θ²`, `β(θ) = β⁽¹⁾θ + β⁽²⁾θ²`.
#[derive(Debug, Clone, PartialEq)]
pub struct BogoliubovSeries {
    pub phases: DVector<C64>,
    pub alpha1: DMatrix<C64>,
    pub alpha2: DMatrix<C64>,
    pub beta1: DMatrix<C64>,
    pub beta2: DMatrix<C64>,
}

pub const PHASE_TOL: f64 = 1e-12;

impl BogoliubovSeries {
    pub fn new(
        phases: DVector<C64>,
        alpha1: DMatrix<C64>,
        alpha2: DMatrix<C64>,
        beta1: DMatrix<C64>,
        beta2: DMatrix<C64>,
    ) -> Result<Self> {
        let n = phases.len();
        if n == 0 {
            return Err(Error::NoModes);
        }
        for (i, g) in phases.iter().enumerate() {
            if (g.norm() - 1.0).abs() > PHASE_TOL {
                return Err(Error::PhaseModulus { index: i + 1, modulus: g.norm() });
            }
        }
        for m in [&alpha1, &alpha2, &beta1, &beta2] {
            check_square(m, n)?;
        }
        Ok(Self { phases, alpha1, alpha2, beta1, beta2 })
    }

    /// The trivial channel: all phases 1, all corrections zero.
    pub fn null(n: usize) -> Self {
        let z = DMatrix::zeros(n, n);
        Self {
            phases: DVector::from_element(n, C64::new(1.0, 0.0)),
            alpha1: z.clone(),
            alpha2: z.clone(),
            beta1: z.clone(),
            beta2: z,
        }
    }

    pub fn n_max(&self) -> usize {
        self.phases.len()
    }

    pub fn alpha0(&self) -> DMatrix<C64> {
        DMatrix::from_diagonal(&self.phases)
    }

    pub fn evaluate(&self, theta: f64) -> BogoliubovMatrices {
        let t2 = theta * theta;
        let alpha = self.alpha0() + &self.alpha1 * C64::from(theta) + &self.alpha2 * C64::from(t2);
        let beta = &self.beta1 * C64::from(theta) + &self.beta2 * C64::from(t2);
        BogoliubovMatrices { alpha, beta }
    }

    /// Rows of `S⁽⁰⁾, S⁽¹⁾, S⁽²⁾` belonging to the 1-based `modes`.
    pub fn order_rows(&self, modes: &[usize]) -> Result<[DMatrix<f64>; 3]> {
        let rows = mode_rows(modes, self.n_max())?;
        let z = DMatrix::zeros(self.n_max(), self.n_max());
        Ok([
            assemble_rows(&self.alpha0(), &z, &rows),
            assemble_rows(&self.alpha1, &self.beta1, &rows),
            assemble_rows(&self.alpha2, &self.beta2, &rows),
        ])
    }

    /// Full `S⁽⁰⁾, S⁽¹⁾, S⁽²⁾`.
    pub fn order_matrices(&self) -> [DMatrix<f64>; 3] {
        let all: Vec<usize> = (1..=self.n_max()).collect();
        self.order_rows(&all).expect("all modes are in range")
    }

    /// Block `M_mn(θ)` for 1-based `m`, `n`.
    pub fn block(&self, m: usize, n: usize, theta: f64) -> Matrix2<f64> {
        let (i, j) = (m - 1, n - 1);
        let a0 = if i == j { self.phases[i] } else { C64::new(0.0, 0.0) };
        let t = C64::from(theta);
        let a = a0 + self.alpha1[(i, j)] * t + self.alpha2[(i, j)] * t * t;
        let b = self.beta1[(i, j)] * t + self.beta2[(i, j)] * t * t;
        block_from_coefficients(a, b)
    }
}

pub fn evaluate_series(series: &BogoliubovSeries, theta: f64) -> BogoliubovMatrices {
    series.evaluate(theta)
}

/// `σ_k(θ) = M_kk σ0 M_kkᵀ + Σ_{n≠k} M_kn M_knᵀ`.
pub fn reduced_covariance_single(
    series: &BogoliubovSeries,
    k: usize,
    sigma0: &Matrix2<f64>,
    theta: f64,
) -> Result<Matrix2<f64>> {
    mode_rows(&[k], series.n_max())?;
    let mkk = series.block(k, k, theta);
    let mut out = mkk * sigma0 * mkk.transpose();
    for n in (1..=series.n_max()).filter(|&n| n != k) {
        let m = series.block(k, n, theta);
        out += m * m.transpose();
    }
    Ok(out)
}

/// Two-mode reduced covariance for an input with blocks `ψ_k`, `ψ_k'`, `φ_kk'`
/// on modes `k`, `k'` and vacuum elsewhere. Block `(i, j)` is
/// `Σ_{a,b∈{k,k'}} M_ia σ0_ab M_jbᵀ + Σ_{n∉{k,k'}} M_in M_jnᵀ`.
pub fn transformed_two_mode_blocks(
    series: &BogoliubovSeries,
    k: usize,
    k_prime: usize,
    psi_k: &Matrix2<f64>,
    psi_kp: &Matrix2<f64>,
    phi_kkp: &Matrix2<f64>,
    theta: f64,
) -> Result<Matrix4<f64>> {
    if k == k_prime {
        return Err(Error::DuplicateMode(k));
    }
    mode_rows(&[k, k_prime], series.n_max())?;
    let probe = [k, k_prime];
    let sigma0 = |a: usize, b: usize| -> Matrix2<f64> {
        match (a, b) {
            (0, 0) => *psi_k,
            (1, 1) => *psi_kp,
            (0, 1) => *phi_kkp,
            _ => phi_kkp.transpose(),
        }
    };
    let mut out = Matrix4::zeros();
    for (p, &i) in probe.iter().enumerate() {
        for (q, &j) in probe.iter().enumerate() {
            let mut c = Matrix2::zeros();
            for (a, &ma) in probe.iter().enumerate() {
                for (b, &mb) in probe.iter().enumerate() {
                    c += series.block(i, ma, theta) * sigma0(a, b) * series.block(j, mb, theta).transpose();
                }
            }
            for n in (1..=series.n_max()).filter(|n| !probe.contains(n)) {
                c += series.block(i, n, theta) * series.block(j, n, theta).transpose();
            }
            out.fixed_view_mut::<2, 2>(2 * p, 2 * q).copy_from(&c);
        }
    }
    Ok(out)
}

/// Order-by-order reduced covariance and first moments on the probed modes.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSeries {
    pub sigma: [DMatrix<f64>; 3],
    pub moments: [DVector<f64>; 2],
}

impl CovarianceSeries {
    pub fn at(&self, theta: f64) -> (DVector<f64>, DMatrix<f64>) {
        let s = &self.sigma[0] + &self.sigma[1] * theta + &self.sigma[2] * (theta * theta);
        let x = &self.moments[0] + &self.moments[1] * theta;
        (x, s)
    }
}

/// Collects powers of θ in `R(θ) Σ R(θ)ᵀ` where `R` are the rows of `S(θ)` for
/// the probed `modes`; `input` lives on all `n_max` modes.
pub fn covariance_series(
    series: &BogoliubovSeries,
    input: &GaussianState,
    modes: &[usize],
) -> Result<CovarianceSeries> {
    if input.n_modes() != series.n_max() {
        return Err(Error::Dimension { expected: series.n_max(), got: input.n_modes() });
    }
    let [r0, r1, r2] = series.order_rows(modes)?;
    let sig = input.covariance();
    let a0 = &r0 * sig;
    let a1 = &r1 * sig;
    let s0 = &a0 * r0.transpose();
    let s1 = &a1 * r0.transpose() + &a0 * r1.transpose();
    let s2 = &r2 * sig * r0.transpose() + &a1 * r1.transpose() + &a0 * r2.transpose();
    let sym = |m: DMatrix<f64>| (&m + m.transpose()) * 0.5;
    let x = input.first_moments();
    Ok(CovarianceSeries { sigma: [sym(s0), sym(s1), sym(s2)], moments: [&r0 * x, &r1 * x] })
}

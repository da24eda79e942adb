#![allow(dead_code)]

use fieldqfi_core::bogoliubov::{BogoliubovMatrices, BogoliubovSeries};
use fieldqfi_core::gaussian::GaussianState;
use fieldqfi_core::C64;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;
pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    ChaCha8Rng::seed_from_u64(seed)
}

fn complex(rng: &mut Rng8) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Haar-ish unitary from the QR factor of a random complex matrix.
pub fn random_unitary(rng: &mut Rng8, n: usize) -> DMatrix<C64> {
    let m = DMatrix::from_fn(n, n, |_, _| complex(rng));
    m.qr().q()
}

/// `O₁ · ⊕ diag(e^{-r_i}, e^{r_i}) · O₂` with `O` passive.
pub fn random_symplectic(rng: &mut Rng8, n: usize, max_r: f64) -> DMatrix<f64> {
    let o1 = BogoliubovMatrices::new(random_unitary(rng, n), DMatrix::zeros(n, n)).unwrap().symplectic().matrix;
    let o2 = BogoliubovMatrices::new(random_unitary(rng, n), DMatrix::zeros(n, n)).unwrap().symplectic().matrix;
    let d = DVector::from_fn(2 * n, |i, _| {
        let r: f64 = if i % 2 == 0 { rng.random_range(-max_r..max_r) } else { 0.0 };
        r
    });
    let mut diag = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        let r = d[2 * i];
        diag[(2 * i, 2 * i)] = (-r).exp();
        diag[(2 * i + 1, 2 * i + 1)] = r.exp();
    }
    o1 * diag * o2
}

/// `S · ⊕ ν_i 𝟙 · Sᵀ` with `ν_i = 1` when `pure`.
pub fn random_state(rng: &mut Rng8, n: usize, pure: bool) -> GaussianState {
    let s = random_symplectic(rng, n, 1.0);
    let mut w = DMatrix::identity(2 * n, 2 * n);
    if !pure {
        for i in 0..n {
            let nu = 1.0 + rng.random_range(0.0..2.0);
            w[(2 * i, 2 * i)] = nu;
            w[(2 * i + 1, 2 * i + 1)] = nu;
        }
    }
    let c = &s * w * s.transpose();
    let x = DVector::from_fn(2 * n, |_, _| rng.random_range(-1.0..1.0));
    GaussianState::new(x, (&c + c.transpose()) * 0.5).unwrap()
}

/// Series with arbitrary complex coefficients and random unit phases.
pub fn random_series(rng: &mut Rng8, n: usize) -> BogoliubovSeries {
    let mut m = || DMatrix::from_fn(n, n, |_, _| complex(rng));
    let (a1, a2, b1, b2) = (m(), m(), m(), m());
    let g = DVector::from_fn(n, |_, _| C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)));
    BogoliubovSeries::new(g, a1, a2, b1, b2).unwrap()
}

/// log-log least-squares slope of `y` against `x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}

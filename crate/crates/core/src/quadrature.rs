//! Gauss–Legendre rules.

#[allow(unused_imports)] // unused when a dependency pulls in std
use num_traits::Float;
use alloc::vec::Vec;

/// Nodes and weights of the `n`-point rule on `[-1, 1]`, by Newton iteration
/// on `P_n` from the Chebyshev-like initial guesses.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = alloc::vec![0.0; n];
    let mut w = alloc::vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut z = (core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite rule on `[a, b]` with `panels` equal panels of the `n`-point rule.
pub fn composite(a: f64, b: f64, panels: usize, rule: &(Vec<f64>, Vec<f64>)) -> (Vec<f64>, Vec<f64>) {
    let (xs, ws) = rule;
    let width = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * xs.len());
    let mut weights = Vec::with_capacity(panels * xs.len());
    for p in 0..panels {
        let lo = a + width * p as f64;
        let mid = lo + 0.5 * width;
        for (x, w) in xs.iter().zip(ws) {
            nodes.push(mid + 0.5 * width * x);
            weights.push(0.5 * width * w);
        }
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn integrates_polynomials_exactly() {
        for n in [1, 2, 5, 16, 64] {
            let (x, w) = gauss_legendre(n);
            assert_abs_diff_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-13);
            let deg = 2 * n - 1;
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert_abs_diff_eq!(got, exact, epsilon = 1e-13);
        }
    }

    #[test]
    fn composite_sine() {
        let rule = gauss_legendre(16);
        let (x, w) = composite(0.0, core::f64::consts::PI, 8, &rule);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.sin()).sum();
        assert_abs_diff_eq!(s, 2.0, epsilon = 1e-14);
    }
}

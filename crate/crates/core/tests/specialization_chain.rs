mod common;

use common::*;
use fieldqfi_core::bogoliubov::{transformed_two_mode_blocks, BogoliubovSeries};
use fieldqfi_core::qfi::*;
use nalgebra::{DMatrix, Matrix2, Matrix4, Matrix5, Vector5};

/// θ-orders 0..2 of an exactly quartic matrix function, by interpolation on
/// five nodes. Independent of the order-collecting code in the library.
fn orders(f: impl Fn(f64) -> Matrix4<f64>) -> [DMatrix<f64>; 3] {
    let nodes = [-0.2, -0.1, 0.0, 0.1, 0.2];
    let v = Matrix5::from_fn(|i, j| f64::powi(nodes[i], j as i32));
    let lu = v.lu();
    let samples: Vec<Matrix4<f64>> = nodes.iter().map(|&t| f(t)).collect();
    let mut out = [DMatrix::zeros(4, 4), DMatrix::zeros(4, 4), DMatrix::zeros(4, 4)];
    for a in 0..4 {
        for b in 0..4 {
            let rhs = Vector5::from_fn(|i, _| samples[i][(a, b)]);
            let c = lu.solve(&rhs).unwrap();
            for (o, m) in out.iter_mut().enumerate() {
                m[(a, b)] = c[o];
            }
        }
    }
    out
}

fn product_orders(s: &BogoliubovSeries, k: usize, kp: usize, r: f64) -> [DMatrix<f64>; 3] {
    let psi = Matrix2::new(r.exp(), 0.0, 0.0, (-r).exp());
    orders(|t| transformed_two_mode_blocks(s, k, kp, &psi, &psi, &Matrix2::zeros(), t).unwrap())
}

fn tms_orders(s: &BogoliubovSeries, k: usize, kp: usize, r: f64) -> [DMatrix<f64>; 3] {
    let psi = Matrix2::identity() * r.cosh();
    let phi = Matrix2::new(r.sinh(), 0.0, 0.0, -r.sinh());
    orders(|t| transformed_two_mode_blocks(s, k, kp, &psi, &psi, &phi, t).unwrap())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

#[test]
fn product_closed_form_matches_general_trace_path() {
    let mut g = rng(20);
    for i in 0..50 {
        let s = random_series(&mut g, 5);
        let (k, kp, r) = (1 + i % 3, 4 + i % 2, 0.2 + 0.03 * i as f64);
        let [s0, s1, s2] = product_orders(&s, k, kp, r);
        let general = c2_two_mode_general(&s0, &s1, &s2).unwrap();
        let closed = c2_two_mode_product(&s, k, kp, r).unwrap();
        assert!(rel(closed, general) <= 1e-9, "case {i}: {closed} vs {general}");
    }
}

#[test]
fn two_mode_squeezed_wrapper_matches_general_trace_path() {
    let mut g = rng(21);
    for i in 0..50 {
        let s = random_series(&mut g, 5);
        let (k, kp, r) = (2, 1 + 2 * (i % 2) + 2, 0.1 + 0.04 * i as f64);
        let [s0, s1, s2] = tms_orders(&s, k, kp, r);
        let general = c2_two_mode_general(&s0, &s1, &s2).unwrap();
        let q = qfi_two_mode_squeezed(&s, k, kp, r).unwrap();
        assert_eq!(q.e2, 0.0);
        assert!(rel(q.c2, general) <= 1e-9, "case {i}: {} vs {general}", q.c2);
    }
}

#[test]
fn single_mode_closed_form_matches_entrywise_path() {
    let mut g = rng(22);
    for i in 0..50 {
        let s = random_series(&mut g, 4);
        let p = c2_single_mode_paths(&s, 1 + i % 4, 0.05 * i as f64).unwrap();
        assert!(p.explicit_gap() <= 1e-9 * p.primary.abs().max(1.0), "{p:?}");
    }
}

#[test]
fn displacement_terms_match_master_path() {
    let mut g = rng(23);
    for i in 0..50 {
        let s = random_series(&mut g, 4);
        let (r, d) = (0.04 * i as f64, 0.3 + 0.02 * i as f64);
        let single = qfi_perturbative(&s, &ProbeState::SingleSqueezedDisplaced { k: 2, r, delta: d }).unwrap();
        assert!(rel(e2_single_mode(&s, 2, r, d).unwrap(), single.e2) <= 1e-9);
        let pair = qfi_perturbative(&s, &ProbeState::ProductSqueezedDisplaced { k: 1, k_prime: 3, r, delta: d }).unwrap();
        assert!(rel(e2_two_mode(&s, 1, 3, r, d).unwrap(), pair.e2) <= 1e-9);
        assert_eq!(e2_single_mode(&s, 2, r, 0.0).unwrap(), 0.0);
        assert_eq!(e2_two_mode(&s, 1, 3, r, 0.0).unwrap(), 0.0);
    }
}

#[test]
fn general_trace_form_agrees_with_entrywise_single_mode_form() {
    let mut g = rng(24);
    for _ in 0..20 {
        let s = random_series(&mut g, 3);
        let input = ProbeState::SingleSqueezedDisplaced { k: 1, r: 0.6, delta: 0.0 };
        let cs = series_family(&s, &input).unwrap();
        let a = c2_trace(&cs.sigma[0], &cs.sigma[1], &cs.sigma[2]).unwrap();
        let b = c2_single_entrywise(&cs.sigma[0], &cs.sigma[1], &cs.sigma[2]);
        assert!(rel(a, b) <= 1e-12, "{a} {b}");
    }
}

#[test]
fn commonly_quoted_forms_disagree_with_master_path() {
    // recorded rather than trusted: the transcriptions differ at O(1)
    let mut g = rng(25);
    let s = random_series(&mut g, 5);
    let p = c2_single_mode_paths(&s, 2, 0.7).unwrap();
    assert!(p.printed_gap() > 1e-3);
    let printed = c2_two_mode_product_printed(&s, 1, 2, 0.7).unwrap();
    assert!((printed - c2_two_mode_product(&s, 1, 2, 0.7).unwrap()).abs() > 1e-3);
    let e = e2_single_mode(&s, 1, 0.7, 1.0).unwrap();
    assert!((e2_single_mode_printed(&s, 1, 0.7, 1.0).unwrap() - e).abs() > 1e-3);
}

//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use pvd_core::linalg::{DenseMatrix, DiagonalInnerProduct, InnerProductPair};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> DenseMatrix {
    DenseMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..=1.0))
}

pub fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> DiagonalInnerProduct {
    DiagonalInnerProduct::new((0..n).map(|_| rng.gen_range(0.5..=2.0)).collect()).unwrap()
}

/// Symmetric 0/1 adjacency of `G(n, 1/2)` without loops.
pub fn gnp_half(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
    let mut a = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.5) {
                a.set(i, j, 1.0);
                a.set(j, i, 1.0);
            }
        }
    }
    a
}

pub fn subsets(n: usize) -> Vec<Vec<usize>> {
    (1u32..(1 << n))
        .map(|m| (0..n).filter(|&i| m >> i & 1 == 1).collect())
        .collect()
}

/// `max |A(S,T)|` by enumerating every pair of nonempty subsets.
pub fn naive_cut_norm(a: &DenseMatrix) -> f64 {
    let rows = subsets(a.rows());
    let cols = subsets(a.cols());
    let mut best: f64 = 0.0;
    for s in &rows {
        for t in &cols {
            let v: f64 = s.iter().map(|&i| t.iter().map(|&j| a.get(i, j)).sum::<f64>()).sum();
            best = best.max(v.abs());
        }
    }
    best
}

/// `max |A(S,T)| / sqrt(d(S) e(T))` by full enumeration.
pub fn naive_normalized_cut(a: &DenseMatrix, ips: &InnerProductPair) -> f64 {
    let (d, e) = (ips.left.weights(), ips.right.weights());
    let mut best: f64 = 0.0;
    for s in &subsets(a.rows()) {
        let ds: f64 = s.iter().map(|&i| d[i]).sum();
        for t in &subsets(a.cols()) {
            let et: f64 = t.iter().map(|&j| e[j]).sum();
            let v: f64 = s.iter().map(|&i| t.iter().map(|&j| a.get(i, j)).sum::<f64>()).sum();
            best = best.max(v.abs() / (ds * et).sqrt());
        }
    }
    best
}

/// `‖Π A‖_F` for the orthogonal projection onto the span of `vectors`
/// under per-entry weights, by dense least squares in whitened coordinates.
pub fn least_squares_projection_norm(target: &[f64], vectors: &[Vec<f64>], weights: &[f64]) -> f64 {
    let rt: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let basis = DMatrix::from_fn(target.len(), vectors.len(), |k, t| vectors[t][k] * rt[k]);
    let rhs = DVector::from_iterator(target.len(), target.iter().zip(&rt).map(|(a, r)| a * r));
    let svd = basis.clone().svd(true, true);
    let tol = 1e-10 * svd.singular_values.max();
    let x = svd.solve(&rhs, tol).unwrap();
    (basis * x).norm()
}

/// Flattened `(D 1_S)(E 1_T)^T / sqrt(d(S) e(T))` for every cut pair.
pub fn cut_representers(ips: &InnerProductPair) -> Vec<Vec<f64>> {
    let (d, e) = (ips.left.weights(), ips.right.weights());
    let mut out = Vec::new();
    for s in &subsets(d.len()) {
        let ds: f64 = s.iter().map(|&i| d[i]).sum();
        for t in &subsets(e.len()) {
            let et: f64 = t.iter().map(|&j| e[j]).sum();
            let c = 1.0 / (ds * et).sqrt();
            let mut v = vec![0.0; d.len() * e.len()];
            for &i in s {
                for &j in t {
                    v[i * e.len() + j] = c * d[i] * e[j];
                }
            }
            out.push(v);
        }
    }
    out
}

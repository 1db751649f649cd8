//! Oracles for the CLI and acceptance tests. The matrix oracles are shared
//! with the core integration tests; the rest are specific to these suites.
#![allow(dead_code)]

#[path = "../../../core/tests/common/mod.rs"]
mod shared;

pub use shared::*;

use nalgebra::DMatrix;
use pvd_core::linalg::{DenseMatrix, InnerProductPair};

/// `max(0, max_{S,T} A(S,T) / sqrt(d(S) e(T)))`: the optimum of one sign.
pub fn signed_normalized_max(a: &DenseMatrix, ips: &InnerProductPair) -> f64 {
    let (d, e) = (ips.left.weights(), ips.right.weights());
    let mut best: f64 = 0.0;
    for s in &subsets(a.rows()) {
        let ds: f64 = s.iter().map(|&i| d[i]).sum();
        for t in &subsets(a.cols()) {
            let et: f64 = t.iter().map(|&j| e[j]).sum();
            let v: f64 = s.iter().map(|&i| t.iter().map(|&j| a.get(i, j)).sum::<f64>()).sum();
            best = best.max(v / (ds * et).sqrt());
        }
    }
    best
}

/// `max_x x^T A (1 - x)` over every 0/1 vector.
pub fn brute_force_max_cut(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    let mut best: f64 = 0.0;
    for mask in 0u32..(1 << n) {
        let mut v = 0.0;
        for i in (0..n).filter(|&i| mask >> i & 1 == 1) {
            for j in (0..n).filter(|&j| mask >> j & 1 == 0) {
                v += a.get(i, j);
            }
        }
        best = best.max(v);
    }
    best
}

/// Largest within-block spread of `x` over every pair of parts.
pub fn block_spread(x: &DenseMatrix, parts: &[Vec<usize>]) -> f64 {
    let mut worst: f64 = 0.0;
    for p in parts {
        for q in parts {
            let vals: Vec<f64> = p.iter().flat_map(|&i| q.iter().map(move |&j| x.get(i, j))).collect();
            let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
            worst = worst.max(hi - lo);
        }
    }
    worst
}

/// Absolute eigenvalues of `D^{-1/2} A D^{-1/2}` in decreasing order.
pub fn normalized_abs_spectrum(a: &DenseMatrix, d: &[f64]) -> Vec<f64> {
    let n = a.rows();
    let m = DMatrix::from_fn(n, n, |i, j| a.get(i, j) / (d[i] * d[j]).sqrt());
    let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().map(|v| v.abs()).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

/// Every tuple of nonempty subsets, one per mode, in lexicographic order.
pub fn subset_tuples(dims: &[usize]) -> Vec<Vec<Vec<usize>>> {
    let mut out: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
    for &n in dims {
        let subs = subsets(n);
        out = out
            .into_iter()
            .flat_map(|prefix| {
                subs.iter().map(move |s| {
                    let mut t = prefix.clone();
                    t.push(s.clone());
                    t
                })
            })
            .collect();
    }
    out
}

fn flat_index(dims: &[usize], idx: &[usize]) -> usize {
    idx.iter().zip(dims).fold(0, |acc, (&i, &n)| acc * n + i)
}

fn tuple_points(sets: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new()];
    for s in sets {
        out = out
            .into_iter()
            .flat_map(|p| {
                s.iter().map(move |&i| {
                    let mut q = p.clone();
                    q.push(i);
                    q
                })
            })
            .collect();
    }
    out
}

fn tuple_scale(sets: &[Vec<usize>], weights: &[Vec<f64>]) -> f64 {
    sets.iter()
        .zip(weights)
        .map(|(s, w)| s.iter().map(|&i| w[i]).sum::<f64>())
        .product::<f64>()
        .sqrt()
}

/// `max |T(S_1, ..., S_s)| / sqrt(Π d_k(S_k))` by full enumeration.
pub fn tensor_cut_p_norm(flat: &[f64], dims: &[usize], weights: &[Vec<f64>]) -> f64 {
    subset_tuples(dims)
        .iter()
        .map(|sets| {
            let sum: f64 = tuple_points(sets).iter().map(|p| flat[flat_index(dims, p)]).sum();
            sum.abs() / tuple_scale(sets, weights)
        })
        .fold(0.0, f64::max)
}

/// Flattened `⊗ D_k 1_{S_k} / sqrt(Π d_k(S_k))` for every cut tuple.
pub fn tensor_cut_representers(dims: &[usize], weights: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let size: usize = dims.iter().product();
    subset_tuples(dims)
        .iter()
        .map(|sets| {
            let c = 1.0 / tuple_scale(sets, weights);
            let mut v = vec![0.0; size];
            for p in tuple_points(sets) {
                let w: f64 = p.iter().zip(weights).map(|(&i, wk)| wk[i]).product();
                v[flat_index(dims, &p)] = c * w;
            }
            v
        })
        .collect()
}

/// Per-entry weights `1 / Π d_k(i_k)` of the tensor Frobenius product.
pub fn tensor_entry_weights(dims: &[usize], weights: &[Vec<f64>]) -> Vec<f64> {
    let size: usize = dims.iter().product();
    (0..size)
        .map(|mut k| {
            let mut w = 1.0;
            for (m, &n) in dims.iter().enumerate().rev() {
                w *= weights[m][k % n];
                k /= n;
            }
            1.0 / w
        })
        .collect()
}

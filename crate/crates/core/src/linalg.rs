//! Dense matrices and diagonal inner-product geometry.
//!
//! A diagonal inner product `<x, y>_D = sum_i x_i d_i y_i` on each side of a
//! matrix induces the Frobenius product `sum_ij X_ij Y_ij / (d_i e_j)`, which is
//! the ordinary Frobenius product of the whitened matrices `D^-1/2 X E^-1/2`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{mismatch, PvdError, Result};

/// Row-major dense real matrix with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(PvdError::InvalidInput(format!(
                "matrix must be non-empty, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(mismatch(rows * cols, entries.len()));
        }
        if let Some(pos) = entries.iter().position(|v| !v.is_finite()) {
            return Err(PvdError::NonFinite(pos));
        }
        Ok(DenseMatrix { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            entries: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// All-ones matrix.
    pub fn ones(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            entries: vec![1.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(PvdError::InvalidInput("ragged rows".into()));
        }
        Self::new(r, c, rows.concat())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, entries }
    }

    /// Outer product `u v^T`.
    pub fn outer(u: &[f64], v: &[f64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<f64> {
        self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn scale(&self, alpha: f64) -> Self {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|v| v * alpha).collect(),
        }
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn add(&self, other: &DenseMatrix) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != self.rows || y.len() != self.cols {
            return Err(mismatch(
                format!("({}, {})", self.rows, self.cols),
                format!("({}, {})", x.len(), y.len()),
            ));
        }
        Ok((0..self.rows)
            .map(|i| x[i] * self.row(i).iter().zip(y).map(|(a, b)| a * b).sum::<f64>())
            .sum())
    }

    /// Sum of entries on the `rows x cols` rectangle.
    pub fn block_sum(&self, rows: &[usize], cols: &[usize]) -> f64 {
        rows.iter()
            .map(|&i| cols.iter().map(|&j| self.get(i, j)).sum::<f64>())
            .sum()
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn euclidean_frob_norm(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows)
                .all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.entries.iter().all(|&v| v >= 0.0)
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]))
    }

    pub(crate) fn check_same_shape(&self, other: &DenseMatrix) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(mismatch(
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", other.rows, other.cols),
            ));
        }
        Ok(())
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.entries)
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, entries: Vec<f64>) -> Self {
        debug_assert_eq!(entries.len(), rows * cols);
        DenseMatrix { rows, cols, entries }
    }
}

/// Diagonal inner product `<x, y> = sum_i x_i d_i y_i` with strictly positive weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalInnerProduct {
    weights: Vec<f64>,
}

impl DiagonalInnerProduct {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(PvdError::InvalidInput("empty weight vector".into()));
        }
        for (index, &value) in weights.iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(PvdError::NonPositiveWeight { index, value });
            }
        }
        Ok(DiagonalInnerProduct { weights })
    }

    pub fn euclidean(n: usize) -> Self {
        DiagonalInnerProduct {
            weights: vec![1.0; n],
        }
    }

    /// Weighted degree diagonal of a nonnegative adjacency matrix.
    pub fn degree(a: &DenseMatrix) -> Result<Self> {
        Self::new(a.row_sums())
    }

    /// Degree diagonal shifted by the average degree, `D + avg(d) I`.
    pub fn degree_plus_average(a: &DenseMatrix) -> Result<Self> {
        let degrees = a.row_sums();
        let avg = degrees.iter().sum::<f64>() / degrees.len() as f64;
        Self::new(degrees.into_iter().map(|d| d + avg).collect())
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_unit(&self) -> bool {
        self.weights.iter().all(|&w| w == 1.0)
    }

    /// `<1, 1>`, the total weight.
    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn dot(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        ip_dot(x, y, self)
    }

    pub fn norm(&self, x: &[f64]) -> Result<f64> {
        ip_norm(x, self)
    }

    /// `D x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.weights).map(|(a, d)| a * d).collect()
    }

    /// Weight of an index subset.
    pub fn subset_weight(&self, idx: &[usize]) -> f64 {
        idx.iter().map(|&i| self.weights[i]).sum()
    }
}

/// Left/right inner products attached to an `m x n` matrix space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerProductPair {
    pub left: DiagonalInnerProduct,
    pub right: DiagonalInnerProduct,
}

impl InnerProductPair {
    pub fn new(left: DiagonalInnerProduct, right: DiagonalInnerProduct) -> Self {
        InnerProductPair { left, right }
    }

    /// The same inner product on both sides of a square matrix.
    pub fn symmetric(d: DiagonalInnerProduct) -> Self {
        InnerProductPair {
            left: d.clone(),
            right: d,
        }
    }

    pub fn euclidean(rows: usize, cols: usize) -> Self {
        InnerProductPair {
            left: DiagonalInnerProduct::euclidean(rows),
            right: DiagonalInnerProduct::euclidean(cols),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.left.dim(), self.right.dim())
    }

    pub fn check(&self, a: &DenseMatrix) -> Result<()> {
        if self.shape() != a.shape() {
            return Err(mismatch(
                format!("{}x{}", a.rows(), a.cols()),
                format!("inner products of dims {}x{}", self.left.dim(), self.right.dim()),
            ));
        }
        Ok(())
    }

    /// Row-major per-entry Frobenius weights `1 / (d_i e_j)`.
    pub fn entry_weights(&self) -> Vec<f64> {
        let mut w = Vec::with_capacity(self.left.dim() * self.right.dim());
        for &d in self.left.weights() {
            for &e in self.right.weights() {
                w.push(1.0 / (d * e));
            }
        }
        w
    }

    /// `<1, 1>_D * <1, 1>_E`; the scale relating P-norms of cut pairs to cut norms.
    pub fn ones_mass(&self) -> f64 {
        (self.left.total() * self.right.total()).sqrt()
    }
}

fn check_len(x: &[f64], n: usize) -> Result<()> {
    if x.len() != n {
        return Err(mismatch(n, x.len()));
    }
    Ok(())
}

pub fn ip_dot(x: &[f64], y: &[f64], d: &DiagonalInnerProduct) -> Result<f64> {
    check_len(x, d.dim())?;
    check_len(y, d.dim())?;
    Ok(x.iter()
        .zip(y)
        .zip(d.weights())
        .map(|((a, b), w)| a * w * b)
        .sum())
}

pub fn ip_norm(x: &[f64], d: &DiagonalInnerProduct) -> Result<f64> {
    Ok(ip_dot(x, x, d)?.max(0.0).sqrt())
}

pub fn frob_inner(x: &DenseMatrix, y: &DenseMatrix, ips: &InnerProductPair) -> Result<f64> {
    x.check_same_shape(y)?;
    ips.check(x)?;
    let (m, n) = x.shape();
    let mut total = 0.0;
    for i in 0..m {
        let di = ips.left.weights()[i];
        let row: f64 = (0..n)
            .map(|j| x.get(i, j) * y.get(i, j) / ips.right.weights()[j])
            .sum();
        total += row / di;
    }
    Ok(total)
}

pub fn frob_norm(x: &DenseMatrix, ips: &InnerProductPair) -> Result<f64> {
    Ok(frob_inner(x, x, ips)?.max(0.0).sqrt())
}

/// `D^-1/2 A E^-1/2`.
pub fn whitened(a: &DenseMatrix, ips: &InnerProductPair) -> Result<DenseMatrix> {
    ips.check(a)?;
    let ls: Vec<f64> = ips.left.weights().iter().map(|d| d.sqrt()).collect();
    let rs: Vec<f64> = ips.right.weights().iter().map(|e| e.sqrt()).collect();
    Ok(DenseMatrix::from_fn(a.rows(), a.cols(), |i, j| {
        a.get(i, j) / (ls[i] * rs[j])
    }))
}

/// Operator norm of `A` under the attached inner products, i.e. the top
/// singular value of the whitened matrix.
pub fn spectral_norm(a: &DenseMatrix, ips: &InnerProductPair) -> Result<f64> {
    let w = whitened(a, ips)?;
    Ok(singular_values(&w).first().copied().unwrap_or(0.0))
}

/// Singular values in descending order.
pub fn singular_values(a: &DenseMatrix) -> Vec<f64> {
    let svd = a.to_nalgebra().svd(false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Leading singular triple `(sigma, u, v)` of a matrix (Euclidean).
pub fn top_singular_triple(a: &DenseMatrix) -> (f64, Vec<f64>, Vec<f64>) {
    let svd = a.to_nalgebra().svd(true, true);
    let (u, vt) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    let (k, &sigma) = svd
        .singular_values
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1).then(y.0.cmp(&x.0)))
        .expect("non-empty matrix");
    let left: Vec<f64> = u.column(k).iter().copied().collect();
    let right: Vec<f64> = vt.row(k).iter().copied().collect();
    (sigma, left, right)
}

/// Eigenvalues of a symmetric matrix, descending.
pub fn symmetric_eigenvalues(a: &DenseMatrix) -> Vec<f64> {
    let m = a.to_nalgebra();
    let sym = (&m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
    }

    fn dip(w: &[f64]) -> DiagonalInnerProduct {
        DiagonalInnerProduct::new(w.to_vec()).unwrap()
    }

    #[test]
    fn dot_examples() {
        assert_eq!(ip_dot(&[1.0, 1.0], &[1.0, 1.0], &dip(&[1.0, 1.0])).unwrap(), 2.0);
        assert_eq!(ip_dot(&[1.0, 0.0], &[0.0, 1.0], &dip(&[5.0, 7.0])).unwrap(), 0.0);
        assert_eq!(ip_dot(&[1.0, 2.0], &[3.0, 1.0], &dip(&[2.0, 4.0])).unwrap(), 14.0);
        assert!(ip_dot(&[1.0], &[1.0, 2.0], &dip(&[1.0, 1.0])).is_err());
    }

    #[test]
    fn norm_examples() {
        assert!(close(ip_norm(&[1.0, 1.0], &dip(&[1.0, 1.0])).unwrap(), 2f64.sqrt()));
        assert_eq!(ip_norm(&[1.0, 0.0, 0.0], &dip(&[9.0, 1.0, 1.0])).unwrap(), 3.0);
        assert_eq!(ip_norm(&[0.0, 0.0], &dip(&[3.0, 1.0])).unwrap(), 0.0);
    }

    #[test]
    fn weights_must_be_positive() {
        assert!(matches!(
            DiagonalInnerProduct::new(vec![1.0, 0.0]),
            Err(PvdError::NonPositiveWeight { index: 1, .. })
        ));
        assert!(DiagonalInnerProduct::new(vec![-1.0]).is_err());
    }

    #[test]
    fn frobenius_examples() {
        let i2 = DenseMatrix::identity(2);
        let unit = InnerProductPair::euclidean(2, 2);
        assert_eq!(frob_inner(&i2, &i2, &unit).unwrap(), 2.0);
        let two = i2.scale(2.0);
        let four = InnerProductPair::symmetric(dip(&[4.0, 4.0]));
        assert!(close(frob_inner(&two, &two, &four).unwrap(), 0.5));
        assert!(close(frob_norm(&two, &four).unwrap(), 0.5f64.sqrt()));
        let e11 = DenseMatrix::outer(&[1.0, 0.0], &[1.0, 0.0]);
        let e22 = DenseMatrix::outer(&[0.0, 1.0], &[0.0, 1.0]);
        let odd = InnerProductPair::symmetric(dip(&[3.0, 0.5]));
        assert_eq!(frob_inner(&e11, &e22, &odd).unwrap(), 0.0);
        assert!(close(frob_norm(&i2, &unit).unwrap(), 2f64.sqrt()));
        assert_eq!(frob_norm(&DenseMatrix::zeros(2, 3), &InnerProductPair::euclidean(2, 3)).unwrap(), 0.0);
        assert!(frob_inner(&i2, &DenseMatrix::zeros(2, 3), &unit).is_err());
    }

    #[test]
    fn whitening_examples() {
        let a = DenseMatrix::from_rows(&[vec![1.0, -2.0], vec![3.5, 0.25]]).unwrap();
        assert_eq!(whitened(&a, &InnerProductPair::euclidean(2, 2)).unwrap(), a);
        let four = DenseMatrix::from_rows(&[vec![4.0]]).unwrap();
        let w = whitened(&four, &InnerProductPair::symmetric(dip(&[4.0]))).unwrap();
        assert_eq!(w.get(0, 0), 1.0);
        let j2 = DenseMatrix::ones(2, 2);
        assert_eq!(whitened(&j2, &InnerProductPair::euclidean(2, 2)).unwrap(), j2);
    }

    #[test]
    fn spectral_examples() {
        let unit = InnerProductPair::euclidean(2, 2);
        assert!((spectral_norm(&DenseMatrix::identity(2), &unit).unwrap() - 1.0).abs() < 1e-12);
        assert!((spectral_norm(&DenseMatrix::ones(2, 2), &unit).unwrap() - 2.0).abs() < 1e-12);
        let two = DenseMatrix::identity(2).scale(2.0);
        let four = InnerProductPair::symmetric(dip(&[4.0, 4.0]));
        assert!((spectral_norm(&two, &four).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(matches!(
            DenseMatrix::new(1, 2, vec![1.0, f64::NAN]),
            Err(PvdError::NonFinite(1))
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn matrix(m: usize, n: usize) -> impl Strategy<Value = DenseMatrix> {
            proptest::collection::vec(-1.0f64..1.0, m * n)
                .prop_map(move |v| DenseMatrix::new(m, n, v).unwrap())
        }

        fn weights(n: usize) -> impl Strategy<Value = DiagonalInnerProduct> {
            proptest::collection::vec(0.5f64..2.0, n)
                .prop_map(|w| DiagonalInnerProduct::new(w).unwrap())
        }

        proptest! {
            #[test]
            fn frob_inner_is_symmetric_and_bilinear(
                x in matrix(3, 4), y in matrix(3, 4), z in matrix(3, 4),
                d in weights(3), e in weights(4), alpha in -2.0f64..2.0,
            ) {
                let ips = InnerProductPair::new(d, e);
                let xy = frob_inner(&x, &y, &ips).unwrap();
                let yx = frob_inner(&y, &x, &ips).unwrap();
                prop_assert!((xy - yx).abs() <= 1e-12);
                let combo = x.scale(alpha).add(&z).unwrap();
                let lhs = frob_inner(&combo, &y, &ips).unwrap();
                let rhs = alpha * xy + frob_inner(&z, &y, &ips).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
            }

            #[test]
            fn frobenius_dominates_spectral(a in matrix(4, 3), d in weights(4), e in weights(3)) {
                let ips = InnerProductPair::new(d, e);
                let f = frob_norm(&a, &ips).unwrap();
                let s = spectral_norm(&a, &ips).unwrap();
                prop_assert!(s <= f * (1.0 + 1e-8));
                let w = whitened(&a, &ips).unwrap().euclidean_frob_norm();
                prop_assert!((w - f).abs() <= 1e-10 * f.max(1e-300));
            }

            #[test]
            fn spectral_is_operator_norm(a in matrix(3, 3), d in weights(3), e in weights(3),
                                         x in proptest::collection::vec(-1.0f64..1.0, 3),
                                         y in proptest::collection::vec(-1.0f64..1.0, 3)) {
                let ips = InnerProductPair::new(d.clone(), e.clone());
                let nx = d.norm(&x).unwrap();
                let ny = e.norm(&y).unwrap();
                prop_assume!(nx > 1e-6 && ny > 1e-6);
                let ratio = a.bilinear(&x, &y).unwrap().abs() / (nx * ny);
                prop_assert!(ratio <= spectral_norm(&a, &ips).unwrap() * (1.0 + 1e-9) + 1e-12);
            }
        }
    }
}

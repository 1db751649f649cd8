//! Cut-norm maximization.
//!
//! Two routes to `max_{S,T} |A(S,T)| / sqrt(d(S) e(T))`: exhaustive enumeration
//! over subset pairs (the oracle), and a ratio-enumerated linear program whose
//! optimal vertex values are rounded by a threshold scan.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{mismatch, PvdError, Result};
use crate::linalg::{DenseMatrix, DiagonalInnerProduct};
use crate::parallel;
use crate::simplex::LinearProgram;
use crate::subset::{cmp_subsets, mask_to_indices, subset_sums, MAX_ENUMERATION_BITS};

/// Default side-length cap for exhaustive enumeration.
pub const DEFAULT_BRUTE_FORCE_CAP: usize = 12;

/// A pair of nonempty index sets with the form value it achieves.
///
/// `value` is the absolute value; `sign` records whether the underlying
/// (normalized) rectangle sum was nonnegative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutPair {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub value: f64,
    pub sign: i8,
}

impl CutPair {
    /// Canonical tie-break order: `(S, T)` compared as bitmasks.
    pub fn canonical_cmp(&self, other: &CutPair) -> Ordering {
        cmp_subsets(&self.rows, &other.rows).then_with(|| cmp_subsets(&self.cols, &other.cols))
    }

    /// `A(S,T) / sqrt(d(S) e(T))`, signed.
    pub fn normalized_form(
        &self,
        a: &DenseMatrix,
        left: &DiagonalInnerProduct,
        right: &DiagonalInnerProduct,
    ) -> f64 {
        a.block_sum(&self.rows, &self.cols)
            / (left.subset_weight(&self.rows) * right.subset_weight(&self.cols)).sqrt()
    }

    fn null() -> Self {
        CutPair {
            rows: Vec::new(),
            cols: Vec::new(),
            value: 0.0,
            sign: 1,
        }
    }

    pub fn is_null(&self) -> bool {
        self.rows.is_empty() || self.cols.is_empty()
    }
}

/// Reduces candidates to the maximum value, breaking ties within `tie_tol`
/// by the canonical order. Independent of candidate order.
pub(crate) fn select_best(candidates: Vec<CutPair>, tie_tol: f64) -> Option<CutPair> {
    let best = candidates
        .iter()
        .map(|c| c.value)
        .fold(f64::NEG_INFINITY, f64::max);
    candidates
        .into_iter()
        .filter(|c| c.value >= best - tie_tol)
        .min_by(|a, b| a.canonical_cmp(b))
}

fn check_cap(size: usize, cap: usize) -> Result<()> {
    let cap = cap.min(MAX_ENUMERATION_BITS);
    if size > cap {
        return Err(PvdError::SizeCap { size, cap });
    }
    Ok(())
}

/// Exact cut norm `max |A(S,T)|` by enumerating the smaller side; the best
/// partner set is then all positive (or all negative) aggregated lines.
pub fn cut_norm_bruteforce(a: &DenseMatrix, cap: usize, tie_tol: f64) -> Result<CutPair> {
    if a.rows() > a.cols() {
        let t = cut_norm_bruteforce(&a.transpose(), cap, tie_tol)?;
        return Ok(CutPair {
            rows: t.cols,
            cols: t.rows,
            ..t
        });
    }
    let (m, n) = a.shape();
    check_cap(m, cap)?;
    let candidates = parallel::map_range((1usize << m) - 1, |k| {
        let rows = mask_to_indices(k as u64 + 1, m);
        let mut agg = vec![0.0; n];
        for &i in &rows {
            for (s, v) in agg.iter_mut().zip(a.row(i)) {
                *s += v;
            }
        }
        let pos: Vec<usize> = (0..n).filter(|&j| agg[j] > 0.0).collect();
        let neg: Vec<usize> = (0..n).filter(|&j| agg[j] < 0.0).collect();
        let pv: f64 = pos.iter().map(|&j| agg[j]).sum();
        let nv: f64 = -neg.iter().map(|&j| agg[j]).sum::<f64>();
        if pv == 0.0 && nv == 0.0 {
            None
        } else if pv >= nv {
            Some(CutPair { rows, cols: pos, value: pv, sign: 1 })
        } else {
            Some(CutPair { rows, cols: neg, value: nv, sign: -1 })
        }
    });
    let found: Vec<CutPair> = candidates.into_iter().flatten().collect();
    Ok(select_best(found, tie_tol).unwrap_or(CutPair {
        rows: vec![0],
        cols: vec![0],
        value: 0.0,
        sign: 1,
    }))
}

/// Exact maximizer of `|A(S,T)| / sqrt(d(S) e(T))` over all nonempty pairs.
pub fn normalized_cut_bruteforce(
    a: &DenseMatrix,
    left: &DiagonalInnerProduct,
    right: &DiagonalInnerProduct,
    cap: usize,
    tie_tol: f64,
) -> Result<CutPair> {
    let (m, n) = a.shape();
    if left.dim() != m || right.dim() != n {
        return Err(mismatch(
            format!("{m}x{n}"),
            format!("weights {}x{}", left.dim(), right.dim()),
        ));
    }
    check_cap(m, cap)?;
    check_cap(n, cap)?;
    let left_w = subset_sums(left.weights());
    let right_w = subset_sums(right.weights());
    let per_row_set = parallel::map_range((1usize << m) - 1, |k| {
        let s_mask = k + 1;
        let mut agg = vec![0.0; n];
        for i in (0..m).filter(|i| s_mask >> i & 1 == 1) {
            for (s, v) in agg.iter_mut().zip(a.row(i)) {
                *s += v;
            }
        }
        let sums = subset_sums(&agg);
        let ws = left_w[s_mask];
        let mut best_mask = 1usize;
        let mut best_val = f64::NEG_INFINITY;
        for t_mask in 1usize..(1 << n) {
            let v = sums[t_mask].abs() / (ws * right_w[t_mask]).sqrt();
            if v > best_val + tie_tol {
                best_val = v;
                best_mask = t_mask;
            }
        }
        let sign = if sums[best_mask] >= 0.0 { 1 } else { -1 };
        (s_mask, best_mask, best_val, sign)
    });
    let candidates = per_row_set
        .into_iter()
        .map(|(s, t, value, sign)| CutPair {
            rows: mask_to_indices(s as u64, m),
            cols: mask_to_indices(t as u64, n),
            value,
            sign,
        })
        .collect();
    Ok(select_best(candidates, tie_tol).expect("at least one subset pair"))
}

/// Optimal vertex of the cut LP for one ratio `c`.
#[derive(Debug, Clone)]
pub struct CutLpSolution {
    pub ratio: f64,
    /// Row-vertex values `y_i`.
    pub row_values: Vec<f64>,
    /// Column-vertex values `z_j`.
    pub col_values: Vec<f64>,
    /// Edge values `x_ij` (row-major, signed).
    pub edge_values: Vec<f64>,
    pub objective: f64,
}

/// The cut LP for ratio `c`:
///
/// ```text
/// max sum_ij x_ij
///   x_ij <= A_ij y_i,  x_ij <= A_ij z_j
///   sum_i d_i y_i <= sqrt(c),  sum_j e_j z_j <= 1/sqrt(c),  y, z >= 0
/// ```
#[derive(Debug, Clone)]
pub struct CutLpInstance<'a> {
    pub matrix: &'a DenseMatrix,
    pub left: &'a [f64],
    pub right: &'a [f64],
    pub ratio: f64,
}

impl CutLpInstance<'_> {
    pub fn solve(&self, tol: f64) -> Result<CutLpSolution> {
        let a = self.matrix;
        let (m, n) = a.shape();
        // Layout: y (m), z (n), then one nonnegative variable per nonzero entry.
        // Positive entries carry x_ij = w; negative entries carry x_ij = -w.
        let edges: Vec<(usize, usize, f64)> = (0..m)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, a.get(i, j)))
            .filter(|&(_, _, v)| v != 0.0)
            .collect();
        let nvars = m + n + edges.len();
        let mut obj = vec![0.0; nvars];
        for (k, &(_, _, v)) in edges.iter().enumerate() {
            obj[m + n + k] = v.signum();
        }
        let mut lp = LinearProgram::new(obj);
        for (k, &(i, j, v)) in edges.iter().enumerate() {
            let w = m + n + k;
            if v > 0.0 {
                lp.add_le(&[(w, 1.0), (i, -v)], 0.0);
                lp.add_le(&[(w, 1.0), (m + j, -v)], 0.0);
            } else {
                lp.add_le(&[(i, -v), (w, -1.0)], 0.0);
                lp.add_le(&[(m + j, -v), (w, -1.0)], 0.0);
            }
        }
        let root = self.ratio.sqrt();
        let budget_rows: Vec<(usize, f64)> = self.left.iter().copied().enumerate().collect();
        let budget_cols: Vec<(usize, f64)> =
            self.right.iter().enumerate().map(|(j, &e)| (m + j, e)).collect();
        lp.add_le(&budget_rows, root);
        lp.add_le(&budget_cols, 1.0 / root);
        let sol = lp.maximize(tol)?;
        let mut edge_values = vec![0.0; m * n];
        for (k, &(i, j, v)) in edges.iter().enumerate() {
            edge_values[i * n + j] = v.signum() * sol.x[m + n + k];
        }
        Ok(CutLpSolution {
            ratio: self.ratio,
            row_values: sol.x[..m].to_vec(),
            col_values: sol.x[m..m + n].to_vec(),
            edge_values,
            objective: sol.objective,
        })
    }
}

/// Threshold rounding: scans `r` over the breakpoints `{y_i} ∪ {z_j}` and
/// evaluates `(S(r), T(r)) = ({y_i >= r}, {z_j >= r})`. Pairs with an empty
/// side are skipped; a solution with no positive breakpoint rounds to the
/// null pair with value 0.
pub fn lp_round(
    solution: &CutLpSolution,
    a: &DenseMatrix,
    left: &[f64],
    right: &[f64],
) -> CutPair {
    let mut breakpoints: Vec<f64> = solution
        .row_values
        .iter()
        .chain(&solution.col_values)
        .copied()
        .filter(|&r| r > 0.0)
        .collect();
    breakpoints.sort_by(|x, y| y.total_cmp(x));
    breakpoints.dedup();
    let mut best = CutPair::null();
    let mut best_val = f64::NEG_INFINITY;
    for r in breakpoints {
        let rows: Vec<usize> = (0..a.rows()).filter(|&i| solution.row_values[i] >= r).collect();
        let cols: Vec<usize> = (0..a.cols()).filter(|&j| solution.col_values[j] >= r).collect();
        if rows.is_empty() || cols.is_empty() {
            continue;
        }
        let ws: f64 = rows.iter().map(|&i| left[i]).sum();
        let wt: f64 = cols.iter().map(|&j| right[j]).sum();
        let v = a.block_sum(&rows, &cols) / (ws * wt).sqrt();
        if v > best_val {
            best_val = v;
            best = CutPair {
                rows,
                cols,
                value: v.abs(),
                sign: if v >= 0.0 { 1 } else { -1 },
            };
        }
    }
    if best_val <= 0.0 {
        return CutPair::null();
    }
    best
}

/// One LP solve plus its rounding, kept for soundness audits.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LpRun {
    pub ratio: f64,
    pub sign: i8,
    pub objective: f64,
    pub rounded: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LpCutResult {
    pub pair: CutPair,
    pub runs: Vec<LpRun>,
}

fn integral_weights(d: &[u64]) -> Result<Vec<f64>> {
    if d.contains(&0) {
        return Err(PvdError::InvalidInput("integral weights must be positive".into()));
    }
    Ok(d.iter().map(|&v| v as f64).collect())
}

/// All achievable subset sums of a positive integer vector (excluding 0).
fn achievable_sums(d: &[u64]) -> Vec<u64> {
    let total: u64 = d.iter().sum();
    let mut reach = vec![false; total as usize + 1];
    reach[0] = true;
    for &w in d {
        for s in (w as usize..=total as usize).rev() {
            if reach[s - w as usize] {
                reach[s] = true;
            }
        }
    }
    (1..=total).filter(|&s| reach[s as usize]).collect()
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Every value `d(S)/e(T)` can take, as reduced fractions in increasing order.
pub fn candidate_ratios(left: &[u64], right: &[u64]) -> Vec<(u64, u64)> {
    let num = achievable_sums(left);
    let den = achievable_sums(right);
    let mut out: Vec<(u64, u64)> = num
        .iter()
        .flat_map(|&a| den.iter().map(move |&b| (a, b)))
        .map(|(a, b)| {
            let g = gcd(a, b);
            (a / g, b / g)
        })
        .collect();
    out.sort_by(|x, y| (x.0 * y.1).cmp(&(y.0 * x.1)));
    out.dedup();
    out
}

fn solve_over_ratios(
    a: &DenseMatrix,
    left: &[f64],
    right: &[f64],
    ratios: &[f64],
    tol: f64,
    tie_tol: f64,
) -> Result<LpCutResult> {
    let neg = a.scale(-1.0);
    let jobs: Vec<(f64, i8)> = [1i8, -1]
        .iter()
        .flat_map(|&s| ratios.iter().map(move |&c| (c, s)))
        .collect();
    let outcomes = parallel::map_slice(&jobs, |&(ratio, sign)| {
        let target = if sign > 0 { a } else { &neg };
        let sol = CutLpInstance { matrix: target, left, right, ratio }.solve(tol)?;
        let mut pair = lp_round(&sol, target, left, right);
        let run = LpRun {
            ratio,
            sign,
            objective: sol.objective,
            rounded: pair.value,
        };
        if sign < 0 {
            pair.sign = -pair.sign;
        }
        Ok((pair, run))
    });
    let mut pairs = Vec::with_capacity(outcomes.len());
    let mut runs = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        let (p, r) = o?;
        if !p.is_null() {
            pairs.push(p);
        }
        runs.push(r);
    }
    let pair = select_best(pairs, tie_tol).unwrap_or(CutPair {
        rows: vec![0],
        cols: vec![0],
        value: 0.0,
        sign: 1,
    });
    Ok(LpCutResult { pair, runs })
}

/// Ratio-enumerated LP maximizer for integral positive weights.
pub fn cut_lp_exact(
    a: &DenseMatrix,
    left: &[u64],
    right: &[u64],
    tol: f64,
    tie_tol: f64,
) -> Result<LpCutResult> {
    if left.len() != a.rows() || right.len() != a.cols() {
        return Err(mismatch(
            format!("{}x{}", a.rows(), a.cols()),
            format!("weights {}x{}", left.len(), right.len()),
        ));
    }
    let lw = integral_weights(left)?;
    let rw = integral_weights(right)?;
    let ratios: Vec<f64> = candidate_ratios(left, right)
        .into_iter()
        .map(|(p, q)| p as f64 / q as f64)
        .collect();
    solve_over_ratios(a, &lw, &rw, &ratios, tol, tie_tol)
}

/// Geometric ratio grid with multiplicative step `1 + eps` covering
/// `[min d / sum e, sum d / min e]`.
pub fn ratio_grid(left: &[f64], right: &[f64], eps: f64) -> Vec<f64> {
    let min_l = left.iter().copied().fold(f64::INFINITY, f64::min);
    let min_r = right.iter().copied().fold(f64::INFINITY, f64::min);
    let lo = min_l / right.iter().sum::<f64>();
    let hi = left.iter().sum::<f64>() / min_r;
    let mut grid = vec![lo];
    let mut c = lo;
    while c < hi {
        c *= 1.0 + eps;
        grid.push(c.min(hi));
    }
    grid
}

/// Bucketed variant for arbitrary positive weights; the value is within a
/// factor `1 + eps` of the ratio-enumerated LP optimum.
pub fn cut_lp_approx(
    a: &DenseMatrix,
    left: &DiagonalInnerProduct,
    right: &DiagonalInnerProduct,
    eps: f64,
    tol: f64,
    tie_tol: f64,
) -> Result<LpCutResult> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(PvdError::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    if left.dim() != a.rows() || right.dim() != a.cols() {
        return Err(mismatch(
            format!("{}x{}", a.rows(), a.cols()),
            format!("weights {}x{}", left.dim(), right.dim()),
        ));
    }
    let grid = ratio_grid(left.weights(), right.weights(), eps);
    solve_over_ratios(a, left.weights(), right.weights(), &grid, tol, tie_tol)
}

/// Converts real weights to integers when they are (numerically) integral.
pub fn as_integral(weights: &[f64]) -> Option<Vec<u64>> {
    weights
        .iter()
        .map(|&w| {
            let r = w.round();
            ((w - r).abs() <= 1e-12 && r >= 1.0).then_some(r as u64)
        })
        .collect()
}

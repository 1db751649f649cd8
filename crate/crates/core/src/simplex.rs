//! Dense primal simplex with Bland's anti-cycling rule.
//!
//! Solves `max c^T x  s.t.  A x <= b, x >= 0` with `b >= 0`, so the slack
//! basis is feasible from the start and no phase one is needed.

use crate::error::{mismatch, PvdError, Result};

#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    /// Dense constraint rows, each of length `objective.len()`.
    pub rows: Vec<Vec<f64>>,
    pub bounds: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        LinearProgram {
            objective,
            rows: Vec::new(),
            bounds: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Adds `sum_k coeffs[k].1 * x[coeffs[k].0] <= bound`.
    pub fn add_le(&mut self, coeffs: &[(usize, f64)], bound: f64) {
        let mut row = vec![0.0; self.num_vars()];
        for &(j, v) in coeffs {
            row[j] += v;
        }
        self.rows.push(row);
        self.bounds.push(bound);
    }

    pub fn maximize(&self, tol: f64) -> Result<LpSolution> {
        let n = self.num_vars();
        let m = self.rows.len();
        if self.bounds.len() != m {
            return Err(mismatch(m, self.bounds.len()));
        }
        if let Some(r) = self.rows.iter().find(|r| r.len() != n) {
            return Err(mismatch(n, r.len()));
        }
        if self.bounds.iter().any(|&b| b < 0.0 || !b.is_finite()) {
            return Err(PvdError::InvalidInput(
                "simplex requires finite nonnegative right-hand sides".into(),
            ));
        }
        Tableau::new(self).solve(tol, n)
    }
}

struct Tableau {
    m: usize,
    width: usize,
    /// `m` constraint rows followed by the reduced-cost row; last column is the rhs.
    cells: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn new(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let m = lp.rows.len();
        let cols = n + m;
        let width = cols + 1;
        let mut cells = vec![0.0; (m + 1) * width];
        for (i, row) in lp.rows.iter().enumerate() {
            let base = i * width;
            cells[base..base + n].copy_from_slice(row);
            cells[base + n + i] = 1.0;
            cells[base + cols] = lp.bounds[i];
        }
        let obj = m * width;
        for (j, &c) in lp.objective.iter().enumerate() {
            cells[obj + j] = -c;
        }
        Tableau {
            m,
            width,
            cells,
            basis: (n..n + m).collect(),
        }
    }

    fn solve(mut self, tol: f64, n: usize) -> Result<LpSolution> {
        let cols = self.width - 1;
        let obj = self.m * self.width;
        let mut pivots = 0usize;
        // Bland: lowest-index improving column.
        while let Some(enter) = (0..cols).find(|&j| self.cells[obj + j] < -tol) {
            // Bland: minimum ratio, ties to the lowest-index basic variable.
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.cells[i * self.width + enter];
                if a > tol {
                    let ratio = self.cells[i * self.width + cols] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - tol
                                || (ratio <= lr + tol && self.basis[i] < self.basis[li])
                            {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((row, _)) = leave else {
                return Err(PvdError::Unbounded);
            };
            self.pivot(row, enter);
            pivots += 1;
        }
        let mut x = vec![0.0; n];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < n {
                x[b] = self.cells[i * self.width + cols].max(0.0);
            }
        }
        Ok(LpSolution {
            x,
            objective: self.cells[obj + cols],
            pivots,
        })
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width;
        let p = self.cells[row * w + col];
        for v in &mut self.cells[row * w..(row + 1) * w] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.cells[row * w..(row + 1) * w].to_vec();
        for i in 0..=self.m {
            if i == row {
                continue;
            }
            let f = self.cells[i * w + col];
            if f != 0.0 {
                for (dst, src) in self.cells[i * w..(i + 1) * w].iter_mut().zip(&pivot_row) {
                    *dst -= f * src;
                }
                self.cells[i * w + col] = 0.0;
            }
        }
        self.basis[row] = col;
    }
}

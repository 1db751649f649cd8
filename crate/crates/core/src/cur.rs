//! Column-row decomposition: a PVD whose domain pairs are normalized columns
//! and rows of the input itself.

use serde::{Deserialize, Serialize};

use crate::domain::{DomainPair, PairLabel, UnitDomain};
use crate::error::{PvdError, Result};
use crate::linalg::{DenseMatrix, InnerProductPair};
use crate::pvd::{best_truncation, compute_pvd, PvdConfig, PvdResult};
use crate::regularity::rounds_for;
use crate::tolerance::Certificate;

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

fn same(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12)
}

/// Every `(column j, row i)` pair over nonzero columns and rows, Euclidean,
/// in `(j, i)` order with duplicate normalized pairs removed.
pub fn column_row_domain(a: &DenseMatrix) -> Result<UnitDomain> {
    let (m, n) = a.shape();
    let ips = InnerProductPair::euclidean(m, n);
    let cols: Vec<(usize, Vec<f64>)> = (0..n)
        .map(|j| (j, a.column(j)))
        .filter(|(_, c)| c.iter().any(|&x| x != 0.0))
        .collect();
    let rows: Vec<(usize, Vec<f64>)> = (0..m)
        .map(|i| (i, a.row(i).to_vec()))
        .filter(|(_, r)| r.iter().any(|&x| x != 0.0))
        .collect();
    if cols.is_empty() {
        return Err(PvdError::InvalidInput("column-row domain of a zero matrix".into()));
    }
    let mut pairs: Vec<DomainPair> = Vec::new();
    let mut seen: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for (j, c) in &cols {
        for (i, r) in &rows {
            let key = (unit(c), unit(r));
            if seen.iter().any(|(x, y)| same(x, &key.0) && same(y, &key.1)) {
                continue;
            }
            seen.push(key);
            pairs.push(DomainPair::new(
                PairLabel::ColumnRow { col: *j, row: *i },
                c.clone(),
                r.clone(),
                &ips,
            )?);
        }
    }
    Ok(UnitDomain::ColumnRow { ips, pairs })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurTerm {
    pub col: usize,
    pub row: usize,
    /// Weight of `c r^T` (raw column times raw row) in the reconstruction.
    pub coefficient: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurDecomposition {
    pub approx: DenseMatrix,
    pub pvd: PvdResult,
    pub r: usize,
    pub terms: Vec<CurTerm>,
    /// `‖Σ coef c r^T - Â‖_F / max(‖Â‖_F, 1)`.
    pub reconstruction_error: f64,
    /// `max |ĉ^T (A - Â) r̂|` over every nonzero column and row.
    pub residual_max: f64,
    pub prefix_bound: f64,
    pub eps_bound: f64,
    pub certificates: Vec<Certificate>,
}

/// Column-row PVD with `r = ⌈eps^{-2}⌉` and the best truncation.
pub fn cur_pvd(a: &DenseMatrix, eps: f64, cfg: &PvdConfig) -> Result<CurDecomposition> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(PvdError::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    let domain = column_row_domain(a)?;
    let r = rounds_for(eps);
    let pvd = compute_pvd(a, &domain, r + 1, cfg)?;
    let bt = best_truncation(&pvd, r)?;
    let approx = bt.matrix.clone();

    let used: Vec<(usize, usize)> = pvd.selected()[..bt.terms()]
        .iter()
        .filter_map(|p| match p.label {
            PairLabel::ColumnRow { col, row } => Some((col, row)),
            _ => None,
        })
        .collect();
    let (coeffs, reconstruction_error) = recover_coefficients(a, &approx, &used)?;
    let terms = used
        .iter()
        .zip(coeffs)
        .map(|(&(col, row), coefficient)| CurTerm { col, row, coefficient })
        .collect();

    let residual = a.sub(&approx)?;
    let residual_max = all_column_row_form(a, &residual);
    let eps_bound = eps * a.euclidean_frob_norm();
    let slack = cfg.tol.slack(a.euclidean_frob_norm());
    let certificates = vec![
        Certificate::le("column_row_residual", residual_max, bt.prefix_bound, slack),
        Certificate::le("column_row_residual_eps", residual_max, eps_bound, slack),
        Certificate::le("reconstruction", reconstruction_error, 0.0, 1e-8),
    ];
    Ok(CurDecomposition {
        approx,
        pvd,
        r,
        terms,
        reconstruction_error,
        residual_max,
        prefix_bound: bt.prefix_bound,
        eps_bound,
        certificates,
    })
}

/// `max_{c, r} |c^T X r| / (‖c‖ ‖r‖)` over the nonzero columns and rows of `a`.
pub fn all_column_row_form(a: &DenseMatrix, x: &DenseMatrix) -> f64 {
    let (m, n) = a.shape();
    let cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).filter(|c| c.iter().any(|&v| v != 0.0)).collect();
    let rows: Vec<Vec<f64>> = (0..m).map(|i| a.row(i).to_vec()).filter(|r| r.iter().any(|&v| v != 0.0)).collect();
    let mut best: f64 = 0.0;
    for c in &cols {
        let cu = unit(c);
        for r in &rows {
            let v = x.bilinear(&cu, &unit(r)).expect("shapes match").abs();
            best = best.max(v);
        }
    }
    best
}

/// Least-squares weights of `approx` over the raw `c r^T` products.
fn recover_coefficients(
    a: &DenseMatrix,
    approx: &DenseMatrix,
    used: &[(usize, usize)],
) -> Result<(Vec<f64>, f64)> {
    use nalgebra::{DMatrix, DVector};
    let scale = approx.euclidean_frob_norm().max(1.0);
    if used.is_empty() {
        return Ok((Vec::new(), approx.euclidean_frob_norm() / scale));
    }
    let (m, n) = a.shape();
    let cols: Vec<Vec<f64>> = used
        .iter()
        .map(|&(j, i)| DenseMatrix::outer(&a.column(j), a.row(i)).into_entries())
        .collect();
    let basis = DMatrix::from_fn(m * n, used.len(), |k, t| cols[t][k]);
    let target = DVector::from_column_slice(approx.entries());
    let svd = basis.clone().svd(true, true);
    let tol = 1e-12 * svd.singular_values.max().max(1e-300);
    let x = svd.solve(&target, tol).map_err(|e| PvdError::InvalidInput(e.to_string()))?;
    let err = (basis * &x - target).norm() / scale;
    Ok((x.iter().copied().collect(), err))
}

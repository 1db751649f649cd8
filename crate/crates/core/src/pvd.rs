//! Greedy projection value decomposition.
//!
//! The engine works on flattened arrays with a per-entry weighted inner
//! product, so matrices and tensors share one implementation. Each greedy
//! step asks a selector for the domain element maximizing the residual form,
//! runs one Gram-Schmidt step on its representer, and peels off the
//! projection of the residual onto the new direction.

use serde::{Deserialize, Serialize};

use crate::domain::{DomainPair, UnitDomain};
use crate::error::{mismatch, PvdError, Result};
use crate::linalg::{DenseMatrix, InnerProductPair};
use crate::tolerance::{Certificate, Tolerance};

/// Knobs shared by every PVD run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PvdConfig {
    pub tol: Tolerance,
    /// A candidate whose orthogonal part has relative norm at or below this is dependent.
    pub dependence_tol: f64,
    /// Tolerance handed to the LP solver when the cut maximizer is LP based.
    pub lp_tol: f64,
    /// Side-length cap for exhaustive enumeration in verification.
    pub brute_force_cap: usize,
}

impl Default for PvdConfig {
    fn default() -> Self {
        PvdConfig {
            tol: Tolerance::default(),
            dependence_tol: 1e-10,
            lp_tol: 1e-9,
            brute_force_cap: crate::cut::DEFAULT_BRUTE_FORCE_CAP,
        }
    }
}

/// Greedy step provider over flattened arrays.
pub(crate) trait GreedySelector {
    type Element: Clone;
    /// Best element for the residual and its (absolute) form value.
    fn select(&self, residual: &[f64]) -> Result<Option<(Self::Element, f64)>>;
    /// Flattened unit-norm representer of the element's form.
    fn representer(&self, element: &Self::Element) -> Vec<f64>;
}

pub(crate) fn weighted_dot(a: &[f64], b: &[f64], w: &[f64]) -> f64 {
    a.iter().zip(b).zip(w).map(|((x, y), z)| x * y * z).sum()
}

fn weighted_norm(a: &[f64], w: &[f64]) -> f64 {
    weighted_dot(a, a, w).max(0.0).sqrt()
}

/// Component of `candidate` orthogonal to an orthonormal `basis`, normalized,
/// or `None` when it is numerically dependent. Two Gram-Schmidt passes keep
/// the basis orthogonal to working precision.
pub(crate) fn orthogonalize(
    candidate: &[f64],
    basis: &[Vec<f64>],
    weights: &[f64],
    dependence_tol: f64,
) -> Option<Vec<f64>> {
    let original = weighted_norm(candidate, weights);
    if original == 0.0 {
        return None;
    }
    let mut v = candidate.to_vec();
    for _ in 0..2 {
        for b in basis {
            let c = weighted_dot(&v, b, weights);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
    }
    let norm = weighted_norm(&v, weights);
    if norm <= dependence_tol * original {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    Some(v)
}

/// Result of a greedy decomposition, generic over the domain element type.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Pvd<E> {
    shape: Vec<usize>,
    weights: Vec<f64>,
    source: Vec<f64>,
    selected: Vec<E>,
    projection_values: Vec<f64>,
    coefficients: Vec<f64>,
    basis: Vec<Vec<f64>>,
    representers: Vec<Vec<f64>>,
    greedy_values: Vec<f64>,
    final_residual_p_norm: f64,
    source_frob_norm: f64,
    exhausted: bool,
}

pub type PvdResult = Pvd<DomainPair>;

impl<E: Clone> Pvd<E> {
    pub(crate) fn run<S: GreedySelector<Element = E>>(
        shape: Vec<usize>,
        weights: Vec<f64>,
        source: Vec<f64>,
        selector: &S,
        max_terms: usize,
        cfg: &PvdConfig,
    ) -> Result<Self> {
        let source_frob_norm = weighted_norm(&source, &weights);
        let stop = cfg.tol.slack(source_frob_norm);
        let mut out = Pvd {
            shape,
            weights,
            source: source.clone(),
            selected: Vec::new(),
            projection_values: Vec::new(),
            coefficients: Vec::new(),
            basis: Vec::new(),
            representers: Vec::new(),
            greedy_values: Vec::new(),
            final_residual_p_norm: 0.0,
            source_frob_norm,
            exhausted: false,
        };
        if max_terms == 0 {
            // Still report whether the source is already zero on the domain.
            out.final_residual_p_norm = selector.select(&source)?.map_or(0.0, |s| s.1);
            out.exhausted = out.final_residual_p_norm <= stop;
            return Ok(out);
        }
        let mut residual = source;
        loop {
            let found = selector.select(&residual)?;
            let Some((element, value)) = found else {
                out.final_residual_p_norm = 0.0;
                out.exhausted = true;
                break;
            };
            if value <= stop || out.selected.len() == max_terms {
                out.final_residual_p_norm = value;
                out.exhausted = value <= stop;
                break;
            }
            let phi = selector.representer(&element);
            let Some(b) = orthogonalize(&phi, &out.basis, &out.weights, cfg.dependence_tol)
            else {
                // A nonzero residual form value forces independence; reaching here
                // means the residual is zero to working precision.
                out.final_residual_p_norm = value;
                out.exhausted = true;
                break;
            };
            let coef = weighted_dot(&residual, &b, &out.weights);
            for (r, x) in residual.iter_mut().zip(&b) {
                *r -= coef * x;
            }
            out.selected.push(element);
            out.projection_values.push(coef.abs());
            out.coefficients.push(coef);
            out.basis.push(b);
            out.representers.push(phi);
            out.greedy_values.push(value);
        }
        Ok(out)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    /// The greedy ordering `p_1, p_2, ...`.
    pub fn selected(&self) -> &[E] {
        &self.selected
    }

    /// Projection values `σ_1, σ_2, ...`.
    pub fn projection_values(&self) -> &[f64] {
        &self.projection_values
    }

    /// Residual domain norm found by each greedy step (before the step).
    pub fn greedy_values(&self) -> &[f64] {
        &self.greedy_values
    }

    /// Residual domain norm after the last computed term.
    pub fn final_residual_p_norm(&self) -> f64 {
        self.final_residual_p_norm
    }

    /// Whether the run stopped because the residual vanished on the domain.
    pub fn exhausted(&self) -> bool {
        self.exhausted
    }

    pub fn source_flat(&self) -> &[f64] {
        &self.source
    }

    pub fn source_frob_norm(&self) -> f64 {
        self.source_frob_norm
    }

    pub fn entry_weights(&self) -> &[f64] {
        &self.weights
    }

    /// Orthonormal basis of the span of the first `len()` selected elements.
    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn representers(&self) -> &[Vec<f64>] {
        &self.representers
    }

    /// Signed coefficients `<A, b_j>`; `σ_j = |coefficients[j]|`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// `‖ς^{(r)}‖₂`, treating values past an exhausted run as zero.
    pub fn prefix_norm(&self, r: usize) -> f64 {
        self.projection_values
            .iter()
            .take(r)
            .map(|s| s * s)
            .sum::<f64>()
            .sqrt()
    }

    /// Flattened j-th increment `Π^{(j)}A - Π^{(j-1)}A` (0-based `j`).
    pub fn increment_flat(&self, j: usize) -> Vec<f64> {
        self.basis[j].iter().map(|x| x * self.coefficients[j]).collect()
    }

    /// Flattened `Π^{(r)}A`, the sum of the first `r` increments.
    pub fn truncate_flat(&self, r: usize) -> Result<Vec<f64>> {
        if r > self.len() {
            return Err(PvdError::OutOfRange {
                index: r,
                limit: self.len(),
            });
        }
        let mut out = vec![0.0; self.source.len()];
        for j in 0..r {
            for (o, x) in out.iter_mut().zip(&self.basis[j]) {
                *o += self.coefficients[j] * x;
            }
        }
        Ok(out)
    }

    /// Picks the first `i <= r+1` with `σ_i <= ‖ς^{(r+1)}‖₂ / sqrt(r+1)` and
    /// returns `(i, Π^{(i-1)}A)`. Values past an exhausted run count as zero.
    pub fn best_truncation_flat(&self, r: usize) -> Result<(usize, Vec<f64>, f64)> {
        if self.len() < r + 1 && !self.exhausted {
            return Err(PvdError::OutOfRange {
                index: r + 1,
                limit: self.len(),
            });
        }
        let bound = self.prefix_norm(r + 1) / ((r + 1) as f64).sqrt();
        let sigma = |i: usize| self.projection_values.get(i - 1).copied().unwrap_or(0.0);
        let index = (1..=r + 1)
            .find(|&i| sigma(i) <= bound * (1.0 + 1e-12))
            .unwrap_or(r + 1);
        Ok((index, self.truncate_flat(index - 1)?, bound))
    }

    /// Recomputes `Π^{(r)}A` from scratch by solving the normal equations on the
    /// raw representers. Debug oracle for the incremental path.
    pub fn recompute_projection_flat(&self, r: usize) -> Result<Vec<f64>> {
        if r > self.len() {
            return Err(PvdError::OutOfRange {
                index: r,
                limit: self.len(),
            });
        }
        project_onto_span(&self.source, &self.representers[..r], &self.weights)
    }

    /// Max normalized Frobenius inner product between distinct increments.
    pub fn max_increment_overlap(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.len() {
            for j in 0..i {
                worst = worst.max(weighted_dot(&self.basis[i], &self.basis[j], &self.weights).abs());
            }
        }
        worst
    }
}

/// Least-squares projection of `target` onto the span of `vectors` under the
/// weighted product, via the Gram system. Dependent vectors are tolerated.
pub(crate) fn project_onto_span(
    target: &[f64],
    vectors: &[Vec<f64>],
    weights: &[f64],
) -> Result<Vec<f64>> {
    use nalgebra::{DMatrix, DVector};
    let k = vectors.len();
    if k == 0 {
        return Ok(vec![0.0; target.len()]);
    }
    let gram = DMatrix::from_fn(k, k, |i, j| weighted_dot(&vectors[i], &vectors[j], weights));
    let rhs = DVector::from_fn(k, |i, _| weighted_dot(&vectors[i], target, weights));
    let svd = gram.svd(true, true);
    let coeffs = svd
        .solve(&rhs, 1e-12 * svd.singular_values.max().max(1e-300))
        .map_err(|e| PvdError::InvalidInput(e.to_string()))?;
    let mut out = vec![0.0; target.len()];
    for (c, v) in coeffs.iter().zip(vectors) {
        for (o, x) in out.iter_mut().zip(v) {
            *o += c * x;
        }
    }
    Ok(out)
}

/// Weighted norm of the projection of `target` onto the span of `vectors`,
/// built by sweeping Gram-Schmidt over the vectors until the span fills up.
pub(crate) fn projected_norm(
    target: &[f64],
    vectors: impl IntoIterator<Item = Vec<f64>>,
    weights: &[f64],
) -> f64 {
    let dim = target.len();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        if basis.len() == dim {
            break;
        }
        if let Some(b) = orthogonalize(&v, &basis, weights, 1e-10) {
            basis.push(b);
        }
    }
    basis
        .iter()
        .map(|b| weighted_dot(target, b, weights).powi(2))
        .sum::<f64>()
        .sqrt()
}

struct MatrixSelector<'a> {
    domain: &'a UnitDomain,
    rows: usize,
    cols: usize,
    tie_tol: f64,
    lp_tol: f64,
}

impl GreedySelector for MatrixSelector<'_> {
    type Element = DomainPair;

    fn select(&self, residual: &[f64]) -> Result<Option<(DomainPair, f64)>> {
        let r = DenseMatrix::from_raw(self.rows, self.cols, residual.to_vec());
        Ok(self
            .domain
            .argmax(&r, self.tie_tol, self.lp_tol)?
            .map(|s| (s.pair, s.value)))
    }

    fn representer(&self, element: &DomainPair) -> Vec<f64> {
        element.representer(self.domain.ips())
    }
}

/// Greedy PVD of a matrix over a unit domain, stopping after `max_terms`
/// terms (clamped to `m·n`) or once the residual domain norm vanishes.
pub fn compute_pvd(
    a: &DenseMatrix,
    domain: &UnitDomain,
    max_terms: usize,
    cfg: &PvdConfig,
) -> Result<PvdResult> {
    domain.ips().check(a)?;
    let (m, n) = a.shape();
    let selector = MatrixSelector {
        domain,
        rows: m,
        cols: n,
        tie_tol: cfg.tol.abs,
        lp_tol: cfg.lp_tol,
    };
    Pvd::run(
        vec![m, n],
        domain.ips().entry_weights(),
        a.entries().to_vec(),
        &selector,
        max_terms.min(m * n),
        cfg,
    )
}

impl PvdResult {
    fn as_matrix(&self, flat: Vec<f64>) -> DenseMatrix {
        DenseMatrix::from_raw(self.shape[0], self.shape[1], flat)
    }

    pub fn increment(&self, j: usize) -> DenseMatrix {
        self.as_matrix(self.increment_flat(j))
    }

    pub fn increments(&self) -> Vec<DenseMatrix> {
        (0..self.len()).map(|j| self.increment(j)).collect()
    }

    pub fn source(&self) -> DenseMatrix {
        self.as_matrix(self.source.clone())
    }
}

/// Component of `candidate` orthogonal to an orthonormal basis of matrices,
/// normalized to unit Frobenius norm; `None` for dependent candidates.
pub fn orthogonal_increment(
    candidate: &DenseMatrix,
    basis: &[DenseMatrix],
    ips: &InnerProductPair,
    dependence_tol: f64,
) -> Result<Option<DenseMatrix>> {
    ips.check(candidate)?;
    let flat: Vec<Vec<f64>> = basis
        .iter()
        .map(|b| {
            b.check_same_shape(candidate)?;
            Ok(b.entries().to_vec())
        })
        .collect::<Result<_>>()?;
    let (m, n) = candidate.shape();
    Ok(
        orthogonalize(candidate.entries(), &flat, &ips.entry_weights(), dependence_tol)
            .map(|v| DenseMatrix::from_raw(m, n, v)),
    )
}

/// `Π^{(r)}A` as a matrix.
pub fn truncate(result: &PvdResult, r: usize) -> Result<DenseMatrix> {
    Ok(result.as_matrix(result.truncate_flat(r)?))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BestTruncation {
    pub matrix: DenseMatrix,
    /// 1-based index `i`; the matrix is `Π^{(i-1)}A` and uses `i - 1` pairs.
    pub index: usize,
    /// `‖ς^{(r+1)}‖₂ / sqrt(r+1)`.
    pub prefix_bound: f64,
    /// `‖A‖_F / sqrt(r+1)`.
    pub frob_bound: f64,
}

impl BestTruncation {
    pub fn terms(&self) -> usize {
        self.index - 1
    }
}

pub fn best_truncation(result: &PvdResult, r: usize) -> Result<BestTruncation> {
    let (index, flat, prefix_bound) = result.best_truncation_flat(r)?;
    Ok(BestTruncation {
        matrix: result.as_matrix(flat),
        index,
        prefix_bound,
        frob_bound: result.source_frob_norm / ((r + 1) as f64).sqrt(),
    })
}

/// Bound chain for one truncation level `r`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruncationCheck {
    pub r: usize,
    pub residual_p_norm: f64,
    pub prefix_bound: f64,
    pub frob_bound: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PvdVerification {
    /// `‖Π_P A‖_F`, computed independently from the whole domain.
    pub projected_norm: f64,
    /// `‖ς‖₂`.
    pub sigma_norm: f64,
    pub frobenius_gap: f64,
    pub max_increment_overlap: f64,
    /// Enumerated residual P-norm before each step.
    pub residual_p_norms: Vec<f64>,
    /// `max_j (‖A - Π^{(j-1)}A‖_P - σ_j)`.
    pub max_lemma_gap: f64,
    pub chain: Vec<TruncationCheck>,
    pub certificates: Vec<Certificate>,
}

impl PvdVerification {
    pub fn passes(&self) -> bool {
        crate::tolerance::all_pass(&self.certificates)
    }
}

/// Audits a PVD against its domain by enumeration: the Frobenius identity
/// (only when the run is exhausted), orthogonality of increments, the
/// per-step residual bound, and the truncation chain for every `r`.
pub fn verify_pvd(result: &PvdResult, domain: &UnitDomain, cfg: &PvdConfig) -> Result<PvdVerification> {
    let a = result.source();
    domain.ips().check(&a)?;
    if result.shape() != [a.rows(), a.cols()] {
        return Err(mismatch(format!("{:?}", result.shape()), format!("{:?}", a.shape())));
    }
    let ips = domain.ips();
    let exact_p_norm = |x: &DenseMatrix| -> Result<f64> {
        match domain {
            UnitDomain::Cut { ips, .. } => {
                crate::domain::cut_p_norm_enumerated(x, ips, cfg.brute_force_cap)
            }
            _ => crate::domain::p_norm(x, domain, cfg.tol.abs, cfg.lp_tol),
        }
    };
    let weights = ips.entry_weights();
    let projected_norm = match domain {
        UnitDomain::FullSphere { .. } => result.source_frob_norm,
        _ => {
            let pairs = domain.enumerate(cfg.brute_force_cap)?;
            projected_norm(a.entries(), pairs.iter().map(|p| p.representer(ips)), &weights)
        }
    };
    let sigma_norm = result.prefix_norm(result.len());
    let scale = result.source_frob_norm;
    let slack = cfg.tol.slack(scale);
    let mut certificates = Vec::new();
    let frobenius_gap = (sigma_norm - projected_norm).abs();
    if result.exhausted() {
        certificates.push(Certificate::le("frobenius_identity", frobenius_gap, 0.0, 1e-8 * scale.max(1.0)));
    }
    certificates.push(Certificate::le("energy_bound", sigma_norm, projected_norm, slack));
    let overlap = result.max_increment_overlap();
    certificates.push(Certificate::le("increment_orthogonality", overlap, 0.0, 1e-8));

    let mut residual_p_norms = Vec::with_capacity(result.len() + 1);
    let mut max_lemma_gap = f64::NEG_INFINITY;
    for j in 0..=result.len() {
        let residual = a.sub(&truncate(result, j)?)?;
        residual_p_norms.push(exact_p_norm(&residual)?);
    }
    for (j, &sigma) in result.projection_values().iter().enumerate() {
        let gap = residual_p_norms[j] - sigma;
        max_lemma_gap = max_lemma_gap.max(gap);
        certificates.push(Certificate::le(
            format!("residual_bound_step_{}", j + 1),
            residual_p_norms[j],
            sigma,
            slack,
        ));
    }
    if result.is_empty() {
        max_lemma_gap = 0.0;
    }

    let max_r = if result.exhausted() { result.len() } else { result.len().saturating_sub(1) };
    let mut chain = Vec::new();
    for r in 0..=max_r {
        let bt = best_truncation(result, r)?;
        let residual_p_norm = exact_p_norm(&a.sub(&bt.matrix)?)?;
        certificates.push(Certificate::le(
            format!("truncation_r{r}_prefix"),
            residual_p_norm,
            bt.prefix_bound,
            slack,
        ));
        certificates.push(Certificate::le(
            format!("truncation_r{r}_frobenius"),
            bt.prefix_bound,
            bt.frob_bound,
            slack,
        ));
        chain.push(TruncationCheck {
            r,
            residual_p_norm,
            prefix_bound: bt.prefix_bound,
            frob_bound: bt.frob_bound,
        });
    }
    Ok(PvdVerification {
        projected_norm,
        sigma_norm,
        frobenius_gap,
        max_increment_overlap: overlap,
        residual_p_norms,
        max_lemma_gap,
        chain,
        certificates,
    })
}

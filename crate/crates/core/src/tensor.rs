//! Tensor PVD over tuple domains.
//!
//! Tensors are stored flattened (last index fastest) and share the greedy
//! engine with matrices. Mode `k` carries a diagonal inner product `D_k`;
//! the entry weights of the flattened Frobenius product are `1/∏ d_k`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{mismatch, PvdError, Result};
use crate::linalg::DiagonalInnerProduct;
use crate::parallel;
use crate::pvd::{projected_norm, weighted_dot, GreedySelector, Pvd, PvdConfig};
use crate::subset::{cmp_subset_tuples, indices_to_indicator, mask_to_indices};
use crate::tolerance::{all_pass, Certificate};

/// Upper bound on the number of enumerated tuples.
pub const MAX_TUPLES: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseTensor {
    dims: Vec<usize>,
    entries: Vec<f64>,
}

impl DenseTensor {
    pub fn new(dims: Vec<usize>, entries: Vec<f64>) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(PvdError::InvalidInput(
                "tensors need at least two modes of positive size".into(),
            ));
        }
        let count: usize = dims.iter().product();
        if entries.len() != count {
            return Err(mismatch(count, entries.len()));
        }
        if let Some(k) = entries.iter().position(|v| !v.is_finite()) {
            return Err(PvdError::NonFinite(k));
        }
        Ok(DenseTensor { dims, entries })
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        let count = dims.iter().product();
        Self::new(dims, vec![0.0; count])
    }

    /// `x¹ ⊗ x² ⊗ ... ⊗ x^s`.
    pub fn outer(vectors: &[Vec<f64>]) -> Result<Self> {
        let dims: Vec<usize> = vectors.iter().map(Vec::len).collect();
        let mut entries = vec![1.0];
        for v in vectors {
            entries = entries
                .iter()
                .flat_map(|a| v.iter().map(move |b| a * b))
                .collect();
        }
        Self::new(dims, entries)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn sub(&self, other: &DenseTensor) -> Result<Self> {
        if self.dims != other.dims {
            return Err(mismatch(format!("{:?}", self.dims), format!("{:?}", other.dims)));
        }
        Ok(DenseTensor {
            dims: self.dims.clone(),
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect(),
        })
    }
}

fn contract(dims: &[usize], entries: &[f64], vectors: &[&[f64]]) -> f64 {
    // Fold the last mode into the previous ones, one mode at a time.
    let mut cur = entries.to_vec();
    for (k, v) in vectors.iter().enumerate().rev() {
        let n = dims[k];
        cur = cur.chunks(n).map(|c| c.iter().zip(*v).map(|(a, b)| a * b).sum()).collect();
    }
    cur[0]
}

/// `T(x¹, ..., x^s) = Σ T_{i₁…i_s} x¹_{i₁} ⋯ x^s_{i_s}`.
pub fn s_form(t: &DenseTensor, vectors: &[Vec<f64>]) -> Result<f64> {
    if vectors.len() != t.order() {
        return Err(mismatch(t.order(), vectors.len()));
    }
    for (v, &d) in vectors.iter().zip(&t.dims) {
        if v.len() != d {
            return Err(mismatch(d, v.len()));
        }
    }
    let refs: Vec<&[f64]> = vectors.iter().map(Vec::as_slice).collect();
    Ok(contract(&t.dims, &t.entries, &refs))
}

/// Euclidean root-sum-square of the entries.
pub fn tensor_frob_norm(t: &DenseTensor) -> f64 {
    t.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TupleLabel {
    Cut { sets: Vec<Vec<usize>> },
    Explicit { index: usize },
}

/// One s-tuple of (unnormalized) vectors with their per-mode norms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TupleElement {
    pub label: TupleLabel,
    pub vectors: Vec<Vec<f64>>,
    pub norms: Vec<f64>,
}

impl TupleElement {
    fn new(label: TupleLabel, vectors: Vec<Vec<f64>>, modes: &[DiagonalInnerProduct]) -> Result<Self> {
        if vectors.len() != modes.len() {
            return Err(mismatch(modes.len(), vectors.len()));
        }
        let norms = vectors
            .iter()
            .zip(modes)
            .map(|(v, d)| d.norm(v))
            .collect::<Result<Vec<_>>>()?;
        if norms.contains(&0.0) {
            return Err(PvdError::InvalidInput("tuple vectors must be nonzero".into()));
        }
        Ok(TupleElement { label, vectors, norms })
    }

    fn unit(&self) -> Vec<Vec<f64>> {
        self.vectors
            .iter()
            .zip(&self.norms)
            .map(|(v, n)| v.iter().map(|x| x / n).collect())
            .collect()
    }

    /// `|T(x̂¹, ..., x̂^s)|` on flattened entries.
    fn form_flat(&self, dims: &[usize], entries: &[f64]) -> f64 {
        let refs: Vec<&[f64]> = self.vectors.iter().map(Vec::as_slice).collect();
        contract(dims, entries, &refs).abs() / self.norms.iter().product::<f64>()
    }

    pub fn form(&self, t: &DenseTensor) -> f64 {
        self.form_flat(&t.dims, &t.entries)
    }

    /// Flattened `⊗_k (D_k x̂_k)`.
    pub fn representer(&self, modes: &[DiagonalInnerProduct]) -> Vec<f64> {
        let scaled: Vec<Vec<f64>> = self
            .unit()
            .iter()
            .zip(modes)
            .map(|(v, d)| d.apply(v))
            .collect();
        DenseTensor::outer(&scaled)
            .expect("element dims match the modes")
            .entries
    }

    fn key_cmp(&self, other: &TupleElement) -> Ordering {
        match (&self.label, &other.label) {
            (TupleLabel::Cut { sets: a }, TupleLabel::Cut { sets: b }) => cmp_subset_tuples(a, b),
            (TupleLabel::Explicit { index: a }, TupleLabel::Explicit { index: b }) => a.cmp(b),
            _ => Ordering::Equal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TupleDomain {
    /// Every tuple of nonempty cut vectors, normalized per mode.
    CutTuples { modes: Vec<DiagonalInnerProduct> },
    ExplicitTuples {
        modes: Vec<DiagonalInnerProduct>,
        tuples: Vec<TupleElement>,
    },
}

impl TupleDomain {
    pub fn cut(modes: Vec<DiagonalInnerProduct>) -> Self {
        TupleDomain::CutTuples { modes }
    }

    pub fn cut_euclidean(dims: &[usize]) -> Self {
        Self::cut(dims.iter().map(|&n| DiagonalInnerProduct::euclidean(n)).collect())
    }

    pub fn explicit(modes: Vec<DiagonalInnerProduct>, tuples: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let tuples = tuples
            .into_iter()
            .enumerate()
            .map(|(index, v)| TupleElement::new(TupleLabel::Explicit { index }, v, &modes))
            .collect::<Result<Vec<_>>>()?;
        if tuples.is_empty() {
            return Err(PvdError::InvalidInput("explicit tuple domain is empty".into()));
        }
        Ok(TupleDomain::ExplicitTuples { modes, tuples })
    }

    pub fn modes(&self) -> &[DiagonalInnerProduct] {
        match self {
            TupleDomain::CutTuples { modes } | TupleDomain::ExplicitTuples { modes, .. } => modes,
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        self.modes().iter().map(DiagonalInnerProduct::dim).collect()
    }

    /// Flattened entry weights `1/∏ d_k(i_k)`.
    pub fn entry_weights(&self) -> Vec<f64> {
        let mut w = vec![1.0];
        for d in self.modes() {
            w = w
                .iter()
                .flat_map(|a| d.weights().iter().map(move |b| a / b))
                .collect();
        }
        w
    }

    /// `√∏_k <1, 1>_{D_k}`.
    pub fn ones_mass(&self) -> f64 {
        self.modes().iter().map(|d| d.total()).product::<f64>().sqrt()
    }

    /// Every element in canonical order.
    pub fn enumerate(&self) -> Result<Vec<TupleElement>> {
        match self {
            TupleDomain::ExplicitTuples { tuples, .. } => Ok(tuples.clone()),
            TupleDomain::CutTuples { modes } => {
                let counts: Vec<usize> = modes
                    .iter()
                    .map(|d| (1usize << d.dim().min(62)) - 1)
                    .collect();
                let estimate: f64 = modes.iter().map(|d| 2f64.powi(d.dim() as i32) - 1.0).product();
                if estimate > MAX_TUPLES as f64 {
                    return Err(PvdError::GridTooLarge {
                        estimate,
                        limit: MAX_TUPLES as f64,
                    });
                }
                let total = estimate as usize;
                (0..total)
                    .map(|mut idx| {
                        // The first mode varies slowest, so the list is in lexicographic mask order.
                        let mut masks = vec![0usize; counts.len()];
                        for k in (0..counts.len()).rev() {
                            masks[k] = idx % counts[k] + 1;
                            idx /= counts[k];
                        }
                        let sets: Vec<Vec<usize>> = masks
                            .iter()
                            .zip(modes)
                            .map(|(&m, d)| mask_to_indices(m as u64, d.dim()))
                            .collect();
                        let vectors = sets
                            .iter()
                            .zip(modes)
                            .map(|(s, d)| indices_to_indicator(s, d.dim()))
                            .collect();
                        TupleElement::new(TupleLabel::Cut { sets }, vectors, modes)
                    })
                    .collect()
            }
        }
    }

    fn check(&self, t: &DenseTensor) -> Result<()> {
        if self.dims() != t.dims {
            return Err(mismatch(format!("{:?}", self.dims()), format!("{:?}", t.dims)));
        }
        Ok(())
    }
}

/// `max` over the domain of `|T(x̂¹, ..., x̂^s)|` by enumeration.
pub fn tensor_p_norm(t: &DenseTensor, domain: &TupleDomain) -> Result<f64> {
    domain.check(t)?;
    let elements = domain.enumerate()?;
    Ok(parallel::map_slice(&elements, |e| e.form(t))
        .into_iter()
        .fold(0.0, f64::max))
}

struct TupleSelector<'a> {
    dims: Vec<usize>,
    modes: &'a [DiagonalInnerProduct],
    elements: Vec<TupleElement>,
    tie_tol: f64,
}

impl GreedySelector for TupleSelector<'_> {
    type Element = TupleElement;

    fn select(&self, residual: &[f64]) -> Result<Option<(TupleElement, f64)>> {
        let values = parallel::map_slice(&self.elements, |e| e.form_flat(&self.dims, residual));
        let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(self
            .elements
            .iter()
            .zip(values)
            .filter(|(_, v)| *v >= best - self.tie_tol)
            .min_by(|a, b| a.0.key_cmp(b.0))
            .map(|(e, v)| (e.clone(), v)))
    }

    fn representer(&self, element: &TupleElement) -> Vec<f64> {
        element.representer(self.modes)
    }
}

pub type TensorPvd = Pvd<TupleElement>;

/// Greedy PVD of a tensor over a tuple domain.
pub fn tensor_pvd(
    t: &DenseTensor,
    domain: &TupleDomain,
    max_terms: usize,
    cfg: &PvdConfig,
) -> Result<TensorPvd> {
    domain.check(t)?;
    let selector = TupleSelector {
        dims: t.dims.clone(),
        modes: domain.modes(),
        elements: domain.enumerate()?,
        tie_tol: cfg.tol.abs,
    };
    Pvd::run(
        t.dims.clone(),
        domain.entry_weights(),
        t.entries.clone(),
        &selector,
        max_terms.min(t.entries.len()),
        cfg,
    )
}

/// `T̂` from the best truncation at level `r`, with the bounds it satisfies.
pub fn tensor_best_truncation(result: &TensorPvd, r: usize) -> Result<(DenseTensor, usize, f64)> {
    let (index, flat, bound) = result.best_truncation_flat(r)?;
    Ok((DenseTensor::new(result.shape().to_vec(), flat)?, index, bound))
}

/// Increment-form value `|(Π_{P^{(j)} ∪ {p}} T - Π_{P^{(j)}} T)(p)|` for a
/// candidate `p`, given the state after `j` terms. Used to check that it
/// agrees with the residual form the engine maximizes.
pub fn increment_form(
    result: &TensorPvd,
    j: usize,
    candidate: &TupleElement,
    domain: &TupleDomain,
) -> Result<f64> {
    let weights = domain.entry_weights();
    let basis = &result.basis()[..j];
    let phi = candidate.representer(domain.modes());
    let residual: Vec<f64> = result
        .source_flat()
        .iter()
        .zip(result.truncate_flat(j)?)
        .map(|(a, b)| a - b)
        .collect();
    let Some(b) = crate::pvd::orthogonalize(&phi, basis, &weights, 1e-10) else {
        return Ok(0.0);
    };
    let coef = weighted_dot(&residual, &b, &weights);
    let increment: Vec<f64> = b.iter().map(|x| coef * x).collect();
    Ok(candidate.form_flat(result.shape(), &increment))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TensorVerification {
    pub projected_norm: f64,
    pub sigma_norm: f64,
    pub residual_p_norms: Vec<f64>,
    pub certificates: Vec<Certificate>,
}

impl TensorVerification {
    pub fn passes(&self) -> bool {
        all_pass(&self.certificates)
    }
}

fn residual_tensor(result: &TensorPvd, flat: &[f64]) -> Result<DenseTensor> {
    DenseTensor::new(
        result.shape().to_vec(),
        result.source_flat().iter().zip(flat).map(|(a, b)| a - b).collect(),
    )
}

/// Frobenius identity (at exhaustion), per-step residual bound, and the
/// truncation chain for every `r` up to `max_r`.
pub fn tensor_bound_check(
    result: &TensorPvd,
    domain: &TupleDomain,
    max_r: usize,
    cfg: &PvdConfig,
) -> Result<TensorVerification> {
    let weights = domain.entry_weights();
    let elements = domain.enumerate()?;
    let source = result.source_flat();
    let projected = projected_norm(
        source,
        elements.iter().map(|e| e.representer(domain.modes())),
        &weights,
    );
    let sigma_norm = result.prefix_norm(result.len());
    let scale = result.source_frob_norm();
    let slack = cfg.tol.slack(scale);
    let mut certificates = Vec::new();
    if result.exhausted() {
        certificates.push(Certificate::le(
            "frobenius_identity",
            (sigma_norm - projected).abs(),
            0.0,
            1e-8 * scale.max(1.0),
        ));
    }
    let mut residual_p_norms = Vec::new();
    for j in 0..=result.len() {
        let res = residual_tensor(result, &result.truncate_flat(j)?)?;
        residual_p_norms.push(tensor_p_norm(&res, domain)?);
    }
    for (j, &sigma) in result.projection_values().iter().enumerate() {
        certificates.push(Certificate::le(
            format!("residual_bound_step_{}", j + 1),
            residual_p_norms[j],
            sigma,
            slack,
        ));
    }
    let reachable = if result.exhausted() { max_r } else { max_r.min(result.len().saturating_sub(1)) };
    for r in 0..=reachable {
        let (approx, _, bound) = tensor_best_truncation(result, r)?;
        let res = residual_tensor(result, approx.entries())?;
        let p = tensor_p_norm(&res, domain)?;
        let frob = scale / ((r + 1) as f64).sqrt();
        certificates.push(Certificate::le(format!("truncation_r{r}_prefix"), p, bound, slack));
        certificates.push(Certificate::le(format!("truncation_r{r}_frobenius"), bound, frob, slack));
    }
    Ok(TensorVerification {
        projected_norm: projected,
        sigma_norm,
        residual_p_norms,
        certificates,
    })
}

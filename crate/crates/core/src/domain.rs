//! Unit domains: the restricted sets of vector pairs a PVD draws from.
//!
//! Each pair `(v, w)` is kept unnormalized together with its norms under the
//! attached inner products. The rank-one element it contributes to the span is
//! the representer of `X -> v̂^T X ŵ` in the weighted Frobenius geometry,
//! `(D v̂)(E ŵ)^T`, which has unit Frobenius norm and reduces to `v̂ ŵ^T` for
//! Euclidean weights.

use serde::{Deserialize, Serialize};

use crate::cut::{self, CutPair, DEFAULT_BRUTE_FORCE_CAP};
use crate::error::{PvdError, Result};
use crate::linalg::{top_singular_triple, whitened, DenseMatrix, InnerProductPair};
use crate::parallel;
use crate::subset::{cmp_subsets, indices_to_indicator, mask_to_indices};

/// What a domain element is, independent of its numeric vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PairLabel {
    Cut { rows: Vec<usize>, cols: Vec<usize> },
    ColumnRow { col: usize, row: usize },
    Explicit { index: usize },
    Sphere,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainPair {
    pub label: PairLabel,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub left_norm: f64,
    pub right_norm: f64,
}

impl DomainPair {
    pub fn new(
        label: PairLabel,
        left: Vec<f64>,
        right: Vec<f64>,
        ips: &InnerProductPair,
    ) -> Result<Self> {
        let left_norm = ips.left.norm(&left)?;
        let right_norm = ips.right.norm(&right)?;
        if left_norm == 0.0 || right_norm == 0.0 {
            return Err(PvdError::InvalidInput("domain vectors must be nonzero".into()));
        }
        Ok(DomainPair {
            label,
            left,
            right,
            left_norm,
            right_norm,
        })
    }

    pub fn cut(rows: Vec<usize>, cols: Vec<usize>, ips: &InnerProductPair) -> Result<Self> {
        let (m, n) = ips.shape();
        let left = indices_to_indicator(&rows, m);
        let right = indices_to_indicator(&cols, n);
        Self::new(PairLabel::Cut { rows, cols }, left, right, ips)
    }

    pub fn unit_left(&self) -> Vec<f64> {
        self.left.iter().map(|v| v / self.left_norm).collect()
    }

    pub fn unit_right(&self) -> Vec<f64> {
        self.right.iter().map(|v| v / self.right_norm).collect()
    }

    /// `|v̂^T X ŵ|`.
    pub fn form(&self, x: &DenseMatrix) -> f64 {
        x.bilinear(&self.left, &self.right)
            .expect("pair dims checked at construction")
            .abs()
            / (self.left_norm * self.right_norm)
    }

    /// Flattened `(D v̂)(E ŵ)^T`.
    pub fn representer(&self, ips: &InnerProductPair) -> Vec<f64> {
        let l = ips.left.apply(&self.unit_left());
        let r = ips.right.apply(&self.unit_right());
        DenseMatrix::outer(&l, &r).into_entries()
    }

    fn ordering_key_cmp(&self, other: &DomainPair) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match (&self.label, &other.label) {
            (PairLabel::Cut { rows: r1, cols: c1 }, PairLabel::Cut { rows: r2, cols: c2 }) => {
                cmp_subsets(r1, r2).then_with(|| cmp_subsets(c1, c2))
            }
            (PairLabel::ColumnRow { col: a, row: b }, PairLabel::ColumnRow { col: c, row: d }) => {
                (a, b).cmp(&(c, d))
            }
            (PairLabel::Explicit { index: a }, PairLabel::Explicit { index: b }) => a.cmp(b),
            _ => Ordering::Equal,
        }
    }
}

/// Greedy-step strategy for the cut domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CutMaximizer {
    /// Exhaustive enumeration of subset pairs; exact.
    BruteForce { cap: usize },
    /// Ratio-enumerated LP with threshold rounding; needs integral weights.
    LpExact,
    /// Geometric ratio grid with step `1 + eps`.
    LpApprox { eps: f64 },
}

impl Default for CutMaximizer {
    fn default() -> Self {
        CutMaximizer::BruteForce {
            cap: DEFAULT_BRUTE_FORCE_CAP,
        }
    }
}

impl CutMaximizer {
    pub fn is_exact(&self) -> bool {
        matches!(self, CutMaximizer::BruteForce { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UnitDomain {
    /// All pairs of normalized cut vectors.
    Cut {
        ips: InnerProductPair,
        maximizer: CutMaximizer,
    },
    /// Normalized (column, row) pairs taken from a source matrix.
    ColumnRow {
        ips: InnerProductPair,
        pairs: Vec<DomainPair>,
    },
    /// A caller-supplied list of pairs.
    Explicit {
        ips: InnerProductPair,
        pairs: Vec<DomainPair>,
    },
    /// Every pair of unit vectors; the greedy step is a top singular pair.
    FullSphere { ips: InnerProductPair },
}

/// A selected element together with the residual form value it achieved.
#[derive(Debug, Clone)]
pub struct Selection {
    pub pair: DomainPair,
    pub value: f64,
}

impl UnitDomain {
    pub fn cut(ips: InnerProductPair) -> Self {
        UnitDomain::Cut {
            ips,
            maximizer: CutMaximizer::default(),
        }
    }

    pub fn cut_with(ips: InnerProductPair, maximizer: CutMaximizer) -> Self {
        UnitDomain::Cut { ips, maximizer }
    }

    pub fn full_sphere(ips: InnerProductPair) -> Self {
        UnitDomain::FullSphere { ips }
    }

    /// Builds an explicit domain; pairs are normalized under `ips`.
    pub fn explicit(ips: InnerProductPair, vectors: Vec<(Vec<f64>, Vec<f64>)>) -> Result<Self> {
        let pairs = vectors
            .into_iter()
            .enumerate()
            .map(|(index, (l, r))| DomainPair::new(PairLabel::Explicit { index }, l, r, &ips))
            .collect::<Result<Vec<_>>>()?;
        if pairs.is_empty() {
            return Err(PvdError::InvalidInput("explicit domain is empty".into()));
        }
        Ok(UnitDomain::Explicit { ips, pairs })
    }

    pub fn ips(&self) -> &InnerProductPair {
        match self {
            UnitDomain::Cut { ips, .. }
            | UnitDomain::ColumnRow { ips, .. }
            | UnitDomain::Explicit { ips, .. }
            | UnitDomain::FullSphere { ips } => ips,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            UnitDomain::Cut { .. } => "cut",
            UnitDomain::ColumnRow { .. } => "column_row",
            UnitDomain::Explicit { .. } => "explicit",
            UnitDomain::FullSphere { .. } => "full_sphere",
        }
    }

    /// Whether the greedy step returns the exact maximizer.
    pub fn has_exact_maximizer(&self) -> bool {
        match self {
            UnitDomain::Cut { maximizer, .. } => maximizer.is_exact(),
            _ => true,
        }
    }

    /// Every element, in canonical order. Not available for the full sphere.
    pub fn enumerate(&self, cap: usize) -> Result<Vec<DomainPair>> {
        match self {
            UnitDomain::Cut { ips, .. } => {
                let (m, n) = ips.shape();
                let cap = cap.min(crate::subset::MAX_ENUMERATION_BITS);
                if m > cap || n > cap {
                    return Err(PvdError::SizeCap { size: m.max(n), cap });
                }
                let mut out = Vec::with_capacity(((1usize << m) - 1) * ((1usize << n) - 1));
                for s in 1u64..(1 << m) {
                    for t in 1u64..(1 << n) {
                        out.push(DomainPair::cut(
                            mask_to_indices(s, m),
                            mask_to_indices(t, n),
                            ips,
                        )?);
                    }
                }
                Ok(out)
            }
            UnitDomain::ColumnRow { pairs, .. } | UnitDomain::Explicit { pairs, .. } => {
                Ok(pairs.clone())
            }
            UnitDomain::FullSphere { .. } => Err(PvdError::UnsupportedDomain(
                "the full sphere is not enumerable".into(),
            )),
        }
    }

    /// Greedy step: the element maximizing `|v̂^T R ŵ|`, ties within `tie_tol`
    /// going to the canonically smallest element.
    pub fn argmax(
        &self,
        residual: &DenseMatrix,
        tie_tol: f64,
        lp_tol: f64,
    ) -> Result<Option<Selection>> {
        self.ips().check(residual)?;
        match self {
            UnitDomain::Cut { ips, maximizer } => {
                let pair = match *maximizer {
                    CutMaximizer::BruteForce { cap } => cut::normalized_cut_bruteforce(
                        residual, &ips.left, &ips.right, cap, tie_tol,
                    )?,
                    CutMaximizer::LpExact => {
                        let (Some(l), Some(r)) = (
                            cut::as_integral(ips.left.weights()),
                            cut::as_integral(ips.right.weights()),
                        ) else {
                            return Err(PvdError::UnsupportedDomain(
                                "exact LP maximizer needs integral weights".into(),
                            ));
                        };
                        cut::cut_lp_exact(residual, &l, &r, lp_tol, tie_tol)?.pair
                    }
                    CutMaximizer::LpApprox { eps } => {
                        cut::cut_lp_approx(residual, &ips.left, &ips.right, eps, lp_tol, tie_tol)?
                            .pair
                    }
                };
                Ok(Some(cut_selection(pair, residual, ips)?))
            }
            UnitDomain::ColumnRow { pairs, .. } | UnitDomain::Explicit { pairs, .. } => {
                let values = parallel::map_slice(pairs, |p| p.form(residual));
                let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                Ok(pairs
                    .iter()
                    .zip(values)
                    .filter(|(_, v)| *v >= best - tie_tol)
                    .min_by(|a, b| a.0.ordering_key_cmp(b.0))
                    .map(|(p, value)| Selection {
                        pair: p.clone(),
                        value,
                    }))
            }
            UnitDomain::FullSphere { ips } => {
                let w = whitened(residual, ips)?;
                let (sigma, u, v) = top_singular_triple(&w);
                let left: Vec<f64> = u
                    .iter()
                    .zip(ips.left.weights())
                    .map(|(x, d)| x / d.sqrt())
                    .collect();
                let right: Vec<f64> = v
                    .iter()
                    .zip(ips.right.weights())
                    .map(|(x, e)| x / e.sqrt())
                    .collect();
                if sigma == 0.0 {
                    return Ok(None);
                }
                let pair = DomainPair::new(PairLabel::Sphere, left, right, ips)?;
                Ok(Some(Selection { pair, value: sigma }))
            }
        }
    }
}

fn cut_selection(pair: CutPair, residual: &DenseMatrix, ips: &InnerProductPair) -> Result<Selection> {
    let dp = DomainPair::cut(pair.rows, pair.cols, ips)?;
    let value = dp.form(residual);
    Ok(Selection { pair: dp, value })
}

/// `max_{(v,w) in P} |v̂^T A ŵ|`.
pub fn p_norm(a: &DenseMatrix, domain: &UnitDomain, tie_tol: f64, lp_tol: f64) -> Result<f64> {
    Ok(domain
        .argmax(a, tie_tol, lp_tol)?
        .map_or(0.0, |s| s.value))
}

/// Cut-domain P-norm checked by direct enumeration of every subset pair.
pub fn cut_p_norm_enumerated(a: &DenseMatrix, ips: &InnerProductPair, cap: usize) -> Result<f64> {
    Ok(cut::normalized_cut_bruteforce(a, &ips.left, &ips.right, cap, 0.0)?.value)
}

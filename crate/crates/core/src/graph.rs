//! Graph-class statistics and cut-pseudorandomness profiles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{CutMaximizer, UnitDomain};
use crate::error::{PvdError, Result};
use crate::linalg::{
    frob_norm, symmetric_eigenvalues, whitened, DenseMatrix, DiagonalInnerProduct,
    InnerProductPair,
};
use crate::parallel;
use crate::pvd::{compute_pvd, PvdConfig};
use crate::regularity::{cut_norm, Partition};
use crate::tolerance::Certificate;

const SYMMETRY_TOL: f64 = 1e-9;

fn require_symmetric(a: &DenseMatrix) -> Result<()> {
    if !a.is_square() || !a.is_symmetric(SYMMETRY_TOL) {
        return Err(PvdError::InvalidInput("matrix must be square and symmetric".into()));
    }
    Ok(())
}

fn require_graph(a: &DenseMatrix) -> Result<()> {
    require_symmetric(a)?;
    if !a.is_nonnegative() {
        return Err(PvdError::InvalidInput("adjacency weights must be nonnegative".into()));
    }
    Ok(())
}

/// `Σ λ²` over eigenvalues `λ > eps` of `D^{-1/2} A D^{-1/2}`.
pub fn threshold_rank(a: &DenseMatrix, eps: f64) -> Result<f64> {
    require_graph(a)?;
    let d = DiagonalInnerProduct::degree(a)?;
    let w = whitened(a, &InnerProductPair::symmetric(d))?;
    // The spectrum lies in [-1, 1]; clamp rounding noise at the top.
    Ok(symmetric_eigenvalues(&w)
        .into_iter()
        .map(|l| l.min(1.0))
        .filter(|&l| l > eps)
        .map(|l| l * l)
        .sum())
}

/// `Σ A_ij² / ((d_i + d̄)(d_j + d̄))`.
pub fn core_density(a: &DenseMatrix) -> Result<f64> {
    require_graph(a)?;
    let d = a.row_sums();
    let avg = d.iter().sum::<f64>() / d.len() as f64;
    if avg <= 0.0 {
        return Err(PvdError::InvalidInput("core density of an empty graph".into()));
    }
    let mut total = 0.0;
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let v = a.get(i, j);
            total += v * v / ((d[i] + avg) * (d[j] + avg));
        }
    }
    Ok(total)
}

/// `‖A‖_F²` under `D + d̄ I`; equal to the core density.
pub fn core_density_via_frobenius(a: &DenseMatrix) -> Result<f64> {
    let ip = DiagonalInnerProduct::degree_plus_average(a)?;
    Ok(frob_norm(a, &InnerProductPair::symmetric(ip))?.powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PartitionSearch {
    /// Every set partition into at most `⌊1/eta⌋` parts.
    Exhaustive,
    /// Uniformly random labelings; only detects violations.
    Sampled { draws: usize, seed: u64 },
}

impl PartitionSearch {
    pub const DEFAULT_DRAWS: usize = 10_000;
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UpperRegularityCheck {
    pub p: f64,
    pub eta: f64,
    pub max_parts: usize,
    pub worst_ratio: f64,
    pub witness: Partition,
    pub inspected: usize,
    /// True only for exhaustive searches.
    pub is_certificate: bool,
}

fn lp_ratio(a: &DenseMatrix, labels: &[usize], q: usize, p: f64, mass: f64) -> f64 {
    let n = labels.len() as f64;
    let mut sizes = vec![0usize; q];
    for &l in labels {
        sizes[l] += 1;
    }
    let mut block = vec![0.0; q * q];
    for (i, &li) in labels.iter().enumerate() {
        for (j, &lj) in labels.iter().enumerate() {
            block[li * q + lj] += a.get(i, j);
        }
    }
    let mut total = 0.0;
    for x in 0..q {
        for y in 0..q {
            let size = (sizes[x] * sizes[y]) as f64;
            if size > 0.0 {
                total += size / (n * n) * (block[x * q + y] / size).abs().powf(p);
            }
        }
    }
    total.powf(1.0 / p) / (mass / (n * n))
}

fn labels_to_partition(labels: &[usize]) -> Partition {
    let mut remap: Vec<Option<usize>> = vec![None; labels.len().max(1)];
    let mut parts: Vec<Vec<usize>> = Vec::new();
    for (i, &l) in labels.iter().enumerate() {
        let k = *remap[l].get_or_insert_with(|| {
            parts.push(Vec::new());
            parts.len() - 1
        });
        parts[k].push(i);
    }
    Partition {
        parts,
        provenance: Vec::new(),
    }
}

/// Restricted-growth strings of length `n` with at most `q` distinct labels.
fn restricted_growth_strings(n: usize, q: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    fn rec(pos: usize, used: usize, q: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        for l in 0..(used + 1).min(q) {
            cur[pos] = l;
            rec(pos + 1, used.max(l + 1), q, cur, out);
        }
    }
    if n > 0 {
        rec(0, 0, q, &mut cur, &mut out);
    }
    out
}

/// Number of set partitions of `n` elements into at most `q` parts.
fn partition_count(n: usize, q: usize) -> f64 {
    // Stirling numbers of the second kind by the usual recurrence.
    let mut s = vec![vec![0.0f64; q + 1]; n + 1];
    s[0][0] = 1.0;
    for i in 1..=n {
        for k in 1..=q.min(i) {
            s[i][k] = k as f64 * s[i - 1][k] + s[i - 1][k - 1];
        }
    }
    s[n].iter().sum()
}

/// Worst normalized `L_p` block-density ratio over partitions into at most
/// `⌊1/eta⌋` parts.
pub fn lp_upper_regularity_check(
    a: &DenseMatrix,
    p: f64,
    eta: f64,
    search: PartitionSearch,
    enumeration_cap: f64,
) -> Result<UpperRegularityCheck> {
    require_graph(a)?;
    if !(p > 1.0 && p.is_finite()) {
        return Err(PvdError::InvalidInput(format!("p must exceed 1, got {p}")));
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(PvdError::InvalidInput(format!("eta must lie in (0, 1], got {eta}")));
    }
    let n = a.rows();
    let q = (1.0 / eta + 1e-12).floor() as usize;
    if q > n {
        return Err(PvdError::InvalidInput(format!(
            "partitions into {q} parts need at least {q} vertices, found {n}"
        )));
    }
    let mass: f64 = a.row_sums().iter().sum();
    if mass <= 0.0 {
        return Err(PvdError::InvalidInput("cut norm of an empty graph is zero".into()));
    }
    let (candidates, is_certificate): (Vec<Vec<usize>>, bool) = match search {
        PartitionSearch::Exhaustive => {
            let count = partition_count(n, q);
            if count > enumeration_cap {
                return Err(PvdError::GridTooLarge {
                    estimate: count,
                    limit: enumeration_cap,
                });
            }
            (restricted_growth_strings(n, q), true)
        }
        PartitionSearch::Sampled { draws, seed } => {
            if draws == 0 {
                return Err(PvdError::InvalidInput("sampled search needs at least one draw".into()));
            }
            let labelings = parallel::map_range(draws, |k| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(k as u64);
                (0..n).map(|_| rng.gen_range(0..q)).collect::<Vec<usize>>()
            });
            (labelings, false)
        }
    };
    let ratios = parallel::map_slice(&candidates, |l| lp_ratio(a, l, q, p, mass));
    let (best, worst_ratio) = ratios
        .iter()
        .enumerate()
        .fold((0usize, f64::NEG_INFINITY), |acc, (k, &r)| {
            if r > acc.1 {
                (k, r)
            } else {
                acc
            }
        });
    Ok(UpperRegularityCheck {
        p,
        eta,
        max_parts: q,
        worst_ratio,
        witness: labels_to_partition(&candidates[best]),
        inspected: candidates.len(),
        is_certificate,
    })
}

/// Leading `r` absolute eigenvalues of `D^{-1/2} A D^{-1/2}`, as `Λ^{(r)}`.
pub fn spectral_projection_values(
    a: &DenseMatrix,
    d: &DiagonalInnerProduct,
    r: usize,
) -> Result<Vec<f64>> {
    require_symmetric(a)?;
    let w = whitened(a, &InnerProductPair::symmetric(d.clone()))?;
    let mut ev: Vec<f64> = symmetric_eigenvalues(&w).into_iter().map(f64::abs).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev.truncate(r);
    ev.resize(r, 0.0);
    Ok(ev)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PseudorandomnessProfile {
    pub inner_product: DiagonalInnerProduct,
    pub r: usize,
    pub projection_values: Vec<f64>,
    pub sigma_prefix_norm: f64,
    pub spectral_values: Vec<f64>,
    pub spectral_prefix_norm: f64,
    /// `cutnorm(A) / <1, 1>_D`.
    pub cut_mass_ratio: f64,
    /// `sigma_prefix_norm / cut_mass_ratio` (0 when the matrix is 0).
    pub certificate_ratio: f64,
    pub certificates: Vec<Certificate>,
}

/// Cut PVD profile of `A` under `D` together with the spectral comparison.
pub fn cut_pseudorandomness_profile(
    a: &DenseMatrix,
    d: &DiagonalInnerProduct,
    r: usize,
    maximizer: CutMaximizer,
    cfg: &PvdConfig,
) -> Result<PseudorandomnessProfile> {
    require_symmetric(a)?;
    let ips = InnerProductPair::symmetric(d.clone());
    let pvd = compute_pvd(a, &UnitDomain::cut_with(ips, maximizer), r, cfg)?;
    let sigma_prefix_norm = pvd.prefix_norm(r);
    let spectral_values = spectral_projection_values(a, d, r)?;
    let spectral_prefix_norm = spectral_values.iter().map(|v| v * v).sum::<f64>().sqrt();
    let cut_mass = if a.is_nonnegative() {
        a.row_sums().iter().sum()
    } else {
        cut_norm(a, cfg.brute_force_cap)?
    };
    let cut_mass_ratio = cut_mass / d.weights().iter().sum::<f64>();
    let certificate_ratio = if cut_mass_ratio > 0.0 {
        sigma_prefix_norm / cut_mass_ratio
    } else {
        0.0
    };
    let certificates = vec![Certificate::le(
        "majorization",
        sigma_prefix_norm,
        spectral_prefix_norm,
        1e-8,
    )];
    Ok(PseudorandomnessProfile {
        inner_product: d.clone(),
        r,
        projection_values: pvd.projection_values().to_vec(),
        sigma_prefix_norm,
        spectral_values,
        spectral_prefix_norm,
        cut_mass_ratio,
        certificate_ratio,
        certificates,
    })
}

//! Regularity partitions built from cut PVD truncations.

use serde::{Deserialize, Serialize};

use crate::cut::cut_norm_bruteforce;
use crate::domain::{cut_p_norm_enumerated, CutMaximizer, DomainPair, PairLabel, UnitDomain};
use crate::error::{PvdError, Result};
use crate::linalg::{frob_norm, DenseMatrix, InnerProductPair};
use crate::parallel;
use crate::pvd::{best_truncation, compute_pvd, truncate, PvdConfig, PvdResult};
use crate::tolerance::Certificate;

/// The sets of one cut pair, kept as partition provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutSets {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

/// Disjoint nonempty parts covering `0..n`, ordered by smallest member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub parts: Vec<Vec<usize>>,
    pub provenance: Vec<CutSets>,
}

impl Partition {
    pub fn trivial(n: usize) -> Self {
        Partition {
            parts: if n == 0 { Vec::new() } else { vec![(0..n).collect()] },
            provenance: Vec::new(),
        }
    }

    pub fn singletons(n: usize) -> Self {
        Partition {
            parts: (0..n).map(|i| vec![i]).collect(),
            provenance: Vec::new(),
        }
    }

    /// Builds a partition from explicit parts, validating that they cover `0..n` once.
    pub fn from_parts(n: usize, mut parts: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n];
        for p in &mut parts {
            if p.is_empty() {
                return Err(PvdError::InvalidInput("partition parts must be nonempty".into()));
            }
            p.sort_unstable();
            for &i in p.iter() {
                if i >= n || std::mem::replace(&mut seen[i], true) {
                    return Err(PvdError::InvalidInput(format!(
                        "index {i} is out of range or repeated"
                    )));
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(PvdError::InvalidInput("partition does not cover every index".into()));
        }
        parts.sort_by_key(|p| p[0]);
        Ok(Partition {
            parts,
            provenance: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn ground_size(&self) -> usize {
        self.parts.iter().map(Vec::len).sum()
    }

    /// Part index of every element.
    pub fn labels(&self) -> Vec<usize> {
        let mut out = vec![0; self.ground_size()];
        for (k, p) in self.parts.iter().enumerate() {
            for &i in p {
                out[i] = k;
            }
        }
        out
    }
}

/// Common refinement of the bipartitions induced by every `S` and `T`.
pub fn refine(n: usize, pairs: &[CutSets]) -> Result<Partition> {
    let mut signature = vec![Vec::with_capacity(2 * pairs.len()); n];
    for p in pairs {
        for set in [&p.rows, &p.cols] {
            let mut member = vec![false; n];
            for &i in set {
                if i >= n {
                    return Err(PvdError::OutOfRange { index: i, limit: n });
                }
                member[i] = true;
            }
            for (sig, m) in signature.iter_mut().zip(member) {
                sig.push(m);
            }
        }
    }
    let mut parts: Vec<Vec<usize>> = Vec::new();
    let mut keys: Vec<&Vec<bool>> = Vec::new();
    for (i, sig) in signature.iter().enumerate() {
        match keys.iter().position(|k| *k == sig) {
            Some(k) => parts[k].push(i),
            None => {
                keys.push(sig);
                parts.push(vec![i]);
            }
        }
    }
    Ok(Partition {
        parts,
        provenance: pairs.to_vec(),
    })
}

fn cut_sets(pair: &DomainPair) -> Option<CutSets> {
    match &pair.label {
        PairLabel::Cut { rows, cols } => Some(CutSets {
            rows: rows.clone(),
            cols: cols.clone(),
        }),
        _ => None,
    }
}

fn check_square(a: &DenseMatrix, p: &Partition) -> Result<()> {
    if !a.is_square() || p.ground_size() != a.rows() {
        return Err(crate::error::mismatch(
            format!("square matrix over {} elements", p.ground_size()),
            format!("{}x{}", a.rows(), a.cols()),
        ));
    }
    Ok(())
}

/// Block-averaging surrogate: every block replaced by its mean.
pub fn block_average(a: &DenseMatrix, p: &Partition) -> Result<DenseMatrix> {
    check_square(a, p)?;
    let labels = p.labels();
    let k = p.len();
    let mut means = vec![0.0; k * k];
    for (x, px) in p.parts.iter().enumerate() {
        for (y, py) in p.parts.iter().enumerate() {
            means[x * k + y] = a.block_sum(px, py) / (px.len() * py.len()) as f64;
        }
    }
    Ok(DenseMatrix::from_fn(a.rows(), a.cols(), |i, j| {
        means[labels[i] * k + labels[j]]
    }))
}

/// Largest spread `max - min` of a matrix inside any block.
pub fn block_deviation(x: &DenseMatrix, p: &Partition) -> f64 {
    let mut worst: f64 = 0.0;
    for px in &p.parts {
        for py in &p.parts {
            let vals = px.iter().flat_map(|&i| py.iter().map(move |&j| (i, j)));
            let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (i, j)| {
                let v = x.get(i, j);
                (lo.min(v), hi.max(v))
            });
            worst = worst.max(hi - lo);
        }
    }
    worst
}

/// `max_{S,T} |X(S,T)|`.
pub fn cut_norm(x: &DenseMatrix, cap: usize) -> Result<f64> {
    Ok(cut_norm_bruteforce(x, cap, 0.0)?.value)
}

/// `cutnorm(A - Â_avg)`; an upper bound on the weak irregularity of `p`.
pub fn weak_irregularity_ub(a: &DenseMatrix, p: &Partition, cap: usize) -> Result<f64> {
    cut_norm(&a.sub(&block_average(a, p)?)?, cap)
}

/// Sum over ordered block pairs of the per-block cut norm of `x`.
pub fn blockwise_cut_norm_sum(x: &DenseMatrix, p: &Partition, cap: usize) -> Result<f64> {
    let blocks: Vec<(usize, usize)> = (0..p.len())
        .flat_map(|i| (0..p.len()).map(move |j| (i, j)))
        .collect();
    let values = parallel::map_slice(&blocks, |&(i, j)| {
        cut_norm(&x.submatrix(&p.parts[i], &p.parts[j]), cap)
    });
    values.into_iter().sum()
}

/// `Σ_{i,j} max_{S ⊆ V_i, T ⊆ V_j} |(A - Â_avg)(S,T)|`.
pub fn szemeredi_irregularity_ub(a: &DenseMatrix, p: &Partition, cap: usize) -> Result<f64> {
    blockwise_cut_norm_sum(&a.sub(&block_average(a, p)?)?, p, cap)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularityConfig {
    pub pvd: PvdConfig,
    pub maximizer: CutMaximizer,
    /// Largest number of PVD terms a construction may request.
    pub term_cap: usize,
}

impl Default for RegularityConfig {
    fn default() -> Self {
        RegularityConfig {
            pvd: PvdConfig::default(),
            maximizer: CutMaximizer::default(),
            term_cap: 4096,
        }
    }
}

/// Trace of the pigeonhole scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SzemerediTrace {
    pub base: f64,
    pub rounds: usize,
    /// `f^{(rounds)}(0)`, clamped to the exhausted length of the PVD.
    pub horizon: usize,
    /// Index `i` of the first qualifying round.
    pub round: usize,
    pub q: usize,
    pub f_q: usize,
    /// Terms in the fine truncation `Â'`.
    pub fine_terms: usize,
    /// Terms in the coarse approximation `Â`.
    pub coarse_terms: usize,
    /// `‖Π^{f(q)}A - Π^{q}A‖_F²` for every scanned round.
    pub window_energies: Vec<f64>,
    /// `eps² ‖ς^{(horizon)}‖²`.
    pub threshold: f64,
    /// Direct `Σ_blocks max |(A - Â')(S,T)|`.
    pub first_term: f64,
    /// Direct `Σ_blocks max |(Â' - Â)(S,T)|`.
    pub second_term: f64,
    pub fine_cut_norm: f64,
    pub fine_prefix_bound: f64,
    pub coarse_gap_frob: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegularityReport {
    pub partition: Partition,
    /// The PVD truncation `Â` built from the pairs that define the partition.
    pub approx_matrix: DenseMatrix,
    /// Block-averaging surrogate `Â_avg` on the partition.
    pub averaged_matrix: DenseMatrix,
    pub projection_values: Vec<f64>,
    pub r: usize,
    pub terms_used: usize,
    pub weak_irregularity_ub: f64,
    pub szemeredi_irregularity_ub: f64,
    /// `cutnorm(A - Â)` for the PVD truncation itself.
    pub decomposition_residual: f64,
    /// `‖1‖² · ‖ς^{(r+1)}‖₂ / sqrt(r+1)` style bound for the residual.
    pub bound_certificate: f64,
    /// Largest within-block spread of `D^{-1} Â E^{-1}`.
    pub block_deviation: f64,
    pub szemeredi: Option<SzemerediTrace>,
    pub certificates: Vec<Certificate>,
}

impl RegularityReport {
    pub fn passes(&self) -> bool {
        crate::tolerance::all_pass(&self.certificates)
    }
}

fn validate_graph(a: &DenseMatrix, ips: &InnerProductPair, tol: f64) -> Result<()> {
    ips.check(a)?;
    if !a.is_square() {
        return Err(PvdError::InvalidInput("regularity needs a square matrix".into()));
    }
    if !a.is_symmetric(tol) || !a.is_nonnegative() {
        return Err(PvdError::InvalidInput(
            "regularity needs a symmetric nonnegative matrix".into(),
        ));
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(PvdError::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    Ok(())
}

/// `⌈eps^{-2}⌉`, guarded against floating noise at exact reciprocals.
pub fn rounds_for(eps: f64) -> usize {
    let x = 1.0 / (eps * eps);
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

/// `D^{-1} X E^{-1}`, the block-constant core of a cut-PVD truncation.
fn unweighted_core(x: &DenseMatrix, ips: &InnerProductPair) -> DenseMatrix {
    let (d, e) = (ips.left.weights(), ips.right.weights());
    DenseMatrix::from_fn(x.rows(), x.cols(), |i, j| x.get(i, j) / (d[i] * e[j]))
}

fn parts_bound(terms: usize) -> f64 {
    2f64.powi((2 * terms).min(1000) as i32)
}

fn used_sets(pvd: &PvdResult, terms: usize) -> Vec<CutSets> {
    pvd.selected()[..terms].iter().filter_map(cut_sets).collect()
}

/// Weak regularity partition from the best truncation at `r = ⌈eps^{-2}⌉`.
pub fn weak_regularity_partition(
    a: &DenseMatrix,
    eps: f64,
    ips: &InnerProductPair,
    cfg: &RegularityConfig,
) -> Result<RegularityReport> {
    check_eps(eps)?;
    validate_graph(a, ips, 1e-9)?;
    let r = rounds_for(eps);
    if r > cfg.term_cap {
        return Err(PvdError::TermCap(format!("r = {r} exceeds the cap {}", cfg.term_cap)));
    }
    let n = a.rows();
    let cap = cfg.pvd.brute_force_cap;
    let domain = UnitDomain::cut_with(ips.clone(), cfg.maximizer);
    let pvd = compute_pvd(a, &domain, r + 1, &cfg.pvd)?;
    let bt = best_truncation(&pvd, r)?;
    let terms = bt.terms();
    let partition = refine(n, &used_sets(&pvd, terms))?;
    let averaged = block_average(a, &partition)?;
    let weak = cut_norm(&a.sub(&averaged)?, cap)?;
    let szem = blockwise_cut_norm_sum(&a.sub(&averaged)?, &partition, cap)?;
    let residual = a.sub(&bt.matrix)?;
    let decomposition_residual = cut_norm(&residual, cap)?;
    let mass = ips.ones_mass();
    let bound = mass * bt.prefix_bound;
    let deviation = block_deviation(&unweighted_core(&bt.matrix, ips), &partition);
    let slack = |scale: f64| cfg.pvd.tol.slack(scale);

    let mut certificates = vec![
        Certificate::le("block_constant", deviation, 0.0, 1e-9),
        Certificate::le("part_count", partition.len() as f64, parts_bound(terms), 0.0),
        Certificate::le("residual_vs_bound", decomposition_residual, bound, slack(bound)),
        Certificate::le(
            "bound_vs_frobenius",
            bt.prefix_bound,
            bt.frob_bound,
            slack(bt.frob_bound),
        ),
    ];
    if n <= cap {
        let p_norm = cut_p_norm_enumerated(&residual, ips, cap)?;
        certificates.push(Certificate::le(
            "residual_vs_p_norm",
            decomposition_residual,
            mass * p_norm,
            slack(mass * p_norm),
        ));
        certificates.push(Certificate::le(
            "p_norm_vs_bound",
            p_norm,
            bt.prefix_bound,
            slack(bt.prefix_bound),
        ));
    }
    if ips.left.is_unit() && ips.right.is_unit() {
        // Averaging is a cut-norm contraction, so the surrogate loses at most a factor 2.
        certificates.push(Certificate::le(
            "surrogate_vs_residual",
            weak,
            2.0 * decomposition_residual,
            slack(decomposition_residual),
        ));
    }
    certificates.push(Certificate::le("weak_vs_szemeredi", weak, szem, slack(szem)));

    Ok(RegularityReport {
        partition,
        approx_matrix: bt.matrix,
        averaged_matrix: averaged,
        projection_values: pvd.projection_values().to_vec(),
        r,
        terms_used: terms,
        weak_irregularity_ub: weak,
        szemeredi_irregularity_ub: szem,
        decomposition_residual,
        bound_certificate: bound,
        block_deviation: deviation,
        szemeredi: None,
        certificates,
    })
}

/// `c^q`, saturating at `limit + 1`.
fn grow(base: f64, q: usize, limit: usize) -> usize {
    let v = base.powf(q as f64);
    if !v.is_finite() || v > (limit + 1) as f64 {
        limit + 1
    } else {
        // Exact powers of integral bases must not round down.
        (v - 1e-9).ceil().max(1.0) as usize
    }
}

/// Szemeredi-type partition via the pigeonhole scan over `q_i = f^{(i)}(0)`.
pub fn szemeredi_partition(
    a: &DenseMatrix,
    eps: f64,
    base: f64,
    ips: &InnerProductPair,
    cfg: &RegularityConfig,
) -> Result<RegularityReport> {
    check_eps(eps)?;
    if !(base > 1.0 && base.is_finite()) {
        return Err(PvdError::InvalidInput(format!("base must exceed 1, got {base}")));
    }
    validate_graph(a, ips, 1e-9)?;
    let n = a.rows();
    let cap = cfg.pvd.brute_force_cap;
    let rounds = rounds_for(eps);
    let full = n * n;

    // q_0 = 0, q_{i+1} = f(q_i); everything past the full span is equivalent.
    let mut qs = vec![0usize];
    for _ in 0..rounds {
        let next = grow(base, *qs.last().unwrap(), full);
        qs.push(next);
    }
    let horizon = *qs.last().unwrap();
    if horizon.min(full) > cfg.term_cap {
        return Err(PvdError::TermCap(format!(
            "horizon {horizon} exceeds the cap {}",
            cfg.term_cap
        )));
    }
    let domain = UnitDomain::cut_with(ips.clone(), cfg.maximizer);
    let pvd = compute_pvd(a, &domain, horizon.min(full) + 1, &cfg.pvd)?;
    if pvd.len() < horizon && !pvd.exhausted() {
        return Err(PvdError::TermCap(format!(
            "decomposition stopped at {} of {horizon} terms",
            pvd.len()
        )));
    }
    let energy = |k: usize| pvd.prefix_norm(k).powi(2);
    let threshold = eps * eps * energy(horizon);
    let slack_t = cfg.pvd.tol.slack(threshold);
    let mut window_energies = Vec::new();
    let mut chosen = None;
    for i in 0..rounds {
        let w = (energy(qs[i + 1]) - energy(qs[i])).max(0.0);
        window_energies.push(w);
        if w <= threshold + slack_t {
            chosen = Some(i);
            break;
        }
    }
    let Some(round) = chosen else {
        return Err(PvdError::TermCap(format!(
            "no qualifying round within {rounds} rounds"
        )));
    };
    let (q, f_q) = (qs[round], qs[round + 1]);
    let fine = best_truncation(&pvd, f_q)?;
    let fine_terms = fine.terms();
    let coarse_terms = q.min(fine_terms);
    let coarse = truncate(&pvd, coarse_terms)?;
    let partition = refine(n, &used_sets(&pvd, coarse_terms))?;
    let p = partition.len() as f64;

    let mass = ips.ones_mass();
    let fine_residual = a.sub(&fine.matrix)?;
    let fine_cut_norm = cut_norm(&fine_residual, cap)?;
    let first_term = blockwise_cut_norm_sum(&fine_residual, &partition, cap)?;
    let gap = fine.matrix.sub(&coarse)?;
    let second_term = blockwise_cut_norm_sum(&gap, &partition, cap)?;
    let abs_sum: f64 = gap.entries().iter().map(|v| v.abs()).sum();
    let coarse_gap_frob = frob_norm(&gap, ips)?;
    let coarse_residual = a.sub(&coarse)?;
    let coarse_blockwise = blockwise_cut_norm_sum(&coarse_residual, &partition, cap)?;

    let averaged = block_average(a, &partition)?;
    let weak = cut_norm(&a.sub(&averaged)?, cap)?;
    let szem = blockwise_cut_norm_sum(&a.sub(&averaged)?, &partition, cap)?;
    let deviation = block_deviation(&unweighted_core(&coarse, ips), &partition);
    let tol = 1e-6;
    let p2 = p * p;
    let sigma_h = energy(horizon).sqrt();

    let certificates = vec![
        Certificate::le("pigeonhole_window", window_energies[round], threshold, slack_t),
        Certificate::le("first_term_blocks", first_term, p2 * fine_cut_norm, tol),
        Certificate::le(
            "first_term_control",
            p2 * fine_cut_norm,
            p2 * mass * fine.prefix_bound,
            tol,
        ),
        Certificate::le("second_term_blocks", second_term, abs_sum, tol),
        Certificate::le("second_term_cauchy_schwarz", abs_sum, mass * coarse_gap_frob, tol),
        Certificate::le("second_term_window", coarse_gap_frob, eps * sigma_h, tol),
        Certificate::le("split", coarse_blockwise, first_term + second_term, tol),
        Certificate::le("block_constant", deviation, 0.0, 1e-9),
        Certificate::le("part_count", p, parts_bound(coarse_terms), 0.0),
        Certificate::le("weak_vs_szemeredi", weak, szem, tol),
    ];
    let decomposition_residual = cut_norm(&coarse_residual, cap)?;
    Ok(RegularityReport {
        partition,
        approx_matrix: coarse,
        averaged_matrix: averaged,
        projection_values: pvd.projection_values().to_vec(),
        r: q,
        terms_used: coarse_terms,
        weak_irregularity_ub: weak,
        szemeredi_irregularity_ub: szem,
        decomposition_residual,
        bound_certificate: p2 * mass * fine.prefix_bound + mass * eps * sigma_h,
        block_deviation: deviation,
        szemeredi: Some(SzemerediTrace {
            base,
            rounds,
            horizon,
            round,
            q,
            f_q,
            fine_terms,
            coarse_terms,
            window_energies,
            threshold,
            first_term,
            second_term,
            fine_cut_norm,
            fine_prefix_bound: fine.prefix_bound,
            coarse_gap_frob,
        }),
        certificates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxCutConfig {
    pub regularity: RegularityConfig,
    /// Grid step for per-part split fractions; `None` means `eps / 4`.
    pub delta: Option<f64>,
    pub grid_cap: f64,
}

impl Default for MaxCutConfig {
    fn default() -> Self {
        MaxCutConfig {
            regularity: RegularityConfig::default(),
            delta: None,
            grid_cap: 1e7,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaxCutEstimate {
    /// Cut value of the best split on the block-constant surrogate.
    pub estimate: f64,
    /// Cut value of the realized bipartition on the input.
    pub realized: f64,
    /// Indices on the first side of the realized bipartition.
    pub side: Vec<usize>,
    pub counts: Vec<usize>,
    pub delta: f64,
    pub grid_points: usize,
    /// Worst-case loss from restricting split counts to the grid.
    pub grid_term: f64,
    pub weak_irregularity_ub: f64,
    pub regularity: RegularityReport,
}

/// `x^T X (1 - x)` for a 0/1 indicator.
pub fn cut_value(a: &DenseMatrix, side: &[bool]) -> f64 {
    let mut total = 0.0;
    for i in (0..a.rows()).filter(|&i| side[i]) {
        for j in (0..a.cols()).filter(|&j| !side[j]) {
            total += a.get(i, j);
        }
    }
    total
}

struct BlockModel {
    sizes: Vec<usize>,
    /// Block means `b_kl`, row-major.
    means: Vec<f64>,
}

impl BlockModel {
    fn value(&self, x: &[usize]) -> f64 {
        let k = self.sizes.len();
        let mut v = 0.0;
        for a in 0..k {
            for b in 0..k {
                v += self.means[a * k + b] * x[a] as f64 * (self.sizes[b] - x[b]) as f64;
            }
        }
        v
    }
}

/// Per-part split options: distinct `(floor(f n_k), has remainder)` over the grid.
fn split_options(size: usize, delta: f64) -> Vec<(usize, bool)> {
    let steps = (1.0 / delta).floor() as usize;
    let mut fractions: Vec<f64> = (0..=steps).map(|s| s as f64 * delta).collect();
    if fractions.last().is_some_and(|&f| f < 1.0) {
        fractions.push(1.0);
    }
    let mut out: Vec<(usize, bool)> = fractions
        .into_iter()
        .map(|f| {
            let x = f * size as f64;
            let fl = (x + 1e-12).floor();
            ((fl as usize).min(size), x - fl > 1e-12)
        })
        .collect();
    out.dedup();
    out
}

/// Floors plus greedy `+1` on parts with a remainder while the gain is positive.
fn round_split(model: &BlockModel, choice: &[(usize, bool)]) -> (Vec<usize>, f64) {
    let mut x: Vec<usize> = choice.iter().map(|c| c.0).collect();
    let mut eligible: Vec<bool> = choice
        .iter()
        .zip(&model.sizes)
        .map(|(c, &s)| c.1 && c.0 < s)
        .collect();
    let mut value = model.value(&x);
    loop {
        let mut best: Option<(usize, f64)> = None;
        for k in (0..x.len()).filter(|&k| eligible[k]) {
            x[k] += 1;
            let v = model.value(&x);
            x[k] -= 1;
            if v > value && best.is_none_or(|(_, bv)| v > bv) {
                best = Some((k, v));
            }
        }
        let Some((k, v)) = best else { break };
        x[k] += 1;
        eligible[k] = false;
        value = v;
    }
    (x, value)
}

/// Max-cut estimate from the block-averaged weak regularity approximation.
pub fn max_cut_estimate(
    a: &DenseMatrix,
    eps: f64,
    ips: &InnerProductPair,
    cfg: &MaxCutConfig,
) -> Result<MaxCutEstimate> {
    let delta = cfg.delta.unwrap_or(eps / 4.0);
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(PvdError::InvalidInput(format!("delta must lie in (0, 1], got {delta}")));
    }
    let report = weak_regularity_partition(a, eps, ips, &cfg.regularity)?;
    let parts = &report.partition.parts;
    let k = parts.len();
    let sizes: Vec<usize> = parts.iter().map(Vec::len).collect();
    let mut means = vec![0.0; k * k];
    for x in 0..k {
        for y in 0..k {
            means[x * k + y] = report.averaged_matrix.get(parts[x][0], parts[y][0]);
        }
    }
    let model = BlockModel { sizes, means };
    let options: Vec<Vec<(usize, bool)>> =
        model.sizes.iter().map(|&s| split_options(s, delta)).collect();
    let estimate_size: f64 = options.iter().map(|o| o.len() as f64).product();
    if estimate_size > cfg.grid_cap {
        return Err(PvdError::GridTooLarge {
            estimate: estimate_size,
            limit: cfg.grid_cap,
        });
    }
    let grid_points = estimate_size as usize;
    let evaluated = parallel::map_range(grid_points, |mut idx| {
        let choice: Vec<(usize, bool)> = options
            .iter()
            .map(|o| {
                let c = o[idx % o.len()];
                idx /= o.len();
                c
            })
            .collect();
        round_split(&model, &choice)
    });
    // First index wins ties, which keeps the result independent of scheduling.
    let (counts, estimate) = evaluated
        .into_iter()
        .fold((vec![0; k], f64::NEG_INFINITY), |best, cur| {
            if cur.1 > best.1 {
                cur
            } else {
                best
            }
        });
    let mut side_mask = vec![false; a.rows()];
    for (p, &c) in parts.iter().zip(&counts) {
        for &i in &p[..c] {
            side_mask[i] = true;
        }
    }
    let side: Vec<usize> = (0..a.rows()).filter(|&i| side_mask[i]).collect();
    let realized = cut_value(a, &side_mask);
    let slack: Vec<f64> = model
        .sizes
        .iter()
        .map(|&s| (s as f64).min(delta * s as f64 + 1.0))
        .collect();
    let mut grid_term = 0.0;
    for x in 0..k {
        for y in 0..k {
            let (nx, ny) = (model.sizes[x] as f64, model.sizes[y] as f64);
            grid_term += model.means[x * k + y].abs()
                * (slack[x] * ny + nx * slack[y] + slack[x] * slack[y]);
        }
    }
    Ok(MaxCutEstimate {
        estimate,
        realized,
        side,
        counts,
        delta,
        grid_points,
        grid_term,
        weak_irregularity_ub: report.weak_irregularity_ub,
        regularity: report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sets(rows: &[usize], cols: &[usize]) -> CutSets {
        CutSets {
            rows: rows.to_vec(),
            cols: cols.to_vec(),
        }
    }

    #[test]
    fn refine_examples() {
        assert_eq!(refine(3, &[]).unwrap().parts, vec![vec![0, 1, 2]]);
        assert_eq!(refine(2, &[sets(&[0], &[0, 1])]).unwrap().parts, vec![vec![0], vec![1]]);
        assert_eq!(refine(3, &[sets(&[0, 1, 2], &[0, 1, 2])]).unwrap().len(), 1);
        assert!(refine(2, &[sets(&[5], &[0])]).is_err());
    }

    #[test]
    fn irregularity_examples() {
        let i2 = DenseMatrix::identity(2);
        let whole = Partition::trivial(2);
        assert!((weak_irregularity_ub(&i2, &whole, 12).unwrap() - 0.5).abs() < 1e-12);
        assert!((szemeredi_irregularity_ub(&i2, &whole, 12).unwrap() - 0.5).abs() < 1e-12);
        let a = DenseMatrix::from_fn(4, 4, |i, j| (i * 3 + j) as f64);
        assert_eq!(weak_irregularity_ub(&a, &Partition::singletons(4), 12).unwrap(), 0.0);
        let j = DenseMatrix::ones(4, 4);
        let p = Partition::from_parts(4, vec![vec![0, 2], vec![1], vec![3]]).unwrap();
        assert_eq!(szemeredi_irregularity_ub(&j, &p, 12).unwrap(), 0.0);
    }

    #[test]
    fn from_parts_validates() {
        assert!(Partition::from_parts(3, vec![vec![0, 1]]).is_err());
        assert!(Partition::from_parts(2, vec![vec![0, 1], vec![1]]).is_err());
        assert!(Partition::from_parts(2, vec![vec![1], vec![0]]).is_ok());
    }

    #[test]
    fn weak_partition_of_all_ones() {
        let ips = InnerProductPair::euclidean(5, 5);
        let rep =
            weak_regularity_partition(&DenseMatrix::ones(5, 5), 0.5, &ips, &Default::default())
                .unwrap();
        assert_eq!(rep.partition.parts, vec![vec![0, 1, 2, 3, 4]]);
        assert!(rep.weak_irregularity_ub < 1e-12);
        assert!(rep.passes());
    }

    #[test]
    fn weak_partition_of_two_blocks() {
        let a = DenseMatrix::from_fn(4, 4, |i, j| if (i < 2) == (j < 2) { 1.0 } else { 0.0 });
        let ips = InnerProductPair::euclidean(4, 4);
        let rep = weak_regularity_partition(&a, 0.5, &ips, &Default::default()).unwrap();
        assert_eq!(rep.partition.parts, vec![vec![0, 1], vec![2, 3]]);
        assert!(rep.weak_irregularity_ub < 1e-12);
        assert!(rep.passes());
    }

    #[test]
    fn szemeredi_degenerate_round() {
        let a = DenseMatrix::identity(3);
        let ips = InnerProductPair::euclidean(3, 3);
        let rep = szemeredi_partition(&a, 1.0, 16.0, &ips, &Default::default()).unwrap();
        let t = rep.szemeredi.as_ref().unwrap();
        assert_eq!((t.round, t.q, t.rounds), (0, 0, 1));
        assert_eq!(rep.approx_matrix, DenseMatrix::zeros(3, 3));
        assert!(rep.passes(), "{:?}", rep.certificates);
    }

    #[test]
    fn szemeredi_all_ones_is_trivial() {
        let ips = InnerProductPair::euclidean(4, 4);
        let rep = szemeredi_partition(&DenseMatrix::ones(4, 4), 0.8, 16.0, &ips, &Default::default())
            .unwrap();
        assert_eq!(rep.partition.len(), 1);
        let t = rep.szemeredi.unwrap();
        assert!(t.first_term < 1e-12 && t.second_term < 1e-12);
    }

    #[test]
    fn max_cut_of_complete_graphs() {
        for n in 2..=7 {
            let j = DenseMatrix::ones(n, n);
            let est = max_cut_estimate(&j, 0.5, &InnerProductPair::euclidean(n, n), &Default::default())
                .unwrap();
            assert_eq!(est.estimate, ((n * n) / 4) as f64, "n = {n}");
            assert_eq!(est.realized, est.estimate);
        }
    }

    #[test]
    fn max_cut_of_bipartite_graph() {
        let (a, b) = (2, 3);
        let adj = DenseMatrix::from_fn(5, 5, |i, j| if (i < a) != (j < a) { 1.0 } else { 0.0 });
        let est = max_cut_estimate(&adj, 0.5, &InnerProductPair::euclidean(5, 5), &Default::default())
            .unwrap();
        assert_eq!(est.estimate, (a * b) as f64);
        assert_eq!(est.realized, (a * b) as f64);
    }

    #[test]
    fn rounding_thresholds() {
        assert_eq!(rounds_for(0.5), 4);
        assert_eq!(rounds_for(0.8), 2);
        assert_eq!(rounds_for(1.0), 1);
        assert_eq!(rounds_for(0.4), 7);
    }
}

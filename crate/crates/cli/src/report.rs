//! Subcommand dispatch and the JSON report document.

use pvd_core::cur::cur_pvd;
use pvd_core::cut::{
    as_integral, cut_lp_approx, cut_lp_exact, cut_norm_bruteforce, normalized_cut_bruteforce,
    CutPair, LpCutResult,
};
use pvd_core::graph::{
    core_density, core_density_via_frobenius, cut_pseudorandomness_profile,
    lp_upper_regularity_check, threshold_rank, PartitionSearch,
};
use pvd_core::regularity::{
    cut_value, max_cut_estimate, szemeredi_partition, weak_regularity_partition, MaxCutConfig,
    RegularityConfig, RegularityReport,
};
use pvd_core::tensor::{tensor_best_truncation, tensor_bound_check, tensor_pvd, TupleDomain, TupleLabel};
use pvd_core::tolerance::all_pass;
use pvd_core::{
    best_truncation, compute_pvd, verify_pvd, Certificate, CutMaximizer, DenseMatrix,
    DiagonalInnerProduct, InnerProductPair, PairLabel, PvdError, Tolerance, UnitDomain,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Command, IpPreset, RunConfig};
use crate::error::CliError;
use crate::input::{self, InputFormat, WeightSpec};

/// Exhaustive L_p searches above this many labelings fall back to sampling.
const PARTITION_ENUMERATION_CAP: f64 = 1e6;

pub const TOOL: &str = "pvd";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct InputSummary {
    pub path: String,
    pub format: InputFormat,
    pub shape: Vec<usize>,
    /// Edge-list label of each dense index.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InnerProductSummary {
    pub preset: IpPreset,
    /// Diagonal weights per mode: `[left, right]` for matrices.
    pub weights: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub parallel: bool,
    pub subcommand: Command,
    pub config: RunConfig,
    pub input: InputSummary,
    pub tolerance: Tolerance,
    pub inner_product: Option<InnerProductSummary>,
    pub result: Value,
    pub certificates: Vec<Certificate>,
    pub all_pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: Command,
    pub error: ErrorBody,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorBody {
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
}

impl ErrorReport {
    pub fn new(subcommand: Command, err: &CliError) -> Self {
        ErrorReport {
            tool: TOOL,
            version: VERSION,
            subcommand,
            error: ErrorBody {
                code: err.code(),
                message: err.to_string(),
                line: err.line(),
            },
        }
    }
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("reports serialize");
    s.push('\n');
    s
}

fn rows(m: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report fields serialize")
}

fn weights_of(v: Vec<f64>) -> Result<DiagonalInnerProduct, CliError> {
    Ok(DiagonalInnerProduct::new(v)?)
}

fn mismatch(expected: String, found: String) -> CliError {
    CliError::Core(PvdError::DimensionMismatch { expected, found })
}

fn degree_pair(
    a: &DenseMatrix,
    f: fn(&DenseMatrix) -> pvd_core::Result<DiagonalInnerProduct>,
) -> Result<InnerProductPair, CliError> {
    if a.is_square() {
        Ok(InnerProductPair::symmetric(f(a)?))
    } else {
        Ok(InnerProductPair::new(f(a)?, f(&a.transpose())?))
    }
}

/// Builds the inner-product pair named by `--ip` for a matrix input.
pub fn matrix_inner_product(a: &DenseMatrix, preset: &IpPreset) -> Result<InnerProductPair, CliError> {
    let (m, n) = a.shape();
    match preset {
        IpPreset::Euclidean => Ok(InnerProductPair::euclidean(m, n)),
        IpPreset::Degree => degree_pair(a, DiagonalInnerProduct::degree),
        IpPreset::DegreePlusAvg => degree_pair(a, DiagonalInnerProduct::degree_plus_average),
        IpPreset::File(path) => {
            let ips = match input::parse_weights(&input::read_file(path)?)? {
                WeightSpec::Shared(w) if m == n => InnerProductPair::symmetric(weights_of(w)?),
                WeightSpec::Shared(_) => {
                    return Err(CliError::Usage(
                        "a single weight vector needs a square matrix; use {\"left\", \"right\"}".into(),
                    ))
                }
                WeightSpec::Pair { left, right } => {
                    InnerProductPair::new(weights_of(left)?, weights_of(right)?)
                }
                WeightSpec::Modes(mut modes) if modes.len() == 2 => {
                    let right = modes.pop().expect("two modes");
                    let left = modes.pop().expect("two modes");
                    InnerProductPair::new(weights_of(left)?, weights_of(right)?)
                }
                WeightSpec::Modes(modes) => {
                    return Err(mismatch("2 modes".into(), format!("{} modes", modes.len())))
                }
            };
            ips.check(a)?;
            Ok(ips)
        }
    }
}

fn tensor_modes(dims: &[usize], preset: &IpPreset) -> Result<Vec<DiagonalInnerProduct>, CliError> {
    let modes = match preset {
        IpPreset::Euclidean => dims.iter().map(|&n| DiagonalInnerProduct::euclidean(n)).collect(),
        IpPreset::File(path) => match input::parse_weights(&input::read_file(path)?)? {
            WeightSpec::Modes(m) => m.into_iter().map(weights_of).collect::<Result<_, _>>()?,
            WeightSpec::Shared(w) => vec![weights_of(w)?; dims.len()],
            WeightSpec::Pair { .. } => {
                return Err(CliError::Usage("tensor weights need {\"modes\": [...]}".into()))
            }
        },
        other => {
            return Err(CliError::Usage(format!(
                "inner product {other:?} is not defined for tensors"
            )))
        }
    };
    let modes: Vec<DiagonalInnerProduct> = modes;
    let got: Vec<usize> = modes.iter().map(DiagonalInnerProduct::dim).collect();
    if got != dims {
        return Err(mismatch(format!("{dims:?}"), format!("{got:?}")));
    }
    Ok(modes)
}

fn ip_summary(preset: &IpPreset, ips: &InnerProductPair) -> InnerProductSummary {
    InnerProductSummary {
        preset: preset.clone(),
        weights: vec![ips.left.weights().to_vec(), ips.right.weights().to_vec()],
    }
}

fn cut_pair_value(p: &CutPair) -> Value {
    json!({ "value": p.value, "sign": p.sign, "rows": p.rows, "cols": p.cols })
}

fn pair_label(label: &PairLabel) -> Value {
    to_value(label)
}

struct Outcome {
    input: InputSummary,
    inner_product: Option<InnerProductSummary>,
    result: Value,
    certificates: Vec<Certificate>,
}

/// Loads the input, dispatches the subcommand and assembles the report.
pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    let outcome = match cfg.subcommand {
        Command::Tensor => run_tensor(cfg)?,
        _ => {
            let loaded = input::load_matrix(&cfg.input, cfg.format)?;
            let a = loaded.matrix;
            let summary = InputSummary {
                path: cfg.input.display().to_string(),
                format: cfg.format,
                shape: vec![a.rows(), a.cols()],
                labels: loaded.labels,
            };
            let (inner_product, result, certificates) = match cfg.subcommand {
                Command::Pvd => run_pvd(cfg, &a)?,
                Command::Cutnorm => run_cutnorm(cfg, &a)?,
                Command::Weakreg | Command::Szemreg => run_regularity(cfg, &a)?,
                Command::Classes => run_classes(cfg, &a)?,
                Command::Cur => run_cur(cfg, &a)?,
                Command::Maxcut => run_maxcut(cfg, &a)?,
                Command::Tensor => unreachable!("handled above"),
            };
            Outcome {
                input: summary,
                inner_product,
                result,
                certificates,
            }
        }
    };
    Ok(Report {
        tool: TOOL,
        version: VERSION,
        parallel: pvd_core::is_parallel(),
        subcommand: cfg.subcommand,
        config: cfg.clone(),
        input: outcome.input,
        tolerance: cfg.tolerance(),
        inner_product: outcome.inner_product,
        all_pass: all_pass(&outcome.certificates),
        result: outcome.result,
        certificates: outcome.certificates,
    })
}

type Sections = (Option<InnerProductSummary>, Value, Vec<Certificate>);

fn run_pvd(cfg: &RunConfig, a: &DenseMatrix) -> Result<Sections, CliError> {
    let ips = matrix_inner_product(a, &cfg.ip)?;
    let summary = ip_summary(&cfg.ip, &ips);
    let pcfg = cfg.pvd_config();
    let domain = UnitDomain::cut_with(ips, CutMaximizer::BruteForce { cap: cfg.bf_cap });
    // With `--r` the run stops at r + 1 terms so the truncation bound is available.
    let max_terms = cfg.r.map_or(a.rows() * a.cols(), |r| r + 1);
    let pvd = compute_pvd(a, &domain, max_terms, &pcfg)?;
    let verification = verify_pvd(&pvd, &domain, &pcfg)?;
    let terms: Vec<Value> = pvd
        .selected()
        .iter()
        .zip(pvd.projection_values())
        .zip(pvd.greedy_values())
        .map(|((p, s), g)| json!({ "pair": pair_label(&p.label), "sigma": s, "greedy_value": g }))
        .collect();
    let truncation = match cfg.r {
        Some(r) => {
            let bt = best_truncation(&pvd, r)?;
            Some(json!({
                "r": r,
                "terms": bt.terms(),
                "prefix_bound": bt.prefix_bound,
                "frob_bound": bt.frob_bound,
                "matrix": rows(&bt.matrix),
            }))
        }
        None => None,
    };
    let result = json!({
        "projection_values": pvd.projection_values(),
        "terms": terms,
        "residual_p_norm": pvd.final_residual_p_norm(),
        "exhausted": pvd.exhausted(),
        "frobenius_norm": pvd.source_frob_norm(),
        "truncation": truncation,
        "verification": {
            "projected_norm": verification.projected_norm,
            "sigma_norm": verification.sigma_norm,
            "residual_p_norms": verification.residual_p_norms,
            "max_increment_overlap": verification.max_increment_overlap,
            "chain": verification.chain,
        },
    });
    Ok((Some(summary), result, verification.certificates))
}

fn lp_section(lp: &LpCutResult, exact: &CutPair, tol: f64) -> (Value, Vec<Certificate>) {
    let soundness_gap = lp
        .runs
        .iter()
        .map(|r| r.objective - r.rounded)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut certs = vec![Certificate::le("lp_value_achieved", lp.pair.value, exact.value, tol)];
    if !lp.runs.is_empty() {
        certs.push(Certificate::le("lp_rounding_soundness", soundness_gap, 0.0, 1e-9));
    }
    let section = json!({
        "pair": cut_pair_value(&lp.pair),
        "runs": lp.runs.len(),
        "gap_to_exact": exact.value - lp.pair.value,
    });
    (section, certs)
}

fn run_cutnorm(cfg: &RunConfig, a: &DenseMatrix) -> Result<Sections, CliError> {
    let ips = matrix_inner_product(a, &cfg.ip)?;
    let summary = ip_summary(&cfg.ip, &ips);
    let tie = cfg.tol_abs;
    let normalized = normalized_cut_bruteforce(a, &ips.left, &ips.right, cfg.bf_cap, tie)?;
    let plain = cut_norm_bruteforce(a, cfg.bf_cap, tie)?;
    let slack = cfg.tolerance().slack(normalized.value);
    let lp_tol = cfg.pvd_config().lp_tol;
    let integral = as_integral(ips.left.weights()).zip(as_integral(ips.right.weights()));
    let lp = match &integral {
        Some((l, r)) => cut_lp_exact(a, l, r, lp_tol, tie)?,
        None => cut_lp_approx(a, &ips.left, &ips.right, cfg.eps, lp_tol, tie)?,
    };
    let (lp_value, certificates) = lp_section(&lp, &normalized, slack);
    let result = json!({
        "normalized_cut_norm": cut_pair_value(&normalized),
        "cut_norm": cut_pair_value(&plain),
        "lp_method": if integral.is_some() { "ratio-enumerated" } else { "ratio-grid" },
        "lp": lp_value,
    });
    Ok((Some(summary), result, certificates))
}

fn regularity_config(cfg: &RunConfig) -> RegularityConfig {
    RegularityConfig {
        pvd: cfg.pvd_config(),
        maximizer: CutMaximizer::BruteForce { cap: cfg.bf_cap },
        ..Default::default()
    }
}

fn regularity_value(rep: &RegularityReport) -> Value {
    json!({
        "r": rep.r,
        "terms_used": rep.terms_used,
        "projection_values": rep.projection_values,
        "partition": rep.partition.parts,
        "approx_matrix": rows(&rep.approx_matrix),
        "averaged_matrix": rows(&rep.averaged_matrix),
        "weak_irregularity_ub": rep.weak_irregularity_ub,
        "szemeredi_irregularity_ub": rep.szemeredi_irregularity_ub,
        "decomposition_residual": rep.decomposition_residual,
        "bound_certificate": rep.bound_certificate,
        "block_deviation": rep.block_deviation,
        "szemeredi": rep.szemeredi,
    })
}

fn run_regularity(cfg: &RunConfig, a: &DenseMatrix) -> Result<Sections, CliError> {
    let ips = matrix_inner_product(a, &cfg.ip)?;
    let summary = ip_summary(&cfg.ip, &ips);
    let rcfg = regularity_config(cfg);
    let rep = if cfg.subcommand == Command::Szemreg {
        szemeredi_partition(a, cfg.eps, cfg.base, &ips, &rcfg)?
    } else {
        weak_regularity_partition(a, cfg.eps, &ips, &rcfg)?
    };
    Ok((Some(summary), regularity_value(&rep), rep.certificates))
}

fn run_classes(cfg: &RunConfig, a: &DenseMatrix) -> Result<Sections, CliError> {
    let ips = matrix_inner_product(a, &cfg.ip)?;
    if !a.is_square() || ips.left != ips.right {
        return Err(CliError::Usage("classes needs a square matrix and one shared inner product".into()));
    }
    let summary = ip_summary(&cfg.ip, &ips);
    let r = cfg.r.unwrap_or(crate::config::DEFAULT_CLASSES_R);
    let thr = threshold_rank(a, cfg.eps)?;
    let density = core_density(a)?;
    let density_frob = core_density_via_frobenius(a)?;
    let sampled = PartitionSearch::Sampled {
        draws: PartitionSearch::DEFAULT_DRAWS,
        seed: cfg.seed,
    };
    let upper = match lp_upper_regularity_check(a, cfg.p, cfg.eta, PartitionSearch::Exhaustive, PARTITION_ENUMERATION_CAP) {
        Err(PvdError::GridTooLarge { .. }) => {
            lp_upper_regularity_check(a, cfg.p, cfg.eta, sampled, PARTITION_ENUMERATION_CAP)?
        }
        other => other?,
    };
    let pcfg = cfg.pvd_config();
    let profile = cut_pseudorandomness_profile(
        a,
        &ips.left,
        r,
        CutMaximizer::BruteForce { cap: cfg.bf_cap },
        &pcfg,
    )?;
    let mut certificates = vec![Certificate::le(
        "core_density_identity",
        (density - density_frob).abs(),
        0.0,
        1e-10 * density.abs().max(density_frob.abs()),
    )];
    certificates.extend(profile.certificates.iter().cloned());
    let result = json!({
        "threshold_rank": { "eps": cfg.eps, "value": thr },
        "core_density": { "direct": density, "via_frobenius": density_frob },
        "upper_regularity": upper,
        "profile": {
            "r": profile.r,
            "projection_values": profile.projection_values,
            "sigma_prefix_norm": profile.sigma_prefix_norm,
            "spectral_values": profile.spectral_values,
            "spectral_prefix_norm": profile.spectral_prefix_norm,
            "cut_mass_ratio": profile.cut_mass_ratio,
            "certificate_ratio": profile.certificate_ratio,
        },
    });
    Ok((Some(summary), result, certificates))
}

fn run_cur(cfg: &RunConfig, a: &DenseMatrix) -> Result<Sections, CliError> {
    if cfg.ip != IpPreset::Euclidean {
        return Err(CliError::Usage("cur uses the Euclidean inner product only".into()));
    }
    let ips = InnerProductPair::euclidean(a.rows(), a.cols());
    let d = cur_pvd(a, cfg.eps, &cfg.pvd_config())?;
    let result = json!({
        "r": d.r,
        "projection_values": d.pvd.projection_values(),
        "terms": d.terms,
        "approx_matrix": rows(&d.approx),
        "reconstruction_error": d.reconstruction_error,
        "residual_max": d.residual_max,
        "prefix_bound": d.prefix_bound,
        "eps_bound": d.eps_bound,
    });
    Ok((Some(ip_summary(&cfg.ip, &ips)), result, d.certificates))
}

fn run_maxcut(cfg: &RunConfig, a: &DenseMatrix) -> Result<Sections, CliError> {
    let ips = matrix_inner_product(a, &cfg.ip)?;
    let summary = ip_summary(&cfg.ip, &ips);
    let mcfg = MaxCutConfig {
        regularity: regularity_config(cfg),
        delta: cfg.delta,
        ..Default::default()
    };
    let est = max_cut_estimate(a, cfg.eps, &ips, &mcfg)?;
    let wiu = est.weak_irregularity_ub;
    let slack = cfg.tolerance().slack(est.estimate.abs().max(est.realized.abs()));
    let mut certificates = est.regularity.certificates.clone();
    certificates.push(Certificate::le("realized_below_estimate", est.estimate - est.realized, wiu, slack));
    certificates.push(Certificate::le("realized_above_estimate", est.realized - est.estimate, wiu, slack));
    let n = a.rows();
    let exact = (n <= cfg.bf_cap).then(|| brute_force_max_cut(a));
    if let Some(best) = exact {
        certificates.push(Certificate::le(
            "estimate_vs_max_cut",
            (est.estimate - best).abs(),
            wiu + est.grid_term,
            slack,
        ));
    }
    let result = json!({
        "estimate": est.estimate,
        "realized": est.realized,
        "side": est.side,
        "counts": est.counts,
        "delta": est.delta,
        "grid_points": est.grid_points,
        "grid_term": est.grid_term,
        "weak_irregularity_ub": wiu,
        "max_cut_bruteforce": exact,
        "regularity": regularity_value(&est.regularity),
    });
    Ok((Some(summary), result, certificates))
}

/// Exact max cut by enumerating every side containing vertex 0's complement.
fn brute_force_max_cut(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    let mut best = 0.0f64;
    for mask in 0u64..(1u64 << n.saturating_sub(1)) {
        let side: Vec<bool> = (0..n).map(|i| i > 0 && mask >> (i - 1) & 1 == 1).collect();
        best = best.max(cut_value(a, &side));
    }
    best
}

fn run_tensor(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let t = input::parse_json_tensor(&input::read_file(&cfg.input)?)?;
    let modes = tensor_modes(t.dims(), &cfg.ip)?;
    let summary = InnerProductSummary {
        preset: cfg.ip.clone(),
        weights: modes.iter().map(|m| m.weights().to_vec()).collect(),
    };
    let domain = TupleDomain::cut(modes);
    let pcfg = cfg.pvd_config();
    let max_terms = cfg.r.map_or(t.entries().len(), |r| r + 1);
    let pvd = tensor_pvd(&t, &domain, max_terms, &pcfg)?;
    let verification = tensor_bound_check(&pvd, &domain, cfg.r.unwrap_or(pvd.len()), &pcfg)?;
    let terms: Vec<Value> = pvd
        .selected()
        .iter()
        .zip(pvd.projection_values())
        .map(|(e, s)| match &e.label {
            TupleLabel::Cut { sets } => json!({ "sets": sets, "sigma": s }),
            TupleLabel::Explicit { index } => json!({ "index": index, "sigma": s }),
        })
        .collect();
    let truncation = match cfg.r {
        Some(r) => {
            let (approx, index, bound) = tensor_best_truncation(&pvd, r)?;
            Some(json!({ "r": r, "terms": index - 1, "prefix_bound": bound, "entries": approx.entries() }))
        }
        None => None,
    };
    let result = json!({
        "projection_values": pvd.projection_values(),
        "terms": terms,
        "residual_p_norm": pvd.final_residual_p_norm(),
        "exhausted": pvd.exhausted(),
        "frobenius_norm": pvd.source_frob_norm(),
        "truncation": truncation,
        "verification": {
            "projected_norm": verification.projected_norm,
            "sigma_norm": verification.sigma_norm,
            "residual_p_norms": verification.residual_p_norms,
        },
    });
    Ok(Outcome {
        input: InputSummary {
            path: cfg.input.display().to_string(),
            format: InputFormat::Json,
            shape: t.dims().to_vec(),
            labels: None,
        },
        inner_product: Some(summary),
        result,
        certificates: verification.certificates,
    })
}

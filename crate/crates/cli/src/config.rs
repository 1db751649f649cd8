//! Command-line arguments and the validated run configuration.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::CliError;
use crate::input::InputFormat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Subcommand)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Cut-domain projection value decomposition.
    Pvd,
    /// Normalized and unnormalized cut norms with witnesses.
    Cutnorm,
    /// Weak regularity partition.
    Weakreg,
    /// Szemeredi-type partition via the pigeonhole scan.
    Szemreg,
    /// Graph-class diagnostics: threshold rank, core density, L_p upper regularity.
    Classes,
    /// Column-row decomposition.
    Cur,
    /// Cut-tuple decomposition of a tensor (JSON input).
    Tensor,
    /// Max-cut estimate from the weak regularity approximation.
    Maxcut,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Command::Pvd => "pvd",
            Command::Cutnorm => "cutnorm",
            Command::Weakreg => "weakreg",
            Command::Szemreg => "szemreg",
            Command::Classes => "classes",
            Command::Cur => "cur",
            Command::Tensor => "tensor",
            Command::Maxcut => "maxcut",
        };
        f.write_str(s)
    }
}

/// Inner-product preset selected with `--ip`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "path", rename_all = "kebab-case")]
pub enum IpPreset {
    Euclidean,
    Degree,
    DegreePlusAvg,
    File(PathBuf),
}

impl FromStr for IpPreset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "euclidean" => Ok(IpPreset::Euclidean),
            "degree" => Ok(IpPreset::Degree),
            "degree-plus-avg" => Ok(IpPreset::DegreePlusAvg),
            _ => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Ok(IpPreset::File(PathBuf::from(p))),
                _ => Err(format!(
                    "expected euclidean, degree, degree-plus-avg or file:<path>, got {s:?}"
                )),
            },
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "pvd", version, about = "Projection value decompositions and regularity reports")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub args: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Input file.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, global = true, default_value = "matrix-market")]
    pub format: InputFormat,
    /// euclidean | degree | degree-plus-avg | file:<path>
    #[arg(long, global = true)]
    pub ip: Option<IpPreset>,
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    #[arg(long, global = true)]
    pub r: Option<usize>,
    #[arg(long, global = true)]
    pub p: Option<f64>,
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    /// Growth base `c` of the Szemeredi scan.
    #[arg(long, global = true)]
    pub base: Option<f64>,
    /// Split-fraction grid step for maxcut (default eps/4).
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    #[arg(long, global = true)]
    pub tol_abs: Option<f64>,
    #[arg(long, global = true)]
    pub tol_rel: Option<f64>,
    /// Largest side length handled by exhaustive enumeration.
    #[arg(long, global = true)]
    pub bf_cap: Option<usize>,
    /// Report path; stdout when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Seed for sampled searches.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

pub const DEFAULT_EPS: f64 = 0.5;
pub const DEFAULT_SZEMEREDI_EPS: f64 = 0.8;
pub const DEFAULT_BASE: f64 = 16.0;
pub const DEFAULT_P: f64 = 2.0;
pub const DEFAULT_ETA: f64 = 0.5;
pub const DEFAULT_CLASSES_R: usize = 4;

/// Fully resolved configuration for one invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub subcommand: Command,
    pub input: PathBuf,
    pub format: InputFormat,
    pub ip: IpPreset,
    pub eps: f64,
    pub r: Option<usize>,
    pub p: f64,
    pub eta: f64,
    pub base: f64,
    pub delta: Option<f64>,
    pub tol_abs: f64,
    pub tol_rel: f64,
    pub bf_cap: usize,
    pub seed: u64,
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("--{name} must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    /// Applies per-subcommand defaults and range checks.
    pub fn resolve(command: Command, args: CommonArgs) -> Result<Self, CliError> {
        let input = args
            .input
            .ok_or_else(|| CliError::Usage("--input is required".into()))?;
        let default_eps = if command == Command::Szemreg {
            DEFAULT_SZEMEREDI_EPS
        } else {
            DEFAULT_EPS
        };
        let default_ip = if command == Command::Classes {
            IpPreset::Degree
        } else {
            IpPreset::Euclidean
        };
        let default_r = (command == Command::Classes).then_some(DEFAULT_CLASSES_R);
        let defaults = pvd_core::Tolerance::default();
        let cfg = RunConfig {
            subcommand: command,
            input,
            format: if command == Command::Tensor {
                InputFormat::Json
            } else {
                args.format
            },
            ip: args.ip.unwrap_or(default_ip),
            eps: positive("eps", args.eps.unwrap_or(default_eps))?,
            r: args.r.or(default_r),
            p: args.p.unwrap_or(DEFAULT_P),
            eta: args.eta.unwrap_or(DEFAULT_ETA),
            base: args.base.unwrap_or(DEFAULT_BASE),
            delta: args.delta,
            tol_abs: args.tol_abs.unwrap_or(defaults.abs),
            tol_rel: args.tol_rel.unwrap_or(defaults.rel),
            bf_cap: args.bf_cap.unwrap_or(pvd_core::cut::DEFAULT_BRUTE_FORCE_CAP),
            seed: args.seed.unwrap_or(0),
            output: args.output,
        };
        if !(cfg.p > 1.0 && cfg.p.is_finite()) {
            return Err(CliError::Usage(format!("--p must exceed 1, got {}", cfg.p)));
        }
        if !(cfg.eta > 0.0 && cfg.eta <= 1.0) {
            return Err(CliError::Usage(format!("--eta must lie in (0, 1], got {}", cfg.eta)));
        }
        if !(cfg.base > 1.0 && cfg.base.is_finite()) {
            return Err(CliError::Usage(format!("--base must exceed 1, got {}", cfg.base)));
        }
        if let Some(d) = cfg.delta {
            if !(d > 0.0 && d <= 1.0) {
                return Err(CliError::Usage(format!("--delta must lie in (0, 1], got {d}")));
            }
        }
        if !(cfg.tol_abs >= 0.0 && cfg.tol_rel >= 0.0) {
            return Err(CliError::Usage("tolerances must be nonnegative".into()));
        }
        if cfg.bf_cap == 0 {
            return Err(CliError::Usage("--bf-cap must be positive".into()));
        }
        if cfg.r == Some(0) {
            return Err(CliError::Usage("--r must be positive".into()));
        }
        Ok(cfg)
    }

    pub fn tolerance(&self) -> pvd_core::Tolerance {
        pvd_core::Tolerance::new(self.tol_abs, self.tol_rel)
    }

    pub fn pvd_config(&self) -> pvd_core::PvdConfig {
        pvd_core::PvdConfig {
            tol: self.tolerance(),
            brute_force_cap: self.bf_cap,
            ..Default::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ip_presets() {
        assert_eq!("degree".parse::<IpPreset>().unwrap(), IpPreset::Degree);
        assert_eq!(
            "file:w.txt".parse::<IpPreset>().unwrap(),
            IpPreset::File(PathBuf::from("w.txt"))
        );
        assert!("file:".parse::<IpPreset>().is_err());
        assert!("cosine".parse::<IpPreset>().is_err());
    }

    #[test]
    fn defaults_per_subcommand() {
        let cli = Cli::parse_from(["pvd", "szemreg", "--input", "g.mtx"]);
        let cfg = RunConfig::resolve(cli.command, cli.args).unwrap();
        assert_eq!((cfg.eps, cfg.base), (0.8, 16.0));
        let cli = Cli::parse_from(["pvd", "classes", "--input", "g.mtx"]);
        let cfg = RunConfig::resolve(cli.command, cli.args).unwrap();
        assert_eq!((cfg.ip, cfg.r), (IpPreset::Degree, Some(4)));
    }

    #[test]
    fn range_checks() {
        let bad = [
            vec!["pvd", "weakreg", "--input", "x", "--eps", "0"],
            vec!["pvd", "classes", "--input", "x", "--p", "1"],
            vec!["pvd", "classes", "--input", "x", "--eta", "1.5"],
            vec!["pvd", "maxcut", "--input", "x", "--delta", "2"],
            vec!["pvd", "pvd", "--input", "x", "--r", "0"],
            vec!["pvd", "pvd"],
        ];
        for argv in bad {
            let cli = Cli::parse_from(&argv);
            assert!(RunConfig::resolve(cli.command, cli.args).is_err(), "{argv:?}");
        }
    }
}

//! Command-line definitions and `--config` merging.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use crate::formats::{self, ParseError, SolveMode, SpreadName};

#[derive(Debug, Parser)]
#[command(name = "vqsvm", version, about = "Variational quantum SVM, linear solver and state generator on a statevector simulator")]
pub struct Cli {
    /// JSON object of long-flag names to values, applied before the explicit
    /// flags (which win). May carry "command" in place of the subcommand.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Expand a matrix file in Pauli strings.
    Decompose(DecomposeArgs),
    /// Train a universal circuit to prepare a target state.
    PrepareState(PrepareStateArgs),
    /// Solve F x = y exactly or variationally.
    SolveLinear(SolveLinearArgs),
    /// Train exact and/or variational least-squares SVMs.
    Svm(SvmArgs),
    /// Compose two trained circuits into a state-to-state map.
    Qfpga(QfpgaArgs),
    /// Write a two-cluster dataset.
    GenerateData(GenerateDataArgs),
}

/// Steepest-descent flags. Unset values fall back to per-command defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct ScheduleArgs {
    /// Initial learning rate.
    #[arg(long)]
    pub xi1: Option<f64>,
    /// Learning-rate decay per step.
    #[arg(long)]
    pub xi2: Option<f64>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Stop once the cost falls below this.
    #[arg(long)]
    pub cost_tolerance: Option<f64>,
    /// Central finite-difference step.
    #[arg(long)]
    pub fd_step: Option<f64>,
}

/// A state given as a vector file, `basis:<index>` or `random:<seed>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StateSource {
    File(PathBuf),
    Basis(usize),
    Random(u64),
}

impl FromStr for StateSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if let Some(k) = s.strip_prefix("basis:") {
            return k.parse().map(Self::Basis).map_err(|_| format!("bad basis index {k:?}"));
        }
        if let Some(k) = s.strip_prefix("random:") {
            return k.parse().map(Self::Random).map_err(|_| format!("bad seed {k:?}"));
        }
        Ok(Self::File(PathBuf::from(s)))
    }
}

/// Initial angles: `random`, `identity`, or a parameter file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitSource {
    Random,
    Identity,
    File(PathBuf),
}

impl FromStr for InitSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "random" => Self::Random,
            "identity" => Self::Identity,
            path => Self::File(PathBuf::from(path)),
        })
    }
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[arg(long, value_name = "FILE")]
    pub matrix: PathBuf,
    /// Expansion file to write.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Recompute every coefficient from column-state circuits (N <= 2) and
    /// fail if any differs by more than 1e-8.
    #[arg(long)]
    pub verify_circuit: bool,
}

#[derive(Debug, Args)]
pub struct PrepareStateArgs {
    /// Target state (normalized on read).
    #[arg(long, value_name = "STATE")]
    pub target: StateSource,
    /// Required for `basis:` and `random:` targets; checked against files.
    #[arg(long)]
    pub n_qubits: Option<usize>,
    #[arg(long, default_value = "random", value_name = "INIT")]
    pub init: InitSource,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    /// Seed for random initial angles.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Parameter file for the trained angles.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// `step,cost` CSV.
    #[arg(long, value_name = "FILE")]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveLinearArgs {
    #[arg(long, value_name = "FILE")]
    pub matrix: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub rhs: PathBuf,
    #[arg(long, value_enum, default_value_t = SolveMode::Direct)]
    pub mode: SolveMode,
    /// Keep direct-mode amplitudes real.
    #[arg(long)]
    pub real_only: bool,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    /// Seed for the random trial state.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Solution JSON.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SvmMethodArg {
    Both,
    Exact,
    Variational,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("data").required(true).args(["dataset", "generator"])))]
pub struct SvmArgs {
    /// Dataset CSV.
    #[arg(long, value_name = "FILE")]
    pub dataset: Option<PathBuf>,
    /// Generator config JSON (r, n_red, n_blue, theta_seed, point_seed, spread).
    #[arg(long, value_name = "FILE")]
    pub generator: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, value_enum, default_value_t = SvmMethodArg::Both)]
    pub method: SvmMethodArg,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    /// Seed for the random trial state.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Lower end of the plotting square for line endpoints (default: data
    /// bounding box).
    #[arg(long, allow_negative_numbers = true)]
    pub range_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub range_max: Option<f64>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct QfpgaArgs {
    #[arg(long, value_name = "STATE")]
    pub initial: StateSource,
    #[arg(long = "final", value_name = "STATE")]
    pub final_state: StateSource,
    #[arg(long)]
    pub n_qubits: Option<usize>,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Matrix file for the composed unitary.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// JSON with the fidelity and both preparation costs.
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateDataArgs {
    /// Cluster radius.
    #[arg(long, default_value_t = 2.0)]
    pub r: f64,
    #[arg(long, default_value_t = 31)]
    pub n_red: usize,
    #[arg(long, default_value_t = 32)]
    pub n_blue: usize,
    #[arg(long, default_value_t = 0)]
    pub theta_seed: u64,
    #[arg(long, default_value_t = 1)]
    pub point_seed: u64,
    #[arg(long, value_enum, default_value_t = SpreadName::Variance)]
    pub spread: SpreadName,
    /// Dataset CSV.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

fn json_flags(path: &Path) -> anyhow::Result<(Option<String>, Vec<(String, Vec<OsString>)>)> {
    let name = path.display().to_string();
    let text = formats::read_text(path)?;
    let value: Value = formats::parse_json(&text, &name)?;
    let Value::Object(map) = value else {
        return Err(ParseError {
            source_name: name,
            line: 1,
            message: "config must be a JSON object".into(),
        }
        .into());
    };
    let mut command = None;
    let mut flags = Vec::new();
    for (key, value) in map {
        if key == "command" {
            match value {
                Value::String(s) => command = Some(s),
                _ => {
                    return Err(ParseError {
                        source_name: name,
                        line: 1,
                        message: "\"command\" must be a string".into(),
                    }
                    .into())
                }
            }
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        let args = match value {
            Value::Bool(true) => vec![flag.clone().into()],
            Value::Bool(false) | Value::Null => Vec::new(),
            Value::Number(n) => vec![flag.clone().into(), n.to_string().into()],
            Value::String(s) => vec![flag.clone().into(), s.into()],
            Value::Array(_) | Value::Object(_) => {
                return Err(ParseError {
                    source_name: name,
                    line: 1,
                    message: format!("value of {key:?} must be a scalar"),
                }
                .into())
            }
        };
        flags.push((flag, args));
    }
    Ok((command, flags))
}

fn flag_name(arg: &OsString) -> Option<String> {
    let s = arg.to_str()?;
    if !s.starts_with("--") || s == "--" {
        return None;
    }
    Some(s.split('=').next().unwrap_or(s).to_owned())
}

/// Rewrites `argv` so that settings from `--config FILE` appear as ordinary
/// flags right after the subcommand. Flags given explicitly replace the
/// config's value for the same flag.
pub fn expand_config(argv: Vec<OsString>) -> anyhow::Result<Vec<OsString>> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut config = None;
    let mut iter = argv.into_iter();
    let bin = iter.next().unwrap_or_else(|| "vqsvm".into());
    while let Some(arg) = iter.next() {
        match arg.to_str() {
            Some("--config") => match iter.next() {
                Some(path) => config = Some(PathBuf::from(path)),
                None => rest.push(arg),
            },
            Some(s) if s.starts_with("--config=") => config = Some(PathBuf::from(&s["--config=".len()..])),
            _ => rest.push(arg),
        }
    }
    let Some(path) = config else {
        let mut out = vec![bin];
        out.extend(rest);
        return Ok(out);
    };
    let (json_command, flags) = json_flags(&path)?;

    let explicit_command = rest.first().and_then(|a| a.to_str()).filter(|s| !s.starts_with('-')).map(str::to_owned);
    let command = match (explicit_command, json_command) {
        (Some(a), Some(b)) if a != b => {
            return Err(ParseError {
                source_name: path.display().to_string(),
                line: 1,
                message: format!("config is for {b:?} but the command line runs {a:?}"),
            }
            .into())
        }
        (Some(a), _) => {
            rest.remove(0);
            a
        }
        (None, Some(b)) => b,
        (None, None) => {
            let mut out = vec![bin];
            out.extend(rest);
            return Ok(out);
        }
    };
    let explicit: Vec<String> = rest.iter().filter_map(flag_name).collect();
    let mut out = vec![bin, command.into()];
    for (flag, args) in flags {
        if !explicit.contains(&flag) {
            out.extend(args);
        }
    }
    out.extend(rest);
    Ok(out)
}

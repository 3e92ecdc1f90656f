//! Command-line surface. Every invocation writes exactly one JSON document,
//! to `--json-out` when given and to stdout otherwise.
//!
//! Exit codes: 0 determinate true / success, 1 determinate false / domain
//! failure, 2 indeterminate, 3 malformed input.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bundle::{
    project_p, relative_distance, trivialize_phi, trivialize_phi_inv, FramePoint, SplitFrame,
};
use crate::delta::{common_complement, in_delta};
use crate::error::Error;
use crate::fuzz::{run_fuzz, run_instance, FuzzConfig, Suite};
use crate::grassmann::{
    buckholtz_report, graph_chart, graph_chart_inv, perp, GraphCoordinate, Subspace,
};
use crate::substrate::{Tolerances, TriState};

pub const EXIT_TRUE: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_INDETERMINATE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "cocomp",
    version,
    about = "Common complements, oblique projectors and bundle charts over C^n"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Absolute tolerance for equality checks.
    #[arg(long = "tol-eq", global = true)]
    pub tol_eq: Option<f64>,
    /// Margin required before `x < 1` is accepted.
    #[arg(long = "tol-margin", global = true)]
    pub tol_margin: Option<f64>,
    /// Write the JSON result here instead of stdout.
    #[arg(long = "json-out", global = true)]
    pub json_out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Direct-sum verdicts for a pair `{"s": ..., "t": ...}`.
    Check { input: PathBuf },
    /// Common complement certificate for a pair `{"s": ..., "t": ...}`.
    Complement { input: PathBuf },
    /// Graph chart of `{"z", "s"}`, or its inverse for `{"anchor", "x"}`.
    Chart { input: PathBuf },
    /// Trivialization of `{"z0", "frame"}` and its inverse.
    Triv { input: PathBuf },
    /// Seeded property harness.
    Fuzz(FuzzArgs),
}

#[derive(Debug, Args)]
pub struct FuzzArgs {
    /// Ambient dimensions: comma separated values or inclusive ranges `a..b`.
    #[arg(long, default_value = "2..8")]
    pub dims: String,
    /// Trials per dimension and suite.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Comma separated suites (default: all).
    #[arg(long)]
    pub suites: Option<String>,
    /// Replay one instance from a seed recorded in a report (needs exactly
    /// one suite and one dimension).
    #[arg(long)]
    pub replay: Option<u64>,
}

/// Result of a command: the JSON document and the process exit code.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub document: Value,
    pub code: i32,
}

impl Outcome {
    fn new(document: Value, code: i32) -> Self {
        Outcome { document, code }
    }

    fn error(code: i32, kind: &str, message: impl Into<String>) -> Self {
        Outcome::new(
            json!({ "error": { "kind": kind, "message": message.into() } }),
            code,
        )
    }

    fn input(message: impl Into<String>) -> Self {
        Outcome::error(EXIT_INPUT, "input", message)
    }
}

/// Maps library errors to exit codes: malformed data is an input error,
/// everything else is a determinate negative answer.
fn from_error(e: &Error) -> Outcome {
    let kind = match e {
        Error::DimensionMismatch { .. }
        | Error::NotSquare { .. }
        | Error::InvalidInput(_)
        | Error::InvalidGroupElement { .. } => return Outcome::input(e.to_string()),
        Error::NotInDelta { .. } => "not_in_delta",
        Error::NotComplementary { .. } => "not_complementary",
        Error::OutsideChartDomain { .. } => "outside_chart_domain",
        Error::OutsideTrivializationDomain { .. } => "outside_trivialization_domain",
        Error::GapTooLarge { .. } => "gap_too_large",
        Error::NotInvertible { .. } => "not_invertible",
        Error::SearchFailed { .. } => "search_failed",
    };
    Outcome::error(EXIT_FALSE, kind, e.to_string())
}

#[derive(Debug, Deserialize)]
struct PairInput {
    s: Subspace,
    t: Subspace,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ChartInput {
    Forward { z: Subspace, s: Subspace },
    Inverse(GraphCoordinate),
}

#[derive(Debug, Deserialize)]
struct TrivInput {
    z0: Subspace,
    frame: FramePoint,
}

#[derive(Debug, Serialize)]
struct FrameResidual {
    z_gap: f64,
    g_relative: f64,
    k_relative: f64,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Outcome> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Outcome::input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Outcome::input(format!("invalid JSON in {}: {e}", path.display())))
}

fn tolerances(global: &GlobalArgs) -> Result<Tolerances, Outcome> {
    let mut tol = Tolerances::default();
    if let Some(v) = global.tol_eq {
        tol.eq_atol = v;
    }
    if let Some(v) = global.tol_margin {
        tol.margin_delta = v;
    }
    tol.validate().map_err(|e| Outcome::input(e.to_string()))?;
    Ok(tol)
}

/// Parses `2,3,4` and `2..8` (inclusive), or a mix of both.
pub fn parse_dims(text: &str) -> Result<Vec<usize>, Error> {
    let bad = |item: &str| Error::InvalidInput(format!("invalid dimension `{item}`"));
    let mut dims = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((lo, hi)) = item.split_once("..") {
            let lo: usize = lo.trim().parse().map_err(|_| bad(item))?;
            let hi: usize = hi
                .trim()
                .trim_start_matches('=')
                .parse()
                .map_err(|_| bad(item))?;
            if lo > hi {
                return Err(bad(item));
            }
            dims.extend(lo..=hi);
        } else {
            dims.push(item.parse().map_err(|_| bad(item))?);
        }
    }
    Ok(dims)
}

pub fn parse_suites(text: &str) -> Result<Vec<Suite>, Error> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}

pub fn run(cli: &Cli) -> Outcome {
    let tol = match tolerances(&cli.global) {
        Ok(t) => t,
        Err(o) => return o,
    };
    let result = match &cli.command {
        Command::Check { input } => cmd_check(input, &tol),
        Command::Complement { input } => cmd_complement(input, cli.global.seed, &tol),
        Command::Chart { input } => cmd_chart(input, &tol),
        Command::Triv { input } => cmd_triv(input, &tol),
        Command::Fuzz(args) => cmd_fuzz(args, cli.global.seed, &tol),
    };
    result.unwrap_or_else(|o| o)
}

fn verdict_code(v: TriState) -> i32 {
    match v {
        TriState::True => EXIT_TRUE,
        TriState::False => EXIT_FALSE,
        TriState::Indeterminate => EXIT_INDETERMINATE,
    }
}

pub fn cmd_check(input: &Path, tol: &Tolerances) -> Result<Outcome, Outcome> {
    let pair: PairInput = read_json(input)?;
    let report = buckholtz_report(&pair.s, &pair.t, tol).map_err(|e| from_error(&e))?;
    let delta = in_delta(&pair.s, &pair.t).map_err(|e| from_error(&e))?;
    let verdict = if report.all_determinate() && report.consistent() {
        report.direct_sum
    } else {
        TriState::Indeterminate
    };
    let doc = json!({
        "verdict": verdict,
        "margin": report.margin(),
        "buckholtz": report,
        "in_delta": delta,
    });
    Ok(Outcome::new(doc, verdict_code(verdict)))
}

pub fn cmd_complement(input: &Path, seed: u64, tol: &Tolerances) -> Result<Outcome, Outcome> {
    let pair: PairInput = read_json(input)?;
    let cert = common_complement(&pair.s, &pair.t, tol, seed).map_err(|e| from_error(&e))?;
    let doc = serde_json::to_value(&cert).map_err(|e| Outcome::input(e.to_string()))?;
    Ok(Outcome::new(doc, EXIT_TRUE))
}

pub fn cmd_chart(input: &Path, tol: &Tolerances) -> Result<Outcome, Outcome> {
    let parsed: ChartInput = read_json(input)?;
    let doc = match parsed {
        ChartInput::Forward { z, s } => {
            let coord = graph_chart(&z, &s, tol).map_err(|e| from_error(&e))?;
            let back = graph_chart_inv(&coord, tol).map_err(|e| from_error(&e))?;
            json!({ "coordinate": coord, "round_trip_gap": back.gap(&s) })
        }
        ChartInput::Inverse(coord) => {
            let s = graph_chart_inv(&coord, tol).map_err(|e| from_error(&e))?;
            let again = graph_chart(&coord.anchor, &s, tol).map_err(|e| from_error(&e))?;
            json!({ "subspace": s, "round_trip_max_entry": again.x.max_abs_diff(&coord.x) })
        }
    };
    Ok(Outcome::new(doc, EXIT_TRUE))
}

pub fn cmd_triv(input: &Path, tol: &Tolerances) -> Result<Outcome, Outcome> {
    let parsed: TrivInput = read_json(input)?;
    let frames = SplitFrame::onto_minus(&perp(&parsed.z0));
    let f = &parsed.frame;
    let coords = trivialize_phi(&parsed.z0, &frames, f, tol).map_err(|e| from_error(&e))?;
    let back = trivialize_phi_inv(&parsed.z0, &frames, &coords, tol).map_err(|e| from_error(&e))?;
    let base = project_p(f, tol).map_err(|e| from_error(&e))?;
    let residual = FrameResidual {
        z_gap: back.z.gap(&f.z),
        g_relative: relative_distance(back.g_matrix(), f.g_matrix()),
        k_relative: relative_distance(back.k_matrix(), f.k_matrix()),
    };
    let doc = json!({
        "trivialization": coords,
        "base": { "s": base.s, "t": base.t },
        "block_residual_a": frames.block_residual(&coords.a),
        "block_residual_b": frames.block_residual(&coords.b),
        "round_trip": residual,
    });
    Ok(Outcome::new(doc, EXIT_TRUE))
}

pub fn cmd_fuzz(args: &FuzzArgs, seed: u64, tol: &Tolerances) -> Result<Outcome, Outcome> {
    let dims = parse_dims(&args.dims).map_err(|e| Outcome::input(e.to_string()))?;
    let suites = match &args.suites {
        Some(s) => parse_suites(s).map_err(|e| Outcome::input(e.to_string()))?,
        None => Suite::ALL.to_vec(),
    };
    let mut config = FuzzConfig::new(dims, args.trials, seed).with_suites(suites);
    config.tolerances = *tol;
    config
        .validate()
        .map_err(|e| Outcome::input(e.to_string()))?;

    if let Some(instance_seed) = args.replay {
        let ([suite], [dim]) = (config.suites.as_slice(), config.dims.as_slice()) else {
            return Err(Outcome::input(
                "--replay needs exactly one suite and one dimension",
            ));
        };
        let outcome = run_instance(*suite, *dim, instance_seed, tol);
        let code = match outcome.status {
            crate::fuzz::Status::Fail => EXIT_FALSE,
            _ => EXIT_TRUE,
        };
        let doc = serde_json::to_value(&outcome).map_err(|e| Outcome::input(e.to_string()))?;
        return Ok(Outcome::new(doc, code));
    }

    let report = run_fuzz(&config).map_err(|e| Outcome::input(e.to_string()))?;
    let code = if report.success() {
        EXIT_TRUE
    } else {
        EXIT_FALSE
    };
    let doc = serde_json::to_value(&report).map_err(|e| Outcome::input(e.to_string()))?;
    Ok(Outcome::new(doc, code))
}

/// Serializes the outcome to its destination and returns the exit code.
pub fn emit(outcome: &Outcome, json_out: Option<&Path>) -> i32 {
    let mut text = serde_json::to_string_pretty(&outcome.document).unwrap_or_else(|_| "{}".into());
    text.push('\n');
    if let Some(msg) = outcome
        .document
        .pointer("/error/message")
        .and_then(Value::as_str)
    {
        eprintln!("cocomp: {msg}");
    }
    match json_out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("cocomp: cannot write {}: {e}", path.display());
                return EXIT_INPUT;
            }
        }
        None => print!("{text}"),
    }
    outcome.code
}

pub fn main_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INPUT
            } else {
                EXIT_TRUE
            };
            let _ = e.print();
            return code;
        }
    };
    let outcome = run(&cli);
    emit(&outcome, cli.global.json_out.as_deref())
}

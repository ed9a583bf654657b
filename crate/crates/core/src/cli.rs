//! Command-line front end.
//!
//! Exit codes: 0 for any verdict (including inconclusive), 2 for unparsable
//! input, 3 for evaluation and I/O failures.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::function::FunctionSpec;
use crate::oscillation::{self, OscillationReport};
use crate::probes::{self, OrdinaryReport, ProbeReport};
use crate::profile::ToleranceProfile;
use crate::report::{to_json, OSCILLATION_SCHEMA, PROBE_SCHEMA, VERDICT_SCHEMA};
use crate::sequence::{Sequence, SequenceSpec};
use crate::statistical::{self, LacunaryOptions, LacunarySequence};
use crate::verdict::Verdict;
use crate::{abel, cesaro, Error};

/// Environment variable that caps `--n-max`.
pub const N_MAX_ENV: &str = "SUMMATAU_N_MAX";

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_EVAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "summatau",
    version,
    about = "Abel, Cesàro, statistical and slow-oscillation diagnostics for real sequences",
    after_help = "Sequences use the syntax name(arg=value, ...), e.g. \"alternating(c=1)\" or \
                  \"ramp\". Functions are expressions in t such as \"1/(1+t^2)\".\n\
                  SUMMATAU_N_MAX, when set, caps --n-max.\n\
                  Exit codes: 0 verdict emitted, 2 parse error, 3 evaluation error."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify the limit of a sequence under one summability method.
    Limit {
        /// Sequence spec, e.g. "alternating(c=1)".
        spec: String,
        #[arg(long, value_enum, default_value_t = Method::Abel)]
        method: Method,
        /// Lacunary sequence for st-lacunary: "powers(B)" or a file of
        /// increasing integers starting at 0.
        #[arg(long, default_value = "powers(2)")]
        theta: String,
        /// Downgrade prefix-heuristic theta violations to warnings.
        #[arg(long)]
        allow_theta_warnings: bool,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Emit the Abel mean curve as CSV.
    Curve {
        spec: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Look for Abel-continuity counterexamples on a sequence battery.
    Probe {
        /// Function of t, or a catalog name (identity, square, cube, witch,
        /// affine(a=..,b=..)).
        function: String,
        /// "default" or a file with one sequence spec per line.
        #[arg(long, default_value = "default")]
        battery: String,
        /// Also check ordinary continuity at this point.
        #[arg(long, allow_hyphen_values = true)]
        point: Option<f64>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Empirical slow-oscillation report.
    Oscillation {
        spec: String,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Abel,
    Cesaro,
    St,
    StLacunary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Truncation budget for each Abel mean.
    #[arg(long, default_value_t = 1e-8)]
    eps_tail: f64,
    /// Stabilization threshold for classification.
    #[arg(long, default_value_t = 1e-4)]
    eps_conv: f64,
    /// Mismatch margin for probe counterexamples.
    #[arg(long, default_value_t = 1e-2)]
    eps_witness: f64,
    /// Hard cap on evaluated terms.
    #[arg(long, default_value_t = 20_000_000)]
    n_max: u64,
    /// Number of Abel grid points x_j = 1 - 2^-j.
    #[arg(long, default_value_t = 20)]
    grid_depth: u32,
    /// Accept heuristic tails (unknown growth) in Converged verdicts.
    #[arg(long)]
    trust_heuristic: bool,
    /// Seed for random families that do not set one.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write to this file instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Output format (default: csv for curve, json otherwise).
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl CommonArgs {
    fn profile(&self, env_cap: Option<u64>) -> ToleranceProfile {
        let n_max = match env_cap {
            Some(cap) => self.n_max.min(cap),
            None => self.n_max,
        };
        ToleranceProfile {
            eps_tail: self.eps_tail,
            eps_conv: self.eps_conv,
            eps_witness: self.eps_witness,
            n_max,
            grid_depth: self.grid_depth,
            trust_heuristic: self.trust_heuristic,
        }
    }
}

/// A failure mapped to an exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn parse(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_PARSE,
            message: message.into(),
        }
    }

    fn eval(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_EVAL,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Profile(_) | Error::Lacunary(_) | Error::InvalidArgument(_) => {
                Failure::parse(e.to_string())
            }
            Error::Eval(_) | Error::Precondition(_) => Failure::eval(e.to_string()),
        }
    }
}

#[derive(Serialize)]
struct VerdictDoc<'a> {
    schema_version: &'static str,
    method: Method,
    spec: &'a str,
    profile: &'a ToleranceProfile,
    #[serde(flatten)]
    verdict: &'a Verdict,
}

#[derive(Serialize)]
struct ProbeDoc<'a> {
    schema_version: &'static str,
    #[serde(flatten)]
    report: &'a ProbeReport,
    profile: &'a ToleranceProfile,
    #[serde(skip_serializing_if = "Option::is_none")]
    ordinary_continuity: Option<&'a OrdinaryReport>,
}

#[derive(Serialize)]
struct OscillationDoc<'a> {
    schema_version: &'static str,
    spec: &'a str,
    profile: &'a ToleranceProfile,
    #[serde(flatten)]
    report: &'a OscillationReport,
}

/// Parse arguments, run, and write the result. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let out: &mut dyn Write = if e.use_stderr() {
                &mut *stderr
            } else {
                &mut *stdout
            };
            let _ = write!(out, "{}", e.render());
            return code;
        }
    };
    let env_cap = std::env::var(N_MAX_ENV).ok();
    match execute(&cli, env_cap.as_deref()) {
        Ok((text, output)) => match output {
            Some(path) => match fs::write(path, text) {
                Ok(()) => EXIT_OK,
                Err(e) => {
                    let _ = writeln!(stderr, "error: cannot write {}: {e}", path.display());
                    EXIT_EVAL
                }
            },
            None => {
                let _ = stdout.write_all(text.as_bytes());
                EXIT_OK
            }
        },
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn execute<'a>(
    cli: &'a Cli,
    env_cap: Option<&str>,
) -> Result<(String, Option<&'a PathBuf>), Failure> {
    let env_cap = match env_cap {
        Some(v) => Some(v.trim().parse::<u64>().map_err(|_| {
            Failure::parse(format!("{N_MAX_ENV} must be a positive integer, got '{v}'"))
        })?),
        None => None,
    };
    let common = match &cli.command {
        Command::Limit { common, .. }
        | Command::Curve { common, .. }
        | Command::Probe { common, .. }
        | Command::Oscillation { common, .. } => common,
    };
    let profile = common.profile(env_cap);
    profile
        .validate()
        .map_err(|e| Failure::parse(e.to_string()))?;

    let text = match &cli.command {
        Command::Limit {
            spec,
            method,
            theta,
            allow_theta_warnings,
            ..
        } => {
            let seq = parse_sequence(spec, common.seed)?;
            limit(
                &seq,
                *method,
                theta,
                *allow_theta_warnings,
                common.format,
                &profile,
            )?
        }
        Command::Curve { spec, .. } => {
            let seq = parse_sequence(spec, common.seed)?;
            let curve = abel::mean_curve(&seq, &profile)?;
            match common.format.unwrap_or(Format::Csv) {
                Format::Csv => curve.to_csv(),
                Format::Json => {
                    return Err(Failure::parse(
                        "curve supports --format csv only".to_string(),
                    ))
                }
            }
        }
        Command::Probe {
            function,
            battery,
            point,
            ..
        } => {
            if common.format == Some(Format::Csv) {
                return Err(Failure::parse("probe supports --format json only"));
            }
            let f = FunctionSpec::parse(function)
                .map_err(|e| Failure::parse(format!("function: {e}")))?;
            let sequences = load_battery(battery, common.seed)?;
            let mut report = probes::probe_abel_continuity(&f, &sequences, &profile)?;
            if battery != "default" {
                report.battery_version = "custom".into();
            }
            let ordinary = match point {
                Some(p) => Some(probes::probe_ordinary_continuity(&f, *p, &profile)?),
                None => None,
            };
            to_json(&ProbeDoc {
                schema_version: PROBE_SCHEMA,
                report: &report,
                profile: &profile,
                ordinary_continuity: ordinary.as_ref(),
            })
        }
        Command::Oscillation { spec, .. } => {
            let seq = parse_sequence(spec, common.seed)?;
            let (report, prof) = oscillation::is_slowly_oscillating(&seq, &profile)?;
            match common.format.unwrap_or(Format::Json) {
                Format::Csv => prof.to_csv(),
                Format::Json => to_json(&OscillationDoc {
                    schema_version: OSCILLATION_SCHEMA,
                    spec: seq.label(),
                    profile: &profile,
                    report: &report,
                }),
            }
        }
    };
    Ok((text, common.output.as_ref()))
}

fn limit(
    seq: &Sequence,
    method: Method,
    theta: &str,
    allow_theta_warnings: bool,
    format: Option<Format>,
    profile: &ToleranceProfile,
) -> Result<String, Failure> {
    let csv = format == Some(Format::Csv);
    let verdict = match method {
        Method::Abel => {
            let curve = abel::mean_curve(seq, profile)?;
            if csv {
                return Ok(curve.to_csv());
            }
            abel::classify_curve(&curve)
        }
        Method::Cesaro => {
            let p = cesaro::cesaro_means(seq, &cesaro::default_n_grid(profile))?;
            if csv {
                return Ok(p.to_csv());
            }
            cesaro::classify_profile(&p, profile)
        }
        Method::St => {
            if csv {
                let grid: Vec<u64> = crate::grid::log_grid(16, profile.n_max, 4);
                let v = statistical::st_limit(seq, profile)?;
                let centre = v.status.limit().unwrap_or(0.0);
                let p = statistical::density_profile(seq, centre, profile.eps_conv, &grid)?;
                return Ok(p.to_csv());
            }
            statistical::st_limit(seq, profile)?
        }
        Method::StLacunary => {
            let options = LacunaryOptions {
                allow_heuristic_violations: allow_theta_warnings,
                ..Default::default()
            };
            let theta = parse_theta(theta, profile.n_max, &options)?;
            if csv {
                let v = statistical::st_lacunary_limit(seq, &theta, profile)?;
                let centre = v.status.limit().unwrap_or(0.0);
                let theta = theta.truncated(profile.n_max);
                let p = statistical::lacunary_profile(seq, &theta, centre, profile.eps_conv)?;
                return Ok(p.to_csv());
            }
            statistical::st_lacunary_limit(seq, &theta, profile)?
        }
    };
    Ok(to_json(&VerdictDoc {
        schema_version: VERDICT_SCHEMA,
        method,
        spec: seq.label(),
        profile,
        verdict: &verdict,
    }))
}

fn parse_sequence(text: &str, seed: u64) -> Result<Sequence, Failure> {
    let spec = SequenceSpec::parse(text).map_err(|e| Failure::parse(format!("sequence: {e}")))?;
    Ok(Sequence::from_spec(&spec.with_default_seed(seed)))
}

fn load_battery(arg: &str, seed: u64) -> Result<Vec<Sequence>, Failure> {
    if arg == "default" {
        return Ok(probes::default_battery_sequences());
    }
    let text = fs::read_to_string(arg)
        .map_err(|e| Failure::parse(format!("cannot read battery file {arg}: {e}")))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let seq = parse_sequence(line, seed)
            .map_err(|f| Failure::parse(format!("{arg}:{}: {}", i + 1, f.message)))?;
        out.push(seq);
    }
    Ok(out)
}

fn parse_theta(
    arg: &str,
    n_max: u64,
    options: &LacunaryOptions,
) -> Result<LacunarySequence, Failure> {
    let arg = arg.trim();
    if let Some(inner) = arg
        .strip_prefix("powers(")
        .and_then(|s| s.strip_suffix(')'))
    {
        let base: u64 = inner
            .trim()
            .parse()
            .map_err(|_| Failure::parse(format!("theta: bad base in '{arg}'")))?;
        return statistical::powers(base, n_max).map_err(|e| Failure::parse(format!("theta: {e}")));
    }
    let text = fs::read_to_string(arg)
        .map_err(|e| Failure::parse(format!("theta: cannot read {arg}: {e}")))?;
    let k: Vec<u64> = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<u64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::parse(format!("theta: {arg}: {e}")))?;
    statistical::validate_lacunary_with(&k, options)
        .map_err(|e| Failure::parse(format!("theta: {e}")))
}

//! The `qkdc` command line: argument parsing, dispatch and output formatting.
//!
//! Exit codes: 0 on success, 2 for argument and input errors, 3 when a
//! numerical procedure fails to converge.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use crate::bounds::{self, round_sig, BoundReport};
use crate::divergences::{self, Direction};
use crate::gaussian::{self, BosonicChannelParams};
use crate::privstate::{privacy_test, PrivateState};
use crate::qcore::io::{state_from_json, state_to_json};
use crate::qcore::{apply_channel, maximally_entangled, random_state, trace_distance, DensityOperator};
use crate::simulate::{make_channel, teleport_simulate, weyl_covariance, ChannelFamily};
use crate::{Error, Result};

/// Significant digits of every reported number.
pub const DIGITS: usize = 12;

#[derive(Parser, Debug)]
#[command(name = "qkdc", version, about = "Finite-blocklength secret-key rate bounds for quantum channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate one bound.
    Bound(BoundArgs),
    /// Hypothesis-testing relative entropy between two states.
    Dh(DhArgs),
    /// Other divergences between two states.
    Divergence(DivergenceArgs),
    /// Probability that a state passes the privacy test.
    PrivacyTest(PrivacyArgs),
    /// Compare teleportation simulation of a covariant channel with direct application.
    Simulate(SimulateArgs),
    /// Evaluate a bound over a grid of one parameter, one CSV row per point.
    Sweep(SweepArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum BoundFamily {
    Dephasing,
    Erasure,
    Eb,
    Gaussian,
    SecondOrder,
    Achievability,
    MetaConverse,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum GaussianKind {
    Thermal,
    PureLoss,
    Amplifier,
    #[value(alias = "quantum-limited-amplifier")]
    QlAmplifier,
    Additive,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Coherent,
    Reverse,
}

#[derive(Args, Debug, Clone)]
pub struct BoundParams {
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Gaussian channel kind.
    #[arg(long, value_enum)]
    pub kind: Option<GaussianKind>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub nb: Option<f64>,
    #[arg(long)]
    pub gain: Option<f64>,
    #[arg(long)]
    pub xi: Option<f64>,
    /// First-order term `D` for `second-order`.
    #[arg(long = "d")]
    pub d: Option<f64>,
    /// Variance `V` for `second-order`.
    #[arg(long = "v")]
    pub v: Option<f64>,
    /// Channel family as JSON, e.g. `{"kind":"dephasing","gamma":0.1}`, or `@file`.
    #[arg(long)]
    pub channel: Option<String>,
    /// Pure input state on `A A'` (matrix file); defaults to the maximally entangled state.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Separable reference on `A B` (matrix file), or `output` for the channel output itself.
    #[arg(long = "sep-ref")]
    pub sep_ref: Option<String>,
    #[arg(long, value_enum, default_value = "coherent")]
    pub direction: DirectionArg,
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    #[arg(value_enum)]
    pub family: BoundFamily,
    #[command(flatten)]
    pub params: BoundParams,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DhArgs {
    #[arg(long)]
    pub rho: PathBuf,
    #[arg(long)]
    pub sigma: PathBuf,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum DivergenceKind {
    Relative,
    Variance,
    Renyi,
    Max,
}

#[derive(Args, Debug)]
pub struct DivergenceArgs {
    #[arg(long, value_enum)]
    pub kind: DivergenceKind,
    #[arg(long)]
    pub rho: PathBuf,
    #[arg(long)]
    pub sigma: PathBuf,
    /// Order of the sandwiched Rényi divergence.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PrivacyArgs {
    /// State on `K K A' B'` (matrix file with four dims).
    #[arg(long)]
    pub rho: PathBuf,
    #[arg(long = "key-dim")]
    pub key_dim: usize,
    /// Use a random twisting unitary drawn from this seed instead of the untwisted test.
    #[arg(long)]
    pub twist: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Channel family as JSON or `@file`.
    #[arg(long)]
    pub channel: String,
    /// Input state (matrix file); a random state from `--seed` when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(value_enum)]
    pub family: BoundFamily,
    /// Swept parameter: one of n, eps, gamma, p, eta, nb, gain, xi.
    #[arg(long)]
    pub param: String,
    #[arg(long)]
    pub min: f64,
    #[arg(long)]
    pub max: f64,
    #[arg(long)]
    pub steps: usize,
    /// Logarithmic instead of linear spacing.
    #[arg(long)]
    pub log: bool,
    #[command(flatten)]
    pub params: BoundParams,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn arg_error(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn need<T: Copy>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| arg_error(format!("--{name} is required")))
}

fn read(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path).map_err(|e| arg_error(format!("cannot read {}: {e}", path.display())))
}

fn read_state(path: &PathBuf) -> Result<DensityOperator> {
    state_from_json(&read(path)?, false)
}

fn parse_channel(spec: &str) -> Result<ChannelFamily> {
    let text = match spec.strip_prefix('@') {
        Some(path) => read(&PathBuf::from(path))?,
        None => spec.to_string(),
    };
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("channel spec: {e}")))
}

fn gaussian_params(p: &BoundParams) -> Result<BosonicChannelParams> {
    let kind = need(p.kind, "kind")?;
    let nb = p.nb.unwrap_or(0.0);
    let params = match kind {
        GaussianKind::Thermal => BosonicChannelParams::Thermal { eta: need(p.eta, "eta")?, nb },
        GaussianKind::PureLoss => BosonicChannelParams::pure_loss(need(p.eta, "eta")?),
        GaussianKind::Amplifier => BosonicChannelParams::Amplifier { gain: need(p.gain, "gain")?, nb },
        GaussianKind::QlAmplifier => BosonicChannelParams::quantum_limited_amplifier(need(p.gain, "gain")?),
        GaussianKind::Additive => BosonicChannelParams::Additive { xi: need(p.xi, "xi")? },
    };
    params.validate()?;
    Ok(params)
}

fn family_params(spec: &ChannelFamily) -> Vec<(&'static str, f64)> {
    match spec {
        ChannelFamily::Dephasing { gamma } => vec![("gamma", *gamma)],
        ChannelFamily::Erasure { p, d } | ChannelFamily::Depolarizing { p, d } => vec![("p", *p), ("d", *d as f64)],
        ChannelFamily::Identity { d } => vec![("d", *d as f64)],
        _ => vec![],
    }
}

fn evaluate(family: BoundFamily, p: &BoundParams) -> Result<BoundReport> {
    let n = need(p.n, "n")?;
    let eps = need(p.eps, "eps")?;
    match family {
        BoundFamily::Dephasing => bounds::dephasing_boundary(need(p.gamma, "gamma")?, n, eps),
        BoundFamily::Erasure => bounds::erasure_boundary(need(p.p, "p")?, n, eps),
        BoundFamily::Eb => bounds::eb_report(n, eps),
        BoundFamily::Gaussian => gaussian::finite_n_bound(&gaussian_params(p)?, n, eps),
        BoundFamily::SecondOrder => bounds::second_order_rate(need(p.d, "d")?, need(p.v, "v")?, eps, n),
        BoundFamily::Achievability | BoundFamily::MetaConverse => {
            let spec = parse_channel(p.channel.as_deref().ok_or_else(|| arg_error("--channel is required"))?)?;
            let ch = make_channel(&spec)?;
            let input = match &p.input {
                Some(path) => read_state(path)?,
                None => maximally_entangled(ch.in_dim())?,
            };
            let report = if family == BoundFamily::Achievability {
                let direction = match p.direction {
                    DirectionArg::Coherent => Direction::Coherent,
                    DirectionArg::Reverse => Direction::Reverse,
                };
                bounds::achievability_lower(&ch, &input, eps, n, direction)?
            } else {
                let tau = match p.sep_ref.as_deref() {
                    None => return Err(arg_error("--sep-ref is required")),
                    Some("output") => apply_channel(&ch, &input, 1)?,
                    Some(path) => read_state(&PathBuf::from(path))?,
                };
                bounds::meta_converse_iid(&ch, &input, &tau, eps, n)?
            };
            Ok(report.with_family(spec.name(), &family_params(&spec)))
        }
    }
}

fn csv_text(reports: &[BoundReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(BoundReport::CSV_HEADER).map_err(|e| Error::Parse(e.to_string()))?;
    for r in reports {
        w.write_record(r.csv_record()).map_err(|e| Error::Parse(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn render_reports(reports: &[BoundReport], format: Format, single: bool) -> Result<String> {
    let rounded: Vec<BoundReport> = reports.iter().map(|r| r.rounded(DIGITS)).collect();
    match format {
        Format::Csv => csv_text(&rounded),
        Format::Json if single => Ok(rounded[0].to_json() + "\n"),
        Format::Json => Ok(serde_json::to_string(&rounded).expect("reports serialize") + "\n"),
    }
}

/// Key-value records as a one-object JSON document or a two-line CSV.
fn render_record(fields: &[(&str, serde_json::Value)], format: Format) -> String {
    match format {
        Format::Json => {
            let map: serde_json::Map<String, serde_json::Value> =
                fields.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
            serde_json::Value::Object(map).to_string() + "\n"
        }
        Format::Csv => {
            let head: Vec<&str> = fields.iter().map(|(k, _)| *k).collect();
            let vals: Vec<String> = fields
                .iter()
                .map(|(_, v)| match v {
                    serde_json::Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect();
            format!("{}\n{}\n", head.join(","), vals.join(","))
        }
    }
}

fn num(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(round_sig(x, DIGITS))
    } else {
        json!(bounds::fmt_float(x))
    }
}

/// Grid of one parameter; integers for `n`.
pub fn grid(min: f64, max: f64, steps: usize, log: bool) -> Result<Vec<f64>> {
    if steps == 0 || !(min <= max) || !min.is_finite() || !max.is_finite() {
        return Err(arg_error(format!("empty grid: min {min}, max {max}, steps {steps}")));
    }
    if log && min <= 0.0 {
        return Err(arg_error("log spacing needs min > 0"));
    }
    if steps == 1 {
        return Ok(vec![min]);
    }
    Ok((0..steps)
        .map(|i| {
            let t = i as f64 / (steps - 1) as f64;
            if i == steps - 1 {
                max
            } else if log {
                min * (max / min).powf(t)
            } else {
                min + (max - min) * t
            }
        })
        .collect())
}

fn with_value(base: &BoundParams, param: &str, x: f64) -> Result<BoundParams> {
    let mut p = base.clone();
    match param {
        "n" => p.n = Some(x.round() as u64),
        "eps" => p.eps = Some(x),
        "gamma" => p.gamma = Some(x),
        "p" => p.p = Some(x),
        "eta" => p.eta = Some(x),
        "nb" => p.nb = Some(x),
        "gain" => p.gain = Some(x),
        "xi" => p.xi = Some(x),
        "d" => p.d = Some(x),
        "v" => p.v = Some(x),
        other => return Err(arg_error(format!("cannot sweep parameter {other:?}"))),
    }
    Ok(p)
}

fn sweep(args: &SweepArgs) -> Result<String> {
    let points = grid(args.min, args.max, args.steps, args.log)?;
    let mut values: Vec<f64> = points;
    if args.param == "n" {
        values.iter_mut().for_each(|x| *x = x.round());
        values.dedup();
    }
    let params: Vec<BoundParams> = values.iter().map(|&x| with_value(&args.params, &args.param, x)).collect::<Result<_>>()?;
    // Indexed parallel collection keeps grid order.
    let reports: Vec<BoundReport> =
        params.par_iter().map(|p| evaluate(args.family, p)).collect::<Result<Vec<_>>>()?;
    render_reports(&reports, args.format, false)
}

fn dispatch(cli: Cli) -> Result<(String, Option<PathBuf>)> {
    match cli.command {
        Command::Bound(a) => {
            let r = evaluate(a.family, &a.params)?;
            Ok((render_reports(&[r], a.format, true)?, a.output))
        }
        Command::Dh(a) => {
            let rho = read_state(&a.rho)?;
            let sigma = state_from_json(&read(&a.sigma)?, true)?;
            let r = divergences::hypothesis_test_divergence(&rho, &sigma, a.eps)?;
            let out = render_record(
                &[
                    ("quantity", json!("hypothesis-testing")),
                    ("eps", num(a.eps)),
                    ("value_bits", num(r.value)),
                    ("infinite", json!(r.is_infinite())),
                ],
                a.format,
            );
            Ok((out, a.output))
        }
        Command::Divergence(a) => {
            let rho = read_state(&a.rho)?;
            let sigma = state_from_json(&read(&a.sigma)?, true)?;
            let (name, value) = match a.kind {
                DivergenceKind::Relative => ("relative-entropy", divergences::rel_entropy(&rho, &sigma)?),
                DivergenceKind::Variance => ("relative-entropy-variance", divergences::rel_entropy_variance(&rho, &sigma)?),
                DivergenceKind::Renyi => {
                    let alpha = need(a.alpha, "alpha")?;
                    ("sandwiched-renyi", divergences::sandwiched_renyi(&rho, &sigma, alpha)?)
                }
                DivergenceKind::Max => ("max-divergence", divergences::max_divergence(&rho, &sigma)?),
            };
            let mut fields = vec![("quantity", json!(name)), ("value_bits", num(value))];
            if let Some(alpha) = a.alpha {
                fields.push(("alpha", num(alpha)));
            }
            Ok((render_record(&fields, a.format), a.output))
        }
        Command::PrivacyTest(a) => {
            let rho = read_state(&a.rho)?;
            let dims = rho.dims().to_vec();
            if dims.len() != 4 || dims[0] != a.key_dim || dims[1] != a.key_dim {
                return Err(Error::DimensionMismatch(format!(
                    "state dims {dims:?} are not [K, K, dA', dB'] with K = {}",
                    a.key_dim
                )));
            }
            let shield = DensityOperator::maximally_mixed(vec![dims[2], dims[3]])?;
            let gamma = if a.twist {
                PrivateState::random_twist(a.key_dim, shield, a.seed)?
            } else {
                PrivateState::untwisted(a.key_dim, shield)?
            };
            let pass = privacy_test(&gamma, &rho)?;
            let out = render_record(
                &[("quantity", json!("privacy-test")), ("key_dim", json!(a.key_dim)), ("pass_probability", num(pass))],
                a.format,
            );
            Ok((out, a.output))
        }
        Command::Simulate(a) => {
            let spec = parse_channel(&a.channel)?;
            let ch = make_channel(&spec)?;
            let cov = weyl_covariance(&spec)?;
            let input = match &a.input {
                Some(path) => read_state(path)?,
                None => random_state(vec![ch.in_dim()], a.seed)?,
            };
            let simulated = teleport_simulate(&ch, &cov, &input)?;
            let direct = apply_channel(&ch, &input, 0)?;
            let dist = trace_distance(&simulated, &direct)?;
            let out = match a.format {
                Format::Json => {
                    let state: serde_json::Value = serde_json::from_str(&state_to_json(&simulated)).expect("valid json");
                    json!({
                        "channel": spec.name(),
                        "trace_distance": num(dist),
                        "output": state,
                    })
                    .to_string()
                        + "\n"
                }
                Format::Csv => render_record(&[("channel", json!(spec.name())), ("trace_distance", num(dist))], Format::Csv),
            };
            Ok((out, a.output))
        }
        Command::Sweep(a) => Ok((sweep(&a)?, a.output.clone())),
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("QKDC_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // Fails only if the global pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Run the command line on `argv` (including the program name).
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    configure_threads();
    match dispatch(cli) {
        Ok((text, None)) => Outcome { code: 0, stdout: text, stderr: String::new() },
        Ok((text, Some(path))) => match fs::write(&path, text) {
            Ok(()) => Outcome { code: 0, stdout: String::new(), stderr: String::new() },
            Err(e) => Outcome { code: 2, stdout: String::new(), stderr: format!("error: cannot write {}: {e}\n", path.display()) },
        },
        Err(e) => {
            let code = if e.is_numerical() { 3 } else { 2 };
            Outcome { code, stdout: String::new(), stderr: format!("error: {e}\n") }
        }
    }
}

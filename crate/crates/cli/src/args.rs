//! Command-line flags and the equivalent JSON configuration.
//!
//! Every experiment's flags double as its config schema: a config file
//! `{"experiment": {"kind": "<subcommand>", ...flags}, "out": ..., "tol": ..., "seed": ...}`
//! runs the same code path as the flags, with unknown fields rejected.

use std::path::PathBuf;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;

use crate::report::CliError;

#[derive(Parser, Debug)]
#[command(name = "fresnelio", version, about = "Fresnel integrals through Gabor phase-space analysis")]
pub struct Cli {
    /// JSON experiment configuration; replaces the subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for the CSV tables and the JSON summary. Without it the
    /// tables go to stdout and the summary to stderr.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overrides the experiment's pass/fail tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for randomly drawn sample points.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Option<Experiment>,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    /// Closed-form STFT against quadrature at random phase-space points.
    Stft(StftArgs),
    /// Sjöstrand norm of one function.
    Norm(NormArgs),
    /// Fresnel integral by the direct, phase-space and Parseval/Fourier-side routes.
    Fresnel(FresnelArgs),
    /// Operator norm of L_n and its two-sided witnesses.
    NormLn(NormLnArgs),
    /// Sharp bound for the free Schrödinger evolution and FFT checks.
    Schrodinger(SchrodingerArgs),
    /// Norms and distances of cylinder-function sequences on R^infinity.
    Cylinder(CylinderArgs),
    /// Limit of L_min along a sequence that passes a Cauchy check.
    Ltopo(LtopoArgs),
    /// Limit of L_n over the restrictions of a function on R^infinity.
    Lprime(LprimeArgs),
    /// Both sides of the windowed plane-wave kernel identity.
    AppendixA(AppendixAArgs),
    /// Tail bound of the envelope Phi and the uniform dominator constant.
    AppendixB(AppendixBArgs),
}

/// Accepts either a string or an inline JSON object and keeps it as text.
fn json_text<'de, D: Deserializer<'de>>(d: D) -> Result<String, D::Error> {
    Ok(match Value::deserialize(d)? {
        Value::String(s) => s,
        other => other.to_string(),
    })
}

fn json_text_opt<'de, D: Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    Ok(match Value::deserialize(d)? {
        Value::Null => None,
        Value::String(s) => Some(s),
        other => Some(other.to_string()),
    })
}

/// Defaults of an argument struct are whatever clap produces with no flags.
fn clap_default<T: Args + FromArgMatches>() -> T {
    let cmd = T::augment_args(clap::Command::new("defaults").no_binary_name(true));
    let m = cmd.get_matches_from(Vec::<String>::new());
    T::from_arg_matches(&m).expect("argument defaults parse")
}

macro_rules! defaults_from_clap {
    ($($t:ty),*) => {
        $(impl Default for $t {
            fn default() -> Self {
                clap_default::<$t>()
            }
        })*
    };
}

defaults_from_clap!(
    StftArgs,
    NormArgs,
    FresnelArgs,
    NormLnArgs,
    SchrodingerArgs,
    CylinderArgs,
    LtopoArgs,
    LprimeArgs,
    AppendixAArgs,
    AppendixBArgs
);

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StftArgs {
    /// Catalog name, inline JSON function spec, or path to a JSON file.
    #[arg(long, default_value = "chirp")]
    #[serde(deserialize_with = "json_text")]
    pub f: String,
    /// Gaussian window weights; empty means the L2-normalized unit window.
    #[arg(long, value_delimiter = ',')]
    pub q: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
    /// Number of random points.
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    /// Points are drawn uniformly from [-box, box]^(2d).
    #[arg(long = "box", default_value_t = 4.0)]
    #[serde(rename = "box")]
    pub extent: f64,
    #[arg(long, default_value_t = 12.0)]
    pub grid_radius: f64,
    #[arg(long, default_value_t = 0.01)]
    pub grid_step: f64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormArgs {
    #[arg(long, default_value = "gaussian")]
    #[serde(deserialize_with = "json_text")]
    pub f: String,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.0])]
    pub q: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
    /// Also evaluate the norm on a phase-space grid (one dimension only).
    #[arg(long)]
    pub grid: bool,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FresnelArgs {
    /// Catalog name, `corpus` for the whole test corpus, inline JSON, or a JSON file.
    #[arg(long, default_value = "constant1")]
    #[serde(deserialize_with = "json_text")]
    pub f: String,
    /// all, direct, phase-space, parseval or fourier-side.
    #[arg(long, default_value = "all")]
    pub method: String,
    /// gaussian or sech.
    #[arg(long, default_value = "gaussian")]
    pub mollifier: String,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
    /// cos-norm: the radial cosine in one dimension with all methods.
    #[arg(long)]
    pub preset: Option<String>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormLnArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.0])]
    pub q: Vec<f64>,
    /// `default` (1, 1e-1, ..., 1e-4) or a comma-separated list used for both alpha and eps.
    #[arg(long, default_value = "default")]
    pub witness_schedule: String,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchrodingerArgs {
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub t: f64,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.0])]
    pub q: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.01, 0.001])]
    pub eps: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
    /// One-dimensional input for the FFT propagator checks, or `corpus`.
    #[arg(long, default_value = "corpus")]
    #[serde(deserialize_with = "json_text")]
    pub f: String,
    #[arg(long, default_value_t = 60.0)]
    pub grid_radius: f64,
    #[arg(long, default_value_t = 0.01)]
    pub grid_step: f64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CylinderArgs {
    /// product-family, plane-wave-partials or gaussian-partials.
    #[arg(long, default_value = "product-family")]
    pub preset: String,
    #[arg(long, default_value_t = 16)]
    pub max_n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LtopoArgs {
    /// product-family, plane-wave-partials or gaussian-partials; ignored when a sequence is given.
    #[arg(long, default_value = "product-family")]
    pub preset: String,
    /// JSON cylinder sequence, e.g. {"kind": "plane_wave", "k": {...}}.
    #[arg(long)]
    #[serde(deserialize_with = "json_text_opt")]
    pub sequence: Option<String>,
    #[arg(long, default_value_t = 32)]
    pub max_n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LprimeArgs {
    /// plane-wave-geometric, gaussian-r-geometric, three-atom-composite or product-family; ignored when a function is given.
    #[arg(long, default_value = "gaussian-r-geometric")]
    pub preset: String,
    /// JSON sequence function, e.g. {"kind": "gaussian_l1", "r": {...}}.
    #[arg(long)]
    #[serde(deserialize_with = "json_text_opt")]
    pub function: Option<String>,
    /// Increasing dimensions; defaults to 1, 2, 4, ..., 1024.
    #[arg(long, value_delimiter = ',')]
    pub schedule: Vec<usize>,
    /// Settling tolerance of the trace.
    #[arg(long, default_value_t = 1e-10)]
    pub settle: f64,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppendixAArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.0])]
    pub k: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = vec![0.3, -0.5])]
    pub x: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = vec![-0.2, 0.7])]
    pub xi: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.1])]
    pub eps: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
    /// Node budget of the direct side.
    #[arg(long, default_value_t = 4_000_000)]
    pub max_nodes: usize,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppendixBArgs {
    #[arg(long, default_value_t = 2)]
    pub m: u32,
    /// B of the envelope tail table.
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = vec![0.0, 1.0, 10.0, 100.0])]
    pub x: Vec<f64>,
    /// Dimensions compared by the dominator check, with k_j = 2^(-j).
    #[arg(long, value_delimiter = ',', default_values_t = vec![1, 2, 4, 8])]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 6.0)]
    pub grid_radius: f64,
    #[arg(long, default_value_t = 0.05)]
    pub grid_step: f64,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Settings shared by every experiment.
#[derive(Debug, Clone)]
pub struct Globals {
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub seed: u64,
}

/// Merges the config file (if any) with the flags; flags win.
pub fn resolve(cli: Cli) -> Result<(Experiment, Globals), CliError> {
    let (experiment, out, tol, seed) = match (&cli.config, cli.command) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage("give either --config or a subcommand, not both".into()));
        }
        (None, None) => {
            let mut cmd = Cli::command();
            return Err(CliError::Usage(format!("missing subcommand\n\n{}", cmd.render_help())));
        }
        (None, Some(e)) => (e, None, None, None),
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
            let cfg: ExperimentConfig = serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))?;
            (cfg.experiment, cfg.out, cfg.tol, cfg.seed)
        }
    };
    let tol = cli.tol.or(tol);
    if let Some(t) = tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Usage(format!("--tol must be positive, got {t}")));
        }
    }
    Ok((experiment, Globals { out: cli.out.or(out), tol, seed: cli.seed.or(seed).unwrap_or(0) }))
}

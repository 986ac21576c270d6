use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

/// Maximal operators over rectangle bases: maps, Orlicz norms, weight
/// constants, covering selections, interpolation bounds and experiments.
///
/// Any flag may also be given in a `--config` JSON file under its long
/// name (`{"lambda-min": 0.01}`); flags on the command line win.
#[derive(Parser, Debug)]
#[command(name = "maxrect", version)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct Common {
    /// JSON object of defaults; unknown keys are rejected.
    #[arg(long, global = true, value_name = "FILE")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Maximum basis-set visits per enumeration.
    #[arg(long, global = true, default_value_t = 100_000_000)]
    pub budget: u64,
    /// Worker cap; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Defaults to csv for experiment tables and json otherwise.
    #[arg(long, global = true)]
    pub format: Option<Format>,
    /// Manifest path; defaults to `<out>.manifest.json` when `--out` is set.
    #[arg(long, global = true, value_name = "FILE")]
    pub manifest: Option<PathBuf>,
    /// Write 0 into every `runtime_ms` field so reruns are byte-identical.
    #[arg(long, global = true)]
    pub zero_timings: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Maximal map of one function, a weighted map, or a multilinear map.
    Compute(ComputeArgs),
    #[command(subcommand)]
    Orlicz(OrliczCommand),
    #[command(subcommand)]
    Weights(WeightsCommand),
    /// Greedy covering selections over a rectangle family.
    Cover(CoverArgs),
    #[command(subcommand)]
    Interp(InterpCommand),
    /// Endpoint distributional estimate over a λ sweep.
    Jmz(JmzArgs),
    /// Multilinear distributional estimate with Φ^(k) contrasts.
    Bsmf(BsmfArgs),
    /// The (χ, Nχ) sharpness sweep.
    Sharpness(SharpnessArgs),
    /// Weighted operator ratios next to the weight constant.
    Probe(ProbeArgs),
}

#[derive(Subcommand, Debug)]
pub enum OrliczCommand {
    /// Luxemburg norm of a function over a cell set.
    Norm(NormArgs),
}

#[derive(Subcommand, Debug)]
pub enum WeightsCommand {
    /// Multilinear A_P constant (and optional power bump) of a weight vector.
    Apvec(ApvecArgs),
}

#[derive(Subcommand, Debug)]
pub enum InterpCommand {
    /// Distributional bound for products f·g split at a truncation height.
    L1lp(L1lpArgs),
    /// Strong-type constant assembled from two restricted estimates.
    Strong(StrongArgs),
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ComputeArgs {
    /// rectangles | cubes | dyadic | eccentricity:N | sts
    #[arg(long, default_value = "rectangles")]
    pub basis: String,
    /// Multilinear order; a single `--f` is repeated m times.
    #[arg(long)]
    pub m: Option<usize>,
    /// Function file (grid JSON or `expr` preset); repeat for m > 1.
    #[arg(long)]
    pub f: Vec<String>,
    /// Weight for the weighted operator (m = 1 only).
    #[arg(long)]
    pub weight: Option<String>,
    /// brute | sweep | auto
    #[arg(long, default_value = "auto")]
    pub algorithm: String,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct NormArgs {
    /// Young function: `n=2,m=1`, `psi:n=2`, `phi_variant:n=2` or `linear`.
    #[arg(long, default_value = "n=2,m=1")]
    pub phi: String,
    #[arg(long)]
    pub f: Option<String>,
    /// all | superlevel:λ | rect:i0,j0:i1,j1
    #[arg(long, default_value = "all")]
    pub set: String,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ApvecArgs {
    /// Exponents, comma separated.
    #[arg(long)]
    pub p: Option<String>,
    /// One weight file per exponent.
    #[arg(long)]
    pub w: Vec<String>,
    #[arg(long, default_value = "rectangles")]
    pub basis: String,
    /// Target weight; defaults to the composite weight of the vector.
    #[arg(long)]
    pub nu: Option<String>,
    /// Power-bump exponent r > 1.
    #[arg(long)]
    pub bump_r: Option<f64>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct CoverArgs {
    /// half | scattered | exp
    #[arg(long, default_value = "half")]
    pub method: String,
    /// Scattering threshold in (0, 1) for `scattered`.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// `{"dims": [..], "rects": [{"lo": [..], "hi": [..]}, ..]}`.
    #[arg(long)]
    pub rects: Option<String>,
    /// given | by-measure-desc
    #[arg(long, default_value = "given")]
    pub order: String,
    /// Dimension parameter of the exponential-overlap test.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Acceptance level of the exponential-overlap test.
    #[arg(long, default_value_t = 0.5)]
    pub delta0: f64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct L1lpArgs {
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long = "B1")]
    pub b1: Option<f64>,
    #[arg(long = "B2")]
    pub b2: Option<f64>,
    #[arg(long)]
    pub f: Option<String>,
    #[arg(long)]
    pub g: Option<String>,
    /// Index of Φ_n; defaults to the grid dimension.
    #[arg(long)]
    pub n: Option<u32>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct StrongArgs {
    #[arg(long)]
    pub s1: Option<f64>,
    #[arg(long)]
    pub s2: Option<f64>,
    /// Checked against 1/s = 1/s1 + 1/s2 when given.
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long = "A")]
    pub a: Option<f64>,
    #[arg(long = "B1")]
    pub b1: Option<f64>,
    #[arg(long = "B2")]
    pub b2: Option<f64>,
    #[arg(long = "B")]
    pub b: Option<f64>,
    #[arg(long, default_value = "n=2,m=1")]
    pub phi: String,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct JmzArgs {
    /// Function files; labels are the file names.
    #[arg(long)]
    pub f: Vec<String>,
    /// Use the built-in separable test family instead of `--f`.
    #[arg(long)]
    pub family: bool,
    #[arg(long, default_value_t = 16)]
    pub cells_per_unit: usize,
    #[arg(long, default_value_t = 0.005)]
    pub lambda_min: f64,
    #[arg(long, default_value_t = 0.5)]
    pub lambda_max: f64,
    #[arg(long, default_value_t = 24)]
    pub per_decade: usize,
    #[arg(long, default_value_t = 2)]
    pub n: u32,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct BsmfArgs {
    /// One file per slot of the multilinear operator.
    #[arg(long)]
    pub f: Vec<String>,
    #[arg(long, default_value_t = 0.05)]
    pub lambda_min: f64,
    #[arg(long, default_value_t = 0.9)]
    pub lambda_max: f64,
    #[arg(long, default_value_t = 24)]
    pub per_decade: usize,
    #[arg(long, default_value_t = 2)]
    pub n: u32,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SharpnessArgs {
    /// Largest N; the sweep is N = 1, base, base², … ≤ Nmax.
    #[arg(long = "Nmax", default_value_t = 1048576.0)]
    pub n_max: f64,
    #[arg(long, default_value_t = 4.0)]
    pub base: f64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ProbeArgs {
    /// weak | strong
    #[arg(long, default_value = "strong")]
    pub mode: String,
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub w: Vec<String>,
    #[arg(long, default_value = "rectangles")]
    pub basis: String,
    /// Target weight for weak mode.
    #[arg(long)]
    pub nu: Option<String>,
    #[arg(long)]
    pub bump_r: Option<f64>,
    /// Number of random test vectors.
    #[arg(long, default_value_t = 16)]
    pub tests: usize,
}

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use stabmech::density::{self, InversionConfig, MellinSpec};
use stabmech::levy::LevyTriple;
use stabmech::num_complex::Complex64;
use stabmech::operator::{self, ExponentMatrix};
use stabmech::quad::QuadConfig;
use stabmech::sampling::{self, EmpiricalDistribution, Provenance, TailModel};
use stabmech::scaling::{self, Dim, IndexValue, IsingConstants, IsingEvaluator, PhiEvaluator, Preset, ScalingForm, ScalingFunction};
use stabmech::stable::{self, StableLaw1D};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(
    name = "stabmech",
    version,
    about = "Infinitely divisible and stable laws, renormalization fixed points and two-exponent scaling",
    allow_negative_numbers = true
)]
struct Cli {
    /// Seed for every random draw of the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Relative quadrature tolerance.
    #[arg(long, global = true, default_value_t = 1e-10)]
    rel_tol: f64,
    /// Absolute quadrature tolerance.
    #[arg(long, global = true, default_value_t = 1e-14)]
    abs_tol: f64,
    /// Output file (written atomically); standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Log characteristic function of a stable law or of a Lévy triple.
    #[command(long_about = "Log characteristic function on the real line.\n\n\
Formula: ln f(y) = iay + αΓ(−α)[c1(−iy)^α + c2(iy)^α] for α ≠ 1;\n\
ln f(y) = iay − c1·iy·ln(−iy/e^(1−γ)) + c2·iy·ln(iy/e^(1−γ)) for α = 1;\n\
ln f(y) = iay − Ry² for α = 2.\n\
With --triple: ln f(y) = iay − Ry²/2 + ∫(e^(iyx) − 1 − iyx/(1+x²)) M(dx).\n\
Output CSV: y,re,im")]
    Cf(CfArgs),
    /// Singular part of ln Z(u+v) − ln Z(u).
    #[command(long_about = "Singular part of the log partition function shift.\n\n\
Formula: ln Z(u+v) − ln Z(u) ≃ c1·αΓ(−α)·v^α (v > 0), c2·αΓ(−α)·|v|^α (v < 0);\n\
c·v ln v at α = 1; R v² at α = 2.\n\
With --triple: ln ∫e^(−vx) dμ = −av + Rv²/2 + ∫(e^(−vx) − 1 + vx/(1+x²)) M(dx).\n\
Output CSV: v,lnz")]
    Lnz(LnzArgs),
    /// Density of a stable law by Fourier inversion.
    #[command(long_about = "Stable density by inversion of the characteristic function.\n\n\
Formula: p(x) = (1/π) ∫_0^∞ Re[e^(−iyx) f(y)] dy, f = exp(ln f) of the law.\n\
Output CSV: x,density")]
    Density(DensityArgs),
    /// Mellin transform of the unit-scale stable density on the positive half-line.
    #[command(long_about = "Positive-half Mellin transform of the unit strictly stable density.\n\n\
Formula: M(s|α,ρ) = ∫_0^∞ x^(s−1) p(x) dx\n\
= ρ Γ(s) Γ(1 + (1−s)/α) / [Γ(1 + ρ(s−1)) Γ(1 + ρ − ρs)], with M(1|α,ρ) = ρ.\n\
Output CSV: s_re,s_im,M_re,M_im")]
    Mellin(MellinArgs),
    /// Draw i.i.d. variates of a stable law.
    #[command(long_about = "Random variates by the trigonometric transform of a uniform angle and an exponential.\n\n\
Formula: X = σ·sin(α(V+B))/cos(V)^(1/α)·[cos(V − α(V+B))/W]^((1−α)/α) + a,\n\
V ~ U(−π/2, π/2), W ~ Exp(1), B = arctan(β tan(πα/2))/α.\n\
Output: binary (u64 LE count, then f64 LE values) or text (one value per line).")]
    Sample(SampleArgs),
    /// Kolmogorov–Smirnov distance between a law and its renormalized n-sums.
    #[command(name = "stability-check", long_about = "Renormalization fixed-point check.\n\n\
Formula: (X_1 + … + X_n − b_n)/n^(1/α) =_d X, tested by the two-sample KS statistic\n\
against the critical value c(0.01)·sqrt((N+M)/(NM)), c(0.01) = 1.628.\n\
Output JSON.")]
    StabilityCheck(StabilityArgs),
    /// Domain-of-attraction test from the tails of a distribution.
    #[command(long_about = "Domain of attraction of an α-stable law.\n\n\
Formula: h(x) = P(|X| > x), lim h(x)/h(kx) = k^α for every k > 0,\n\
and F(−x)/(1 − F(x)) → c2/c1.\n\
Output JSON.")]
    Attraction(AttractionArgs),
    /// Normalizing constants A_n and centering b_n.
    #[command(name = "norm-constants", long_about = "Normalizing constants of the domain of attraction.\n\n\
Formula: n·h(A_n) = 1; b_n = 0 for α < 1, b_n = n·E X for α > 1,\n\
b_n = n·A_n²·∫ x/(x² + A_n²) dF for α = 1.\n\
Output JSON.")]
    NormConstants(NormArgs),
    /// Critical indexes from the characteristic exponents.
    #[command(long_about = "Critical indexes of the two-exponent scaling theory.\n\n\
Formula: α = 2 − α1, β = (α2 − 1)α1/α2, γ = (2 − α2)α1/α2, ε = (2 − α1)α2/α1,\n\
δ = 1/(α2 − 1), ν = α1/d, μ = α2/d, σ = 2d(α2 − 1)/α2, ζ = σ − d + 2.\n\
Arguments accept P/Q rationals (kept exact) or decimals.\n\
Output JSON.")]
    Indexes(IndexesArgs),
    /// Scaling function Φ(t,h) and its derivatives on a grid.
    #[command(name = "phi-grid", long_about = "Singular thermodynamic part on a (t, h) grid.\n\n\
Formula: Φ = |t|^α1·f(h/|t|^(α1/α2), sgn t) for |t|^α1 > |h|^α2, Φ = |h|^α2·g(t/|h|^(α2/α1)) otherwise,\n\
f(x,+) = 1 + f1⁺x² + f2⁺x⁴ + …, f(x,−) = 1 + f1⁻x + f2⁻x² + …, g(x) = 1 + g1x + g2x² + …;\n\
C = −∂²Φ/∂t², η = −∂Φ/∂h, χ = −∂²Φ/∂h².\n\
Output CSV: t,h,phi,C,eta,chi")]
    PhiGrid(PhiGridArgs),
    /// Ising branch (α1 = 1 on t², α2 = 16/15) on a grid.
    #[command(long_about = "Two-dimensional Ising limit forms.\n\n\
Formula: Φ ≈ t²(c1 ln|t| + c2) + c3·h·|t|^(1/8) for |t| > |h|^(8/15),\n\
Φ ≈ c4·|h|^(16/15) + t²(c5 ln|t| + c6) otherwise;\n\
C = −∂²Φ/∂t², η = −∂Φ/∂h, χ = −∂²Φ/∂h².\n\
Output CSV: t,h,phi,C,eta,chi")]
    Ising(IsingArgs),
    /// Centering function b(t) of an operator-stable law.
    #[command(name = "b-of-t", long_about = "Centering of the t-th convolution power of an operator-stable law.\n\n\
Formula: b(t) = t·∫_{1/t}^1 v^(−B) d dv, v^(−B) = exp(−B ln v);\n\
diagonal entries give d_i(t − t^(1/α_i))/(1 − 1/α_i), and t ln t at α_i = 1.\n\
Output CSV: t,b1,b2 (plus b1_quad,b2_quad with --quadrature)")]
    BOfT(BOfTArgs),
    /// Spectrum check of an exponent matrix.
    #[command(long_about = "Spectrum of the exponent matrix B of an operator-stable law.\n\n\
Formula: every eigenvalue λ of B satisfies Re λ ≥ 1/2; moments of order p < 1/Λ are finite,\n\
Λ = max Re λ; Λ = 1/2 is the normal law.\n\
Output JSON.")]
    Spectrum(MatrixArgs),
}

#[derive(Args, Debug)]
struct LawArgs {
    /// Characteristic exponent α ∈ (0, 2].
    #[arg(long)]
    alpha: Option<f64>,
    /// Skewness β ∈ [−1, 1].
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    /// Scale σ.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Location a.
    #[arg(long, default_value_t = 0.0)]
    location: f64,
    /// Right tail weight c1 (with --c2, replaces β and σ).
    #[arg(long, requires = "c2")]
    c1: Option<f64>,
    /// Left tail weight c2.
    #[arg(long, requires = "c1")]
    c2: Option<f64>,
    /// JSON law file {"alpha","c1","c2","a"[,"R"]}.
    #[arg(long, conflicts_with_all = ["alpha", "c1", "c2"])]
    law: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GridArgs {
    /// Explicit points (comma separated).
    #[arg(long = "at", value_delimiter = ',', allow_hyphen_values = true)]
    at: Vec<f64>,
    #[arg(long)]
    min: Option<f64>,
    #[arg(long)]
    max: Option<f64>,
    #[arg(long, default_value_t = 11)]
    points: usize,
}

#[derive(Args, Debug)]
struct CfArgs {
    #[command(flatten)]
    law: LawArgs,
    /// Lévy triple JSON file instead of a stable law.
    #[arg(long, conflicts_with = "law")]
    triple: Option<PathBuf>,
    /// Arguments y (comma separated).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    y: Vec<f64>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args, Debug)]
struct LnzArgs {
    #[command(flatten)]
    law: LawArgs,
    #[arg(long, conflicts_with = "law")]
    triple: Option<PathBuf>,
    /// Field shifts v (comma separated).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    v: Vec<f64>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args, Debug)]
struct DensityArgs {
    #[command(flatten)]
    law: LawArgs,
    /// Points x (comma separated).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x: Vec<f64>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args, Debug)]
struct MellinArgs {
    #[arg(long)]
    alpha: f64,
    /// Positivity parameter ρ = P(X > 0).
    #[arg(long)]
    rho: f64,
    /// Real parts of s (comma separated).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    s_re: Vec<f64>,
    /// Imaginary parts of s (comma separated).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0")]
    s_im: Vec<f64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum SampleFormat {
    Bin,
    Text,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[command(flatten)]
    law: LawArgs,
    /// Number of variates.
    #[arg(long)]
    count: usize,
    #[arg(long, value_enum, default_value_t = SampleFormat::Text)]
    format: SampleFormat,
}

#[derive(Args, Debug)]
struct StabilityArgs {
    #[command(flatten)]
    law: LawArgs,
    /// Group size n.
    #[arg(long)]
    n: usize,
    /// Sample size N.
    #[arg(long = "N", default_value_t = 100_000)]
    big_n: usize,
    /// Sample file (binary or text); its first N values are the reference,
    /// the rest are grouped.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum TailKind {
    Pareto,
    ShiftedPareto,
    ParetoLog,
    Gaussian,
}

#[derive(Args, Debug)]
struct TailArgs {
    #[arg(long, value_enum)]
    tail: TailKind,
    /// Tail index of the Pareto-type tails.
    #[arg(long, default_value_t = 1.5)]
    tail_alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    shift: f64,
    #[arg(long, default_value_t = 0.0)]
    mean: f64,
    #[arg(long, default_value_t = 1.0)]
    sd: f64,
}

#[derive(Args, Debug)]
struct AttractionArgs {
    #[command(flatten)]
    tail: TailArgs,
    /// Candidate stable index α.
    #[arg(long)]
    alpha: f64,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "2,3,5,10")]
    k: Vec<f64>,
}

#[derive(Args, Debug)]
struct NormArgs {
    #[command(flatten)]
    tail: TailArgs,
    #[arg(long)]
    alpha: f64,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    n: Vec<u64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum PresetArg {
    Classical,
    D3Rational,
    Ising,
    Experimental,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Preset {
        match p {
            PresetArg::Classical => Preset::Classical,
            PresetArg::D3Rational => Preset::D3Rational,
            PresetArg::Ising => Preset::Ising,
            PresetArg::Experimental => Preset::Experimental,
        }
    }
}

#[derive(Args, Debug)]
struct ExponentArgs {
    /// α1 as P/Q, integer or decimal.
    #[arg(long, required_unless_present = "preset")]
    alpha1: Option<String>,
    #[arg(long, required_unless_present = "preset")]
    alpha2: Option<String>,
    /// Dimension d or `inf`.
    #[arg(long, required_unless_present = "preset")]
    dim: Option<String>,
    #[arg(long, value_enum, conflicts_with_all = ["alpha1", "alpha2", "dim"])]
    preset: Option<PresetArg>,
}

#[derive(Args, Debug)]
struct IndexesArgs {
    #[command(flatten)]
    exponents: ExponentArgs,
}

#[derive(Args, Debug)]
struct TGrid {
    #[arg(long, default_value_t = -0.5)]
    tmin: f64,
    #[arg(long, default_value_t = 0.5)]
    tmax: f64,
    #[arg(long, default_value_t = 5)]
    tn: usize,
    #[arg(long, default_value_t = -0.5)]
    hmin: f64,
    #[arg(long, default_value_t = 0.5)]
    hmax: f64,
    #[arg(long, default_value_t = 5)]
    hn: usize,
}

#[derive(Args, Debug)]
struct PhiGridArgs {
    #[command(flatten)]
    exponents: ExponentArgs,
    /// f1⁺, f2⁺, … (comma separated).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    f_plus: Vec<f64>,
    /// f1⁻, f2⁻, …
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    f_minus: Vec<f64>,
    /// g1, g2, …
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    g: Vec<f64>,
    #[command(flatten)]
    grid: TGrid,
}

#[derive(Args, Debug)]
struct IsingArgs {
    #[arg(long, default_value_t = 1.0)]
    c1: f64,
    #[arg(long, default_value_t = 0.5)]
    c2: f64,
    #[arg(long, default_value_t = -1.0)]
    c3: f64,
    #[arg(long, default_value_t = -1.0)]
    c4: f64,
    #[arg(long, default_value_t = 1.0)]
    c5: f64,
    #[arg(long, default_value_t = 0.5)]
    c6: f64,
    #[command(flatten)]
    grid: TGrid,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ShapeArg {
    Diagonal,
    Scalar,
    LowerTriangular,
    Symmetric,
}

#[derive(Args, Debug)]
struct MatrixArgs {
    #[arg(long, value_enum)]
    shape: Option<ShapeArg>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Second diagonal exponent for the diagonal shape.
    #[arg(long)]
    alpha2: Option<f64>,
    /// Off-diagonal entry for triangular and symmetric shapes.
    #[arg(long)]
    beta: Option<f64>,
    /// Full matrix b11,b12,b21,b22.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "shape")]
    matrix: Vec<f64>,
}

#[derive(Args, Debug)]
struct BOfTArgs {
    #[command(flatten)]
    matrix: MatrixArgs,
    /// Drift vector d1,d2.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1,1")]
    d: Vec<f64>,
    /// Times t (comma separated).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    t: Vec<f64>,
    /// Add columns from adaptive quadrature.
    #[arg(long)]
    quadrature: bool,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Numeric { kind: &'static str, message: String },
}

macro_rules! numeric_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Numeric { kind: e.kind(), message: e.to_string() }
            }
        }
    )*};
}

numeric_from!(
    stabmech::levy::LevyError,
    stable::StableError,
    density::DensityError,
    sampling::SamplingError,
    operator::OperatorError,
    scaling::ScalingError
);

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

enum Output {
    Csv(String),
    Json(Value),
    Bytes(Vec<u8>),
}

struct RunConfig {
    seed: u64,
    inversion: InversionConfig,
    quad: QuadConfig,
    config_hash: String,
}

impl RunConfig {
    fn provenance(&self) -> Value {
        json!({"tool": "stabmech", "version": VERSION, "seed": self.seed, "config_hash": self.config_hash})
    }

    fn csv_header(&self) -> String {
        format!(
            "# stabmech {} seed={} config={}\n",
            VERSION, self.seed, self.config_hash
        )
    }
}

fn config_hash(cli: &Cli) -> String {
    let text = format!(
        "{:?}|seed={}|rel={:e}|abs={:e}",
        cli.command, cli.seed, cli.rel_tol, cli.abs_tol
    );
    hex::encode(Sha256::digest(text.as_bytes()))[..16].to_string()
}

fn linspace(min: f64, max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![min],
        _ => (0..n)
            .map(|i| min + (max - min) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

fn points(explicit: &[f64], grid: &GridArgs, name: &str) -> Result<Vec<f64>, CliError> {
    let mut v = explicit.to_vec();
    v.extend_from_slice(&grid.at);
    if let (Some(a), Some(b)) = (grid.min, grid.max) {
        v.extend(linspace(a, b, grid.points));
    } else if grid.min.is_some() || grid.max.is_some() {
        return Err(usage("--min and --max go together"));
    }
    if v.is_empty() {
        return Err(usage(format!("no {name} values given")));
    }
    Ok(v)
}

fn read_to_string(p: &Path) -> Result<String, CliError> {
    fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))
}

fn build_law(a: &LawArgs) -> Result<StableLaw1D, CliError> {
    if let Some(p) = &a.law {
        return serde_json::from_str(&read_to_string(p)?)
            .map_err(|e| CliError::Numeric { kind: "InvalidParameters", message: e.to_string() });
    }
    let alpha = a.alpha.ok_or_else(|| usage("--alpha or --law is required"))?;
    Ok(match (a.c1, a.c2) {
        (Some(_), Some(_)) if alpha == 2.0 => {
            return Err(usage("α = 2 takes --sigma, not --c1/--c2"));
        }
        (Some(c1), Some(c2)) => StableLaw1D::new(alpha, c1, c2, a.location)?,
        _ => StableLaw1D::from_beta(alpha, a.beta, a.sigma, a.location)?,
    })
}

fn read_samples(p: &Path) -> Result<EmpiricalDistribution, CliError> {
    let bytes = fs::read(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
    let prov = Provenance::External(p.display().to_string());
    if bytes.len() >= 8 {
        let count = u64::from_le_bytes(bytes[..8].try_into().unwrap());
        if (count as u128) * 8 + 8 == bytes.len() as u128 {
            return Ok(EmpiricalDistribution::from_bytes(&bytes, prov)?);
        }
    }
    let text = String::from_utf8(bytes).map_err(|_| usage("sample file is neither binary nor UTF-8 text"))?;
    Ok(EmpiricalDistribution::from_text(&text, prov)?)
}

fn tail_model(t: &TailArgs) -> TailModel {
    match t.tail {
        TailKind::Pareto => TailModel::pareto(t.tail_alpha),
        TailKind::ShiftedPareto => TailModel::shifted_pareto(t.tail_alpha, t.shift),
        TailKind::ParetoLog => TailModel::pareto_log(t.tail_alpha),
        TailKind::Gaussian => TailModel::gaussian(t.mean, t.sd),
    }
}

fn exponents(e: &ExponentArgs) -> Result<(IndexValue, IndexValue, Dim), CliError> {
    if let Some(p) = e.preset {
        return Ok(Preset::from(p).exponents());
    }
    let parse = |s: &Option<String>, n: &str| -> Result<IndexValue, CliError> {
        s.as_deref()
            .ok_or_else(|| usage(format!("--{n} is required")))?
            .parse()
            .map_err(|e: scaling::ScalingError| usage(e.to_string()))
    };
    let dim = e
        .dim
        .as_deref()
        .ok_or_else(|| usage("--dim is required"))?
        .parse()
        .map_err(|e: scaling::ScalingError| usage(e.to_string()))?;
    Ok((parse(&e.alpha1, "alpha1")?, parse(&e.alpha2, "alpha2")?, dim))
}

fn exponent_matrix(m: &MatrixArgs) -> Result<ExponentMatrix, CliError> {
    if !m.matrix.is_empty() {
        if m.matrix.len() != 4 {
            return Err(usage("--matrix takes four entries b11,b12,b21,b22"));
        }
        let v = &m.matrix;
        return Ok(ExponentMatrix::from_matrix([[v[0], v[1]], [v[2], v[3]]])?);
    }
    let shape = m.shape.ok_or_else(|| usage("--shape or --matrix is required"))?;
    let alpha = m.alpha.ok_or_else(|| usage("--alpha is required"))?;
    let need_beta = || m.beta.ok_or_else(|| usage("--beta is required for this shape"));
    Ok(match shape {
        ShapeArg::Diagonal => ExponentMatrix::diagonal(
            alpha,
            m.alpha2.ok_or_else(|| usage("--alpha2 is required for the diagonal shape"))?,
        )?,
        ShapeArg::Scalar => ExponentMatrix::scalar(alpha)?,
        ShapeArg::LowerTriangular => ExponentMatrix::lower_triangular(alpha, need_beta()?)?,
        ShapeArg::Symmetric => ExponentMatrix::symmetric(alpha, need_beta()?)?,
    })
}

fn fmt_opt(r: Result<f64, scaling::ScalingError>) -> String {
    r.map_or_else(|_| "NaN".to_string(), |v| (v + 0.0).to_string())
}

fn parse_args() -> Result<Cli, clap::Error> {
    let mut cmd = Cli::command();
    let names: Vec<String> = cmd.get_subcommands().map(|s| s.get_name().to_string()).collect();
    for n in names {
        cmd = cmd.mut_subcommand(n, |s| s.allow_negative_numbers(true));
    }
    Cli::from_arg_matches(&cmd.try_get_matches()?)
}

fn thermo_grid<F: ScalingForm>(form: &F, g: &TGrid, cfg: &RunConfig) -> Result<Output, CliError> {
    if g.tn == 0 || g.hn == 0 {
        return Err(usage("grid sizes must be positive"));
    }
    let mut s = cfg.csv_header();
    s.push_str("t,h,phi,C,eta,chi\n");
    for t in linspace(g.tmin, g.tmax, g.tn) {
        for h in linspace(g.hmin, g.hmax, g.hn) {
            s.push_str(&format!(
                "{t},{h},{},{},{},{}\n",
                fmt_opt(form.phi(t, h)),
                fmt_opt(scaling::heat_capacity(form, t, h)),
                fmt_opt(scaling::order_parameter(form, t, h)),
                fmt_opt(scaling::susceptibility(form, t, h)),
            ));
        }
    }
    Ok(Output::Csv(s))
}

fn index_json(v: &IndexValue) -> Value {
    let f = v.to_f64();
    json!({
        "value": v.to_string(),
        "float": if f.is_finite() { json!(f) } else { Value::Null },
        "exact": v.is_exact(),
    })
}

fn run(cli: &Cli, cfg: &RunConfig) -> Result<Output, CliError> {
    match &cli.command {
        Command::Cf(a) => {
            let ys = points(&a.y, &a.grid, "y")?;
            let mut s = cfg.csv_header();
            s.push_str("y,re,im\n");
            if let Some(p) = &a.triple {
                let triple = LevyTriple::from_json(&read_to_string(p)?)?;
                for y in ys {
                    let v = triple.eval_log_cf_with(&[y], &cfg.quad)?;
                    s.push_str(&format!("{y},{},{}\n", v.re, v.im));
                }
            } else {
                let law = build_law(&a.law)?;
                for y in ys {
                    let v = law.log_cf(Complex64::new(y, 0.0))?;
                    s.push_str(&format!("{y},{},{}\n", v.re, v.im));
                }
            }
            Ok(Output::Csv(s))
        }
        Command::Lnz(a) => {
            let vs = points(&a.v, &a.grid, "v")?;
            let mut s = cfg.csv_header();
            s.push_str("v,lnz\n");
            if let Some(p) = &a.triple {
                let triple = LevyTriple::from_json(&read_to_string(p)?)?;
                for v in vs {
                    s.push_str(&format!("{v},{}\n", triple.log_partition_shift_with(&[v], &cfg.quad)?));
                }
            } else {
                let law = build_law(&a.law)?;
                for v in vs {
                    s.push_str(&format!("{v},{}\n", law.singular_ln_z(v)));
                }
            }
            Ok(Output::Csv(s))
        }
        Command::Density(a) => {
            let law = build_law(&a.law)?;
            let xs = points(&a.x, &a.grid, "x")?;
            let mut s = cfg.csv_header();
            s.push_str("x,density\n");
            for x in xs {
                s.push_str(&format!("{x},{}\n", density::density(&law, x, &cfg.inversion)?));
            }
            Ok(Output::Csv(s))
        }
        Command::Mellin(a) => {
            let spec = MellinSpec::new(a.alpha, a.rho)?;
            let mut s = cfg.csv_header();
            s.push_str("s_re,s_im,M_re,M_im\n");
            for &re in &a.s_re {
                for &im in &a.s_im {
                    let m = density::mellin_value(&spec, Complex64::new(re, im))?;
                    s.push_str(&format!("{re},{im},{},{}\n", m.re, m.im));
                }
            }
            Ok(Output::Csv(s))
        }
        Command::Sample(a) => {
            let law = build_law(&a.law)?;
            let d = sampling::sample(&law, a.count, cfg.seed)?;
            match a.format {
                SampleFormat::Bin => {
                    if cli.out.is_none() {
                        return Err(usage("binary samples need --out"));
                    }
                    Ok(Output::Bytes(d.to_bytes()))
                }
                SampleFormat::Text => Ok(Output::Csv(cfg.csv_header() + &d.to_text())),
            }
        }
        Command::StabilityCheck(a) => {
            let law = build_law(&a.law)?;
            let report = match &a.input {
                None => sampling::fixed_point_distance(&law, a.n, a.big_n, cfg.seed)?,
                Some(p) => {
                    let all = read_samples(p)?;
                    if all.len() <= a.big_n {
                        return Err(usage("input holds no values beyond the first N"));
                    }
                    let prov = || Provenance::External(p.display().to_string());
                    let base = EmpiricalDistribution::new(all.values()[..a.big_n].to_vec(), prov())?;
                    let pool = EmpiricalDistribution::new(all.values()[a.big_n..].to_vec(), prov())?;
                    let b_n = if law.alpha() == 1.0 { law.sum_centering(a.n as f64) } else { 0.0 };
                    sampling::fixed_point_distance_samples(&base, &pool, a.n, law.alpha(), b_n)?
                }
            };
            Ok(Output::Json(json!({
                "law": law,
                "transition": stable::classify_transition(law.alpha())?,
                "report": report,
                "passes": report.passes(),
            })))
        }
        Command::Attraction(a) => {
            let tail = tail_model(&a.tail);
            let r = sampling::attraction_test(&tail, a.alpha, &a.k)?;
            Ok(Output::Json(json!({"tail": tail.label(), "alpha": a.alpha, "report": r})))
        }
        Command::NormConstants(a) => {
            let tail = tail_model(&a.tail);
            let rows = a
                .n
                .iter()
                .map(|&n| {
                    sampling::norm_constants(&tail, a.alpha, n)
                        .map(|c| json!({"n": n, "A_n": c.a_n, "b_n": c.b_n}))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Output::Json(json!({"tail": tail.label(), "alpha": a.alpha, "constants": rows})))
        }
        Command::Indexes(a) => {
            let (a1, a2, d) = exponents(&a.exponents)?;
            let s = scaling::critical_indexes(a1, a2, d)?;
            let mut idx = serde_json::Map::new();
            for (k, v) in [
                ("alpha", &s.alpha),
                ("beta", &s.beta),
                ("gamma", &s.gamma),
                ("delta", &s.delta),
                ("epsilon", &s.epsilon),
                ("nu", &s.nu),
                ("mu", &s.mu),
                ("zeta", &s.zeta),
                ("sigma", &s.sigma),
            ] {
                idx.insert(k.to_string(), index_json(v));
            }
            Ok(Output::Json(json!({
                "alpha1": a1.to_string(),
                "alpha2": a2.to_string(),
                "dim": d,
                "exact": s.is_exact(),
                "indexes": idx,
                "scaling_relation_residual": s.scaling_relation_residual().to_string(),
            })))
        }
        Command::PhiGrid(a) => {
            let (a1, a2, d) = exponents(&a.exponents)?;
            let e = PhiEvaluator::new(
                a1.to_f64(),
                a2.to_f64(),
                d,
                ScalingFunction::new(a.f_plus.clone(), a.f_minus.clone(), a.g.clone()),
            )?;
            thermo_grid(&e, &a.grid, cfg)
        }
        Command::Ising(a) => {
            let e = IsingEvaluator {
                constants: IsingConstants {
                    c1: a.c1,
                    c2: a.c2,
                    c3: a.c3,
                    c4: a.c4,
                    c5: a.c5,
                    c6: a.c6,
                },
            };
            thermo_grid(&e, &a.grid, cfg)
        }
        Command::BOfT(a) => {
            let b = exponent_matrix(&a.matrix)?;
            if a.d.len() != 2 {
                return Err(usage("--d takes two entries"));
            }
            let d = [a.d[0], a.d[1]];
            let mut s = cfg.csv_header();
            s.push_str(if a.quadrature { "t,b1,b2,b1_quad,b2_quad\n" } else { "t,b1,b2\n" });
            for &t in &a.t {
                let v = operator::b_of_t(&b, d, t)?;
                if a.quadrature {
                    let q = operator::b_of_t_quadrature(&b, d, t, &cfg.quad)?;
                    s.push_str(&format!("{t},{},{},{},{}\n", v[0], v[1], q[0], q[1]));
                } else {
                    s.push_str(&format!("{t},{},{}\n", v[0], v[1]));
                }
            }
            Ok(Output::Csv(s))
        }
        Command::Spectrum(m) => {
            let b = exponent_matrix(m)?;
            let r = operator::spectrum_check(&b);
            let cutoff = operator::moment_cutoff(&b).ok();
            Ok(Output::Json(json!({
                "B": b.matrix(),
                "shape": b.shape(),
                "eigenvalues": b.eigenvalues(),
                "valid": r.valid,
                "lambda": r.lambda,
                "moment_cutoff": cutoff,
            })))
        }
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn emit(cli: &Cli, cfg: &RunConfig, out: Output) -> std::io::Result<()> {
    let bytes = match out {
        Output::Csv(s) => s.into_bytes(),
        Output::Json(mut v) => {
            if let Value::Object(m) = &mut v {
                m.insert("provenance".into(), cfg.provenance());
            }
            let mut s = serde_json::to_string_pretty(&v).expect("JSON values serialize");
            s.push('\n');
            s.into_bytes()
        }
        Output::Bytes(b) => {
            if let Some(p) = &cli.out {
                let mut side = p.clone().into_os_string();
                side.push(".provenance.json");
                let prov = serde_json::to_string_pretty(&cfg.provenance()).expect("JSON values serialize");
                write_atomic(Path::new(&side), (prov + "\n").as_bytes())?;
            }
            b
        }
    };
    match &cli.out {
        Some(p) => write_atomic(p, &bytes),
        None => std::io::stdout().lock().write_all(&bytes),
    }
}

fn fail(kind: &str, message: &str, code: u8) -> ExitCode {
    let v = json!({"error": kind, "message": message});
    eprintln!("{}", serde_json::to_string(&v).expect("JSON values serialize"));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match parse_args() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = e.print();
                return ExitCode::from(if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand { 2 } else { 0 });
            }
            return fail("UsageError", e.to_string().trim(), 2);
        }
    };
    if !(cli.rel_tol > 0.0 && cli.abs_tol > 0.0) {
        return fail("UsageError", "tolerances must be positive", 2);
    }
    let cfg = RunConfig {
        seed: cli.seed,
        inversion: InversionConfig {
            rel_tol: cli.rel_tol,
            abs_tol: cli.abs_tol,
            ..InversionConfig::default()
        },
        quad: QuadConfig {
            rel_tol: cli.rel_tol,
            abs_tol: cli.abs_tol,
            ..QuadConfig::default()
        },
        config_hash: config_hash(&cli),
    };
    match run(&cli, &cfg) {
        Ok(out) => match emit(&cli, &cfg, out) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail("IoError", &e.to_string(), 1),
        },
        Err(CliError::Usage(m)) => fail("UsageError", &m, 2),
        Err(CliError::Numeric { kind, message }) => fail(kind, &message, 1),
    }
}

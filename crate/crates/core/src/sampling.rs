//! Monte-Carlo sampling of stable laws, the renormalization map on sample
//! sets, and domain-of-attraction diagnostics.

use crate::quad::{self, QuadConfig};
use crate::special::EULER_GAMMA;
use crate::stable::{StableError, StableLaw1D};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;
use thiserror::Error;

/// Draws per independent random stream.
pub const CHUNK: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplingError {
    #[error("group size {n} leaves fewer than two groups out of {len} samples")]
    GroupTooLarge { n: usize, len: usize },
    #[error("need at least two finite samples, got {0}")]
    InsufficientData(usize),
    #[error("tail ratio limit did not settle: {0}")]
    LimitNotConverged(String),
    #[error("could not bracket a root of n·h(A) = 1")]
    RootBracketFailure,
    #[error("the mean of the tail model is undefined")]
    MeanUndefined,
    #[error("degenerate upper tail: {0}")]
    DegenerateTail(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed sample file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Stable(#[from] StableError),
}

impl SamplingError {
    pub fn kind(&self) -> &'static str {
        match self {
            SamplingError::GroupTooLarge { .. } => "GroupTooLarge",
            SamplingError::InsufficientData(_) => "InsufficientData",
            SamplingError::LimitNotConverged(_) => "LimitNotConverged",
            SamplingError::RootBracketFailure => "RootBracketFailure",
            SamplingError::MeanUndefined => "MeanUndefined",
            SamplingError::DegenerateTail(_) => "DegenerateTail",
            SamplingError::InvalidArgument(_) => "InvalidArgument",
            SamplingError::Malformed(_) => "Malformed",
            SamplingError::Stable(e) => e.kind(),
        }
    }
}

/// Where a sample set came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Provenance {
    Law { law: StableLaw1D, seed: u64 },
    Renormalized { n: usize, alpha: f64, b_n: f64 },
    External(String),
}

/// Sample set kept both in draw order (for grouping) and sorted (for
/// distribution queries).
#[derive(Debug, Clone)]
pub struct EmpiricalDistribution {
    values: Vec<f64>,
    sorted: Vec<f64>,
    provenance: Provenance,
}

impl EmpiricalDistribution {
    pub fn new(values: Vec<f64>, provenance: Provenance) -> Result<Self, SamplingError> {
        if values.len() < 2 {
            return Err(SamplingError::InsufficientData(values.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SamplingError::InvalidArgument("non-finite sample".into()));
        }
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        Ok(Self {
            values,
            sorted,
            provenance,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Values in draw order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.len() as f64
    }

    /// Empirical `1 − F(x)`.
    pub fn tail(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        let pos = p * (self.len() - 1) as f64;
        let i = pos.floor() as usize;
        let j = (i + 1).min(self.len() - 1);
        let w = pos - i as f64;
        self.sorted[i] * (1.0 - w) + self.sorted[j] * w
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (self.len() - 1) as f64
    }

    /// Mean of `|X|^p`.
    pub fn abs_moment(&self, p: f64) -> f64 {
        self.values.iter().map(|v| v.abs().powf(p)).sum::<f64>() / self.len() as f64
    }

    /// Empirical characteristic function at `y`, as `(re, im)`.
    pub fn empirical_cf(&self, y: f64) -> (f64, f64) {
        let (mut c, mut s) = (0.0, 0.0);
        for v in &self.values {
            c += (y * v).cos();
            s += (y * v).sin();
        }
        let n = self.len() as f64;
        (c / n, s / n)
    }

    /// Little-endian `u64` count followed by the `f64` values in draw order.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 8 * self.len());
        out.extend_from_slice(&(self.len() as u64).to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], provenance: Provenance) -> Result<Self, SamplingError> {
        if bytes.len() < 8 {
            return Err(SamplingError::Malformed("missing count header".into()));
        }
        let n = u64::from_le_bytes(bytes[..8].try_into().unwrap()) as usize;
        if bytes.len() != 8 + 8 * n {
            return Err(SamplingError::Malformed(format!(
                "header says {n} values, payload has {} bytes",
                bytes.len() - 8
            )));
        }
        let values = bytes[8..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Self::new(values, provenance)
    }

    /// One value per line.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(24 * self.len());
        for v in &self.values {
            s.push_str(&format!("{v:?}\n"));
        }
        s
    }

    pub fn from_text(text: &str, provenance: Provenance) -> Result<Self, SamplingError> {
        let mut values = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            values.push(line.parse::<f64>().map_err(|e| {
                SamplingError::Malformed(format!("line {}: {e}", i + 1))
            })?);
        }
        Self::new(values, provenance)
    }
}

/// Standard `S1(α, β)` variate by the Chambers–Mallows–Stuck transform.
fn standard_variate(alpha: f64, beta: f64, rng: &mut ChaCha8Rng) -> f64 {
    let v = loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            break PI * (u - 0.5);
        }
    };
    let w: f64 = rng.sample(Exp1);
    if alpha == 1.0 {
        let b = FRAC_PI_2 + beta * v;
        return (b * v.tan() - beta * (FRAC_PI_2 * w * v.cos() / b).ln()) / FRAC_PI_2;
    }
    let t = beta * (FRAC_PI_2 * alpha).tan();
    let b = t.atan() / alpha;
    let s = (1.0 + t * t).powf(0.5 / alpha);
    let av = alpha * (v + b);
    s * av.sin() / v.cos().powf(1.0 / alpha) * ((v - av).cos() / w).powf((1.0 - alpha) / alpha)
}

fn draw(law: &StableLaw1D, rng: &mut ChaCha8Rng) -> f64 {
    let alpha = law.alpha();
    if alpha == 2.0 {
        let z: f64 = rng.sample(StandardNormal);
        return law.location() + (2.0 * law.gaussian_r()).sqrt() * z;
    }
    let sigma = law.sigma();
    let beta = law.beta();
    let z = standard_variate(alpha, beta, rng);
    if alpha == 1.0 {
        let mu = law.location() + (law.c1() - law.c2()) * (1.0 - EULER_GAMMA);
        sigma * z + 2.0 / PI * beta * sigma * sigma.ln() + mu
    } else {
        law.location() + sigma * z
    }
}

fn draw_many(law: &StableLaw1D, count: usize, seed: u64, stream_offset: u64) -> Vec<f64> {
    let chunks = count.div_ceil(CHUNK);
    let parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream_offset + c as u64);
            let len = CHUNK.min(count - c * CHUNK);
            (0..len).map(|_| draw(law, &mut rng)).collect()
        })
        .collect();
    parts.concat()
}

/// `n` i.i.d. draws; chunk `c` uses stream `c` of the seeded generator, so
/// the output does not depend on the number of worker threads.
pub fn sample(law: &StableLaw1D, n: usize, seed: u64) -> Result<EmpiricalDistribution, SamplingError> {
    EmpiricalDistribution::new(
        draw_many(law, n, seed, 0),
        Provenance::Law { law: *law, seed },
    )
}

/// `(X_1 + … + X_n − b_n) / n^{1/α}` over disjoint consecutive groups;
/// the remainder is discarded.
pub fn renormalize(
    samples: &EmpiricalDistribution,
    n: usize,
    alpha: f64,
    b_n: f64,
) -> Result<EmpiricalDistribution, SamplingError> {
    if n == 0 || samples.len() / n < 2 {
        return Err(SamplingError::GroupTooLarge {
            n,
            len: samples.len(),
        });
    }
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(StableError::AlphaOutOfRange(alpha).into());
    }
    let scale = (n as f64).powf(1.0 / alpha);
    let out = samples
        .values()
        .chunks_exact(n)
        .map(|g| (g.iter().sum::<f64>() - b_n) / scale)
        .collect();
    EmpiricalDistribution::new(out, Provenance::Renormalized { n, alpha, b_n })
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_two_sample(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> f64 {
    let (x, y) = (a.sorted(), b.sorted());
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Asymptotic two-sample KS critical value at significance `level`.
pub fn ks_critical(n: usize, m: usize, level: f64) -> f64 {
    let c = (-(0.5 * level).ln() / 2.0).sqrt();
    let (n, m) = (n as f64, m as f64);
    c * ((n + m) / (n * m)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPointReport {
    pub ks: f64,
    pub critical: f64,
    pub n: usize,
    pub sample_size: usize,
}

impl FixedPointReport {
    pub fn passes(&self) -> bool {
        self.ks < self.critical
    }
}

/// KS distance between `N` draws of the law and `N` renormalized `n`-sums
/// drawn independently. Laws with `α ≠ 1` are strictified first; `α = 1`
/// uses the centering `b_n = n(c1 − c2) ln n`.
pub fn fixed_point_distance(
    law: &StableLaw1D,
    n: usize,
    big_n: usize,
    seed: u64,
) -> Result<FixedPointReport, SamplingError> {
    let law = if law.alpha() == 1.0 {
        *law
    } else {
        law.strictify()?.0
    };
    let b_n = if law.alpha() == 1.0 {
        law.sum_centering(n as f64)
    } else {
        0.0
    };
    let base = sample(&law, big_n, seed)?;
    let pool = EmpiricalDistribution::new(
        draw_many(&law, n * big_n, seed, 1 << 32),
        Provenance::Law { law, seed },
    )?;
    fixed_point_distance_samples(&base, &pool, n, law.alpha(), b_n)
}

/// Fixed-point distance for externally supplied samples: `base` against the
/// renormalized `n`-sums of the independent `pool`.
pub fn fixed_point_distance_samples(
    base: &EmpiricalDistribution,
    pool: &EmpiricalDistribution,
    n: usize,
    alpha: f64,
    b_n: f64,
) -> Result<FixedPointReport, SamplingError> {
    let renorm = renormalize(pool, n, alpha, b_n)?;
    Ok(FixedPointReport {
        ks: ks_two_sample(base, &renorm),
        critical: ks_critical(base.len(), renorm.len(), 0.01),
        n,
        sample_size: base.len(),
    })
}

/// Fraction of disjoint `n`-groups in which the largest `|X_i|` exceeds
/// half of `Σ|X_i|`.
pub fn max_summand_dominance(samples: &EmpiricalDistribution, n: usize) -> Result<f64, SamplingError> {
    if n == 0 || samples.len() / n < 1 {
        return Err(SamplingError::GroupTooLarge {
            n,
            len: samples.len(),
        });
    }
    let groups = samples.values().chunks_exact(n);
    let total = groups.len();
    let hits = groups
        .filter(|g| {
            let s: f64 = g.iter().map(|v| v.abs()).sum();
            let m = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            m > 0.5 * s
        })
        .count();
    Ok(hits as f64 / total as f64)
}

type LogTail = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Distribution described through its two tails:
/// `ln(1 − F(x))` and `ln F(−x)` for `x > 0` (`−∞` where a tail vanishes).
#[derive(Clone)]
pub struct TailModel {
    ln_right: LogTail,
    ln_left: LogTail,
    /// `h(x) = C x^{−α}` exactly for `x ≥ x0`: `(α, C, x0)`.
    exact_power: Option<(f64, f64, f64)>,
    mean: Option<f64>,
    label: String,
}

impl std::fmt::Debug for TailModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TailModel")
            .field("label", &self.label)
            .field("exact_power", &self.exact_power)
            .field("mean", &self.mean)
            .finish()
    }
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `ln P(Z > x)` for a standard normal `Z`, valid far into the tail.
fn ln_normal_tail(x: f64) -> f64 {
    if x < 8.0 {
        (0.5 * statrs::function::erf::erfc(x / std::f64::consts::SQRT_2)).ln()
    } else {
        let x2 = x * x;
        let series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
        -0.5 * x2 - (x * (2.0 * PI).sqrt()).ln() + series.ln()
    }
}

impl TailModel {
    pub fn new<R, L>(label: &str, ln_right: R, ln_left: L, mean: Option<f64>) -> Self
    where
        R: Fn(f64) -> f64 + Send + Sync + 'static,
        L: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            ln_right: Arc::new(ln_right),
            ln_left: Arc::new(ln_left),
            exact_power: None,
            mean,
            label: label.to_string(),
        }
    }

    /// `1 − F(x) = x^{−α}` for `x ≥ 1`, no left tail.
    pub fn pareto(alpha: f64) -> Self {
        let mean = (alpha > 1.0).then(|| alpha / (alpha - 1.0));
        let mut t = Self::new(
            &format!("pareto({alpha})"),
            move |x| if x < 1.0 { 0.0 } else { -alpha * x.ln() },
            |_| f64::NEG_INFINITY,
            mean,
        );
        t.exact_power = Some((alpha, 1.0, 1.0));
        t
    }

    /// Pareto variable plus a constant `shift`.
    pub fn shifted_pareto(alpha: f64, shift: f64) -> Self {
        let mean = (alpha > 1.0).then(|| shift + alpha / (alpha - 1.0));
        Self::new(
            &format!("pareto({alpha})+{shift}"),
            move |x| {
                let z = x - shift;
                if z < 1.0 {
                    0.0
                } else {
                    -alpha * z.ln()
                }
            },
            move |x| if -x >= shift + 1.0 { 0.0 } else { f64::NEG_INFINITY },
            mean,
        )
    }

    /// `1 − F(x) = x^{−α} ln x` beyond the point where it starts decreasing.
    pub fn pareto_log(alpha: f64) -> Self {
        let x_star = (1.0 / alpha).exp();
        let mean = (alpha > 1.0).then(|| {
            // E X = x* + ∫_{x*}^∞ x^{−α} ln x dx
            let a1 = alpha - 1.0;
            x_star + x_star.powf(-a1) * (x_star.ln() / a1 + 1.0 / (a1 * a1))
        });
        Self::new(
            &format!("pareto_log({alpha})"),
            move |x| {
                if x < x_star {
                    0.0
                } else {
                    -alpha * x.ln() + x.ln().ln()
                }
            },
            |_| f64::NEG_INFINITY,
            mean,
        )
    }

    /// Normal law with the given mean and standard deviation.
    pub fn gaussian(mean: f64, sd: f64) -> Self {
        Self::new(
            &format!("normal({mean},{sd})"),
            move |x| ln_normal_tail((x - mean) / sd),
            move |x| ln_normal_tail((x + mean) / sd),
            Some(mean),
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn mean(&self) -> Option<f64> {
        self.mean
    }

    pub fn ln_right(&self, x: f64) -> f64 {
        (self.ln_right)(x)
    }

    pub fn ln_left(&self, x: f64) -> f64 {
        (self.ln_left)(x)
    }

    /// `ln h(x)` with `h(x) = 1 − F(x) + F(−x)`.
    pub fn ln_h(&self, x: f64) -> f64 {
        log_add_exp(self.ln_right(x), self.ln_left(x))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttractionReport {
    pub attracted: bool,
    /// Limit of `F(−x) / (1 − F(x))`.
    pub c_ratio: f64,
    /// Extrapolated limit of `|ln(h(x)/h(kx)) − α ln k| / |ln k|`, worst over `k`.
    pub first_ratio_error: f64,
    pub tolerance: f64,
}

/// Geometric x-grid `10^2 … 10^6` used for limit extrapolation.
pub fn attraction_x_grid() -> Vec<f64> {
    (0..=8).map(|i| 10f64.powf(2.0 + 0.5 * i as f64)).collect()
}

/// Least-squares fit of `e = L + C/ln x`; returns `L`.
fn extrapolate(xs: &[f64], es: &[f64]) -> f64 {
    let us: Vec<f64> = xs.iter().map(|x| 1.0 / x.ln()).collect();
    let n = us.len() as f64;
    let mu = us.iter().sum::<f64>() / n;
    let me = es.iter().sum::<f64>() / n;
    let sxx: f64 = us.iter().map(|u| (u - mu) * (u - mu)).sum();
    let sxy: f64 = us.iter().zip(es).map(|(u, e)| (u - mu) * (e - me)).sum();
    let slope = sxy / sxx;
    me - slope * mu
}

pub fn attraction_test(
    tail: &TailModel,
    alpha: f64,
    k_grid: &[f64],
) -> Result<AttractionReport, SamplingError> {
    attraction_test_with(tail, alpha, k_grid, 0.05)
}

pub fn attraction_test_with(
    tail: &TailModel,
    alpha: f64,
    k_grid: &[f64],
    tolerance: f64,
) -> Result<AttractionReport, SamplingError> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(StableError::AlphaOutOfRange(alpha).into());
    }
    if k_grid.is_empty() || k_grid.iter().any(|&k| !(k > 0.0) || k == 1.0) {
        return Err(SamplingError::InvalidArgument(
            "k grid needs positive values other than 1".into(),
        ));
    }
    let xs = attraction_x_grid();
    let mut worst = 0.0f64;
    let mut attracted = true;
    if let Some((a, _, _)) = tail.exact_power {
        // h(x)/h(kx) = k^a exactly on the power-law range
        worst = (a - alpha).abs();
        attracted = worst <= tolerance;
    } else {
        for &k in k_grid {
            let lk = k.ln();
            let es: Vec<f64> = xs
                .iter()
                .map(|&x| ((tail.ln_h(x) - tail.ln_h(k * x)) - alpha * lk).abs() / lk.abs())
                .collect();
            if es.iter().any(|e| !e.is_finite()) {
                if es.iter().all(|e| e.is_nan()) {
                    return Err(SamplingError::LimitNotConverged(format!(
                        "tails vanish on the grid for k = {k}"
                    )));
                }
                worst = f64::INFINITY;
                attracted = false;
                continue;
            }
            let m = es.len();
            let last3 = &es[m - 3..];
            let monotone = last3[1] <= last3[0] && last3[2] <= last3[1];
            let limit = extrapolate(&xs[m - 3..], last3);
            if !monotone {
                if limit.abs() < tolerance && last3[2] >= tolerance {
                    return Err(SamplingError::LimitNotConverged(format!(
                        "ratio error not monotone for k = {k}"
                    )));
                }
                if last3[2] >= tolerance {
                    attracted = false;
                }
            } else if limit.abs() >= tolerance {
                attracted = false;
            }
            let e = if monotone { limit.abs() } else { last3[2] };
            worst = worst.max(e);
        }
    }
    let x_last = *xs.last().unwrap();
    let (lr, ll) = (tail.ln_right(x_last), tail.ln_left(x_last));
    let c_ratio = if ll == f64::NEG_INFINITY {
        0.0
    } else if lr == f64::NEG_INFINITY {
        f64::INFINITY
    } else {
        (ll - lr).exp()
    };
    Ok(AttractionReport {
        attracted,
        c_ratio,
        first_ratio_error: worst,
        tolerance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormConstants {
    pub a_n: f64,
    pub b_n: f64,
}

/// `A_n` from `n h(A_n) = 1` and the centering `b_n`:
/// `0` for `α < 1`, `n·E X` for `α > 1`, and
/// `n A_n² ∫ x/(x² + A_n²) dF` for `α = 1`.
pub fn norm_constants(tail: &TailModel, alpha: f64, n: u64) -> Result<NormConstants, SamplingError> {
    if n == 0 {
        return Err(SamplingError::InvalidArgument("n must be positive".into()));
    }
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(StableError::AlphaOutOfRange(alpha).into());
    }
    let nf = n as f64;
    let target = -nf.ln();
    let closed = tail.exact_power.and_then(|(a, c, x0)| {
        let inv = 1.0 / a;
        let base = nf * c;
        let v = if inv.fract() == 0.0 && inv <= 64.0 {
            base.powi(inv as i32)
        } else {
            base.powf(inv)
        };
        (v >= x0).then_some(v)
    });
    let a_n = match closed {
        Some(v) => v,
        None => solve_log_tail(tail, target)?,
    };
    let b_n = if alpha < 1.0 {
        0.0
    } else if alpha > 1.0 {
        nf * tail.mean.ok_or(SamplingError::MeanUndefined)?
    } else {
        nf * a_n * a_n * truncated_mean_alpha_one(tail, a_n)?
    };
    Ok(NormConstants { a_n, b_n })
}

fn solve_log_tail(tail: &TailModel, target: f64) -> Result<f64, SamplingError> {
    let f = |a: f64| tail.ln_h(a) - target;
    let (mut lo, mut hi) = (1e-3f64, 1.0f64);
    let mut tries = 0;
    while f(hi) > 0.0 {
        hi *= 10.0;
        tries += 1;
        if tries > 300 || !hi.is_finite() {
            return Err(SamplingError::RootBracketFailure);
        }
    }
    tries = 0;
    while f(lo) <= 0.0 {
        lo /= 10.0;
        tries += 1;
        if tries > 300 || lo == 0.0 {
            return Err(SamplingError::RootBracketFailure);
        }
    }
    let (mut l, mut h) = (lo.ln(), hi.ln());
    for _ in 0..200 {
        let m = 0.5 * (l + h);
        if f(m.exp()) > 0.0 {
            l = m;
        } else {
            h = m;
        }
        if h - l < 1e-15 {
            break;
        }
    }
    Ok((0.5 * (l + h)).exp())
}

/// `∫ x/(x² + A²) dF = ∫_0^∞ φ'(x) (1 − F(x) − F(−x)) dx`, `φ(x) = x/(x²+A²)`.
fn truncated_mean_alpha_one(tail: &TailModel, a: f64) -> Result<f64, SamplingError> {
    let g = |x: f64| {
        let dphi = (a * a - x * x) / (x * x + a * a).powi(2);
        dphi * (tail.ln_right(x).exp() - tail.ln_left(x).exp())
    };
    let cfg = QuadConfig::default();
    let breaks: Vec<f64> = [0.0, 0.5, 1.0, 2.0, 4.0]
        .iter()
        .map(|f| f * a)
        .chain(std::iter::once(1.0).filter(|v| *v < 4.0 * a))
        .collect::<Vec<_>>();
    let mut breaks = breaks;
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let inner = quad::adaptive(g, &breaks, &cfg)
        .map_err(|e| SamplingError::LimitNotConverged(e.to_string()))?
        .0;
    let outer: f64 = quad::exp_sinh(g, 4.0 * a, &cfg)
        .map_err(|e| SamplingError::LimitNotConverged(e.to_string()))?;
    Ok(inner + outer)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailIndex {
    pub alpha_hat: f64,
    /// Estimate at or above 2: no heavy tail detected.
    pub light_tail: bool,
    pub k: usize,
}

/// Hill estimator on the `k` largest `|X|`.
pub fn tail_index_estimate(samples: &EmpiricalDistribution, k: usize) -> Result<TailIndex, SamplingError> {
    if k == 0 || 2 * k >= samples.len() {
        return Err(SamplingError::InvalidArgument(format!(
            "need 0 < k < N/2, got k = {k}, N = {}",
            samples.len()
        )));
    }
    let mut abs: Vec<f64> = samples.values().iter().map(|v| v.abs()).collect();
    let idx = abs.len() - k - 1;
    abs.select_nth_unstable_by(idx, f64::total_cmp);
    let threshold = abs[idx];
    if !(threshold > 0.0) {
        return Err(SamplingError::DegenerateTail(
            "threshold order statistic is not positive".into(),
        ));
    }
    let s: f64 = abs[idx + 1..].iter().map(|v| (v / threshold).ln()).sum();
    if !(s > 0.0) {
        return Err(SamplingError::DegenerateTail("tied upper order statistics".into()));
    }
    let alpha_hat = k as f64 / s;
    Ok(TailIndex {
        alpha_hat,
        light_tail: alpha_hat >= 2.0,
        k,
    })
}

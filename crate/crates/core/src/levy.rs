//! Canonical Lévy–Khintchine triples `[a, R, M]`.
//!
//! The log characteristic function of an infinitely divisible law on R^k
//! (k = 1 or 2 here) is
//!
//! ```text
//! ψ(y) = i⟨y,a⟩ − ½⟨y,Ry⟩ + ∫ (e^{i⟨y,x⟩} − 1 − i⟨y,x⟩/(1+‖x‖²)) M(dx)
//! ```
//!
//! and the logarithm of the partition function shifts as
//! `ln Z(u+v) − ln Z(u) = ψ(iv)` whenever the exponential moment exists.
//! The compensator is always `x/(1+‖x‖²)`.

use crate::quad::{self, QuadConfig, QuadError};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LevyError {
    #[error("quadrature failed: {0}")]
    QuadratureFailure(#[from] QuadError),
    #[error("exponential moment diverges for v = {0:?}")]
    DivergentMoment(Vec<f64>),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("stable tails with different exponents ({0} vs {1}) cannot be added")]
    IncompatibleAlpha(f64, f64),
    #[error("measures of kinds {0} and {1} cannot be combined")]
    IncompatibleMeasures(&'static str, &'static str),
    #[error("power t must be positive, got {0}")]
    NonPositiveT(f64),
    #[error("rate must be positive, got {0}")]
    InvalidRate(f64),
    #[error("covariance matrix is not symmetric")]
    NonSymmetricR,
    #[error("covariance matrix has a negative eigenvalue {0}")]
    NotPositiveSemidefinite(f64),
    #[error("only dimensions 1 and 2 are supported, got {0}")]
    UnsupportedDimension(usize),
    #[error("invalid Lévy measure: {0}")]
    InvalidMeasure(String),
    #[error("closure-backed densities cannot be serialized")]
    NotSerializable,
}

impl LevyError {
    pub fn kind(&self) -> &'static str {
        match self {
            LevyError::QuadratureFailure(_) => "QuadratureFailure",
            LevyError::DivergentMoment(_) => "DivergentMoment",
            LevyError::DimensionMismatch { .. } => "DimensionMismatch",
            LevyError::IncompatibleAlpha(..) => "IncompatibleAlpha",
            LevyError::IncompatibleMeasures(..) => "IncompatibleMeasures",
            LevyError::NonPositiveT(_) => "NonPositiveT",
            LevyError::InvalidRate(_) => "InvalidRate",
            LevyError::NonSymmetricR => "NonSymmetricR",
            LevyError::NotPositiveSemidefinite(_) => "NotPositiveSemidefinite",
            LevyError::UnsupportedDimension(_) => "UnsupportedDimension",
            LevyError::InvalidMeasure(_) => "InvalidMeasure",
            LevyError::NotSerializable => "NotSerializable",
        }
    }
}

/// A point mass of the Lévy measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub point: Vec<f64>,
    pub mass: f64,
}

/// One-dimensional density shapes usable inside [`NumericTail`].
#[derive(Clone)]
pub enum TailDensity {
    /// Arbitrary density on the real line.
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    /// Piecewise-linear interpolation of tabulated values (zero outside).
    Table { x: Vec<f64>, density: Vec<f64> },
    /// `c1 α x^{-α-1}` on x > 0 and `c2 α |x|^{-α-1}` on x < 0.
    Power { c1: f64, c2: f64, alpha: f64 },
}

impl fmt::Debug for TailDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TailDensity::Function(_) => f.write_str("Function(<closure>)"),
            TailDensity::Table { x, .. } => write!(f, "Table({} points)", x.len()),
            TailDensity::Power { c1, c2, alpha } => {
                write!(f, "Power {{ c1: {c1}, c2: {c2}, alpha: {alpha} }}")
            }
        }
    }
}

impl TailDensity {
    fn eval(&self, x: f64) -> f64 {
        match self {
            TailDensity::Function(g) => g(x),
            TailDensity::Table { x: xs, density } => {
                if xs.is_empty() || x < xs[0] || x > xs[xs.len() - 1] {
                    return 0.0;
                }
                let i = xs.partition_point(|&p| p <= x);
                if i == 0 {
                    return density[0];
                }
                if i >= xs.len() {
                    return density[xs.len() - 1];
                }
                let (x0, x1) = (xs[i - 1], xs[i]);
                let w = (x - x0) / (x1 - x0);
                density[i - 1] * (1.0 - w) + density[i] * w
            }
            TailDensity::Power { c1, c2, alpha } => {
                if x > 0.0 {
                    c1 * alpha * x.powf(-alpha - 1.0)
                } else if x < 0.0 {
                    c2 * alpha * (-x).powf(-alpha - 1.0)
                } else {
                    0.0
                }
            }
        }
    }
}

/// Absolutely continuous one-dimensional Lévy measure given numerically:
/// a weighted sum of densities, a declared support and a tail-decay
/// exponent `p` meaning `density(x) = O(|x|^{-p-1})`.
#[derive(Debug, Clone)]
pub struct NumericTail {
    components: Vec<(f64, TailDensity)>,
    support: (f64, f64),
    tail_exponent: f64,
}

impl NumericTail {
    pub fn new(
        density: TailDensity,
        support: (f64, f64),
        tail_exponent: f64,
    ) -> Result<Self, LevyError> {
        if !(support.0 < support.1) {
            return Err(LevyError::InvalidMeasure("empty support".into()));
        }
        if !(tail_exponent > 0.0) {
            return Err(LevyError::InvalidMeasure(
                "tail exponent must be positive".into(),
            ));
        }
        if let TailDensity::Table { x, density } = &density {
            if x.len() != density.len() || x.len() < 2 || x.windows(2).any(|w| w[1] <= w[0]) {
                return Err(LevyError::InvalidMeasure("malformed density table".into()));
            }
            if density.iter().any(|d| !(*d >= 0.0)) {
                return Err(LevyError::InvalidMeasure("negative density".into()));
            }
        }
        Ok(Self {
            components: vec![(1.0, density)],
            support,
            tail_exponent,
        })
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn tail_exponent(&self) -> f64 {
        self.tail_exponent
    }

    pub fn density(&self, x: f64) -> f64 {
        if x < self.support.0 || x > self.support.1 {
            return 0.0;
        }
        self.components.iter().map(|(w, d)| w * d.eval(x)).sum()
    }

    fn scaled(&self, t: f64) -> Self {
        let mut out = self.clone();
        for c in &mut out.components {
            c.0 *= t;
        }
        out
    }

    fn merged(&self, other: &NumericTail) -> Self {
        let mut components = self.components.clone();
        components.extend(other.components.iter().cloned());
        Self {
            components,
            support: (
                self.support.0.min(other.support.0),
                self.support.1.max(other.support.1),
            ),
            tail_exponent: self.tail_exponent.min(other.tail_exponent),
        }
    }
}

/// The Lévy (jump) measure M of a triple.
#[derive(Debug, Clone)]
pub enum LevyMeasure {
    Atomic(Vec<Atom>),
    /// `M(x) = −c1 x^{−α}` for x > 0 and `c2 (−x)^{−α}` for x < 0, i.e.
    /// density `c1 α x^{−α−1}` on the right and `c2 α |x|^{−α−1}` on the left.
    StablePowerTail { c1: f64, c2: f64, alpha: f64 },
    NumericTail(NumericTail),
}

impl LevyMeasure {
    pub fn empty() -> Self {
        LevyMeasure::Atomic(Vec::new())
    }

    pub fn kind(&self) -> &'static str {
        match self {
            LevyMeasure::Atomic(_) => "atomic",
            LevyMeasure::StablePowerTail { .. } => "stable",
            LevyMeasure::NumericTail(_) => "numeric",
        }
    }

    fn is_empty(&self) -> bool {
        matches!(self, LevyMeasure::Atomic(a) if a.is_empty())
    }

    fn validate(&self, dim: usize) -> Result<(), LevyError> {
        match self {
            LevyMeasure::Atomic(atoms) => {
                for atom in atoms {
                    if atom.point.len() != dim {
                        return Err(LevyError::DimensionMismatch {
                            expected: dim,
                            got: atom.point.len(),
                        });
                    }
                    if !(atom.mass > 0.0) || !atom.mass.is_finite() {
                        return Err(LevyError::InvalidRate(atom.mass));
                    }
                    if atom.point.iter().all(|&p| p == 0.0) {
                        return Err(LevyError::InvalidMeasure("atom at the origin".into()));
                    }
                }
                Ok(())
            }
            LevyMeasure::StablePowerTail { c1, c2, alpha } => {
                if dim != 1 {
                    return Err(LevyError::UnsupportedDimension(dim));
                }
                if !(*alpha > 0.0 && *alpha < 2.0) {
                    return Err(LevyError::InvalidMeasure(format!(
                        "stable exponent {alpha} outside (0, 2)"
                    )));
                }
                if !(*c1 >= 0.0 && *c2 >= 0.0 && c1 + c2 > 0.0) {
                    return Err(LevyError::InvalidMeasure(
                        "tail weights must be non-negative with positive sum".into(),
                    ));
                }
                Ok(())
            }
            LevyMeasure::NumericTail(_) => {
                if dim != 1 {
                    return Err(LevyError::UnsupportedDimension(dim));
                }
                Ok(())
            }
        }
    }

    fn scaled(&self, t: f64) -> Self {
        match self {
            LevyMeasure::Atomic(atoms) => LevyMeasure::Atomic(
                atoms
                    .iter()
                    .map(|a| Atom {
                        point: a.point.clone(),
                        mass: a.mass * t,
                    })
                    .collect(),
            ),
            LevyMeasure::StablePowerTail { c1, c2, alpha } => LevyMeasure::StablePowerTail {
                c1: c1 * t,
                c2: c2 * t,
                alpha: *alpha,
            },
            LevyMeasure::NumericTail(n) => LevyMeasure::NumericTail(n.scaled(t)),
        }
    }

    fn as_numeric(&self) -> Option<NumericTail> {
        match self {
            LevyMeasure::NumericTail(n) => Some(n.clone()),
            LevyMeasure::StablePowerTail { c1, c2, alpha } => Some(NumericTail {
                components: vec![(
                    1.0,
                    TailDensity::Power {
                        c1: *c1,
                        c2: *c2,
                        alpha: *alpha,
                    },
                )],
                support: (
                    if *c2 > 0.0 { f64::NEG_INFINITY } else { 0.0 },
                    if *c1 > 0.0 { f64::INFINITY } else { 0.0 },
                ),
                tail_exponent: *alpha,
            }),
            LevyMeasure::Atomic(_) => None,
        }
    }

    fn sum(&self, other: &LevyMeasure) -> Result<LevyMeasure, LevyError> {
        if self.is_empty() {
            return Ok(other.clone());
        }
        if other.is_empty() {
            return Ok(self.clone());
        }
        match (self, other) {
            (LevyMeasure::Atomic(a), LevyMeasure::Atomic(b)) => {
                let mut atoms = a.clone();
                for atom in b {
                    if let Some(existing) = atoms.iter_mut().find(|e| e.point == atom.point) {
                        existing.mass += atom.mass;
                    } else {
                        atoms.push(atom.clone());
                    }
                }
                Ok(LevyMeasure::Atomic(atoms))
            }
            (
                LevyMeasure::StablePowerTail { c1, c2, alpha },
                LevyMeasure::StablePowerTail {
                    c1: d1,
                    c2: d2,
                    alpha: beta,
                },
            ) => {
                if alpha != beta {
                    return Err(LevyError::IncompatibleAlpha(*alpha, *beta));
                }
                Ok(LevyMeasure::StablePowerTail {
                    c1: c1 + d1,
                    c2: c2 + d2,
                    alpha: *alpha,
                })
            }
            (LevyMeasure::NumericTail(_), _) | (_, LevyMeasure::NumericTail(_)) => {
                match (self.as_numeric(), other.as_numeric()) {
                    (Some(x), Some(y)) => Ok(LevyMeasure::NumericTail(x.merged(&y))),
                    _ => Err(LevyError::IncompatibleMeasures(self.kind(), other.kind())),
                }
            }
            _ => Err(LevyError::IncompatibleMeasures(self.kind(), other.kind())),
        }
    }
}

/// Canonical triple `[a, R, M]` of an infinitely divisible law on R^k.
#[derive(Debug, Clone)]
pub struct LevyTriple {
    a: Vec<f64>,
    r: Vec<Vec<f64>>,
    m: LevyMeasure,
}

fn check_symmetric_psd(r: &[Vec<f64>], dim: usize) -> Result<(), LevyError> {
    if r.len() != dim || r.iter().any(|row| row.len() != dim) {
        return Err(LevyError::DimensionMismatch {
            expected: dim,
            got: r.len(),
        });
    }
    let scale = r
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1.0);
    for i in 0..dim {
        for j in 0..i {
            if (r[i][j] - r[j][i]).abs() > 1e-12 * scale {
                return Err(LevyError::NonSymmetricR);
            }
        }
    }
    let min_eig = match dim {
        1 => r[0][0],
        _ => {
            let (p, q, s) = (r[0][0], r[1][1], r[0][1]);
            let mean = 0.5 * (p + q);
            let rad = (0.25 * (p - q) * (p - q) + s * s).sqrt();
            mean - rad
        }
    };
    if min_eig < -1e-12 * scale {
        return Err(LevyError::NotPositiveSemidefinite(min_eig));
    }
    Ok(())
}

impl LevyTriple {
    pub fn new(a: Vec<f64>, r: Vec<Vec<f64>>, m: LevyMeasure) -> Result<Self, LevyError> {
        let dim = a.len();
        if dim != 1 && dim != 2 {
            return Err(LevyError::UnsupportedDimension(dim));
        }
        check_symmetric_psd(&r, dim)?;
        m.validate(dim)?;
        Ok(Self { a, r, m })
    }

    /// One-dimensional shorthand.
    pub fn new_1d(a: f64, r: f64, m: LevyMeasure) -> Result<Self, LevyError> {
        Self::new(vec![a], vec![vec![r]], m)
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn location(&self) -> &[f64] {
        &self.a
    }

    pub fn covariance(&self) -> &[Vec<f64>] {
        &self.r
    }

    pub fn measure(&self) -> &LevyMeasure {
        &self.m
    }

    fn check_dim(&self, got: usize) -> Result<(), LevyError> {
        if got != self.dim() {
            return Err(LevyError::DimensionMismatch {
                expected: self.dim(),
                got,
            });
        }
        Ok(())
    }

    fn quad_form(&self, y: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                s += y[i] * self.r[i][j] * y[j];
            }
        }
        s
    }

    /// Log characteristic function at real `y` with default quadrature settings.
    pub fn eval_log_cf(&self, y: &[f64]) -> Result<Complex64, LevyError> {
        self.eval_log_cf_with(y, &QuadConfig::default())
    }

    pub fn eval_log_cf_with(&self, y: &[f64], cfg: &QuadConfig) -> Result<Complex64, LevyError> {
        self.check_dim(y.len())?;
        if y.iter().all(|&v| v == 0.0) {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let ya: f64 = y.iter().zip(&self.a).map(|(p, q)| p * q).sum();
        let gauss = Complex64::new(-0.5 * self.quad_form(y), ya);
        let jumps = match &self.m {
            LevyMeasure::Atomic(atoms) => atoms
                .iter()
                .map(|atom| {
                    let yx: f64 = y.iter().zip(&atom.point).map(|(p, q)| p * q).sum();
                    let n2: f64 = atom.point.iter().map(|p| p * p).sum();
                    atom.mass * cf_kernel(yx, n2)
                })
                .sum(),
            measure => {
                let n = measure.as_numeric().expect("non-atomic measure");
                levy_integral_1d(&n, y[0], cfg)?
            }
        };
        Ok(gauss + jumps)
    }

    /// `ln Z(u+v) − ln Z(u)`: the log-CF continued to `y = iv`.
    pub fn log_partition_shift(&self, v: &[f64]) -> Result<f64, LevyError> {
        self.log_partition_shift_with(v, &QuadConfig::default())
    }

    pub fn log_partition_shift_with(&self, v: &[f64], cfg: &QuadConfig) -> Result<f64, LevyError> {
        self.check_dim(v.len())?;
        if v.iter().all(|&p| p == 0.0) {
            return Ok(0.0);
        }
        let va: f64 = v.iter().zip(&self.a).map(|(p, q)| p * q).sum();
        let base = -va + 0.5 * self.quad_form(v);
        let jumps = match &self.m {
            LevyMeasure::Atomic(atoms) => atoms
                .iter()
                .map(|atom| {
                    let vx: f64 = v.iter().zip(&atom.point).map(|(p, q)| p * q).sum();
                    let n2: f64 = atom.point.iter().map(|p| p * p).sum();
                    atom.mass * laplace_kernel(vx, n2)
                })
                .sum(),
            measure => {
                let n = measure.as_numeric().expect("non-atomic measure");
                laplace_integral_1d(&n, v[0], cfg).map_err(|e| match e {
                    LevyError::DivergentMoment(_) => LevyError::DivergentMoment(v.to_vec()),
                    other => other,
                })?
            }
        };
        Ok(base + jumps)
    }

    /// Triple of the convolution of the two laws.
    pub fn convolve(&self, other: &LevyTriple) -> Result<LevyTriple, LevyError> {
        self.check_dim(other.dim())?;
        let a = self.a.iter().zip(&other.a).map(|(p, q)| p + q).collect();
        let r = self
            .r
            .iter()
            .zip(&other.r)
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q).collect())
            .collect();
        let m = self.m.sum(&other.m)?;
        Ok(LevyTriple { a, r, m })
    }

    /// Triple of the t-th convolution power: `[ta, tR, tM]`.
    pub fn scale_power(&self, t: f64) -> Result<LevyTriple, LevyError> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(LevyError::NonPositiveT(t));
        }
        Ok(LevyTriple {
            a: self.a.iter().map(|v| v * t).collect(),
            r: self
                .r
                .iter()
                .map(|row| row.iter().map(|v| v * t).collect())
                .collect(),
            m: self.m.scaled(t),
        })
    }
}

/// Compound Poisson law with the given jump points and rates. The location
/// is set to the compensator `Σ λ x/(1+‖x‖²)`, so the log-CF is exactly
/// `Σ λ (e^{i⟨y,x⟩} − 1)`.
pub fn poisson_triple(atoms: &[(Vec<f64>, f64)]) -> Result<LevyTriple, LevyError> {
    let dim = atoms.first().map(|(p, _)| p.len()).unwrap_or(1);
    let mut a = vec![0.0; dim];
    let mut list = Vec::with_capacity(atoms.len());
    for (point, rate) in atoms {
        if !(*rate > 0.0) || !rate.is_finite() {
            return Err(LevyError::InvalidRate(*rate));
        }
        if point.len() != dim {
            return Err(LevyError::DimensionMismatch {
                expected: dim,
                got: point.len(),
            });
        }
        let n2: f64 = point.iter().map(|p| p * p).sum();
        for (ai, pi) in a.iter_mut().zip(point) {
            *ai += rate * pi / (1.0 + n2);
        }
        list.push(Atom {
            point: point.clone(),
            mass: *rate,
        });
    }
    let r = vec![vec![0.0; dim]; dim];
    LevyTriple::new(a, r, LevyMeasure::Atomic(list))
}

/// Gaussian law (no jumps). `R = 0` gives the Dirac mass at `a`.
pub fn gaussian_triple(a: Vec<f64>, r: Vec<Vec<f64>>) -> Result<LevyTriple, LevyError> {
    LevyTriple::new(a, r, LevyMeasure::empty())
}

// e^{iz} − 1 − iz·(1/(1+n2))·... split so that small arguments keep precision:
// returns e^{i yx} − 1 − i yx/(1+‖x‖²).
fn cf_kernel(yx: f64, n2: f64) -> Complex64 {
    let cos_m1 = -2.0 * (0.5 * yx).sin().powi(2);
    let sin_part = if yx.abs() < 0.5 {
        sin_minus_x(yx) + yx * (n2 / (1.0 + n2))
    } else {
        yx.sin() - yx / (1.0 + n2)
    };
    Complex64::new(cos_m1, sin_part)
}

// e^{−vx} − 1 + vx/(1+‖x‖²)
fn laplace_kernel(vx: f64, n2: f64) -> f64 {
    if vx.abs() < 0.5 {
        exp_m1_minus_x(-vx) - vx * (n2 / (1.0 + n2))
    } else {
        (-vx).exp_m1() + vx / (1.0 + n2)
    }
}

/// sin(z) − z, accurate for small z.
fn sin_minus_x(z: f64) -> f64 {
    if z.abs() < 0.5 {
        let z2 = z * z;
        let mut term = -z * z2 / 6.0;
        let mut sum = term;
        let mut k = 3.0;
        while term.abs() > 1e-18 * z.abs().max(1e-300) {
            term *= -z2 / ((2.0 * k - 2.0) * (2.0 * k - 1.0));
            sum += term;
            k += 1.0;
        }
        sum
    } else {
        z.sin() - z
    }
}

/// e^z − 1 − z, accurate for small z.
fn exp_m1_minus_x(z: f64) -> f64 {
    if z.abs() < 0.5 {
        let mut term = z * z / 2.0;
        let mut sum = term;
        let mut k = 3.0;
        while term.abs() > 1e-18 * sum.abs().max(1e-300) {
            term *= z / k;
            sum += term;
            k += 1.0;
        }
        sum
    } else {
        z.exp_m1() - z
    }
}

/// One side of a numeric Lévy density: power-law parts `c u^{-a-1}` kept
/// apart so their behaviour at the origin can be integrated in closed form.
struct HalfLine<'a> {
    tail: &'a NumericTail,
    sign: f64,
    powers: Vec<(f64, f64)>,
}

impl<'a> HalfLine<'a> {
    fn new(tail: &'a NumericTail, sign: f64) -> Self {
        let powers = tail
            .components
            .iter()
            .filter_map(|(w, d)| match d {
                TailDensity::Power { c1, c2, alpha } => {
                    let c = if sign > 0.0 { *c1 } else { *c2 };
                    (c > 0.0).then_some((w * c * alpha, *alpha))
                }
                _ => None,
            })
            .collect();
        Self { tail, sign, powers }
    }

    fn full(&self, u: f64) -> f64 {
        self.tail.density(self.sign * u)
    }

    fn other(&self, u: f64) -> f64 {
        let x = self.sign * u;
        let (lo, hi) = self.tail.support;
        if x < lo || x > hi {
            return 0.0;
        }
        self.tail
            .components
            .iter()
            .filter(|(_, d)| !matches!(d, TailDensity::Power { .. }))
            .map(|(w, d)| w * d.eval(x))
            .sum()
    }

    fn power(&self, u: f64) -> f64 {
        self.powers.iter().map(|(c, a)| c * u.powf(-a - 1.0)).sum()
    }

    /// `∫_lo^hi u² Σ c u^{-a-1} du`
    fn power_second_moment(&self, lo: f64, hi: f64) -> f64 {
        self.powers
            .iter()
            .map(|(c, a)| c * (hi.powf(2.0 - a) - lo.powf(2.0 - a)) / (2.0 - a))
            .sum()
    }
}

fn zero_if_singular<T: Default>(u: f64, v: T, finite: bool) -> T {
    if u < 1e-30 && !finite {
        T::default()
    } else {
        v
    }
}

/// `∫_0^∞ (e^{iyu} − 1 − iyu/(1+u²)) g(u) du` over `[lo, hi] ⊂ [0, ∞]`.
fn half_line_cf(
    side: &HalfLine<'_>,
    y: f64,
    lo: f64,
    hi: f64,
    cfg: &QuadConfig,
) -> Result<Complex64, QuadError> {
    let mut total = Complex64::new(0.0, 0.0);
    if lo >= hi {
        return Ok(total);
    }
    let g = |u: f64| side.full(u);
    let kern = |u: f64| cf_kernel(y * u, u * u);
    let inner_hi = hi.min(1.0);
    if lo < inner_hi {
        // power parts: integrate kern + (yu)²/2 numerically, −(yu)²/2 exactly
        total += quad::tanh_sinh(
            |_u, da, _db| {
                let u = lo + da;
                let k = kern(u);
                let v = k * side.other(u)
                    + (k + Complex64::new(0.5 * (y * u).powi(2), 0.0)) * side.power(u);
                zero_if_singular(u, v, v.is_finite())
            },
            lo,
            inner_hi,
            cfg,
        )?;
        total -= Complex64::new(0.5 * y * y * side.power_second_moment(lo, inner_hi), 0.0);
    }
    let outer_lo = lo.max(1.0);
    if outer_lo < hi {
        if hi.is_finite() {
            let mut breaks = vec![outer_lo];
            let step = if y != 0.0 {
                std::f64::consts::PI / y.abs()
            } else {
                hi - outer_lo
            };
            let mut x = outer_lo + step;
            while x < hi {
                breaks.push(x);
                x += step;
            }
            breaks.push(hi);
            let (v, _) = quad::adaptive(|u| kern(u) * g(u), &breaks, cfg)?;
            total += v;
        } else {
            let osc = quad::fourier_tail(g, y, outer_lo, cfg)?;
            let mass: f64 = quad::exp_sinh(g, outer_lo, cfg)?;
            let comp: f64 = quad::exp_sinh(|u| g(u) * u / (1.0 + u * u), outer_lo, cfg)?;
            total += osc - Complex64::new(mass, y * comp);
        }
    }
    Ok(total)
}

fn levy_integral_1d(n: &NumericTail, y: f64, cfg: &QuadConfig) -> Result<Complex64, LevyError> {
    let (lo, hi) = n.support;
    let mut total = Complex64::new(0.0, 0.0);
    if hi > 0.0 {
        total += half_line_cf(&HalfLine::new(n, 1.0), y, lo.max(0.0), hi, cfg)?;
    }
    if lo < 0.0 {
        total += half_line_cf(&HalfLine::new(n, -1.0), -y, (-hi).max(0.0), -lo, cfg)?;
    }
    Ok(total)
}

/// `∫ (e^{−vu} − 1 + vu/(1+u²)) g(u) du` over `[lo, hi] ⊂ [0, ∞]`.
fn half_line_laplace(
    side: &HalfLine<'_>,
    v: f64,
    lo: f64,
    hi: f64,
    cfg: &QuadConfig,
) -> Result<f64, LevyError> {
    if lo >= hi {
        return Ok(0.0);
    }
    if v < 0.0 && !hi.is_finite() {
        return Err(LevyError::DivergentMoment(vec![v]));
    }
    let g = |u: f64| side.full(u);
    let kern = |u: f64| laplace_kernel(v * u, u * u);
    let mut total = 0.0;
    let inner_hi = hi.min(1.0);
    if lo < inner_hi {
        total += quad::tanh_sinh(
            |_u, da, _db| {
                let u = lo + da;
                let k = kern(u);
                let w = k * side.other(u) + (k - 0.5 * (v * u).powi(2)) * side.power(u);
                zero_if_singular(u, w, w.is_finite())
            },
            lo,
            inner_hi,
            cfg,
        )?;
        total += 0.5 * v * v * side.power_second_moment(lo, inner_hi);
    }
    let outer_lo = lo.max(1.0);
    if outer_lo < hi {
        if hi.is_finite() {
            let (val, _) = quad::adaptive(|u| kern(u) * g(u), &[outer_lo, hi], cfg)?;
            total += val;
        } else {
            let val: f64 = quad::exp_sinh(|u| kern(u) * g(u), outer_lo, cfg)?;
            total += val;
        }
    }
    Ok(total)
}

fn laplace_integral_1d(n: &NumericTail, v: f64, cfg: &QuadConfig) -> Result<f64, LevyError> {
    let (lo, hi) = n.support;
    let mut total = 0.0;
    if hi > 0.0 {
        total += half_line_laplace(&HalfLine::new(n, 1.0), v, lo.max(0.0), hi, cfg)?;
    }
    if lo < 0.0 {
        total += half_line_laplace(&HalfLine::new(n, -1.0), -v, (-hi).max(0.0), -lo, cfg)?;
    }
    Ok(total)
}

// ---------------------------------------------------------------- JSON

#[derive(Serialize, Deserialize)]
struct TableRepr {
    x: Vec<f64>,
    density: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PowerRepr {
    c1: f64,
    c2: f64,
    alpha: f64,
}

#[derive(Serialize, Deserialize)]
struct ComponentRepr {
    weight: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    table: Option<TableRepr>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    power: Option<PowerRepr>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum MeasureRepr {
    Atomic {
        atoms: Vec<Atom>,
    },
    Stable {
        c1: f64,
        c2: f64,
        alpha: f64,
    },
    Numeric {
        support: (f64, f64),
        tail_exponent: f64,
        components: Vec<ComponentRepr>,
    },
}

#[derive(Serialize, Deserialize)]
struct TripleRepr {
    a: Vec<f64>,
    #[serde(rename = "R")]
    r: Vec<Vec<f64>>,
    #[serde(rename = "M")]
    m: MeasureRepr,
}

fn measure_to_repr(m: &LevyMeasure) -> Result<MeasureRepr, LevyError> {
    Ok(match m {
        LevyMeasure::Atomic(atoms) => MeasureRepr::Atomic {
            atoms: atoms.clone(),
        },
        LevyMeasure::StablePowerTail { c1, c2, alpha } => MeasureRepr::Stable {
            c1: *c1,
            c2: *c2,
            alpha: *alpha,
        },
        LevyMeasure::NumericTail(n) => {
            let mut components = Vec::new();
            for (w, d) in &n.components {
                components.push(match d {
                    TailDensity::Function(_) => return Err(LevyError::NotSerializable),
                    TailDensity::Table { x, density } => ComponentRepr {
                        weight: *w,
                        table: Some(TableRepr {
                            x: x.clone(),
                            density: density.clone(),
                        }),
                        power: None,
                    },
                    TailDensity::Power { c1, c2, alpha } => ComponentRepr {
                        weight: *w,
                        table: None,
                        power: Some(PowerRepr {
                            c1: *c1,
                            c2: *c2,
                            alpha: *alpha,
                        }),
                    },
                });
            }
            MeasureRepr::Numeric {
                support: n.support,
                tail_exponent: n.tail_exponent,
                components,
            }
        }
    })
}

fn measure_from_repr(r: MeasureRepr) -> Result<LevyMeasure, LevyError> {
    Ok(match r {
        MeasureRepr::Atomic { atoms } => LevyMeasure::Atomic(atoms),
        MeasureRepr::Stable { c1, c2, alpha } => LevyMeasure::StablePowerTail { c1, c2, alpha },
        MeasureRepr::Numeric {
            support,
            tail_exponent,
            components,
        } => {
            let mut parts = Vec::new();
            for c in components {
                let d = match (c.table, c.power) {
                    (Some(t), None) => TailDensity::Table {
                        x: t.x,
                        density: t.density,
                    },
                    (None, Some(p)) => TailDensity::Power {
                        c1: p.c1,
                        c2: p.c2,
                        alpha: p.alpha,
                    },
                    _ => {
                        return Err(LevyError::InvalidMeasure(
                            "component needs exactly one of `table` or `power`".into(),
                        ))
                    }
                };
                let single = NumericTail::new(d, support, tail_exponent)?;
                parts.push((c.weight, single.components.into_iter().next().unwrap().1));
            }
            if parts.is_empty() {
                return Err(LevyError::InvalidMeasure("no components".into()));
            }
            LevyMeasure::NumericTail(NumericTail {
                components: parts,
                support,
                tail_exponent,
            })
        }
    })
}

impl LevyTriple {
    pub fn to_json(&self) -> Result<String, LevyError> {
        let repr = TripleRepr {
            a: self.a.clone(),
            r: self.r.clone(),
            m: measure_to_repr(&self.m)?,
        };
        Ok(serde_json::to_string(&repr).expect("triple serializes"))
    }

    pub fn from_json(s: &str) -> Result<Self, LevyError> {
        let repr: TripleRepr = serde_json::from_str(s)
            .map_err(|e| LevyError::InvalidMeasure(format!("malformed triple JSON: {e}")))?;
        LevyTriple::new(repr.a, repr.r, measure_from_repr(repr.m)?)
    }
}

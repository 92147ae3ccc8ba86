//! One-dimensional stable laws in the `(α, c1, c2, a)` parameterization.
//!
//! For `α < 2` the Lévy measure has density `c1 α x^{−α−1}` on `x > 0` and
//! `c2 α |x|^{−α−1}` on `x < 0`. The Gaussian case `α = 2` carries a
//! coefficient `R` with `ln μ̂(y) = iya − R y²`.

use crate::levy::{LevyError, LevyMeasure, LevyTriple};
use crate::special::{gamma_neg, EULER_GAMMA};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StableError {
    #[error("characteristic exponent {0} outside (0, 2]")]
    AlphaOutOfRange(f64),
    #[error("invalid stable law: {0}")]
    InvalidParameters(String),
    #[error("no centering constant makes an α = 1 law strictly stable")]
    AlphaEqualsOne,
    #[error("the β ↔ ρ relation degenerates at α = 1 unless β = 0")]
    AlphaOne,
    #[error("ρ = {rho} outside the admissible interval [{lo}, {hi}]")]
    RhoOutOfRange { rho: f64, lo: f64, hi: f64 },
    #[error("log-CF requested at a branch point")]
    BranchAmbiguity,
    #[error(transparent)]
    Levy(#[from] LevyError),
}

impl StableError {
    pub fn kind(&self) -> &'static str {
        match self {
            StableError::AlphaOutOfRange(_) => "AlphaOutOfRange",
            StableError::InvalidParameters(_) => "InvalidParameters",
            StableError::AlphaEqualsOne => "AlphaEqualsOne",
            StableError::AlphaOne => "AlphaOne",
            StableError::RhoOutOfRange { .. } => "RhoOutOfRange",
            StableError::BranchAmbiguity => "BranchAmbiguity",
            StableError::Levy(e) => e.kind(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransitionClass {
    #[serde(rename = "first-order")]
    FirstOrder,
    #[serde(rename = "second-order")]
    SecondOrder,
    #[serde(rename = "lambda-point")]
    LambdaPoint,
    #[serde(rename = "none")]
    NoTransition,
}

impl TransitionClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            TransitionClass::FirstOrder => "first-order",
            TransitionClass::SecondOrder => "second-order",
            TransitionClass::LambdaPoint => "lambda-point",
            TransitionClass::NoTransition => "none",
        }
    }
}

/// Transition class plus the open range `(0, sup)` of finite absolute
/// moment orders (`sup = ∞` for the normal law).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Transition {
    pub class: TransitionClass,
    pub finite_moment_sup: f64,
}

pub fn classify_transition(alpha: f64) -> Result<Transition, StableError> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(StableError::AlphaOutOfRange(alpha));
    }
    let class = if alpha == 2.0 {
        TransitionClass::NoTransition
    } else if alpha == 1.0 {
        TransitionClass::LambdaPoint
    } else if alpha < 1.0 {
        TransitionClass::FirstOrder
    } else {
        TransitionClass::SecondOrder
    };
    let finite_moment_sup = if alpha == 2.0 { f64::INFINITY } else { alpha };
    Ok(Transition {
        class,
        finite_moment_sup,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Boundedness {
    #[serde(rename = "left")]
    Left,
    #[serde(rename = "right")]
    Right,
    #[serde(rename = "unbounded")]
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LawRepr", into = "LawRepr")]
pub struct StableLaw1D {
    alpha: f64,
    c1: f64,
    c2: f64,
    a: f64,
    r: f64,
}

#[derive(Serialize, Deserialize)]
struct LawRepr {
    alpha: f64,
    #[serde(default)]
    c1: f64,
    #[serde(default)]
    c2: f64,
    #[serde(default)]
    a: f64,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    r: Option<f64>,
}

impl TryFrom<LawRepr> for StableLaw1D {
    type Error = StableError;
    fn try_from(v: LawRepr) -> Result<Self, StableError> {
        if v.alpha == 2.0 {
            let r = v.r.ok_or_else(|| {
                StableError::InvalidParameters("α = 2 needs the Gaussian coefficient R".into())
            })?;
            StableLaw1D::gaussian(r, v.a)
        } else {
            StableLaw1D::new(v.alpha, v.c1, v.c2, v.a)
        }
    }
}

impl From<StableLaw1D> for LawRepr {
    fn from(l: StableLaw1D) -> Self {
        LawRepr {
            alpha: l.alpha,
            c1: l.c1,
            c2: l.c2,
            a: l.a,
            r: (l.alpha == 2.0).then_some(l.r),
        }
    }
}

impl StableLaw1D {
    /// Non-Gaussian stable law, `0 < α < 2`.
    pub fn new(alpha: f64, c1: f64, c2: f64, a: f64) -> Result<Self, StableError> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(StableError::AlphaOutOfRange(alpha));
        }
        if !(c1 >= 0.0 && c2 >= 0.0 && c1 + c2 > 0.0) || !(c1 + c2).is_finite() {
            return Err(StableError::InvalidParameters(
                "c1, c2 must be non-negative with positive finite sum".into(),
            ));
        }
        if !a.is_finite() {
            return Err(StableError::InvalidParameters("location must be finite".into()));
        }
        Ok(Self {
            alpha,
            c1,
            c2,
            a,
            r: 0.0,
        })
    }

    /// Normal law with `ln μ̂(y) = iya − R y²` (variance `2R`).
    pub fn gaussian(r: f64, a: f64) -> Result<Self, StableError> {
        if !(r > 0.0) || !r.is_finite() || !a.is_finite() {
            return Err(StableError::InvalidParameters(
                "R must be positive and a finite".into(),
            ));
        }
        Ok(Self {
            alpha: 2.0,
            c1: 0.0,
            c2: 0.0,
            a,
            r,
        })
    }

    /// Law with skewness `β`, scale `σ` in the usual `S1` sense
    /// (`ln μ̂(y) = iya − σ^α|y|^α(1 − iβ sgn y tan(πα/2))` for `α ≠ 1`;
    /// for `α = 1` the scale gives `c1 + c2 = 2σ/π`; for `α = 2`, `R = σ²`).
    pub fn from_beta(alpha: f64, beta: f64, sigma: f64, a: f64) -> Result<Self, StableError> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(StableError::InvalidParameters("σ must be positive".into()));
        }
        if !(-1.0..=1.0).contains(&beta) {
            return Err(StableError::InvalidParameters(format!("|β| = {} > 1", beta.abs())));
        }
        if alpha == 2.0 {
            return Self::gaussian(sigma * sigma, a);
        }
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(StableError::AlphaOutOfRange(alpha));
        }
        let k = if alpha == 1.0 {
            2.0 * sigma / PI
        } else {
            sigma.powf(alpha) / (-alpha * gamma_neg(alpha) * (FRAC_PI_2 * alpha).cos())
        };
        Self::new(alpha, 0.5 * k * (1.0 + beta), 0.5 * k * (1.0 - beta), a)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn c1(&self) -> f64 {
        self.c1
    }
    pub fn c2(&self) -> f64 {
        self.c2
    }
    pub fn location(&self) -> f64 {
        self.a
    }
    /// Gaussian coefficient `R` (zero unless `α = 2`).
    pub fn gaussian_r(&self) -> f64 {
        self.r
    }

    pub fn beta(&self) -> f64 {
        if self.alpha == 2.0 {
            0.0
        } else {
            (self.c1 - self.c2) / (self.c1 + self.c2)
        }
    }

    /// Scale `σ` of the `S1` form.
    pub fn sigma(&self) -> f64 {
        if self.alpha == 2.0 {
            self.r.sqrt()
        } else if self.alpha == 1.0 {
            (self.c1 + self.c2) * FRAC_PI_2
        } else {
            let s = -self.alpha
                * gamma_neg(self.alpha)
                * (FRAC_PI_2 * self.alpha).cos()
                * (self.c1 + self.c2);
            s.powf(1.0 / self.alpha)
        }
    }

    pub fn with_location(&self, a: f64) -> Self {
        Self { a, ..*self }
    }

    /// Closed-form log characteristic function on the closed upper half-plane
    /// and the real line (principal branches).
    pub fn log_cf(&self, z: Complex64) -> Result<Complex64, StableError> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(StableError::InvalidParameters("non-finite argument".into()));
        }
        let i = Complex64::i();
        let lin = i * z * self.a;
        if z == Complex64::new(0.0, 0.0) {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if self.alpha == 2.0 {
            return Ok(lin - self.r * z * z);
        }
        let mz = -i * z;
        let pz = i * z;
        if self.alpha == 1.0 {
            let e = (1.0 - EULER_GAMMA).exp();
            let mut v = lin;
            if self.c1 > 0.0 {
                v -= self.c1 * pz * (mz / e).ln();
            }
            if self.c2 > 0.0 {
                v += self.c2 * pz * (pz / e).ln();
            }
            return Ok(v);
        }
        let k = self.alpha * gamma_neg(self.alpha);
        let mut v = lin;
        if self.c1 > 0.0 {
            v += k * self.c1 * mz.powf(self.alpha);
        }
        if self.c2 > 0.0 {
            v += k * self.c2 * pz.powf(self.alpha);
        }
        Ok(v)
    }

    pub fn log_cf_real(&self, y: f64) -> Result<Complex64, StableError> {
        self.log_cf(Complex64::new(y, 0.0))
    }

    /// Singular part of `ln Z(u+v) − ln Z(u)` (the linear term in `v` dropped).
    pub fn singular_ln_z(&self, v: f64) -> f64 {
        if v == 0.0 {
            return 0.0;
        }
        let (c, w) = if v > 0.0 { (self.c1, v) } else { (self.c2, -v) };
        if self.alpha == 2.0 {
            self.r * v * v
        } else if self.alpha == 1.0 {
            c * w * w.ln()
        } else {
            c * self.alpha * gamma_neg(self.alpha) * w.powf(self.alpha)
        }
    }

    /// Strictly stable law obtained by removing the shift, with the shift.
    pub fn strictify(&self) -> Result<(StableLaw1D, f64), StableError> {
        if self.alpha == 1.0 {
            return Err(StableError::AlphaEqualsOne);
        }
        Ok((self.with_location(0.0), self.a))
    }

    pub fn is_strictly_stable(&self) -> bool {
        if self.alpha == 1.0 {
            self.c1 == self.c2
        } else {
            self.a == 0.0
        }
    }

    pub fn boundedness_side(&self) -> Boundedness {
        if self.alpha < 1.0 {
            if self.c2 == 0.0 {
                return Boundedness::Left;
            }
            if self.c1 == 0.0 {
                return Boundedness::Right;
            }
        }
        Boundedness::Unbounded
    }

    /// Canonical triple of this law (compensator `x/(1+x²)`).
    pub fn induced_triple(&self) -> Result<LevyTriple, StableError> {
        if self.alpha == 2.0 {
            return Ok(LevyTriple::new_1d(
                self.a,
                2.0 * self.r,
                LevyMeasure::empty(),
            )?);
        }
        let a_t = if self.alpha == 1.0 {
            self.a
        } else {
            self.a + self.alpha * (self.c1 - self.c2) * FRAC_PI_2 / (FRAC_PI_2 * self.alpha).cos()
        };
        Ok(LevyTriple::new_1d(
            a_t,
            0.0,
            LevyMeasure::StablePowerTail {
                c1: self.c1,
                c2: self.c2,
                alpha: self.alpha,
            },
        )?)
    }

    /// Centering `b_n` with `X_1 + … + X_n =_d n^{1/α} X + b_n`.
    pub fn sum_centering(&self, n: f64) -> f64 {
        if self.alpha == 1.0 {
            n * (self.c1 - self.c2) * n.ln()
        } else {
            self.a * (n - n.powf(1.0 / self.alpha))
        }
    }
}

/// `ρ = ½ + arctan(β tan(πα/2)) / (πα)`; `α = 2` always gives `½`.
pub fn beta_to_rho(alpha: f64, beta: f64) -> Result<f64, StableError> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(StableError::AlphaOutOfRange(alpha));
    }
    if !(-1.0..=1.0).contains(&beta) {
        return Err(StableError::InvalidParameters(format!("|β| = {} > 1", beta.abs())));
    }
    if alpha == 2.0 || beta == 0.0 {
        return Ok(0.5);
    }
    if alpha == 1.0 {
        return Err(StableError::AlphaOne);
    }
    Ok(0.5 + (beta * (FRAC_PI_2 * alpha).tan()).atan() / (PI * alpha))
}

/// Admissible interval of ρ for the given α.
pub fn rho_range(alpha: f64) -> (f64, f64) {
    if alpha == 2.0 || alpha == 1.0 {
        (0.5, 0.5)
    } else if alpha < 1.0 {
        (0.0, 1.0)
    } else {
        (1.0 - 1.0 / alpha, 1.0 / alpha)
    }
}

/// Inverse of [`beta_to_rho`]: `β = cot(πα/2) tan(πα(ρ − ½))`.
pub fn rho_to_beta(alpha: f64, rho: f64) -> Result<f64, StableError> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(StableError::AlphaOutOfRange(alpha));
    }
    let (lo, hi) = rho_range(alpha);
    if alpha == 1.0 && rho != 0.5 {
        return Err(StableError::AlphaOne);
    }
    if !(rho >= lo - 1e-15 && rho <= hi + 1e-15) {
        return Err(StableError::RhoOutOfRange { rho, lo, hi });
    }
    if rho == 0.5 {
        return Ok(0.0);
    }
    let b = (PI * alpha * (rho - 0.5)).tan() / (FRAC_PI_2 * alpha).tan();
    Ok(b.clamp(-1.0, 1.0))
}

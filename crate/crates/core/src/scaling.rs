//! Two-parameter scaling theory.
//!
//! A thermodynamic singular part `Φ(t,h)` with characteristic exponents
//! `(α₁, α₂)` obeys `qΦ(t,h) = Φ(q^{1/α₁}t, q^{1/α₂}h)`. Its solution is
//! `Φ = (|t|^{α₁} + |h|^{α₂}) Ψ(|t|^{α₁}/|h|^{α₂})`, evaluated here through the
//! weak-field form `|t|^{α₁} f(h/|t|^{α₁/α₂}, sgn t)` and the strong-field
//! form `|h|^{α₂} g(t/|h|^{α₂/α₁})`.

use num_rational::Rational64;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScalingError {
    #[error("δ = 1/(α₂ − 1) has a pole at α₂ = 1; use the Ising branch")]
    DeltaPole,
    #[error("σ = {0} is negative for α₂ ≤ 1")]
    SigmaNegative(f64),
    #[error("Φ is singular at (t, h) = (0, 0)")]
    OriginSingularity,
    #[error("expansion argument {x} exceeds the radius guard {radius}")]
    RegimeOverflow { x: f64, radius: f64 },
    #[error("finite-difference step underflow at (t, h) = ({t}, {h})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("characteristic exponent {0} outside (0, 2]")]
    InvalidExponent(String),
    #[error("cannot parse `{0}` as an exponent")]
    Parse(String),
}

impl ScalingError {
    pub fn kind(&self) -> &'static str {
        match self {
            ScalingError::DeltaPole => "DeltaPole",
            ScalingError::SigmaNegative(_) => "SigmaNegative",
            ScalingError::OriginSingularity => "OriginSingularity",
            ScalingError::RegimeOverflow { .. } => "RegimeOverflow",
            ScalingError::StepUnderflow { .. } => "StepUnderflow",
            ScalingError::InvalidExponent(_) => "InvalidExponent",
            ScalingError::Parse(_) => "Parse",
        }
    }
}

/// An exponent kept exact when it is rational.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IndexValue {
    Exact(Rational64),
    Approx(f64),
    PosInf,
    NegInf,
}

impl IndexValue {
    pub fn int(n: i64) -> Self {
        IndexValue::Exact(Rational64::from_integer(n))
    }

    pub fn ratio(p: i64, q: i64) -> Self {
        IndexValue::Exact(Rational64::new(p, q))
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, IndexValue::Approx(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            IndexValue::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            IndexValue::Approx(v) => *v,
            IndexValue::PosInf => f64::INFINITY,
            IndexValue::NegInf => f64::NEG_INFINITY,
        }
    }

    fn finite(self) -> Num {
        match self {
            IndexValue::Exact(r) => Num::R(r),
            IndexValue::Approx(v) => Num::F(v),
            IndexValue::PosInf => Num::F(f64::INFINITY),
            IndexValue::NegInf => Num::F(f64::NEG_INFINITY),
        }
    }
}

impl fmt::Display for IndexValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexValue::Exact(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            IndexValue::Approx(v) => write!(f, "{v}"),
            IndexValue::PosInf => f.write_str("inf"),
            IndexValue::NegInf => f.write_str("-inf"),
        }
    }
}

impl Serialize for IndexValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl FromStr for IndexValue {
    type Err = ScalingError;
    fn from_str(s: &str) -> Result<Self, ScalingError> {
        let s = s.trim();
        let err = || ScalingError::Parse(s.to_string());
        match s {
            "inf" | "+inf" | "∞" => return Ok(IndexValue::PosInf),
            "-inf" => return Ok(IndexValue::NegInf),
            _ => {}
        }
        if let Some((p, q)) = s.split_once('/') {
            let p: i64 = p.trim().parse().map_err(|_| err())?;
            let q: i64 = q.trim().parse().map_err(|_| err())?;
            if q == 0 {
                return Err(err());
            }
            return Ok(IndexValue::Exact(Rational64::new(p, q)));
        }
        if let Ok(n) = s.parse::<i64>() {
            return Ok(IndexValue::int(n));
        }
        let v: f64 = s.parse().map_err(|_| err())?;
        if !v.is_finite() {
            return Err(err());
        }
        Ok(IndexValue::Approx(v))
    }
}

/// Rational-or-float arithmetic; falls back to floats on overflow.
#[derive(Debug, Clone, Copy)]
enum Num {
    R(Rational64),
    F(f64),
}

impl Num {
    fn f(self) -> f64 {
        match self {
            Num::R(r) => r.to_f64().unwrap_or(f64::NAN),
            Num::F(v) => v,
        }
    }
    fn int(n: i64) -> Num {
        Num::R(Rational64::from_integer(n))
    }
    fn add(self, o: Num) -> Num {
        match (self, o) {
            (Num::R(a), Num::R(b)) => a.checked_add(&b).map_or(Num::F(self.f() + o.f()), Num::R),
            _ => Num::F(self.f() + o.f()),
        }
    }
    fn sub(self, o: Num) -> Num {
        match (self, o) {
            (Num::R(a), Num::R(b)) => a.checked_sub(&b).map_or(Num::F(self.f() - o.f()), Num::R),
            _ => Num::F(self.f() - o.f()),
        }
    }
    fn mul(self, o: Num) -> Num {
        match (self, o) {
            (Num::R(a), Num::R(b)) => a.checked_mul(&b).map_or(Num::F(self.f() * o.f()), Num::R),
            _ => Num::F(self.f() * o.f()),
        }
    }
    fn div(self, o: Num) -> Num {
        match (self, o) {
            (Num::R(a), Num::R(b)) if !b.is_zero() => {
                a.checked_div(&b).map_or(Num::F(self.f() / o.f()), Num::R)
            }
            _ => Num::F(self.f() / o.f()),
        }
    }
    fn is_zero(self) -> bool {
        match self {
            Num::R(r) => r.is_zero(),
            Num::F(v) => v == 0.0,
        }
    }
    fn is_negative(self) -> bool {
        match self {
            Num::R(r) => r.is_negative(),
            Num::F(v) => v < 0.0,
        }
    }
    fn value(self) -> IndexValue {
        match self {
            Num::R(r) => IndexValue::Exact(r),
            Num::F(v) if v == f64::INFINITY => IndexValue::PosInf,
            Num::F(v) if v == f64::NEG_INFINITY => IndexValue::NegInf,
            Num::F(v) => IndexValue::Approx(v),
        }
    }
}

/// Spatial dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    Finite(u32),
    Infinite,
}

impl FromStr for Dim {
    type Err = ScalingError;
    fn from_str(s: &str) -> Result<Self, ScalingError> {
        match s.trim() {
            "inf" | "∞" | "infinite" => Ok(Dim::Infinite),
            other => match other.parse::<u32>() {
                Ok(d) if d >= 1 => Ok(Dim::Finite(d)),
                _ => Err(ScalingError::Parse(other.to_string())),
            },
        }
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dim::Finite(d) => write!(f, "{d}"),
            Dim::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Dim {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalIndexSet {
    pub alpha: IndexValue,
    pub beta: IndexValue,
    pub gamma: IndexValue,
    pub delta: IndexValue,
    pub epsilon: IndexValue,
    pub nu: IndexValue,
    pub mu: IndexValue,
    pub zeta: IndexValue,
    pub sigma: IndexValue,
}

impl CriticalIndexSet {
    /// Every index is an exact rational or an exact infinity.
    pub fn is_exact(&self) -> bool {
        [
            self.alpha,
            self.beta,
            self.gamma,
            self.delta,
            self.epsilon,
            self.nu,
            self.mu,
            self.zeta,
            self.sigma,
        ]
        .iter()
        .all(IndexValue::is_exact)
    }

    /// `α + 2β + γ − 2`; exactly zero in rational arithmetic.
    pub fn scaling_relation_residual(&self) -> IndexValue {
        self.alpha
            .finite()
            .add(Num::int(2).mul(self.beta.finite()))
            .add(self.gamma.finite())
            .sub(Num::int(2))
            .value()
    }
}

fn check_exponent(a: IndexValue, name: &str) -> Result<Num, ScalingError> {
    let v = a.to_f64();
    if !(v > 0.0 && v <= 2.0) {
        return Err(ScalingError::InvalidExponent(format!("{name} = {a}")));
    }
    Ok(a.finite())
}

pub fn critical_indexes(
    alpha1: IndexValue,
    alpha2: IndexValue,
    d: Dim,
) -> Result<CriticalIndexSet, ScalingError> {
    let a1 = check_exponent(alpha1, "α₁")?;
    let a2 = check_exponent(alpha2, "α₂")?;
    let one = Num::int(1);
    let two = Num::int(2);
    let a2m1 = a2.sub(one);
    if a2m1.is_zero() {
        return Err(ScalingError::DeltaPole);
    }
    let alpha = two.sub(a1);
    let beta = a2m1.mul(a1).div(a2);
    let gamma = two.sub(a2).mul(a1).div(a2);
    let epsilon = two.sub(a1).mul(a2).div(a1);
    let delta = one.div(a2m1);
    let (nu, mu, sigma, zeta) = match d {
        Dim::Infinite => (
            IndexValue::int(0),
            IndexValue::int(0),
            IndexValue::PosInf,
            IndexValue::NegInf,
        ),
        Dim::Finite(dd) => {
            let dn = Num::int(dd as i64);
            let sigma = two.mul(dn).mul(a2m1).div(a2);
            let zeta = sigma.sub(dn).add(two);
            (a1.div(dn).value(), a2.div(dn).value(), sigma.value(), zeta.value())
        }
    };
    Ok(CriticalIndexSet {
        alpha: alpha.value(),
        beta: beta.value(),
        gamma: gamma.value(),
        delta: delta.value(),
        epsilon: epsilon.value(),
        nu,
        mu,
        zeta,
        sigma,
    })
}

/// `σ = 2d(α₂ − 1)/α₂` and `ζ = σ − d + 2`.
pub fn correlation_exponents(
    alpha2: IndexValue,
    d: Dim,
) -> Result<(IndexValue, IndexValue), ScalingError> {
    let a2 = check_exponent(alpha2, "α₂")?;
    let a2m1 = a2.sub(Num::int(1));
    if a2m1.is_zero() || a2m1.is_negative() {
        let dd = match d {
            Dim::Finite(v) => v as f64,
            Dim::Infinite => f64::INFINITY,
        };
        return Err(ScalingError::SigmaNegative(2.0 * dd * a2m1.f() / a2.f()));
    }
    match d {
        Dim::Infinite => Ok((IndexValue::PosInf, IndexValue::NegInf)),
        Dim::Finite(dd) => {
            let dn = Num::int(dd as i64);
            let sigma = Num::int(2).mul(dn).mul(a2m1).div(a2);
            Ok((sigma.value(), sigma.sub(dn).add(Num::int(2)).value()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Classical,
    D3Rational,
    Ising,
    Experimental,
}

impl FromStr for Preset {
    type Err = ScalingError;
    fn from_str(s: &str) -> Result<Self, ScalingError> {
        match s {
            "classical" => Ok(Preset::Classical),
            "d3-rational" => Ok(Preset::D3Rational),
            "ising" => Ok(Preset::Ising),
            "experimental" => Ok(Preset::Experimental),
            other => Err(ScalingError::Parse(other.to_string())),
        }
    }
}

impl Preset {
    /// `(α₁, α₂, d)`. The Ising preset is expressed in `t` (its `α₁ = 1` acts
    /// on `y₁ = t²`, so the exponent in `t` is 2). The experimental values are
    /// empirical input, not derived.
    pub fn exponents(self) -> (IndexValue, IndexValue, Dim) {
        match self {
            Preset::Classical => (IndexValue::int(2), IndexValue::ratio(4, 3), Dim::Infinite),
            Preset::D3Rational => (IndexValue::int(2), IndexValue::ratio(6, 5), Dim::Finite(3)),
            Preset::Ising => (IndexValue::int(2), IndexValue::ratio(16, 15), Dim::Finite(2)),
            Preset::Experimental => (
                IndexValue::Approx(1.89),
                IndexValue::Approx(1.21),
                Dim::Finite(3),
            ),
        }
    }
}

/// Coefficients beyond the leading 1 of `f(x,+) = 1 + Σ f⁺_k x^{2k}`,
/// `f(x,−) = 1 + Σ f⁻_k x^k` and `g(x) = 1 + Σ g_k x^k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFunction {
    pub f_plus: Vec<f64>,
    pub f_minus: Vec<f64>,
    pub g: Vec<f64>,
}

pub const DEFAULT_ORDER: usize = 8;

fn pad(mut v: Vec<f64>) -> Vec<f64> {
    v.resize(DEFAULT_ORDER.max(v.len()), 0.0);
    v
}

impl Default for ScalingFunction {
    fn default() -> Self {
        Self::new(vec![], vec![], vec![])
    }
}

impl ScalingFunction {
    pub fn new(f_plus: Vec<f64>, f_minus: Vec<f64>, g: Vec<f64>) -> Self {
        Self {
            f_plus: pad(f_plus),
            f_minus: pad(f_minus),
            g: pad(g),
        }
    }

    fn f(&self, x: f64, positive_t: bool) -> f64 {
        if positive_t {
            let x2 = x * x;
            1.0 + horner(&self.f_plus, x2) * x2
        } else {
            1.0 + horner(&self.f_minus, x) * x
        }
    }

    fn g(&self, x: f64) -> f64 {
        1.0 + horner(&self.g, x) * x
    }
}

/// `c₀ + c₁x + …`
fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

/// A singular part `Φ(t,h)` with known regime boundary `|t|^{a₁} = |h|^{a₂}`.
pub trait ScalingForm: Sync {
    fn phi(&self, t: f64, h: f64) -> Result<f64, ScalingError>;
    /// Exponents `(a₁, a₂)` in `t` and `h`.
    fn exponents(&self) -> (f64, f64);
    /// Whether `Φ` is non-analytic in `t` at `t = 0` in both regimes.
    fn singular_in_t_at_zero(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiEvaluator {
    pub alpha1: f64,
    pub alpha2: f64,
    pub dim: Dim,
    pub scaling: ScalingFunction,
    pub radius: f64,
    /// Relative width of the band around `|t|^{α₁} = |h|^{α₂}` where both forms are averaged.
    pub boundary_tol: f64,
}

impl PhiEvaluator {
    pub fn new(alpha1: f64, alpha2: f64, dim: Dim, scaling: ScalingFunction) -> Result<Self, ScalingError> {
        for (a, n) in [(alpha1, "α₁"), (alpha2, "α₂")] {
            if !(a > 0.0 && a <= 2.0) {
                return Err(ScalingError::InvalidExponent(format!("{n} = {a}")));
            }
        }
        Ok(Self {
            alpha1,
            alpha2,
            dim,
            scaling,
            radius: 1.0,
            boundary_tol: 1e-12,
        })
    }

    pub fn from_preset(p: Preset, scaling: ScalingFunction) -> Result<Self, ScalingError> {
        let (a1, a2, d) = p.exponents();
        Self::new(a1.to_f64(), a2.to_f64(), d, scaling)
    }

    fn weak(&self, t: f64, h: f64) -> Result<f64, ScalingError> {
        let at = t.abs();
        let x = h / at.powf(self.alpha1 / self.alpha2);
        if x.abs() > self.radius {
            return Err(ScalingError::RegimeOverflow {
                x,
                radius: self.radius,
            });
        }
        Ok(at.powf(self.alpha1) * self.scaling.f(x, t > 0.0))
    }

    fn strong(&self, t: f64, h: f64) -> Result<f64, ScalingError> {
        let ah = h.abs();
        let x = t / ah.powf(self.alpha2 / self.alpha1);
        if x.abs() > self.radius {
            return Err(ScalingError::RegimeOverflow {
                x,
                radius: self.radius,
            });
        }
        Ok(ah.powf(self.alpha2) * self.scaling.g(x))
    }

    /// `u^d Φ(t,h)` against `Φ(t u^{d/α₁}, h u^{d/α₂})`; `None` for `d = ∞`.
    pub fn dimension_residual(&self, u: f64, t: f64, h: f64) -> Option<Result<f64, ScalingError>> {
        let d = match self.dim {
            Dim::Finite(d) => d as f64,
            Dim::Infinite => return None,
        };
        Some((|| {
            let lhs = u.powf(d) * self.phi(t, h)?;
            let rhs = self.phi(t * u.powf(d / self.alpha1), h * u.powf(d / self.alpha2))?;
            Ok((lhs - rhs).abs() / lhs.abs().max(f64::MIN_POSITIVE))
        })())
    }

    /// Relative residual of `qΦ(t,h) = Φ(q^{1/α₁}t, q^{1/α₂}h)`.
    pub fn q_residual(&self, q: f64, t: f64, h: f64) -> Result<f64, ScalingError> {
        let lhs = q * self.phi(t, h)?;
        let rhs = self.phi(t * q.powf(1.0 / self.alpha1), h * q.powf(1.0 / self.alpha2))?;
        Ok((lhs - rhs).abs() / lhs.abs().max(f64::MIN_POSITIVE))
    }
}

impl ScalingForm for PhiEvaluator {
    fn phi(&self, t: f64, h: f64) -> Result<f64, ScalingError> {
        if t == 0.0 && h == 0.0 {
            return Err(ScalingError::OriginSingularity);
        }
        let wt = t.abs().powf(self.alpha1);
        let wh = h.abs().powf(self.alpha2);
        if (wt - wh).abs() <= self.boundary_tol * wt.max(wh) {
            return Ok(0.5 * (self.weak(t, h)? + self.strong(t, h)?));
        }
        if wt > wh {
            self.weak(t, h)
        } else {
            self.strong(t, h)
        }
    }

    fn exponents(&self) -> (f64, f64) {
        (self.alpha1, self.alpha2)
    }
}

/// Constants of the two Ising limit forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsingConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
}

impl Default for IsingConstants {
    fn default() -> Self {
        Self {
            c1: 1.0,
            c2: 0.5,
            c3: -1.0,
            c4: -1.0,
            c5: 1.0,
            c6: 0.5,
        }
    }
}

/// `α₁ = 1` on `y₁ = t²` with `α₂ = 16/15`:
/// `Φ ≈ t²(c₁ ln|t| + c₂) + c₃ h |t|^{1/8}` for `|t| > |h|^{8/15}`,
/// `Φ ≈ c₄ |h|^{16/15} + t²(c₅ ln|t| + c₆)` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsingEvaluator {
    pub constants: IsingConstants,
}

pub const ISING_ALPHA2: f64 = 16.0 / 15.0;

fn t2_log(t: f64, a: f64, b: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t * t * (a * t.abs().ln() + b)
    }
}

pub fn ising_phi(t: f64, h: f64, c: &IsingConstants) -> Result<f64, ScalingError> {
    if t == 0.0 && h == 0.0 {
        return Err(ScalingError::OriginSingularity);
    }
    if t.abs() > h.abs().powf(8.0 / 15.0) {
        Ok(t2_log(t, c.c1, c.c2) + c.c3 * h * t.abs().powf(0.125))
    } else {
        Ok(c.c4 * h.abs().powf(ISING_ALPHA2) + t2_log(t, c.c5, c.c6))
    }
}

impl ScalingForm for IsingEvaluator {
    fn phi(&self, t: f64, h: f64) -> Result<f64, ScalingError> {
        ising_phi(t, h, &self.constants)
    }
    fn exponents(&self) -> (f64, f64) {
        (2.0, ISING_ALPHA2)
    }
    fn singular_in_t_at_zero(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermoDerivatives {
    #[serde(rename = "C")]
    pub c: f64,
    pub eta: f64,
    pub chi: f64,
}

fn base_step(x: f64) -> f64 {
    1e-4 * x.abs().max(1e-3)
}

fn t_step<F: ScalingForm + ?Sized>(form: &F, t: f64, h: f64) -> Result<f64, ScalingError> {
    let (a1, a2) = form.exponents();
    let boundary = h.abs().powf(a2 / a1);
    let weak = t.abs().powf(a1) > h.abs().powf(a2);
    let mut s = base_step(t).min(0.25 * (t.abs() - boundary).abs());
    if weak || form.singular_in_t_at_zero() {
        s = s.min(0.25 * t.abs());
    }
    if !(s > 1e-12 * t.abs().max(h.abs())) {
        return Err(ScalingError::StepUnderflow { t, h });
    }
    Ok(s)
}

fn h_step<F: ScalingForm + ?Sized>(form: &F, t: f64, h: f64) -> Result<f64, ScalingError> {
    let (a1, a2) = form.exponents();
    let boundary = t.abs().powf(a1 / a2);
    let strong = t.abs().powf(a1) < h.abs().powf(a2);
    let mut s = base_step(h).min(0.25 * (h.abs() - boundary).abs());
    if strong {
        s = s.min(0.25 * h.abs());
    }
    if !(s > 1e-12 * t.abs().max(h.abs())) {
        return Err(ScalingError::StepUnderflow { t, h });
    }
    Ok(s)
}

/// Richardson-extrapolated central difference (`order` 1 or 2) of `f` at 0.
fn central<G: Fn(f64) -> Result<f64, ScalingError>>(f: G, s: f64, order: u8) -> Result<f64, ScalingError> {
    let d = |s: f64| -> Result<f64, ScalingError> {
        Ok(match order {
            1 => (f(s)? - f(-s)?) / (2.0 * s),
            _ => (f(s)? - 2.0 * f(0.0)? + f(-s)?) / (s * s),
        })
    };
    let coarse = d(s)?;
    let fine = d(0.5 * s)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// `C = −∂²Φ/∂t²`.
pub fn heat_capacity<F: ScalingForm + ?Sized>(form: &F, t: f64, h: f64) -> Result<f64, ScalingError> {
    let s = t_step(form, t, h)?;
    Ok(-central(|e| form.phi(t + e, h), s, 2)?)
}

/// `η = −∂Φ/∂h`.
pub fn order_parameter<F: ScalingForm + ?Sized>(form: &F, t: f64, h: f64) -> Result<f64, ScalingError> {
    let s = h_step(form, t, h)?;
    Ok(-central(|e| form.phi(t, h + e), s, 1)?)
}

/// `χ = −∂²Φ/∂h²`.
pub fn susceptibility<F: ScalingForm + ?Sized>(form: &F, t: f64, h: f64) -> Result<f64, ScalingError> {
    let s = h_step(form, t, h)?;
    Ok(-central(|e| form.phi(t, h + e), s, 2)?)
}

pub fn thermo_derivatives<F: ScalingForm + ?Sized>(form: &F, t: f64, h: f64) -> Result<ThermoDerivatives, ScalingError> {
    Ok(ThermoDerivatives {
        c: heat_capacity(form, t, h)?,
        eta: order_parameter(form, t, h)?,
        chi: susceptibility(form, t, h)?,
    })
}

/// Least-squares slope of `ln|y|` against `ln|x|`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.abs().ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.abs().ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

//! Stable densities: Mellin transform, numerical CF inversion and the
//! Fox-H / Meijer-G parameter blocks for rational exponents.
//!
//! The unit-scale law for `(α, ρ)` has `ln μ̂(y) = −|y|^α e^{−iπα(ρ−½) sgn y}`.
//! Its density `g` satisfies
//!
//! ```text
//! ∫_0^∞ g(x) x^{s−1} dx = Γ(s−1) Γ(1+1/α−s/α) / (Γ(ρs−ρ) Γ(1+ρ−ρs)).
//! ```

use crate::quad::{self, QuadConfig};
use crate::special::{gamma, gamma_real, is_gamma_pole, rgamma};
use crate::stable::{beta_to_rho, rho_range, rho_to_beta, StableError, StableLaw1D};
use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DensityError {
    #[error("Mellin transform has a pole at s = {0}")]
    PoleError(Complex64),
    #[error("Fourier inversion failed: {0}")]
    InversionFailure(String),
    #[error("invalid (α, ρ) = ({alpha}, {rho})")]
    InvalidSpec { alpha: f64, rho: f64 },
    #[error("M = {0} and N = {1} are not coprime")]
    NotCoprime(u32, u32),
    #[error("ρ = {0} is not admissible for α = {1}")]
    InadmissibleRho(f64, f64),
    #[error(transparent)]
    Stable(#[from] StableError),
}

impl DensityError {
    pub fn kind(&self) -> &'static str {
        match self {
            DensityError::PoleError(_) => "PoleError",
            DensityError::InversionFailure(_) => "InversionFailure",
            DensityError::InvalidSpec { .. } => "InvalidSpec",
            DensityError::NotCoprime(..) => "NotCoprime",
            DensityError::InadmissibleRho(..) => "InadmissibleRho",
            DensityError::Stable(e) => e.kind(),
        }
    }
}

/// `(α, ρ)` of a strictly stable law in the Mellin parameterization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MellinSpec {
    pub alpha: f64,
    pub rho: f64,
}

impl MellinSpec {
    pub fn new(alpha: f64, rho: f64) -> Result<Self, DensityError> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(DensityError::InvalidSpec { alpha, rho });
        }
        let (lo, hi) = rho_range(alpha);
        if !(rho >= lo - 1e-15 && rho <= hi + 1e-15) {
            return Err(DensityError::InvalidSpec { alpha, rho });
        }
        Ok(Self { alpha, rho })
    }

    /// The unit-scale law whose positive-half Mellin transform is the closed form.
    pub fn unit_law(&self) -> Result<StableLaw1D, DensityError> {
        let beta = rho_to_beta(self.alpha, self.rho)?;
        let sigma = (PI * self.alpha * (self.rho - 0.5))
            .cos()
            .powf(1.0 / self.alpha);
        Ok(StableLaw1D::from_beta(self.alpha, beta, sigma, 0.0)?)
    }

    /// For a strictly stable law returns its `(α, ρ)` and the factor `k`
    /// with `X =_d k · U`, `U` the unit-scale law.
    pub fn from_law(law: &StableLaw1D) -> Result<(Self, f64), DensityError> {
        let alpha = law.alpha();
        let rho = beta_to_rho(alpha, law.beta())?;
        let spec = Self::new(alpha, rho)?;
        let unit_sigma = (PI * alpha * (rho - 0.5)).cos().powf(1.0 / alpha);
        Ok((spec, law.sigma() / unit_sigma))
    }
}

fn same(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= 1e-13 * (1.0 + a.norm())
}

/// Positive-half Mellin transform `M(s | α, ρ)` of the unit-scale density.
pub fn mellin_value(spec: &MellinSpec, s: Complex64) -> Result<Complex64, DensityError> {
    let (alpha, rho) = (spec.alpha, spec.rho);
    if rho == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    // Γ(s−1)/Γ(ρ(s−1)) = ρ Γ(s) / Γ(1+ρ(s−1)) removes the point s = 1.
    let one = Complex64::new(1.0, 0.0);
    let mut num = vec![s, one + (one - s) / alpha];
    let mut den = vec![one + rho * (s - one), one + rho - rho * s];
    let mut i = 0;
    while i < num.len() {
        if let Some(j) = den.iter().position(|&d| same(d, num[i])) {
            num.remove(i);
            den.remove(j);
        } else {
            i += 1;
        }
    }
    let num_poles = num.iter().filter(|&&z| is_gamma_pole(z)).count();
    if num_poles > 0 {
        let den_zeros = den.iter().filter(|&&z| is_gamma_pole(z)).count();
        if num_poles > den_zeros {
            return Err(DensityError::PoleError(s));
        }
        // removable: symmetric limit
        let h = 1e-6 * (1.0 + s.norm());
        let hi = mellin_value(spec, s + h)?;
        let lo = mellin_value(spec, s - h)?;
        return Ok(0.5 * (hi + lo));
    }
    let mut v = Complex64::new(rho, 0.0);
    for z in num {
        v *= gamma(z);
    }
    for z in den {
        v *= rgamma(z);
    }
    Ok(v)
}

/// Settings for density evaluation by Fourier inversion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InversionConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Truncate the frequency integral where `|φ(y)|` falls below this.
    pub cf_cutoff: f64,
    /// Below this α the integral is taken in `u = y^α`.
    pub substitution_alpha: f64,
    pub max_panels: usize,
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            cf_cutoff: 1e-12,
            substitution_alpha: 0.7,
            max_panels: 40_000,
        }
    }
}

/// Asymptotic series of the unit-scale density for `|x| → ∞`
/// (convergent for `α < 1`). Returns `None` when it has not settled.
pub fn bergstrom_density(spec: &MellinSpec, x: f64) -> Option<f64> {
    let (alpha, rho) = if x >= 0.0 {
        (spec.alpha, spec.rho)
    } else {
        (spec.alpha, 1.0 - spec.rho)
    };
    let x = x.abs();
    series(alpha, x, |k| {
        let kf = k as f64;
        gamma_real(kf * alpha + 1.0) / gamma_real(kf + 1.0)
            * sin_pi(kf * alpha * rho)
            * x.powf(-kf * alpha - 1.0)
    })
    .map(|v| v / PI)
}

/// Asymptotic series for `∫_X^∞ x^{s−1} g(x) dx` of the unit-scale density (`X > 0`, real `s < 1+α`).
pub fn bergstrom_mellin_tail(spec: &MellinSpec, big_x: f64, s: f64) -> Option<f64> {
    let (alpha, rho) = (spec.alpha, spec.rho);
    series(alpha, big_x, |k| {
        let kf = k as f64;
        gamma_real(kf * alpha + 1.0) / gamma_real(kf + 1.0) * sin_pi(kf * alpha * rho)
            * big_x.powf(s - 1.0 - kf * alpha)
            / (kf * alpha + 1.0 - s)
    })
    .map(|v| v / PI)
}

/// `sin(πv)`, exactly zero at integers.
fn sin_pi(v: f64) -> f64 {
    let r = v - 2.0 * (0.5 * v).round();
    if r.fract() == 0.0 {
        0.0
    } else {
        (PI * r).sin()
    }
}

fn series<F: Fn(usize) -> f64>(alpha: f64, x: f64, term: F) -> Option<f64> {
    if alpha == 2.0 || x <= 0.0 {
        return if alpha == 2.0 { Some(0.0) } else { None };
    }
    let mut sum = 0.0f64;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let t = if k % 2 == 1 { term(k) } else { -term(k) };
        if !t.is_finite() {
            return None;
        }
        if t == 0.0 {
            if k > 8 && sum == 0.0 {
                return Some(0.0);
            }
            continue;
        }
        if t.abs() > last && alpha > 1.0 {
            // asymptotic series started to diverge
            return (last <= 1e-12 * sum.abs().max(1e-300)).then_some(sum);
        }
        sum += t;
        if t.abs() <= 1e-16 * sum.abs() {
            return Some(sum);
        }
        last = t.abs();
    }
    None
}

fn law_truncation(law: &StableLaw1D, cutoff: f64) -> f64 {
    let sigma = law.sigma();
    let l = -cutoff.ln();
    if law.alpha() == 2.0 {
        (l / law.gaussian_r()).sqrt()
    } else {
        (l / sigma.powf(law.alpha())).powf(1.0 / law.alpha())
    }
}

fn invert<F>(law: &StableLaw1D, x: f64, cfg: &InversionConfig, kernel: F) -> Result<f64, DensityError>
where
    F: Fn(f64, Complex64) -> f64,
{
    let alpha = law.alpha();
    let y_max = law_truncation(law, cfg.cf_cutoff);
    let shift = (x - law.location()).abs() + if alpha == 1.0 { (law.c1() - law.c2()).abs() * y_max.ln().abs() } else { 0.0 };
    let width = if shift > 0.0 {
        (PI / (4.0 * shift)).min(y_max / 16.0)
    } else {
        y_max / 16.0
    };
    let panels = (y_max / width).ceil() as usize;
    if panels > cfg.max_panels {
        return Err(DensityError::InversionFailure(format!(
            "{panels} oscillation panels exceed the budget of {}",
            cfg.max_panels
        )));
    }
    let qcfg = QuadConfig {
        rel_tol: cfg.rel_tol,
        abs_tol: cfg.abs_tol,
        max_subdivisions: 4 * panels + 20_000,
    };
    let integrand = |y: f64| -> f64 {
        if y == 0.0 {
            return kernel(0.0, Complex64::new(1.0, 0.0));
        }
        let psi = law
            .log_cf_real(y)
            .unwrap_or_else(|_| Complex64::new(f64::NEG_INFINITY, 0.0));
        kernel(y, (psi - Complex64::new(0.0, y * x)).exp())
    };
    let y_breaks: Vec<f64> = (0..=panels).map(|k| (k as f64 * width).min(y_max)).collect();
    let result = if alpha < cfg.substitution_alpha {
        // y = u^{1/α}, dy = u^{1/α−1}/α du
        let inv = 1.0 / alpha;
        let mut breaks: Vec<f64> = y_breaks.iter().map(|y| y.powf(alpha)).collect();
        let u_max = y_max.powf(alpha);
        breaks.extend((1..64).map(|k| u_max * k as f64 / 64.0));
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breaks.dedup();
        quad::adaptive(
            |u: f64| {
                if u <= 0.0 {
                    return 0.0;
                }
                let y = u.powf(inv);
                integrand(y) * inv * u.powf(inv - 1.0)
            },
            &breaks,
            &qcfg,
        )
    } else {
        let mut breaks = y_breaks;
        breaks.dedup();
        quad::adaptive(integrand, &breaks, &qcfg)
    };
    match result {
        Ok((v, _)) => Ok(v / PI),
        Err(e) => Err(DensityError::InversionFailure(e.to_string())),
    }
}

/// Density of `law` at `x` by Fourier inversion, with the asymptotic tail
/// series taking over where the oscillation budget would be exceeded.
pub fn density(law: &StableLaw1D, x: f64, cfg: &InversionConfig) -> Result<f64, DensityError> {
    if !x.is_finite() {
        return Err(DensityError::InversionFailure("non-finite x".into()));
    }
    if law.alpha() == 1.0 && law.c1() == law.c2() {
        let s = law.sigma();
        let z = (x - law.location()) / s;
        return Ok(1.0 / (PI * s * (1.0 + z * z)));
    }
    match invert(law, x, cfg, |_, phi| phi.re) {
        Ok(g) => finish(g),
        Err(err) => {
            if law.alpha() != 1.0 {
                let (spec, k) = MellinSpec::from_law(&law.with_location(0.0))?;
                if let Some(v) = bergstrom_density(&spec, (x - law.location()) / k) {
                    return finish(v / k);
                }
            }
            Err(err)
        }
    }
}

/// Density by Fourier inversion alone: no closed forms, no series fallback.
pub fn density_by_inversion(law: &StableLaw1D, x: f64, cfg: &InversionConfig) -> Result<f64, DensityError> {
    if !x.is_finite() {
        return Err(DensityError::InversionFailure("non-finite x".into()));
    }
    finish(invert(law, x, cfg, |_, phi| phi.re)?)
}

fn finish(g: f64) -> Result<f64, DensityError> {
    if g < -1e-8 {
        return Err(DensityError::InversionFailure(format!(
            "negative density {g:e}"
        )));
    }
    Ok(g.max(0.0))
}

/// Distribution function by the Gil-Pelaez formula, with the asymptotic
/// tail series beyond the oscillation budget.
pub fn cdf(law: &StableLaw1D, x: f64, cfg: &InversionConfig) -> Result<f64, DensityError> {
    if law.alpha() == 1.0 && law.c1() == law.c2() {
        let z = (x - law.location()) / law.sigma();
        return Ok(0.5 + z.atan() / PI);
    }
    let v = match invert(law, x, cfg, |y, phi| {
        if y == 0.0 {
            0.0
        } else {
            phi.im / y
        }
    }) {
        Ok(v) => v,
        Err(err) => {
            if law.alpha() != 1.0 {
                let (spec, k) = MellinSpec::from_law(&law.with_location(0.0))?;
                let u = (x - law.location()) / k;
                if u > 0.0 {
                    if let Some(t) = bergstrom_mellin_tail(&spec, u, 1.0) {
                        return Ok((1.0 - t).clamp(0.0, 1.0));
                    }
                } else if u < 0.0 {
                    let mirror = MellinSpec::new(spec.alpha, 1.0 - spec.rho)?;
                    if let Some(t) = bergstrom_mellin_tail(&mirror, -u, 1.0) {
                        return Ok(t.clamp(0.0, 1.0));
                    }
                }
            }
            return Err(err);
        }
    };
    Ok((0.5 - v).clamp(0.0, 1.0))
}

/// Quantile by bisection on [`cdf`].
pub fn quantile(law: &StableLaw1D, p: f64, cfg: &InversionConfig) -> Result<f64, DensityError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(DensityError::InversionFailure(format!("probability {p} outside (0,1)")));
    }
    let scale = if law.alpha() == 2.0 {
        law.gaussian_r().sqrt()
    } else {
        law.sigma()
    };
    let (mut lo, mut hi) = (law.location() - scale, law.location() + scale);
    while cdf(law, lo, cfg)? > p {
        lo -= 2.0 * (hi - lo);
        if !lo.is_finite() || lo < -1e12 {
            return Err(DensityError::InversionFailure("quantile bracket".into()));
        }
    }
    while cdf(law, hi, cfg)? < p {
        hi += 2.0 * (hi - lo);
        if !hi.is_finite() || hi > 1e12 {
            return Err(DensityError::InversionFailure("quantile bracket".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(law, mid, cfg)? < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-10 * (1.0 + mid.abs()) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Parameter block of the `H^{1,1}_{2,2}` representation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoxHParams {
    pub upper: [(f64, f64); 2],
    pub lower: [(f64, f64); 2],
    pub orders: (u32, u32, u32, u32),
}

pub fn fox_params(alpha: f64, rho: f64) -> Result<FoxHParams, DensityError> {
    let spec = MellinSpec::new(alpha, rho)?;
    let (a, r) = (spec.alpha, spec.rho);
    Ok(FoxHParams {
        upper: [(-1.0 / a, 1.0 / a), (-r, r)],
        lower: [(-1.0, 1.0), (-r, r)],
        orders: (1, 1, 2, 2),
    })
}

/// Parameters of the Meijer-G reduction for `α = M/N`, `ρ = L/M`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeijerGParams {
    pub m_big: u32,
    pub n_big: u32,
    pub l_big: u32,
    /// `(m, n, p, q)` of `G^{m,n}_{p,q}`.
    pub orders: (u32, u32, u32, u32),
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
    pub prefactor: f64,
    /// Argument map `x ↦ coefficient · x^power`.
    pub argument_power: u32,
    pub argument_coefficient: f64,
    pub ode_order: u32,
}

pub fn meijer_reduction(m: u32, n: u32, l: u32) -> Result<MeijerGParams, DensityError> {
    if m == 0 || n == 0 || l == 0 {
        return Err(DensityError::InvalidSpec {
            alpha: m as f64 / n.max(1) as f64,
            rho: l as f64 / m.max(1) as f64,
        });
    }
    if m.gcd(&n) != 1 {
        return Err(DensityError::NotCoprime(m, n));
    }
    let alpha = m as f64 / n as f64;
    let rho = l as f64 / m as f64;
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(DensityError::InvalidSpec { alpha, rho });
    }
    let (lo, hi) = rho_range(alpha);
    if !(rho >= lo - 1e-15 && rho <= hi + 1e-15) {
        return Err(DensityError::InadmissibleRho(rho, alpha));
    }
    let frac = |k: u32| (1..k).map(move |j| j as f64 / k as f64);
    let upper: Vec<f64> = frac(n).chain(frac(l)).collect();
    let lower: Vec<f64> = frac(m).chain(frac(l)).collect();
    let (mf, nf, lf) = (m as f64, n as f64, l as f64);
    Ok(MeijerGParams {
        m_big: m,
        n_big: n,
        l_big: l,
        orders: (m - 1, l - 1, n + l - 2, m + l - 2),
        upper,
        lower,
        prefactor: (2.0 * PI).powf(lf - 0.5 * (mf + nf)) * (mf * nf).sqrt(),
        argument_power: m,
        argument_coefficient: nf.powf(nf) / mf.powf(mf),
        ode_order: (m - 1).max(n - 1),
    })
}

/// Closed-form density of the one-sided unit law with `α = ½`, `ρ = 1`.
pub fn levy_half_density(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    (-0.25 / x).exp() / (2.0 * PI.sqrt() * x.powf(1.5))
}

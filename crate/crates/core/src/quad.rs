//! Numerical integration.
//!
//! * [`adaptive`]: globally adaptive Gauss–Kronrod (7/15) over a list of
//!   initial panels.
//! * [`tanh_sinh`]: double-exponential rule on a finite interval, for
//!   integrable endpoint singularities.
//! * [`exp_sinh`]: double-exponential rule on `[a, ∞)` for algebraically
//!   decaying integrands.
//! * [`fourier_tail`]: `∫_a^∞ f(x) e^{iyx} dx` by half-period panels and
//!   Wynn's epsilon extrapolation of the partial sums.

use num_complex::Complex64;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul, Sub};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("quadrature did not reach tolerance (estimate {estimate:e}, error {error:e})")]
    NotConverged { estimate: f64, error: f64 },
    #[error("integrand returned a non-finite value at x = {0}")]
    NonFinite(f64),
}

/// Values that can be integrated: real or complex.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + AddAssign
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Tolerances and budget shared by the integrators.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-13,
            max_subdivisions: 20_000,
        }
    }
}

impl QuadConfig {
    fn target(&self, estimate: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * estimate)
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss–Kronrod 7/15 panel: (Kronrod estimate, |K - G|).
fn gk15<T: QuadValue, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    let k = k * h;
    let g = g * h;
    let err = (k - g).magnitude();
    (k, err)
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive Gauss–Kronrod over the panels delimited by `breaks`
/// (sorted, at least two entries). Returns (value, error estimate).
pub fn adaptive<T, F>(mut f: F, breaks: &[f64], cfg: &QuadConfig) -> Result<(T, f64), QuadError>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    let mut heap = BinaryHeap::new();
    let mut total = T::zero();
    let mut total_err = 0.0;
    for w in breaks.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (v, e) = gk15(&mut f, w[0], w[1]);
        total += v;
        total_err += e;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value: v,
            err: e,
        });
    }
    let mut splits = 0;
    loop {
        if !total.magnitude().is_finite() {
            return Err(QuadError::NonFinite(f64::NAN));
        }
        if total_err <= cfg.target(total.magnitude()) {
            return Ok((total, total_err));
        }
        if splits >= cfg.max_subdivisions {
            return Err(QuadError::NotConverged {
                estimate: total.magnitude(),
                error: total_err,
            });
        }
        let Some(worst) = heap.pop() else {
            return Ok((total, total_err));
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // cannot split further in floating point
            return Err(QuadError::NotConverged {
                estimate: total.magnitude(),
                error: total_err,
            });
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        total = total - worst.value + v1 + v2;
        total_err += e1 + e2 - worst.err;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            err: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            err: e2,
        });
        splits += 1;
    }
}

/// Tanh-sinh quadrature on `[a, b]`. The integrand receives `(x, dist_a,
/// dist_b)` where the distances to the endpoints are computed without
/// cancellation, so singular integrands can be evaluated accurately.
pub fn tanh_sinh<T, F>(mut f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<T, QuadError>
where
    T: QuadValue,
    F: FnMut(f64, f64, f64) -> T,
{
    let half = 0.5 * (b - a);
    let mut eval = |t: f64| -> T {
        let u = 0.5 * PI * t.sinh();
        let cu = u.cosh();
        let w = 0.5 * PI * t.cosh() / (cu * cu);
        // 1 - tanh(u) and 1 + tanh(u) without cancellation
        let e = (-2.0 * u.abs()).exp();
        let small = 2.0 * e / (1.0 + e);
        let (one_minus, one_plus) = if u >= 0.0 {
            (small, 2.0 - small)
        } else {
            (2.0 - small, small)
        };
        let da = half * one_plus;
        let db = half * one_minus;
        if da <= 0.0 || db <= 0.0 || w == 0.0 {
            return T::zero();
        }
        let x = if da < db { a + da } else { b - db };
        f(x, da, db) * (w * half)
    };
    let tmax = 6.5;
    let mut h = 0.5;
    let mut sum = eval(0.0);
    let mut k = 1;
    while (k as f64) * h <= tmax {
        let t = k as f64 * h;
        sum += eval(t) + eval(-t);
        k += 1;
    }
    let mut prev = sum * h;
    for _level in 0..10 {
        h *= 0.5;
        let mut k = 1;
        while (k as f64) * h <= tmax {
            let t = k as f64 * h;
            sum += eval(t) + eval(-t);
            k += 2;
        }
        let cur = sum * h;
        let diff = (cur - prev).magnitude();
        if !cur.magnitude().is_finite() {
            return Err(QuadError::NonFinite(f64::NAN));
        }
        if diff <= cfg.target(cur.magnitude()) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(QuadError::NotConverged {
        estimate: prev.magnitude(),
        error: f64::NAN,
    })
}

/// Exp-sinh quadrature on `[a, ∞)`.
pub fn exp_sinh<T, F>(mut f: F, a: f64, cfg: &QuadConfig) -> Result<T, QuadError>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    let mut eval = |t: f64| -> T {
        let u = 0.5 * PI * t.sinh();
        let ex = u.exp();
        if !ex.is_finite() || ex == 0.0 {
            return T::zero();
        }
        let w = 0.5 * PI * t.cosh() * ex;
        let x = a + ex;
        if !x.is_finite() {
            return T::zero();
        }
        f(x) * w
    };
    let (tmin, tmax): (f64, f64) = (-5.0, 6.0);
    let mut h = 0.5;
    let mut sum = T::zero();
    let mut k = (tmin / h).ceil() as i64;
    while (k as f64) * h <= tmax {
        sum += eval(k as f64 * h);
        k += 1;
    }
    let mut prev = sum * h;
    for _level in 0..10 {
        h *= 0.5;
        let mut k = (tmin / h).ceil() as i64;
        if k % 2 == 0 {
            k += 1;
        }
        while (k as f64) * h <= tmax {
            sum += eval(k as f64 * h);
            k += 2;
        }
        let cur = sum * h;
        if !cur.magnitude().is_finite() {
            return Err(QuadError::NonFinite(f64::NAN));
        }
        if (cur - prev).magnitude() <= cfg.target(cur.magnitude()) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(QuadError::NotConverged {
        estimate: prev.magnitude(),
        error: f64::NAN,
    })
}

/// Wynn's epsilon algorithm applied to a sequence of partial sums; returns
/// the last diagonal estimate and the change between the last two.
fn wynn_epsilon(seq: &[Complex64]) -> (Complex64, f64) {
    let n = seq.len();
    let mut prev = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut cur: Vec<Complex64> = seq.to_vec();
    let mut best = *seq.last().unwrap();
    let mut best_prev = if n > 1 { seq[n - 2] } else { best };
    let mut col = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let d = cur[i + 1] - cur[i];
            let p = if col == 0 { Complex64::new(0.0, 0.0) } else { prev[i + 1] };
            if d.norm() == 0.0 {
                next.push(Complex64::new(f64::INFINITY, 0.0));
            } else {
                next.push(p + 1.0 / d);
            }
        }
        prev = cur;
        cur = next;
        col += 1;
        // even columns carry sum estimates
        if col % 2 == 0 && !cur.is_empty() && cur.iter().all(|v| v.norm().is_finite()) {
            let m = cur.len();
            best = cur[m - 1];
            best_prev = if m > 1 { cur[m - 2] } else { best };
        }
        if cur.iter().any(|v| !v.norm().is_finite()) {
            break;
        }
    }
    (best, (best - best_prev).norm())
}

/// `∫_a^∞ f(x) e^{iyx} dx` for an eventually monotone, decaying `f`.
pub fn fourier_tail<F>(mut f: F, y: f64, a: f64, cfg: &QuadConfig) -> Result<Complex64, QuadError>
where
    F: FnMut(f64) -> f64,
{
    if y == 0.0 {
        let v: f64 = exp_sinh(&mut f, a, cfg)?;
        return Ok(Complex64::new(v, 0.0));
    }
    let period = PI / y.abs();
    // align panel boundaries with zeros of sin(yx) and cos(yx) alternately
    let mut edges = vec![a];
    let first = ((a / period).floor() + 1.0) * period;
    edges.push(first);
    let mut partial = Vec::new();
    let mut acc = Complex64::new(0.0, 0.0);
    let panel_cfg = QuadConfig {
        rel_tol: cfg.rel_tol * 0.1,
        abs_tol: cfg.abs_tol * 0.1,
        ..*cfg
    };
    let mut last_est = Complex64::new(f64::NAN, 0.0);
    let mut stable_hits = 0;
    for k in 0..4000 {
        let lo = edges[edges.len() - 2];
        let hi = edges[edges.len() - 1];
        let (v, _) = adaptive(
            |x| Complex64::from_polar(f(x), y * x),
            &[lo, hi],
            &panel_cfg,
        )?;
        acc += v;
        partial.push(acc);
        edges.push(first + (k + 1) as f64 * period);
        if partial.len() >= 8 {
            let window = &partial[partial.len().saturating_sub(24)..];
            let (est, delta) = wynn_epsilon(window);
            let tol = cfg.target(est.norm());
            if delta <= tol && (est - last_est).norm() <= tol {
                stable_hits += 1;
                if stable_hits >= 2 {
                    return Ok(est);
                }
            } else {
                stable_hits = 0;
            }
            last_est = est;
        }
    }
    Err(QuadError::NotConverged {
        estimate: acc.norm(),
        error: f64::NAN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_is_exact_for_polynomials() {
        let cfg = QuadConfig::default();
        for deg in 0..=22 {
            let (v, _): (f64, f64) = adaptive(|x| x.powi(deg), &[0.0, 1.0], &cfg).unwrap();
            let exact = 1.0 / (deg as f64 + 1.0);
            assert!((v - exact).abs() < 1e-14, "degree {deg}: {v} vs {exact}");
        }
    }

    #[test]
    fn adaptive_handles_peaks() {
        let cfg = QuadConfig::default();
        let (v, _): (f64, f64) =
            adaptive(|x| 1.0 / (1e-4 + x * x), &[-1.0, 1.0], &cfg).unwrap();
        let exact = 2.0 * (1.0 / 1e-2) * (1.0f64 / 1e-2).atan();
        assert!((v - exact).abs() / exact < 1e-9);
    }

    #[test]
    fn tanh_sinh_endpoint_singularity() {
        let cfg = QuadConfig::default();
        // ∫_0^1 x^{-0.9} dx = 10
        let v: f64 = tanh_sinh(|_x, da, _db| da.powf(-0.9), 0.0, 1.0, &cfg).unwrap();
        assert!((v - 10.0).abs() < 1e-8, "{v}");
        // ∫_0^1 ln(x) dx = -1
        let v: f64 = tanh_sinh(|_x, da, _| da.ln(), 0.0, 1.0, &cfg).unwrap();
        assert!((v + 1.0).abs() < 1e-12);
    }

    #[test]
    fn exp_sinh_algebraic_tail() {
        let cfg = QuadConfig::default();
        // ∫_1^∞ x^{-1.5} dx = 2
        let v: f64 = exp_sinh(|x| x.powf(-1.5), 1.0, &cfg).unwrap();
        assert!((v - 2.0).abs() < 1e-9, "{v}");
        let v: f64 = exp_sinh(|x| (-x).exp(), 0.0, &cfg).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fourier_tail_matches_closed_forms() {
        let cfg = QuadConfig::default();
        // ∫_0^∞ e^{-x} e^{iyx} dx = 1/(1 - iy)
        let y = 2.5;
        let v = fourier_tail(|x| (-x).exp(), y, 0.0, &cfg).unwrap();
        let exact = 1.0 / Complex64::new(1.0, -y);
        assert!((v - exact).norm() < 1e-10);
        // ∫_0^∞ e^{iyx}/(1+x²) dx has real part (π/2) e^{-|y|}
        let v = fourier_tail(|x| 1.0 / (1.0 + x * x), -1.3, 0.0, &cfg).unwrap();
        assert!((v.re - 0.5 * PI * (-1.3f64).exp()).abs() < 1e-9, "{v}");
        // ∫_1^∞ sin(x)/x dx = π/2 - Si(1)
        let v = fourier_tail(|x| 1.0 / x, 1.0, 1.0, &cfg).unwrap();
        let si1 = 0.946_083_070_367_183_1;
        assert!((v.im - (0.5 * PI - si1)).abs() < 1e-9, "{v}");
    }
}

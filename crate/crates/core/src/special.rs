//! Gamma function on the complex plane.
//!
//! Lanczos approximation (g = 7, nine coefficients) on the right half-plane,
//! reflection formula on the left. Relative accuracy is about 1e-15 away
//! from the poles.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Euler–Mascheroni constant, `-Γ'(1)`.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(z: Complex64) -> Complex64 {
    // z here is the shifted argument (z - 1)
    let mut acc = Complex64::new(LANCZOS_COEF[0], 0.0);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    acc
}

/// Returns true when `z` sits on a pole of Γ (a non-positive integer).
pub fn is_gamma_pole(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// Complex Γ(z). Returns `inf` at the poles.
pub fn gamma(z: Complex64) -> Complex64 {
    if is_gamma_pole(z) {
        return Complex64::new(f64::INFINITY, 0.0);
    }
    if z.re < 0.5 {
        // Γ(z) Γ(1 - z) = π / sin(πz)
        let s = (z * PI).sin();
        return PI / (s * gamma(1.0 - z));
    }
    let zm = z - 1.0;
    let t = zm + LANCZOS_G + 0.5;
    let sqrt_2pi = (2.0 * PI).sqrt();
    sqrt_2pi * t.powc(zm + 0.5) * (-t).exp() * lanczos_sum(zm)
}

/// ln Γ(z) on the principal branch of the logarithm of the Lanczos form.
/// Only used for moduli; the imaginary part is not continuous across the
/// negative real axis.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let s = (z * PI).sin();
        return Complex64::new(PI.ln(), 0.0) - s.ln() - ln_gamma(1.0 - z);
    }
    let zm = z - 1.0;
    let t = zm + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (zm + 0.5) * t.ln() - t + lanczos_sum(zm).ln()
}

/// 1/Γ(z), an entire function: exactly zero at the poles of Γ.
pub fn rgamma(z: Complex64) -> Complex64 {
    if is_gamma_pole(z) {
        return Complex64::new(0.0, 0.0);
    }
    if z.re < 0.5 {
        // 1/Γ(z) = Γ(1 - z) sin(πz) / π
        return gamma(1.0 - z) * (z * PI).sin() / PI;
    }
    1.0 / gamma(z)
}

/// Real Γ(x).
pub fn gamma_real(x: f64) -> f64 {
    gamma(Complex64::new(x, 0.0)).re
}

/// Γ(-α) for α in (0, 2) \ {1}, via Γ(-α) = -π / (sin(πα) Γ(1 + α)).
pub fn gamma_neg(alpha: f64) -> f64 {
    -PI / ((PI * alpha).sin() * gamma_real(1.0 + alpha))
}

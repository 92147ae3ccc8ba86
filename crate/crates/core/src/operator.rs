//! Two-dimensional operator-stable laws with exponent matrix `B`.
//!
//! The centering function is `b(t) = t ∫_{1/t}^1 v^{−B} dv · d`, which for
//! `1 ∉ Σ(B)` equals `(I − B)^{−1}(t I − t^B) d`.

use crate::quad::{self, QuadConfig};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Mat2 = [[f64; 2]; 2];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OperatorError {
    #[error("t must be positive, got {0}")]
    NonPositiveT(f64),
    #[error("exponent matrix {0:?} is not one of the supported shapes")]
    UnsupportedShape(Mat2),
    #[error("1 is an eigenvalue of B; no strictifying shift exists")]
    OneInSpectrum,
    #[error("Λ = ½: the law is normal and every moment is finite")]
    NormalLaw,
    #[error("spectrum {0:?} has an eigenvalue with real part below ½")]
    InvalidSpectrum([f64; 2]),
    #[error("argument outside the domain: {0}")]
    DomainError(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),
}

impl OperatorError {
    pub fn kind(&self) -> &'static str {
        match self {
            OperatorError::NonPositiveT(_) => "NonPositiveT",
            OperatorError::UnsupportedShape(_) => "UnsupportedShape",
            OperatorError::OneInSpectrum => "OneInSpectrum",
            OperatorError::NormalLaw => "NormalLaw",
            OperatorError::InvalidSpectrum(_) => "InvalidSpectrum",
            OperatorError::DomainError(_) => "DomainError",
            OperatorError::InvalidParameters(_) => "InvalidParameters",
            OperatorError::QuadratureFailure(_) => "QuadratureFailure",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    Diagonal,
    Scalar,
    /// `[[λ, 0], [β, λ]]`
    LowerTriangular,
    /// `[[λ, β], [β, λ]]`
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Mat2", into = "Mat2")]
pub struct ExponentMatrix {
    m: Mat2,
    shape: Shape,
}

impl TryFrom<Mat2> for ExponentMatrix {
    type Error = OperatorError;
    fn try_from(m: Mat2) -> Result<Self, OperatorError> {
        Self::from_matrix(m)
    }
}

impl From<ExponentMatrix> for Mat2 {
    fn from(e: ExponentMatrix) -> Mat2 {
        e.m
    }
}

fn check_entries(m: &Mat2) -> Result<(), OperatorError> {
    if m.iter().flatten().any(|v| !v.is_finite()) {
        return Err(OperatorError::InvalidParameters("non-finite entry".into()));
    }
    if m[0][0] <= 0.0 || m[1][1] <= 0.0 {
        return Err(OperatorError::InvalidParameters(
            "diagonal entries must be positive".into(),
        ));
    }
    Ok(())
}

impl ExponentMatrix {
    /// `diag(1/α₁, 1/α₂)`.
    pub fn diagonal(alpha1: f64, alpha2: f64) -> Result<Self, OperatorError> {
        if !(alpha1 > 0.0 && alpha2 > 0.0) {
            return Err(OperatorError::InvalidParameters("α must be positive".into()));
        }
        Self::from_matrix([[1.0 / alpha1, 0.0], [0.0, 1.0 / alpha2]])
    }

    pub fn scalar(alpha: f64) -> Result<Self, OperatorError> {
        Self::diagonal(alpha, alpha)
    }

    /// `[[1/α, 0], [β, 1/α]]`.
    pub fn lower_triangular(alpha: f64, beta: f64) -> Result<Self, OperatorError> {
        if !(alpha > 0.0) {
            return Err(OperatorError::InvalidParameters("α must be positive".into()));
        }
        let l = 1.0 / alpha;
        Self::from_matrix([[l, 0.0], [beta, l]])
    }

    /// `[[1/α, β], [β, 1/α]]`.
    pub fn symmetric(alpha: f64, beta: f64) -> Result<Self, OperatorError> {
        if !(alpha > 0.0) {
            return Err(OperatorError::InvalidParameters("α must be positive".into()));
        }
        let l = 1.0 / alpha;
        Self::from_matrix([[l, beta], [beta, l]])
    }

    pub fn from_matrix(m: Mat2) -> Result<Self, OperatorError> {
        check_entries(&m)?;
        let shape = if m[0][1] == 0.0 && m[1][0] == 0.0 {
            if m[0][0] == m[1][1] {
                Shape::Scalar
            } else {
                Shape::Diagonal
            }
        } else if m[0][0] == m[1][1] && m[0][1] == 0.0 {
            Shape::LowerTriangular
        } else if m[0][0] == m[1][1] && m[0][1] == m[1][0] {
            Shape::Symmetric
        } else {
            return Err(OperatorError::UnsupportedShape(m));
        };
        Ok(Self { m, shape })
    }

    pub fn matrix(&self) -> Mat2 {
        self.m
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// Eigenvalues (always real for the supported shapes).
    pub fn eigenvalues(&self) -> [f64; 2] {
        match self.shape {
            Shape::Diagonal | Shape::Scalar | Shape::LowerTriangular => [self.m[0][0], self.m[1][1]],
            Shape::Symmetric => [self.m[0][0] + self.m[0][1], self.m[0][0] - self.m[0][1]],
        }
    }

    /// `t^B = exp(B ln t)`.
    pub fn t_pow(&self, t: f64) -> Mat2 {
        let lt = t.ln();
        let l = self.m[0][0];
        match self.shape {
            Shape::Diagonal | Shape::Scalar => [[t.powf(l), 0.0], [0.0, t.powf(self.m[1][1])]],
            Shape::LowerTriangular => {
                let p = t.powf(l);
                [[p, 0.0], [self.m[1][0] * lt * p, p]]
            }
            Shape::Symmetric => {
                let b = self.m[0][1];
                let (u, w) = (t.powf(l + b), t.powf(l - b));
                [[0.5 * (u + w), 0.5 * (u - w)], [0.5 * (u - w), 0.5 * (u + w)]]
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub valid: bool,
    pub lambda: f64,
}

pub fn spectrum_check(b: &ExponentMatrix) -> SpectrumReport {
    let ev = b.eigenvalues();
    SpectrumReport {
        valid: ev.iter().all(|&l| l >= 0.5),
        lambda: ev[0].max(ev[1]),
    }
}

/// `1/Λ`: absolute moments of order `p < 1/Λ` are finite.
pub fn moment_cutoff(b: &ExponentMatrix) -> Result<f64, OperatorError> {
    let s = spectrum_check(b);
    if !s.valid {
        return Err(OperatorError::InvalidSpectrum(b.eigenvalues()));
    }
    if s.lambda == 0.5 {
        return Err(OperatorError::NormalLaw);
    }
    Ok(1.0 / s.lambda)
}

/// `t ∫_{1/t}^1 v^{−λ} dv = (t − t^λ)/(1 − λ)`, or `t ln t` at `λ = 1`.
fn scalar_integral(lambda: f64, t: f64) -> f64 {
    let m = 1.0 - lambda;
    let lt = t.ln();
    if m == 0.0 {
        return t * lt;
    }
    // t (1 − e^{−m ln t}) / m, stable for small m
    -t * (-m * lt).exp_m1() / m
}

/// `−t ∫_{1/t}^1 v^{−λ} ln v dv`.
fn log_integral(lambda: f64, t: f64) -> f64 {
    let m = 1.0 - lambda;
    let lt = t.ln();
    if m == 0.0 {
        return 0.5 * t * lt * lt;
    }
    let tl = t.powf(lambda);
    t / (m * m) - tl * lt / m - tl / (m * m)
}

pub fn b_of_t(b: &ExponentMatrix, d: [f64; 2], t: f64) -> Result<[f64; 2], OperatorError> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(OperatorError::NonPositiveT(t));
    }
    let m = b.matrix();
    Ok(match b.shape() {
        Shape::Diagonal | Shape::Scalar => [
            scalar_integral(m[0][0], t) * d[0],
            scalar_integral(m[1][1], t) * d[1],
        ],
        Shape::LowerTriangular => {
            let i = scalar_integral(m[0][0], t);
            [i * d[0], i * d[1] + m[1][0] * log_integral(m[0][0], t) * d[0]]
        }
        Shape::Symmetric => {
            let (l, beta) = (m[0][0], m[0][1]);
            let p = 0.5 * (d[0] + d[1]);
            let q = 0.5 * (d[0] - d[1]);
            let ip = scalar_integral(l + beta, t) * p;
            let iq = scalar_integral(l - beta, t) * q;
            [ip + iq, ip - iq]
        }
    })
}

/// `exp(A)` of a real 2×2 matrix via `e^s (cosh q I + sinh q / q (A − sI))`.
pub fn expm2(a: Mat2) -> Mat2 {
    let s = 0.5 * (a[0][0] + a[1][1]);
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let q = Complex64::new(s * s - det, 0.0).sqrt();
    let c = q.cosh().re;
    let sh = if q.norm() < 1e-8 {
        1.0 + (q * q).re / 6.0
    } else {
        (q.sinh() / q).re
    };
    let es = s.exp();
    [
        [es * (c + sh * (a[0][0] - s)), es * sh * a[0][1]],
        [es * sh * a[1][0], es * (c + sh * (a[1][1] - s))],
    ]
}

/// `b(t)` by adaptive quadrature of `t v^{−B} d`.
pub fn b_of_t_quadrature(
    b: &ExponentMatrix,
    d: [f64; 2],
    t: f64,
    cfg: &QuadConfig,
) -> Result<[f64; 2], OperatorError> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(OperatorError::NonPositiveT(t));
    }
    if t == 1.0 {
        return Ok([0.0, 0.0]);
    }
    let m = b.matrix();
    let (lo, hi, sign) = if t > 1.0 { (1.0 / t, 1.0, 1.0) } else { (1.0, 1.0 / t, -1.0) };
    let mut out = [0.0; 2];
    for (k, slot) in out.iter_mut().enumerate() {
        let f = |v: f64| {
            let lv = -v.ln();
            let e = expm2([[m[0][0] * lv, m[0][1] * lv], [m[1][0] * lv, m[1][1] * lv]]);
            e[k][0] * d[0] + e[k][1] * d[1]
        };
        let breaks: Vec<f64> = (0..=32).map(|i| lo * (hi / lo).powf(i as f64 / 32.0)).collect();
        let (v, _) = quad::adaptive(f, &breaks, cfg)
            .map_err(|e| OperatorError::QuadratureFailure(e.to_string()))?;
        *slot = sign * t * v;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorStableLaw2D {
    #[serde(rename = "B")]
    pub exponent: ExponentMatrix,
    pub d: [f64; 2],
    pub strict: bool,
}

impl OperatorStableLaw2D {
    pub fn new(exponent: ExponentMatrix, d: [f64; 2]) -> Self {
        Self {
            exponent,
            d,
            strict: d == [0.0, 0.0],
        }
    }

    pub fn b_of_t(&self, t: f64) -> Result<[f64; 2], OperatorError> {
        b_of_t(&self.exponent, self.d, t)
    }
}

/// Strictly stable law and the shift `c = (I − B)^{−1} d` removed from it.
pub fn strictify_2d(law: &OperatorStableLaw2D) -> Result<(OperatorStableLaw2D, [f64; 2]), OperatorError> {
    if law.exponent.eigenvalues().contains(&1.0) {
        return Err(OperatorError::OneInSpectrum);
    }
    let m = law.exponent.matrix();
    let a = [[1.0 - m[0][0], -m[0][1]], [-m[1][0], 1.0 - m[1][1]]];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let d = law.d;
    let c = [
        (a[1][1] * d[0] - a[0][1] * d[1]) / det,
        (-a[1][0] * d[0] + a[0][0] * d[1]) / det,
    ];
    Ok((OperatorStableLaw2D::new(law.exponent, [0.0, 0.0]), c))
}

/// `(y₁^{α₁} + y₂^{α₂}) ν̃(y₁^{α₁}/y₂^{α₂})` with principal powers on the
/// closed upper half-plane; a diagonal entry `α₁ = 1` adds `−i d₁ y₁ ln|y₁|`.
pub fn log_cf_2d<F>(law: &OperatorStableLaw2D, nu: F, y: [Complex64; 2]) -> Result<Complex64, OperatorError>
where
    F: Fn(Complex64) -> Complex64,
{
    let m = law.exponent.matrix();
    if !matches!(law.exponent.shape(), Shape::Diagonal | Shape::Scalar) {
        return Err(OperatorError::UnsupportedShape(m));
    }
    if y.iter().any(|z| z.im < 0.0 || !z.re.is_finite() || !z.im.is_finite()) {
        return Err(OperatorError::DomainError(
            "arguments must lie in the closed upper half-plane".into(),
        ));
    }
    if y[1] == Complex64::new(0.0, 0.0) {
        return Err(OperatorError::DomainError("y₂ = 0 makes the ratio undefined".into()));
    }
    let (a1, a2) = (1.0 / m[0][0], 1.0 / m[1][1]);
    let p1 = y[0].powf(a1);
    let p2 = y[1].powf(a2);
    let mut v = (p1 + p2) * nu(p1 / p2);
    if a1 == 1.0 && y[0].norm() > 0.0 {
        v -= Complex64::i() * law.d[0] * y[0] * y[0].norm().ln();
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn b_of_t_examples() {
        let b = ExponentMatrix::diagonal(2.0, 1.0).unwrap();
        assert_eq!(b_of_t(&b, [1.0, 1.0], 1.0).unwrap(), [0.0, 0.0]);
        let e = std::f64::consts::E;
        let v = b_of_t(&b, [1.0, 1.0], e).unwrap();
        assert!((v[1] - e).abs() < 1e-14);
        let v = b_of_t(&b, [1.0, 0.0], 4.0).unwrap();
        assert!((v[0] - 4.0).abs() < 1e-14);
        assert!(matches!(b_of_t(&b, [1.0, 1.0], 0.0), Err(OperatorError::NonPositiveT(_))));
    }

    #[test]
    fn closed_forms_match_quadrature() {
        let cfg = QuadConfig {
            rel_tol: 1e-13,
            abs_tol: 1e-15,
            max_subdivisions: 20_000,
        };
        let shapes = [
            ExponentMatrix::diagonal(2.0, 4.0 / 3.0).unwrap(),
            ExponentMatrix::diagonal(1.0, 1.5).unwrap(),
            ExponentMatrix::lower_triangular(1.5, 0.3).unwrap(),
            ExponentMatrix::lower_triangular(1.0, -0.4).unwrap(),
            ExponentMatrix::symmetric(1.2, 0.2).unwrap(),
        ];
        for b in shapes {
            for &t in &[0.3, 2.0, 7.5] {
                let a = b_of_t(&b, [0.7, -1.1], t).unwrap();
                let q = b_of_t_quadrature(&b, [0.7, -1.1], t, &cfg).unwrap();
                for k in 0..2 {
                    assert!((a[k] - q[k]).abs() < 1e-10 * (1.0 + a[k].abs()), "{b:?} t={t}: {a:?} {q:?}");
                }
            }
        }
    }

    #[test]
    fn semigroup_identity() {
        // b(st) = t^B b(s) + s b(t)
        let b = ExponentMatrix::diagonal(1.0, 1.7).unwrap();
        let d = [0.4, 2.0];
        for &(s, t) in &[(2.0, 3.0), (0.5, 4.0), (1.7, 0.2)] {
            let lhs = b_of_t(&b, d, s * t).unwrap();
            let bs = b_of_t(&b, d, s).unwrap();
            let bt = b_of_t(&b, d, t).unwrap();
            let tb = b.t_pow(t);
            for k in 0..2 {
                let rhs = tb[k][0] * bs[0] + tb[k][1] * bs[1] + s * bt[k];
                assert!((lhs[k] - rhs).abs() < 1e-12 * (1.0 + lhs[k].abs()));
            }
        }
    }

    #[test]
    fn spectrum_and_cutoff() {
        let s = spectrum_check(&ExponentMatrix::diagonal(2.0, 2.0).unwrap());
        assert!(s.valid && s.lambda == 0.5);
        let s = spectrum_check(&ExponentMatrix::from_matrix([[2.0, 0.0], [0.0, 1.0]]).unwrap());
        assert!(s.valid && s.lambda == 2.0);
        let s = spectrum_check(&ExponentMatrix::from_matrix([[0.4, 0.0], [0.0, 1.0]]).unwrap());
        assert!(!s.valid);
        assert_eq!(moment_cutoff(&ExponentMatrix::diagonal(2.0, 4.0 / 3.0).unwrap()).unwrap(), 4.0 / 3.0);
        assert_eq!(moment_cutoff(&ExponentMatrix::diagonal(1.0, 1.0).unwrap()).unwrap(), 1.0);
        assert_eq!(
            moment_cutoff(&ExponentMatrix::scalar(2.0).unwrap()),
            Err(OperatorError::NormalLaw)
        );
        assert!(matches!(
            ExponentMatrix::from_matrix([[1.0, 0.2], [0.3, 1.0]]),
            Err(OperatorError::UnsupportedShape(_))
        ));
    }

    #[test]
    fn strictify_examples() {
        let b = ExponentMatrix::diagonal(2.0, 4.0 / 3.0).unwrap();
        let law = OperatorStableLaw2D::new(b, [1.0, 1.0]);
        let (s, c) = strictify_2d(&law).unwrap();
        assert!(s.strict);
        assert!((c[0] - 2.0).abs() < 1e-14 && (c[1] - 4.0).abs() < 1e-14);
        let zero = OperatorStableLaw2D::new(b, [0.0, 0.0]);
        assert_eq!(strictify_2d(&zero).unwrap().1, [0.0, 0.0]);
        let one = OperatorStableLaw2D::new(ExponentMatrix::diagonal(1.0, 1.5).unwrap(), [1.0, 0.0]);
        assert_eq!(strictify_2d(&one), Err(OperatorError::OneInSpectrum));
        // the shift reproduces b(t) = t c − t^B c for a non-diagonal shape
        let tri = ExponentMatrix::lower_triangular(1.5, 0.3).unwrap();
        let law = OperatorStableLaw2D::new(tri, [0.5, -0.2]);
        let (_, c) = strictify_2d(&law).unwrap();
        let t = 3.0;
        let tb = tri.t_pow(t);
        let bt = law.b_of_t(t).unwrap();
        for k in 0..2 {
            let want = t * c[k] - (tb[k][0] * c[0] + tb[k][1] * c[1]);
            assert!((bt[k] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn scale_invariance_of_log_cf() {
        let law = OperatorStableLaw2D::new(ExponentMatrix::diagonal(2.0, 4.0 / 3.0).unwrap(), [0.0, 0.0]);
        let nu = |u: Complex64| 1.0 / (1.0 + u);
        let y = [Complex64::new(0.7, 0.2), Complex64::new(-1.3, 0.4)];
        let base = log_cf_2d(&law, nu, y).unwrap();
        for q in [0.5f64, 2.0, 10.0] {
            let yq = [y[0] * q.powf(0.5), y[1] * q.powf(0.75)];
            let v = log_cf_2d(&law, nu, yq).unwrap();
            assert!((v - q * base).norm() < 1e-10 * (1.0 + v.norm()));
        }
        assert!(matches!(
            log_cf_2d(&law, nu, [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]),
            Err(OperatorError::DomainError(_))
        ));
    }

    #[test]
    fn json_shape() {
        let law = OperatorStableLaw2D::new(ExponentMatrix::diagonal(2.0, 1.0).unwrap(), [1.0, 0.0]);
        let s = serde_json::to_string(&law).unwrap();
        assert_eq!(s, r#"{"B":[[0.5,0.0],[0.0,1.0]],"d":[1.0,0.0],"strict":false}"#);
        let back: OperatorStableLaw2D = serde_json::from_str(&s).unwrap();
        assert_eq!(back, law);
    }

    #[test]
    fn expm_agrees_with_closed_powers() {
        for b in [
            ExponentMatrix::lower_triangular(1.5, 0.3).unwrap(),
            ExponentMatrix::symmetric(1.2, 0.2).unwrap(),
        ] {
            let m = b.matrix();
            let t: f64 = 2.7;
            let l = t.ln();
            let e = expm2([[m[0][0] * l, m[0][1] * l], [m[1][0] * l, m[1][1] * l]]);
            let p = b.t_pow(t);
            for i in 0..2 {
                for j in 0..2 {
                    assert!((e[i][j] - p[i][j]).abs() < 1e-13);
                }
            }
        }
    }
}

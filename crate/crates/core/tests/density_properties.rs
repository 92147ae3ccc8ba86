use num_complex::Complex64;

use stabmech::density::{
    bergstrom_mellin_tail, cdf, density, mellin_value, quantile, InversionConfig, MellinSpec,
};
use stabmech::quad::{self, QuadConfig};
use stabmech::sampling::sample;
use stabmech::stable::StableLaw1D;

fn laws() -> Vec<StableLaw1D> {
    [
        (0.5, 1.0, 1.0, 0.0),
        (0.8, 0.3, 1.0, 0.2),
        (1.0, 0.5, 1.0, 0.0),
        (1.0, 0.0, 2.0, -1.0),
        (1.5, -0.7, 1.0, 0.0),
        (1.9, 0.0, 0.5, 0.0),
    ]
    .iter()
    .map(|&(a, b, s, loc)| StableLaw1D::from_beta(a, b, s, loc).unwrap())
    .collect()
}

fn grid(law: &StableLaw1D, cfg: &InversionConfig) -> Vec<f64> {
    let lo = quantile(law, 1e-3, cfg).unwrap();
    let hi = quantile(law, 1.0 - 1e-3, cfg).unwrap();
    (0..200).map(|i| lo + (hi - lo) * i as f64 / 199.0).collect()
}

#[test]
fn density_is_non_negative_and_cdf_is_monotone() {
    let cfg = InversionConfig::default();
    for law in laws() {
        let xs = grid(&law, &cfg);
        let mut last = 0.0;
        for &x in &xs {
            let p = density(&law, x, &cfg).unwrap();
            assert!(p >= 0.0 && p.is_finite(), "{law:?} at {x}: {p}");
            let f = cdf(&law, x, &cfg).unwrap();
            assert!(f >= last - 1e-9, "{law:?}: cdf decreases at {x}");
            last = f;
        }
    }
}

#[test]
fn density_integrates_to_one_with_tails() {
    let cfg = InversionConfig::default();
    let qcfg = QuadConfig {
        rel_tol: 1e-9,
        abs_tol: 1e-12,
        max_subdivisions: 20000,
    };
    for law in laws() {
        let xs = grid(&law, &cfg);
        let (lo, hi) = (xs[0], xs[xs.len() - 1]);
        let breaks: Vec<f64> = (0..=40).map(|i| lo + (hi - lo) * i as f64 / 40.0).collect();
        let (mass, _) = quad::adaptive(|x: f64| density(&law, x, &cfg).unwrap(), &breaks, &qcfg).unwrap();
        let total = cdf(&law, lo, &cfg).unwrap() + mass + (1.0 - cdf(&law, hi, &cfg).unwrap());
        assert!((total - 1.0).abs() < 1e-6, "{law:?}: {total}");
    }
}

#[test]
fn reflection_swaps_tails() {
    let cfg = InversionConfig::default();
    for &(alpha, c1, c2, a) in &[(0.7, 1.0, 0.2, 0.3), (1.0, 0.3, 0.9, 0.0), (1.6, 0.5, 0.0, -0.4)] {
        let law = StableLaw1D::new(alpha, c1, c2, a).unwrap();
        let mirror = StableLaw1D::new(alpha, c2, c1, -a).unwrap();
        for x in [-3.0, -0.5, 0.1, 1.0, 4.0] {
            let p = density(&law, x, &cfg).unwrap();
            let q = density(&mirror, -x, &cfg).unwrap();
            assert!((p - q).abs() < 1e-10 * (1.0 + p), "{alpha} at {x}: {p} vs {q}");
        }
    }
    let sym = StableLaw1D::from_beta(1.3, 0.0, 1.0, 0.0).unwrap();
    for x in [0.2, 1.0, 7.0] {
        let p = density(&sym, x, &cfg).unwrap();
        let q = density(&sym, -x, &cfg).unwrap();
        assert!((p - q).abs() < 1e-12, "{x}: {p} vs {q}");
    }
}

#[test]
fn one_sided_half_law_mellin() {
    // α = 1/2, ρ = 1: all mass on x > 0 and E X^{s−1} < ∞ only for s < 3/2
    let cfg = InversionConfig::default();
    let qcfg = QuadConfig {
        rel_tol: 1e-10,
        abs_tol: 1e-13,
        max_subdivisions: 20000,
    };
    let spec = MellinSpec::new(0.5, 1.0).unwrap();
    let law = spec.unit_law().unwrap();
    let big_x = 200.0;
    let s = 1.2;
    let breaks: Vec<f64> = std::iter::once(0.0)
        .chain((0..=30).map(|i| 1e-3 * (big_x / 1e-3f64).powf(i as f64 / 30.0)))
        .collect();
    let (head, _) = quad::adaptive(
        |x: f64| {
            if x == 0.0 {
                0.0
            } else {
                x.powf(s - 1.0) * density(&law, x, &cfg).unwrap()
            }
        },
        &breaks,
        &qcfg,
    )
    .unwrap();
    let tail = bergstrom_mellin_tail(&spec, big_x, s).unwrap();
    let want = mellin_value(&spec, Complex64::new(s, 0.0)).unwrap();
    assert!((head + tail - want.re).abs() < 1e-7, "{} vs {}", head + tail, want.re);
    assert!(want.im.abs() < 1e-14);
    let pole = mellin_value(&spec, Complex64::new(1.5, 0.0)).unwrap_err();
    assert_eq!(pole.kind(), "PoleError");
}

#[test]
fn samples_follow_the_distribution_function() {
    let cfg = InversionConfig::default();
    for (i, law) in laws().into_iter().enumerate() {
        let draws = sample(&law, 20_000, 100 + i as u64).unwrap();
        let worst = grid(&law, &cfg)
            .iter()
            .map(|&x| (draws.cdf(x) - cdf(&law, x, &cfg).unwrap()).abs())
            .fold(0.0, f64::max);
        assert!(worst < 0.02, "{law:?}: {worst}");
    }
}

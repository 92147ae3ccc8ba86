use num_rational::Rational64;
use proptest::prelude::*;

use stabmech::scaling::{
    critical_indexes, log_log_slope, order_parameter, susceptibility, Dim, IndexValue,
    IsingEvaluator, PhiEvaluator, ScalingForm, ScalingFunction, ISING_ALPHA2,
};

fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn exact(v: IndexValue) -> Rational64 {
    match v {
        IndexValue::Exact(r) => r,
        other => panic!("not exact: {other:?}"),
    }
}

fn ordered_phase() -> ScalingFunction {
    ScalingFunction::new(vec![-1.0], vec![-1.0], vec![])
}

#[test]
fn beta_and_delta_from_slopes() {
    for &(a1, a2, idx) in &[
        (2.0, 4.0 / 3.0, (IndexValue::int(2), IndexValue::ratio(4, 3))),
        (2.0, 6.0 / 5.0, (IndexValue::int(2), IndexValue::ratio(6, 5))),
        (2.0, 1.21, (IndexValue::int(2), IndexValue::Approx(1.21))),
    ] {
        let set = critical_indexes(idx.0, idx.1, Dim::Finite(3)).unwrap();
        let phi = PhiEvaluator::new(a1, a2, Dim::Finite(3), ordered_phase()).unwrap();

        // η ~ |t|^β for t < 0 at vanishing field
        let ts = logspace(1e-6, 1e-2, 12);
        let etas: Vec<f64> = ts
            .iter()
            .map(|&t| {
                let h = 1e-6 * t.powf(a1 / a2);
                order_parameter(&phi, -t, h).unwrap()
            })
            .collect();
        let beta = log_log_slope(&ts, &etas);
        assert!((beta - set.beta.to_f64()).abs() < 0.05, "({a1},{a2}): beta {beta}");

        // η ~ h^{1/δ} on the critical isotherm
        let hs = logspace(1e-8, 1e-2, 12);
        let etas: Vec<f64> = hs.iter().map(|&h| order_parameter(&phi, 0.0, h).unwrap()).collect();
        let inv_delta = log_log_slope(&hs, &etas);
        assert!((1.0 / inv_delta - set.delta.to_f64()).abs() < 0.05 * set.delta.to_f64(), "({a1},{a2}): delta {}", 1.0 / inv_delta);

        // χ ~ t^{−γ} for t > 0
        let chis: Vec<f64> = ts
            .iter()
            .map(|&t| susceptibility(&phi, t, 1e-6 * t.powf(a1 / a2)).unwrap())
            .collect();
        let gamma = -log_log_slope(&ts, &chis);
        assert!((gamma - set.gamma.to_f64()).abs() < 0.05, "({a1},{a2}): gamma {gamma}");
    }
}

#[test]
fn ising_critical_isotherm_gives_delta_fifteen() {
    let ising = IsingEvaluator { constants: Default::default() };
    let hs = logspace(1e-10, 1e-3, 12);
    let etas: Vec<f64> = hs.iter().map(|&h| order_parameter(&ising, 0.0, h).unwrap()).collect();
    let delta = 1.0 / log_log_slope(&hs, &etas);
    assert!((delta - 15.0).abs() < 0.05, "{delta}");
    assert!((ISING_ALPHA2 - 1.0 - 1.0 / 15.0).abs() < 1e-15);
}

#[test]
fn phi_is_continuous_across_the_regime_boundary() {
    let phi = PhiEvaluator::new(2.0, 6.0 / 5.0, Dim::Finite(3), ScalingFunction::default()).unwrap();
    for t in [-0.3, -1e-3, 2e-4, 0.05] {
        let hb = f64::abs(t).powf(2.0 / 1.2);
        let inside = phi.phi(t, hb * (1.0 - 1e-9)).unwrap();
        let outside = phi.phi(t, hb * (1.0 + 1e-9)).unwrap();
        let on = phi.phi(t, hb).unwrap();
        assert!((inside - outside).abs() < 1e-8 * on.abs(), "{t}: {inside} {outside}");
        assert!((on - inside).abs() < 1e-8 * on.abs());
    }
}

fn small_rational() -> impl Strategy<Value = Rational64> {
    (1i64..40, 1i64..40)
        .prop_map(|(p, q)| Rational64::new(p, q))
        .prop_filter("in (0, 2]", |r| *r > Rational64::from_integer(0) && *r <= Rational64::from_integer(2))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rational_exponents_satisfy_scaling_laws_exactly(a1 in small_rational(), a2 in small_rational(), d in 1u32..6) {
        prop_assume!(a2 != Rational64::from_integer(1));
        let set = critical_indexes(IndexValue::Exact(a1), IndexValue::Exact(a2), Dim::Finite(d)).unwrap();
        prop_assert!(set.is_exact());
        prop_assert_eq!(set.scaling_relation_residual(), IndexValue::int(0));
        let one = Rational64::from_integer(1);
        let two = Rational64::from_integer(2);
        let (beta, gamma, delta) = (exact(set.beta), exact(set.gamma), exact(set.delta));
        // γ = β(δ − 1) and β = α₁(α₂ − 1)/α₂
        prop_assert_eq!(gamma, beta * (delta - one));
        prop_assert_eq!(beta, a1 * (a2 - one) / a2);
        prop_assert_eq!(exact(set.alpha), two - a1);
        let dn = Rational64::from_integer(d as i64);
        prop_assert_eq!(exact(set.zeta), exact(set.sigma) - dn + two);
    }

    #[test]
    fn phi_is_homogeneous(
        a1 in 0.5..2.0f64,
        a2 in 1.05..2.0f64,
        t in -1.0..1.0f64,
        h in -1.0..1.0f64,
        q in 0.01..100.0f64,
    ) {
        prop_assume!(t.abs() > 1e-3 || h.abs() > 1e-3);
        let phi = PhiEvaluator::new(a1, a2, Dim::Infinite, ScalingFunction::new(vec![0.3], vec![-0.5], vec![0.2])).unwrap();
        match phi.q_residual(q, t, h) {
            Ok(r) => prop_assert!(r < 1e-12, "{}", r),
            Err(e) => prop_assert_eq!(e.kind(), "RegimeOverflow"),
        }
    }
}

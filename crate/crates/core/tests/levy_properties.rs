use num_complex::Complex64;
use proptest::prelude::*;

use stabmech::levy::{gaussian_triple, poisson_triple, LevyMeasure, LevyTriple};

fn atomic_triple() -> impl Strategy<Value = LevyTriple> {
    (
        -2.0..2.0f64,
        0.0..2.0f64,
        prop::collection::vec((-3.0..3.0f64, 0.05..2.0f64), 1..5),
    )
        .prop_filter("atoms away from the origin", |(_, _, atoms)| atoms.iter().all(|a| a.0.abs() > 0.01))
        .prop_map(|(a, r, atoms)| {
            let atoms: Vec<(Vec<f64>, f64)> = atoms.into_iter().map(|(x, m)| (vec![x], m)).collect();
            let p = poisson_triple(&atoms).unwrap();
            let g = gaussian_triple(vec![a], vec![vec![r]]).unwrap();
            p.convolve(&g).unwrap()
        })
}

fn stable_triple() -> impl Strategy<Value = LevyTriple> {
    (-1.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64, 0.2..1.95f64)
        .prop_filter("some tail mass", |(_, c1, c2, _)| c1 + c2 > 0.05)
        .prop_map(|(a, c1, c2, alpha)| {
            LevyTriple::new_1d(a, 0.0, LevyMeasure::StablePowerTail { c1, c2, alpha }).unwrap()
        })
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn value_at_origin_is_zero(t in prop_oneof![atomic_triple(), stable_triple()]) {
        prop_assert_eq!(t.eval_log_cf(&[0.0]).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn hermitian_symmetry(t in prop_oneof![atomic_triple(), stable_triple()], y in 0.01..20.0f64) {
        let p = t.eval_log_cf(&[y]).unwrap();
        let m = t.eval_log_cf(&[-y]).unwrap();
        prop_assert!(close(m, p.conj(), 1e-10), "{} vs {}", m, p.conj());
    }

    #[test]
    fn convolution_commutes_and_associates(
        a in atomic_triple(), b in atomic_triple(), c in atomic_triple(), y in -10.0..10.0f64
    ) {
        let ab = a.convolve(&b).unwrap().eval_log_cf(&[y]).unwrap();
        let ba = b.convolve(&a).unwrap().eval_log_cf(&[y]).unwrap();
        prop_assert!(close(ab, ba, 1e-10));
        let left = a.convolve(&b).unwrap().convolve(&c).unwrap().eval_log_cf(&[y]).unwrap();
        let right = a.convolve(&b.convolve(&c).unwrap()).unwrap().eval_log_cf(&[y]).unwrap();
        prop_assert!(close(left, right, 1e-10));
        let sum = ab + c.eval_log_cf(&[y]).unwrap();
        prop_assert!(close(left, sum, 1e-10));
    }

    #[test]
    fn stable_convolution_adds_tails(s in stable_triple(), y in -10.0..10.0f64) {
        let twice = s.convolve(&s).unwrap().eval_log_cf(&[y]).unwrap();
        let one = s.eval_log_cf(&[y]).unwrap();
        prop_assert!(close(twice, 2.0 * one, 1e-8));
    }

    #[test]
    fn scale_power_is_a_semigroup(
        t in prop_oneof![atomic_triple(), stable_triple()],
        i in 1u32..16,
        j in 1u32..16,
    ) {
        let s = i as f64 / 8.0;
        let u = j as f64 / 4.0;
        let two_step = t.scale_power(s).unwrap().scale_power(u).unwrap();
        let one_step = t.scale_power(s * u).unwrap();
        // masses are rescaled in a different order, so allow a few ulps
        let tol = 1e-14;
        prop_assert!((two_step.location()[0] - one_step.location()[0]).abs() <= tol * (1.0 + one_step.location()[0].abs()));
        prop_assert!((two_step.covariance()[0][0] - one_step.covariance()[0][0]).abs() <= tol * (1.0 + one_step.covariance()[0][0]));
        for y in [-3.0, 0.4, 2.5] {
            let a = two_step.eval_log_cf(&[y]).unwrap();
            let b = one_step.eval_log_cf(&[y]).unwrap();
            prop_assert!(close(a, b, 1e-12), "{} vs {}", a, b);
        }
    }

    #[test]
    fn poisson_matches_mixture_series(
        atoms in prop::collection::vec((-2.0..2.0f64, 0.05..1.0f64), 1..4),
        y in -6.0..6.0f64,
    ) {
        prop_assume!(atoms.iter().all(|a| a.0.abs() > 0.01));
        let list: Vec<(Vec<f64>, f64)> = atoms.iter().map(|&(x, m)| (vec![x], m)).collect();
        let t = poisson_triple(&list).unwrap();
        let got = t.eval_log_cf(&[y]).unwrap().exp();
        // CF of a compound Poisson law: Σ_k e^{−λ} λ^k/k! φ_J(y)^k, λ = Σ m
        let lambda: f64 = atoms.iter().map(|a| a.1).sum();
        let jump: Complex64 = atoms
            .iter()
            .map(|&(x, m)| Complex64::new(0.0, y * x).exp() * (m / lambda))
            .sum();
        let mut term = Complex64::new((-lambda).exp(), 0.0);
        let mut series = term;
        for k in 1..30 {
            term = term * jump * (lambda / k as f64);
            series += term;
        }
        prop_assert!((got - series).norm() < 1e-8, "{} vs {}", got, series);
    }

    #[test]
    fn laplace_matches_closed_form_below_one(c in 0.05..2.0f64, alpha in 0.1..0.95f64, v in 0.01..5.0f64) {
        // ∫(e^{−vu} − 1 + vu/(1+u²)) cα u^{−α−1} du = −cΓ(1−α)v^α + cαv·π/(2cos(πα/2))
        let t = LevyTriple::new_1d(0.0, 0.0, LevyMeasure::StablePowerTail { c1: c, c2: 0.0, alpha }).unwrap();
        let got = t.log_partition_shift(&[v]).unwrap();
        let gamma = statrs::function::gamma::gamma(1.0 - alpha);
        let comp = std::f64::consts::FRAC_PI_2 / (std::f64::consts::FRAC_PI_2 * alpha).cos();
        let want = -c * gamma * v.powf(alpha) + c * alpha * v * comp;
        prop_assert!((got - want).abs() < 1e-8 * (1.0 + want.abs()), "{} vs {}", got, want);
    }

    #[test]
    fn log_partition_is_convex(
        c1 in 0.1..1.0f64,
        alpha in 0.3..1.9f64,
        a in -1.0..1.0f64,
        r in 0.0..1.0f64,
        v in 0.05..3.0f64,
    ) {
        // Z uses e^{−vx}: only a right tail keeps the moment finite for v > 0
        let stable = LevyTriple::new_1d(a, r, LevyMeasure::StablePowerTail { c1, c2: 0.0, alpha }).unwrap();
        let atoms = poisson_triple(&[(vec![1.5], 0.3), (vec![-0.7], 0.9)]).unwrap();
        for t in [stable, atoms] {
            let h = 1e-2 * v;
            let f = |x: f64| t.log_partition_shift(&[x]).unwrap();
            let second = f(v + h) - 2.0 * f(v) + f(v - h);
            prop_assert!(second >= -1e-9 * f(v).abs().max(1.0), "{}", second);
        }
    }
}

#[test]
fn atomic_and_stable_do_not_convolve() {
    let p = poisson_triple(&[(vec![1.0], 1.0)]).unwrap();
    let s = LevyTriple::new_1d(0.0, 0.0, LevyMeasure::StablePowerTail { c1: 1.0, c2: 1.0, alpha: 1.5 }).unwrap();
    assert_eq!(p.convolve(&s).unwrap_err().kind(), "IncompatibleMeasures");
}

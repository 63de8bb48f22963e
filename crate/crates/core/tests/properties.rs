use num_complex::Complex64;
use proptest::prelude::*;

use summability::engine::limit::{assess, Status};
use summability::engine::{
    apply_forward, apply_method, format_real, method_mr, parse_method, EngineConfig, MethodDescriptor, Sequence, TestFunction,
};
use summability::kernel::spec_file::KernelSpec;
use summability::spectrum::{classify_wiener, fourier_transform, mellin_transform, SpectrumOptions, Verdict};
use summability::{CatalogEntry, Flavor, Kernel};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn mixture() -> impl Strategy<Value = Kernel> {
    prop::collection::vec((0.1f64..3.0, 0.2f64..4.0), 1..4).prop_map(|parts| {
        let entries = parts
            .into_iter()
            .map(|(w, lambda)| (c(w, 0.0), CatalogEntry::Exponential { lambda }))
            .collect();
        Kernel::closed_form(Flavor::Additive, CatalogEntry::FiniteMixture(entries)).unwrap()
    })
}

fn wave(a: f64, b: f64, omega: f64) -> TestFunction {
    TestFunction::new("wave", Flavor::Additive, a.abs() + b.abs(), move |t| {
        c(a * (omega * t).sin() + b, 0.0)
    })
    .unwrap()
    .with_frequency(move |_| omega)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn normalization_gives_unit_mass(k in mixture()) {
        let n = k.normalize().unwrap();
        prop_assert!((n.mass() - 1.0).norm() < 1e-10);
        prop_assert!(n.is_normalized(1e-10));
    }

    #[test]
    fn convolution_multiplies_mass_and_transforms(a in mixture(), b in mixture(), xi in -20.0f64..20.0) {
        let ab = a.convolve(&b).unwrap();
        prop_assert!((ab.mass() - a.mass() * b.mass()).norm() < 1e-9 * (1.0 + ab.mass().norm()));
        let lhs = fourier_transform(&ab, xi).unwrap();
        let rhs = fourier_transform(&a, xi).unwrap() * fourier_transform(&b, xi).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-10 * (1.0 + rhs.norm()));
    }

    #[test]
    fn transform_at_zero_is_mass(a in mixture()) {
        prop_assert!((fourier_transform(&a, 0.0).unwrap() - a.mass()).norm() < 1e-12 * (1.0 + a.mass().norm()));
    }

    #[test]
    fn power_law_transform_formula(r in 0.1f64..8.0, x in -60.0f64..60.0) {
        let k = Kernel::power_law(r).unwrap();
        let exact = c(r, 0.0) / c(r, x);
        prop_assert!((mellin_transform(&k, x).unwrap() - exact).norm() < 1e-12);
    }

    #[test]
    fn operator_is_linear_and_bounded(
        k in mixture(),
        a in -2.0f64..2.0, b in -2.0f64..2.0, omega in 0.1f64..3.0, x in 0.1f64..40.0,
    ) {
        let k = k.normalize().unwrap();
        let f = wave(1.0, 0.0, omega);
        let g = wave(0.0, 1.0, omega);
        let h = wave(a, b, omega);
        let uf = apply_forward(&k, &f, x).unwrap();
        let ug = apply_forward(&k, &g, x).unwrap();
        let uh = apply_forward(&k, &h, x).unwrap();
        prop_assert!((uh - (uf * a + ug * b)).norm() < 1e-7);
        prop_assert!(uh.norm() <= k.l1_norm() * h.bound() + 1e-8);
    }

    #[test]
    fn exponential_on_constant(lambda in 0.05f64..10.0, alpha in -5.0f64..5.0, x in 0.01f64..50.0) {
        let k = Kernel::exponential(lambda).unwrap();
        let f = TestFunction::new("const", Flavor::Additive, alpha.abs(), move |_| c(alpha, 0.0)).unwrap();
        let exact = alpha * (1.0 - (-lambda * x).exp());
        let err = (apply_forward(&k, &f, x).unwrap().re - exact).abs();
        prop_assert!(err < summability::TOL_QUAD * (1.0 + alpha.abs()), "err={:e}", err);
    }

    #[test]
    fn flavor_transport_preserves_operator(r in 0.3f64..3.0, omega in 0.2f64..2.0, x in 1.5f64..200.0) {
        let psi = Kernel::power_law(r).unwrap();
        let phi = psi.to_additive().unwrap();
        let f = TestFunction::new("s", Flavor::Multiplicative, 1.0, move |t| c((omega * t).sin(), 0.0))
            .unwrap()
            .with_frequency(move |_| omega);
        let g = f.compose_exp().unwrap();
        let m = apply_forward(&psi, &f, x).unwrap();
        let s = apply_forward(&phi, &g, x.ln()).unwrap();
        prop_assert!((m - s).norm() < 1e-7);
    }

    #[test]
    fn iterate_matches_convolution_power(k in 2u32..4, x in 1.5f64..300.0) {
        let m = MethodDescriptor::new(Kernel::power_law(1.0).unwrap(), summability::engine::Variant::Forward, k, "H")
            .unwrap();
        let f = TestFunction::new("cos", Flavor::Multiplicative, 1.0, |t| c(t.cos(), 0.0))
            .unwrap()
            .with_frequency(|_| 1.0);
        let cfg = EngineConfig::default();
        let nested = apply_method(&m, &f, x, &cfg).unwrap();
        let collapsed = apply_method(&m.collapsed().unwrap(), &f, x, &cfg).unwrap();
        prop_assert!((nested - collapsed).norm() < 1e-7);
    }

    #[test]
    fn counterexample_zero_is_found(alpha in 0.3f64..20.0) {
        let k = Kernel::counterexample_additive(alpha).unwrap();
        prop_assert!((k.mass() - 1.0).norm() < 1e-12);
        let p = classify_wiener(&k, &SpectrumOptions { xi_max: alpha + 5.0, ..SpectrumOptions::default() }).unwrap();
        match p.verdict {
            Verdict::ZeroFound { xi, modulus } => {
                prop_assert!((xi - alpha).abs() < 1e-6, "xi={}", xi);
                prop_assert!(modulus < summability::ZERO_EPSILON);
            }
            other => prop_assert!(false, "{:?}", other),
        }
    }

    #[test]
    fn positive_mixtures_never_vanish(k in mixture()) {
        let k = k.normalize().unwrap();
        let opts = SpectrumOptions { xi_max: 10.0, ..SpectrumOptions::default() };
        let p = classify_wiener(&k, &opts).unwrap();
        prop_assert!(!matches!(p.verdict, Verdict::ZeroFound { .. }), "{:?}", p.verdict);
        prop_assert!(p.min_modulus > 0.0);
    }

    #[test]
    fn kernel_specs_round_trip(lambda in 0.01f64..100.0) {
        let text = format!(r#"{{"flavor": "additive", "body": {{"catalog": "exponential", "params": {{"lambda": {lambda}}}}}}}"#);
        let spec = KernelSpec::from_json(&text).unwrap();
        let again = KernelSpec::from_json(&serde_json::to_string(&spec).unwrap()).unwrap();
        prop_assert_eq!(&spec, &again);
        let k = spec.build().unwrap();
        prop_assert!((k.evaluate(0.0).unwrap().re - lambda).abs() < 1e-12 * lambda);
    }

    #[test]
    fn labels_round_trip(p in 1i64..12, q in 1i64..12) {
        let r = p as f64 / q as f64;
        let canonical = method_mr(r).unwrap();
        let m = parse_method(canonical.label()).unwrap();
        prop_assert_eq!(m.label(), canonical.label());
        prop_assert!(canonical.label() == "M" || canonical.label().ends_with(&format_real(r)));
        let psi = m.kernel().evaluate(2.0).unwrap().re;
        prop_assert!((psi - r * 2f64.powf(-r)).abs() < 1e-12);
    }

    #[test]
    fn cesaro_means_match_brute_force(period in prop::collection::vec(-3.0f64..3.0, 1..7), n in 1u64..500) {
        let seq = Sequence::Periodic(period.iter().map(|&v| c(v, 0.0)).collect());
        let brute: Complex64 = (1..=n).map(|i| seq.term(i)).sum::<Complex64>() / n as f64;
        prop_assert!((seq.cesaro_mean(n) - brute).norm() < 1e-12);
    }

    #[test]
    fn plateau_detection(a in -3.0f64..3.0, b in -3.0f64..3.0, amp in 0.1f64..2.0) {
        let ladder: Vec<f64> = (0..25).map(|j| 4.0 * 2f64.powi(j)).collect();
        let tol = 1e-4 * (1.0 + a.abs());
        let conv: Vec<Complex64> = ladder.iter().map(|x| c(a + b / x, 0.0)).collect();
        let decided = (1..=conv.len()).find_map(|k| assess(&conv[..k], 5, tol, 100.0)).unwrap();
        prop_assert_eq!(decided.status, Status::Converged);
        prop_assert!((decided.estimate.unwrap().re - a).abs() < tol);

        let rot: Vec<Complex64> = ladder.iter().map(|x| c(0.0, x.ln()).exp() * amp).collect();
        let decided = (1..=rot.len()).find_map(|k| assess(&rot[..k], 5, tol, 100.0)).unwrap();
        prop_assert_eq!(decided.status, Status::Oscillating);
        prop_assert!(decided.amplitude <= amp + 1e-12 && decided.amplitude > 0.5 * amp);
    }
}

use bmolab::domain::{BellmanPoint, DomainSpec};
use bmolab::envelope::{solve_envelope, EnvelopeConfig};
use bmolab::interval::{ap_characteristic_interval, bmo_norm_interval, StepFunction};
use bmolab::profile::BoundaryProfile;
use bmolab::semigroup::{extend, k_variance, KernelKind, SpaceTimePoint, TestFunction, Transform};
use bmolab::stochastic::{ks_two_sample, verify_representation, SimConfig};
use proptest::prelude::*;

fn step_function(positive: bool) -> impl Strategy<Value = StepFunction> {
    (1usize..7)
        .prop_flat_map(move |k| {
            let vals = if positive {
                prop::collection::vec(0.05f64..20.0, k + 1).boxed()
            } else {
                prop::collection::vec(-5.0f64..5.0, k + 1).boxed()
            };
            (prop::collection::btree_set(1u32..999, k), vals)
        })
        .prop_map(|(b, v)| {
            let breaks: Vec<f64> = b.iter().map(|&x| x as f64 / 1000.0).collect();
            let values = v[..breaks.len() + 1].to_vec();
            StepFunction::new(0.0, 1.0, breaks, values).unwrap()
        })
}

fn point(n: usize) -> impl Strategy<Value = SpaceTimePoint> {
    (prop::collection::vec(-3.0f64..3.0, n), -5.0f64..5.0).prop_map(|(y, l)| SpaceTimePoint::new(y, l.exp2()).unwrap())
}

fn radial(n: usize) -> impl Strategy<Value = TestFunction> {
    prop_oneof![
        Just(TestFunction::log_abs(n).unwrap()),
        Just(TestFunction::quadratic(n).unwrap()),
        (0.2f64..3.0, -2.0f64..2.0, -2.0f64..2.0).prop_map(move |(r, a, b)| TestFunction::radial_step(r, a, b, n).unwrap()),
        (-0.5f64..1.5).prop_map(move |a| TestFunction::power_weight(a, n).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bmo_norm_invariances(s in step_function(false), c in -3.0f64..3.0, b in -10.0f64..10.0) {
        let n = bmo_norm_interval(&s);
        let t = bmo_norm_interval(&s.map(|v| c * v + b).unwrap());
        prop_assert!((t - c.abs() * n).abs() <= 1e-9 * (1.0 + n * c.abs()));
    }

    #[test]
    fn averages_lie_in_the_strip_of_the_norm(s in step_function(false)) {
        let n = bmo_norm_interval(&s);
        let x = BellmanPoint::new(s.mean(), s.map(|v| v * v).unwrap().mean()).unwrap();
        let e = x.x2 - x.x1 * x.x1;
        prop_assert!(e >= -1e-12 && e <= n * n * (1.0 + 1e-12) + 1e-14);
        if n > 0.0 {
            prop_assert!(DomainSpec::bmo(n * (1.0 + 1e-9)).unwrap().contains(&x));
        }
    }

    #[test]
    fn characteristic_at_least_one_scale_free_and_decreasing_in_p(s in step_function(true), c in 0.01f64..100.0) {
        let a2 = ap_characteristic_interval(&s, 2.0).unwrap();
        let a3 = ap_characteristic_interval(&s, 3.0).unwrap();
        let ai = ap_characteristic_interval(&s, f64::INFINITY).unwrap();
        prop_assert!(ai >= 1.0 - 1e-12);
        prop_assert!(a3 <= a2 * (1.0 + 1e-9) && ai <= a3 * (1.0 + 1e-9));
        let scaled = ap_characteristic_interval(&s.map(|v| c * v).unwrap(), 2.0).unwrap();
        prop_assert!((scaled - a2).abs() <= 1e-9 * a2);
    }

    #[test]
    fn kernel_variance_is_nonnegative((g, z) in (1usize..4).prop_flat_map(|n| (radial(n), point(n)))) {
        for k in KernelKind::ALL {
            let v = k_variance(k, &g, &z).unwrap();
            prop_assert!(v.divergent || v.value >= 0.0);
        }
    }

    #[test]
    fn kernels_preserve_constants(c in -10.0f64..10.0, z in point(2)) {
        let g = TestFunction::constant(c, 2).unwrap();
        for k in KernelKind::ALL {
            let e = extend(k, &g, &Transform::identity(), &z).unwrap();
            prop_assert!((e.value - c).abs() <= 1e-12 * (1.0 + c.abs()));
        }
    }

    #[test]
    fn heat_extension_of_the_square(z in point(1)) {
        let g = TestFunction::quadratic(1).unwrap();
        let e = extend(KernelKind::Heat, &g, &Transform::identity(), &z).unwrap();
        let exact = z.y[0] * z.y[0] + 2.0 * z.t;
        prop_assert!((e.value - exact).abs() <= 1e-9 * (1.0 + exact));
    }

    #[test]
    fn two_sample_statistic_is_symmetric(a in prop::collection::vec(-5.0f64..5.0, 1..40), b in prop::collection::vec(-5.0f64..5.0, 1..40)) {
        prop_assert_eq!(ks_two_sample(&a, &b), ks_two_sample(&b, &a));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn simulation_is_reproducible(seed in any::<u64>()) {
        for (k, g) in [
            (KernelKind::Heat, TestFunction::quadratic(1).unwrap()),
            (KernelKind::Poisson, TestFunction::radial_step(1.0, 1.0, 0.0, 1).unwrap()),
        ] {
            let cfg = SimConfig::new(k, SpaceTimePoint::on_axis(1, 1.0).unwrap(), 500, seed);
            let a = verify_representation(&cfg, &g).unwrap();
            let b = verify_representation(&cfg, &g).unwrap();
            prop_assert_eq!(a.estimate.mean.to_bits(), b.estimate.mean.to_bits());
        }
    }

    #[test]
    fn envelopes_are_monotone_in_the_boundary_data(l1 in 0.2f64..2.0, gap in 0.1f64..1.5) {
        let d = DomainSpec::bmo(1.0).unwrap();
        let cfg = EnvelopeConfig::for_window((-1.0, 1.0), 4.0, 61, 16);
        let lo = solve_envelope(&d, &BoundaryProfile::indicator(l1 + gap).unwrap(), &cfg).unwrap().grid;
        let hi = solve_envelope(&d, &BoundaryProfile::indicator(l1).unwrap(), &cfg).unwrap().grid;
        // both solves stop once a sweep moves no node by more than tol
        for (a, b) in lo.values.iter().zip(&hi.values) {
            prop_assert!(*a <= b + 10.0 * cfg.tol);
        }
    }
}

use homtype::conditions::{
    check_wmd, check_wrd, doubling_constant_at, wrd_base_point_sweep, RadiusGrid, Verdict, Window, WrdOptions,
    DEFAULT_WMD_THRESHOLD,
};
use homtype::scenarios::random_finite_space;
use homtype::space::{geometric_space, Center, Space, Subset};
use homtype::LogScalar;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_space(seed: u64, n: usize) -> Space {
    Space::Finite(random_finite_space(&mut ChaCha8Rng::seed_from_u64(seed), n, 1.0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(48) })]

    #[test]
    fn doubling_gives_polynomial_growth(seed in 0u64..1000, n in 2usize..16, x in 0usize..16, r in -6.0f64..1.0, lambda in 1.0f64..16.0) {
        let space = random_space(seed, n);
        let Space::Finite(s) = &space else { unreachable!() };
        let x = x % n;
        let l = (0..n).map(|i| doubling_constant_at(&space, i).unwrap()).fold(1.0, f64::max);
        let d = l.log2();
        let r = LogScalar::from_f64(r.exp());
        let small = s.ball_measure(x, r).unwrap().to_f64();
        let big = s.ball_measure(x, r * LogScalar::from_f64(lambda)).unwrap().to_f64();
        prop_assert!(big <= l * lambda.powf(d) * small * (1.0 + 1e-12), "{big} > {l} * {lambda}^{d} * {small}");
    }

    #[test]
    fn shrinking_the_window_cannot_lower_the_infimum(k in 12u32..40, a in 0.0f64..1.0, b in 0.0f64..1.0, lambda in 1.5f64..8.0) {
        let space = Space::Finite(geometric_space(k).unwrap());
        let top = f64::from(k) - 1.0;
        let full = Window::new(LogScalar::from_log2(1.0), LogScalar::from_log2(top)).unwrap();
        let (a, b) = (a.min(b), a.max(b));
        prop_assume!(b - a > 0.2);
        let sub = Window::new(LogScalar::from_log2(1.0 + a * (top - 1.0)), LogScalar::from_log2(1.0 + b * (top - 1.0))).unwrap();
        let whole = check_wrd(&space, &WrdOptions::new(lambda, full)).unwrap();
        let part = check_wrd(&space, &WrdOptions::new(lambda, sub)).unwrap();
        prop_assert!(part.window_inf >= whole.window_inf);
    }

    #[test]
    fn wrd_verdict_follows_the_threshold(k in 10u32..30, lambda in 1.5f64..8.0, threshold in 1.0f64..3.0) {
        let space = Space::Finite(geometric_space(k).unwrap());
        let window = Window::new(LogScalar::from_f64(2.0), LogScalar::from_log2(f64::from(k) - 1.0)).unwrap();
        let mut opts = WrdOptions::new(lambda, window);
        opts.threshold = threshold;
        let rep = check_wrd(&space, &opts).unwrap();
        let inf = rep.ratios.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
        prop_assert_eq!(rep.window_inf, inf);
        if rep.verdict != Verdict::Inconclusive {
            prop_assert_eq!(rep.verdict == Verdict::Pass, inf >= threshold);
        }
    }

    #[test]
    fn measure_density_ratios_lie_in_unit_interval(seed in 0u64..1000, n in 3usize..16, picks in prop::collection::vec(0usize..16, 1..8)) {
        let space = random_space(seed, n);
        let Space::Finite(s) = &space else { unreachable!() };
        let subset = Subset::Points(picks.into_iter().map(|i| i % n).collect());
        let lo = s.distance(0, 1).min(s.distance(0, 2)) * LogScalar::from_f64(0.5);
        let window = Window::new(lo, s.diameter()).unwrap();
        let rep = check_wmd(&space, &subset, None, &window, DEFAULT_WMD_THRESHOLD, &RadiusGrid::Auto).unwrap();
        prop_assert!(rep.ratios.iter().all(|r| r.1 >= 0.0 && r.1 <= 1.0 + 1e-12));
    }
}

#[test]
fn geometric_space_is_robust_to_the_base_point() {
    let space = Space::Finite(geometric_space(30).unwrap());
    let window = Window::new(LogScalar::from_f64(2.0), LogScalar::from_log2(27.0)).unwrap();
    let mut opts = WrdOptions::new(4.0, window);
    opts.base_point = Some(Center::Point(0));
    let sweep = wrd_base_point_sweep(&space, &opts).unwrap();
    assert!(sweep.lambda_prime.is_some(), "failures: {:?}", sweep.failures);
}

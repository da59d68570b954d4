use homtype::ms::{
    classify_trend, exact_ms_step_1d, gagliardo_kernel, ms_scan, ms_value, MsInput, RegionSpec, Trend,
};
use homtype::norms::NormSpec;
use homtype::scenarios::{random_finite_space, random_step_function};
use homtype::space::{Center, IntervalDomain1D, QuadratureRule, StepFunction1D, Subset};
use homtype::LogScalar;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn step(seed: u64) -> StepFunction1D {
    random_step_function(&mut ChaCha8Rng::seed_from_u64(seed), 6)
}

fn log_grid(hi: f64, lo: f64, n: usize) -> Vec<f64> {
    let (a, b) = (hi.log10(), lo.log10());
    (0..n).map(|k| 10f64.powf(a + (b - a) * k as f64 / (n - 1) as f64)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(24) })]

    #[test]
    fn quadrature_agrees_with_the_exact_pair_sum(seed in 0u64..10_000, s in prop::sample::select(vec![0.5, 0.1, 0.01])) {
        let f = step(seed);
        let domain = IntervalDomain1D::whole_line();
        let exact = exact_ms_step_1d(&f, s, &domain).unwrap();
        let at = |rule| ms_value(MsInput::Step { domain: &domain, f: &f, rule }, 1.0, &NormSpec::lp(1.0), s, &RegionSpec::All).unwrap();
        let coarse = (at(QuadratureRule::default()) - exact).abs() / exact;
        let fine = (at(QuadratureRule::default().refined()) - exact).abs() / exact;
        prop_assert!(coarse < 0.01, "coarse error {coarse}");
        prop_assert!(fine <= coarse.max(1e-9), "refined error {fine} > {coarse}");
    }

    #[test]
    fn bounded_domain_quadrature_agrees_with_the_exact_pair_sum(seed in 0u64..10_000, s in prop::sample::select(vec![0.5, 0.1, 0.01])) {
        let f = step(seed);
        let domain = IntervalDomain1D::new(vec![(-4.0, -0.5), (0.25, 4.0)]).unwrap();
        let exact = exact_ms_step_1d(&f, s, &domain).unwrap();
        prop_assume!(exact > 0.0);
        let got = ms_value(MsInput::Step { domain: &domain, f: &f, rule: QuadratureRule::default() }, 1.0, &NormSpec::lp(1.0), s, &RegionSpec::All).unwrap();
        prop_assert!((got - exact).abs() / exact < 0.01, "{got} vs {exact}");
    }

    #[test]
    fn finite_kernel_splits_over_a_ball(seed in 0u64..1000, n in 2usize..16, q in 0.5f64..3.0, s in 0.01f64..0.99, r in 0.01f64..1.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = random_finite_space(&mut rng, n, 1.0).unwrap();
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let input = MsInput::Finite { space: &space, values: &values };
        let radius = LogScalar::from_f64(r);
        for x in 0..n {
            let at = |region: RegionSpec| gagliardo_kernel(input, q, s, Center::Point(x), &region).unwrap();
            let all = at(RegionSpec::All);
            let split = at(RegionSpec::InsideBall { radius }) + at(RegionSpec::OutsideBall { radius });
            prop_assert!((all - split).abs() <= 1e-12 * all.max(1e-300));
        }
    }

    #[test]
    fn step_kernel_splits_over_a_ball(seed in 0u64..10_000, x in -4.0f64..4.0, q in 0.5f64..3.0, s in 0.01f64..0.99, r in 0.01f64..5.0) {
        let f = step(seed);
        let domain = IntervalDomain1D::whole_line();
        let input = MsInput::Step { domain: &domain, f: &f, rule: QuadratureRule::default() };
        let radius = LogScalar::from_f64(r);
        let at = |region: RegionSpec| gagliardo_kernel(input, q, s, Center::Real(x), &region).unwrap();
        let all = at(RegionSpec::All);
        let split = at(RegionSpec::InsideBall { radius }) + at(RegionSpec::OutsideBall { radius });
        prop_assert!((all - split).abs() <= 1e-12 * all.max(1e-300), "{all} vs {split}");
    }

    #[test]
    fn full_subset_region_equals_the_whole_space(seed in 0u64..1000, n in 2usize..12, q in 0.5f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = random_finite_space(&mut rng, n, 1.0).unwrap();
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let input = MsInput::Finite { space: &space, values: &values };
        let full = RegionSpec::Subset(Subset::Points((0..n).collect()));
        let a = ms_value(input, q, &NormSpec::lp(2.0), 0.1, &RegionSpec::All).unwrap();
        let b = ms_value(input, q, &NormSpec::lp(2.0), 0.1, &full).unwrap();
        prop_assert!((a - b).abs() <= 1e-14 * a);
    }

    #[test]
    fn bounded_finite_spaces_vanish_monotonically(seed in 0u64..1000, n in 3usize..16, q in prop::sample::select(vec![1.0, 2.0])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = random_finite_space(&mut rng, n, 1.0).unwrap();
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let input = MsInput::Finite { space: &space, values: &values };
        let scan = ms_scan(input, q, &NormSpec::lp(2.0), &log_grid(1e-1, 1e-5, 9), &RegionSpec::All).unwrap();
        prop_assert!(scan.values.iter().all(|v| *v >= 0.0));
        prop_assert!(scan.values[6..].windows(2).all(|w| w[1] < w[0]));
        prop_assert_eq!(scan.trend, Trend::DecreasingToZero);
        prop_assert!(scan.ratio_bracket.0 <= scan.ratio_bracket.1);
    }

    #[test]
    fn decreasing_trend_requires_steady_drops(values in prop::collection::vec(1e-6f64..10.0, 4..12)) {
        let n = values.len();
        if classify_trend(&values) == Trend::DecreasingToZero {
            prop_assert!(values[n - 4..].windows(2).all(|w| w[1] <= 0.8 * w[0]));
            prop_assert!(values[n - 1] < values[0]);
        }
    }
}

fn bracket_extremes(fs: &[StepFunction1D], grid: &[f64]) -> (f64, f64) {
    let domain = IntervalDomain1D::whole_line();
    fs.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), f| {
        let input = MsInput::Step { domain: &domain, f, rule: QuadratureRule::default() };
        let scan = ms_scan(input, 1.0, &NormSpec::lp(2.0), grid, &RegionSpec::All).unwrap();
        (lo.min(scan.ratio_bracket.0), hi.max(scan.ratio_bracket.1))
    })
}

#[test]
fn two_sided_constants_are_stable_under_grid_refinement() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let fs: Vec<StepFunction1D> = (0..20).map(|_| random_step_function(&mut rng, 6)).collect();
    let (k9, big_k9) = bracket_extremes(&fs, &log_grid(1e-1, 1e-5, 9));
    let (k17, big_k17) = bracket_extremes(&fs, &log_grid(1e-1, 1e-5, 17));
    assert!(k9 > 0.0 && k17 > 0.0);
    assert!((k17 - k9).abs() / k9 <= 0.1, "lower {k9} vs {k17}");
    assert!((big_k17 - big_k9).abs() / big_k9 <= 0.1, "upper {big_k9} vs {big_k17}");
}

#[test]
fn refinement_converges_away_from_the_origin() {
    let domain = IntervalDomain1D::whole_line();
    for (a, s) in [(0.0, 0.5), (100.0, 0.5), (-1e4, 0.1), (100.0, 0.7), (0.0, 0.95)] {
        let f = StepFunction1D::new(vec![a, a + 0.5], vec![0.0, 1.0, 0.0]).unwrap();
        let exact = exact_ms_step_1d(&f, s, &domain).unwrap();
        let mut rule = QuadratureRule::default().refined();
        for _ in 0..3 {
            let got = ms_value(MsInput::Step { domain: &domain, f: &f, rule }, 1.0, &NormSpec::lp(1.0), s, &RegionSpec::All).unwrap();
            assert!((got - exact).abs() / exact < 1e-9, "a = {a}, s = {s}, {rule:?}: {got} vs {exact}");
            rule = rule.refined();
        }
    }
}

#[test]
fn jumps_make_the_functional_infinite_once_sp_reaches_one() {
    let domain = IntervalDomain1D::whole_line();
    let f = StepFunction1D::new(vec![0.0, 1.0], vec![0.0, 1.0, 0.0]).unwrap();
    let input = || MsInput::Step { domain: &domain, f: &f, rule: QuadratureRule::default() };
    assert!(ms_value(input(), 1.0, &NormSpec::lp(2.0), 0.49, &RegionSpec::All).unwrap().is_finite());
    assert_eq!(
        ms_value(input(), 1.0, &NormSpec::lp(2.0), 0.5, &RegionSpec::All),
        Err(homtype::Error::DivergentAtJump(1.0))
    );
    assert!(matches!(ms_value(input(), 1.0, &NormSpec::Sup, 1e-3, &RegionSpec::All), Err(homtype::Error::DivergentAtJump(_))));
    let away = RegionSpec::OutsideBall { radius: LogScalar::from_f64(0.25) };
    assert!(ms_value(input(), 1.0, &NormSpec::lp(2.0), 0.75, &away).unwrap().is_finite());
}

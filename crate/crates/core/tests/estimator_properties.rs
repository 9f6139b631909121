use proptest::prelude::*;
use qsp_pe::design::{design_signal, DesignRequest, PriorInterval};
use qsp_pe::estimator::{
    build_schedule, invert_signal, run_trials, DesignCache, EstimatorConfig, Method, Schedule,
};
use qsp_pe::exec::Execution;
use qsp_pe::trigpoly::Signal;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

#[test]
fn inversion_is_lipschitz_in_the_sample_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (d, theta) in [(8, 0.7), (16, 1.1), (32, 2.2)] {
        let prior = PriorInterval::with_shrinkage(theta, d, 1.0).unwrap();
        let design = design_signal(&DesignRequest::new(d, prior)).unwrap();
        let f = design.signal();
        let (lo, hi) = design.grid_bounds;
        let (r_prior, r_next, eta) = (prior.radius, prior.radius / 2.0, 8.0);
        let (a, b) = (f.value(lo), f.value(hi));
        let (smin, smax) = (a.min(b), a.max(b));
        let bisection =
            (hi - lo) / 2f64.powi(qsp_pe::estimator::bisection_steps(r_prior, r_next, eta) as i32);
        for _ in 0..1000 {
            let s1 = rng.random_range(smin..smax);
            let s2 = rng.random_range(smin..smax);
            let t1 = invert_signal(&f, (lo, hi), s1, r_prior, r_next, eta)
                .unwrap()
                .theta;
            let t2 = invert_signal(&f, (lo, hi), s2, r_prior, r_next, eta)
                .unwrap()
                .theta;
            let bound = (s1 - s2).abs() / design.sensitivity + 2.0 * bisection;
            assert!(
                (t1 - t2).abs() <= bound * (1.0 + 1e-9),
                "d={d}: {} > {bound}",
                (t1 - t2).abs()
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inversion_stays_in_prior(d in 2usize..24, theta in 0.3f64..1.3, s in -0.2f64..1.2) {
        let prior = PriorInterval::with_shrinkage(theta, d, 1.5).unwrap();
        let design = design_signal(&DesignRequest::new(d, prior)).unwrap();
        let (lo, hi) = design.grid_bounds;
        let inv = invert_signal(&design.signal(), (lo, hi), s, prior.radius, prior.radius / 2.0, 8.0).unwrap();
        prop_assert!(inv.theta >= lo && inv.theta <= hi);
    }

    #[test]
    fn query_count_has_closed_form(j in 3i32..14, delta in 0.01f64..0.5, zeta in 1.0f64..3.0) {
        let eps = 2f64.powi(-j);
        let s = build_schedule(eps, delta, 2.0, FRAC_1_SQRT_2, zeta).unwrap();
        let k = s.stages as f64;
        prop_assert_eq!(s.stages as i32, j - 2);
        let m = (zeta * zeta * 8.0 * 4.0 / 0.5 * (2.0 * k / delta).ln()).ceil();
        let geometric: f64 = (1..=s.stages).map(|i| 2f64.powi(i as i32)).sum();
        let t = s.total_queries() as f64;
        prop_assert!((t - m * geometric).abs() <= geometric, "{t} vs {}", m * geometric);
    }
}

#[test]
fn radii_shrink_geometrically() {
    let schedule = build_schedule(2f64.powi(-9), 0.1, 2.0, FRAC_1_SQRT_2, 1.0).unwrap();
    let cfg = EstimatorConfig::default();
    for method in [Method::QspPe, Method::Rpe] {
        for run in run_trials(method, 0.9, &schedule, &cfg, 3, 8, Execution::default()) {
            let (trace, _) = run.unwrap();
            for w in trace.stages.windows(2) {
                let ratio = w[0].radius / w[1].radius;
                assert!((ratio - 2.0).abs() <= 0.02, "{method:?}: {ratio}");
            }
        }
    }
}

#[test]
fn shared_cache_does_not_change_results() {
    let schedule = Schedule::fixed_shots(2.0, 5, 4000, 2.0, 0.1).unwrap();
    let plain = EstimatorConfig::default();
    let cache = Arc::new(DesignCache::new());
    let cached = EstimatorConfig {
        cache: Some(cache.clone()),
        ..EstimatorConfig::default()
    };
    let a = run_trials(
        Method::QspPe,
        1.2,
        &schedule,
        &plain,
        8,
        12,
        Execution::Sequential,
    );
    let b = run_trials(
        Method::QspPe,
        1.2,
        &schedule,
        &cached,
        8,
        12,
        Execution::Parallel,
    );
    for (x, y) in a.into_iter().zip(b) {
        assert_eq!(x.unwrap().0, y.unwrap().0);
    }
    assert!(!cache.is_empty());
}

#[test]
fn minimal_schedule_meets_coverage_bound() {
    let delta = 0.1;
    let trials = 200;
    let schedule = build_schedule(1e-3, delta, 2.0, FRAC_1_SQRT_2, 1.0).unwrap();
    let hits = run_trials(
        Method::QspPe,
        0.6,
        &schedule,
        &EstimatorConfig::default(),
        41,
        trials,
        Execution::default(),
    )
    .into_iter()
    .filter(|r| r.as_ref().unwrap().0.success)
    .count();
    let floor = 1.0 - delta - 3.0 * (delta * (1.0 - delta) / trials as f64).sqrt();
    assert!(hits as f64 / trials as f64 >= floor);
}

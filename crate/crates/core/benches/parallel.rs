use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qsp_pe::design::{design_signal, DesignRequest, PriorInterval};
use qsp_pe::estimator::{run_trials, EstimatorConfig, Method, Schedule};
use qsp_pe::exec::Execution;
use std::hint::black_box;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn design_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("design_sweep");
    group.sample_size(10);
    for d in [16usize, 32] {
        let prior = PriorInterval::with_shrinkage(0.9, d, 2.0).unwrap();
        for (name, exec) in MODES {
            let req = DesignRequest::new(d, prior).with_execution(exec);
            group.bench_with_input(BenchmarkId::new(name, d), &req, |b, req| {
                b.iter(|| design_signal(black_box(req)).unwrap())
            });
        }
    }
    group.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let mut group = c.benchmark_group("estimator_trials");
    group.sample_size(10);
    let schedule = Schedule::fixed_shots(2.0, 4, 2_000, 2.0, 0.1).unwrap();
    let cfg = EstimatorConfig::default();
    for method in [Method::QspPe, Method::Rpe] {
        for (name, exec) in MODES {
            group.bench_function(BenchmarkId::new(name, format!("{method:?}")), |b| {
                b.iter(|| run_trials(method, 0.8862, &schedule, &cfg, 1, 16, exec))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, design_sweep, monte_carlo);
criterion_main!(benches);

use adopt_core::calibration::{fit_mle, log_returns};
use adopt_core::simulation::simulate_history;
use adopt_core::{
    build_time_grid, closed_form_price, mc_price, simulate_paths, JumpDiffusionParams,
    JumpSizeDistribution, McConfig, MeanExponent, OptionSpec, RngSpec, DAILY_DT,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn params() -> JumpDiffusionParams {
    JumpDiffusionParams::risk_neutral(
        0.1,
        0.2,
        5.0,
        JumpSizeDistribution::LogNormal { alpha: 0.1, beta: 0.2 },
    )
    .unwrap()
}

fn spec() -> OptionSpec {
    OptionSpec {
        theta: 1,
        strike: 0.75,
        ctr_buyer: 0.2,
        ctr_market: 0.2,
        start: 30.0 * DAILY_DT,
        expiry: 60.0 * DAILY_DT,
        m: 30,
        gamma: MeanExponent::GEOMETRIC,
    }
}

fn simulate(c: &mut Criterion) {
    let grid = build_time_grid(&spec()).unwrap();
    c.bench_function("simulate_paths_1000", |b| {
        b.iter(|| simulate_paths(1.0, &params(), &grid, 1000, RngSpec::new(1, 0)).unwrap())
    });
}

fn pricing(c: &mut Criterion) {
    let mut group = c.benchmark_group("mc_price");
    group.sample_size(10);
    for z in [10_000u64, 100_000] {
        group.bench_with_input(BenchmarkId::from_parameter(z), &z, |b, &z| {
            b.iter(|| mc_price(1.0, &params(), &spec(), &McConfig::new(z, 1)).unwrap())
        });
    }
    group.finish();
    c.bench_function("closed_form_price", |b| {
        b.iter(|| closed_form_price(black_box(1.0), &params(), &spec(), 200).unwrap())
    });
}

fn calibration(c: &mut Criterion) {
    let real = JumpDiffusionParams::real_world(
        0.0,
        0.2,
        0.05 / DAILY_DT,
        JumpSizeDistribution::LogNormal { alpha: 0.5, beta: 0.2 },
    )
    .unwrap();
    let (prices, _) = simulate_history(1.0, &real, DAILY_DT, 5001, RngSpec::new(3, 0)).unwrap();
    let returns = log_returns(&prices);
    let mut group = c.benchmark_group("fit_mle");
    group.sample_size(10);
    group.bench_function("n5000", |b| b.iter(|| fit_mle(&returns, 0.05 / DAILY_DT).unwrap()));
    group.finish();
}

criterion_group!(benches, simulate, pricing, calibration);
criterion_main!(benches);

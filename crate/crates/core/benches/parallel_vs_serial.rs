use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use cqed_metrology::montecarlo::{cramer_rao_trial_with, TrialConfig};
use cqed_metrology::protocol::{imperfect_fringe, numeric_fringe};
use cqed_metrology::{Execution, ImperfectionModel, ProtocolParams};

const MODES: [(&str, Execution); 2] = [
    ("serial", Execution::Serial),
    ("parallel", Execution::Parallel),
];

fn betas(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| -0.6 + 1.2 * i as f64 / (n - 1) as f64)
        .collect()
}

fn fringe_scan(c: &mut Criterion) {
    let params = ProtocolParams::default();
    let grid = betas(64);
    let mut g = c.benchmark_group("numeric_fringe_64");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| numeric_fringe(black_box(&params), &grid, exec).unwrap())
        });
    }
    g.finish();
}

fn spread_scan(c: &mut Criterion) {
    let params = ProtocolParams::default().with_times(12.0, 13.5);
    let model = ImperfectionModel::default();
    let grid = betas(13);
    let mut g = c.benchmark_group("imperfect_fringe_13x15");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| imperfect_fringe(black_box(&params), &model, &grid, exec).unwrap())
        });
    }
    g.finish();
}

fn trial(c: &mut Criterion) {
    let cfg = TrialConfig {
        replicas: 2000,
        ..TrialConfig::default()
    };
    let mut g = c.benchmark_group("cramer_rao_2000");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| cramer_rao_trial_with(black_box(&cfg), exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, fringe_scan, spread_scan, trial);
criterion_main!(benches);

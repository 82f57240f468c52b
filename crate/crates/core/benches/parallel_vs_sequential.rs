use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cosrigid::algebra::zero_law_harness;
use cosrigid::cyclic::{gamma, Threshold};
use cosrigid::k_constant::{k_of_order, triple_angle_report};
use cosrigid::par::{self, Execution};
use cosrigid::real_sup::taylor_tables;
use cosrigid::{ClosedForm, Config};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn config(execution: Execution) -> Config {
    Config {
        execution,
        ..Config::default()
    }
}

fn k_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("k_of_order 1..=120");
    group.sample_size(10);
    for (name, exec) in MODES {
        let cfg = config(exec);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| par::map_range(exec, 1..121, |u| k_of_order(u, &cfg).unwrap()))
        });
    }
    group.finish();
}

fn triple_report(c: &mut Criterion) {
    let mut group = c.benchmark_group("triple_angle_report 34/60");
    group.sample_size(10);
    for (name, exec) in MODES {
        let cfg = config(exec);
        group.bench_function(name, |b| {
            b.iter(|| triple_angle_report(34, 60, &cfg).unwrap())
        });
    }
    group.finish();
}

fn tables(c: &mut Criterion) {
    let mut group = c.benchmark_group("taylor_tables");
    group.sample_size(10);
    for (name, exec) in MODES {
        let cfg = config(exec);
        group.bench_function(name, |b| b.iter(|| taylor_tables(&cfg).unwrap()));
    }
    group.finish();
}

fn gamma_lift(c: &mut Criterion) {
    let mut group = c.benchmark_group("gamma 2/7 at three-halves");
    group.sample_size(10);
    let m = Threshold::closed(ClosedForm::ThreeHalves);
    let a = "2/7".parse().unwrap();
    for (name, exec) in MODES {
        let cfg = config(exec);
        group.bench_function(name, |b| b.iter(|| gamma(&a, &m, &cfg).unwrap()));
    }
    group.finish();
}

fn harness(c: &mut Criterion) {
    let mut group = c.benchmark_group("zero_law_harness 64 trials");
    group.sample_size(10);
    for (name, exec) in MODES {
        let cfg = config(exec);
        group.bench_function(name, |b| b.iter(|| zero_law_harness(64, 3, &cfg).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, k_sweep, triple_report, tables, gamma_lift, harness);
criterion_main!(benches);

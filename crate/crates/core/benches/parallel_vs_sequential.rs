use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rhc::experiment::DecodeExperiment;
use rhc::kernel::{empirical_kernel, grid};
use rhc::resonator::ResonatorConfig;
use rhc::{Execution, ModulusBase};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn decode_trials(c: &mut Criterion) {
    let mut group = c.benchmark_group("decode_trials");
    group.sample_size(10);
    for (name, exec) in MODES {
        let exp = DecodeExperiment {
            dim: 512,
            moduli: vec![29, 31],
            kappa: None,
            trials: 64,
            seed: 1,
            resonator: ResonatorConfig::default(),
            exec,
        };
        group
            .bench_with_input(BenchmarkId::new(name, "D512_M899_64trials"), &exp, |b, exp| b.iter(|| black_box(exp.run_trials().unwrap())));
    }
    group.finish();
}

fn kernel_grid(c: &mut Criterion) {
    let mut group = c.benchmark_group("kernel_grid");
    group.sample_size(10);
    let base = ModulusBase::sample(5, 20_000, 2, false).unwrap();
    let xs = grid(-8.0, 8.0, 0.1).unwrap();
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, "m5_D20000_161pts"), &exec, |b, &exec| {
            b.iter(|| black_box(empirical_kernel(&base, &xs, exec)))
        });
    }
    group.finish();
}

criterion_group!(benches, decode_trials, kernel_grid);
criterion_main!(benches);

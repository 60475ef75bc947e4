//! Sequential vs rayon execution of the particle update and the MH baseline.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

use rparvi::{
    init_particles, mh_run_with, step_system, Executor, HyperparameterInput, MhConfig, MixtureComponent,
    MixtureSpec, TargetDensity,
};

fn mixture_2d() -> TargetDensity {
    TargetDensity::Mixture(MixtureSpec {
        components: (0..8)
            .map(|k| {
                let angle = k as f64 * std::f64::consts::TAU / 8.0;
                MixtureComponent { weight: 1.0, mean: vec![3.0 * angle.cos(), 3.0 * angle.sin()], std: 0.4 }
            })
            .collect(),
    })
}

fn executors() -> Vec<(&'static str, Executor)> {
    let mut out = vec![("sequential", Executor::sequential())];
    if cfg!(feature = "parallel") {
        out.push(("rayon", Executor::parallel(0).expect("global pool")));
    }
    out
}

fn bench_step_system(c: &mut Criterion) {
    let target = mixture_2d();
    let mut group = c.benchmark_group("step_system");
    for &m in &[100usize, 1_000, 10_000] {
        let hp = HyperparameterInput::new(m, 2, 1, 5.0).validate().unwrap();
        let start = init_particles(&hp);
        group.throughput(Throughput::Elements(m as u64));
        for (name, exec) in executors() {
            group.bench_with_input(BenchmarkId::new(name, m), &m, |b, _| {
                b.iter_batched_ref(
                    || start.clone(),
                    |sys| black_box(step_system(sys, &target, &hp, &exec).unwrap()),
                    criterion::BatchSize::LargeInput,
                )
            });
        }
    }
    group.finish();
}

fn bench_mh(c: &mut Criterion) {
    let target = TargetDensity::standard_gaussian(2);
    let cfg = MhConfig { num_chains: 256, steps: 200, proposal_std: 1.0, burn_in: 100, seed: 1, bound: 5.0, thin: 0 };
    let mut group = c.benchmark_group("mh_run");
    group.sample_size(20);
    for (name, exec) in executors() {
        group.bench_function(name, |b| b.iter(|| black_box(mh_run_with(&cfg, &target, &exec).unwrap())));
    }
    group.finish();
}

criterion_group!(benches, bench_step_system, bench_mh);
criterion_main!(benches);

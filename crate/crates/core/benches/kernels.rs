//! Parallel (default pool) against sequential (one-thread pool) runs of the
//! heavy kernels. Build with `--no-default-features` for the fully
//! sequential code path.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nsk_core::bubble::concentration::ball_energies;
use nsk_core::field::{Field, GridSpec};
use nsk_core::flow::{glue_sequence, heat_flow, Boundary, HeatOptions, SequenceSpec};
use nsk_core::gauge::cauchy::cauchy_transform;
use nsk_core::norms::{lorentz21, morrey, Region};
use nsk_core::Complex64;

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let all = rayon::ThreadPoolBuilder::new().build().unwrap();
    vec![("sequential", one), ("parallel", all)]
}

fn kernels(c: &mut Criterion) {
    let spec = SequenceSpec::single_bubble(3, 4);
    let u = glue_sequence(&spec, 4).unwrap().u;
    let g = GridSpec::square([0.0, 0.0], 1.0, 96).unwrap();
    let f = Field::from_fn(g, |x, y| Complex64::new((3.0 * x).sin(), x * y));
    let modulus = f.map(|z| z.norm());
    let heat = HeatOptions::new(0.2 * u.spec().cell_area(), 10, Boundary::Dirichlet);

    let mut group = c.benchmark_group("kernels");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::new("cauchy_transform", name), |b| {
            b.iter(|| pool.install(|| cauchy_transform(&f, &Region::All).unwrap()))
        });
        group.bench_function(BenchmarkId::new("lorentz21", name), |b| {
            b.iter(|| pool.install(|| lorentz21(&modulus, &Region::All).unwrap()))
        });
        group.bench_function(BenchmarkId::new("morrey", name), |b| {
            b.iter(|| pool.install(|| morrey(&modulus, 1.0, 1.5, &Region::All).unwrap()))
        });
        group.bench_function(BenchmarkId::new("glue_sequence", name), |b| {
            b.iter(|| pool.install(|| glue_sequence(&spec, 4).unwrap()))
        });
        group.bench_function(BenchmarkId::new("ball_energies", name), |b| {
            b.iter(|| pool.install(|| ball_energies(&u, 0.05).unwrap()))
        });
        group.bench_function(BenchmarkId::new("heat_flow_10_steps", name), |b| {
            b.iter(|| pool.install(|| heat_flow(&u, &heat).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);

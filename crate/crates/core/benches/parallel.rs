//! Parallel core against a single-thread pool on the hot kernels.
//!
//! Built without the `parallel` feature both variants run the sequential
//! fallback, which makes the comparison a no-op by construction.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use carnot_lw::density::pushforward_entropy;
use carnot_lw::group::CorankGroup;
use carnot_lw::harness::{inputs, multilinear_lhs};
use carnot_lw::radon::{radon_transform, TestFunction};

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let build = |n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
    vec![("parallel", build(threads)), ("sequential", build(1))]
}

fn kernels(c: &mut Criterion) {
    let g = CorankGroup::heisenberg(1).unwrap();
    let density = inputs::random_density(&g, 96, 0).unwrap();
    let fs = inputs::lw_inputs(&g, 64, 0).unwrap();
    let disk = TestFunction::Disk { radius: 1.0 }.rasterize(256).unwrap();

    let mut group = c.benchmark_group("kernels");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_with_input(BenchmarkId::new("pushforward_entropy_h1_96", name), &pool, |b, pool| {
            b.iter(|| pool.install(|| pushforward_entropy(&g, 1, &density).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("multilinear_lhs_h1_64", name), &pool, |b, pool| {
            b.iter(|| pool.install(|| multilinear_lhs(&g, &fs, false).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("radon_disk_256", name), &pool, |b, pool| {
            b.iter(|| pool.install(|| radon_transform(&disk, 64, 256).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);

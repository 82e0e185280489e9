//! Criterion suite for the hot kernels, run under a 1-thread pool and the
//! default pool so the parallel speedup is visible in one report. Building
//! with `--no-default-features` benches the true sequential fallback.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use f4d::harmonics::make_tangent_basis;
use f4d::synth;
use f4d::{
    dp_align, register_diffeo, srnf_group_action, srnf_map, tsrvf_map, SphericalGrid, Surface,
};

fn pools() -> Vec<(String, usize)> {
    vec![("seq".into(), 1), ("par".into(), num_threads())]
}

fn num_threads() -> usize {
    std::thread::available_parallelism().map_or(4, |n| n.get())
}

fn with_pool<R>(threads: usize, f: impl FnOnce() -> R + Send) -> R
where
    R: Send,
{
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("pool")
            .install(f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}

fn bench_srnf_map(c: &mut Criterion) {
    let g = SphericalGrid::new(128, 128).unwrap();
    let f = synth::random_smooth_surface(g, 7);
    c.bench_function("srnf_map_128", |b| b.iter(|| srnf_map(&f)));
}

fn bench_group_action(c: &mut Criterion) {
    let g = SphericalGrid::new(128, 128).unwrap();
    let q = srnf_map(&synth::random_smooth_surface(g.clone(), 7));
    let basis = make_tangent_basis(&g, 2);
    let gamma = synth::random_sphere_diffeo(&basis, 3, 0.05).unwrap();
    c.bench_function("srnf_group_action_128", |b| {
        b.iter(|| srnf_group_action(&q, &gamma).unwrap())
    });
}

fn bench_register_diffeo(c: &mut Criterion) {
    let g = SphericalGrid::new(64, 64).unwrap();
    let q1 = srnf_map(&synth::random_smooth_surface(g.clone(), 7));
    let basis = make_tangent_basis(&g, 4);
    let gamma = synth::random_sphere_diffeo(&basis, 3, 0.04).unwrap();
    let q2 = srnf_group_action(&q1, &gamma).unwrap();

    let mut group = c.benchmark_group("register_diffeo_64");
    group.sample_size(10);
    for (label, threads) in pools() {
        group.bench_with_input(BenchmarkId::from_parameter(&label), &threads, |b, &t| {
            b.iter(|| with_pool(t, || register_diffeo(&q1, &q2, &basis, 0.1, 10).unwrap()));
        });
    }
    group.finish();
}

fn bench_dp_align(c: &mut Criterion) {
    let g = SphericalGrid::new(32, 32).unwrap();
    let f_a = synth::random_smooth_surface(g.clone(), 1);
    let f_b = synth::random_smooth_surface(g.clone(), 2);
    let times = f4d::trajectory::uniform_times(64);
    let frames: Vec<f4d::Srnf> = times
        .iter()
        .map(|&t| {
            let mut f = f_a.field().scaled(1.0 - t);
            f.axpy(t, f_b.field());
            srnf_map(&Surface::new(f))
        })
        .collect();
    let h = f4d::Trajectory::new(times, frames).unwrap();
    let q1 = tsrvf_map(&h);
    let xi = synth::random_time_warp(5, 0.5, 64);
    let q2 = f4d::warp_action(&q1, &xi).unwrap();

    let mut group = c.benchmark_group("dp_align_t64_grid32");
    group.sample_size(10);
    for (label, threads) in pools() {
        group.bench_with_input(BenchmarkId::from_parameter(&label), &threads, |b, &t| {
            b.iter(|| with_pool(t, || dp_align(&q1, &q2).unwrap()));
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_srnf_map,
    bench_group_action,
    bench_register_diffeo,
    bench_dp_align
);
criterion_main!(benches);

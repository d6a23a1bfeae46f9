//! Compares the parallel batch runner against the sequential fallback on
//! the real pipeline workload: seeded instance generation followed by a
//! full certified run per grid point.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use attain::{expand_grid, sweep_serial, PhaseMode, SweepOptions};

fn sweep_options() -> SweepOptions {
    SweepOptions {
        norm_scale: 1.5,
        // faithful mode with a tight stopping tolerance takes the full
        // geometric schedule, the representative multi-step workload
        mode: PhaseMode::Faithful,
        defect_tol: 1e-10,
        ..SweepOptions::default()
    }
}

fn bench_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("pipeline_sweep");
    for &runs in &[16usize, 64] {
        let seeds: Vec<u64> = (0..runs as u64).collect();
        let points = expand_grid(&seeds, &[(8, 8)], &[0.1], &[0.81]);
        let opts = sweep_options();
        group.bench_with_input(BenchmarkId::new("serial", runs), &points, |b, points| {
            b.iter(|| black_box(sweep_serial(points, &opts)))
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", runs), &points, |b, points| {
            b.iter(|| black_box(attain::sweep(points, &opts)))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_sweep);
criterion_main!(benches);

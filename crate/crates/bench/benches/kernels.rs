use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use maxrect::maximal::{multilinear_maximal_map, Algorithm, MaximalOptions, SweepKernel};
use maxrect::BasisSpec;
use maxrect_bench::random_vector;
use std::hint::black_box;

fn options(algorithm: Algorithm, kernel: SweepKernel) -> MaximalOptions {
    MaximalOptions {
        algorithm,
        kernel,
        threads: Some(1),
        ..Default::default()
    }
}

fn kernels(c: &mut Criterion) {
    let variants = [
        ("brute", options(Algorithm::Brute, SweepKernel::Preferred)),
        ("interval", options(Algorithm::Sweep, SweepKernel::Preferred)),
        ("range_max_tree", options(Algorithm::Sweep, SweepKernel::RangeMaxTree)),
    ];
    for m in [1, 2] {
        let mut group = c.benchmark_group(format!("rectangles_m{m}"));
        group.sample_size(10);
        for side in [8, 16, 24] {
            let fs = random_vector(side, m, 11);
            for (name, opts) in &variants {
                // brute is quadratic in the rectangle count; skip it where it dominates the run
                if *name == "brute" && side > 16 {
                    continue;
                }
                group.bench_with_input(BenchmarkId::new(*name, side), &fs, |b, fs| {
                    b.iter(|| multilinear_maximal_map(black_box(fs), &BasisSpec::Rectangles, opts).unwrap())
                });
            }
        }
        group.finish();
    }
}

fn bases(c: &mut Criterion) {
    let mut group = c.benchmark_group("bases_m1");
    group.sample_size(10);
    let fs = random_vector(32, 1, 5);
    let opts = options(Algorithm::Auto, SweepKernel::Preferred);
    for spec in [BasisSpec::DyadicCubes, BasisSpec::Cubes, BasisSpec::Eccentricity { n: 4.0 }, BasisSpec::Rectangles] {
        group.bench_function(spec.name(), |b| b.iter(|| multilinear_maximal_map(black_box(&fs), &spec, &opts).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, kernels, bases);
criterion_main!(benches);

//! Criterion benchmarks for the hot paths of the laboratory: the certified
//! bit-depth bound, the two gap experiments, Minkowski averaging of
//! segments, and the Legendre/epsilon-subdifferential pipeline.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use subdiff_core::cvx_ulln::pwl::average;
use subdiff_core::{
    gap_experiment, gap_experiment_2d, k_bound, minkowski_average, split_seed, BitStream,
    ConvexScenario, ConvexSet, PiecewiseLinearConvex, Segment2, Vec2,
};

fn bench_k_bound(c: &mut Criterion) {
    c.bench_function("k_bound(nu=12)", |b| {
        b.iter(|| k_bound(black_box(12)).unwrap())
    });
}

fn bench_gap_lip(c: &mut Criterion) {
    c.bench_function("gap_experiment lip nu=8", |b| {
        let mut t = 0u64;
        b.iter(|| {
            t += 1;
            gap_experiment(black_box(8), split_seed(42, t)).unwrap()
        })
    });
}

fn bench_gap_cvx(c: &mut Criterion) {
    c.bench_function("gap_experiment cvx nu=8", |b| {
        let mut t = 0u64;
        b.iter(|| {
            t += 1;
            gap_experiment_2d(black_box(8), split_seed(42, t)).unwrap()
        })
    });
}

fn bench_minkowski(c: &mut Criterion) {
    let sets: Vec<ConvexSet> = (0..64)
        .map(|i| {
            let seed = split_seed(7, i);
            let mut s = ConvexScenario::new(BitStream::new(seed));
            ConvexSet::Segment(
                s.subdiff_f(Vec2::new(0.0, 0.5))
                    .unwrap_or_else(|_| Segment2::point(Vec2::new(0.0, 0.0))),
            )
        })
        .collect();
    c.bench_function("minkowski_average 64 segments", |b| {
        b.iter(|| minkowski_average(black_box(&sets)).unwrap())
    });
}

fn bench_eps_subdiff(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let fs: Vec<PiecewiseLinearConvex> = (0..32)
        .map(|_| {
            use rand::Rng;
            let center = rng.gen_range(-8i32..=8) as f64 / 4.0;
            PiecewiseLinearConvex::hinge(center).unwrap()
        })
        .collect();
    let avg = average(&fs).unwrap();
    let conj = avg.legendre_transform().unwrap();
    c.bench_function("eps_subdiff over 256-point grid", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for i in 0..256 {
                let x = -2.0 + 4.0 * (i as f64) / 255.0;
                let iv = avg
                    .eps_subdiff_with_conjugate(black_box(&conj), x, 0.1)
                    .unwrap();
                acc += iv.width();
            }
            acc
        })
    });
}

criterion_group!(
    benches,
    bench_k_bound,
    bench_gap_lip,
    bench_gap_cvx,
    bench_minkowski,
    bench_eps_subdiff
);
criterion_main!(benches);

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use srht_matmul::{
    apply_rotation, approx_matmul, draw_plan, fwht_in_place, make_rotation, matmul_exact,
    sample_product, spectral_norm_default, DenseMatrix,
};

fn random(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut g = ChaCha8Rng::seed_from_u64(seed);
    DenseMatrix::from_fn(rows, cols, |_, _| g.random_range(-1.0..1.0)).unwrap()
}

fn fwht(c: &mut Criterion) {
    let mut group = c.benchmark_group("fwht");
    for log_m in [8, 12, 16] {
        let m = 1usize << log_m;
        let v: Vec<f64> = (0..m).map(|i| (i % 7) as f64 - 3.0).collect();
        group.throughput(Throughput::Elements(m as u64));
        group.bench_with_input(BenchmarkId::from_parameter(m), &v, |b, v| {
            b.iter_batched_ref(|| v.clone(), |w| fwht_in_place(w).unwrap(), criterion::BatchSize::SmallInput)
        });
    }
    group.finish();
}

fn rotation(c: &mut Criterion) {
    let mut group = c.benchmark_group("apply_rotation");
    for m in [256, 4096, 65536] {
        let a = random(16, m, 1);
        let spec = make_rotation(m, 7).unwrap();
        group.bench_with_input(BenchmarkId::new("16 rows", m), &a, |b, a| {
            b.iter(|| apply_rotation(black_box(a), &spec).unwrap())
        });
    }
    group.finish();
}

fn sampling(c: &mut Criterion) {
    let m = 4096;
    let a = random(32, m, 2);
    let b = random(32, m, 3);
    let spec = make_rotation(m, 4).unwrap();
    let (ar, br) = (apply_rotation(&a, &spec).unwrap(), apply_rotation(&b, &spec).unwrap());
    let mut group = c.benchmark_group("sample_product");
    for n in [64, 512, 4096] {
        let plan = draw_plan(spec.clone(), n, 5).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &plan, |bch, plan| {
            bch.iter(|| sample_product(&ar, &br, plan).unwrap())
        });
    }
    group.finish();
}

fn end_to_end(c: &mut Criterion) {
    let a = random(32, 4096, 6);
    let b = random(32, 4096, 7);
    let mut group = c.benchmark_group("product");
    group.bench_function("exact", |bch| bch.iter(|| matmul_exact(black_box(&a), &b).unwrap()));
    group.bench_function("approx n=512", |bch| {
        bch.iter(|| approx_matmul(black_box(&a), &b, 512, 9).unwrap())
    });
    let ab = matmul_exact(&a, &b).unwrap();
    group.bench_function("spectral norm 32x32", |bch| bch.iter(|| spectral_norm_default(black_box(&ab)).unwrap()));
    group.finish();
}

criterion_group!(benches, fwht, rotation, sampling, end_to_end);
criterion_main!(benches);

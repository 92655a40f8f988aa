use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::Rng;
use rankineq::generator::gen_example_b;
use rankineq::gf::{MatrixGf, PrimeField, RowReducer};
use rankineq::verifier::{sample_verify, trial_rng, SamplingPolicy};
use rankineq::Execution;

fn sampling(c: &mut Criterion) {
    let ineq = gen_example_b(11, 3).unwrap();
    let field = PrimeField::new(5).unwrap();
    let policy = SamplingPolicy::new(11, 11, 2_000, 42).unwrap();
    let mut group = c.benchmark_group("sample_verify_11_3_gf5");
    group.sample_size(10);
    for (name, exec) in [
        ("sequential", Execution::Sequential),
        ("parallel", Execution::Parallel),
    ] {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| sample_verify(black_box(&ineq), field, &policy, exec).unwrap())
        });
    }
    group.finish();
}

fn rank_paths(c: &mut Criterion) {
    let field = PrimeField::new(2).unwrap();
    let mut rng = trial_rng(1, 0);
    let n = 48;
    let data: Vec<u32> = (0..n * n).map(|_| rng.gen_range(0..2)).collect();
    let m = MatrixGf::from_residues(field, n, n, data).unwrap();
    let mut group = c.benchmark_group("rank_gf2_48x48");
    for (name, packed) in [("bit_packed", true), ("generic", false)] {
        group.bench_function(name, |b| {
            b.iter(|| {
                let mut r = if packed {
                    RowReducer::new(field, n)
                } else {
                    RowReducer::new_generic(field, n)
                };
                for row in m.row_iter() {
                    r.insert(black_box(row));
                }
                r.rank()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, sampling, rank_paths);
criterion_main!(benches);

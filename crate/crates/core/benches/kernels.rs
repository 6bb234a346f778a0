use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use shiftlap::green::green_operator_level;
use shiftlap::numeric::solve_f64;
use shiftlap::operators::{build_dense_h, structural_check, DifferenceOperator};
use shiftlap::sampling::{self, sub_rng};
use shiftlap::shift::enumerate_level;
use shiftlap::{Alphabet, ExecMode};

const MODES: [(&str, ExecMode); 2] = [
    ("sequential", ExecMode::Sequential),
    ("parallel", ExecMode::Parallel),
];

fn dense_assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("build_dense_h N=3 m=5");
    let a = Alphabet::new(3).unwrap();
    for (name, mode) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| build_dense_h(a, black_box(5), mode).unwrap())
        });
    }
    g.finish();
}

fn green_level(c: &mut Criterion) {
    let mut g = c.benchmark_group("green_operator_level N=2");
    let a = Alphabet::new(2).unwrap();
    let f = sampling::cylinder_function(&mut sub_rng(1, &[]), a, 3).unwrap();
    for m in [8, 11] {
        let levels = enumerate_level(a, m).unwrap();
        for (name, mode) in MODES {
            g.bench_with_input(BenchmarkId::new(name, m), &levels, |b, l| {
                b.iter(|| green_operator_level(&f, l, mode))
            });
        }
    }
    g.finish();
}

fn operator_apply(c: &mut Criterion) {
    let mut g = c.benchmark_group("apply H N=2 m=12");
    let a = Alphabet::new(2).unwrap();
    let op = DifferenceOperator::new(a, 12).unwrap();
    let u = sampling::level_vector(&mut sub_rng(2, &[]), a, 12).unwrap();
    for (name, mode) in MODES {
        g.bench_function(name, |b| b.iter(|| op.apply(&u, mode).unwrap()));
    }
    g.finish();
}

fn structural(c: &mut Criterion) {
    let mut g = c.benchmark_group("structural_check N=2 m=6");
    g.sample_size(10);
    let a = Alphabet::new(2).unwrap();
    for (name, mode) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| structural_check(a, black_box(6), 7, mode).unwrap())
        });
    }
    g.finish();
}

fn float_solve(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve_f64 n=400");
    let n = 400;
    // diagonally dominant, so elimination is stable
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = if i == j {
                n as f64
            } else {
                ((i * 7 + j * 3) % 11) as f64 / 11.0
            };
        }
    }
    let rhs: Vec<f64> = (0..n).map(|i| i as f64).collect();
    for (name, mode) in MODES {
        g.bench_function(name, |b| b.iter(|| solve_f64(&a, n, &rhs, mode).unwrap()));
    }
    g.finish();
}

criterion_group!(
    benches,
    dense_assembly,
    green_level,
    operator_apply,
    structural,
    float_solve
);
criterion_main!(benches);

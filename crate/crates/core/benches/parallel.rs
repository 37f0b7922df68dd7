//! Sequential vs parallel execution of the batch entry points.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use symclass::catalog::verify_all;
use symclass::classifier::classify;
use symclass::gen::{self, rng, PROPERTY_SEED};
use symclass::numcheck::{pde_residual, Boundary, Field, Grid, Seed};
use symclass::symmetry::{is_symmetry, Potential};
use symclass::{ex, Exec};

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn tables(c: &mut Criterion) {
    let mut group = c.benchmark_group("verify_all");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        group.bench_function(name, |b| b.iter(|| black_box(verify_all(exec).pass)));
    }
    group.finish();
}

fn residual(c: &mut Criterion) {
    let mut group = c.benchmark_group("pde_residual");
    group.sample_size(10);
    let field = Field::Expr(Seed::soliton().expr());
    let v = Potential(ex("x^2/50"));
    for n in [128usize, 256] {
        let grid = Grid::new((0.0, 1.0), (-10.0, 10.0), n, n, Boundary::DirichletZero).unwrap();
        for (name, exec) in POLICIES {
            group.bench_with_input(BenchmarkId::new(name, n), &grid, |b, g| {
                b.iter(|| black_box(pde_residual(&field, &v, g, exec).unwrap().max_residual))
            });
        }
    }
    group.finish();
}

fn properties(c: &mut Criterion) {
    let mut group = c.benchmark_group("property_batch");
    group.sample_size(10);
    let mut r = rng(PROPERTY_SEED);
    let pairs: Vec<_> = (0..16).map(|_| (Potential(gen::potential(&mut r)), gen::element(&mut r))).collect();
    let potentials: Vec<Potential> = (0..64).map(|k| Potential(ex(&format!("x^2 + i*{k}/7 + {}*x", k % 5)))).collect();
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::new("is_symmetry", name), |b| {
            b.iter(|| exec.map(&pairs, |(v, q)| is_symmetry(v, q).holds))
        });
        group.bench_function(BenchmarkId::new("classify", name), |b| {
            b.iter(|| exec.map(&potentials, |v| classify(v).is_matched()))
        });
    }
    group.finish();
}

criterion_group!(benches, tables, residual, properties);
criterion_main!(benches);

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use conic_embed::embed_dual::{build_dual_embedding, map_solution_dual};
use conic_embed::embed_primal::{build_primal_embedding, map_solution_primal};
use conic_embed::linalg::eigh;
use conic_embed::{RankChoice, RankSpec};
use conic_embed_bench::fixture;

const TOL: f64 = 1e-8;

fn build(c: &mut Criterion) {
    let mut group = c.benchmark_group("build");
    for n in [3usize, 8, 16] {
        let g = fixture(3, n, 4, 1);
        group.bench_with_input(BenchmarkId::new("dual", n), &g, |b, g| {
            b.iter(|| build_dual_embedding(black_box(&g.problem)))
        });
        group.bench_with_input(BenchmarkId::new("primal", n), &g, |b, g| {
            b.iter(|| build_primal_embedding(black_box(&g.problem)))
        });
    }
    group.finish();
}

fn map(c: &mut Criterion) {
    let mut group = c.benchmark_group("map");
    let g = fixture(2, 8, 4, 2);
    for choice in [
        RankChoice::RankOne,
        RankChoice::SimZhao,
        RankChoice::FullRank { eps: None },
    ] {
        let name = choice.to_string();
        // boundary cones only admit rank one, so route them through SimZhao
        let spec = RankSpec::PerCone(vec![choice, RankChoice::SimZhao]);
        group.bench_function(BenchmarkId::new("dual", &name), |b| {
            b.iter(|| map_solution_dual(&g.problem, black_box(&g.solution), &spec, TOL).unwrap())
        });
    }
    let spec = RankSpec::Uniform(RankChoice::SimZhao);
    group.bench_function("primal/simzhao", |b| {
        b.iter(|| map_solution_primal(&g.problem, black_box(&g.solution), &spec, TOL).unwrap())
    });
    group.finish();
}

fn jacobi(c: &mut Criterion) {
    let mut group = c.benchmark_group("eigh");
    for n in [3usize, 8] {
        let g = fixture(3, n, 2, 3);
        let m = map_solution_dual(&g.problem, &g.solution, &RankSpec::Uniform(RankChoice::SimZhao), TOL)
            .unwrap()
            .x
            .unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(3 * n), &m, |b, m| {
            b.iter(|| eigh(black_box(m), 1e-13).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, build, map, jacobi);
criterion_main!(benches);

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fedosov_bench::{aff1, flat, kahler};
use fedosov_core::fedosov_solver::{lift, solve_fundamental, SolveOptions};
use fedosov_core::groupoid_builder::{build_change_of_variables, groupoid_checks};
use fedosov_core::{BasePolynomial, PQTensors};

fn solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    let (_, fubini) = kahler(1);
    for (name, conn) in [("flat", flat()), ("aff1", aff1()), ("kahler-fubini-like", fubini)] {
        for order in [4, 6] {
            group.bench_with_input(BenchmarkId::new(name, order), &order, |b, &order| {
                b.iter(|| solve_fundamental(&conn, &conn, SolveOptions::order(order)).unwrap())
            });
        }
    }
    group.finish();
}

fn lift_and_groupoid(c: &mut Criterion) {
    let (k, conn) = kahler(1);
    let sol = solve_fundamental(&conn, &conn, SolveOptions::order(5)).unwrap();
    let zzb = &BasePolynomial::var(2, 0) * &BasePolynomial::var(2, 1);
    c.bench_function("lift/kahler-fubini-like/zzb", |b| b.iter(|| lift(&sol, &zzb, 5).unwrap()));

    let pq = PQTensors::kahler(&k);
    c.bench_function("groupoid/kahler-fubini-like/maps", |b| b.iter(|| build_change_of_variables(&sol, &pq).unwrap()));
    let maps = build_change_of_variables(&sol, &pq).unwrap();
    let fns = [BasePolynomial::var(2, 0), BasePolynomial::var(2, 1), zzb.clone()];
    let mut group = c.benchmark_group("groupoid");
    group.sample_size(10);
    group.bench_function("kahler-fubini-like/checks", |b| b.iter(|| groupoid_checks(&sol, &maps, &fns).unwrap()));
    group.finish();
}

criterion_group!(benches, solve, lift_and_groupoid);
criterion_main!(benches);

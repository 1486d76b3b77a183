use criterion::{criterion_group, criterion_main, Criterion};
use qmarg_bench::{
    bipartite_marginals, bipartite_problem, chain_problem, hermitian, product_spectrum,
};
use qmarg_core::constructive::{greedy_minmatch, interlace_decomposition, rank_sweep};
use qmarg_core::solvers::{
    dykstra_project, newton_project, nspg_minimize, solve_feasible, solve_with_spectrum,
};
use qmarg_core::{Objective, SolveOptions};

fn options() -> SolveOptions {
    SolveOptions {
        tolerance: 1e-10,
        max_iterations: 5000,
        ..SolveOptions::default()
    }
}

fn constructions(c: &mut Criterion) {
    let (a, b) = bipartite_marginals(6, 8, 1);
    let mut g = c.benchmark_group("constructions 6x8");
    g.bench_function("greedy", |bch| {
        bch.iter(|| greedy_minmatch(&a, &b).unwrap())
    });
    g.bench_function("interlace", |bch| {
        bch.iter(|| interlace_decomposition(&a, &b).unwrap())
    });
    g.bench_function("rank sweep k=24", |bch| {
        bch.iter(|| rank_sweep(&a, &b, 24).unwrap())
    });
    g.finish();
}

fn iterative(c: &mut Criterion) {
    let mut g = c.benchmark_group("iterative");
    g.sample_size(10);
    let (a, b) = bipartite_marginals(2, 3, 2);
    let cs = bipartite_problem(2, 3, 2);
    let c_prod = product_spectrum(&a, &b);
    g.bench_function("spectrum 2x3", |bch| {
        bch.iter(|| solve_with_spectrum(&cs, &c_prod, &options()).unwrap())
    });
    let chain = chain_problem(&[2, 2, 2], 3);
    g.bench_function("feasible 2x2x2", |bch| {
        bch.iter(|| solve_feasible(&chain, &options()).unwrap())
    });
    let z = hermitian(8, 4);
    g.bench_function("dykstra 2x2x2", |bch| {
        bch.iter(|| dykstra_project(&z, &chain, &options()).unwrap())
    });
    g.bench_function("newton 2x2x2", |bch| {
        bch.iter(|| newton_project(&z, &chain, &options()).unwrap())
    });
    let cs34 = bipartite_problem(3, 4, 5);
    g.bench_function("nspg 3x4", |bch| {
        bch.iter(|| nspg_minimize(&cs34, Objective::VonNeumann, &options()).unwrap())
    });
    g.finish();
}

criterion_group!(benches, constructions, iterative);
criterion_main!(benches);

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qmarg_bench::{bipartite_problem, chain_problem, hermitian};
use qmarg_core::projections::{project_marginals, project_psd, AffineProjector};
use qmarg_core::tensorcore::{kron, partial_trace, random_unitary};
use qmarg_core::{KeepSet, SystemDims};

fn kernels(c: &mut Criterion) {
    let mut g = c.benchmark_group("kron");
    for n in [4, 8] {
        let (a, b) = (random_unitary(n, 1), random_unitary(n, 2));
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |bch, _| {
            bch.iter(|| kron(black_box(&a), black_box(&b)))
        });
    }
    g.finish();

    let mut g = c.benchmark_group("partial_trace");
    for dims in [vec![4, 4], vec![2, 2, 2, 2], vec![3, 4, 5]] {
        let sd = SystemDims::new(dims.clone()).unwrap();
        let x = hermitian(sd.total(), 3);
        let keep = KeepSet::new([0]);
        g.bench_function(format!("{dims:?}"), |bch| {
            bch.iter(|| partial_trace(black_box(&x), &sd, &keep).unwrap())
        });
    }
    g.finish();

    let mut g = c.benchmark_group("eig");
    for n in [6, 12, 24] {
        let x = hermitian(n, 4);
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |bch, _| {
            bch.iter(|| black_box(&x).eig().unwrap())
        });
    }
    g.finish();

    let mut g = c.benchmark_group("projections");
    let cs = bipartite_problem(3, 4, 5);
    let z = hermitian(12, 6);
    g.bench_function("marginals 3x4", |bch| {
        bch.iter(|| project_marginals(black_box(&z), &cs).unwrap())
    });
    let chain = chain_problem(&[2, 2, 2, 2], 7);
    let affine = AffineProjector::new(&chain).unwrap();
    let z16 = hermitian(16, 8);
    g.bench_function("prebuilt affine 2x2x2x2", |bch| {
        bch.iter(|| affine.apply(black_box(&z16)).unwrap())
    });
    g.bench_function("psd 12", |bch| {
        bch.iter(|| project_psd(black_box(&z)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);

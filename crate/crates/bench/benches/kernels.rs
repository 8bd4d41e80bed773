use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hdg_core::fespace::{assembly_exactness, error_exactness};
use hdg_core::global::{cg_solve, cholesky_solve};
use hdg_core::local::{element_operators, LocalOptions};
use hdg_core::mesh::{MeshFamily, MeshKind};
use hdg_core::problem::{assemble, Discretization};
use hdg_core::{ComplianceTensor, ElementContext, ExactSolution, TraceVariant};

fn material() -> ComplianceTensor {
    ComplianceTensor::plane_strain(3.0, 0.4999).unwrap()
}

fn element(c: &mut Criterion) {
    let mut group = c.benchmark_group("element_operators");
    let mat = material();
    for kind in [MeshKind::Tri, MeshKind::Poly] {
        let mesh = MeshFamily::new(kind, 4).unwrap().build().unwrap();
        for k in 1..=3 {
            let ctx = ElementContext::new(&mesh, 0, k).unwrap();
            let opts = LocalOptions {
                tau: 10.0 / mesh.h,
                variant: TraceVariant::Projected,
                exactness: assembly_exactness(k),
                source_exactness: error_exactness(k),
                check_quadrature: false,
                cross_check: false,
            };
            let id = BenchmarkId::new(kind.name(), k);
            group.bench_with_input(id, &k, |b, _| {
                b.iter(|| {
                    element_operators(black_box(&ctx), &mat, &opts, |p| {
                        ExactSolution::Test2.body_force(&mat, p)
                    })
                    .unwrap()
                })
            });
        }
    }
    group.finish();
}

fn global(c: &mut Criterion) {
    let mut group = c.benchmark_group("global_solve");
    group.sample_size(10);
    let mat = material();
    let mesh = MeshFamily::new(MeshKind::Tri, 16).unwrap().build().unwrap();
    for k in [1, 3] {
        let disc = Discretization::with_k(k);
        let (_, sys) = assemble(&mesh, &disc, &mat, &ExactSolution::Test2).unwrap();
        group.bench_with_input(BenchmarkId::new("assemble", k), &k, |b, _| {
            b.iter(|| assemble(&mesh, &disc, &mat, &ExactSolution::Test2).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("cholesky", k), &k, |b, _| {
            b.iter(|| cholesky_solve(black_box(&sys.matrix), &sys.rhs).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("cg", k), &k, |b, _| {
            b.iter(|| cg_solve(black_box(&sys.matrix), &sys.rhs, 2 * (k + 1), 1e-10).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, element, global);
criterion_main!(benches);

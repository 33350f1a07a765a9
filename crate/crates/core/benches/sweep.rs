use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fibrejoint::design::{grid_sweep_with, Axis, DesignSpace, MountPolicy, Objective};
use fibrejoint::{Execution, FiberSpec};

fn space(n: usize) -> DesignSpace {
    DesignSpace::new(
        Axis::linspace(1.0, 2.0, n).unwrap(),
        Axis::linspace(2.5, 5.0, n).unwrap(),
        Axis::linspace(120.0, 180.0, n).unwrap(),
        Axis::values(vec![0.6, 0.8, 0.95]).unwrap(),
        FiberSpec::default(),
        MountPolicy::default(),
    )
    .unwrap()
}

fn bench_sweep(c: &mut Criterion) {
    let objective = Objective::UsableRangeLength { min_slope: 0.01 };
    let mut group = c.benchmark_group("grid_sweep");
    group.sample_size(10);
    for n in [4, 8] {
        let s = space(n);
        for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            group.bench_with_input(BenchmarkId::new(name, s.cell_count()), &s, |b, s| {
                b.iter(|| grid_sweep_with(s, &objective, exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_sweep);
criterion_main!(benches);

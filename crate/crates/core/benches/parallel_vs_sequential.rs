use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ep_spectral::collision::q_quadratic_with;
use ep_spectral::equilibrium::{maxwellian, Moments};
use ep_spectral::initial::Bkw;
use ep_spectral::kernel::{build_table, build_table_with, KernelConfig};
use ep_spectral::spectral::VelocityGrid;
use ep_spectral::Execution;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn kernel_table(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_table");
    group.sample_size(10);
    for order in [4, 8] {
        let config = KernelConfig::maxwell_molecules(2, order);
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, order), &config, |b, config| {
                b.iter(|| build_table_with(config, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn collision(c: &mut Criterion) {
    let mut group = c.benchmark_group("q_quadratic");
    group.sample_size(10);
    for order in [8, 16] {
        let table = build_table(&KernelConfig::maxwell_molecules(2, order)).unwrap();
        let grid = VelocityGrid::for_order(2, order).unwrap();
        let f = Bkw::new(0.2).unwrap().project(&grid, order, 0.0).unwrap();
        let m = maxwellian(&Moments::new(1.0, vec![0.0, 0.0], 0.2).unwrap(), &grid, order).unwrap();
        for (name, exec) in MODES {
            group.bench_function(BenchmarkId::new(name, order), |b| {
                b.iter(|| q_quadratic_with(&(&f + &m), &(&f - &m), &table, exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, kernel_table, collision);
criterion_main!(benches);

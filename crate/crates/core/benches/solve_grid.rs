use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use holmgren::fundsol::ProblemConfig;
use holmgren::solver::{BoundaryData, DataFamily, Levels, SolveOptions, Solver};
use holmgren::Execution;

fn lattice(m: usize, count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|i| {
            let t = i as f64 / count as f64;
            let mut x = vec![0.2 + 0.4 * t, 0.3 + 0.2 * (1.0 - t)];
            if m == 3 {
                x.push(0.4 * t - 0.2);
            }
            x
        })
        .collect()
}

fn bench_solve_grid(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_grid");
    group.sample_size(10);
    for (m, level) in [(2usize, 16usize), (3, 10)] {
        let config = ProblemConfig::new(m, 2, 1, vec![0.2, 0.35], 1.0).unwrap();
        let data = BoundaryData::from_family(&config, &DataFamily::PowerLaw(1)).unwrap();
        let points = lattice(m, 16);
        for execution in [Execution::Sequential, Execution::Parallel] {
            let mut options = SolveOptions::default_for(m);
            options.levels = Levels::uniform(level);
            options.execution = execution;
            let solver = Solver::new(config.clone(), options).unwrap();
            group.bench_with_input(
                BenchmarkId::new(format!("{execution:?}"), format!("m{m}")),
                &points,
                |b, pts| b.iter(|| black_box(solver.solve_grid(&data, pts))),
            );
        }
    }
    group.finish();
}

criterion_group!(benches, bench_solve_grid);
criterion_main!(benches);

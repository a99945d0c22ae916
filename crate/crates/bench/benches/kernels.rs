use criterion::{black_box, criterion_group, criterion_main, Criterion};

use kjplate::coupled::{evolve, plate_bump_state, SystemOperator};
use kjplate::flowmap::HalfPlaneGrid;
use kjplate::hilbert::{fht_forward, ChebFunction, WeightClass};
use kjplate::possio::{assemble_possio_operator, solve_possio_with, LineGrid, PossioBasis, PossioProblem, SolvePath};
use kjplate::plate::Nonlinearity;

fn hilbert(c: &mut Criterion) {
    for n in [64, 256] {
        let f = ChebFunction::from_fn(n, WeightClass::Sqrt, |x| (3.0 * x).cos()).unwrap();
        c.bench_function(&format!("fht_forward n={n}"), |b| b.iter(|| fht_forward(black_box(&f)).unwrap()));
    }
}

fn possio(c: &mut Criterion) {
    let line = LineGrid::new(8.0, 4096).unwrap();
    let basis = PossioBasis::new(32, line).unwrap();
    let profile = ChebFunction::from_fn(32, WeightClass::Sqrt, |x| (1.0 - (x / 0.9).powi(2)).max(0.0).powi(8)).unwrap();
    let d = assemble_possio_operator(&basis, 1.0, 2.0, 0.5).unwrap().apply(&profile).unwrap();
    let problem = PossioProblem::new(d, 1.0, 2.0, 0.5, line).unwrap();
    let mut group = c.benchmark_group("possio");
    group.sample_size(10);
    for path in [SolvePath::Direct, SolvePath::Decomposed] {
        group.bench_function(path.label(), |b| b.iter(|| solve_possio_with(&basis, &problem, path).unwrap()));
    }
    group.finish();
}

fn coupled(c: &mut Criterion) {
    let grid = HalfPlaneGrid::uniform(8.0, 4.0, 0.125).unwrap();
    let sys = SystemOperator::new(grid, 0.5).unwrap();
    let y0 = plate_bump_state(&sys, 1.0);
    let berger = Nonlinearity::Berger { kappa: 1.0, gamma: 0.5 };
    let mut group = c.benchmark_group("coupled");
    group.sample_size(10);
    group.bench_function("ten berger steps h=1/8", |b| {
        b.iter(|| evolve(&sys, black_box(&y0), 0.01, 0.001, Some(&berger)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, hilbert, possio, coupled);
criterion_main!(benches);

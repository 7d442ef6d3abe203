use criterion::{criterion_group, criterion_main, Criterion};
use mop_bench::deformation;
use mop_core::errorrhp::{assemble_wr, solve_rminus, SigmaGrid, SolveMethod};
use mop_core::local::{GlobalParametrix, LocalParametrix};
use mop_core::model::{solve_mop, ModelDescriptor};
use mop_core::outer::OuterParametrix;
use mop_core::{Cx, PrecisionContext};
use std::hint::black_box;

fn moment_solve(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve_mop");
    for n in [8, 16, 32] {
        let m = ModelDescriptor::new(0.3, -0.2, n, n / 3).unwrap();
        g.bench_function(format!("n={}", m.n()), |b| b.iter(|| solve_mop(black_box(&m), PrecisionContext::new(256)).unwrap()));
    }
    g.finish();
}

fn parametrices(c: &mut Criterion) {
    let d = deformation(16);
    let outer = OuterParametrix::for_deformation(&d).unwrap();
    let z = Cx::new(d.prec, 1.7, 1.8);
    c.bench_function("outer eval", |b| b.iter(|| outer.eval(black_box(&z)).unwrap()));

    let hard = LocalParametrix::build(&d, &outer, "U0", None).unwrap();
    let w = Cx::new(d.prec, 0.05, 0.08);
    c.bench_function("hard-edge eval", |b| b.iter(|| hard.eval(black_box(&w)).unwrap()));

    let soft = LocalParametrix::build(&d, &outer, "Ux0", None).unwrap();
    let w = Cx::new(d.prec, d.curve.x0_f64() + 0.05, 0.08);
    c.bench_function("soft-edge eval", |b| b.iter(|| soft.eval(black_box(&w)).unwrap()));
}

fn error_problem(c: &mut Criterion) {
    let d = deformation(8);
    let gp = GlobalParametrix::build(&d, None).unwrap();
    let grid = SigmaGrid::default();
    let mut g = c.benchmark_group("error problem n=8");
    g.sample_size(10);
    g.bench_function("assemble", |b| b.iter(|| assemble_wr(&gp, &d, &grid).unwrap()));
    let jd = assemble_wr(&gp, &d, &grid).unwrap();
    g.bench_function("dense solve", |b| b.iter(|| solve_rminus(black_box(&jd), SolveMethod::Dense).unwrap()));
    g.finish();
}

criterion_group!(benches, moment_solve, parametrices, error_problem);
criterion_main!(benches);

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use volmaj_bench::{example2, uniform};
use volmaj_core::{
    parse, solve_lyapunov, solve_main, solve_majorant, trapezoid_weights, BGrid, Checker, Env, LyapunovSpec,
    MajorantOptions, MajorantSpec, Sampler, SolveOptions,
};

fn majorant(c: &mut Criterion) {
    let spec = MajorantSpec::parse("w + t", "z^2").unwrap();
    let mut g = c.benchmark_group("majorant");
    for n in [100, 400, 1600] {
        let mesh = uniform(1.45, n).unwrap();
        g.bench_with_input(BenchmarkId::new("tan", n), &mesh, |b, m| {
            b.iter(|| solve_majorant(&spec, m.clone(), MajorantOptions::default()).unwrap())
        });
    }
    g.finish();
}

fn main_solution(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve_main");
    g.sample_size(20);
    for m in [9, 21, 41] {
        let e = example2(m).unwrap();
        let p = e.problem.unwrap();
        let mesh = uniform(0.4, 100).unwrap();
        g.bench_with_input(BenchmarkId::new("example2", m), &p, |b, p| {
            b.iter(|| solve_main(p, mesh.clone(), SolveOptions::default(), None).unwrap())
        });
    }
    g.finish();
}

fn lyapunov(c: &mut Criterion) {
    let spec = LyapunovSpec::parse("t*r^2 + t", None, 1.0, 4.0, 2.0).unwrap();
    c.bench_function("lyapunov/tangency_and_branch", |b| b.iter(|| solve_lyapunov(&spec, 50).unwrap()));
}

fn conditions(c: &mut Criterion) {
    let e = example2(9).unwrap();
    let p = e.problem.unwrap();
    let mesh = uniform(0.4, 20).unwrap();
    let grid = BGrid {
        t_max: 0.4,
        w_max: 0.5,
        z_max: 0.5,
        points: 41,
    };
    let mut g = c.benchmark_group("conditions");
    g.sample_size(10);
    g.bench_function("example2_m9", |b| {
        b.iter(|| {
            Checker::new(&e.majorant, mesh.clone(), grid)
                .with_problem(&p)
                .with_sampler(Sampler::new(1, 1.0), 40)
                .run()
        })
    });
    g.finish();
}

fn primitives(c: &mut Criterion) {
    let e = parse("sin(t - s + x) * u^2 + exp(-t) / (1 + u)", &["t", "s", "x", "u"]).unwrap();
    let env = Env::new().bind("t", 0.3).bind("s", 0.1).bind("x", 0.5).bind("u", 0.7);
    c.bench_function("expr/eval", |b| b.iter(|| black_box(&e).eval(&env).unwrap()));
    let mesh = uniform(1.0, 1000).unwrap();
    c.bench_function("quadrature/weights_1000", |b| b.iter(|| trapezoid_weights(black_box(&mesh))));
}

criterion_group!(benches, majorant, main_solution, lyapunov, conditions, primitives);
criterion_main!(benches);

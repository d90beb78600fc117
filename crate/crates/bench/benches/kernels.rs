use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gl2_thermo::pressure::log_word_sum;
use gl2_thermo::{
    additive_pressure, classify, is_typical, lyapunov_monte_carlo, markov_equilibrium, qm_scan, stable_holonomy,
    subadditive_pressure, ClassifyBounds, MarkovMeasure, Tolerances,
};
use gl2_thermo_bench::{golden_windowed, two_diagonal, typical, windowed_potential};

fn word_sums(c: &mut Criterion) {
    let mut group = c.benchmark_group("log_word_sum");
    let one_step = typical();
    let windowed = golden_windowed();
    for n in [8usize, 12, 16] {
        group.bench_with_input(BenchmarkId::new("one_step", n), &n, |b, &n| {
            b.iter(|| log_word_sum(black_box(&one_step), n).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("golden_windowed", n), &n, |b, &n| {
            b.iter(|| log_word_sum(black_box(&windowed), n).unwrap())
        });
    }
    group.finish();
}

fn pressures(c: &mut Criterion) {
    let a = typical();
    c.bench_function("subadditive_pressure/n12", |b| {
        b.iter(|| subadditive_pressure(black_box(&a), 12, None).unwrap())
    });
    let phi = windowed_potential();
    c.bench_function("additive_pressure/window3", |b| b.iter(|| additive_pressure(black_box(&phi)).unwrap()));
    c.bench_function("markov_equilibrium/window3", |b| b.iter(|| markov_equilibrium(black_box(&phi)).unwrap()));
}

fn monte_carlo(c: &mut Criterion) {
    let a = typical();
    let mu = MarkovMeasure::bernoulli(a.shift(), &[0.5, 0.5]).unwrap();
    c.bench_function("lyapunov_monte_carlo/n1e4_t16", |b| {
        b.iter(|| lyapunov_monte_carlo(black_box(&a), &mu, 10_000, 16, 7).unwrap())
    });
}

fn certificates(c: &mut Criterion) {
    let tol = Tolerances::default();
    let a = typical();
    c.bench_function("is_typical", |b| b.iter(|| is_typical(black_box(&a), 6, 6, &tol).unwrap()));
    c.bench_function("qm_scan/n6_exhaustive", |b| b.iter(|| qm_scan(black_box(&a), 6, 5, 1 << 12, 0).unwrap()));
    let reducible = two_diagonal();
    let bounds = ClassifyBounds::default();
    c.bench_function("classify/two_diagonal", |b| {
        b.iter(|| classify(black_box(&reducible), &bounds, None, &tol).unwrap())
    });
    let windowed = golden_windowed();
    let shift = windowed.shift().clone();
    let x = shift.point(vec![0], vec![1, 0, 1, 0], vec![0], -2).unwrap();
    let y = shift.point(vec![1, 0], vec![0, 0], vec![0], -2).unwrap();
    c.bench_function("stable_holonomy/golden_windowed", |b| {
        b.iter(|| stable_holonomy(black_box(&windowed), &x, &y).unwrap())
    });
}

criterion_group!(benches, word_sums, pressures, monte_carlo, certificates);
criterion_main!(benches);

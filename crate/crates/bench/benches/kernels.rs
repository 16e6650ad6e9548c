//! Benchmarks for the hot kernels: scalar arithmetic, series operations,
//! the transported group action, slice elimination, and table computation.

use criterion::{black_box, criterion_group, criterion_main, Criterion};

use laps_core::characters::TorusCharacter;
use laps_core::finite;
use laps_core::padic::PadicScalar;
use laps_core::pseries::{self, exactness_check};
use laps_core::sample;

const P: u64 = 5;
const N: u32 = 30;

fn scalar_ops(c: &mut Criterion) {
    let a = PadicScalar::from_integer(P, 987_654_321, N).unwrap();
    let b = PadicScalar::from_integer(P, 123_456_789, N).unwrap();
    c.bench_function("scalar_mul", |bench| {
        bench.iter(|| black_box(a.mul(&b).unwrap()))
    });
    c.bench_function("scalar_div", |bench| {
        bench.iter(|| black_box(a.div(&b).unwrap()))
    });
    let x = PadicScalar::from_integer(P, 6, N).unwrap();
    c.bench_function("scalar_log", |bench| {
        bench.iter(|| black_box(x.p_log().unwrap()))
    });
}

fn series_ops(c: &mut Criterion) {
    let mut rng = sample::rng(1);
    let f = sample::random_locfun(&mut rng, P, 1, 8, 12, N).unwrap();
    let g = sample::random_locfun(&mut rng, P, 1, 8, 12, N).unwrap();
    c.bench_function("locfun_multiply", |bench| {
        bench.iter(|| black_box(f.multiply(&g).unwrap()))
    });
    c.bench_function("locfun_derive", |bench| {
        bench.iter(|| black_box(f.derive().unwrap()))
    });
    let map = [
        PadicScalar::from_integer(P, 1, N).unwrap(),
        PadicScalar::zero(P),
        PadicScalar::from_integer(P, 5, N).unwrap(),
        PadicScalar::from_integer(P, 1, N).unwrap(),
    ];
    c.bench_function("locfun_mobius_pullback", |bench| {
        bench.iter(|| black_box(f.mobius_pullback(&map).unwrap()))
    });
}

fn chart_action(c: &mut Criterion) {
    let mut rng = sample::rng(2);
    let chi = TorusCharacter::trivial_smooth(P, 2, N + 12).unwrap();
    let phi = sample::random_ps_element(&mut rng, &chi, 1, 4, 16, N + 12).unwrap();
    let g = sample::integral_group_element(&mut rng, P, N + 12).unwrap();
    c.bench_function("chart_action", |bench| {
        bench.iter(|| black_box(pseries::act_with_floor(&g, &phi, N as i64 + 6).unwrap()))
    });
}

fn slice_exactness(c: &mut Criterion) {
    let chi = TorusCharacter::trivial_smooth(P, 1, N).unwrap();
    c.bench_function("exactness_slice_h1_d5", |bench| {
        bench.iter(|| black_box(exactness_check(&chi, 1, 5, N, 0).unwrap()))
    });
}

fn character_tables(c: &mut Criterion) {
    c.bench_function("character_table_s3", |bench| {
        let g = finite::symmetric_3().unwrap();
        bench.iter(|| black_box(finite::character_table(&g).unwrap()))
    });
    c.bench_function("character_table_sl2_f5", |bench| {
        let g = finite::sl2_mod(5).unwrap();
        bench.iter(|| black_box(finite::character_table(&g).unwrap()))
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = scalar_ops, series_ops, chart_action, slice_exactness, character_tables
}
criterion_main!(benches);

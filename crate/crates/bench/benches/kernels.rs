use std::hint::black_box;

use billiard_core::classical::{run, NATURAL_MASS};
use billiard_core::dynamics::{expand, pressure_timeseries};
use billiard_core::helmholtz::assemble;
use billiard_core::specfun::bessel_zeros;
use billiard_core::{Billiard, Shape, Vec2};
use criterion::{criterion_group, criterion_main, Criterion};
use nalgebra::DMatrix;
use num_complex::Complex64;

fn bessel(c: &mut Criterion) {
    c.bench_function("bessel_zeros j<=20 x20", |b| {
        b.iter(|| {
            for j in 0..=20 {
                black_box(bessel_zeros(j, 20).unwrap());
            }
        })
    });
}

fn ldl(c: &mut Criterion) {
    let shape = Shape::stadium_quarter(1.0, 1.0).unwrap();
    let (_, band) = assemble(&shape, 1.0 / 64.0).unwrap();
    c.bench_function("band LDL stadium h=1/64", |b| {
        b.iter(|| black_box(band.factor_shifted(black_box(300.5)).unwrap()))
    });
}

fn collisions(c: &mut Criterion) {
    let b = Billiard::mirror_completed(&Shape::stadium_quarter(1.0, 1.0).unwrap());
    c.bench_function("stadium 10k collisions", |bench| {
        bench.iter(|| {
            let mut n = 0usize;
            run(
                &b,
                Vec2::new(0.1, 0.2),
                Vec2::new(0.8, 0.6),
                NATURAL_MASS,
                10_000,
                |_| n += 1,
            )
            .unwrap();
            black_box(n)
        })
    });
}

fn timeseries(c: &mut Criterion) {
    let n = 100;
    let energies: Vec<f64> = (1..=n).map(|i| 10.0 * i as f64).collect();
    let coeffs: Vec<Complex64> = (0..n)
        .map(|i| Complex64::from_polar(0.1, 0.3 * i as f64))
        .collect();
    let ex = expand(&coeffs, &energies, 22.0, 0.999, false).unwrap();
    let m = ex.len();
    let kernel = DMatrix::from_fn(m, m, |i, j| 1.0 / (1.0 + (i as f64 - j as f64).abs()));
    let times: Vec<f64> = (0..1000).map(|i| 0.01 * i as f64).collect();
    c.bench_function("pressure series 100 states x 1000 t", |b| {
        b.iter(|| black_box(pressure_timeseries(&ex, &kernel, &times)))
    });
}

criterion_group!(benches, bessel, ldl, collisions, timeseries);
criterion_main!(benches);

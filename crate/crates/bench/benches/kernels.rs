use std::hint::black_box;

use covario::clip::intersection_area_translated;
use covario::covariogram::{Covariogram, CovariogramGrid};
use covario::fourier_laplace::{band_for, track_zero, RayTransformContext};
use covario::oracles::{random_convex_polygon, stream_rng};
use covario::{Body, Direction, Vec2};
use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;

fn trefoil() -> Body {
    Body::support_series(1.0, vec![(0.0, 0.0), (0.0, 0.0), (0.05, 0.0)]).unwrap()
}

fn clipping(c: &mut Criterion) {
    let mut rng = stream_rng(1, 0);
    let p = random_convex_polygon(9, &mut rng);
    let q = random_convex_polygon(9, &mut rng);
    c.bench_function("clip 9-gon x 9-gon", |b| {
        b.iter(|| intersection_area_translated(black_box(&p), black_box(&q), Vec2::new(0.1, 0.2)))
    });
    let disk = Covariogram::new(&Body::disk(Vec2::zeros(), 1.0).unwrap());
    c.bench_function("disk covariogram (4096-gon)", |b| {
        b.iter(|| disk.eval(black_box(Vec2::new(0.3, 0.4))))
    });
}

fn grids(c: &mut Criterion) {
    let square = Body::rectangle(0.0, 0.0, 1.0, 1.0).unwrap();
    let g = Covariogram::new(&square);
    c.bench_function("square covariogram 41x41", |b| {
        b.iter(|| CovariogramGrid::centered(&g, &[&square], [1.0, 1.0], 41, 41))
    });
}

fn transforms(c: &mut Criterion) {
    let body = trefoil();
    let u = Direction::new(0.3);
    c.bench_function("ray transform context (cw3)", |b| {
        b.iter(|| RayTransformContext::with_band(black_box(&body), u, band_for(40, 2.0)))
    });
    let ctx = RayTransformContext::with_band(&body, u, band_for(40, 2.0));
    c.bench_function("ray transform eval (cw3)", |b| {
        b.iter(|| ctx.eval(black_box(Complex64::new(60.0, -0.1))))
    });
    c.bench_function("track zero m = 40 (cw3)", |b| {
        b.iter(|| track_zero(&ctx, black_box(40)))
    });
}

criterion_group!(benches, clipping, grids, transforms);
criterion_main!(benches);

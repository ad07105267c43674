use std::f64::consts::PI;

use covario::clip::{intersection_area, intersection_area_reference};
use covario::covariogram::Covariogram;
use covario::fourier_laplace::{verify_reflection_identity, RayTransformContext};
use covario::oracles::{random_convex_polygon, stream_rng};
use covario::radon::ChordFunction;
use covario::{Body, Direction, Polygon, Vec2};
use num_complex::Complex64;
use proptest::prelude::*;

fn polygon(seed: u64, n: usize) -> Polygon {
    random_convex_polygon(n, &mut stream_rng(seed, 0))
}

fn vec2() -> impl Strategy<Value = Vec2> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(x, y)| Vec2::new(x, y))
}

/// Area of the intersection of two unit disks at distance `d`.
fn lens(d: f64) -> f64 {
    if d >= 2.0 {
        return 0.0;
    }
    2.0 * (d / 2.0).acos() - 0.5 * d * (4.0 - d * d).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn covariogram_is_even_and_bounded(seed in any::<u64>(), n in 3usize..12, x in vec2()) {
        let p = polygon(seed, n);
        let g = Covariogram::new(&Body::Polygon(p.clone()));
        let v = g.eval(x);
        prop_assert!((v - g.eval(-x)).abs() <= 1e-12 * p.area().max(1.0));
        prop_assert!(v >= 0.0 && v <= p.area() * (1.0 + 1e-12));
    }

    #[test]
    fn covariogram_ignores_translation(seed in any::<u64>(), n in 3usize..12, x in vec2(), shift in vec2()) {
        let p = polygon(seed, n);
        let g = Covariogram::new(&Body::Polygon(p.clone()));
        let moved = Covariogram::new(&Body::Polygon(p.translate(shift)));
        prop_assert!((g.eval(x) - moved.eval(x)).abs() <= 1e-12 * p.area().max(1.0));
    }

    #[test]
    fn covariogram_decreases_along_rays(seed in any::<u64>(), n in 3usize..12, theta in 0.0..(2.0 * PI)) {
        let p = polygon(seed, n);
        let g = Covariogram::new(&Body::Polygon(p.clone()));
        let u = Direction::new(theta).u();
        let mut prev = g.eval(Vec2::zeros());
        for i in 1..=30 {
            let v = g.eval(u * (0.2 * i as f64));
            prop_assert!(v <= prev + 1e-12);
            prev = v;
        }
    }

    #[test]
    fn clipping_matches_reference(a in any::<u64>(), b in any::<u64>(), na in 3usize..10, nb in 3usize..10, x in vec2()) {
        let p = polygon(a, na);
        let q = polygon(b, nb).translate(x);
        let fast = intersection_area(&p, &q);
        let slow = intersection_area_reference(&p, &q);
        prop_assert!((fast - slow).abs() <= 1e-12 * p.area().max(q.area()), "{fast} vs {slow}");
    }

    #[test]
    fn chord_function_integrates_to_area(seed in any::<u64>(), n in 3usize..12, theta in 0.0..(2.0 * PI)) {
        let p = polygon(seed, n);
        let chord = ChordFunction::new(&Body::Polygon(p.clone()), Direction::new(theta));
        prop_assert!((chord.integral() - p.area()).abs() <= 1e-12 * p.area());
    }

    #[test]
    fn support_shifts_with_translation(seed in any::<u64>(), n in 3usize..12, theta in 0.0..(2.0 * PI), x in vec2()) {
        let body = Body::Polygon(polygon(seed, n));
        let u = Direction::new(theta);
        let moved = body.translate(x);
        prop_assert!((moved.support(u) - body.support(u) - x.dot(&u.u())).abs() <= 1e-12);
    }

    #[test]
    fn reflection_identity_on_polygons(seed in any::<u64>(), n in 3usize..10, theta in 0.0..(2.0 * PI)) {
        let body = Body::Polygon(polygon(seed, n));
        let samples: Vec<Complex64> = (0..8).map(|i| Complex64::new(0.5 + 2.0 * i as f64, 0.3 - 0.1 * i as f64)).collect();
        let r = verify_reflection_identity(&body, Direction::new(theta), &samples).unwrap();
        prop_assert!(r.max_deviation <= 1e-12 * r.scale.max(1.0));
    }

    #[test]
    fn disk_covariogram_is_a_lens(d in 0.0..2.5f64, theta in 0.0..(2.0 * PI)) {
        let disk = Body::disk(Vec2::zeros(), 1.0).unwrap();
        let g = Covariogram::new(&disk);
        let v = g.eval(Direction::new(theta).u() * d);
        prop_assert!((v - lens(d)).abs() <= 1e-5, "{v} vs {}", lens(d));
    }
}

#[test]
fn square_covariogram_product_formula() {
    let g = Covariogram::new(&Body::rectangle(0.0, 0.0, 1.0, 1.0).unwrap());
    for j in 0..25 {
        for i in 0..25 {
            let x = Vec2::new(-1.2 + 0.1 * i as f64, -1.2 + 0.1 * j as f64);
            let exact = ((1.0 - x.x.abs()).max(0.0)) * ((1.0 - x.y.abs()).max(0.0));
            assert!((g.eval(x) - exact).abs() <= 1e-12, "{x:?}");
        }
    }
}

#[test]
fn disk_transform_is_a_bessel_quotient() {
    let disk = Body::disk(Vec2::zeros(), 1.0).unwrap();
    let ctx = RayTransformContext::new(&disk, Direction::new(0.0));
    // 2π J₁(3)/3 with J₁(3) = 0.3390589585259364.
    let f = ctx.eval(Complex64::new(3.0, 0.0)).unwrap();
    assert!((f.re - 2.0 * PI * 0.339_058_958_525_936_4 / 3.0).abs() < 1e-10, "{f}");
    assert!(f.im.abs() < 1e-10);
}

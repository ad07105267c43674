//! Covariograms `g_K(x) = area(K ∩ (K + x))`, cross covariograms
//! `g_{H,K}(x) = area(H ∩ (K + x))`, and the quantities they determine.
//!
//! Polygons are clipped exactly. Smooth bodies are replaced by inscribed
//! polygons through [`SMOOTH_BOUNDARY_POINTS`] boundary points, so area errors
//! are `O(N⁻²)` while every identity between covariogram values stays exact on
//! the approximation.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::clip;
use crate::error::{Error, Result};
use crate::geometry::{Body, BodySpec, Direction, Polygon, SupportBody, Vec2};

pub const SMOOTH_BOUNDARY_POINTS: usize = 4096;

/// Step of the one-sided difference quotient at the origin.
pub const MATHERON_STEP: f64 = 1e-4;

/// How covariogram values are computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactClip,
    PolylineApprox,
}

/// Exact area of `P ∩ Q`.
pub fn polygon_intersection_area(p: &Polygon, q: &Polygon) -> f64 {
    clip::intersection_area(p, q)
}

fn as_polygon(body: &Body, phase: f64) -> Polygon {
    body.polygonal_approx(SMOOTH_BOUNDARY_POINTS, phase)
}

/// Evaluator for `x ↦ area(H ∩ (K + x))`; the polygons are built once.
#[derive(Clone, Debug)]
pub struct Covariogram {
    h: Polygon,
    k: Polygon,
    method: Method,
}

impl Covariogram {
    /// The covariogram of a single body.
    pub fn new(body: &Body) -> Self {
        Self::with_phase(body, 0.0)
    }

    /// As [`Covariogram::new`], placing approximation vertices at normal
    /// angles `phase + 2πj/N`.
    pub fn with_phase(body: &Body, phase: f64) -> Self {
        let p = as_polygon(body, phase);
        Self {
            h: p.clone(),
            k: p,
            method: method_of(&[body]),
        }
    }

    /// The cross covariogram of `(H, K)`.
    pub fn cross(h: &Body, k: &Body) -> Self {
        Self {
            h: as_polygon(h, 0.0),
            k: as_polygon(k, 0.0),
            method: method_of(&[h, k]),
        }
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn eval(&self, x: Vec2) -> f64 {
        clip::intersection_area_translated(&self.h, &self.k, x)
    }

    /// `H + (−K)`, the closure of the set where the covariogram is positive.
    pub fn support_polygon(&self) -> Polygon {
        self.h.minkowski_sum(&self.k.reflect())
    }
}

fn method_of(bodies: &[&Body]) -> Method {
    if bodies.iter().all(|b| !b.is_smooth()) {
        Method::ExactClip
    } else {
        Method::PolylineApprox
    }
}

pub fn covariogram(k: &Body, x: Vec2) -> f64 {
    Covariogram::new(k).eval(x)
}

pub fn cross_covariogram(h: &Body, k: &Body, x: Vec2) -> f64 {
    Covariogram::cross(h, k).eval(x)
}

/// `H + (−K)` together with the largest deviation of its width from
/// `w_H + w_K` over a grid of `directions` directions.
#[derive(Clone, Debug)]
pub struct CrossSupport {
    pub polygon: Polygon,
    pub width_deviation: f64,
}

pub fn support_of_crosscov(h: &Body, k: &Body, directions: usize) -> CrossSupport {
    let polygon = Covariogram::cross(h, k).support_polygon();
    let width_deviation = Direction::grid(directions)
        .into_iter()
        .map(|u| {
            let w = polygon.support(u.u()) + polygon.support(-u.u());
            (w - h.width(u) - k.width(u)).abs()
        })
        .fold(0.0, f64::max);
    CrossSupport {
        polygon,
        width_deviation,
    }
}

/// The one-sided derivative of `g_K` at the origin in direction `v`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OriginDerivative {
    /// `−λ₁(K | v^⊥)`, the negated length of the projection onto `v^⊥`.
    pub geometric: f64,
    /// `(g_K(h v) − g_K(o)) / h` with `h = MATHERON_STEP`.
    pub finite_difference: f64,
}

pub fn directional_derivative_origin(k: &Body, v: Direction) -> OriginDerivative {
    let geometric = -k.width(Direction::new(v.theta() + 0.5 * PI));
    let g = Covariogram::new(k);
    let finite_difference = (g.eval(MATHERON_STEP * v.u()) - g.eval(Vec2::zeros())) / MATHERON_STEP;
    OriginDerivative {
        geometric,
        finite_difference,
    }
}

/// `w(θ) + w''(θ)`, which equals `1/τ(u) + 1/τ(−u)` for a smooth body.
pub fn sum_reciprocal_curvatures_from_width(k: &SupportBody, u: Direction) -> f64 {
    k.width(u.theta()) + k.width_d2(u.theta())
}

/// The unordered curvature pair `{τ(u), τ(−u)}` read off the covariogram.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvaturePair {
    pub low: f64,
    pub high: f64,
    pub theta: f64,
    /// Fitted `τ(u) + τ(−u)`.
    pub sum: f64,
    /// Fitted `(1/τ(u) + 1/τ(−u))⁻¹`.
    pub harmonic: f64,
    /// Root-mean-square relative residual of the two fits.
    pub residual: f64,
    pub samples: usize,
}

/// Covariogram values at arbitrary points; the only access the curvature fit
/// and the determination experiment have to a body.
pub trait CovariogramAccess: Sync {
    fn value(&self, x: Vec2) -> f64;
}

impl CovariogramAccess for Covariogram {
    fn value(&self, x: Vec2) -> f64 {
        self.eval(x)
    }
}

impl<F: Fn(Vec2) -> f64 + Sync> CovariogramAccess for F {
    fn value(&self, x: Vec2) -> f64 {
        self(x)
    }
}

/// Asymptotic constant `ω₁/(n² − 1)` for `n = 2`: near the boundary point `p`
/// of the support, `g(p − t u + q e) ≈ (2/3)(2t − Q q²)^{3/2} / √D`.
pub const CAP_CONSTANT: f64 = 2.0 / 3.0;

pub const FIT_DEPTHS: usize = 12;
pub const FIT_DEPTH_RANGE: (f64, f64) = (1e-4, 1e-2);
pub const FIT_OFFSET_DEPTH: f64 = 1e-3;
pub const FIT_OFFSETS: usize = 9;
/// Largest acceptable relative residual of either fit.
pub const FIT_MAX_RESIDUAL: f64 = 0.05;
/// Negative discriminants down to this fraction of `D²` count as an equal pair.
pub const FIT_DISC_TOL: f64 = 1e-4;

/// Locate the boundary point of `supp g` with outer normal `u`: the point
/// `p` with `⟨p, u⟩ = sup` over the support, found by bisection on `g` along
/// the ray and tangential centring.
pub fn support_boundary_point(g: &dyn CovariogramAccess, u: Direction, radius: f64) -> Vec2 {
    let uu = u.u();
    let e = u.perp();
    let positive = |x: Vec2| g.value(x) > 0.0;
    // Extent along u through the origin, then re-centre across e; two rounds
    // converge for strictly convex supports to well below the fit depths.
    // A tangential error ε moves the depth by O(ε²), so only the last
    // bisection runs to full precision.
    let edge = |base: Vec2, dir: Vec2, (mut a, mut b): (f64, f64), iterations: usize| {
        for _ in 0..iterations {
            let c = 0.5 * (a + b);
            if positive(base + c * dir) {
                a = c;
            } else {
                b = c;
            }
        }
        a
    };
    let full = (0.0, 2.0 * radius);
    let shift = 1e-3 * radius;
    let mut base = Vec2::zeros();
    let mut depth = 0.0;
    for _ in 0..2 {
        depth = edge(base, uu, full, 24);
        let inner = base + (depth - shift) * uu;
        let lo = edge(inner, -e, full, 24);
        let hi = edge(inner, e, full, 24);
        base = inner + 0.5 * (hi - lo) * e - (depth - shift) * uu;
    }
    let bracket = (depth - shift, depth + shift);
    let bracket = if positive(base + bracket.0 * uu) && !positive(base + bracket.1 * uu) {
        bracket
    } else {
        full
    };
    base + edge(base, uu, bracket, 48) * uu
}

/// Recover `{τ(u), τ(−u)}` from covariogram values near the support boundary.
///
/// `p` is the support boundary point with normal `u` (for a known smooth body,
/// `ν⁻¹(u) − ν⁻¹(−u)`). A first pass along the normal estimates `D`; the final
/// values come from one least-squares fit of `g^{2/3}` over the whole
/// `(t, q)` lattice by a quadratic in `t`, `q` whose `t` and `q²` coefficients
/// are `2κ` and `−κQ`, with `κ = (c'/√D)^{2/3}`. The constant and higher
/// terms absorb the discretization offset and the next-order corrections.
pub fn curvature_pair_fit(g: &dyn CovariogramAccess, u: Direction, p: Vec2) -> Result<CurvaturePair> {
    let uu = u.u();
    let e = u.perp();
    let (t0, t1) = FIT_DEPTH_RANGE;
    let ratio = (t1 / t0).powf(1.0 / (FIT_DEPTHS - 1) as f64);
    let depths: Vec<f64> = (0..FIT_DEPTHS).map(|i| t0 * ratio.powi(i as i32)).collect();
    let values: Vec<f64> = depths.iter().map(|&t| g.value(p - t * uu)).collect();
    if values.iter().any(|&v| v <= 0.0) {
        return Err(Error::FitFailed("covariogram vanishes inside the support".into()));
    }
    // log g = log(c' 2^{3/2} / √D) + (3/2) log t, exponent fixed.
    let intercepts: Vec<f64> = depths.iter().zip(&values).map(|(t, v)| v.ln() - 1.5 * t.ln()).collect();
    let mean = intercepts.iter().sum::<f64>() / intercepts.len() as f64;
    let rough_sum = (CAP_CONSTANT * 2f64.powf(1.5) / mean.exp()).powi(2);

    // Offsets with Q q² ≤ 0.81 t, using Q ≤ D/4.
    let mut rows = Vec::new();
    let mut ys = Vec::new();
    for &t in &depths {
        let q_max = 0.9 * (4.0 * t / rough_sum).sqrt();
        for j in 0..FIT_OFFSETS {
            let q = -q_max + 2.0 * q_max * j as f64 / (FIT_OFFSETS - 1) as f64;
            let v = g.value(p - t * uu + q * e);
            if v <= 0.0 {
                return Err(Error::FitFailed("covariogram vanishes inside the cap".into()));
            }
            // Columns scaled to order one on the lattice.
            let (ts, qs) = (t / t1, q / (4.0 * t1 / rough_sum).sqrt());
            rows.push([
                1.0,
                ts,
                qs * qs,
                ts * ts,
                ts * qs * qs,
                qs.powi(4),
                qs,
                qs * ts,
                qs.powi(3),
            ]);
            ys.push(v.powf(2.0 / 3.0));
        }
    }
    let n = rows.len();
    let a = DMatrix::from_fn(n, 9, |i, j| rows[i][j]);
    let y = DVector::from_vec(ys);
    let coef = a
        .clone()
        .svd(true, true)
        .solve(&y, 1e-14)
        .map_err(|m| Error::FitFailed(m.to_string()))?;
    let fitted = &a * &coef;
    let scale = y.amax();
    let residual = ((&fitted - &y).norm_squared() / n as f64).sqrt() / scale;
    let kappa = 0.5 * coef[1] / t1;
    let c_q2 = coef[2] / (4.0 * t1 / rough_sum);
    if !residual.is_finite() || residual > FIT_MAX_RESIDUAL || kappa <= 0.0 {
        return Err(Error::FitFailed(format!("residual {residual:e}, kappa {kappa:e}")));
    }
    let sum = CAP_CONSTANT * CAP_CONSTANT / kappa.powi(3);
    let harmonic = -c_q2 / kappa;
    // τ(u), τ(−u) are the roots of z² − D z + Q D.
    let disc = sum * sum - 4.0 * harmonic * sum;
    // Equal pairs sit on a double root; fit noise can push it slightly negative.
    let disc = if disc < 0.0 {
        if disc < -FIT_DISC_TOL * sum * sum {
            return Err(Error::FitFailed(format!("negative discriminant {disc:e}")));
        }
        0.0
    } else {
        disc
    };
    let root = disc.sqrt();
    Ok(CurvaturePair {
        low: 0.5 * (sum - root),
        high: 0.5 * (sum + root),
        theta: u.theta(),
        sum,
        harmonic,
        residual,
        samples: FIT_DEPTHS * (FIT_OFFSETS + 1),
    })
}

/// Curvature pair of a known smooth body from its (approximated) covariogram.
pub fn curvature_pair_from_covariogram(k: &Body, u: Direction) -> Result<CurvaturePair> {
    let p = k.boundary_point(u)? - k.boundary_point(u.antipode())?;
    // Put approximation vertices exactly at the two contact points.
    let g = Covariogram::with_phase(k, u.theta());
    curvature_pair_fit(&g, u, p)
}

/// Sampled covariogram values on a rectangular lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovariogramGrid {
    pub origin: [f64; 2],
    pub spacing: [f64; 2],
    pub nx: usize,
    pub ny: usize,
    /// Row-major with `x` varying fastest.
    pub values: Vec<f64>,
    pub method: Method,
    /// SHA-256 of the canonical JSON of each input body.
    pub bodies: Vec<String>,
}

/// Sidecar metadata written next to a grid CSV.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridSidecar {
    pub schema_version: u32,
    pub origin: [f64; 2],
    pub spacing: [f64; 2],
    pub nx: usize,
    pub ny: usize,
    pub method: Method,
    pub bodies: Vec<String>,
}

pub fn body_hash(body: &Body) -> String {
    let json = serde_json::to_string(&BodySpec::from_body(body)).expect("body specs serialize");
    let digest = Sha256::digest(json.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

impl CovariogramGrid {
    /// Sample `g` at `origin + (i Δx, j Δy)`, in parallel with deterministic
    /// ordering.
    pub fn sample(
        g: &Covariogram,
        bodies: &[&Body],
        origin: [f64; 2],
        spacing: [f64; 2],
        nx: usize,
        ny: usize,
    ) -> Self {
        let values = (0..nx * ny)
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx % nx, idx / nx);
                g.eval(Vec2::new(
                    origin[0] + spacing[0] * i as f64,
                    origin[1] + spacing[1] * j as f64,
                ))
            })
            .collect();
        Self {
            origin,
            spacing,
            nx,
            ny,
            values,
            method: g.method(),
            bodies: bodies.iter().map(|b| body_hash(b)).collect(),
        }
    }

    /// An `nx × ny` lattice symmetric about the origin covering `[−ex, ex] × [−ey, ey]`.
    pub fn centered(g: &Covariogram, bodies: &[&Body], extent: [f64; 2], nx: usize, ny: usize) -> Self {
        let step = |e: f64, n: usize| if n > 1 { 2.0 * e / (n - 1) as f64 } else { 0.0 };
        let spacing = [step(extent[0], nx), step(extent[1], ny)];
        let origin = [
            if nx > 1 { -extent[0] } else { 0.0 },
            if ny > 1 { -extent[1] } else { 0.0 },
        ];
        Self::sample(g, bodies, origin, spacing, nx, ny)
    }

    pub fn point(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(
            self.origin[0] + self.spacing[0] * i as f64,
            self.origin[1] + self.spacing[1] * j as f64,
        )
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    /// Largest absolute difference to another grid on the same lattice.
    pub fn max_deviation(&self, other: &CovariogramGrid) -> Result<f64> {
        if (self.nx, self.ny, self.origin, self.spacing) != (other.nx, other.ny, other.origin, other.spacing) {
            return Err(Error::InvalidArgument("grids are on different lattices".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,value\n");
        for j in 0..self.ny {
            for i in 0..self.nx {
                let p = self.point(i, j);
                out.push_str(&format!("{},{},{}\n", p.x, p.y, self.value(i, j)));
            }
        }
        out
    }

    pub fn sidecar(&self) -> GridSidecar {
        GridSidecar {
            schema_version: 1,
            origin: self.origin,
            spacing: self.spacing,
            nx: self.nx,
            ny: self.ny,
            method: self.method,
            bodies: self.bodies.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{example_pair, FamilyParams};
    use crate::oracles::{lens_area, mc_area};

    fn unit_square() -> Body {
        Body::rectangle(0.0, 0.0, 1.0, 1.0).unwrap()
    }

    fn trefoil() -> Body {
        Body::support_series(1.0, vec![(0.0, 0.0), (0.0, 0.0), (0.05, 0.0)]).unwrap()
    }

    #[test]
    fn intersection_examples() {
        let sq = match unit_square() {
            Body::Polygon(p) => p,
            _ => unreachable!(),
        };
        assert_eq!(polygon_intersection_area(&sq, &sq), 1.0);
        assert!((polygon_intersection_area(&sq, &sq.translate(Vec2::new(0.5, 0.0))) - 0.5).abs() < 1e-15);
        let tri = Polygon::new(vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)]).unwrap();
        let moved = tri.translate(Vec2::new(0.2, 0.2));
        let exact = polygon_intersection_area(&tri, &moved);
        let mc = mc_area(
            |x, y| tri.contains(Vec2::new(x, y)) && moved.contains(Vec2::new(x, y)),
            [0.0, 0.0],
            [1.0, 1.0],
            1_000_000,
            11,
        );
        assert!(mc.sigmas(exact) < 3.0, "{exact} vs {mc:?}");
        // The overlap is a right triangle with legs 0.6.
        assert!((exact - 0.18).abs() < 1e-15);
    }

    #[test]
    fn covariogram_examples() {
        assert!((covariogram(&unit_square(), Vec2::new(0.5, 0.5)) - 0.25).abs() < 1e-15);
        let disk = Body::disk(Vec2::zeros(), 1.0).unwrap();
        let v = covariogram(&disk, Vec2::new(1.0, 0.0));
        assert!((lens_area(1.0, 1.0) - (2.0 * PI / 3.0 - 3f64.sqrt() / 2.0)).abs() < 1e-15);
        assert!((v - lens_area(1.0, 1.0)).abs() < 1e-5);
        for body in [unit_square(), disk, trefoil()] {
            let g0 = covariogram(&body, Vec2::zeros());
            let tol = if body.is_smooth() { 1e-5 } else { 1e-15 };
            assert!((g0 - body.area()).abs() < tol);
        }
    }

    #[test]
    fn cross_covariogram_examples() {
        let sq = unit_square();
        assert_eq!(cross_covariogram(&sq, &sq, Vec2::zeros()), 1.0);
        assert_eq!(cross_covariogram(&sq, &sq, Vec2::new(5.0, 0.0)), 0.0);
        let p = FamilyParams::default();
        let (h1, k1) = example_pair(1, &p).unwrap();
        let (h2, k2) = example_pair(2, &p).unwrap();
        let x = Vec2::new(0.3, 0.1);
        let a = cross_covariogram(&h1, &k1, x);
        let b = cross_covariogram(&h2, &k2, x);
        assert!(a > 0.0);
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn support_of_cross_covariogram() {
        let sq = unit_square();
        let s = support_of_crosscov(&sq, &sq, 360);
        assert!(s.width_deviation < 1e-12);
        assert!((s.polygon.support(Vec2::x()) - 1.0).abs() < 1e-15);
        assert!((s.polygon.support(-Vec2::x()) - 1.0).abs() < 1e-15);
        let d1 = Body::disk(Vec2::zeros(), 1.0).unwrap();
        let d2 = Body::disk(Vec2::zeros(), 2.0).unwrap();
        let s = support_of_crosscov(&d1, &d2, 360);
        let w = s.polygon.support(Vec2::x()) + s.polygon.support(-Vec2::x());
        assert!((w - 6.0).abs() < 1e-12);
        for fam in [1u8, 2] {
            let (h, k) = example_pair(fam, &FamilyParams::default()).unwrap();
            let s = support_of_crosscov(&h, &k, 360);
            assert_eq!(s.polygon.len(), 8);
            assert!(s.width_deviation < 1e-12);
        }
    }

    #[test]
    fn matheron_examples() {
        let d = directional_derivative_origin(&unit_square(), Direction::new(0.0));
        assert_eq!(d.geometric, -1.0);
        assert!((d.finite_difference + 1.0).abs() < 1e-3);
        let disk = Body::disk(Vec2::zeros(), 1.0).unwrap();
        let d = directional_derivative_origin(&disk, Direction::new(0.4));
        assert_eq!(d.geometric, -2.0);
        assert!((d.finite_difference + 2.0).abs() < 1e-3);
        let d = directional_derivative_origin(&trefoil(), Direction::new(0.0));
        assert!((d.geometric + 2.0).abs() < 1e-14);
        assert!((d.finite_difference + 2.0).abs() < 1e-3);
    }

    #[test]
    fn reciprocal_curvature_sums() {
        let unit = SupportBody::new(1.0, vec![]).unwrap();
        assert!((sum_reciprocal_curvatures_from_width(&unit, Direction::new(0.3)) - 2.0).abs() < 1e-14);
        let cw = SupportBody::new(1.0, vec![(0.0, 0.0), (0.0, 0.0), (0.05, 0.0)]).unwrap();
        let oval = SupportBody::new(1.0, vec![(0.0, 0.0), (0.02, 0.0)]).unwrap();
        assert!((sum_reciprocal_curvatures_from_width(&oval, Direction::new(0.0)) - 1.88).abs() < 1e-14);
        for body in [cw, oval] {
            for u in Direction::grid(90) {
                let expected = body.radius_of_curvature(u.theta()) + body.radius_of_curvature(u.theta() + PI);
                assert!((sum_reciprocal_curvatures_from_width(&body, u) - expected).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn curvature_pair_examples() {
        let disk = Body::disk(Vec2::zeros(), 1.0).unwrap();
        let pair = curvature_pair_from_covariogram(&disk, Direction::new(0.0)).unwrap();
        assert!(
            (pair.low - 1.0).abs() < 0.02 && (pair.high - 1.0).abs() < 0.02,
            "{pair:?}"
        );
        assert!((pair.harmonic * pair.sum / (pair.sum * pair.sum / 4.0) - 1.0).abs() < 0.02);
        let pair = curvature_pair_from_covariogram(&trefoil(), Direction::new(0.0)).unwrap();
        assert!((pair.low / (1.0 / 1.4) - 1.0).abs() < 0.05, "{pair:?}");
        assert!((pair.high / (1.0 / 0.6) - 1.0).abs() < 0.05, "{pair:?}");
    }

    #[test]
    fn black_box_boundary_point() {
        let body = trefoil().translate(Vec2::new(0.3, -0.2));
        let g = Covariogram::new(&body);
        let u = Direction::new(0.7);
        let p = support_boundary_point(&g, u, 2.0 * body.radius_bound() + 1.0);
        let exact = body.boundary_point(u).unwrap() - body.boundary_point(u.antipode()).unwrap();
        assert!((p - exact).norm() < 1e-3, "{p:?} vs {exact:?}");
    }

    #[test]
    fn grid_layout_and_csv() {
        let sq = unit_square();
        let g = Covariogram::new(&sq);
        let grid = CovariogramGrid::centered(&g, &[&sq], [1.0, 1.0], 41, 41);
        assert_eq!(grid.value(20, 20), 1.0);
        assert_eq!(grid.point(20, 20), Vec2::zeros());
        assert_eq!(grid.method, Method::ExactClip);
        let csv = grid.to_csv();
        assert_eq!(csv.lines().count(), 41 * 41 + 1);
        assert_eq!(csv, CovariogramGrid::centered(&g, &[&sq], [1.0, 1.0], 41, 41).to_csv());
        assert_eq!(grid.bodies[0].len(), 64);
    }
}

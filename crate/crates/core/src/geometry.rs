//! Planar convex bodies and their support, width and curvature primitives.
//!
//! Three representations are supported: convex polygons (exact kernels),
//! bodies given by a truncated Fourier series of their support function
//! (closed-form derivatives, hence closed-form curvature), and disks.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec2 = nalgebra::Vector2<f64>;

/// Highest harmonic accepted in a support-function series.
pub const MAX_HARMONIC: usize = 32;
/// Number of grid points used to validate the C2+ condition.
pub const C2_CHECK_POINTS: usize = 4096;
/// Minimal admissible radius of curvature on the validation grid.
pub const C2_MARGIN: f64 = 1e-9;
/// Relative tolerance for dropping collinear polygon vertices.
pub const COLLINEAR_TOL: f64 = 1e-12;

#[inline]
pub fn cross(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// A unit direction `u = (cos θ, sin θ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Direction {
    theta: f64,
    u: Vec2,
}

impl Direction {
    pub fn new(theta: f64) -> Self {
        let theta = wrap_angle(theta);
        Self {
            theta,
            u: Vec2::new(theta.cos(), theta.sin()),
        }
    }

    pub fn from_vector(v: Vec2) -> Self {
        Self::new(v.y.atan2(v.x))
    }

    /// `n` equally spaced directions starting at angle 0.
    pub fn grid(n: usize) -> Vec<Direction> {
        (0..n).map(|i| Self::new(TAU * i as f64 / n as f64)).collect()
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn u(&self) -> Vec2 {
        self.u
    }

    /// `u` rotated by +π/2.
    pub fn perp(&self) -> Vec2 {
        Vec2::new(-self.u.y, self.u.x)
    }

    pub fn antipode(&self) -> Self {
        Self::new(self.theta + PI)
    }
}

/// A closed line segment with distinct endpoints.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    p: Vec2,
    q: Vec2,
}

impl Segment {
    pub fn new(p: Vec2, q: Vec2) -> Result<Self> {
        if (p - q).norm() == 0.0 || !(p.iter().chain(q.iter()).all(|c| c.is_finite())) {
            return Err(Error::DegenerateSegment);
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> Vec2 {
        self.p
    }

    pub fn q(&self) -> Vec2 {
        self.q
    }

    pub fn midpoint(&self) -> Vec2 {
        0.5 * (self.p + self.q)
    }

    pub fn half_vector(&self) -> Vec2 {
        0.5 * (self.q - self.p)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(factor * self.p, factor * self.q)
    }
}

/// A convex polygon with counterclockwise vertices.
///
/// Construction drops repeated and collinear vertices and rotates the vertex
/// list so that it starts at the lexicographically smallest vertex, which
/// makes vertex-wise comparison of equal polygons meaningful.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon {
    vertices: Vec<Vec2>,
}

impl Polygon {
    pub fn new(vertices: Vec<Vec2>) -> Result<Self> {
        if vertices.iter().any(|v| !v.x.is_finite() || !v.y.is_finite()) {
            return Err(Error::InvalidPolygon("non-finite coordinate".into()));
        }
        let scale = vertices
            .iter()
            .map(|v| v.abs().max())
            .fold(0.0_f64, f64::max)
            .max(f64::MIN_POSITIVE);
        let mut vs: Vec<Vec2> = Vec::with_capacity(vertices.len());
        for v in vertices {
            if vs.last().is_none_or(|l: &Vec2| (v - l).norm() > 1e-14 * scale) {
                vs.push(v);
            }
        }
        while vs.len() > 1 && (vs[0] - vs[vs.len() - 1]).norm() <= 1e-14 * scale {
            vs.pop();
        }
        if vs.len() < 3 {
            return Err(Error::InvalidPolygon(format!(
                "{} distinct vertices, need at least 3",
                vs.len()
            )));
        }
        if signed_area(&vs) < 0.0 {
            vs.reverse();
        }
        // Drop collinear vertices until every turn is strictly convex.
        loop {
            let n = vs.len();
            if n < 3 {
                return Err(Error::InvalidPolygon("all vertices are collinear".into()));
            }
            let mut drop = None;
            for i in 0..n {
                let a = vs[(i + n - 1) % n];
                let b = vs[i];
                let c = vs[(i + 1) % n];
                let (e1, e2) = (b - a, c - b);
                let turn = cross(e1, e2);
                let tol = COLLINEAR_TOL * e1.norm() * e2.norm();
                if turn.abs() <= tol {
                    drop = Some(i);
                    break;
                }
                if turn < 0.0 {
                    return Err(Error::NotConvex { vertex: i });
                }
            }
            match drop {
                Some(i) => {
                    vs.remove(i);
                }
                None => break,
            }
        }
        // Convex turns everywhere still allow a polygon that winds twice.
        let n = vs.len();
        let turning: f64 = (0..n)
            .map(|i| {
                let e1 = vs[(i + 1) % n] - vs[i];
                let e2 = vs[(i + 2) % n] - vs[(i + 1) % n];
                cross(e1, e2).atan2(e1.dot(&e2))
            })
            .sum();
        if (turning - TAU).abs() > 1e-6 {
            return Err(Error::InvalidPolygon("vertex sequence winds more than once".into()));
        }
        let start = (0..n)
            .min_by(|&i, &j| vs[i].x.total_cmp(&vs[j].x).then(vs[i].y.total_cmp(&vs[j].y)))
            .unwrap();
        vs.rotate_left(start);
        Ok(Self { vertices: vs })
    }

    /// Builds a polygon from points already known to be strictly convex and
    /// counterclockwise (used for dense approximations of smooth bodies).
    pub(crate) fn from_convex_ccw_unchecked(vertices: Vec<Vec2>) -> Self {
        Self { vertices }
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Edges as `(start, end)` pairs in counterclockwise order.
    pub fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn support(&self, u: Vec2) -> f64 {
        self.vertices
            .iter()
            .map(|v| v.dot(&u))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of a vertex attaining the support value in direction `u`.
    pub fn support_vertex(&self, u: Vec2) -> usize {
        let mut best = 0;
        let mut best_val = f64::NEG_INFINITY;
        for (i, v) in self.vertices.iter().enumerate() {
            let val = v.dot(&u);
            if val > best_val {
                best = i;
                best_val = val;
            }
        }
        best
    }

    pub fn contains(&self, p: Vec2) -> bool {
        self.edges().all(|(a, b)| cross(b - a, p - a) >= 0.0)
    }

    pub fn centroid(&self) -> Vec2 {
        let n = self.vertices.len();
        let mut c = Vec2::zeros();
        let mut a2 = 0.0;
        for i in 0..n {
            let p = self.vertices[i];
            let q = self.vertices[(i + 1) % n];
            let w = cross(p, q);
            a2 += w;
            c += (p + q) * w;
        }
        c / (3.0 * a2)
    }

    pub fn translate(&self, x: Vec2) -> Self {
        Self {
            vertices: canonical_start(self.vertices.iter().map(|v| v + x).collect()),
        }
    }

    pub fn reflect(&self) -> Self {
        Self {
            vertices: canonical_start(self.vertices.iter().map(|v| -v).collect()),
        }
    }

    /// Exact Minkowski sum by merging the edge sequences by angle.
    pub fn minkowski_sum(&self, other: &Polygon) -> Polygon {
        let a = rotate_to_lowest(&self.vertices);
        let b = rotate_to_lowest(&other.vertices);
        let (na, nb) = (a.len(), b.len());
        let mut out = Vec::with_capacity(na + nb);
        let (mut i, mut j) = (0usize, 0usize);
        while i < na || j < nb {
            out.push(a[i % na] + b[j % nb]);
            let ea = a[(i + 1) % na] - a[i % na];
            let eb = b[(j + 1) % nb] - b[j % nb];
            let c = cross(ea, eb);
            if c >= 0.0 && i < na {
                i += 1;
            }
            if c <= 0.0 && j < nb {
                j += 1;
            }
        }
        Polygon::new(out).expect("Minkowski sum of convex polygons is convex")
    }
}

fn signed_area(vs: &[Vec2]) -> f64 {
    let n = vs.len();
    0.5 * (0..n).map(|i| cross(vs[i], vs[(i + 1) % n])).sum::<f64>()
}

fn canonical_start(mut vs: Vec<Vec2>) -> Vec<Vec2> {
    let start = (0..vs.len())
        .min_by(|&i, &j| vs[i].x.total_cmp(&vs[j].x).then(vs[i].y.total_cmp(&vs[j].y)))
        .unwrap_or(0);
    vs.rotate_left(start);
    vs
}

// Rotates so the first vertex is the bottom-most (then left-most); edge angles
// are then increasing in [0, 2π).
fn rotate_to_lowest(vs: &[Vec2]) -> Vec<Vec2> {
    let start = (0..vs.len())
        .min_by(|&i, &j| vs[i].y.total_cmp(&vs[j].y).then(vs[i].x.total_cmp(&vs[j].x)))
        .unwrap_or(0);
    let mut out = vs.to_vec();
    out.rotate_left(start);
    out
}

/// A smooth body given by its support function
/// `h(θ) = a0 + Σ_k (a_k cos kθ + b_k sin kθ)` about `offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportBody {
    a0: f64,
    coeffs: Vec<(f64, f64)>,
    offset: Vec2,
}

impl SupportBody {
    pub fn new(a0: f64, coeffs: Vec<(f64, f64)>) -> Result<Self> {
        Self::with_offset(a0, coeffs, Vec2::zeros())
    }

    pub fn with_offset(a0: f64, coeffs: Vec<(f64, f64)>, offset: Vec2) -> Result<Self> {
        if coeffs.len() > MAX_HARMONIC {
            return Err(Error::InvalidSupportBody(format!(
                "{} harmonics exceed the maximum of {MAX_HARMONIC}",
                coeffs.len()
            )));
        }
        if !a0.is_finite()
            || coeffs.iter().any(|(a, b)| !a.is_finite() || !b.is_finite())
            || !offset.x.is_finite()
            || !offset.y.is_finite()
        {
            return Err(Error::InvalidSupportBody("non-finite coefficient".into()));
        }
        let body = Self { a0, coeffs, offset };
        for i in 0..C2_CHECK_POINTS {
            let theta = TAU * i as f64 / C2_CHECK_POINTS as f64;
            let rho = body.radius_of_curvature(theta);
            if rho <= C2_MARGIN {
                return Err(Error::NotC2Plus { theta, rho });
            }
            if body.h_local(theta) <= 0.0 {
                return Err(Error::InvalidSupportBody(format!(
                    "support function is not positive at theta = {theta}"
                )));
            }
        }
        Ok(body)
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn coeffs(&self) -> &[(f64, f64)] {
        &self.coeffs
    }

    pub fn offset(&self) -> Vec2 {
        self.offset
    }

    // Σ_k k^p (a_k, b_k) evaluated with the p-th derivative phase shift.
    fn series(&self, theta: f64, deriv: u32) -> f64 {
        let mut s = if deriv == 0 { self.a0 } else { 0.0 };
        for (k, &(a, b)) in self.coeffs.iter().enumerate() {
            let k = (k + 1) as f64;
            let (sn, cs) = (k * theta).sin_cos();
            let kp = k.powi(deriv as i32);
            s += kp
                * match deriv % 4 {
                    0 => a * cs + b * sn,
                    1 => -a * sn + b * cs,
                    2 => -(a * cs + b * sn),
                    _ => a * sn - b * cs,
                };
        }
        s
    }

    fn h_local(&self, theta: f64) -> f64 {
        self.series(theta, 0)
    }

    /// Support function value `h(θ)`, including the offset.
    pub fn h(&self, theta: f64) -> f64 {
        self.series(theta, 0) + self.offset.x * theta.cos() + self.offset.y * theta.sin()
    }

    pub fn dh(&self, theta: f64) -> f64 {
        self.series(theta, 1) - self.offset.x * theta.sin() + self.offset.y * theta.cos()
    }

    pub fn d2h(&self, theta: f64) -> f64 {
        self.series(theta, 2) - self.offset.x * theta.cos() - self.offset.y * theta.sin()
    }

    /// `ρ = h + h''`, the radius of curvature at the boundary point with normal angle θ.
    pub fn radius_of_curvature(&self, theta: f64) -> f64 {
        self.series(theta, 0) + self.series(theta, 2)
    }

    /// d/dθ of ρ; used when locating chord endpoints.
    pub fn d_radius_of_curvature(&self, theta: f64) -> f64 {
        self.series(theta, 1) + self.series(theta, 3)
    }

    /// Boundary point `x(θ) = h(θ)(cos θ, sin θ) + h'(θ)(−sin θ, cos θ)`.
    pub fn boundary_point(&self, theta: f64) -> Vec2 {
        let (s, c) = theta.sin_cos();
        let h = self.h_local(theta);
        let dh = self.series(theta, 1);
        Vec2::new(h * c - dh * s, h * s + dh * c) + self.offset
    }

    /// Width `h(θ) + h(θ+π)`; only even harmonics survive.
    pub fn width(&self, theta: f64) -> f64 {
        let mut w = 2.0 * self.a0;
        for (k, &(a, b)) in self.coeffs.iter().enumerate() {
            let k1 = k + 1;
            if k1 % 2 == 0 {
                let (sn, cs) = (k1 as f64 * theta).sin_cos();
                w += 2.0 * (a * cs + b * sn);
            }
        }
        w
    }

    /// Second derivative of the width function.
    pub fn width_d2(&self, theta: f64) -> f64 {
        let mut w = 0.0;
        for (k, &(a, b)) in self.coeffs.iter().enumerate() {
            let k1 = k + 1;
            if k1 % 2 == 0 {
                let kf = k1 as f64;
                let (sn, cs) = (kf * theta).sin_cos();
                w -= 2.0 * kf * kf * (a * cs + b * sn);
            }
        }
        w
    }

    pub fn area(&self) -> f64 {
        let mut area = PI * self.a0 * self.a0;
        for (k, &(a, b)) in self.coeffs.iter().enumerate() {
            let k = (k + 1) as f64;
            area += 0.5 * PI * (1.0 - k * k) * (a * a + b * b);
        }
        area
    }

    pub fn translate(&self, x: Vec2) -> Self {
        Self {
            a0: self.a0,
            coeffs: self.coeffs.clone(),
            offset: self.offset + x,
        }
    }

    /// Support function of `−K`: `h(θ + π)`.
    pub fn reflect(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &(a, b))| if k % 2 == 0 { (-a, -b) } else { (a, b) })
            .collect();
        Self {
            a0: self.a0,
            coeffs,
            offset: -self.offset,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Disk {
    center: Vec2,
    radius: f64,
}

impl Disk {
    pub fn new(center: Vec2, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || !center.x.is_finite() || !center.y.is_finite() {
            return Err(Error::InvalidDisk(radius));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> Vec2 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// A planar convex body.
#[derive(Clone, Debug, PartialEq)]
pub enum Body {
    Polygon(Polygon),
    Support(SupportBody),
    Disk(Disk),
}

/// Translation or reflection in the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Transform {
    Translate(Vec2),
    Reflect,
}

impl Body {
    pub fn polygon(vertices: Vec<Vec2>) -> Result<Self> {
        Polygon::new(vertices).map(Body::Polygon)
    }

    pub fn disk(center: Vec2, radius: f64) -> Result<Self> {
        Disk::new(center, radius).map(Body::Disk)
    }

    pub fn support_series(a0: f64, coeffs: Vec<(f64, f64)>) -> Result<Self> {
        SupportBody::new(a0, coeffs).map(Body::Support)
    }

    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        Self::polygon(vec![
            Vec2::new(x0, y0),
            Vec2::new(x1, y0),
            Vec2::new(x1, y1),
            Vec2::new(x0, y1),
        ])
    }

    pub fn is_smooth(&self) -> bool {
        !matches!(self, Body::Polygon(_))
    }

    pub fn support(&self, u: Direction) -> f64 {
        match self {
            Body::Polygon(p) => p.support(u.u()),
            Body::Support(s) => s.h(u.theta()),
            Body::Disk(d) => d.center.dot(&u.u()) + d.radius,
        }
    }

    pub fn width(&self, u: Direction) -> f64 {
        match self {
            Body::Support(s) => s.width(u.theta()),
            Body::Disk(d) => 2.0 * d.radius,
            Body::Polygon(_) => self.support(u) + self.support(u.antipode()),
        }
    }

    /// The boundary point with outer normal `u`.
    pub fn boundary_point(&self, u: Direction) -> Result<Vec2> {
        match self {
            Body::Polygon(_) => Err(Error::PolygonNotSmooth),
            Body::Support(s) => Ok(s.boundary_point(u.theta())),
            Body::Disk(d) => Ok(d.center + d.radius * u.u()),
        }
    }

    /// Curvature `τ(u) = 1/(h + h'')` at the boundary point with normal `u`.
    pub fn curvature(&self, u: Direction) -> Result<f64> {
        match self {
            Body::Polygon(_) => Err(Error::PolygonNotSmooth),
            Body::Support(s) => Ok(1.0 / s.radius_of_curvature(u.theta())),
            Body::Disk(d) => Ok(1.0 / d.radius),
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Body::Polygon(p) => p.area(),
            Body::Support(s) => s.area(),
            Body::Disk(d) => PI * d.radius * d.radius,
        }
    }

    /// An interior point: the centroid for polygons, the offset/center otherwise.
    pub fn reference_point(&self) -> Vec2 {
        match self {
            Body::Polygon(p) => p.centroid(),
            Body::Support(s) => s.offset(),
            Body::Disk(d) => d.center,
        }
    }

    /// Upper bound on `|x|` over the body.
    pub fn radius_bound(&self) -> f64 {
        match self {
            Body::Polygon(p) => p.vertices().iter().map(|v| v.norm()).fold(0.0, f64::max),
            Body::Disk(d) => d.center.norm() + d.radius,
            Body::Support(s) => {
                let mut r = s.a0.abs();
                for &(a, b) in &s.coeffs {
                    r += a.abs() + b.abs();
                }
                r + s.offset.norm()
            }
        }
    }

    /// Inscribed polygon through `n` boundary points at normal angles
    /// `phase + 2πj/n`. Polygons are returned unchanged.
    pub fn polygonal_approx(&self, n: usize, phase: f64) -> Polygon {
        match self {
            Body::Polygon(p) => p.clone(),
            _ => {
                let vs = (0..n)
                    .map(|j| {
                        let u = Direction::new(phase + TAU * j as f64 / n as f64);
                        self.boundary_point(u).expect("smooth body")
                    })
                    .collect();
                Polygon::from_convex_ccw_unchecked(canonical_start(vs))
            }
        }
    }

    pub fn transform(&self, op: Transform) -> Body {
        match op {
            Transform::Translate(x) => self.translate(x),
            Transform::Reflect => self.reflect(),
        }
    }

    pub fn translate(&self, x: Vec2) -> Body {
        match self {
            Body::Polygon(p) => Body::Polygon(p.translate(x)),
            Body::Support(s) => Body::Support(s.translate(x)),
            Body::Disk(d) => Body::Disk(Disk {
                center: d.center + x,
                radius: d.radius,
            }),
        }
    }

    pub fn reflect(&self) -> Body {
        match self {
            Body::Polygon(p) => Body::Polygon(p.reflect()),
            Body::Support(s) => Body::Support(s.reflect()),
            Body::Disk(d) => Body::Disk(Disk {
                center: -d.center,
                radius: d.radius,
            }),
        }
    }

    /// Support-function series of a smooth body (a disk becomes `a0 = r` plus offset).
    pub fn as_support_body(&self) -> Option<SupportBody> {
        match self {
            Body::Support(s) => Some(s.clone()),
            Body::Disk(d) => Some(SupportBody {
                a0: d.radius,
                coeffs: Vec::new(),
                offset: d.center,
            }),
            Body::Polygon(_) => None,
        }
    }
}

/// Minkowski sum `center + Σ segments`.
pub fn zonogon(center: Vec2, generators: &[Segment]) -> Result<Polygon> {
    if generators.is_empty() {
        return Err(Error::DegenerateZonogon);
    }
    let mut c = center;
    // Half-vectors oriented into the angle range [0, π).
    let mut halves: Vec<Vec2> = Vec::new();
    for g in generators {
        c += g.midpoint();
        let mut s = g.half_vector();
        if s.y < 0.0 || (s.y == 0.0 && s.x < 0.0) {
            s = -s;
        }
        let n = s.norm();
        match halves
            .iter_mut()
            .find(|h| cross(**h, s).abs() <= COLLINEAR_TOL * h.norm() * n)
        {
            Some(h) => *h += s,
            None => halves.push(s),
        }
    }
    if halves.len() < 2 {
        return Err(Error::DegenerateZonogon);
    }
    halves.sort_by(|a, b| a.y.atan2(a.x).total_cmp(&b.y.atan2(b.x)));
    let mut v = c - halves.iter().sum::<Vec2>();
    let mut vertices = Vec::with_capacity(2 * halves.len());
    for s in halves.iter().chain(halves.iter()).enumerate() {
        vertices.push(v);
        let (i, s) = s;
        if i < halves.len() {
            v += 2.0 * s;
        } else {
            v -= 2.0 * s;
        }
    }
    Polygon::new(vertices)
}

/// Parameters of the parallelogram families with equal cross covariograms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub alpha_p: f64,
    pub beta_p: f64,
    pub gamma_p: f64,
    pub delta_p: f64,
    pub m: f64,
    pub y: [f64; 2],
    pub y_p: [f64; 2],
}

impl Default for FamilyParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
            delta: 1.0,
            alpha_p: 1.0,
            beta_p: 1.0,
            gamma_p: 2.0,
            delta_p: 1.0,
            m: 1.0,
            y: [0.0, 0.0],
            y_p: [0.0, 0.0],
        }
    }
}

impl FamilyParams {
    pub fn validate(&self, family: u8) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidFamilyParams(format!("{name} = {v} must be positive")))
            }
        };
        match family {
            1 | 2 => {
                positive("alpha", self.alpha)?;
                positive("beta", self.beta)?;
                positive("gamma", self.gamma)?;
                positive("delta", self.delta)?;
            }
            3 | 4 => {
                positive("alpha'", self.alpha_p)?;
                positive("beta'", self.beta_p)?;
                positive("gamma'", self.gamma_p)?;
                positive("delta'", self.delta_p)?;
                if !self.m.is_finite() {
                    return Err(Error::InvalidFamilyParams("m must be finite".into()));
                }
                if self.alpha_p == self.gamma_p {
                    return Err(Error::InvalidFamilyParams("alpha' must differ from gamma'".into()));
                }
                if self.m == 0.0 && self.beta_p == self.delta_p {
                    return Err(Error::InvalidFamilyParams(
                        "with m = 0, beta' must differ from delta'".into(),
                    ));
                }
            }
            f => return Err(Error::InvalidFamilyParams(format!("unknown family {f}"))),
        }
        if self.y.iter().chain(self.y_p.iter()).any(|c| !c.is_finite()) {
            return Err(Error::InvalidFamilyParams("non-finite translation".into()));
        }
        Ok(())
    }
}

/// The five generating segments `I_1 … I_5` (the last depends on the slope `m`).
pub fn family_segments(m: f64) -> [Segment; 5] {
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let k = 1.0 / (1.0 + m * m).sqrt();
    let seg = |p: [f64; 2], q: [f64; 2]| Segment {
        p: Vec2::new(p[0], p[1]),
        q: Vec2::new(q[0], q[1]),
    };
    [
        seg([-1.0, 0.0], [1.0, 0.0]),
        seg([-s2, -s2], [s2, s2]),
        seg([0.0, -1.0], [0.0, 1.0]),
        seg([s2, -s2], [-s2, s2]),
        seg([-m * k, -k], [m * k, k]),
    ]
}

/// The pair `(H_i, K_i)` of family `i ∈ {1, 2, 3, 4}`.
pub fn example_pair(family: u8, p: &FamilyParams) -> Result<(Body, Body)> {
    p.validate(family)?;
    let [i1, i2, i3, i4, i5] = family_segments(p.m);
    let y = Vec2::new(p.y[0], p.y[1]);
    let yp = Vec2::new(p.y_p[0], p.y_p[1]);
    let z = |c: Vec2, gens: &[(f64, Segment)]| -> Result<Body> {
        let segs = gens.iter().map(|(f, s)| s.scaled(*f)).collect::<Result<Vec<_>>>()?;
        Ok(Body::Polygon(zonogon(c, &segs)?))
    };
    let o = Vec2::zeros();
    match family {
        1 => Ok((
            z(o, &[(p.alpha, i1), (p.beta, i2)])?,
            z(y, &[(p.gamma, i3), (p.delta, i4)])?,
        )),
        2 => Ok((
            z(o, &[(p.alpha, i1), (p.delta, i4)])?,
            z(y, &[(p.beta, i2), (p.gamma, i3)])?,
        )),
        3 => Ok((
            z(o, &[(p.alpha_p, i1), (p.beta_p, i3)])?,
            z(yp, &[(p.gamma_p, i1), (p.delta_p, i5)])?,
        )),
        4 => Ok((
            z(o, &[(p.gamma_p, i1), (p.beta_p, i3)])?,
            z(yp, &[(p.alpha_p, i1), (p.delta_p, i5)])?,
        )),
        _ => unreachable!("validated above"),
    }
}

/// JSON body description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BodySpec {
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
    Support2d {
        a0: f64,
        #[serde(default)]
        coeffs: Vec<[f64; 2]>,
        #[serde(default)]
        offset: Option<[f64; 2]>,
    },
    Disk {
        center: [f64; 2],
        radius: f64,
    },
    Zonogon {
        center: [f64; 2],
        generators: Vec<[[f64; 2]; 2]>,
    },
}

fn v2(a: [f64; 2]) -> Vec2 {
    Vec2::new(a[0], a[1])
}

impl BodySpec {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_body(&self) -> Result<Body> {
        match self {
            BodySpec::Polygon { vertices } => Body::polygon(vertices.iter().copied().map(v2).collect()),
            BodySpec::Support2d { a0, coeffs, offset } => SupportBody::with_offset(
                *a0,
                coeffs.iter().map(|c| (c[0], c[1])).collect(),
                offset.map(v2).unwrap_or_else(Vec2::zeros),
            )
            .map(Body::Support),
            BodySpec::Disk { center, radius } => Body::disk(v2(*center), *radius),
            BodySpec::Zonogon { center, generators } => {
                let segs = generators
                    .iter()
                    .map(|[p, q]| Segment::new(v2(*p), v2(*q)))
                    .collect::<Result<Vec<_>>>()?;
                zonogon(v2(*center), &segs).map(Body::Polygon)
            }
        }
    }

    pub fn from_body(body: &Body) -> Self {
        match body {
            Body::Polygon(p) => BodySpec::Polygon {
                vertices: p.vertices().iter().map(|v| [v.x, v.y]).collect(),
            },
            Body::Support(s) => BodySpec::Support2d {
                a0: s.a0,
                coeffs: s.coeffs.iter().map(|&(a, b)| [a, b]).collect(),
                offset: (s.offset != Vec2::zeros()).then(|| [s.offset.x, s.offset.y]),
            },
            Body::Disk(d) => BodySpec::Disk {
                center: [d.center.x, d.center.y],
                radius: d.radius,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn unit_square() -> Body {
        Body::rectangle(0.0, 0.0, 1.0, 1.0).unwrap()
    }

    fn trefoil() -> Body {
        Body::support_series(1.0, vec![(0.0, 0.0), (0.0, 0.0), (0.05, 0.0)]).unwrap()
    }

    #[test]
    fn support_examples() {
        assert_eq!(unit_square().support(Direction::new(0.0)), 1.0);
        let disk = Body::disk(Vec2::zeros(), 2.0).unwrap();
        for u in Direction::grid(17) {
            assert!((disk.support(u) - 2.0).abs() < 1e-15);
        }
        let (h1, _) = example_pair(1, &FamilyParams::default()).unwrap();
        assert!((h1.support(Direction::new(0.0)) - (1.0 + FRAC_1_SQRT_2)).abs() < 1e-14);
    }

    #[test]
    fn width_examples() {
        let disk = Body::disk(Vec2::new(0.3, -2.0), 1.0).unwrap();
        let cw = trefoil();
        for u in Direction::grid(360) {
            assert!((disk.width(u) - 2.0).abs() < 1e-15);
            assert!((cw.width(u) - 2.0).abs() < 1e-14);
            assert!((cw.width(u) - cw.support(u) - cw.support(u.antipode())).abs() < 1e-14);
        }
        let w = unit_square().width(Direction::new(PI / 4.0));
        assert!((w - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn boundary_point_examples() {
        let disk = Body::disk(Vec2::zeros(), 1.0).unwrap();
        let p = disk.boundary_point(Direction::new(0.0)).unwrap();
        assert!((p - Vec2::new(1.0, 0.0)).norm() < 1e-15);
        let unit = Body::support_series(1.0, vec![]).unwrap();
        let p = unit.boundary_point(Direction::new(PI / 2.0)).unwrap();
        assert!((p - Vec2::new(0.0, 1.0)).norm() < 1e-15);
        let p = trefoil().boundary_point(Direction::new(0.0)).unwrap();
        assert!((p - Vec2::new(1.05, 0.0)).norm() < 1e-15);
        assert!(matches!(
            unit_square().boundary_point(Direction::new(0.3)),
            Err(Error::PolygonNotSmooth)
        ));
    }

    #[test]
    fn boundary_point_attains_support() {
        let body = Body::Support(
            SupportBody::with_offset(1.2, vec![(0.1, -0.05), (0.02, 0.03), (0.01, 0.0)], Vec2::new(0.4, -0.7)).unwrap(),
        );
        for u in Direction::grid(360) {
            let x = body.boundary_point(u).unwrap();
            assert!((x.dot(&u.u()) - body.support(u)).abs() < 1e-12);
        }
    }

    #[test]
    fn curvature_examples() {
        for r in [0.5, 1.0, 3.0] {
            let disk = Body::disk(Vec2::new(1.0, 1.0), r).unwrap();
            for u in Direction::grid(36) {
                assert_eq!(disk.curvature(u).unwrap() * r, 1.0);
            }
        }
        let cw = trefoil();
        assert!((cw.curvature(Direction::new(0.0)).unwrap() - 1.0 / 0.6).abs() < 1e-12);
        assert!((cw.curvature(Direction::new(PI)).unwrap() - 1.0 / 1.4).abs() < 1e-12);
    }

    #[test]
    fn c2_violation_is_rejected() {
        // ρ = 1 − 8·0.2 cos 3θ goes negative.
        let err = Body::support_series(1.0, vec![(0.0, 0.0), (0.0, 0.0), (0.2, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::NotC2Plus { .. }));
        let too_many = vec![(0.0, 0.0); MAX_HARMONIC + 1];
        assert!(SupportBody::new(1.0, too_many).is_err());
    }

    #[test]
    fn support_body_area_matches_polygonal_approximation() {
        let cw = trefoil();
        let approx = cw.polygonal_approx(8192, 0.0).area();
        assert!((cw.area() - approx).abs() < 1e-6);
        assert!((cw.area() - PI * (1.0 - 4.0 * 0.05 * 0.05)).abs() < 1e-14);
    }

    #[test]
    fn zonogon_examples() {
        let [i1, i2, i3, _, _] = family_segments(0.0);
        let sq = zonogon(Vec2::zeros(), &[i1, i3]).unwrap();
        let expected = Polygon::new(vec![
            Vec2::new(-1.0, -1.0),
            Vec2::new(1.0, -1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(-1.0, 1.0),
        ])
        .unwrap();
        assert_eq!(sq, expected);
        let par = zonogon(Vec2::zeros(), &[i1, i2]).unwrap();
        assert_eq!(par.len(), 4);
        let s = FRAC_1_SQRT_2;
        for sx in [-1.0, 1.0] {
            for sy in [-1.0, 1.0] {
                let v = Vec2::new(sx * 1.0 + sy * s, sy * s);
                assert!(par.vertices().iter().any(|w| (w - v).norm() < 1e-15));
            }
        }
        assert!(matches!(zonogon(Vec2::zeros(), &[i1]), Err(Error::DegenerateZonogon)));
        let i1b = i1.scaled(2.0).unwrap();
        assert!(matches!(
            zonogon(Vec2::zeros(), &[i1, i1b]),
            Err(Error::DegenerateZonogon)
        ));
    }

    #[test]
    fn zonogon_area_formula() {
        let gens = [
            Segment::new(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.2)).unwrap(),
            Segment::new(Vec2::new(1.0, 1.0), Vec2::new(0.7, 2.0)).unwrap(),
            Segment::new(Vec2::new(-1.0, 0.5), Vec2::new(-1.5, -0.5)).unwrap(),
        ];
        let z = zonogon(Vec2::new(0.3, 0.1), &gens).unwrap();
        assert_eq!(z.len(), 6);
        let mut expected = 0.0;
        for i in 0..gens.len() {
            for j in i + 1..gens.len() {
                expected += cross(gens[i].half_vector(), gens[j].half_vector()).abs();
            }
        }
        assert!((z.area() - 4.0 * expected).abs() < 1e-12);
    }

    #[test]
    fn example_pair_examples() {
        let p = FamilyParams::default();
        let (h1, k1) = example_pair(1, &p).unwrap();
        let [i1, i2, i3, i4, _] = family_segments(0.0);
        assert_eq!(h1, Body::Polygon(zonogon(Vec2::zeros(), &[i1, i2]).unwrap()));
        assert_eq!(k1, Body::Polygon(zonogon(Vec2::zeros(), &[i3, i4]).unwrap()));

        let p3 = FamilyParams {
            m: 0.0,
            alpha_p: 1.0,
            gamma_p: 2.0,
            beta_p: 1.0,
            delta_p: 2.0,
            ..FamilyParams::default()
        };
        let (h3, k3) = example_pair(3, &p3).unwrap();
        assert_eq!(h3, Body::rectangle(-1.0, -1.0, 1.0, 1.0).unwrap());
        assert_eq!(k3, Body::rectangle(-2.0, -2.0, 2.0, 2.0).unwrap());

        let bad = FamilyParams {
            alpha: 0.0,
            ..FamilyParams::default()
        };
        assert!(matches!(example_pair(1, &bad), Err(Error::InvalidFamilyParams(_))));
        let bad3 = FamilyParams {
            m: 0.0,
            beta_p: 1.0,
            delta_p: 1.0,
            ..FamilyParams::default()
        };
        assert!(example_pair(3, &bad3).is_err());
        let bad3 = FamilyParams {
            alpha_p: 2.0,
            gamma_p: 2.0,
            ..FamilyParams::default()
        };
        assert!(example_pair(4, &bad3).is_err());
        assert!(example_pair(5, &p).is_err());
    }

    #[test]
    fn transform_examples() {
        let r = unit_square().reflect();
        assert_eq!(r, Body::rectangle(-1.0, -1.0, 0.0, 0.0).unwrap());
        let d = Body::disk(Vec2::zeros(), 1.0).unwrap().translate(Vec2::new(3.0, 0.0));
        assert_eq!(d, Body::disk(Vec2::new(3.0, 0.0), 1.0).unwrap());
        let cw = Body::Support(SupportBody::new(1.0, vec![(0.03, 0.01), (0.0, 0.02), (0.05, 0.0)]).unwrap());
        let rcw = cw.transform(Transform::Reflect);
        for u in Direction::grid(90) {
            assert!((rcw.support(u) - cw.support(u.antipode())).abs() < 1e-14);
        }
        assert_eq!(rcw.reflect(), cw);
    }

    #[test]
    fn polygon_canonicalization() {
        let a = Polygon::new(vec![
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(0.0, 0.0),
            Vec2::new(0.5, 0.0),
            Vec2::new(1.0, 0.0),
        ])
        .unwrap();
        assert_eq!(a.len(), 4);
        assert_eq!(a.vertices()[0], Vec2::new(0.0, 0.0));
        assert!(a.area() > 0.0);
        let reflex = Polygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(1.0, 0.3),
            Vec2::new(2.0, 2.0),
            Vec2::new(0.0, 2.0),
        ]);
        assert!(matches!(reflex, Err(Error::NotConvex { .. })));
        assert!(Polygon::new(vec![Vec2::zeros(), Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0)]).is_err());
    }

    #[test]
    fn minkowski_sum_of_squares() {
        let a = Polygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ])
        .unwrap();
        let s = a.minkowski_sum(&a.reflect());
        assert_eq!(
            s,
            Polygon::new(vec![
                Vec2::new(-1.0, -1.0),
                Vec2::new(1.0, -1.0),
                Vec2::new(1.0, 1.0),
                Vec2::new(-1.0, 1.0),
            ])
            .unwrap()
        );
    }

    #[test]
    fn body_spec_json() {
        let spec = BodySpec::parse(r#"{"kind":"support2d","a0":1.0,"coeffs":[[0,0],[0,0],[0.05,0]]}"#).unwrap();
        assert_eq!(spec.to_body().unwrap(), trefoil());
        let z = BodySpec::parse(r#"{"kind":"zonogon","center":[0,0],"generators":[[[-1,0],[1,0]],[[0,-1],[0,1]]]}"#)
            .unwrap();
        assert!((z.to_body().unwrap().area() - 4.0).abs() < 1e-15);
        let err = BodySpec::parse("{\"kind\":\"disk\",\n \"center\":[0,0], \"radius\": }").unwrap_err();
        assert!(matches!(err, Error::Json { line: 2, .. }));
        assert!(BodySpec::parse(r#"{"kind":"disk","center":[0,0],"radius":1,"extra":2}"#).is_err());
        let back = BodySpec::from_body(&trefoil());
        assert_eq!(back.to_body().unwrap(), trefoil());
    }
}

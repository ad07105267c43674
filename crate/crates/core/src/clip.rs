//! Intersection of convex polygons.
//!
//! The main kernel intersects the edge half-planes of both polygons in a
//! single angular sweep, which is linear in the total vertex count once the
//! two (already angle-sorted) edge lists are merged. Sutherland-Hodgman
//! clipping is kept as an independent quadratic-time reference.

use std::collections::VecDeque;

use crate::geometry::{cross, Polygon, Vec2};

const PARALLEL_EPS: f64 = 1e-13;

#[derive(Clone, Copy, Debug)]
struct HalfPlane {
    p: Vec2,
    // Unit direction; the admissible side is to the left.
    d: Vec2,
    angle: f64,
}

impl HalfPlane {
    fn new(a: Vec2, b: Vec2) -> Self {
        let d = (b - a).normalize();
        Self {
            p: a,
            d,
            angle: d.y.atan2(d.x),
        }
    }

    #[inline]
    fn out(&self, r: Vec2, eps: f64) -> bool {
        cross(self.d, r - self.p) < -eps
    }

    #[inline]
    fn intersect(&self, other: &HalfPlane) -> Vec2 {
        let alpha = cross(other.p - self.p, other.d) / cross(self.d, other.d);
        self.p + self.d * alpha
    }
}

fn half_planes_by_angle(poly: &Polygon) -> Vec<HalfPlane> {
    let mut hs: Vec<HalfPlane> = poly.edges().map(|(a, b)| HalfPlane::new(a, b)).collect();
    // Edge angles of a convex polygon increase cyclically; rotate to the minimum.
    let start = (0..hs.len())
        .min_by(|&i, &j| hs[i].angle.total_cmp(&hs[j].angle))
        .unwrap_or(0);
    hs.rotate_left(start);
    hs
}

/// Vertices of `P ∩ Q` (counterclockwise), or `None` when the intersection has
/// no interior.
pub fn convex_intersection(p: &Polygon, q: &Polygon) -> Option<Vec<Vec2>> {
    let a = half_planes_by_angle(p);
    let b = half_planes_by_angle(q);
    let mut merged = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j >= b.len() || (i < a.len() && a[i].angle <= b[j].angle) {
            merged.push(a[i]);
            i += 1;
        } else {
            merged.push(b[j]);
            j += 1;
        }
    }
    let scale = p
        .vertices()
        .iter()
        .chain(q.vertices())
        .map(|v| v.abs().max())
        .fold(1.0_f64, f64::max);
    half_plane_intersection(&merged, 1e-14 * scale)
}

fn half_plane_intersection(hs: &[HalfPlane], eps: f64) -> Option<Vec<Vec2>> {
    let mut dq: VecDeque<HalfPlane> = VecDeque::with_capacity(hs.len());
    for h in hs {
        while dq.len() > 1 && h.out(dq[dq.len() - 1].intersect(&dq[dq.len() - 2]), eps) {
            dq.pop_back();
        }
        while dq.len() > 1 && h.out(dq[0].intersect(&dq[1]), eps) {
            dq.pop_front();
        }
        if let Some(last) = dq.back() {
            if cross(h.d, last.d).abs() < PARALLEL_EPS {
                if h.d.dot(&last.d) < 0.0 {
                    return None;
                }
                if h.out(last.p, 0.0) {
                    dq.pop_back();
                } else {
                    continue;
                }
            }
        }
        dq.push_back(*h);
    }
    while dq.len() > 2 && dq[0].out(dq[dq.len() - 1].intersect(&dq[dq.len() - 2]), eps) {
        dq.pop_back();
    }
    while dq.len() > 2 && dq[dq.len() - 1].out(dq[0].intersect(&dq[1]), eps) {
        dq.pop_front();
    }
    if dq.len() < 3 {
        return None;
    }
    let n = dq.len();
    Some((0..n).map(|k| dq[k].intersect(&dq[(k + 1) % n])).collect())
}

fn shoelace(vs: &[Vec2]) -> f64 {
    let n = vs.len();
    0.5 * (0..n).map(|i| cross(vs[i], vs[(i + 1) % n])).sum::<f64>()
}

/// Area of `P ∩ Q`; zero when the polygons are disjoint or only touch.
pub fn intersection_area(p: &Polygon, q: &Polygon) -> f64 {
    // Cheap rejection on bounding boxes.
    let (pl, ph) = bbox(p.vertices());
    let (ql, qh) = bbox(q.vertices());
    if pl.x >= qh.x || ql.x >= ph.x || pl.y >= qh.y || ql.y >= ph.y {
        return 0.0;
    }
    convex_intersection(p, q)
        .map(|vs| shoelace(&vs).max(0.0))
        .unwrap_or(0.0)
}

fn bbox(vs: &[Vec2]) -> (Vec2, Vec2) {
    let mut lo = Vec2::repeat(f64::INFINITY);
    let mut hi = Vec2::repeat(f64::NEG_INFINITY);
    for v in vs {
        lo = lo.inf(v);
        hi = hi.sup(v);
    }
    (lo, hi)
}

/// Area of `P ∩ (Q + x)` without materializing the translate.
pub fn intersection_area_translated(p: &Polygon, q: &Polygon, x: Vec2) -> f64 {
    intersection_area(p, &q.translate(x))
}

/// Sutherland-Hodgman clipping of `subject` by the convex `clip` polygon.
pub fn sutherland_hodgman(subject: &[Vec2], clip: &Polygon) -> Vec<Vec2> {
    let mut out: Vec<Vec2> = subject.to_vec();
    for (a, b) in clip.edges() {
        if out.is_empty() {
            break;
        }
        let input = std::mem::take(&mut out);
        let inside = |p: Vec2| cross(b - a, p - a) >= 0.0;
        let n = input.len();
        for k in 0..n {
            let cur = input[k];
            let prev = input[(k + n - 1) % n];
            let (ci, pi) = (inside(cur), inside(prev));
            if ci != pi {
                let d = cur - prev;
                let t = cross(b - a, a - prev) / cross(b - a, d);
                out.push(prev + d * t);
            }
            if ci {
                out.push(cur);
            }
        }
    }
    out
}

/// Reference area of `P ∩ Q` by Sutherland-Hodgman.
pub fn intersection_area_reference(p: &Polygon, q: &Polygon) -> f64 {
    let vs = sutherland_hodgman(p.vertices(), q);
    if vs.len() < 3 {
        0.0
    } else {
        shoelace(&vs).max(0.0)
    }
}

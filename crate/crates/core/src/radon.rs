//! Chord-length (Radon) transform `S_K(u, t)` of planar bodies and its
//! one-dimensional autocorrelation.
//!
//! For a smooth body the chord function factors as
//! `S(t) = √((t − lo)(hi − t)) · G(t)` with `G` analytic on `[lo, hi]`, so
//! [`ChordFunction`] stores a Chebyshev expansion of `G` built from exact
//! root-solved chords. Polygons and disks are evaluated exactly.

use std::f64::consts::PI;

use crate::geometry::{Body, Direction, Polygon, SupportBody, Vec2};
use crate::quadrature::{cosine_map_panels, gauss_legendre};

/// Order of the Gauss-Legendre panels used by chord quadratures.
pub const PANEL_ORDER: usize = 64;
/// Largest phase increment `|ω|·width` allowed on one panel.
pub const PANEL_PHASE: f64 = 24.0;

/// Exact chord length of `body` on the line `⟨x, u⟩ = t`.
pub fn radon(body: &Body, u: Direction, t: f64) -> f64 {
    match body {
        Body::Polygon(p) => polygon_chord(p, u, t),
        Body::Disk(d) => disk_chord(d.center().dot(&u.u()), d.radius(), t),
        Body::Support(s) => support_chord(s, u, t),
    }
}

fn disk_chord(center_proj: f64, radius: f64, t: f64) -> f64 {
    let d = t - center_proj;
    let q = (radius - d) * (radius + d);
    if q > 0.0 {
        2.0 * q.sqrt()
    } else {
        0.0
    }
}

fn polygon_chord(p: &Polygon, u: Direction, t: f64) -> f64 {
    let (uu, perp) = (u.u(), u.perp());
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (a, b) in p.edges() {
        let fa = a.dot(&uu) - t;
        let fb = b.dot(&uu) - t;
        if fa == 0.0 && fb == 0.0 {
            for q in [a, b] {
                let s = q.dot(&perp);
                lo = lo.min(s);
                hi = hi.max(s);
            }
        } else if (fa <= 0.0 && fb >= 0.0) || (fa >= 0.0 && fb <= 0.0) {
            let x = a + (b - a) * (fa / (fa - fb));
            let s = x.dot(&perp);
            lo = lo.min(s);
            hi = hi.max(s);
        }
    }
    if hi > lo {
        hi - lo
    } else {
        0.0
    }
}

// Safeguarded Newton for a monotone f on [a, b] with f(a)·f(b) ≤ 0.
fn monotone_root<F: Fn(f64) -> (f64, f64)>(f: F, mut a: f64, mut b: f64) -> f64 {
    let (fa, _) = f(a);
    let (fb, _) = f(b);
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    let increasing = fb > fa;
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return x;
        }
        if (fx < 0.0) == increasing {
            a = x;
        } else {
            b = x;
        }
        let newton = x - fx / dfx;
        let next = if dfx != 0.0 && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        if (next - x).abs() <= 1e-15 * (1.0 + x.abs()) || (b - a) <= 1e-15 * (1.0 + x.abs()) {
            return next;
        }
        x = next;
    }
    x
}

fn support_chord(s: &SupportBody, u: Direction, t: f64) -> f64 {
    let phi = u.theta();
    let hi = s.h(phi);
    let lo = -s.h(phi + PI);
    if t <= lo || t >= hi {
        return 0.0;
    }
    let uu = u.u();
    // ⟨x(θ), u⟩ increases on [φ − π, φ] and decreases on [φ, φ + π].
    let f = |theta: f64| {
        let x = s.boundary_point(theta);
        (x.dot(&uu) - t, s.radius_of_curvature(theta) * (phi - theta).sin())
    };
    let th1 = monotone_root(f, phi - PI, phi);
    let th2 = monotone_root(f, phi, phi + PI);
    (s.boundary_point(th1) - s.boundary_point(th2)).dot(&u.perp()).abs()
}

/// How a [`ChordFunction`] evaluates `S(t)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChordMethod {
    /// Edge traversal of a polygon.
    ExactPolygon,
    /// Closed form for a disk.
    ClosedForm,
    /// Chebyshev expansion of `S / √((t − lo)(hi − t))` fitted to root-solved chords.
    Chebyshev,
}

#[derive(Clone, Debug)]
enum Repr {
    Polygon(Polygon),
    Disk { center_proj: f64, radius: f64 },
    Chebyshev(Vec<f64>),
}

/// `t ↦ S_K(u, t)` for a fixed direction, supported on `[lo, hi]`.
#[derive(Clone, Debug)]
pub struct ChordFunction {
    direction: Direction,
    lo: f64,
    hi: f64,
    // Sorted vertex projections (polygons only).
    breaks: Vec<f64>,
    repr: Repr,
}

impl ChordFunction {
    pub fn new(body: &Body, u: Direction) -> Self {
        let lo = -body.support(u.antipode());
        let hi = body.support(u);
        match body {
            Body::Polygon(p) => {
                let mut breaks: Vec<f64> = p.vertices().iter().map(|v| v.dot(&u.u())).collect();
                breaks.sort_by(f64::total_cmp);
                breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * (1.0 + b.abs()));
                Self {
                    direction: u,
                    lo,
                    hi,
                    breaks,
                    repr: Repr::Polygon(p.clone()),
                }
            }
            Body::Disk(d) => Self {
                direction: u,
                lo,
                hi,
                breaks: Vec::new(),
                repr: Repr::Disk {
                    center_proj: d.center().dot(&u.u()),
                    radius: d.radius(),
                },
            },
            Body::Support(s) => Self {
                direction: u,
                lo,
                hi,
                breaks: Vec::new(),
                repr: Repr::Chebyshev(fit_chebyshev(s, u, lo, hi)),
            },
        }
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn method(&self) -> ChordMethod {
        match self.repr {
            Repr::Polygon(_) => ChordMethod::ExactPolygon,
            Repr::Disk { .. } => ChordMethod::ClosedForm,
            Repr::Chebyshev(_) => ChordMethod::Chebyshev,
        }
    }

    /// True when `S` behaves like a square root at both ends of its support.
    pub fn has_sqrt_ends(&self) -> bool {
        !matches!(self.repr, Repr::Polygon(_))
    }

    /// Points of `[lo, hi]` where `S` has a kink (polygon vertex projections,
    /// endpoints included).
    pub fn breakpoints(&self) -> Vec<f64> {
        match self.repr {
            Repr::Polygon(_) => self.breaks.clone(),
            _ => vec![self.lo, self.hi],
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= self.lo || t >= self.hi {
            return 0.0;
        }
        match &self.repr {
            Repr::Polygon(p) => polygon_chord(p, self.direction, t),
            Repr::Disk { center_proj, radius } => disk_chord(*center_proj, *radius, t),
            Repr::Chebyshev(c) => {
                let r = 0.5 * (self.hi - self.lo);
                let x = (t - 0.5 * (self.lo + self.hi)) / r;
                let root = ((t - self.lo) * (self.hi - t)).max(0.0).sqrt();
                root * clenshaw(c, x.clamp(-1.0, 1.0))
            }
        }
    }

    /// `S` at `t = c − r cos φ` divided by `r sin φ` (the regular factor `G`).
    fn regular_factor(&self, phi: f64) -> f64 {
        match &self.repr {
            Repr::Chebyshev(c) => clenshaw(c, -phi.cos()),
            Repr::Disk { radius, .. } => 2.0 * radius / (0.5 * (self.hi - self.lo)),
            Repr::Polygon(_) => unreachable!("polygons use breakpoint panels"),
        }
    }

    /// Weighted samples `(t_k, w_k)` with `∫ S(t) F(t) dt ≈ Σ w_k F(t_k)` for
    /// `F` of bandwidth up to `max_freq`; `S` itself is folded into `w_k`.
    pub fn weighted_nodes(&self, max_freq: f64) -> Vec<(f64, f64)> {
        let rule = gauss_legendre(PANEL_ORDER);
        let mut out = Vec::new();
        match self.repr {
            Repr::Polygon(_) => {
                let max_w = PANEL_PHASE / max_freq.max(1.0);
                for w in self.breaks.windows(2) {
                    let (a, b) = (w[0], w[1]);
                    let k = ((b - a) / max_w).ceil().max(1.0) as usize;
                    for j in 0..k {
                        let pa = a + (b - a) * j as f64 / k as f64;
                        let pb = a + (b - a) * (j + 1) as f64 / k as f64;
                        for (t, wt) in rule.mapped(pa, pb) {
                            out.push((t, wt * self.eval(t)));
                        }
                    }
                }
            }
            _ => {
                let c = 0.5 * (self.lo + self.hi);
                let r = 0.5 * (self.hi - self.lo);
                let max_w = (PANEL_PHASE / (max_freq.max(1.0) * r)).min(PI / 8.0);
                for (pa, pb) in cosine_map_panels(PI / 4.0, max_w) {
                    for (phi, wt) in rule.mapped(pa, pb) {
                        let s = phi.sin();
                        let t = c - r * phi.cos();
                        // S dt = (r sin φ) G · r sin φ dφ
                        out.push((t, wt * r * r * s * s * self.regular_factor(phi)));
                    }
                }
            }
        }
        out
    }

    /// `∫ S(u, t) dt`; equals the area of the body.
    pub fn integral(&self) -> f64 {
        self.weighted_nodes(1.0).iter().map(|(_, w)| w).sum()
    }
}

fn clenshaw(c: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    x * b1 - b2 + c[0]
}

// Chebyshev coefficients of G(x) = S(t(x)) / √((t−lo)(hi−t)), t = c + r x,
// doubling the degree until the tail is negligible.
fn fit_chebyshev(s: &SupportBody, u: Direction, lo: f64, hi: f64) -> Vec<f64> {
    let c = 0.5 * (lo + hi);
    let r = 0.5 * (hi - lo);
    let mut n = 64;
    loop {
        let samples: Vec<f64> = (0..n)
            .map(|k| {
                let theta = PI * (k as f64 + 0.5) / n as f64;
                let x = theta.cos();
                let t = c + r * x;
                support_chord(s, u, t) / (r * theta.sin())
            })
            .collect();
        let coeffs: Vec<f64> = (0..n)
            .map(|j| {
                let sum: f64 = samples
                    .iter()
                    .enumerate()
                    .map(|(k, g)| g * (PI * j as f64 * (k as f64 + 0.5) / n as f64).cos())
                    .sum();
                let f = if j == 0 { 1.0 } else { 2.0 };
                f * sum / n as f64
            })
            .collect();
        let scale = coeffs.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let tail = coeffs[n - 8..].iter().map(|x| x.abs()).fold(0.0, f64::max);
        if tail <= 1e-14 * scale || n >= 1024 {
            let mut coeffs = coeffs;
            while coeffs.len() > 1 && coeffs.last().unwrap().abs() <= 1e-17 * scale {
                coeffs.pop();
            }
            return coeffs;
        }
        n *= 2;
    }
}

/// `∫ S(u, t) S(u, t + s) dt`, the Radon transform of the covariogram in
/// direction `u` at offset `s`.
pub fn chord_autocorrelation(body: &Body, u: Direction, s: f64) -> f64 {
    autocorrelation(&ChordFunction::new(body, u), s)
}

/// [`chord_autocorrelation`] for a prebuilt chord function.
pub fn autocorrelation(chord: &ChordFunction, s: f64) -> f64 {
    let s = s.abs();
    let (a, b) = (chord.lo(), chord.hi() - s);
    if b <= a {
        return 0.0;
    }
    let rule = gauss_legendre(PANEL_ORDER / 2);
    let f = |t: f64| chord.eval(t) * chord.eval(t + s);
    if chord.has_sqrt_ends() {
        // √ endpoints at both ends of the overlap, with the partner factor
        // singular a distance `s` outside; grade towards both ends.
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        let end = (0.25 * (2.0 * s / r).sqrt()).min(PI / 4.0);
        cosine_map_panels(end, PI / 8.0)
            .into_iter()
            .map(|(pa, pb)| rule.integrate(pa, pb, |phi| f(c - r * phi.cos()) * r * phi.sin()))
            .sum()
    } else {
        let mut cuts: Vec<f64> = chord
            .breakpoints()
            .iter()
            .flat_map(|&p| [p, p - s])
            .filter(|&p| p > a && p < b)
            .collect();
        cuts.push(a);
        cuts.push(b);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let rule = gauss_legendre(4);
        cuts.windows(2).map(|w| rule.integrate(w[0], w[1], f)).sum()
    }
}

/// Γ((n + 1)/2) for a positive integer `n`.
fn gamma_half_integer(n: u32) -> f64 {
    // Γ(1) = 1, Γ(1/2) = √π, Γ(x + 1) = x Γ(x).
    let x2 = n + 1; // 2x
    let (mut g, mut k2) = if x2.is_multiple_of(2) { (1.0, 2) } else { (PI.sqrt(), 1) };
    while k2 < x2 {
        g *= k2 as f64 / 2.0;
        k2 += 2;
    }
    g
}

/// Leading coefficients `(a0, b0)` of the square-root behaviour of the chord
/// function at the lower and upper ends of its support:
/// `S ≈ a0 (t − lo)^{1/2}` and `S ≈ b0 (hi − t)^{1/2}`.
pub fn leading_coefficients(body: &Body, u: Direction) -> crate::Result<(f64, f64)> {
    let n = 2u32;
    let c = (2.0 * PI).powf((n as f64 - 1.0) / 2.0) / gamma_half_integer(n);
    let tau_minus = body.curvature(u.antipode())?;
    let tau_plus = body.curvature(u)?;
    Ok((c / tau_minus.sqrt(), c / tau_plus.sqrt()))
}

/// Chord endpoints of the line `⟨x, u⟩ = t` through a polygon, if any.
pub fn polygon_chord_endpoints(p: &Polygon, u: Direction, t: f64) -> Option<(Vec2, Vec2)> {
    let len = polygon_chord(p, u, t);
    if len <= 0.0 {
        return None;
    }
    let perp = u.perp();
    let mut pts: Vec<Vec2> = Vec::new();
    for (a, b) in p.edges() {
        let fa = a.dot(&u.u()) - t;
        let fb = b.dot(&u.u()) - t;
        if (fa <= 0.0 && fb >= 0.0) || (fa >= 0.0 && fb <= 0.0) {
            if fa == fb {
                pts.push(a);
                pts.push(b);
            } else {
                pts.push(a + (b - a) * (fa / (fa - fb)));
            }
        }
    }
    let lo = pts.iter().min_by(|x, y| x.dot(&perp).total_cmp(&y.dot(&perp)))?;
    let hi = pts.iter().max_by(|x, y| x.dot(&perp).total_cmp(&y.dot(&perp)))?;
    Some((*lo, *hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trefoil() -> Body {
        Body::support_series(1.0, vec![(0.0, 0.0), (0.0, 0.0), (0.05, 0.0)]).unwrap()
    }

    #[test]
    fn radon_examples() {
        let disk = Body::disk(Vec2::zeros(), 1.0).unwrap();
        assert_eq!(radon(&disk, Direction::new(0.0), 0.0), 2.0);
        let sq = Body::rectangle(0.0, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(radon(&sq, Direction::new(0.0), 0.5), 1.0);
        assert_eq!(radon(&sq, Direction::new(0.0), 1.5), 0.0);
    }

    #[test]
    fn support_chord_matches_dense_polygon() {
        let cw = trefoil();
        let u = Direction::new(0.0);
        let exact = radon(&cw, u, 0.3);
        let approx = radon(&Body::Polygon(cw.polygonal_approx(4096, 0.0)), u, 0.3);
        assert!((exact - approx).abs() < 1e-6, "{exact} vs {approx}");
        // A unit circle as a series: chord 2√(1 − t²).
        let unit = Body::support_series(1.0, vec![]).unwrap();
        for t in [-0.99, -0.5, 0.0, 0.3, 0.999] {
            let v = radon(&unit, Direction::new(0.7), t);
            assert!((v - 2.0 * (1.0 - t * t).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn chebyshev_chord_matches_root_solving() {
        let body = Body::Support(
            SupportBody::with_offset(1.0, vec![(0.02, 0.01), (0.03, -0.02), (0.05, 0.0)], Vec2::new(0.2, 0.1)).unwrap(),
        );
        for u in Direction::grid(7) {
            let chord = ChordFunction::new(&body, u);
            assert_eq!(chord.method(), ChordMethod::Chebyshev);
            for k in 1..50 {
                let t = chord.lo() + chord.width() * k as f64 / 50.0;
                let direct = radon(&body, u, t);
                assert!((chord.eval(t) - direct).abs() < 1e-12, "{t}");
            }
        }
    }

    #[test]
    fn chord_integral_is_area() {
        let bodies = [
            trefoil(),
            Body::disk(Vec2::new(0.5, 0.2), 1.3).unwrap(),
            Body::polygon(vec![
                Vec2::new(0.0, 0.0),
                Vec2::new(2.0, 0.1),
                Vec2::new(2.5, 1.0),
                Vec2::new(0.3, 1.7),
            ])
            .unwrap(),
        ];
        for body in &bodies {
            for u in Direction::grid(12) {
                let c = ChordFunction::new(body, u);
                assert!((c.integral() - body.area()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn antipodal_symmetry() {
        let cw = trefoil();
        for u in Direction::grid(8) {
            for t in [-0.7, -0.1, 0.4, 0.95] {
                let a = radon(&cw, u, t);
                let b = radon(&cw, u.antipode(), -t);
                assert!((a - b).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn autocorrelation_examples() {
        let sq = Body::rectangle(0.0, 0.0, 1.0, 1.0).unwrap();
        let u = Direction::new(0.0);
        assert!((chord_autocorrelation(&sq, u, 0.0) - 1.0).abs() < 1e-14);
        assert_eq!(chord_autocorrelation(&sq, u, 1.5), 0.0);
        // s = 0 gives ∫ S² = for the unit disk ∫ 4(1 − t²) = 16/3.
        let disk = Body::disk(Vec2::zeros(), 1.0).unwrap();
        assert!((chord_autocorrelation(&disk, u, 0.0) - 16.0 / 3.0).abs() < 1e-12);
        let a = chord_autocorrelation(&disk, u, 0.4);
        let b = chord_autocorrelation(&disk, u, -0.4);
        assert_eq!(a, b);
        assert!(a < 16.0 / 3.0);
    }

    #[test]
    fn leading_coefficient_examples() {
        let disk = Body::disk(Vec2::zeros(), 1.0).unwrap();
        let (a0, b0) = leading_coefficients(&disk, Direction::new(0.0)).unwrap();
        assert!((a0 - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        assert!((b0 - a0).abs() < 1e-15);
        let (a, b) = leading_coefficients(&trefoil(), Direction::new(0.0)).unwrap();
        assert!((b / a - (0.6f64 / 1.4).sqrt()).abs() < 1e-12);
        let big = Body::disk(Vec2::zeros(), 4.0).unwrap();
        let (a4, _) = leading_coefficients(&big, Direction::new(1.0)).unwrap();
        assert!((a4 - a0 * 2.0).abs() < 1e-13);
        assert_eq!(gamma_half_integer(1), 1.0);
        assert!((gamma_half_integer(2) - PI.sqrt() / 2.0).abs() < 1e-15);
        assert!((gamma_half_integer(4) - 3.0 * PI.sqrt() / 4.0).abs() < 1e-15);
    }

    #[test]
    fn sqrt_coefficient_at_upper_end() {
        let disk = Body::disk(Vec2::zeros(), 1.0).unwrap();
        let u = Direction::new(0.3);
        let (_, b0) = leading_coefficients(&disk, u).unwrap();
        let d = 1e-6;
        let fitted = radon(&disk, u, 1.0 - d) / d.sqrt();
        assert!((fitted / b0 - 1.0).abs() < 0.01);
    }
}

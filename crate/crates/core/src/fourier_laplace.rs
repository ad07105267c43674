//! The Fourier-Laplace transform of `1_K` on the complex ray `{ζ u}`,
//! `F(ζ) = ∫ S_K(u, t) e^{i t ζ} dt`, its high-frequency zero branches, and
//! the reflection and factorization identities.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Body, Direction};
use crate::quadrature::{gauss_legendre, graded_breaks};
use crate::radon::{autocorrelation, ChordFunction, ChordMethod, PANEL_ORDER, PANEL_PHASE};

/// Default largest `|Re ζ|` the quadrature resolves.
pub const DEFAULT_BAND: f64 = 200.0;
/// `|Im ζ| · w_K(u)` beyond which evaluation is refused.
pub const IM_CAP_WIDTHS: f64 = 12.0;
pub const NEWTON_MAX_ITER: usize = 50;
pub const NEWTON_TOL: f64 = 1e-12;
/// Gauss-Legendre points per side of the argument-principle rectangle.
pub const CONTOUR_ORDER: usize = 64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

// Behaviour S ≈ coeff · (distance to the end)^exponent at one end of the support.
#[derive(Clone, Copy, Debug)]
struct EndModel {
    exponent: f64,
    coeff: f64,
}

/// Direction, chord function and quadrature for evaluating `F` on one ray.
#[derive(Clone, Debug)]
pub struct RayTransformContext {
    direction: Direction,
    chord: ChordFunction,
    area: f64,
    mid: f64,
    // (t − mid, weight · S(t))
    nodes: Vec<(f64, f64)>,
    band: f64,
    im_cap: f64,
    // (τ(u), τ(−u)) for smooth bodies.
    curvatures: Option<(f64, f64)>,
    ends: (EndModel, EndModel),
}

impl RayTransformContext {
    pub fn new(body: &Body, u: Direction) -> Self {
        Self::with_band(body, u, DEFAULT_BAND)
    }

    pub fn with_band(body: &Body, u: Direction, band: f64) -> Self {
        let chord = ChordFunction::new(body, u);
        let mid = 0.5 * (chord.lo() + chord.hi());
        let nodes: Vec<(f64, f64)> = chord
            .weighted_nodes(band)
            .into_iter()
            .map(|(t, w)| (t - mid, w))
            .collect();
        let area = nodes.iter().map(|(_, w)| w).sum();
        let curvatures = match (body.curvature(u), body.curvature(u.antipode())) {
            (Ok(a), Ok(b)) => Some((a, b)),
            _ => None,
        };
        let ends = end_models(&chord, curvatures);
        Self {
            direction: u,
            im_cap: IM_CAP_WIDTHS / chord.width(),
            chord,
            area,
            mid,
            nodes,
            band,
            curvatures,
            ends,
        }
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn chord(&self) -> &ChordFunction {
        &self.chord
    }

    pub fn width(&self) -> f64 {
        self.chord.width()
    }

    /// `∫ S dt` by the context's quadrature.
    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn band(&self) -> f64 {
        self.band
    }

    pub fn im_cap(&self) -> f64 {
        self.im_cap
    }

    pub fn order(&self) -> usize {
        PANEL_ORDER
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    fn check(&self, zeta: Complex64) -> Result<()> {
        if zeta.im.abs() > self.im_cap {
            return Err(Error::PrecisionLoss {
                im: zeta.im.abs(),
                cap: self.im_cap,
            });
        }
        if zeta.re.abs() > self.band {
            return Err(Error::OutOfBand {
                re: zeta.re.abs(),
                band: self.band,
            });
        }
        Ok(())
    }

    /// `F(ζ)` and `F'(ζ)` sharing the exponentials.
    pub fn eval_with_derivative(&self, zeta: Complex64) -> Result<(Complex64, Complex64)> {
        self.check(zeta)?;
        let mut f = c(0.0, 0.0);
        let mut tf = c(0.0, 0.0);
        for &(s, w) in &self.nodes {
            let e = (c(0.0, s) * zeta).exp() * w;
            f += e;
            tf += e * s;
        }
        let phase = (c(0.0, self.mid) * zeta).exp();
        // d/dζ e^{itζ} = i t e^{itζ}, t = mid + s
        let df = c(0.0, 1.0) * (tf + f * self.mid);
        Ok((f * phase, df * phase))
    }

    pub fn eval(&self, zeta: Complex64) -> Result<Complex64> {
        self.check(zeta)?;
        let f: Complex64 = self.nodes.iter().map(|&(s, w)| (c(0.0, s) * zeta).exp() * w).sum();
        Ok(f * (c(0.0, self.mid) * zeta).exp())
    }

    pub fn derivative(&self, zeta: Complex64) -> Result<Complex64> {
        self.eval_with_derivative(zeta).map(|(_, d)| d)
    }

    /// First-order location of the `m`-th zero from the end behaviour of `S`:
    /// with `S ≈ a (t − lo)^α` and `S ≈ b (hi − t)^α`, the zeros sit near
    /// `(π(α + 2) + 2π(m − 1))/w − i ln(a/b)/w`. For smooth bodies this is the
    /// Kobayashi center.
    pub fn predicted_center(&self, m: u32) -> Complex64 {
        if let Some((tau_u, tau_minus)) = self.curvatures {
            return kobayashi_center_from(m, self.width(), tau_u, tau_minus);
        }
        let (lo, hi) = self.ends;
        let alpha = 0.5 * (lo.exponent + hi.exponent);
        let w = self.width();
        let im = if lo.exponent == hi.exponent {
            -(lo.coeff / hi.coeff).ln() / w
        } else {
            0.0
        };
        c((PI * (alpha + 2.0) + 2.0 * PI * (m as f64 - 1.0)) / w, im)
    }
}

fn end_models(chord: &ChordFunction, curvatures: Option<(f64, f64)>) -> (EndModel, EndModel) {
    if let Some((tau_u, tau_minus)) = curvatures {
        // a0, b0 up to the common factor, which cancels in the ratio.
        return (
            EndModel {
                exponent: 0.5,
                coeff: 1.0 / tau_minus.sqrt(),
            },
            EndModel {
                exponent: 0.5,
                coeff: 1.0 / tau_u.sqrt(),
            },
        );
    }
    // Polygons: S is linear next to each end; a positive limit means an edge.
    let bp = chord.breakpoints();
    let (lo, hi) = (chord.lo(), chord.hi());
    let first = bp.get(1).copied().unwrap_or(hi) - lo;
    let last = hi - bp.get(bp.len().saturating_sub(2)).copied().unwrap_or(lo);
    let model = |at: f64, inward: f64, gap: f64| {
        let e1 = chord.eval(at + inward * 0.25 * gap);
        let e2 = chord.eval(at + inward * 0.5 * gap);
        let limit = 2.0 * e1 - e2;
        if limit > 1e-12 * e2.abs().max(1e-300) {
            EndModel {
                exponent: 0.0,
                coeff: limit,
            }
        } else {
            EndModel {
                exponent: 1.0,
                coeff: (e2 - e1) / (0.25 * gap),
            }
        }
    };
    (model(lo, 1.0, first), model(hi, -1.0, last))
}

pub fn flt_ray(ctx: &RayTransformContext, zeta: Complex64) -> Result<Complex64> {
    ctx.eval(zeta)
}

pub fn flt_ray_derivative(ctx: &RayTransformContext, zeta: Complex64) -> Result<Complex64> {
    ctx.derivative(zeta)
}

fn kobayashi_center_from(m: u32, w: f64, tau_u: f64, tau_minus: f64) -> Complex64 {
    let n = 2.0;
    c(
        PI * (4.0 * m as f64 + n - 1.0) / (2.0 * w),
        (tau_minus.ln() - tau_u.ln()) / (2.0 * w),
    )
}

/// `π(4m + 1)/(2w(u)) + i(ln τ(−u) − ln τ(u))/(2w(u))`.
pub fn kobayashi_center(k: &Body, m: u32, u: Direction) -> Result<Complex64> {
    Ok(kobayashi_center_from(
        m,
        k.width(u),
        k.curvature(u)?,
        k.curvature(u.antipode())?,
    ))
}

/// A located zero of the ray transform.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroBranch {
    pub m: u32,
    pub theta: f64,
    #[serde(serialize_with = "ser_complex")]
    pub zeta: Complex64,
    /// `|F(ζ)|` at the located zero.
    pub residual: f64,
    /// `|F'(ζ)|` at the located zero.
    pub derivative: f64,
    pub validated: bool,
    pub winding: f64,
    #[serde(serialize_with = "ser_complex")]
    pub predicted_center: Complex64,
    pub iterations: usize,
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

/// Damped complex Newton for `f` from `start`; returns the root and the
/// number of iterations.
pub fn newton<F>(f: F, start: Complex64, multiplicity: f64, m: u32) -> Result<(Complex64, usize)>
where
    F: Fn(Complex64) -> Result<(Complex64, Complex64)>,
{
    let mut z = start;
    let (mut fz, mut dz) = f(z)?;
    for it in 1..=NEWTON_MAX_ITER {
        if fz == c(0.0, 0.0) {
            return Ok((z, it));
        }
        let step = fz / dz * multiplicity;
        if !step.is_finite() {
            break;
        }
        let mut lambda = 1.0;
        loop {
            let candidate = z - step * lambda;
            let tiny = (step * lambda).norm() <= 1e-9 * (1.0 + z.norm());
            match f(candidate) {
                Ok((fc, dc)) if fc.norm() < fz.norm() || tiny => {
                    z = candidate;
                    fz = fc;
                    dz = dc;
                    break;
                }
                _ if lambda > 1.0 / 1024.0 => lambda *= 0.5,
                _ => return Err(Error::NewtonDiverged { m, iterations: it }),
            }
        }
        if (step * lambda).norm() <= NEWTON_TOL * (1.0 + z.norm()) {
            return Ok((z, it));
        }
    }
    Err(Error::NewtonDiverged {
        m,
        iterations: NEWTON_MAX_ITER,
    })
}

/// `(1/2πi) ∮ f'/f` around the rectangle `center ± (a + ib)`.
pub fn winding_number<F>(f: F, center: Complex64, a: f64, b: f64) -> Result<f64>
where
    F: Fn(Complex64) -> Result<(Complex64, Complex64)>,
{
    let rule = gauss_legendre(CONTOUR_ORDER);
    let corners = [
        center + c(-a, -b),
        center + c(a, -b),
        center + c(a, b),
        center + c(-a, b),
    ];
    let mut total = c(0.0, 0.0);
    for k in 0..4 {
        let (z0, z1) = (corners[k], corners[(k + 1) % 4]);
        let half = (z1 - z0) * 0.5;
        let mid = (z0 + z1) * 0.5;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let z = mid + half * *x;
            let (fz, dz) = f(z)?;
            total += dz / fz * half * *w;
        }
    }
    let n = total / c(0.0, 2.0 * PI);
    Ok(n.re + n.im.abs())
}

fn winding_ok(winding: f64, expected: f64) -> bool {
    (winding - expected).abs() <= 0.1
}

/// Track the `m`-th zero branch from its predicted center and validate it by
/// the argument principle.
pub fn track_zero(ctx: &RayTransformContext, m: u32) -> Result<ZeroBranch> {
    track_zero_from(ctx, m, ctx.predicted_center(m))
}

/// [`track_zero`] with an explicit starting point.
pub fn track_zero_from(ctx: &RayTransformContext, m: u32, start: Complex64) -> Result<ZeroBranch> {
    let f = |z| ctx.eval_with_derivative(z);
    let (zeta, iterations) = newton(f, start, 1.0, m)?;
    let w = ctx.width();
    let winding = winding_number(f, zeta, PI / (2.0 * w), 0.5 / w)?;
    if !winding_ok(winding, 1.0) {
        return Err(Error::ValidationFailed { m, winding });
    }
    let (fz, dz) = f(zeta)?;
    Ok(ZeroBranch {
        m,
        theta: ctx.direction().theta(),
        zeta,
        residual: fz.norm(),
        derivative: dz.norm(),
        validated: true,
        winding,
        predicted_center: ctx.predicted_center(m),
        iterations,
    })
}

/// Zero branches for every `(m, u)`, ordered by `m` and then by direction.
#[derive(Clone, Debug, Serialize)]
pub struct BranchTable {
    pub rows: Vec<ZeroBranch>,
    /// Largest jump of a branch between neighbouring grid directions.
    pub max_jump: f64,
    /// Half the smallest spacing `2π/w` between consecutive branches.
    pub jump_bound: f64,
}

impl BranchTable {
    pub fn is_continuous(&self) -> bool {
        self.max_jump < self.jump_bound
    }

    pub fn branch(&self, m: u32) -> impl Iterator<Item = &ZeroBranch> {
        self.rows.iter().filter(move |r| r.m == m)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,theta,re_zeta,im_zeta,residual,pred_re,pred_im,validated\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.m,
                r.theta,
                r.zeta.re,
                r.zeta.im,
                r.residual,
                r.predicted_center.re,
                r.predicted_center.im,
                r.validated
            ));
        }
        out
    }
}

/// Band needed to resolve branches up to `m_max` on a ray of width `w`.
pub fn band_for(m_max: u32, w: f64) -> f64 {
    DEFAULT_BAND.max(1.25 * PI * (4.0 * m_max as f64 + 3.0) / (2.0 * w))
}

pub fn branch_sweep(k: &Body, u_grid: &[Direction], m_range: std::ops::RangeInclusive<u32>) -> Result<BranchTable> {
    let m_max = *m_range.end();
    let contexts: Vec<RayTransformContext> = u_grid
        .par_iter()
        .map(|&u| RayTransformContext::with_band(k, u, band_for(m_max, k.width(u))))
        .collect();
    let jobs: Vec<(u32, usize)> = m_range.flat_map(|m| (0..u_grid.len()).map(move |i| (m, i))).collect();
    let rows = jobs
        .par_iter()
        .map(|&(m, i)| {
            track_zero(&contexts[i], m).map_err(|e| Error::Branch {
                m,
                theta: u_grid[i].theta(),
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let n = u_grid.len();
    let mut max_jump: f64 = 0.0;
    if n > 1 {
        for chunk in rows.chunks(n) {
            for i in 0..n {
                // Cyclic only when the grid closes up around the circle.
                if i + 1 == n && n < 3 {
                    continue;
                }
                max_jump = max_jump.max((chunk[(i + 1) % n].zeta - chunk[i].zeta).norm());
            }
        }
    }
    let w_max = contexts.iter().map(|c| c.width()).fold(0.0, f64::max);
    Ok(BranchTable {
        rows,
        max_jump,
        jump_bound: PI / w_max,
    })
}

/// Result of comparing `F_{−K}(ζ)` with `conj F_K(conj ζ)`.
#[derive(Clone, Debug, Serialize)]
pub struct ReflectionReport {
    pub samples: usize,
    pub max_deviation: f64,
    /// Largest `|F|` over the samples, the scale of the deviation.
    pub scale: f64,
}

impl ReflectionReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_deviation <= tol * self.scale.max(1.0)
    }
}

pub fn verify_reflection_identity(k: &Body, u: Direction, samples: &[Complex64]) -> Result<ReflectionReport> {
    let band = samples.iter().map(|z| z.re.abs()).fold(DEFAULT_BAND, f64::max);
    let direct = RayTransformContext::with_band(k, u, band);
    let reflected = RayTransformContext::with_band(&k.reflect(), u, band);
    let mut max_deviation: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for &z in samples {
        let a = reflected.eval(z)?;
        let b = direct.eval(z.conj())?.conj();
        max_deviation = max_deviation.max((a - b).norm());
        scale = scale.max(a.norm()).max(b.norm());
    }
    Ok(ReflectionReport {
        samples: samples.len(),
        max_deviation,
        scale,
    })
}

/// `ξ ↦ ∫ A(s) e^{isξ} ds` for the chord autocorrelation `A`, which is the
/// covariogram transform `ĝ_K(ξu)`.
#[derive(Clone, Debug)]
pub struct CovariogramRayTransform {
    // (s, weight · A(s)) for s ∈ [0, w]; A is even.
    nodes: Vec<(f64, f64)>,
    band: f64,
}

impl CovariogramRayTransform {
    pub fn new(k: &Body, u: Direction, band: f64) -> Self {
        let chord = ChordFunction::new(k, u);
        let w = chord.width();
        let mut breaks: Vec<f64> = if chord.method() == ChordMethod::ExactPolygon {
            let bp = chord.breakpoints();
            let mut d: Vec<f64> = bp
                .iter()
                .flat_map(|a| bp.iter().map(move |b| (a - b).abs()))
                .filter(|&d| d < w)
                .collect();
            d.push(w);
            d
        } else {
            // A has s² log s behaviour at 0 and (w − s)^{5/2} terms at w.
            let q = 0.25 * w;
            let g = graded_breaks(1e-7);
            let mut d: Vec<f64> = g.iter().map(|x| x * q).collect();
            d.extend(g.iter().map(|x| w - x * q));
            d.push(0.5 * w);
            d
        };
        breaks.push(0.0);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * w);
        let rule = gauss_legendre(PANEL_ORDER / 2);
        let max_w = 0.5 * PANEL_PHASE / band.max(1.0);
        let panels: Vec<(f64, f64)> = breaks
            .windows(2)
            .flat_map(|p| {
                let k = ((p[1] - p[0]) / max_w).ceil().max(1.0) as usize;
                (0..k).map(move |j| {
                    let a = p[0] + (p[1] - p[0]) * j as f64 / k as f64;
                    let b = p[0] + (p[1] - p[0]) * (j + 1) as f64 / k as f64;
                    (a, b)
                })
            })
            .collect();
        let nodes = panels
            .par_iter()
            .flat_map_iter(|&(a, b)| {
                rule.mapped(a, b)
                    .map(|(s, wt)| (s, wt * autocorrelation(&chord, s)))
                    .collect::<Vec<_>>()
            })
            .collect();
        Self { nodes, band }
    }

    pub fn band(&self) -> f64 {
        self.band
    }

    /// `ĝ(ξ) = 2 ∫_0^w A(s) cos(sξ) ds` and its derivative.
    pub fn eval_with_derivative(&self, xi: Complex64) -> (Complex64, Complex64) {
        let (f, d, _) = self.eval_with_derivatives(xi);
        (f, d)
    }

    /// `ĝ`, `ĝ'` and `ĝ''` at `ξ`.
    pub fn eval_with_derivatives(&self, xi: Complex64) -> (Complex64, Complex64, Complex64) {
        let mut f = c(0.0, 0.0);
        let mut d = c(0.0, 0.0);
        let mut d2 = c(0.0, 0.0);
        for &(s, w) in &self.nodes {
            let z = xi * s;
            let (cz, sz) = (z.cos(), z.sin());
            f += cz * w;
            d -= sz * (w * s);
            d2 -= cz * (w * s * s);
        }
        (f * 2.0, d * 2.0, d2 * 2.0)
    }

    pub fn eval(&self, xi: Complex64) -> Complex64 {
        self.eval_with_derivative(xi).0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorizationReport {
    pub samples: usize,
    pub max_deviation: f64,
    pub worst_xi: f64,
    pub area_squared: f64,
}

impl FactorizationReport {
    pub fn relative(&self) -> f64 {
        self.max_deviation / self.area_squared
    }
}

/// Compare `ĝ_K(ξu)` computed from the chord autocorrelation with
/// `|F(ξ)|²` on real `ξ`.
pub fn verify_factorization(k: &Body, u: Direction, xi_grid: &[f64]) -> Result<FactorizationReport> {
    let band = xi_grid.iter().map(|x| x.abs()).fold(1.0, f64::max);
    let ctx = RayTransformContext::with_band(k, u, band.max(DEFAULT_BAND));
    let g = CovariogramRayTransform::new(k, u, band);
    let mut max_deviation: f64 = 0.0;
    let mut worst_xi = 0.0;
    for &xi in xi_grid {
        let lhs = g.eval(c(xi, 0.0));
        let rhs = ctx.eval(c(xi, 0.0))?.norm_sqr();
        let d = (lhs.re - rhs).abs().max(lhs.im.abs());
        if d > max_deviation {
            max_deviation = d;
            worst_xi = xi;
        }
    }
    Ok(FactorizationReport {
        samples: xi_grid.len(),
        max_deviation,
        worst_xi,
        area_squared: k.area() * k.area(),
    })
}

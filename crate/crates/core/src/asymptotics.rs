//! Experiment drivers: Kobayashi asymptotics of the zero branches, the zero
//! set of the covariogram transform, the cross-covariogram
//! counterexamples, and recovery of a body from covariogram values alone.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::covariogram::{
    curvature_pair_fit, support_boundary_point, Covariogram, CovariogramAccess, CovariogramGrid, CurvaturePair,
};
use crate::error::{Error, Result};
use crate::fourier_laplace::{
    band_for, branch_sweep, newton, track_zero, winding_number, CovariogramRayTransform, RayTransformContext,
};
use crate::geometry::{cross, example_pair, Body, Direction, FamilyParams, Polygon, Vec2};

/// One `(m, u)` entry of a [`KobayashiReport`].
#[derive(Clone, Debug, Serialize)]
pub struct KobayashiRow {
    pub m: u32,
    pub theta: f64,
    pub zeta: [f64; 2],
    pub center: [f64; 2],
    pub deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct KobayashiReport {
    /// False for polygons, whose branches are compared with the first-order
    /// end model instead of the Kobayashi center.
    pub smooth: bool,
    pub rows: Vec<KobayashiRow>,
    /// `(m, max_u |F_m(u) − center|)`.
    pub max_deviation: Vec<(u32, f64)>,
    /// Slope `p` of `log deviation ≈ log C + p log m` over `m ≥ 2`.
    pub decay_exponent: f64,
    pub decay_residual: f64,
    /// `(m, max_u |Im F_m · 2w − (ln τ(−u) − ln τ(u))|)` for smooth bodies.
    pub im_recovery: Vec<(u32, f64)>,
    /// `(m, max_u |Re F_m · 2w/π − (4m + 1)|)`.
    pub re_recovery: Vec<(u32, f64)>,
}

/// Least-squares line through `(x, y)`; returns `(intercept, slope, rms)`.
pub fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let rms = (xs.iter().zip(ys).map(|(x, y)| (y - a - b * x).powi(2)).sum::<f64>() / n).sqrt();
    (a, b, rms)
}

pub fn kobayashi_report(
    k: &Body,
    m_range: std::ops::RangeInclusive<u32>,
    u_grid: &[Direction],
) -> Result<KobayashiReport> {
    let table = branch_sweep(k, u_grid, m_range.clone())?;
    let smooth = k.is_smooth();
    let rows: Vec<KobayashiRow> = table
        .rows
        .iter()
        .map(|r| KobayashiRow {
            m: r.m,
            theta: r.theta,
            zeta: [r.zeta.re, r.zeta.im],
            center: [r.predicted_center.re, r.predicted_center.im],
            deviation: (r.zeta - r.predicted_center).norm(),
        })
        .collect();
    let mut max_deviation = Vec::new();
    let mut im_recovery = Vec::new();
    let mut re_recovery = Vec::new();
    for m in m_range {
        let per_m: Vec<&crate::fourier_laplace::ZeroBranch> = table.branch(m).collect();
        max_deviation.push((
            m,
            per_m
                .iter()
                .map(|r| (r.zeta - r.predicted_center).norm())
                .fold(0.0, f64::max),
        ));
        let mut im_err: f64 = 0.0;
        let mut re_err: f64 = 0.0;
        for r in &per_m {
            let u = Direction::new(r.theta);
            let w = k.width(u);
            re_err = re_err.max((r.zeta.re * 2.0 * w / PI - (4.0 * m as f64 + 1.0)).abs());
            if smooth {
                let target = k.curvature(u.antipode())?.ln() - k.curvature(u)?.ln();
                im_err = im_err.max((r.zeta.im * 2.0 * w - target).abs());
            }
        }
        re_recovery.push((m, re_err));
        if smooth {
            im_recovery.push((m, im_err));
        }
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = max_deviation
        .iter()
        .filter(|(m, d)| *m >= 2 && *d > 0.0)
        .map(|&(m, d)| ((m as f64).ln(), d.ln()))
        .unzip();
    let (decay_exponent, decay_residual) = if xs.len() >= 2 {
        let (_, p, r) = line_fit(&xs, &ys);
        (p, r)
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(KobayashiReport {
        smooth,
        rows,
        max_deviation,
        decay_exponent,
        decay_residual,
        im_recovery,
        re_recovery,
    })
}

/// Zeros of the covariogram transform near one branch.
#[derive(Clone, Debug, Serialize)]
pub struct ZeroUnionRow {
    pub m: u32,
    pub branch: [f64; 2],
    /// Located zeros of `ĝ`, each listed with its multiplicity.
    pub located: Vec<([f64; 2], u32)>,
    /// Number of zeros of `ĝ` inside a rectangle around `{F_m, conj F_m}`.
    pub count: f64,
    /// Largest distance from a located zero to `{F_m, conj F_m}`.
    pub match_error: f64,
    /// `|ĝ(F_m)| / area²`.
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroUnionReport {
    pub theta: f64,
    pub rows: Vec<ZeroUnionRow>,
    pub max_match_error: f64,
    pub max_residual: f64,
}

pub const ZERO_MATCH_TOL: f64 = 1e-6;
/// Branches with `|Im F_m|` below this are treated as real, so that `F_m` and
/// its conjugate merge into a double zero of `ĝ`.
pub const DOUBLE_ZERO_IM: f64 = 1e-6;

/// Check that the zeros of `ξ ↦ ĝ_K(ξu)` near each branch are exactly
/// `F_m(u)` and `conj F_m(u)`.
pub fn zero_union_check(k: &Body, u: Direction, m_range: std::ops::RangeInclusive<u32>) -> Result<ZeroUnionReport> {
    let w = k.width(u);
    let band = band_for(*m_range.end(), w);
    let ctx = RayTransformContext::with_band(k, u, band);
    let g = CovariogramRayTransform::new(k, u, band);
    let area2 = k.area() * k.area();
    let ms: Vec<u32> = m_range.collect();
    let rows = ms
        .par_iter()
        .map(|&m| -> Result<ZeroUnionRow> {
            let f = track_zero(&ctx, m)?.zeta;
            let targets = [f, f.conj()];
            let start = ctx.predicted_center(m);
            let gf = |z: Complex64| Ok(g.eval_with_derivative(z));
            let count = winding_number(gf, c(f.re, 0.0), PI / (2.0 * w), f.im.abs() + 0.5 / w)?;
            let located: Vec<(Complex64, u32)> = if f.im.abs() < DOUBLE_ZERO_IM {
                // A double zero of ĝ is a simple zero of ĝ'.
                let dg = |z: Complex64| {
                    let (_, d, d2) = g.eval_with_derivatives(z);
                    Ok((d, d2))
                };
                let (z, _) = newton(dg, c(start.re, 0.0), 1.0, m)?;
                vec![(z, 2)]
            } else {
                let a = newton(gf, start, 1.0, m)?.0;
                let b = newton(gf, start.conj(), 1.0, m)?.0;
                vec![(a, 1), (b, 1)]
            };
            let mut match_error: f64 = 0.0;
            for &(z, _) in &located {
                let d = targets.iter().map(|t| (z - t).norm()).fold(f64::INFINITY, f64::min);
                if d > ZERO_MATCH_TOL {
                    return Err(Error::UnmatchedZero { re: z.re, im: z.im });
                }
                match_error = match_error.max(d);
            }
            Ok(ZeroUnionRow {
                m,
                branch: [f.re, f.im],
                located: located.iter().map(|&(z, k)| ([z.re, z.im], k)).collect(),
                count,
                match_error,
                residual: g.eval(f).norm() / area2,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ZeroUnionReport {
        theta: u.theta(),
        max_match_error: rows.iter().map(|r| r.match_error).fold(0.0, f64::max),
        max_residual: rows.iter().map(|r| r.residual).fold(0.0, f64::max),
        rows,
    })
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Steiner point `Σ v_i · (exterior angle at v_i)/2π` of a convex polygon.
pub fn steiner_point(p: &Polygon) -> Vec2 {
    let vs = p.vertices();
    let n = vs.len();
    let mut s = Vec2::zeros();
    for i in 0..n {
        let a = vs[i] - vs[(i + n - 1) % n];
        let b = vs[(i + 1) % n] - vs[i];
        let ext = cross(a, b).atan2(a.dot(&b));
        s += vs[i] * (ext / TAU);
    }
    s
}

fn same_vertex_set(a: &Polygon, b: &Polygon, tol: f64) -> bool {
    a.len() == b.len()
        && a.vertices()
            .iter()
            .all(|v| b.vertices().iter().any(|w| (v - w).norm() <= tol))
}

fn polygon_of(body: &Body) -> Result<Polygon> {
    match body {
        Body::Polygon(p) => Ok(p.clone()),
        _ => Err(Error::InvalidArgument("trivial-associate test needs polygons".into())),
    }
}

/// Whether `(H', K')` equals `(H + x, K + x)` or `(−K + x, −H + x)` for some
/// `x`, comparing vertex sets after moving the first body's Steiner point to
/// the origin.
pub fn trivial_associates(pair: (&Body, &Body), other: (&Body, &Body), tol: f64) -> Result<bool> {
    let (h, k) = (polygon_of(pair.0)?, polygon_of(pair.1)?);
    let (h2, k2) = (polygon_of(other.0)?, polygon_of(other.1)?);
    let canonical = |a: &Polygon, b: &Polygon| {
        let s = steiner_point(a);
        (a.translate(-s), b.translate(-s))
    };
    let (ch, ck) = canonical(&h, &k);
    let same = |x: &Polygon, y: &Polygon| {
        let (cx, cy) = canonical(x, y);
        same_vertex_set(&ch, &cx, tol) && same_vertex_set(&ck, &cy, tol)
    };
    Ok(same(&h2, &k2) || same(&k2.reflect(), &h2.reflect()))
}

#[derive(Clone, Debug, Serialize)]
pub struct CounterexampleReport {
    pub family: u8,
    pub grid: usize,
    pub max_deviation: f64,
    /// Largest covariogram value on the grid, for scale.
    pub max_value: f64,
    pub trivial_associates: bool,
}

impl CounterexampleReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_deviation <= tol && !self.trivial_associates
    }
}

pub const ASSOCIATE_TOL: f64 = 1e-9;

/// Compare `g_{H_i,K_i}` built from `p` with `g_{H_{i+1},K_{i+1}}` built from
/// `q` on a `grid × grid` lattice covering both supports.
pub fn crosscov_pair_comparison(
    family: u8,
    p: &FamilyParams,
    q: &FamilyParams,
    grid: usize,
) -> Result<CounterexampleReport> {
    if family != 1 && family != 3 {
        return Err(Error::InvalidFamilyParams(format!(
            "family must be 1 or 3, got {family}"
        )));
    }
    let (h1, k1) = example_pair(family, p)?;
    let (h2, k2) = example_pair(family + 1, q)?;
    let g1 = Covariogram::cross(&h1, &k1);
    let g2 = Covariogram::cross(&h2, &k2);
    let extent = [g1.support_polygon(), g2.support_polygon()]
        .iter()
        .flat_map(|s| s.vertices().to_vec())
        .fold([0.0f64, 0.0f64], |e, v| [e[0].max(v.x.abs()), e[1].max(v.y.abs())]);
    let a = CovariogramGrid::centered(&g1, &[&h1, &k1], extent, grid, grid);
    let b = CovariogramGrid::centered(&g2, &[&h2, &k2], extent, grid, grid);
    Ok(CounterexampleReport {
        family,
        grid,
        max_deviation: a.max_deviation(&b)?,
        max_value: a.values.iter().copied().fold(0.0, f64::max),
        trivial_associates: trivial_associates((&h1, &k1), (&h2, &k2), ASSOCIATE_TOL)?,
    })
}

pub fn crosscov_counterexample(family: u8, params: &FamilyParams, grid: usize) -> Result<CounterexampleReport> {
    crosscov_pair_comparison(family, params, params, grid)
}

/// Parameters drawn uniformly from `[0.5, 2]` (Greek letters), `[−2, 2]`
/// (`m`) and `[−1, 1]²` (translations), redrawn until admissible.
pub fn random_family_params<R: Rng>(family: u8, rng: &mut R) -> FamilyParams {
    loop {
        let mut g = || 0.5 + 1.5 * rng.random::<f64>();
        let mut p = FamilyParams {
            alpha: g(),
            beta: g(),
            gamma: g(),
            delta: g(),
            alpha_p: g(),
            beta_p: g(),
            gamma_p: g(),
            delta_p: g(),
            ..FamilyParams::default()
        };
        p.m = 4.0 * rng.random::<f64>() - 2.0;
        p.y = [2.0 * rng.random::<f64>() - 1.0, 2.0 * rng.random::<f64>() - 1.0];
        p.y_p = [2.0 * rng.random::<f64>() - 1.0, 2.0 * rng.random::<f64>() - 1.0];
        if p.validate(family).is_ok() && (p.alpha_p - p.gamma_p).abs() > 1e-3 {
            return p;
        }
    }
}

/// Outcome of comparing two covariograms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    /// Widths, curvature pairs and oriented curvature ratios agree.
    IdenticalUpToTranslation,
    /// Oriented curvature ratios agree after a global sign flip.
    ReflectionNeeded,
    Distinct,
}

/// Per-direction data recovered from one covariogram.
#[derive(Clone, Debug, Serialize)]
pub struct DirectionRecord {
    pub theta: f64,
    /// `w(u) = ⟨p, u⟩` for the support boundary point `p`.
    pub width: f64,
    pub pair: CurvaturePair,
    /// `ln τ(−u) − ln τ(u)` after the global orientation assignment; `None`
    /// where the pair is too close to equal to carry a sign.
    pub signed_ratio: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeterminationVerdict {
    pub outcome: Outcome,
    pub a: Vec<DirectionRecord>,
    pub b: Vec<DirectionRecord>,
    pub max_width_gap: f64,
    pub max_pair_gap: f64,
}

/// `|ln τ(−u) − ln τ(u)|` below which no ratio sign is assigned.
pub const RATIO_SIGN_THRESHOLD: f64 = 1e-3;
/// Relative tolerance when comparing recovered widths and curvatures.
pub const DETERMINATION_TOL: f64 = 0.02;
/// Largest fraction of directions whose fit may fail.
pub const MAX_FAILED_FRACTION: f64 = 0.05;

fn recover(g: &dyn CovariogramAccess, u_grid: &[Direction], radius: f64) -> Result<Vec<DirectionRecord>> {
    let fits: Vec<Result<DirectionRecord>> = u_grid
        .par_iter()
        .map(|&u| {
            let p = support_boundary_point(g, u, radius);
            let pair = curvature_pair_fit(g, u, p)?;
            Ok(DirectionRecord {
                theta: u.theta(),
                width: p.dot(&u.u()),
                pair,
                signed_ratio: None,
            })
        })
        .collect();
    let failed = fits.iter().filter(|f| f.is_err()).count();
    if failed as f64 > MAX_FAILED_FRACTION * u_grid.len() as f64 {
        return Err(Error::Inconclusive(format!(
            "curvature fit failed in {failed} of {} directions",
            u_grid.len()
        )));
    }
    Ok(fits.into_iter().filter_map(|f| f.ok()).collect())
}

/// `ln(high/low)` of the curvature pair in direction `theta`.
fn ratio_magnitude(g: &dyn CovariogramAccess, theta: f64, radius: f64) -> Result<f64> {
    let u = Direction::new(theta);
    let p = support_boundary_point(g, u, radius);
    let pair = curvature_pair_fit(g, u, p)?;
    Ok((pair.high / pair.low).ln())
}

const ZERO_SEARCH_ITERATIONS: usize = 8;

/// Angles in `records` order at which the analytic ratio has a simple zero.
///
/// Every local minimum of the sampled magnitude is refined by parabolic
/// steps on `|r|²`, which is smooth through a zero. A minimum below the
/// threshold is a zero of the ratio; its order is read off
/// `|r| ≈ c |θ − θ0|^p` at two offsets, and odd (simple) zeros are where the
/// sign changes.
fn simple_zeros(g: &dyn CovariogramAccess, records: &[DirectionRecord], radius: f64) -> Result<Vec<f64>> {
    let n = records.len();
    let mag: Vec<f64> = records.iter().map(|r| (r.pair.high / r.pair.low).ln()).collect();
    let mut zeros = Vec::new();
    for k in 0..n {
        let (prev, next) = ((k + n - 1) % n, (k + 1) % n);
        // Plateaus count once, at their first sample.
        if !(mag[k] < mag[prev] && mag[k] <= mag[next]) {
            continue;
        }
        let t = records[k].theta;
        let lo = unwrap_before(t, records[prev].theta);
        let hi = unwrap_after(t, records[next].theta);
        let mut pts = [(lo, mag[prev]), (t, mag[k]), (hi, mag[next])];
        for _ in 0..ZERO_SEARCH_ITERATIONS {
            if pts[1].1 <= 0.1 * RATIO_SIGN_THRESHOLD {
                break;
            }
            let [(x0, m0), (x1, m1), (x2, m2)] = pts;
            let (y0, y1, y2) = (m0 * m0, m1 * m1, m2 * m2);
            let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
            if den >= 0.0 {
                break;
            }
            let x = x1 - 0.5 * ((x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0)) / den;
            let x = x.clamp(x0 + 1e-3 * (x1 - x0), x2 - 1e-3 * (x2 - x1));
            if (x - x1).abs() < 1e-7 {
                break;
            }
            let m = ratio_magnitude(g, x, radius)?;
            pts = match (m < m1, x < x1) {
                (true, true) => [(x0, m0), (x, m), (x1, m1)],
                (true, false) => [(x1, m1), (x, m), (x2, m2)],
                (false, true) => [(x, m), (x1, m1), (x2, m2)],
                (false, false) => [(x0, m0), (x1, m1), (x, m)],
            };
        }
        let (theta0, fmin) = pts[1];
        if fmin > RATIO_SIGN_THRESHOLD {
            continue;
        }
        let delta = 0.1 * (hi - lo).min(2.0 * (theta0 - lo)).min(2.0 * (hi - theta0)).max(1e-4);
        let mut order = 0.0;
        for side in [-1.0, 1.0] {
            let m1 = ratio_magnitude(g, theta0 + side * delta, radius)?;
            let m2 = ratio_magnitude(g, theta0 + side * 2.0 * delta, radius)?;
            order += 0.5 * (m2 / m1).log2();
        }
        if order < 1.5 {
            zeros.push(theta0.rem_euclid(TAU));
        }
    }
    Ok(zeros)
}

fn ratio_magnitudes(records: &[DirectionRecord]) -> Vec<f64> {
    records.iter().map(|r| (r.pair.high / r.pair.low).ln()).collect()
}

/// Assign signs to `|ln τ(−u) − ln τ(u)| = ln(high/low)` around the circle
/// so that the signed ratio is analytic: the sign changes exactly at the
/// simple zeros. The ratio at `anchor` (an angle in `records`) is taken
/// positive; directions below the threshold get no sign.
fn assign_ratio_signs(
    g: &dyn CovariogramAccess,
    records: &mut [DirectionRecord],
    radius: f64,
    anchor: f64,
) -> Result<()> {
    let mag = ratio_magnitudes(records);
    let Some(start) = records.iter().position(|r| (r.theta - anchor).abs() < 1e-12) else {
        return Err(Error::InvalidArgument(format!("anchor direction {anchor} not sampled")));
    };
    let zeros = simple_zeros(g, records, radius)?;
    let t0 = records[start].theta;
    let crossings = |theta: f64| {
        let d = (theta - t0).rem_euclid(TAU);
        zeros.iter().filter(|&&z| (z - t0).rem_euclid(TAU) < d).count()
    };
    for (i, r) in records.iter_mut().enumerate() {
        r.signed_ratio = if mag[i] > RATIO_SIGN_THRESHOLD {
            let sign = if crossings(r.theta) % 2 == 0 { 1.0 } else { -1.0 };
            Some(sign * mag[i])
        } else {
            None
        };
    }
    Ok(())
}

fn unwrap_before(next: f64, theta: f64) -> f64 {
    let mut t = theta;
    while t > next {
        t -= TAU;
    }
    t
}

fn unwrap_after(prev: f64, theta: f64) -> f64 {
    let mut t = theta;
    while t < prev {
        t += TAU;
    }
    t
}

/// Compare two black-box covariograms direction by direction.
///
/// `radius` bounds the support of either covariogram. Covariograms agree for
/// `K` and `−K`, so data from `g` alone can never require a reflection; the
/// ratio signs are fixed by the same intrinsic convention on both sides.
pub fn determination_experiment(
    ga: &dyn CovariogramAccess,
    gb: &dyn CovariogramAccess,
    u_grid: &[Direction],
    radius: f64,
) -> Result<DeterminationVerdict> {
    let mut a = recover(ga, u_grid, radius)?;
    let mut b = recover(gb, u_grid, radius)?;
    let mut max_width_gap: f64 = 0.0;
    let mut max_pair_gap: f64 = 0.0;
    for ra in &a {
        let Some(rb) = b.iter().find(|r| (r.theta - ra.theta).abs() < 1e-12) else {
            continue;
        };
        max_width_gap = max_width_gap.max((ra.width - rb.width).abs() / ra.width.abs().max(1e-300));
        let gap =
            ((ra.pair.low - rb.pair.low).abs() / ra.pair.low).max((ra.pair.high - rb.pair.high).abs() / ra.pair.high);
        max_pair_gap = max_pair_gap.max(gap);
    }
    let outcome = if max_width_gap > DETERMINATION_TOL || max_pair_gap > DETERMINATION_TOL {
        Outcome::Distinct
    } else {
        // A shared anchor keeps near-equal maxima of |r| (e.g. symmetric
        // bodies sampled on a symmetric grid) from fixing opposite signs.
        let (ma, mb) = (ratio_magnitudes(&a), ratio_magnitudes(&b));
        let anchor = a
            .iter()
            .enumerate()
            .filter_map(|(i, ra)| {
                let j = b.iter().position(|rb| (rb.theta - ra.theta).abs() < 1e-12)?;
                Some((ra.theta, ma[i].min(mb[j])))
            })
            .max_by(|x, y| x.1.total_cmp(&y.1));
        match anchor {
            Some((theta, m)) if m > RATIO_SIGN_THRESHOLD => {
                assign_ratio_signs(ga, &mut a, radius, theta)?;
                assign_ratio_signs(gb, &mut b, radius, theta)?;
            }
            _ => {
                return Err(Error::Inconclusive(
                    "curvature ratios are symmetric in every direction; no orientation to assign".into(),
                ))
            }
        }
        let mut same = true;
        let mut flipped = true;
        for (ra, rb) in a.iter().zip(&b) {
            if let (Some(x), Some(y)) = (ra.signed_ratio, rb.signed_ratio) {
                let tol = DETERMINATION_TOL * x.abs().max(y.abs()) + RATIO_SIGN_THRESHOLD;
                same &= (x - y).abs() <= tol;
                flipped &= (x + y).abs() <= tol;
            }
        }
        match (same, flipped) {
            (true, _) => Outcome::IdenticalUpToTranslation,
            (false, true) => Outcome::ReflectionNeeded,
            _ => Outcome::Distinct,
        }
    };
    Ok(DeterminationVerdict {
        outcome,
        a,
        b,
        max_width_gap,
        max_pair_gap,
    })
}

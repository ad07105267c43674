//! Brute-force and closed-form reference computations: seeded Monte Carlo
//! volumes, the matrix identities behind the covariogram asymptotics, the
//! paraboloid-cap volume, and Bessel functions with the zeros of `J₁`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Polygon, Vec2};

/// Samples drawn per RNG stream; fixes the work split independently of the
/// thread count so estimates are reproducible.
pub const MC_CHUNK: usize = 1 << 16;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

impl MonteCarloEstimate {
    /// Distance from `value` in standard errors.
    pub fn sigmas(&self, value: f64) -> f64 {
        (self.mean - value).abs() / self.std_error
    }
}

/// Deterministic RNG for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Hit-or-miss estimate of the volume of `{x ∈ box : inside(x)}` for the box
/// `[lo, hi]` in any dimension.
pub fn mc_volume<F>(inside: F, lo: &[f64], hi: &[f64], n: usize, seed: u64) -> MonteCarloEstimate
where
    F: Fn(&[f64]) -> bool + Sync,
{
    assert_eq!(lo.len(), hi.len());
    let dim = lo.len();
    let box_volume: f64 = lo.iter().zip(hi).map(|(a, b)| b - a).product();
    let chunks = n.div_ceil(MC_CHUNK);
    let hits: usize = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, c as u64);
            let count = MC_CHUNK.min(n - c * MC_CHUNK);
            let mut x = vec![0.0; dim];
            let mut hits = 0usize;
            for _ in 0..count {
                for (k, xk) in x.iter_mut().enumerate() {
                    *xk = lo[k] + (hi[k] - lo[k]) * rng.random::<f64>();
                }
                if inside(&x) {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    let p = hits as f64 / n as f64;
    MonteCarloEstimate {
        mean: box_volume * p,
        std_error: box_volume * (p * (1.0 - p) / n as f64).sqrt(),
        samples: n,
        seed,
    }
}

/// Planar [`mc_volume`] over the box `lo..hi`.
pub fn mc_area<F>(inside: F, lo: [f64; 2], hi: [f64; 2], n: usize, seed: u64) -> MonteCarloEstimate
where
    F: Fn(f64, f64) -> bool + Sync,
{
    mc_volume(|x| inside(x[0], x[1]), &lo, &hi, n, seed)
}

/// Area of the intersection of two disks of radius `r` whose centres are `d`
/// apart.
pub fn lens_area(r: f64, d: f64) -> f64 {
    let d = d.abs();
    if d >= 2.0 * r {
        return 0.0;
    }
    2.0 * r * r * (d / (2.0 * r)).acos() - 0.5 * d * (4.0 * r * r - d * d).sqrt()
}

/// Random symmetric positive-definite matrix with eigenvalues uniform in
/// `[lo, hi]`.
pub fn random_spd<R: Rng>(dim: usize, lo: f64, hi: f64, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    let q = g.qr().q();
    let eig = DVector::from_fn(dim, |_, _| lo + (hi - lo) * rng.random::<f64>());
    &q * DMatrix::from_diagonal(&eig) * q.transpose()
}

/// Random convex polygon: `n` points at sorted random angles on a randomly
/// rotated ellipse with semi-axes in `[0.5, 2]`, shifted by up to 1 in each
/// coordinate.
pub fn random_convex_polygon<R: Rng>(n: usize, rng: &mut R) -> Polygon {
    loop {
        let (a, b) = (0.5 + 1.5 * rng.random::<f64>(), 0.5 + 1.5 * rng.random::<f64>());
        let rot = 2.0 * PI * rng.random::<f64>();
        let shift = Vec2::new(2.0 * rng.random::<f64>() - 1.0, 2.0 * rng.random::<f64>() - 1.0);
        let mut angles: Vec<f64> = (0..n.max(3)).map(|_| 2.0 * PI * rng.random::<f64>()).collect();
        angles.sort_by(f64::total_cmp);
        let (c, s) = (rot.cos(), rot.sin());
        let vertices = angles
            .iter()
            .map(|t| {
                let (x, y) = (a * t.cos(), b * t.sin());
                Vec2::new(c * x - s * y, s * x + c * y) + shift
            })
            .collect();
        // Near-coincident angles can produce collinear or duplicate vertices.
        if let Ok(p) = Polygon::new(vertices) {
            return p;
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MatrixIdentityReport {
    pub dim: usize,
    /// Largest elementwise deviation among `A − A(A+B)⁻¹A`, `B(A+B)⁻¹A`,
    /// `A(A+B)⁻¹B` and `(A⁻¹+B⁻¹)⁻¹`, relative to the largest entry.
    pub chain_deviation: f64,
    /// Relative deviation of `det((A⁻¹+B⁻¹)⁻¹)` from `det A det B / det(A+B)`.
    pub det_deviation: f64,
}

impl MatrixIdentityReport {
    pub fn max_deviation(&self) -> f64 {
        self.chain_deviation.max(self.det_deviation)
    }
}

fn spd_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    m.clone().cholesky().map(|c| c.inverse()).ok_or(Error::NotSpd)
}

/// Evaluate both sides of the resolvent and determinant identities for a
/// pair of symmetric positive-definite matrices.
pub fn matrix_identities(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<MatrixIdentityReport> {
    if a.shape() != b.shape() || !a.is_square() {
        return Err(Error::InvalidArgument(
            "matrices must be square and of equal size".into(),
        ));
    }
    let sum = a + b;
    let sum_inv = spd_inverse(&sum)?;
    let reference = spd_inverse(&(spd_inverse(a)? + spd_inverse(b)?))?;
    let exprs = [a - a * &sum_inv * a, b * &sum_inv * a, a * &sum_inv * b];
    let scale = reference.amax();
    let chain_deviation = exprs
        .iter()
        .map(|e| (e - &reference).amax() / scale)
        .fold(0.0, f64::max);
    let lhs = reference.determinant();
    let rhs = a.determinant() * b.determinant() / sum.determinant();
    Ok(MatrixIdentityReport {
        dim: a.nrows(),
        chain_deviation,
        det_deviation: (lhs - rhs).abs() / rhs.abs(),
    })
}

/// Surface area of the unit sphere `S^{k−1}` in `ℝ^k`.
pub fn sphere_area(k: u32) -> f64 {
    // ω_1 = 2, ω_2 = 2π, ω_{k+2} = 2π ω_k / k
    let (mut w, mut j) = if k % 2 == 1 { (2.0, 1) } else { (2.0 * PI, 2) };
    while j < k {
        w *= 2.0 * PI / j as f64;
        j += 2;
    }
    w
}

#[derive(Clone, Debug, Serialize)]
pub struct ParaboloidReport {
    /// Dimension `d` of `q`; the region lives in `ℝ^{d+1}`.
    pub dim: usize,
    pub s: f64,
    pub closed_form: f64,
    /// The same expression with the extra factor `2^{(d+2)/2}`.
    pub statement_form: f64,
    pub monte_carlo: MonteCarloEstimate,
    pub sigmas: f64,
    pub relative_error: f64,
    pub statement_sigmas: f64,
}

/// Volume between the graphs of `f₁(x) = t − ⟨A(x−q), x−q⟩/2` and
/// `f₂(x) = ⟨Bx, x⟩/2`, by closed form and by Monte Carlo.
pub fn paraboloid_volume(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DVector<f64>,
    t: f64,
    n: usize,
    seed: u64,
) -> Result<ParaboloidReport> {
    let d = a.nrows();
    if b.shape() != a.shape() || q.len() != d || !a.is_square() {
        return Err(Error::InvalidArgument("dimension mismatch".into()));
    }
    let harmonic = spd_inverse(&(spd_inverse(a)? + spd_inverse(b)?))?;
    let cap = 2.0 * t - q.dot(&(&harmonic * q));
    if cap < 0.0 || t <= 0.0 {
        return Err(Error::InvalidCap(cap));
    }
    let s = 0.5 * cap;
    let sum = a + b;
    let closed_form = paraboloid_closed_form(d, s, sum.determinant());
    let nn = d as u32 + 1;
    let statement_form = closed_form * 2f64.powf((nn as f64 + 1.0) / 2.0);

    // The cap projects onto the ellipsoid ⟨(A+B)y, y⟩ ≤ 2s around
    // x₀ = (A+B)⁻¹Aq, and 0 ≤ f₂ ≤ x' ≤ f₁ ≤ t on it.
    let sum_inv = spd_inverse(&sum)?;
    let x0 = &sum_inv * a * q;
    let mut lo = Vec::with_capacity(d + 1);
    let mut hi = Vec::with_capacity(d + 1);
    for i in 0..d {
        let r = (2.0 * s * sum_inv[(i, i)]).sqrt();
        lo.push(x0[i] - r);
        hi.push(x0[i] + r);
    }
    lo.push(0.0);
    hi.push(t);
    let inside = |z: &[f64]| {
        let x = DVector::from_column_slice(&z[..d]);
        let xq = &x - q;
        let f1 = t - 0.5 * xq.dot(&(a * &xq));
        let f2 = 0.5 * x.dot(&(b * &x));
        f2 <= z[d] && z[d] <= f1
    };
    let mc = mc_volume(inside, &lo, &hi, n, seed);
    Ok(ParaboloidReport {
        dim: d,
        s,
        closed_form,
        statement_form,
        sigmas: mc.sigmas(closed_form),
        relative_error: (mc.mean - closed_form).abs() / closed_form,
        statement_sigmas: mc.sigmas(statement_form),
        monte_carlo: mc,
    })
}

/// `ω_{n−1} 2^{(n+1)/2} s^{(n+1)/2} / ((n² − 1) √det(A+B))` with `n = d + 1`.
pub fn paraboloid_closed_form(d: usize, s: f64, det_sum: f64) -> f64 {
    let n = d as f64 + 1.0;
    let e = (n + 1.0) / 2.0;
    sphere_area(d as u32) * 2f64.powf(e) * s.powf(e) / ((n * n - 1.0) * det_sum.sqrt())
}

// Double-double arithmetic for the power series, which cancels heavily.
#[derive(Clone, Copy)]
struct Dd(f64, f64);

impl Dd {
    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        Dd(s, (a - (s - bb)) + (b - bb))
    }

    fn add(self, o: Dd) -> Dd {
        let Dd(s, e) = Dd::two_sum(self.0, o.0);
        let e = e + self.1 + o.1;
        Dd::two_sum(s, e)
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.0 * o.0;
        let e = self.0.mul_add(o.0, -p) + self.0 * o.1 + self.1 * o.0;
        Dd::two_sum(p, e)
    }

    fn div_f64(self, d: f64) -> Dd {
        let q = self.0 / d;
        let r = Dd::two_sum(self.0, -q * d).add(Dd(-q.mul_add(d, -(q * d)), self.1));
        Dd::two_sum(q, r.0 / d)
    }
}

/// Below this argument the power series is used, above it the Hankel
/// asymptotic expansion.
pub const BESSEL_SWITCH: f64 = 25.0;

fn bessel_series(n: u32, x: f64) -> f64 {
    // (x/2)^n / n! Σ (−y)^k / (k! (n+1)_k), y = (x/2)²
    let h = 0.5 * x;
    let y = Dd(h * h, h.mul_add(h, -(h * h)));
    let mut lead = 1.0;
    for k in 1..=n {
        lead *= h / k as f64;
    }
    let mut term = Dd(1.0, 0.0);
    let mut sum = Dd(1.0, 0.0);
    for k in 1..200 {
        term = term.mul(y).div_f64(-((k * (k + n as usize)) as f64));
        sum = sum.add(term);
        if term.0.abs() < 1e-34 * sum.0.abs().max(1e-300) {
            break;
        }
    }
    lead * (sum.0 + sum.1)
}

fn bessel_hankel(n: u32, x: f64) -> f64 {
    let mu = 4.0 * (n * n) as f64;
    let chi = x - (0.5 * n as f64 + 0.25) * PI;
    let (mut p, mut q) = (0.0, 0.0);
    let mut a: f64 = 1.0; // a_k / x^k
    let mut prev: f64 = f64::INFINITY;
    for k in 0..60 {
        if a.abs() > prev || a.abs() < 1e-18 {
            break;
        }
        prev = a.abs();
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * a;
        } else {
            q += sign * a;
        }
        let odd = (2 * k + 1) as f64;
        a *= (mu - odd * odd) / ((k + 1) as f64 * 8.0 * x);
    }
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Bessel function of the first kind `J_n(x)` for `n ≤ 2`.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    assert!(n <= 2, "only orders 0, 1 and 2 are provided");
    let sign = if x < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
    let ax = x.abs();
    sign * if ax <= BESSEL_SWITCH {
        bessel_series(n, ax)
    } else {
        bessel_hankel(n, ax)
    }
}

pub fn bessel_j0(x: f64) -> f64 {
    bessel_j(0, x)
}

pub fn bessel_j1(x: f64) -> f64 {
    bessel_j(1, x)
}

pub fn bessel_j2(x: f64) -> f64 {
    bessel_j(2, x)
}

/// `m`-th positive zero of `J₁` by bisection around McMahon's estimate.
pub fn bessel_j1_zero(m: u32) -> f64 {
    assert!(m >= 1);
    let beta = (m as f64 + 0.25) * PI;
    let (mut a, mut b) = (beta - 0.6, beta + 0.1);
    let mut fa = bessel_j1(a);
    assert!(fa * bessel_j1(b) < 0.0, "zero not bracketed for m = {m}");
    while b - a > 1e-15 * b {
        let c = 0.5 * (a + b);
        let fc = bessel_j1(c);
        if fc == 0.0 {
            return c;
        }
        if (fc < 0.0) == (fa < 0.0) {
            a = c;
            fa = fc;
        } else {
            b = c;
        }
    }
    0.5 * (a + b)
}

/// McMahon's two-term approximation `β − 3/(8β)`, `β = (m + 1/4)π`.
pub fn mcmahon_j1_zero(m: u32) -> f64 {
    let beta = (m as f64 + 0.25) * PI;
    beta - 3.0 / (8.0 * beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_polygons_are_convex() {
        let mut rng = stream_rng(3, 0);
        for n in [3, 5, 12] {
            let p = random_convex_polygon(n, &mut rng);
            assert!(p.len() >= 3 && p.area() > 0.0);
        }
    }

    // Bessel's integral by the trapezoid rule, exponentially accurate for
    // this periodic integrand.
    fn bessel_integral(n: u32, x: f64) -> f64 {
        let k = 512 + 2 * x.abs() as usize;
        let h = PI / k as f64;
        let f = |tau: f64| (n as f64 * tau - x * tau.sin()).cos();
        let mut s = 0.5 * (f(0.0) + f(PI));
        for i in 1..k {
            s += f(i as f64 * h);
        }
        s * h / PI
    }

    #[test]
    fn bessel_matches_integral_representation() {
        for n in 0..=2 {
            for i in 0..400 {
                let x = i as f64 * 0.37;
                let a = bessel_j(n, x);
                let b = bessel_integral(n, x);
                assert!((a - b).abs() < 1e-13, "J{n}({x}): {a} vs {b}");
            }
        }
    }

    #[test]
    fn series_and_asymptotic_overlap() {
        for n in 0..=2 {
            for x in [BESSEL_SWITCH - 1.0, BESSEL_SWITCH, BESSEL_SWITCH + 1.0] {
                let d = (bessel_series(n, x) - bessel_hankel(n, x)).abs();
                assert!(d < 1e-12, "J{n}({x}): {d}");
            }
        }
    }

    #[test]
    fn j1_zero_examples() {
        assert!((bessel_j1_zero(1) - 3.831705970).abs() < 1e-9);
        assert!((bessel_j1_zero(2) - 7.015586670).abs() < 1e-9);
        assert!((bessel_j1_zero(5) - 16.47063005).abs() < 1e-8);
        for m in 3..60 {
            let beta = (m as f64 + 0.25) * PI;
            let dev = (bessel_j1_zero(m) - beta).abs();
            assert!(dev <= 3.0 / (8.0 * beta) * 1.1);
            assert!(bessel_j1(bessel_j1_zero(m)).abs() < 1e-14);
        }
    }

    #[test]
    fn bessel_recurrence() {
        for x in [0.5, 3.0, 11.0, 30.0, 80.0] {
            let lhs = bessel_j0(x) + bessel_j2(x);
            assert!((lhs - 2.0 * bessel_j1(x) / x).abs() < 1e-14);
        }
        assert_eq!(bessel_j0(0.0), 1.0);
        assert_eq!(bessel_j1(0.0), 0.0);
        assert_eq!(bessel_j1(-2.0), -bessel_j1(2.0));
    }

    #[test]
    fn mc_examples() {
        let sq = mc_area(|x, y| x <= 1.0 && y <= 1.0, [0.0, 0.0], [2.0, 2.0], 1_000_000, 7);
        assert!(sq.sigmas(1.0) < 3.0);
        assert!((sq.std_error - 0.0017).abs() < 2e-4);
        let disk = mc_area(|x, y| x * x + y * y <= 1.0, [-1.0, -1.0], [1.0, 1.0], 1_000_000, 8);
        assert!(disk.sigmas(PI) < 3.0);
        let lens = mc_area(
            |x, y| x * x + y * y <= 1.0 && (x - 1.0).powi(2) + y * y <= 1.0,
            [0.0, -1.0],
            [1.0, 1.0],
            1_000_000,
            9,
        );
        assert!((lens_area(1.0, 1.0) - 1.228369698).abs() < 1e-9);
        assert!(lens.sigmas(lens_area(1.0, 1.0)) < 3.0);
    }

    #[test]
    fn mc_is_reproducible() {
        let f = |x: f64, y: f64| x * y < 0.3;
        let a = mc_area(f, [0.0, 0.0], [1.0, 1.0], 200_000, 42);
        let b = mc_area(f, [0.0, 0.0], [1.0, 1.0], 200_000, 42);
        assert_eq!(a, b);
        let c = mc_area(f, [0.0, 0.0], [1.0, 1.0], 200_000, 43);
        assert_ne!(a.mean, c.mean);
    }

    #[test]
    fn matrix_identity_examples() {
        let i2 = DMatrix::<f64>::identity(2, 2);
        let r = matrix_identities(&i2, &i2).unwrap();
        assert!(r.max_deviation() < 1e-15);
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0]));
        let b = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 4.0]));
        let r = matrix_identities(&a, &b).unwrap();
        assert!(r.max_deviation() < 1e-15);
        let h = spd_inverse(&(spd_inverse(&a).unwrap() + spd_inverse(&b).unwrap())).unwrap();
        assert!((h[(0, 0)] - 0.75).abs() < 1e-15 && (h[(1, 1)] - 4.0 / 3.0).abs() < 1e-15);
        assert!((h.determinant() - 1.0).abs() < 1e-15);
        let bad = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -2.0]));
        assert!(matches!(matrix_identities(&bad, &a), Err(Error::NotSpd)));
    }

    #[test]
    fn sphere_areas() {
        assert_eq!(sphere_area(1), 2.0);
        assert_eq!(sphere_area(2), 2.0 * PI);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn paraboloid_examples() {
        let one = DMatrix::from_element(1, 1, 1.0);
        let q = DVector::zeros(1);
        let r = paraboloid_volume(&one, &one, &q, 1.0, 1_000_000, 3).unwrap();
        assert!((r.closed_form - 4.0 / 3.0).abs() < 1e-15);
        assert!(r.sigmas < 3.0);
        assert!(r.statement_sigmas > 10.0);
        let i2 = DMatrix::<f64>::identity(2, 2);
        let r = paraboloid_volume(&i2, &i2, &DVector::zeros(2), 1.0, 200_000, 4).unwrap();
        assert!((r.closed_form - PI / 2.0).abs() < 1e-14);
        let far = DVector::from_vec(vec![3.0]);
        assert!(matches!(
            paraboloid_volume(&one, &one, &far, 1.0, 10, 0),
            Err(Error::InvalidCap(_))
        ));
    }

    #[test]
    fn paraboloid_homogeneity() {
        for d in 1..=3usize {
            let v1 = paraboloid_closed_form(d, 0.7, 2.5);
            let v2 = paraboloid_closed_form(d, 0.7 * 3.0, 2.5);
            assert!((v2 / v1 - 3f64.powf((d as f64 + 2.0) / 2.0)).abs() < 1e-12);
        }
    }
}

//! Named verification suites. Defaults are the acceptance tolerances, so
//! `covario verify all` doubles as the acceptance runner.

use std::fmt::Write as _;
use std::time::Instant;

use clap::{Args, ValueEnum};
use covario::asymptotics::{crosscov_counterexample, crosscov_pair_comparison, kobayashi_report, random_family_params};
use covario::covariogram::{
    curvature_pair_from_covariogram, directional_derivative_origin, support_of_crosscov, Covariogram,
};
use covario::fourier_laplace::{
    band_for, branch_sweep, track_zero, verify_factorization, verify_reflection_identity, RayTransformContext,
};
use covario::oracles::{
    bessel_j1_zero, matrix_identities, paraboloid_volume, random_convex_polygon, random_spd, stream_rng,
};
use covario::radon::ChordFunction;
use covario::{Body, Direction, FamilyParams, Vec2};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;
use serde_json::json;

use crate::{Failure, Outcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    MatrixIdentities,
    Paraboloid,
    Factorization,
    Counterexample,
    KobayashiDisk,
    Curvature,
    SupportWidth,
    Matheron,
    Properties,
    All,
}

impl Suite {
    const EACH: [Suite; 9] = [
        Suite::Counterexample,
        Suite::KobayashiDisk,
        Suite::Curvature,
        Suite::Paraboloid,
        Suite::MatrixIdentities,
        Suite::Factorization,
        Suite::SupportWidth,
        Suite::Matheron,
        Suite::Properties,
    ];

    fn name(self) -> &'static str {
        match self {
            Suite::MatrixIdentities => "matrix-identities",
            Suite::Paraboloid => "paraboloid",
            Suite::Factorization => "factorization",
            Suite::Counterexample => "counterexample",
            Suite::KobayashiDisk => "kobayashi-disk",
            Suite::Curvature => "curvature",
            Suite::SupportWidth => "support-width",
            Suite::Matheron => "matheron",
            Suite::Properties => "properties",
            Suite::All => "all",
        }
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    /// Counterexample family (1 or 3); both by default.
    #[arg(long, value_parser = parse_family)]
    pub family: Option<u8>,
    /// Random instances per family or suite.
    #[arg(long)]
    pub draws: Option<usize>,
    #[arg(long, default_value_t = 20240601)]
    pub seed: u64,
    /// Monte Carlo samples per paraboloid instance.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    /// Override the main tolerance of a single suite.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

fn parse_family(s: &str) -> Result<u8, String> {
    match s.trim() {
        "1" => Ok(1),
        "3" => Ok(3),
        _ => Err(format!(
            "family must be 1 or 3 (families 2 and 4 are their partners), got {s:?}"
        )),
    }
}

/// One row of the pass/fail table.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub value: f64,
    pub limit: String,
    pub passed: bool,
}

struct Checks {
    suite: &'static str,
    rows: Vec<Check>,
}

impl Checks {
    fn new(suite: Suite) -> Self {
        Self {
            suite: suite.name(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, name: impl Into<String>, value: f64, limit: String, passed: bool) {
        self.rows.push(Check {
            suite: self.suite,
            name: name.into(),
            value,
            limit,
            passed,
        });
    }

    fn at_most(&mut self, name: impl Into<String>, value: f64, max: f64) {
        self.push(name, value, format!("<= {max:e}"), value <= max);
    }

    fn at_least(&mut self, name: impl Into<String>, value: f64, min: f64) {
        self.push(name, value, format!(">= {min:e}"), value >= min);
    }

    fn within(&mut self, name: impl Into<String>, value: f64, lo: f64, hi: f64) {
        self.push(name, value, format!("in [{lo}, {hi}]"), (lo..=hi).contains(&value));
    }

    fn near(&mut self, name: impl Into<String>, value: f64, center: f64, delta: f64) {
        self.push(
            name,
            value,
            format!("{center} ± {delta}"),
            (value - center).abs() <= delta,
        );
    }

    fn count_zero(&mut self, name: impl Into<String>, count: usize) {
        self.push(name, count as f64, "= 0".into(), count == 0);
    }

    fn failed(&mut self, name: impl Into<String>, err: impl std::fmt::Display) {
        self.push(format!("{}: {err}", name.into()), f64::NAN, "no error".into(), false);
    }
}

/// Run the requested suite (or every suite) and build the pass/fail table.
pub fn run_suites(args: &VerifyArgs) -> Result<Outcome, Failure> {
    if args.suite == Suite::All && args.tolerance.is_some() {
        return Err(Failure::Usage(
            "--tolerance applies to a single suite, not to all".into(),
        ));
    }
    if args.family.is_some() && !matches!(args.suite, Suite::Counterexample | Suite::All) {
        return Err(Failure::Usage("--family applies to the counterexample suite".into()));
    }
    if args.samples < 1000 {
        return Err(Failure::Usage("--samples must be at least 1000".into()));
    }
    let started = Instant::now();
    let suites: Vec<Suite> = match args.suite {
        Suite::All => Suite::EACH.to_vec(),
        s => vec![s],
    };
    let mut rows = Vec::new();
    for s in suites {
        rows.extend(run_suite(s, args));
    }
    if args.suite == Suite::All {
        let mut c = Checks::new(Suite::All);
        c.at_most("total runtime [s]", started.elapsed().as_secs_f64(), 300.0);
        rows.extend(c.rows);
    }
    let failures = rows.iter().filter(|r| !r.passed).count();
    let mut text = String::new();
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0).max(5);
    let _ = writeln!(
        text,
        "{:<18} {:<width$} {:>12}  {:<16} result",
        "suite", "check", "value", "limit"
    );
    for r in &rows {
        let _ = writeln!(
            text,
            "{:<18} {:<width$} {:>12.4e}  {:<16} {}",
            r.suite,
            r.name,
            r.value,
            r.limit,
            if r.passed { "PASS" } else { "FAIL" }
        );
    }
    let _ = writeln!(text, "{} checks, {failures} failed", rows.len());
    Ok(Outcome {
        report: json!({
            "suite": args.suite,
            "seed": args.seed,
            "passed": failures == 0,
            "checks": rows,
        }),
        text,
        failed: (failures > 0).then(|| format!("{failures} checks failed")),
    })
}

fn run_suite(suite: Suite, args: &VerifyArgs) -> Vec<Check> {
    let mut c = Checks::new(suite);
    let result = match suite {
        Suite::Counterexample => counterexample(&mut c, args),
        Suite::KobayashiDisk => kobayashi_disk(&mut c, args),
        Suite::Curvature => curvature(&mut c, args),
        Suite::Paraboloid => paraboloid(&mut c, args),
        Suite::MatrixIdentities => matrices(&mut c, args),
        Suite::Factorization => factorization(&mut c, args),
        Suite::SupportWidth => support_width(&mut c, args),
        Suite::Matheron => matheron(&mut c, args),
        Suite::Properties => properties(&mut c, args),
        Suite::All => unreachable!("expanded by run_suites"),
    };
    if let Err(e) = result {
        c.failed("suite aborted", e);
    }
    c.rows
}

type SuiteResult = Result<(), covario::Error>;

fn trefoil() -> Body {
    Body::support_series(1.0, vec![(0.0, 0.0), (0.0, 0.0), (0.05, 0.0)]).expect("valid support body")
}

fn unit_disk() -> Body {
    Body::disk(Vec2::zeros(), 1.0).expect("valid disk")
}

fn counterexample(c: &mut Checks, args: &VerifyArgs) -> SuiteResult {
    let tol = args.tolerance.unwrap_or(1e-9);
    let draws = args.draws.unwrap_or(20);
    let families = args.family.map_or(vec![1u8, 3], |f| vec![f]);
    let started = Instant::now();
    for &family in &families {
        let mut rng = stream_rng(args.seed, family as u64);
        let mut params = vec![FamilyParams::default()];
        params.extend((0..draws).map(|_| random_family_params(family, &mut rng)));
        let mut worst: f64 = 0.0;
        let mut associates = 0;
        for p in &params {
            let r = crosscov_counterexample(family, p, 41)?;
            worst = worst.max(r.max_deviation);
            associates += r.trivial_associates as usize;
        }
        c.at_most(
            format!("family {family}: max |g_i - g_i+1| over {} pairs", params.len()),
            worst,
            tol,
        );
        c.count_zero(format!("family {family}: trivial associate pairs"), associates);
    }
    c.at_most("runtime [s]", started.elapsed().as_secs_f64(), 10.0);
    if families.contains(&1) {
        let base = FamilyParams::default();
        let perturbed = FamilyParams {
            alpha: base.alpha + 0.1,
            ..base
        };
        let r = crosscov_pair_comparison(1, &base, &perturbed, 41)?;
        c.at_least("negative control: perturbed alpha deviation", r.max_deviation, 1e-3);
    }
    Ok(())
}

fn kobayashi_disk(c: &mut Checks, args: &VerifyArgs) -> SuiteResult {
    let tol = args.tolerance.unwrap_or(1e-6);
    let disk = unit_disk();
    let u = Direction::new(0.0);
    let ctx = RayTransformContext::with_band(&disk, u, band_for(20, 2.0));
    let mut worst: f64 = 0.0;
    for m in 1..=20 {
        let z = track_zero(&ctx, m)?.zeta;
        worst = worst.max((z - Complex64::new(bessel_j1_zero(m), 0.0)).norm());
    }
    c.at_most("max |F_m - j_1,m|, m = 1..20", worst, tol);
    let r = kobayashi_report(&disk, 1..=40, &[u])?;
    c.within("decay exponent over m = 2..40", r.decay_exponent, -1.3, -0.7);
    c.near("deviation at m = 1", r.max_deviation[0].1, 0.0953, 0.01);
    let im40 = r.im_recovery.last().map_or(f64::NAN, |x| x.1);
    c.at_most("Im recovery error at m = 40", im40, 1e-3);
    Ok(())
}

fn curvature(c: &mut Checks, args: &VerifyArgs) -> SuiteResult {
    let tol = args.tolerance.unwrap_or(2e-2);
    let body = trefoil();
    let started = Instant::now();
    let r = kobayashi_report(&body, 40..=40, &Direction::grid(120))?;
    let elapsed = started.elapsed().as_secs_f64();
    c.at_most("cw3: Im F_40 recovery, 120 directions", r.im_recovery[0].1, tol);
    c.at_most("cw3: Re F_40 recovery, 120 directions", r.re_recovery[0].1, 2e-2);
    c.at_most("cw3: sweep runtime [s]", elapsed, 60.0);

    let e1 = Direction::new(0.0);
    let disk = curvature_pair_from_covariogram(&unit_disk(), e1)?;
    let disk_err = (disk.low - 1.0).abs().max((disk.high - 1.0).abs());
    c.at_most("disk: pair relative error", disk_err, 0.02);
    let pair = curvature_pair_from_covariogram(&body, e1)?;
    // h + h'' = 1 - 0.4 cos 3θ
    let (lo, hi) = (1.0 / 1.4, 1.0 / 0.6);
    let err = ((pair.low - lo) / lo).abs().max(((pair.high - hi) / hi).abs());
    c.at_most("cw3: pair relative error at e1", err, 0.05);
    Ok(())
}

fn paraboloid(c: &mut Checks, args: &VerifyArgs) -> SuiteResult {
    let draws = args.draws.unwrap_or(10);
    let sigma_tol = args.tolerance.unwrap_or(3.0);
    let mut rng = stream_rng(args.seed, 101);
    let mut worst_sigma: f64 = 0.0;
    let mut worst_rel: f64 = 0.0;
    let mut done = 0;
    while done < draws {
        let d = 1 + done % 3;
        let a = random_spd(d, 0.5, 2.0, &mut rng);
        let b = random_spd(d, 0.5, 2.0, &mut rng);
        let q = DVector::from_fn(d, |_, _| rng.random::<f64>() - 0.5);
        let t = 0.5 + 1.5 * rng.random::<f64>();
        match paraboloid_volume(&a, &b, &q, t, args.samples, args.seed + done as u64) {
            Ok(r) => {
                worst_sigma = worst_sigma.max(r.sigmas);
                worst_rel = worst_rel.max(r.relative_error);
                done += 1;
            }
            Err(covario::Error::InvalidCap(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    c.at_most(
        format!("{draws} instances, d = 1..3: max sigmas"),
        worst_sigma,
        sigma_tol,
    );
    c.at_most(
        format!("{draws} instances, d = 1..3: max relative error"),
        worst_rel,
        0.01,
    );
    let one = DMatrix::from_element(1, 1, 1.0);
    let r = paraboloid_volume(&one, &one, &DVector::zeros(1), 1.0, args.samples, args.seed)?;
    c.at_most(
        "d = 1 reference: |closed form - 4/3|",
        (r.closed_form - 4.0 / 3.0).abs(),
        1e-12,
    );
    c.at_most("d = 1 reference: sigmas", r.sigmas, sigma_tol);
    c.at_least(
        "d = 1 reference: statement constant rejected [sigmas]",
        r.statement_sigmas,
        10.0,
    );
    Ok(())
}

fn matrices(c: &mut Checks, args: &VerifyArgs) -> SuiteResult {
    let tol = args.tolerance.unwrap_or(1e-10);
    let draws = args.draws.unwrap_or(1000);
    let mut rng = stream_rng(args.seed, 202);
    let mut worst: f64 = 0.0;
    for i in 0..draws {
        let d = 1 + i % 6;
        let a = random_spd(d, 0.1, 10.0, &mut rng);
        let b = random_spd(d, 0.1, 10.0, &mut rng);
        worst = worst.max(matrix_identities(&a, &b)?.max_deviation());
    }
    c.at_most(
        format!("{draws} SPD pairs, dims 1..6: max relative deviation"),
        worst,
        tol,
    );
    Ok(())
}

fn xi_grid() -> Vec<f64> {
    (0..512).map(|i| 50.0 * i as f64 / 511.0).collect()
}

fn factorization(c: &mut Checks, args: &VerifyArgs) -> SuiteResult {
    let tol = args.tolerance.unwrap_or(1e-6);
    let xi = xi_grid();
    let u = Direction::new(0.0);
    let disk = verify_factorization(&unit_disk(), u, &xi)?;
    c.at_most("disk: sup |g^ - |F|^2| / area^2", disk.relative(), tol);
    let mut rng = stream_rng(args.seed, 303);
    let polygon = Body::Polygon(random_convex_polygon(7, &mut rng));
    let poly = verify_factorization(&polygon, u, &xi)?;
    c.at_most("random polygon: sup |g^ - |F|^2| / area^2", poly.relative(), tol);
    Ok(())
}

fn support_width(c: &mut Checks, args: &VerifyArgs) -> SuiteResult {
    let tol = args.tolerance.unwrap_or(1e-12);
    let draws = args.draws.unwrap_or(50);
    let mut rng = stream_rng(args.seed, 404);
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let (nh, nk) = (rng.random_range(3..10), rng.random_range(3..10));
        let h = Body::Polygon(random_convex_polygon(nh, &mut rng));
        let k = Body::Polygon(random_convex_polygon(nk, &mut rng));
        worst = worst.max(support_of_crosscov(&h, &k, 360).width_deviation);
    }
    c.at_most(format!("{draws} polygon pairs, 360 directions"), worst, tol);
    Ok(())
}

fn matheron(c: &mut Checks, args: &VerifyArgs) -> SuiteResult {
    let tol = args.tolerance.unwrap_or(1e-3);
    let bodies = [
        ("square", Body::rectangle(-0.5, -0.5, 0.5, 0.5)?),
        ("disk", unit_disk()),
        ("constant width", trefoil()),
    ];
    for (name, body) in &bodies {
        let worst = Direction::grid(12)
            .into_iter()
            .map(|v| {
                let d = directional_derivative_origin(body, v);
                (d.finite_difference - d.geometric).abs()
            })
            .fold(0.0, f64::max);
        c.at_most(format!("{name}: slope at o vs -projection length"), worst, tol);
    }
    Ok(())
}

fn properties(c: &mut Checks, args: &VerifyArgs) -> SuiteResult {
    let tol = args.tolerance.unwrap_or(1e-12);
    let mut rng = stream_rng(args.seed, 505);
    let bodies = [
        ("square", Body::rectangle(-0.5, -0.5, 0.5, 0.5)?),
        ("polygon", Body::Polygon(random_convex_polygon(9, &mut rng))),
        ("disk", unit_disk()),
        ("cw3", trefoil()),
    ];
    for (name, body) in &bodies {
        let g = Covariogram::new(body);
        let area = body.area();
        let reach = 2.0 * body.radius_bound();
        let shift = Vec2::new(0.37, -1.21);
        let g_moved = Covariogram::new(&body.translate(shift));
        let g_reflected = Covariogram::new(&body.reflect());
        let (mut even, mut moved, mut reflected, mut rise): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..64 {
            let x = Vec2::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * reach;
            let v = g.eval(x);
            even = even.max((v - g.eval(-x)).abs());
            moved = moved.max((v - g_moved.eval(x)).abs());
            reflected = reflected.max((v - g_reflected.eval(x)).abs());
        }
        for u in Direction::grid(16) {
            let mut prev = g.eval(Vec2::zeros());
            for i in 1..=40 {
                let v = g.eval(u.u() * (reach * i as f64 / 40.0));
                rise = rise.max(v - prev);
                prev = v;
            }
        }
        c.at_most(format!("{name}: g(x) - g(-x)"), even / area, tol);
        c.at_most(format!("{name}: translation invariance"), moved / area, tol);
        c.at_most(format!("{name}: reflection invariance"), reflected / area, tol);
        c.at_most(format!("{name}: increase along rays"), rise / area, tol);
        let radon = Direction::grid(8)
            .into_iter()
            .map(|u| (ChordFunction::new(body, u).integral() - area).abs() / area)
            .fold(0.0, f64::max);
        c.at_most(format!("{name}: integral of chord function - area"), radon, tol);
        let samples: Vec<Complex64> = (0..16)
            .map(|i| Complex64::new(1.0 + 3.0 * i as f64, 0.5 - i as f64 / 16.0))
            .collect();
        let reflection = verify_reflection_identity(body, Direction::new(0.7), &samples)?;
        c.at_most(
            format!("{name}: F_-K(z) - conj F_K(conj z)"),
            reflection.max_deviation / reflection.scale.max(1.0),
            tol,
        );
    }
    let square = Covariogram::new(&Body::rectangle(0.0, 0.0, 1.0, 1.0)?);
    let mut product: f64 = 0.0;
    for j in 0..41 {
        for i in 0..41 {
            let x = Vec2::new(-1.0 + i as f64 / 20.0, -1.0 + j as f64 / 20.0);
            let exact = (1.0 - x.x.abs()) * (1.0 - x.y.abs());
            product = product.max((square.eval(x) - exact).abs());
        }
    }
    c.at_most("unit square: g - (1-|x1|)(1-|x2|)", product, tol);
    let sweep = branch_sweep(&trefoil(), &Direction::grid(24), 1..=3)?;
    c.at_most(
        "cw3: branch jump / continuity bound",
        sweep.max_jump / sweep.jump_bound,
        1.0,
    );
    Ok(())
}

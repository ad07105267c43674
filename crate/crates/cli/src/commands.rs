use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use covario::asymptotics::{determination_experiment, kobayashi_report, DeterminationVerdict};
use covario::covariogram::{support_boundary_point, support_of_crosscov, Covariogram, CovariogramGrid, CurvaturePair};
use covario::fourier_laplace::{branch_sweep, RayTransformContext, DEFAULT_BAND};
use covario::geometry::example_pair;
use covario::radon::{leading_coefficients, ChordFunction};
use covario::{Body, Direction, FamilyParams};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::{
    load_body, load_params, load_spec, write_output, BodyArgs, Command, CrosscovArgs, Failure, FltArgs, GridArgs,
    GridSpec, Outcome, RadonArgs, RecoverArgs, ZerosArgs,
};

pub(crate) fn dispatch(command: &Command) -> Result<Outcome, Failure> {
    match command {
        Command::BodyValidate(a) => body_validate(a),
        Command::Covariogram(a) => covariogram(a),
        Command::Crosscov(a) => crosscov(a),
        Command::Radon(a) => radon(a),
        Command::Flt(a) => flt(a),
        Command::Zeros(a) => zeros(a),
        Command::Kobayashi(a) => kobayashi(a),
        Command::RecoverCurvature(a) => recover_curvature(a),
        Command::Verify(a) => crate::verify::run_suites(a),
    }
}

fn kind(body: &Body) -> &'static str {
    match body {
        Body::Polygon(_) => "polygon",
        Body::Disk(_) => "disk",
        Body::Support(_) => "support2d",
    }
}

fn body_validate(a: &BodyArgs) -> Result<Outcome, Failure> {
    let spec = load_spec(&a.body)?;
    let body = match spec.to_body() {
        Ok(b) => b,
        Err(e) => {
            return Ok(Outcome {
                report: json!({ "valid": false, "error": e.to_string() }),
                text: format!("{}: invalid: {e}\n", a.body.display()),
                failed: Some(format!("{} is not a valid body: {e}", a.body.display())),
            })
        }
    };
    let widths: Vec<f64> = Direction::grid(360).into_iter().map(|u| body.width(u)).collect();
    let (wmin, wmax) = widths
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &w| (lo.min(w), hi.max(w)));
    let vertices = match &body {
        Body::Polygon(p) => Some(p.len()),
        _ => None,
    };
    let report = json!({
        "valid": true,
        "kind": kind(&body),
        "smooth": body.is_smooth(),
        "area": body.area(),
        "min_width": wmin,
        "max_width": wmax,
        "vertices": vertices,
        "hash": covario::covariogram::body_hash(&body),
    });
    let mut text = format!(
        "{}: valid {} (smooth: {})\narea       {}\nwidth      [{wmin}, {wmax}]\n",
        a.body.display(),
        kind(&body),
        body.is_smooth(),
        body.area()
    );
    if let Some(n) = vertices {
        let _ = writeln!(text, "vertices   {n}");
    }
    Ok(Outcome {
        report,
        text,
        failed: None,
    })
}

fn support_extent(g: &Covariogram) -> [f64; 2] {
    g.support_polygon()
        .vertices()
        .iter()
        .fold([0.0f64, 0.0f64], |e, v| [e[0].max(v.x.abs()), e[1].max(v.y.abs())])
}

fn sidecar_path(out: &Path) -> PathBuf {
    let p = out.with_extension("json");
    if p == out {
        out.with_extension("meta.json")
    } else {
        p
    }
}

fn emit_grid(grid: &CovariogramGrid, spec: &GridSpec, extra: Value, text: &mut String) -> Result<Value, Failure> {
    let sidecar = serde_json::to_value(grid.sidecar()).expect("sidecars serialize");
    let mut report = json!({
        "grid": [grid.nx, grid.ny],
        "sidecar": sidecar.clone(),
        "max_value": grid.values.iter().copied().fold(0.0, f64::max),
    });
    if grid.nx % 2 == 1 && grid.ny % 2 == 1 {
        report["center_value"] = json!(grid.value(grid.nx / 2, grid.ny / 2));
    }
    if let (Value::Object(dst), Value::Object(src)) = (&mut report, extra) {
        dst.extend(src);
    }
    match &spec.out {
        Some(out) => {
            write_output(Some(out), &grid.to_csv(), text)?;
            let side = sidecar_path(out);
            let body = serde_json::to_string_pretty(&sidecar).expect("sidecars serialize") + "\n";
            write_output(Some(&side), &body, text)?;
            report["out"] = json!(out);
            report["sidecar_path"] = json!(side);
            let _ = writeln!(
                text,
                "wrote {}x{} grid to {} (sidecar {})",
                grid.nx,
                grid.ny,
                out.display(),
                side.display()
            );
            if let Some(c) = report.get("center_value") {
                let _ = writeln!(text, "value at centre {c}");
            }
        }
        None => text.push_str(&grid.to_csv()),
    }
    Ok(report)
}

fn covariogram(a: &GridArgs) -> Result<Outcome, Failure> {
    let body = load_body(&a.body)?;
    let g = Covariogram::new(&body);
    let extent = a.grid.extent.map(|(x, y)| [x, y]).unwrap_or_else(|| support_extent(&g));
    let grid = CovariogramGrid::centered(&g, &[&body], extent, a.grid.grid.0, a.grid.grid.1);
    let mut text = String::new();
    let report = emit_grid(&grid, &a.grid, json!({ "area": body.area() }), &mut text)?;
    Ok(Outcome {
        report,
        text,
        failed: None,
    })
}

fn crosscov(a: &CrosscovArgs) -> Result<Outcome, Failure> {
    let (h, k, source) = match (&a.h, &a.k, a.family) {
        (Some(h), Some(k), _) => (load_body(h)?, load_body(k)?, json!({ "h": h, "k": k })),
        (_, _, Some(family)) => {
            let params = match &a.params {
                Some(p) => load_params(p)?,
                None => FamilyParams::default(),
            };
            let (h, k) = example_pair(family, &params)?;
            (h, k, json!({ "family": family, "params": params }))
        }
        _ => return Err(Failure::Usage("give --h and --k, or --family".into())),
    };
    let g = Covariogram::cross(&h, &k);
    let extent = a.grid.extent.map(|(x, y)| [x, y]).unwrap_or_else(|| support_extent(&g));
    let grid = CovariogramGrid::centered(&g, &[&h, &k], extent, a.grid.grid.0, a.grid.grid.1);
    let support = support_of_crosscov(&h, &k, 360);
    let mut text = String::new();
    let report = emit_grid(
        &grid,
        &a.grid,
        json!({
            "source": source,
            "support_vertices": support.polygon.vertices().iter().map(|v| [v.x, v.y]).collect::<Vec<_>>(),
            "support_width_deviation": support.width_deviation,
        }),
        &mut text,
    )?;
    if a.grid.out.is_some() {
        let _ = writeln!(text, "support width deviation {:e}", support.width_deviation);
    }
    Ok(Outcome {
        report,
        text,
        failed: None,
    })
}

fn radon(a: &RadonArgs) -> Result<Outcome, Failure> {
    if a.samples < 2 {
        return Err(Failure::Usage("--samples must be at least 2".into()));
    }
    let body = load_body(&a.body)?;
    let u = Direction::new(a.u);
    let chord = ChordFunction::new(&body, u);
    let (lo, hi) = (chord.lo(), chord.hi());
    let mut csv = String::from("t,chord\n");
    for i in 0..a.samples {
        let t = lo + (hi - lo) * i as f64 / (a.samples - 1) as f64;
        let _ = writeln!(csv, "{t},{}", chord.eval(t));
    }
    let integral = chord.integral();
    let ends = leading_coefficients(&body, u).ok();
    let report = json!({
        "theta": a.u,
        "lo": lo,
        "hi": hi,
        "width": chord.width(),
        "integral": integral,
        "area": body.area(),
        "leading_coefficients": ends.map(|(a0, b0)| [a0, b0]),
        "method": format!("{:?}", chord.method()),
    });
    let mut text = String::new();
    write_output(a.out.as_deref(), &csv, &mut text)?;
    if a.out.is_some() {
        let _ = writeln!(text, "support [{lo}, {hi}], integral {integral} (area {})", body.area());
    }
    Ok(Outcome {
        report,
        text,
        failed: None,
    })
}

fn flt(a: &FltArgs) -> Result<Outcome, Failure> {
    let body = load_body(&a.body)?;
    let u = Direction::new(a.u);
    let needed = a.zeta.iter().map(|z| z.0.abs()).fold(DEFAULT_BAND, f64::max);
    let band = a.band.unwrap_or(needed);
    let ctx = RayTransformContext::with_band(&body, u, band);
    let mut csv = String::from("re_zeta,im_zeta,re_f,im_f,re_df,im_df\n");
    let mut values = Vec::new();
    for &(re, im) in &a.zeta {
        let (f, df) = ctx.eval_with_derivative(Complex64::new(re, im))?;
        let _ = writeln!(csv, "{re},{im},{},{},{},{}", f.re, f.im, df.re, df.im);
        values.push(json!({ "zeta": [re, im], "f": [f.re, f.im], "df": [df.re, df.im] }));
    }
    let report = json!({ "theta": a.u, "band": ctx.band(), "im_cap": ctx.im_cap(), "values": values });
    let mut text = String::new();
    write_output(a.out.as_deref(), &csv, &mut text)?;
    if a.out.is_some() {
        let _ = writeln!(text, "wrote {} values", a.zeta.len());
    }
    Ok(Outcome {
        report,
        text,
        failed: None,
    })
}

fn zeros(a: &ZerosArgs) -> Result<Outcome, Failure> {
    let body = load_body(&a.body)?;
    let grid = a.directions.grid()?;
    let table = branch_sweep(&body, &grid, a.m.clone())?;
    let validated = table.rows.iter().filter(|r| r.validated).count();
    // Continuity is only meaningful on a closed direction grid.
    let continuous = a.directions.directions.is_none() || table.is_continuous();
    let failed = if validated < table.rows.len() {
        Some(format!(
            "{} of {} branches failed validation",
            table.rows.len() - validated,
            table.rows.len()
        ))
    } else if !continuous {
        Some(format!(
            "branch jump {:e} exceeds the continuity bound {:e}",
            table.max_jump, table.jump_bound
        ))
    } else {
        None
    };
    let report = json!({
        "rows": table.rows.len(),
        "validated": validated,
        "max_jump": table.max_jump,
        "jump_bound": table.jump_bound,
        "continuous": continuous,
        "branches": table.rows,
    });
    let mut text = String::new();
    write_output(a.out.as_deref(), &table.to_csv(), &mut text)?;
    if a.out.is_some() {
        let _ = writeln!(
            text,
            "{} rows, {validated} validated, max jump {:e} (bound {:e})",
            table.rows.len(),
            table.max_jump,
            table.jump_bound
        );
    }
    Ok(Outcome { report, text, failed })
}

fn kobayashi(a: &ZerosArgs) -> Result<Outcome, Failure> {
    let body = load_body(&a.body)?;
    let grid = a.directions.grid()?;
    let r = kobayashi_report(&body, a.m.clone(), &grid)?;
    let mut csv = String::from("m,theta,re_zeta,im_zeta,re_center,im_center,deviation\n");
    for row in &r.rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            row.m, row.theta, row.zeta[0], row.zeta[1], row.center[0], row.center[1], row.deviation
        );
    }
    let mut text = String::new();
    write_output(a.out.as_deref(), &csv, &mut text)?;
    if !r.smooth {
        text.push_str("body is not C2+: centres come from the polygon end model\n");
    }
    let _ = writeln!(
        text,
        "decay exponent {} (fit rms {})",
        r.decay_exponent, r.decay_residual
    );
    text.push_str("m  max_deviation  re_recovery  im_recovery\n");
    for (i, &(m, d)) in r.max_deviation.iter().enumerate() {
        let im = r
            .im_recovery
            .get(i)
            .map(|x| format!("{:e}", x.1))
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(text, "{m}  {d:e}  {:e}  {im}", r.re_recovery[i].1);
    }
    Ok(Outcome {
        report: serde_json::to_value(&r).expect("reports serialize"),
        text,
        failed: None,
    })
}

fn radius_for(g: &Covariogram) -> f64 {
    g.support_polygon()
        .vertices()
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max)
}

fn exact_pair(body: &Body, u: Direction) -> Option<(f64, f64)> {
    let a = body.curvature(u).ok()?;
    let b = body.curvature(u.antipode()).ok()?;
    Some((a.min(b), a.max(b)))
}

fn recover_curvature(a: &RecoverArgs) -> Result<Outcome, Failure> {
    let body = load_body(&a.body)?;
    let grid = a.directions.grid()?;
    let g = Covariogram::new(&body);
    if let Some(other) = &a.against {
        let body_b = load_body(other)?;
        let gb = Covariogram::new(&body_b);
        let radius = radius_for(&g).max(radius_for(&gb));
        let v = determination_experiment(&g, &gb, &grid, radius)?;
        return verdict_outcome(&v, a.out.as_deref());
    }
    let radius = radius_for(&g);
    let pairs: Vec<Result<CurvaturePair, covario::Error>> = grid
        .par_iter()
        .map(|&u| {
            let p = support_boundary_point(&g, u, radius);
            covario::covariogram::curvature_pair_fit(&g, u, p)
        })
        .collect();
    let mut csv = String::from("theta,low,high,sum,harmonic,residual,exact_low,exact_high\n");
    let mut rows = Vec::new();
    let mut failures = 0;
    for (u, pair) in grid.iter().zip(pairs) {
        let exact = exact_pair(&body, *u);
        let (el, eh) = exact.map_or((String::new(), String::new()), |(l, h)| (l.to_string(), h.to_string()));
        match pair {
            Ok(p) => {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{},{el},{eh}",
                    u.theta(),
                    p.low,
                    p.high,
                    p.sum,
                    p.harmonic,
                    p.residual
                );
                rows.push(json!({ "pair": p, "exact": exact.map(|(l, h)| [l, h]) }));
            }
            Err(e) => {
                failures += 1;
                rows.push(json!({ "theta": u.theta(), "error": e.to_string() }));
            }
        }
    }
    let mut text = String::new();
    write_output(a.out.as_deref(), &csv, &mut text)?;
    if a.out.is_some() {
        let _ = writeln!(text, "{} directions, {failures} failed fits", grid.len());
    }
    let failed = (failures > 0).then(|| format!("curvature fit failed in {failures} of {} directions", grid.len()));
    Ok(Outcome {
        report: json!({ "directions": grid.len(), "failed_fits": failures, "rows": rows }),
        text,
        failed,
    })
}

fn verdict_outcome(v: &DeterminationVerdict, out: Option<&Path>) -> Result<Outcome, Failure> {
    let mut csv = String::from("theta,width_a,low_a,high_a,ratio_a,width_b,low_b,high_b,ratio_b\n");
    let opt = |x: Option<f64>| x.map(|r| r.to_string()).unwrap_or_default();
    for (ra, rb) in v.a.iter().zip(&v.b) {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            ra.theta,
            ra.width,
            ra.pair.low,
            ra.pair.high,
            opt(ra.signed_ratio),
            rb.width,
            rb.pair.low,
            rb.pair.high,
            opt(rb.signed_ratio)
        );
    }
    let mut text = String::new();
    if let Some(p) = out {
        write_output(Some(p), &csv, &mut text)?;
    }
    let outcome = serde_json::to_value(v.outcome).expect("verdicts serialize");
    let _ = writeln!(
        text,
        "verdict {}\nmax width gap {:e}, max curvature gap {:e}",
        outcome.as_str().unwrap_or_default(),
        v.max_width_gap,
        v.max_pair_gap
    );
    Ok(Outcome {
        report: serde_json::to_value(v).expect("verdicts serialize"),
        text,
        failed: None,
    })
}

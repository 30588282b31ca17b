//! The acceptance suite: seven criteria, one PASS/FAIL line each. Runs as a
//! plain binary (`harness = false`) so the lines always reach the output.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use subreg::calculus::{random_suite, Holds, Theorem};
use subreg::cli::{self, catalog, Report, RunOptions, Suite, TaskResult};
use subreg::convexity::{sharpness_suite, MaxAffineFn};
use subreg::geneq::{geneq_bound, geneq_catalog};
use subreg::linalg::Matrix;
use subreg::mappings::{alpha0_ph, alpha_linear, LinearOp, Mapping, Multifunction, PHMapping, SetValuedMap, SingleMap};
use subreg::moduli::{certify_sms, Certificate, DEFAULT_TAU};
use subreg::rates::{oracle_rate_grid, SamplingSchedule};
use subreg::spaces::Norm;
use subreg::Evidence;

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs()
}

fn err(e: subreg::Error) -> String {
    e.to_string()
}

fn reproduce(id: &str) -> Result<Report, String> {
    let r = cli::reproduce(id, &RunOptions::default()).map_err(err)?;
    check(r.exit_code == 0, || format!("{id} exited {}", r.exit_code))?;
    Ok(r)
}

fn certificate<'a>(r: &'a Report, task: &str) -> Result<&'a Certificate, String> {
    match r.task(task).and_then(|t| t.result.as_ref()) {
        Some(TaskResult::Certificate(c)) => Ok(c),
        other => Err(format!("task {task}: expected a certificate, got {other:?}")),
    }
}

/// Mappings with closed-form displacement rates at the origin under `l2`.
fn rate_catalog() -> Result<Vec<(&'static str, Mapping, f64)>, String> {
    let expr = |t: &str| -> Result<Mapping, String> { Ok(Arc::new(SingleMap::parse(t).map_err(err)?)) };
    let maxaff = |p: Vec<(Vec<f64>, f64)>| -> Result<Mapping, String> { Ok(Arc::new(MaxAffineFn::new(p, None).map_err(err)?)) };
    let diag = |d: &[f64]| -> Mapping { Arc::new(LinearOp::new(Matrix::diag(d))) };
    Ok(vec![
        ("diag(2, 3)", diag(&[2.0, 3.0]), 2.0),
        ("diag(0.5, 4)", diag(&[0.5, 4.0]), 0.5),
        ("diag(1.5)", diag(&[1.5]), 1.5),
        ("|x|", expr("abs(x1)")?, 1.0),
        ("|x1| + |x2|", expr("abs(x1) + abs(x2)")?, 1.0),
        ("max(2x, -x)", maxaff(vec![(vec![2.0], 0.0), (vec![-1.0], 0.0)])?, 1.0),
        ("max(3x, -x/2)", maxaff(vec![(vec![3.0], 0.0), (vec![-0.5], 0.0)])?, 0.5),
        (
            "max(±x1, ±x2)",
            maxaff(vec![
                (vec![1.0, 0.0], 0.0),
                (vec![-1.0, 0.0], 0.0),
                (vec![0.0, 1.0], 0.0),
                (vec![0.0, -1.0], 0.0),
            ])?,
            std::f64::consts::FRAC_1_SQRT_2,
        ),
        ("2γx, γ = 2", expr("4*x1")?, 4.0),
        ("2γx, γ = 1.5 on R2", expr("[3*x1, 3*x2]")?, 3.0),
    ])
}

fn criterion_1() -> Outcome {
    let s = SamplingSchedule::default();
    let cases = rate_catalog()?;
    check(cases.len() == 10, || format!("catalog has {} instances", cases.len()))?;
    for (name, f, exact) in &cases {
        let n = f.dim_in();
        let xbar = vec![0.0; n];
        let ybar = vec![0.0; f.dim_out()];
        let c = certify_sms(&**f, &xbar, &ybar, &s, DEFAULT_TAU).map_err(err)?;
        let rate = c.estimate.as_ref().ok_or("certificate without estimate")?.extrapolated;
        let product = c.modulus * rate;
        check((0.95..=1.05).contains(&product), || format!("{name}: modulus x rate = {product}"))?;
        check(within(rate, *exact, 0.05), || format!("{name}: rate {rate} vs closed form {exact}"))?;
        let resolution = if n == 1 { 4001 } else { 801 };
        let grid = oracle_rate_grid(&**f, &xbar, &ybar, s.r0, resolution).map_err(err)?;
        let g = grid.shell_min[0];
        check(within(g, rate, 0.05), || format!("{name}: grid oracle {g} vs extrapolated {rate}"))?;
    }
    Ok(format!("{} instances", cases.len()))
}

fn criterion_2() -> Outcome {
    let f1 = reproduce("ex-F1")?;
    let c = certificate(&f1, "sms")?;
    let rk = f1.schedule.innermost_radius();
    check(c.is_certified() && c.modulus <= 2.0 * rk, || {
        format!("F1: verdict {:?}, modulus {} vs 2 r_K = {}", c.verdict, c.modulus, 2.0 * rk)
    })?;

    let f2 = reproduce("ex-F2")?;
    let c = certificate(&f2, "sms")?;
    check(!c.witnesses.is_empty(), || "F2: no witnesses".into())?;
    let (_, text) = catalog::mapping("F2").ok_or("F2 missing from the catalog")?;
    let map = SetValuedMap::parse(text).map_err(err)?;
    for w in &c.witnesses {
        let x = w.point[0];
        let replay = map.dist_to_image(&[0.0], &w.point).map_err(err)? / x.abs();
        check(x < 0.0 && (replay - w.ratio).abs() <= 1e-12, || {
            format!("F2 witness at {x}: ratio {} replays as {replay}", w.ratio)
        })?;
    }

    let sphere = reproduce("ex-norm-sphere")?;
    let last = match sphere.task("descent").and_then(|t| t.result.as_ref()) {
        Some(TaskResult::Rate(r)) => *r.shell_min.last().ok_or("no shells")?,
        _ => return Err("norm-sphere: no rate".into()),
    };
    check(last <= 0.05, || format!("norm-sphere final-shell min {last}"))?;

    let cc = reproduce("ex-comp-cont")?;
    for t in ["F-sharp", "g-sharp"] {
        check(certificate(&cc, t)?.is_certified(), || format!("comp-cont {t} not sharp"))?;
    }
    let comp = certificate(&cc, "composite-sms")?;
    check(!comp.is_certified() && !comp.witnesses.is_empty(), || "comp-cont composite not refuted".into())?;

    let sv = reproduce("ex-setvalued-comp")?;
    check(certificate(&sv, "G-sms")?.is_certified(), || "setvalued-comp G not certified".into())?;
    let comp = certificate(&sv, "composite-sms")?;
    check(!comp.is_certified() && !comp.witnesses.is_empty(), || "setvalued-comp F o G not refuted".into())?;
    Ok(format!("F1 modulus {} <= {}, {} F2 witnesses replayed", certificate(&f1, "sms")?.modulus, 2.0 * rk, c.witnesses.len()))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let rows: Vec<Vec<f64>> = (0..5).map(|_| (0..5).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let a = Matrix::from_rows(&rows).map_err(err)?;
    let oracle = DMatrix::from_fn(5, 5, |i, j| rows[i][j]).singular_values().min();

    let structural = alpha_linear(&LinearOp::new(a));
    check(structural.evidence == Evidence::Structural, || "5x5 l2 path is not structural".into())?;
    check((structural.value - oracle).abs() <= 1e-8, || format!("alpha {} vs SVD {oracle}", structural.value))?;

    let text = format!(
        "[{}]",
        rows.iter()
            .map(|r| r.iter().enumerate().map(|(j, v)| format!("({v:e})*x{}", j + 1)).collect::<Vec<_>>().join(" + "))
            .collect::<Vec<_>>()
            .join(", ")
    );
    let ph = PHMapping::new(SingleMap::parse(&text).map_err(err)?, 1).map_err(err)?;
    let sampled = alpha0_ph(&ph, 10_000, 11).map_err(err)?;
    check(sampled.evidence == Evidence::Sampled && sampled.samples == 10_000, || "sphere estimate not sampled".into())?;
    check(within(sampled.value, oracle, 0.05), || format!("sampled alpha {} vs SVD {oracle}", sampled.value))?;

    let mut prev = f64::INFINITY;
    for n in 2..=10 {
        let id = LinearOp::new(Matrix::identity(n)).with_norms(Norm::l1(), Norm::linf());
        let v = alpha_linear(&id).value;
        check(within(v, 1.0 / n as f64, 0.05) && v < prev, || format!("alpha(Id_{n}, l1 -> linf) = {v}"))?;
        prev = v;
    }
    Ok(format!("sigma_min {oracle:.6}, sampled {:.6}", sampled.value))
}

const SUITE_LIMIT: Duration = Duration::from_secs(60);

fn criterion_4() -> Outcome {
    let s = SamplingSchedule::default();
    let mut parts = Vec::new();
    for t in Theorem::CALCULUS {
        let start = Instant::now();
        let reports = random_suite(t, 100, 1, &s).map_err(err)?;
        let elapsed = start.elapsed();
        check(elapsed < SUITE_LIMIT, || format!("{t}: {elapsed:?}"))?;
        check(reports.len() == 100, || format!("{t}: {} instances", reports.len()))?;
        for r in &reports {
            let bound = r.bound.ok_or_else(|| format!("{t} {}: no bound", r.instance))?;
            check(r.holds == Holds::Holds && r.measured <= bound + 1e-6, || {
                format!("{t} {}: measured {} vs bound {bound} ({:?})", r.instance, r.measured, r.holds)
            })?;
        }
        parts.push(format!("{t} {:.1}s", elapsed.as_secs_f64()));
    }
    Ok(parts.join(", "))
}

/// Inradius at the origin of `conv(points)` under `l2`: the least distance
/// to a hull edge when the origin is interior, zero otherwise.
fn hull_inradius(points: &[[f64; 2]]) -> f64 {
    let mut p = points.to_vec();
    p.sort_by(|a, b| a.partial_cmp(b).unwrap());
    p.dedup();
    if p.len() < 3 {
        return 0.0;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut hull: Vec<[f64; 2]> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    if hull.len() < 3 {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for i in 0..hull.len() {
        let (a, b) = (hull[i], hull[(i + 1) % hull.len()]);
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        best = best.min(cross(a, b, [0.0, 0.0]) / len);
    }
    best.max(0.0)
}

fn criterion_5() -> Outcome {
    let cases = sharpness_suite(50, 1, &SamplingSchedule::default()).map_err(err)?;
    check(cases.len() == 50, || format!("{} cases", cases.len()))?;
    let (mut sharp, mut flat) = (0, 0);
    for (i, c) in cases.iter().enumerate() {
        let top = c.pieces.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let active: Vec<[f64; 2]> = c.pieces.iter().filter(|p| p.1 == top).map(|p| [p.0[0], p.0[1]]).collect();
        let oracle = hull_inradius(&active);
        check((oracle - c.inradius).abs() <= 1e-9, || format!("case {i}: inradius {} vs hull oracle {oracle}", c.inradius))?;
        if c.inradius > 0.05 {
            sharp += 1;
            check(within(c.descent_rate, c.inradius, 0.05), || {
                format!("case {i}: descent rate {} vs inradius {}", c.descent_rate, c.inradius)
            })?;
        } else if c.inradius == 0.0 {
            flat += 1;
            check(c.descent_rate <= 0.05, || format!("case {i}: descent rate {} with zero inradius", c.descent_rate))?;
        }
    }
    Ok(format!("{sharp} sharp, {flat} with zero inradius"))
}

fn criterion_6() -> Outcome {
    let s = SamplingSchedule::default();
    let mut parts = Vec::new();
    for (id, task) in [
        ("ex-geneq-complementarity", "isolated-calmness"),
        ("ex-geneq-sv-field", "single-valued-field"),
        ("ex-geneq-scalarized", "scalarized"),
    ] {
        let r = reproduce(id)?;
        let b = match r.task(task).and_then(|t| t.result.as_ref()) {
            Some(TaskResult::Bound(b)) => b,
            _ => return Err(format!("{id}: no bound report")),
        };
        let bound = b.bound.ok_or_else(|| format!("{id}: no bound"))?;
        check(b.measured <= bound + 1e-6, || format!("{id}: measured {} vs bound {bound}", b.measured))?;
        if id == "ex-geneq-complementarity" {
            check(within(b.measured, 1.0, 0.02) && within(bound, 1.0, 1e-9), || {
                format!("complementarity: measured {} against bound {bound}", b.measured)
            })?;
        }
        parts.push(format!("{task} {:.4} <= {:.4}", b.measured, bound));
    }
    for t in [Theorem::IsolatedCalmness, Theorem::SingleValuedField, Theorem::ScalarizedGenEq] {
        for p in geneq_catalog(t).map_err(err)? {
            let b = geneq_bound(t, &p, &s, DEFAULT_TAU, None).map_err(err)?;
            check(b.holds != Holds::Violated, || format!("{t} catalog: {} violated", b.instance))?;
        }
    }
    Ok(parts.join(", "))
}

/// Every catalog example, every theorem catalog and random suite, and the
/// sharpness suite, as one JSON document without timings.
fn full_suite() -> Result<String, String> {
    let s = SamplingSchedule::default();
    let mut examples = Vec::new();
    for id in catalog::ids() {
        examples.push(serde_json::from_str::<serde_json::Value>(&reproduce(&id)?.canonical_json()).map_err(|e| e.to_string())?);
    }
    let mut verify = Vec::new();
    for t in Theorem::ALL {
        verify.push(cli::verify(t, Suite::Catalog, 0, 1, &s).map_err(err)?);
        verify.push(cli::verify(t, Suite::Random, 100, 1, &s).map_err(err)?);
    }
    let sharp = sharpness_suite(50, 1, &s).map_err(err)?;
    serde_json::to_string_pretty(&json!({ "examples": examples, "verify": verify, "sharpness": sharp }))
        .map_err(|e| e.to_string())
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let a = full_suite()?;
    let once = start.elapsed();
    check(once < Duration::from_secs(120), || format!("one full run took {once:.1?}"))?;
    let b = full_suite()?;
    check(a == b, || "the two runs differ".into())?;
    Ok(format!("{} bytes identical, {:.1}s per run", a.len(), once.as_secs_f64()))
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome, Duration); 7] = [
        (1, "rate/modulus consistency", criterion_1, Duration::from_secs(10)),
        (2, "worked examples", criterion_2, Duration::from_secs(15)),
        (3, "injectivity constants", criterion_3, Duration::from_secs(10)),
        (4, "calculus soundness suites", criterion_4, Duration::from_secs(5 * 60)),
        (5, "sharpness equals inradius", criterion_5, Duration::from_secs(20)),
        (6, "generalized equations", criterion_6, Duration::from_secs(20)),
        (7, "determinism", criterion_7, Duration::from_secs(240)),
    ];
    let mut failed = 0;
    for (n, name, run, limit) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|d| {
            if elapsed < limit {
                Ok(d)
            } else {
                Err(format!("took {elapsed:.1?}, limit {limit:?}"))
            }
        });
        match outcome {
            Ok(detail) => println!("criterion {n} PASS {name} ({:.2}s): {detail}", elapsed.as_secs_f64()),
            Err(e) => {
                failed += 1;
                println!("criterion {n} FAIL {name} ({:.2}s): {e}", elapsed.as_secs_f64());
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use super::catalog;
use super::report::{sha256_hex, Report, TaskReport, TaskResult, TaskTiming, Timings, SCHEMA};
use crate::calculus::{
    composition_bound, perturbation_bound, smooth_kernel_check, sms_from_approx, sms_from_prederivative, Holds,
    Theorem, FD_STEP, KERNEL_TOL,
};
use crate::convexity::{
    default_directions, intrad, sharp_min_convex, sms_convex_scalarization, sms_frechet_scalarization, OrderCone,
    FRECHET_DIRECTIONS,
};
use crate::error::{Error, Result};
use crate::expr::{parse_problem, Expect, MappingDecl, Op, ProblemSpec, TaskSpec};
use crate::geneq::{geneq_bound, Field, GenEqProblem};
use crate::mappings::{
    alpha0_ph, alpha_fan, alpha_linear, beta_linear, eval_single, DomainBox, Mapping, Multifunction, SingleMap,
    DEFAULT_SPHERE_SAMPLES,
};
use crate::moduli::{certify_sms_best, isolated_calmness_via_inverse, sharp_min_check, DEFAULT_TAU};
use crate::rates::{calmness_modulus_sv, descent_rate, displacement_rate, SamplingSchedule};

pub const EXIT_OK: i32 = 0;
/// An expected outcome was not obtained.
pub const EXIT_EXPECTATION: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_EVALUATION: i32 = 3;

/// Command-line overrides applied on top of a document.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    /// `r0`, `decay`, shell and point counts; the seed is kept.
    pub schedule: Option<SamplingSchedule>,
    pub skip_eval_errors: bool,
    pub assume_eps: Option<f64>,
    pub curves_dir: Option<PathBuf>,
}

impl RunOptions {
    fn schedule(&self, doc: &SamplingSchedule) -> SamplingSchedule {
        let mut s = match &self.schedule {
            Some(o) => SamplingSchedule {
                seed: doc.seed,
                ..o.clone()
            },
            None => doc.clone(),
        };
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        s.skip_eval_errors = self.skip_eval_errors;
        s
    }
}

/// Parses and runs a document. `Err` means the document did not parse;
/// evaluation failures are recorded per task and reflected in the exit code.
pub fn run_document(doc: &str, opts: &RunOptions) -> Result<Report> {
    let spec = parse_problem(doc)?;
    execute(&spec, doc, opts, false)
}

/// Runs a catalog example. Unlike [`run_document`], tasks expected to fail
/// must fail too.
pub fn reproduce(id: &str, opts: &RunOptions) -> Result<Report> {
    let doc = catalog::document(id)?;
    let mut spec = parse_problem(&doc)?;
    spec.example = Some(id.to_string());
    execute(&spec, &doc, opts, true)
}

fn execute(spec: &ProblemSpec, doc: &str, opts: &RunOptions, strict: bool) -> Result<Report> {
    let s = opts.schedule(&spec.schedule);
    s.validate()?;
    let start = Instant::now();
    let mut tasks = Vec::with_capacity(spec.tasks.len());
    let mut timings = Vec::with_capacity(spec.tasks.len());
    let (mut errored, mut unmet) = (false, false);
    for t in &spec.tasks {
        let t0 = Instant::now();
        let outcome = run_task(spec, t, &s, opts.assume_eps);
        timings.push(TaskTiming {
            id: t.id.clone(),
            seconds: t0.elapsed().as_secs_f64(),
        });
        let (success, result, error) = match outcome {
            Ok((ok, r)) => (ok, Some(r), None),
            Err(e) => {
                errored |= !opts.skip_eval_errors;
                (false, None, Some(e.to_string()))
            }
        };
        let met = match t.expect {
            Expect::Pass => success,
            Expect::Fail => !success && error.is_none(),
            Expect::Any => true,
        };
        if !met && (t.expect == Expect::Pass || (strict && t.expect == Expect::Fail)) {
            unmet = true;
        }
        if let (Some(dir), Some(r)) = (&opts.curves_dir, &result) {
            write_curves(dir, &t.id, r)?;
        }
        tasks.push(TaskReport {
            id: t.id.clone(),
            op: t.op,
            expect: t.expect,
            success,
            expectation_met: met,
            result,
            error,
        });
    }
    let exit_code = if errored {
        EXIT_EVALUATION
    } else if unmet {
        EXIT_EXPECTATION
    } else {
        EXIT_OK
    };
    Ok(Report {
        schema: SCHEMA,
        version: env!("CARGO_PKG_VERSION").to_string(),
        document_sha256: sha256_hex(doc.as_bytes()),
        example: spec.example.clone(),
        schedule: s,
        assume_eps: opts.assume_eps,
        tasks,
        exit_code,
        timings: Timings {
            total_seconds: start.elapsed().as_secs_f64(),
            tasks: timings,
        },
    })
}

fn write_curves(dir: &std::path::Path, id: &str, r: &TaskResult) -> Result<()> {
    let curves = r.curves();
    if curves.is_empty() {
        return Ok(());
    }
    fs::create_dir_all(dir)?;
    for (suffix, est) in curves {
        fs::write(dir.join(format!("{id}{suffix}.csv")), est.to_csv())?;
    }
    Ok(())
}

fn handle(spec: &ProblemSpec, t: &TaskSpec, key: &str) -> Result<Mapping> {
    let name = t.get(key).ok_or_else(|| Error::invalid(format!("task {} lacks `{key}`", t.id)))?;
    Ok(spec.mapping(name)?.handle())
}

fn decl<'a>(spec: &'a ProblemSpec, t: &TaskSpec, key: &str) -> Result<&'a MappingDecl> {
    let name = t.get(key).ok_or_else(|| Error::invalid(format!("task {} lacks `{key}`", t.id)))?;
    spec.mapping(name)
}

/// `ȳ` of a task, defaulting to the single value of `f` at `x̄`.
fn ybar_for(spec: &ProblemSpec, t: &TaskSpec, f: &dyn Multifunction, xbar: &[f64]) -> Result<Vec<f64>> {
    match spec.ybar(t)? {
        Some(y) => Ok(y),
        None => eval_single(f, xbar)
            .map_err(|_| Error::invalid(format!("task {}: a set-valued mapping needs an explicit ybar", t.id))),
    }
}

fn cone_for(t: &TaskSpec, m: usize) -> Result<OrderCone> {
    match t.get("cone") {
        Some(c) => OrderCone::parse(c, m),
        None => Ok(OrderCone::nonneg(m)),
    }
}

fn count(t: &TaskSpec, key: &str, default: usize) -> Result<usize> {
    match t.number(key)? {
        Some(v) if v >= 1.0 && v.fract() == 0.0 => Ok(v as usize),
        Some(v) => Err(Error::invalid(format!("task {}: `{key}` must be a positive count, got {v}", t.id))),
        None => Ok(default),
    }
}

fn geneq_problem(spec: &ProblemSpec, t: &TaskSpec, xbar: Vec<f64>) -> Result<GenEqProblem> {
    let pbar = spec.anchor.pbar.clone().ok_or_else(|| Error::MissingSection("anchor".into()))?;
    let n = xbar.len();
    let MappingDecl::Expr(base) = decl(spec, t, "base")? else {
        return Err(Error::invalid("the base must be an expression"));
    };
    let f = SingleMap::new(base.expr.clone(), n)?.with_norms(base.norm_in.clone(), base.norm_out.clone());
    let m = f.dim_out;
    let field = match t.get("field").unwrap_or("zero") {
        "zero" => Field::zero(n, m),
        "nonneg" => Field::nonneg_orthant(n),
        "box" => {
            let lo = t.vector("lo")?.ok_or_else(|| Error::invalid("field = box needs `lo`"))?;
            let hi = t.vector("hi")?.ok_or_else(|| Error::invalid("field = box needs `hi`"))?;
            Field::normal_cone_box(lo, hi)?
        }
        name => match spec.mapping(name)? {
            MappingDecl::Expr(e) => {
                let mut e = SingleMap::new(e.expr.clone(), n)?.with_norms(e.norm_in.clone(), e.norm_out.clone());
                e.domain = DomainBox::unbounded(n);
                Field::Expr(e)
            }
            other => Field::Map(other.handle()),
        },
    }
    .with_norms(f.norm_in.clone(), f.norm_out.clone());
    let mut prob = GenEqProblem::new(f, field, pbar, xbar)?;
    if let Some(name) = t.get("fan") {
        let MappingDecl::Fan(h) = spec.mapping(name)? else {
            return Err(Error::invalid("`fan` must name a fan"));
        };
        prob = prob.with_fan(h.clone())?;
    }
    let delta = t.number("delta")?.unwrap_or(prob.delta);
    let zeta = t.number("zeta")?.unwrap_or(prob.zeta);
    prob = prob.with_radii(delta, zeta)?;
    if t.get("convex").is_some() {
        let MappingDecl::MaxAffine(c) = decl(spec, t, "convex")? else {
            return Err(Error::invalid("`convex` must name a max-affine mapping"));
        };
        let cone = cone_for(t, c.dim_out())?;
        prob = prob.with_convex_base(c.clone(), cone)?;
    }
    Ok(prob)
}

/// Runs one task, returning its success flag and result.
fn run_task(spec: &ProblemSpec, t: &TaskSpec, s: &SamplingSchedule, assume_eps: Option<f64>) -> Result<(bool, TaskResult)> {
    let tau = t.number("tau")?.unwrap_or(DEFAULT_TAU);
    let xbar = match spec.xbar(t)? {
        Some(x) => x,
        None => vec![0.0; decl(spec, t, "map")?.dim_in()],
    };
    let bound = |b: crate::calculus::BoundReport| (b.holds == Holds::Holds, TaskResult::Bound(b));
    let cert = |c: crate::moduli::Certificate| (c.is_certified(), TaskResult::Certificate(c));
    Ok(match t.op {
        Op::CertifySms | Op::IsolatedCalmness | Op::DisplacementRate => {
            let f = handle(spec, t, "map")?;
            let y = ybar_for(spec, t, &*f, &xbar)?;
            match t.op {
                Op::CertifySms => cert(certify_sms_best(&*f, &xbar, &y, s, tau)?),
                Op::IsolatedCalmness => cert(isolated_calmness_via_inverse(&*f, &xbar, &y, s, tau)?),
                _ => {
                    let r = displacement_rate(&*f, &xbar, &y, s)?;
                    (r.extrapolated >= tau, TaskResult::Rate(r))
                }
            }
        }
        Op::SharpMin => cert(sharp_min_check(handle(spec, t, "map")?, &xbar, s, tau)?),
        Op::DescentRate => {
            let r = descent_rate(&*handle(spec, t, "map")?, &xbar, s)?;
            (r.extrapolated >= tau, TaskResult::Rate(r))
        }
        Op::Calmness => {
            let r = calmness_modulus_sv(&*handle(spec, t, "map")?, &xbar, s)?;
            (r.extrapolated.is_finite() && !r.divergent, TaskResult::Rate(r))
        }
        Op::Injectivity | Op::Banach => {
            let samples = count(t, "samples", DEFAULT_SPHERE_SAMPLES)?;
            let a = match (t.op, decl(spec, t, "map")?) {
                (Op::Banach, MappingDecl::Linear(l)) => beta_linear(l),
                (_, MappingDecl::Linear(l)) => alpha_linear(l),
                (_, MappingDecl::Ph(h)) => alpha0_ph(h, samples, s.seed)?,
                (_, MappingDecl::Fan(h)) => alpha_fan(h, samples, s.seed)?,
                (_, other) => return Err(Error::invalid(format!("no injectivity constant for a {} mapping", other.kind()))),
            };
            (a.value > KERNEL_TOL, TaskResult::Injectivity(a))
        }
        Op::Composition => {
            let (g, f) = (handle(spec, t, "inner")?, handle(spec, t, "outer")?);
            let y = match spec.ybar(t)? {
                Some(y) => y,
                None => eval_single(&*f, &eval_single(&*g, &xbar)?)?,
            };
            bound(composition_bound(g, f, &xbar, &y, s, tau)?)
        }
        Op::Perturbation => {
            let f = handle(spec, t, "map")?;
            let y = ybar_for(spec, t, &*f, &xbar)?;
            bound(perturbation_bound(f, handle(spec, t, "perturbation")?, &xbar, &y, s, tau)?)
        }
        Op::EpsApprox => {
            let MappingDecl::Ph(h) = decl(spec, t, "approx")? else {
                return Err(Error::invalid("`approx` must name a p.h. mapping"));
            };
            bound(sms_from_approx(handle(spec, t, "map")?, h, &xbar, s, tau, assume_eps)?)
        }
        Op::Prederivative => {
            let MappingDecl::Fan(h) = decl(spec, t, "fan")? else {
                return Err(Error::invalid("`fan` must name a fan"));
            };
            let delta = t.number("delta")?.unwrap_or(0.5);
            bound(sms_from_prederivative(handle(spec, t, "map")?, h, &xbar, delta, s, tau, assume_eps)?)
        }
        Op::SmoothKernel => {
            let h = t.number("fd_step")?.unwrap_or(FD_STEP);
            bound(smooth_kernel_check(handle(spec, t, "map")?, &xbar, h, s, tau)?)
        }
        Op::ConvexScalarization | Op::Intrad | Op::SharpMinConvex => {
            let MappingDecl::MaxAffine(f) = decl(spec, t, "map")? else {
                return Err(Error::invalid("a max-affine mapping is required"));
            };
            match t.op {
                Op::ConvexScalarization => {
                    bound(sms_convex_scalarization(f, &xbar, &cone_for(t, f.dim_out())?, s, tau)?)
                }
                Op::Intrad => {
                    let dirs = count(t, "directions", default_directions(f.dim_out()))?;
                    let r = intrad(f, &xbar, &cone_for(t, f.dim_out())?, dirs, s.seed)?;
                    (r.value > 0.0, TaskResult::Intrad(r))
                }
                _ => {
                    if f.components.len() != 1 {
                        return Err(Error::invalid("sharp-min-convex needs a scalar max-affine function"));
                    }
                    let r = sharp_min_convex(&f.components[0], &xbar, s, tau)?;
                    (r.certificate.is_certified(), TaskResult::SharpMinConvex(r))
                }
            }
        }
        Op::FrechetScalarization => {
            let dirs = count(t, "directions", FRECHET_DIRECTIONS)?;
            let r = sms_frechet_scalarization(handle(spec, t, "map")?, &xbar, dirs, s, tau)?;
            (r.certificate.is_certified(), TaskResult::FrechetScalarization(r))
        }
        Op::GeneqIsolatedCalmness | Op::GeneqSingleValuedField | Op::GeneqScalarized => {
            let theorem = match t.op {
                Op::GeneqIsolatedCalmness => Theorem::IsolatedCalmness,
                Op::GeneqSingleValuedField => Theorem::SingleValuedField,
                _ => Theorem::ScalarizedGenEq,
            };
            let prob = geneq_problem(spec, t, xbar)?;
            bound(geneq_bound(theorem, &prob, s, tau, assume_eps)?)
        }
    })
}

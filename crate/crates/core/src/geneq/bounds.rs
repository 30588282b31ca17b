use rand::Rng;

use super::{trace_solution_map, AgeqMap, GenEqProblem, SolutionSample, MERGE_RADIUS};
use crate::calculus::{calmness, eps_used, vanishing, verdict_ok, BoundReport, Builder, Defect, Theorem, BOUND_SLACK};
use crate::convexity::{default_directions, intrad};
use crate::error::{Error, Result};
use crate::evidence::Evidence;
use crate::mappings::{alpha_fan, Multifunction, DEFAULT_SPHERE_SAMPLES};
use crate::moduli::{certify_sms, Verdict};
use crate::rates::{estimate, Bias, SamplingSchedule};
use crate::rng;
use crate::spaces::{unit_sphere_samples, Norm};

/// Parameter grid points per axis.
pub const PARAM_GRID: usize = 33;
/// Points `x` near `x̄` over which the calmness of `f(·, x)` is maximized.
pub const UNIFORM_X_SAMPLES: usize = 16;
/// Parameter points per axis for the defect when `k ≥ 2`.
const DEFECT_GRID_MULTI: usize = 9;

/// Parameters over which the prederivative defect is taken: the full grid
/// plus `p̄` for one parameter, a coarser cube grid for several.
fn defect_params(prob: &GenEqProblem) -> Vec<Vec<f64>> {
    let mut ps = vec![prob.pbar.clone()];
    if prob.k() == 1 {
        ps.extend(prob.param_grid());
        return ps;
    }
    let per = DEFECT_GRID_MULTI;
    let half = (per / 2) as f64;
    for idx in 0..per.pow(prob.k() as u32) {
        let mut rem = idx;
        let d: Vec<f64> = (0..prob.k())
            .map(|_| {
                let o = (rem % per) as f64 - half;
                rem /= per;
                prob.zeta * o / half
            })
            .collect();
        if d.iter().any(|v| *v != 0.0) && Norm::l2().eval(&d) <= prob.zeta * (1.0 + 1e-12) {
            ps.push(d.iter().zip(&prob.pbar).map(|(a, b)| a + b).collect());
        }
    }
    ps
}

/// Sampled `sup dist(f(p, x) − f(p, x̄), H(x − x̄)) / ‖x − x̄‖` over the
/// `δ`-ball in `x` and the `ζ`-ball in `p`: the smallest uniform `ε` for
/// which `H` is a partial outer prederivative.
pub fn partial_prederivative_defect(prob: &GenEqProblem, s: &SamplingSchedule) -> Result<Defect> {
    let sd = SamplingSchedule { r0: prob.delta, ..s.clone() };
    let ps = defect_params(prob);
    let f0 = ps.iter().map(|p| prob.base(p, &prob.xbar)).collect::<Result<Vec<_>>>()?;
    let (nx, ny) = (prob.norm_x().clone(), prob.norm_y().clone());
    let ratio = |x: &[f64]| -> Result<f64> {
        let v: Vec<f64> = x.iter().zip(&prob.xbar).map(|(a, c)| a - c).collect();
        let img = prob.fan.image(&v)?;
        let r = nx.eval(&v);
        let mut worst: f64 = 0.0;
        for (p, f0) in ps.iter().zip(&f0) {
            let df: Vec<f64> = prob.base(p, x)?.iter().zip(f0).map(|(a, c)| a - c).collect();
            worst = worst.max(img.dist(&df, &ny)? / r);
        }
        Ok(worst)
    };
    let est = estimate(&ratio, &prob.xbar, &nx, &sd, Bias::UnderEstimatesLimsup)?;
    Ok(Defect {
        value: est.cumulative[0],
        vanishing: vanishing(&est),
        estimate: est,
    })
}

/// Traced `clm(S)(p̄, x̄)`: the largest `‖x − x̄‖ / ‖p − p̄‖` over the
/// parameter grid and the solutions found in the `δ`-ball.
struct Traced {
    measured: f64,
    samples: Vec<SolutionSample>,
}

fn trace_modulus(prob: &GenEqProblem) -> Result<Traced> {
    let samples = trace_solution_map(prob, &prob.param_grid(), prob.delta)?;
    let mut measured: f64 = 0.0;
    for smp in &samples {
        let dp = Norm::l2().dist(&smp.p, &prob.pbar);
        for x in &smp.points {
            measured = measured.max(prob.norm_x().dist(x, &prob.xbar) / dp);
        }
    }
    Ok(Traced { measured, samples })
}

fn record_trace(b: &mut Builder, prob: &GenEqProblem, t: &Traced) -> Result<Verdict> {
    let found = t.samples.iter().filter(|s| !s.points.is_empty()).count();
    b.info(
        "solutions traced",
        found > 0,
        format!("{found} of {} parameters have solutions in the δ-ball", t.samples.len()),
    );
    let at_bar = trace_solution_map(prob, std::slice::from_ref(&prob.pbar), prob.delta)?;
    let others: Vec<&Vec<f64>> = at_bar[0]
        .points
        .iter()
        .filter(|x| prob.norm_x().dist(x, &prob.xbar) > MERGE_RADIUS)
        .collect();
    b.info(
        "x̄ isolated in S(p̄)",
        others.is_empty(),
        if others.is_empty() {
            "no other solution in the δ-ball".to_string()
        } else {
            format!("other solutions at {others:?}")
        },
    );
    Ok(if found > 0 && others.is_empty() {
        Verdict::CertifiedNumerically
    } else {
        Verdict::Inconclusive
    })
}

/// `clm(S)(p̄, x̄) ≤ clm(f(·, x̄))(p̄)·κ / (1 − εκ)` with `κ` the subregularity
/// modulus of `x ↦ f(p̄, x̄) + H(x − x̄) + T(x)` at `(x̄, 0)`.
pub fn isolated_calmness_bound(
    prob: &GenEqProblem,
    s: &SamplingSchedule,
    tau: f64,
    assume_eps: Option<f64>,
) -> Result<BoundReport> {
    let mut b = Builder::new(Theorem::IsolatedCalmness, prob.describe());
    let d = partial_prederivative_defect(prob, s)?;
    b.q("delta", prob.delta, Evidence::Structural);
    b.q("zeta", prob.zeta, Evidence::Structural);
    let eps = eps_used(&mut b, d.value, Evidence::Sampled, assume_eps);
    let ageq = AgeqMap {
        c: prob.base(&prob.pbar, &prob.xbar)?,
        fan: prob.fan.clone(),
        xbar: prob.xbar.clone(),
        field: prob.field.clone(),
    };
    let ck = certify_sms(&ageq, &prob.xbar, &vec![0.0; prob.m()], s, tau)?;
    let kappa = ck.modulus;
    b.q("kappa_H_plus_T", kappa, ck.evidence);
    b.hyp("H + T strongly metrically subregular", verdict_ok(&ck), format!("{:?}", ck.verdict));
    let (clm, ev) = calmness(&prob.parameter_section(&prob.xbar), &prob.pbar, s)?;
    b.q("clm_f_p", clm, ev);
    let product = if kappa == 0.0 { 0.0 } else { eps * kappa };
    b.hyp("eps·kappa < 1", product < 1.0, format!("{product}"));
    let strict = if kappa == 0.0 { 0.0 } else { clm * kappa };
    let bound = strict / (1.0 - product);
    let t = trace_modulus(prob)?;
    let verdict = record_trace(&mut b, prob, &t)?;
    b.info("defect vanishes with the radius", d.vanishing, format!("{:?}", d.estimate.log_slope));
    if d.vanishing && verdict_ok(&ck) {
        b.q("strict_bound", strict, ck.evidence.and(ev));
        b.info(
            "strict product bound dominates the measured modulus",
            t.measured <= strict + BOUND_SLACK,
            format!("{} vs {strict}", t.measured),
        );
    }
    Ok(b.finish_with(Some(bound), t.measured, verdict))
}

/// `clm(S)(p̄, x̄) ≤ clm(f(·, x̄))(p̄) / (α(H) − clm(T)(x̄) − ε)` for a
/// single-valued field.
pub fn single_valued_field_bound(
    prob: &GenEqProblem,
    s: &SamplingSchedule,
    assume_eps: Option<f64>,
) -> Result<BoundReport> {
    let mut b = Builder::new(Theorem::SingleValuedField, prob.describe());
    let sv = prob.field.is_single_valued();
    b.hyp("T single-valued near x̄", sv, prob.field.describe());
    let a = alpha_fan(&prob.fan, DEFAULT_SPHERE_SAMPLES, s.seed)?;
    b.q("alpha_H", a.value, a.evidence);
    let (clm_t, ev_t) = if sv {
        calmness(&prob.field, &prob.xbar, s)?
    } else {
        (f64::INFINITY, Evidence::Structural)
    };
    b.q("clm_T", clm_t, ev_t);
    let d = partial_prederivative_defect(prob, s)?;
    b.q("delta", prob.delta, Evidence::Structural);
    b.q("zeta", prob.zeta, Evidence::Structural);
    let eps = eps_used(&mut b, d.value, Evidence::Sampled, assume_eps);
    let margin = a.value - clm_t - eps;
    b.hyp("alpha(H) − clm(T) > eps", margin > 0.0, format!("{} − {clm_t} vs {eps}", a.value));
    let (clm, ev) = calmness(&prob.parameter_section(&prob.xbar), &prob.pbar, s)?;
    b.q("clm_f_p", clm, ev);
    let t = trace_modulus(prob)?;
    let verdict = record_trace(&mut b, prob, &t)?;
    Ok(b.finish_with(Some(clm / margin), t.measured, verdict))
}

/// Points of the `δ`-ball around `x̄`, starting with `x̄` itself.
fn ball_samples(prob: &GenEqProblem, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let n = prob.n();
    let mut out = vec![prob.xbar.clone()];
    let dirs = unit_sphere_samples(n, prob.norm_x(), count.saturating_sub(1).max(1), seed)?;
    let mut r = rng::stream(seed, 0xBA11);
    for u in dirs.into_iter().take(count.saturating_sub(1)) {
        let t = prob.delta * r.random::<f64>().powf(1.0 / n as f64);
        out.push(prob.xbar.iter().zip(&u).map(|(a, b)| a + t * b).collect());
    }
    Ok(out)
}

/// `clm(S)(p̄, x̄) ≤ sup_x clm(f(·, x))(p̄) / (intrad(f(p̄, ·))(x̄) − clm(T)(x̄))`
/// when `f(p̄, ·)` is convex with respect to the order cone.
pub fn convex_scalarized_geneq_bound(prob: &GenEqProblem, s: &SamplingSchedule) -> Result<BoundReport> {
    let base = prob
        .convex
        .as_ref()
        .ok_or_else(|| Error::invalid("the scalarization bound needs max-affine pieces and an order cone"))?;
    let mut b = Builder::new(Theorem::ScalarizedGenEq, prob.describe());
    let xs = ball_samples(prob, UNIFORM_X_SAMPLES, s.seed)?;
    let mut mismatch: f64 = 0.0;
    for x in &xs {
        let want = prob.base(&prob.pbar, x)?;
        let got = base.map.eval(x)?;
        mismatch = mismatch.max(want.iter().zip(&got).map(|(a, c)| (a - c).abs()).fold(0.0, f64::max));
    }
    b.hyp(
        "f(p̄, ·) equals the declared max-affine map",
        mismatch <= 1e-9,
        format!("largest deviation {mismatch:e} over {} points", xs.len()),
    );
    let ir = intrad(&base.map, &prob.xbar, &base.cone, default_directions(prob.m()), s.seed)?;
    b.q("intrad", ir.value, ir.evidence);
    b.hyp(
        "0* interior to some ∂(y*∘f(p̄, ·))(x̄)",
        ir.value > 0.0,
        match &ir.y_star {
            Some(y) => format!("attained at y* = {y:?}"),
            None => "no sampled functional has an interior subdifferential".into(),
        },
    );
    let sv = prob.field.is_single_valued();
    b.hyp("T single-valued near x̄", sv, prob.field.describe());
    let (clm_t, ev_t) = if sv {
        calmness(&prob.field, &prob.xbar, s)?
    } else {
        (f64::INFINITY, Evidence::Structural)
    };
    b.q("clm_T", clm_t, ev_t);
    let ratio = if ir.value > 0.0 { clm_t / ir.value } else { f64::INFINITY };
    b.hyp("clm(T)/intrad < 1", ratio < 1.0, format!("{ratio}"));
    let mut clm_f: f64 = 0.0;
    for x in &xs {
        clm_f = clm_f.max(calmness(&prob.parameter_section(x), &prob.pbar, s)?.0);
    }
    b.q("clm_f_p_uniform", clm_f, Evidence::Sampled);
    let t = trace_modulus(prob)?;
    let verdict = record_trace(&mut b, prob, &t)?;
    Ok(b.finish_with(Some(clm_f / (ir.value - clm_t)), t.measured, verdict))
}

//! Certified bounds on subregularity moduli and their empirical checks.
//!
//! Each producer computes the hypotheses and the bound of one criterion,
//! then measures the modulus it bounds with [`certify_sms`] so the two can be
//! compared on the same sample points.

mod suites;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evidence::Evidence;
use crate::ext;
use crate::linalg::{singular_values, Matrix};
use crate::mappings::{
    alpha0_ph, alpha_fan, alpha_linear, eval_single, Compose, Fan, FnMap, LinearOp, Mapping, Multifunction,
    PHMapping, Sum, DEFAULT_SPHERE_SAMPLES,
};
use crate::moduli::{certify_sms, certify_sms_best, Certificate, Verdict};
use crate::rates::{calmness_modulus_sv, estimate, log_log_slope, shell_points, Bias, RateEstimate, SamplingSchedule};

pub use suites::{catalog_suite, random_suite};

/// Slack allowed between a measured modulus and its bound.
pub const BOUND_SLACK: f64 = 1e-6;
/// Default finite-difference step.
pub const FD_STEP: f64 = 1e-5;
/// Injectivity constants at or below this count as a nontrivial kernel.
pub const KERNEL_TOL: f64 = 1e-8;

/// Bound producers: the five calculus rules, the convex scalarization and
/// the three generalized-equation estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    /// Composition with a continuous single-valued inner map.
    Composition,
    /// Additive perturbation by a calm single-valued map.
    CalmPerturbation,
    /// First-order ε-approximation by a p.h. map.
    EpsApproximation,
    /// Outer ε-prederivative given by a fan.
    OuterPrederivative,
    /// Differentiable maps with trivial derivative kernel.
    SmoothKernel,
    /// Convex scalarization through the inradius `intrad`.
    ConvexScalarization,
    /// Isolated calmness of a solution map via a partial prederivative.
    IsolatedCalmness,
    /// Isolated calmness with a single-valued calm field.
    SingleValuedField,
    /// Isolated calmness with a convex scalarized base.
    ScalarizedGenEq,
}

impl Theorem {
    /// The calculus rules with random soundness suites.
    pub const CALCULUS: [Theorem; 5] = [
        Theorem::Composition,
        Theorem::CalmPerturbation,
        Theorem::EpsApproximation,
        Theorem::OuterPrederivative,
        Theorem::SmoothKernel,
    ];

    pub const ALL: [Theorem; 9] = [
        Theorem::Composition,
        Theorem::CalmPerturbation,
        Theorem::EpsApproximation,
        Theorem::OuterPrederivative,
        Theorem::SmoothKernel,
        Theorem::ConvexScalarization,
        Theorem::IsolatedCalmness,
        Theorem::SingleValuedField,
        Theorem::ScalarizedGenEq,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Theorem::Composition => "composition",
            Theorem::CalmPerturbation => "calm-perturbation",
            Theorem::EpsApproximation => "eps-approximation",
            Theorem::OuterPrederivative => "outer-prederivative",
            Theorem::SmoothKernel => "smooth-kernel",
            Theorem::ConvexScalarization => "convex-scalarization",
            Theorem::IsolatedCalmness => "isolated-calmness",
            Theorem::SingleValuedField => "single-valued-field",
            Theorem::ScalarizedGenEq => "scalarized-geneq",
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Theorem::ALL
            .into_iter()
            .find(|t| t.id() == s)
            .ok_or_else(|| Error::invalid(format!("unknown theorem id `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quantity {
    #[serde(with = "ext::scalar")]
    pub value: f64,
    pub evidence: Evidence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub name: String,
    pub satisfied: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Holds {
    Holds,
    Violated,
    NotApplicable,
}

/// A bound, the hypotheses behind it and the modulus it is compared with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundReport {
    pub theorem: Theorem,
    pub instance: String,
    pub quantities: BTreeMap<String, Quantity>,
    pub hypotheses: Vec<Check>,
    /// Checks reported alongside the bound that do not enter `holds`.
    pub informational: Vec<Check>,
    #[serde(with = "ext::option")]
    pub bound: Option<f64>,
    #[serde(with = "ext::scalar")]
    pub measured: f64,
    pub measured_verdict: Verdict,
    #[serde(with = "ext::option")]
    pub slack: Option<f64>,
    /// `holds` iff every hypothesis is met and `measured ≤ bound + 1e-6`.
    pub holds: Holds,
}

impl BoundReport {
    pub fn quantity(&self, name: &str) -> Option<f64> {
        self.quantities.get(name).map(|q| q.value)
    }

    pub fn hypotheses_met(&self) -> bool {
        self.hypotheses.iter().all(|c| c.satisfied)
    }
}

pub(crate) struct Builder {
    theorem: Theorem,
    instance: String,
    quantities: BTreeMap<String, Quantity>,
    hypotheses: Vec<Check>,
    informational: Vec<Check>,
}

impl Builder {
    pub(crate) fn new(theorem: Theorem, instance: impl Into<String>) -> Self {
        Builder {
            theorem,
            instance: instance.into(),
            quantities: BTreeMap::new(),
            hypotheses: Vec::new(),
            informational: Vec::new(),
        }
    }

    pub(crate) fn q(&mut self, name: &str, value: f64, evidence: Evidence) {
        self.quantities.insert(name.into(), Quantity { value, evidence });
    }

    pub(crate) fn hyp(&mut self, name: &str, satisfied: bool, detail: impl Into<String>) {
        self.hypotheses.push(Check {
            name: name.into(),
            satisfied,
            detail: detail.into(),
        });
    }

    pub(crate) fn info(&mut self, name: &str, satisfied: bool, detail: impl Into<String>) {
        self.informational.push(Check {
            name: name.into(),
            satisfied,
            detail: detail.into(),
        });
    }

    pub(crate) fn finish(mut self, bound: Option<f64>, measured: &Certificate) -> BoundReport {
        self.q("measured_rate", measured.rate, measured.evidence);
        self.finish_with(bound, measured.modulus, measured.verdict)
    }

    pub(crate) fn finish_with(self, bound: Option<f64>, measured: f64, verdict: Verdict) -> BoundReport {
        let met = self.hypotheses.iter().all(|c| c.satisfied);
        let bound = if met { bound } else { None };
        let (slack, holds) = match bound {
            Some(b) => {
                let ok = measured <= b + BOUND_SLACK;
                (Some(b - measured), if ok { Holds::Holds } else { Holds::Violated })
            }
            None => (None, Holds::NotApplicable),
        };
        BoundReport {
            theorem: self.theorem,
            instance: self.instance,
            quantities: self.quantities,
            hypotheses: self.hypotheses,
            informational: self.informational,
            bound,
            measured,
            measured_verdict: verdict,
            slack,
            holds,
        }
    }
}

/// Per-shell maxima of `‖g(z) − g(z̄)‖`.
fn oscillation(g: &dyn Multifunction, zbar: &[f64], s: &SamplingSchedule) -> Result<Vec<f64>> {
    let g0 = eval_single(g, zbar)?;
    let mut out = Vec::with_capacity(s.shells);
    for k in 0..s.shells {
        let mut w: f64 = 0.0;
        for z in shell_points(zbar, g.norm_in(), s, k) {
            w = w.max(g.norm_out().dist(&eval_single(g, &z)?, &g0));
        }
        out.push(w);
    }
    Ok(out)
}

/// Sampled continuity: the oscillation on the innermost shell is negligible,
/// or has shrunk at least like `r^{1/4}` since the outermost shell.
fn continuity_check(g: &dyn Multifunction, zbar: &[f64], s: &SamplingSchedule) -> Result<(bool, String)> {
    let w = oscillation(g, zbar, s)?;
    let (first, last) = (w[0], w[w.len() - 1]);
    let shrink = (s.innermost_radius() / s.r0).powf(0.25);
    let ok = last <= 1e-12 || last <= first * shrink;
    Ok((ok, format!("oscillation {first:e} on the outer shell, {last:e} on the innermost")))
}

pub(crate) fn verdict_ok(c: &Certificate) -> bool {
    c.verdict == Verdict::CertifiedNumerically
}

/// `subreg(F∘g)(z̄, ȳ) ≤ subreg(g)(z̄) · subreg(F)(g(z̄), ȳ)` when `g` is
/// continuous at `z̄`.
pub fn composition_bound(
    g: Mapping,
    f: Mapping,
    zbar: &[f64],
    ybar: &[f64],
    s: &SamplingSchedule,
    tau: f64,
) -> Result<BoundReport> {
    let mut b = Builder::new(Theorem::Composition, format!("F = {}, g = {}", f.describe(), g.describe()));
    let xbar = eval_single(&*g, zbar)?;
    let (cont, detail) = continuity_check(&*g, zbar, s)?;
    b.hyp("g continuous at z̄", cont, detail);
    let cg = certify_sms_best(&*g, zbar, &xbar, s, tau)?;
    let cf = certify_sms_best(&*f, &xbar, ybar, s, tau)?;
    b.q("kappa_g", cg.modulus, cg.evidence);
    b.q("kappa_F", cf.modulus, cf.evidence);
    b.hyp("g strongly metrically subregular", verdict_ok(&cg), format!("{:?}", cg.verdict));
    b.hyp("F strongly metrically subregular", verdict_ok(&cf), format!("{:?}", cf.verdict));
    let bound = cg.modulus * cf.modulus;
    let comp = Compose::new(Arc::clone(&f), Arc::clone(&g))?;
    let measured = certify_sms(&comp, zbar, ybar, s, tau)?;
    Ok(b.finish(Some(bound), &measured))
}

/// Calmness modulus of a single-valued map, exact for linear maps under
/// `l2` norms and otherwise the maximum over the innermost third of shells.
pub(crate) fn calmness(g: &dyn Multifunction, xbar: &[f64], s: &SamplingSchedule) -> Result<(f64, Evidence)> {
    if let Some(l) = g.as_linear() {
        if l.norm_in.is_l2() && l.norm_out.is_l2() && l.norm_in.is_unweighted() && l.norm_out.is_unweighted() {
            return Ok((singular_values(&l.matrix)[0], Evidence::Structural));
        }
    }
    Ok((calmness_modulus_sv(g, xbar, s)?.window_value(), Evidence::Sampled))
}

/// `subreg(F+g)(x̄, ȳ+g(x̄)) ≤ κ / (1 − κ·clm(g))` with `κ = subreg(F)(x̄, ȳ)`.
pub fn perturbation_bound(
    f: Mapping,
    g: Mapping,
    xbar: &[f64],
    ybar: &[f64],
    s: &SamplingSchedule,
    tau: f64,
) -> Result<BoundReport> {
    let mut b = Builder::new(Theorem::CalmPerturbation, format!("F = {}, g = {}", f.describe(), g.describe()));
    let cf = certify_sms_best(&*f, xbar, ybar, s, tau)?;
    let kappa = cf.modulus;
    b.q("kappa_F", kappa, cf.evidence);
    b.hyp("F strongly metrically subregular", verdict_ok(&cf), format!("{:?}", cf.verdict));
    let (clm, ev) = calmness(&*g, xbar, s)?;
    b.q("clm_g", clm, ev);
    let product = if kappa == 0.0 { 0.0 } else { kappa * clm };
    b.q("kappa_times_clm", product, cf.evidence.and(ev));
    b.hyp("kappa·clm(g) < 1", product < 1.0, format!("{product}"));
    let bound = kappa / (1.0 - product);
    let gx = eval_single(&*g, xbar)?;
    let shifted: Vec<f64> = ybar.iter().zip(&gx).map(|(a, c)| a + c).collect();
    let sum = Sum::new(Arc::clone(&f), Arc::clone(&g))?;
    let measured = certify_sms(&sum, xbar, &shifted, s, tau)?;
    Ok(b.finish(Some(bound), &measured))
}

/// A sampled defect with the estimate it was read from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Defect {
    #[serde(with = "ext::scalar")]
    pub value: f64,
    /// The per-shell maxima shrink at least like `r^{1/2}`.
    pub vanishing: bool,
    pub estimate: RateEstimate,
}

pub(crate) fn vanishing(est: &RateEstimate) -> bool {
    let k = est.shell_max.len();
    est.window_value() <= 1e-12 || log_log_slope(&est.radii[..k], &est.shell_max).is_some_and(|v| v >= 0.5)
}

/// Sampled calmness modulus of `x ↦ f(x) − f(x̄) − h(x − x̄)`, read as the
/// maximum over the innermost third of the shells.
pub fn eps_approx_defect(f: Mapping, h: &PHMapping, xbar: &[f64], s: &SamplingSchedule) -> Result<Defect> {
    if h.dim_in() != f.dim_in() || h.dim_out() != f.dim_out() {
        return Err(Error::dim("approximation", f.dim_out(), h.dim_out()));
    }
    let f0 = eval_single(&*f, xbar)?;
    let xb = xbar.to_vec();
    let hh = h.clone();
    let ff = Arc::clone(&f);
    let r = FnMap::new("remainder", f.dim_in(), f.dim_out(), move |x| {
        let fx = eval_single(&*ff, x)?;
        let v: Vec<f64> = x.iter().zip(&xb).map(|(a, c)| a - c).collect();
        let hv = hh.eval(&v)?;
        Ok(fx.iter().zip(&f0).zip(&hv).map(|((a, c), d)| a - c - d).collect())
    })
    .with_norms(f.norm_in().clone(), f.norm_out().clone());
    let est = calmness_modulus_sv(&r, xbar, s)?;
    Ok(Defect {
        value: est.window_value(),
        vanishing: vanishing(&est),
        estimate: est,
    })
}

pub(crate) fn eps_used(b: &mut Builder, measured: f64, ev: Evidence, assume: Option<f64>) -> f64 {
    b.q("eps_measured", measured, ev);
    match assume {
        Some(a) if a < measured => {
            b.q("eps_assumed", a, Evidence::Sampled);
            b.info("eps overridden by --assume-eps", true, format!("measured {measured}, assumed {a}"));
            a
        }
        _ => measured,
    }
}

/// `subreg(f)(x̄) ≤ 1/(α₀(h) − ε)` for a first-order ε-approximation `h`.
pub fn sms_from_approx(
    f: Mapping,
    h: &PHMapping,
    xbar: &[f64],
    s: &SamplingSchedule,
    tau: f64,
    assume_eps: Option<f64>,
) -> Result<BoundReport> {
    let mut b = Builder::new(Theorem::EpsApproximation, format!("f = {}, h = {}", f.describe(), h.describe()));
    let a0 = alpha0_ph(h, DEFAULT_SPHERE_SAMPLES, s.seed)?;
    b.q("alpha0_h", a0.value, a0.evidence);
    let d = eps_approx_defect(Arc::clone(&f), h, xbar, s)?;
    let eps = eps_used(&mut b, d.value, Evidence::Sampled, assume_eps);
    b.hyp("alpha0(h) > eps", a0.value > eps, format!("{} vs {}", a0.value, eps));
    let bound = 1.0 / (a0.value - eps);
    let fbar = eval_single(&*f, xbar)?;
    let measured = certify_sms(&*f, xbar, &fbar, s, tau)?;
    let kappa = measured.modulus;
    if verdict_ok(&measured) && kappa.is_finite() {
        if kappa > eps {
            let printed = 1.0 / (kappa - eps);
            b.q("converse_printed_bound", printed, Evidence::Sampled);
            b.info("converse as printed: alpha0(h) ≥ 1/(subreg − eps)", a0.value >= printed, format!("{} vs {printed}", a0.value));
        } else {
            b.info("converse as printed: alpha0(h) ≥ 1/(subreg − eps)", false, "vacuous: subreg ≤ eps");
        }
        if kappa > 0.0 {
            let proof_form = 1.0 / kappa - eps;
            b.q("converse_bound", proof_form, Evidence::Sampled);
            b.info("converse: alpha0(h) ≥ 1/subreg − eps", a0.value >= proof_form - BOUND_SLACK, format!("{} vs {proof_form}", a0.value));
        }
    }
    Ok(b.finish(Some(bound), &measured))
}

/// Sampled `sup_{0<‖v‖≤δ} dist(f(x̄+v) − f(x̄), H(v)) / ‖v‖`.
pub fn prederivative_defect(f: Mapping, h: &Fan, xbar: &[f64], delta: f64, s: &SamplingSchedule) -> Result<Defect> {
    if h.dim_in() != f.dim_in() || h.dim_out() != f.dim_out() {
        return Err(Error::dim("prederivative fan", f.dim_out(), h.dim_out()));
    }
    let sd = SamplingSchedule { r0: delta, ..s.clone() };
    let f0 = eval_single(&*f, xbar)?;
    let (nin, nout) = (f.norm_in().clone(), f.norm_out().clone());
    let ratio = |x: &[f64]| -> Result<f64> {
        let v: Vec<f64> = x.iter().zip(xbar).map(|(a, c)| a - c).collect();
        let df: Vec<f64> = eval_single(&*f, x)?.iter().zip(&f0).map(|(a, c)| a - c).collect();
        Ok(h.image(&v)?.dist(&df, &nout)? / nin.eval(&v))
    };
    let est = estimate(&ratio, xbar, &nin, &sd, Bias::UnderEstimatesLimsup)?;
    Ok(Defect {
        value: est.cumulative[0],
        vanishing: vanishing(&est),
        estimate: est,
    })
}

/// `subreg(f)(x̄) ≤ 1/(α(H) − ε)` for an outer ε-prederivative `H`, and the
/// stricter `1/α(H)` when the defect vanishes with the radius.
pub fn sms_from_prederivative(
    f: Mapping,
    h: &Fan,
    xbar: &[f64],
    delta: f64,
    s: &SamplingSchedule,
    tau: f64,
    assume_eps: Option<f64>,
) -> Result<BoundReport> {
    let mut b = Builder::new(Theorem::OuterPrederivative, format!("f = {}, H = {} generator(s)", f.describe(), h.generators.len()));
    let h = h.clone().with_norms(f.norm_in().clone(), f.norm_out().clone());
    let a = alpha_fan(&h, DEFAULT_SPHERE_SAMPLES, s.seed)?;
    b.q("alpha_H", a.value, a.evidence);
    b.q("delta", delta, Evidence::Structural);
    let d = prederivative_defect(Arc::clone(&f), &h, xbar, delta, s)?;
    let eps = eps_used(&mut b, d.value, Evidence::Sampled, assume_eps);
    b.hyp("alpha(H) > eps", a.value > eps, format!("{} vs {}", a.value, eps));
    let bound = 1.0 / (a.value - eps);
    let fbar = eval_single(&*f, xbar)?;
    let measured = certify_sms(&*f, xbar, &fbar, s, tau)?;
    b.info("defect vanishes with the radius", d.vanishing, format!("{:?}", d.estimate.log_slope));
    if d.vanishing && a.value > 0.0 {
        let strict = 1.0 / a.value;
        b.q("strict_bound", strict, a.evidence);
        b.q("strict_slack", strict - measured.modulus, Evidence::Sampled);
        b.info("measured ≤ 1/alpha(H)", measured.modulus <= strict + BOUND_SLACK, format!("{} vs {strict}", measured.modulus));
    }
    Ok(b.finish(Some(bound), &measured))
}

/// Central-difference Jacobian with step `h`.
pub fn jacobian_fd(f: &dyn Multifunction, x: &[f64], h: f64) -> Result<Matrix> {
    let (n, m) = (f.dim_in(), f.dim_out());
    let mut j = Matrix::zeros(m, n);
    for c in 0..n {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[c] += h;
        xm[c] -= h;
        let (fp, fm) = (eval_single(f, &xp)?, eval_single(f, &xm)?);
        for r in 0..m {
            j.data[r * n + c] = (fp[r] - fm[r]) / (2.0 * h);
        }
    }
    Ok(j)
}

fn one_sided(f: &dyn Multifunction, x: &[f64], h: f64) -> Result<(Matrix, Matrix)> {
    let (n, m) = (f.dim_in(), f.dim_out());
    let f0 = eval_single(f, x)?;
    let mut fw = Matrix::zeros(m, n);
    let mut bw = Matrix::zeros(m, n);
    for c in 0..n {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[c] += h;
        xm[c] -= h;
        let (fp, fm) = (eval_single(f, &xp)?, eval_single(f, &xm)?);
        for r in 0..m {
            fw.data[r * n + c] = (fp[r] - f0[r]) / h;
            bw.data[r * n + c] = (f0[r] - fm[r]) / h;
        }
    }
    Ok((fw, bw))
}

fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.data.iter().zip(&b.data).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Jacobian at `x̄` after checking differentiability: central differences at
/// `h` and `h/2` agree to 1e-4 and one-sided differences at `h` to 1e-3,
/// both relative to `max(1, max|J|)`.
pub fn checked_jacobian(f: &dyn Multifunction, xbar: &[f64], h: f64) -> Result<Matrix> {
    let j = jacobian_fd(f, xbar, h)?;
    let j2 = jacobian_fd(f, xbar, h / 2.0)?;
    let scale = j.data.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let rich = max_abs_diff(&j, &j2);
    if rich > 1e-4 * scale {
        return Err(Error::NotDifferentiable(format!(
            "central differences at steps {h:e} and {:e} differ by {rich:e}",
            h / 2.0
        )));
    }
    let (fw, bw) = one_sided(f, xbar, h)?;
    let gap = max_abs_diff(&fw, &bw);
    if gap > 1e-3 * scale {
        return Err(Error::NotDifferentiable(format!("one-sided differences differ by {gap:e}")));
    }
    Ok(j2)
}

/// `subreg(f)(x̄) ≤ 1/α(Df(x̄))` for differentiable `f` with trivial kernel.
pub fn smooth_kernel_check(f: Mapping, xbar: &[f64], fd_step: f64, s: &SamplingSchedule, tau: f64) -> Result<BoundReport> {
    let mut b = Builder::new(Theorem::SmoothKernel, format!("f = {}", f.describe()));
    let j = checked_jacobian(&*f, xbar, fd_step)?;
    b.hyp("differentiable at x̄", true, format!("finite-difference step {fd_step:e}"));
    let l = LinearOp::new(j).with_norms(f.norm_in().clone(), f.norm_out().clone());
    let a = alpha_linear(&l);
    b.q("alpha_J", a.value, a.evidence);
    b.hyp("kernel of the derivative is trivial", a.value > KERNEL_TOL, format!("alpha = {}", a.value));
    let fbar = eval_single(&*f, xbar)?;
    let measured = certify_sms(&*f, xbar, &fbar, s, tau)?;
    Ok(b.finish(Some(1.0 / a.value), &measured))
}

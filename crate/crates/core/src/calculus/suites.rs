//! Catalog instances and seeded random instance generators, one family per
//! bound producer. Every random instance satisfies the hypotheses of its
//! producer by construction.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::*;
use crate::linalg::{sigma_min, Matrix};
use crate::mappings::{Epigraph, FanHull, SetValuedMap, SingleMap};
use crate::moduli::DEFAULT_TAU;
use crate::rng;

fn m(e: &str) -> Result<Mapping> {
    Ok(Arc::new(SingleMap::parse(e)?))
}

fn ph(e: &str) -> Result<PHMapping> {
    PHMapping::new(SingleMap::parse(e)?, 7)
}

fn lin(rows: &[Vec<f64>]) -> Result<Mapping> {
    Ok(Arc::new(LinearOp::new(Matrix::from_rows(rows)?)))
}

fn named(mut r: BoundReport, name: &str) -> BoundReport {
    r.instance = name.to_string();
    r
}

/// Parenthesised literal, safe to splice into an expression.
fn lit(v: f64) -> String {
    format!("({v})")
}

/// The fixed instances of each producer.
pub fn catalog_suite(theorem: Theorem, s: &SamplingSchedule, assume_eps: Option<f64>) -> Result<Vec<BoundReport>> {
    let t = DEFAULT_TAU;
    let z1 = [0.0];
    let z2 = [0.0, 0.0];
    let mut out = Vec::new();
    match theorem {
        Theorem::Composition => {
            out.push(named(composition_bound(m("2*x1")?, m("3*x1")?, &z1, &z1, s, t)?, "linear chain"));
            let g = m("piecewise(x1 == 0, 0, 2)")?;
            let f = m("piecewise(x1 <= 1 and x1 >= -1, abs(x1), 2 - abs(x1))")?;
            out.push(named(composition_bound(g, f, &z1, &z1, s, t)?, "discontinuous inner map"));
            out.push(named(composition_bound(m("abs(x1)")?, m("abs(x1)")?, &z1, &z1, s, t)?, "abs of abs"));
        }
        Theorem::CalmPerturbation => {
            out.push(named(perturbation_bound(m("2*x1")?, m("0.5*sin(3*x1)")?, &z1, &z1, s, t)?, "sine perturbation"));
            out.push(named(perturbation_bound(m("x1")?, m("0*x1")?, &z1, &z1, s, t)?, "zero perturbation"));
            let f1: Mapping = Arc::new(SetValuedMap::parse("piecewise(x1 == 0, interval(0, 0.5), interval(1, inf))")?);
            out.push(named(perturbation_bound(f1, m("0.01*x1")?, &z1, &z1, s, t)?, "F1 plus a linear perturbation"));
            let epi: Mapping = Arc::new(Epigraph::new(m("abs(x1)")?)?);
            out.push(named(perturbation_bound(epi, m("0.3*x1")?, &z1, &z1, s, t)?, "epigraph of a sharp minimizer"));
        }
        Theorem::EpsApproximation => {
            let f = m("piecewise(x1 == 0, 0, x1 + 0.2*x1*sin(1/x1))")?;
            out.push(named(sms_from_approx(f, &ph("x1")?, &z1, s, t, assume_eps)?, "oscillating remainder"));
            out.push(named(sms_from_approx(m("abs(x1)")?, &ph("abs(x1)")?, &z1, s, t, assume_eps)?, "exact abs"));
            out.push(named(sms_from_approx(m("x1^2")?, &ph("x1")?, &z1, s, t, assume_eps)?, "square against identity"));
        }
        Theorem::OuterPrederivative => {
            let fan = Fan::new(vec![Matrix::identity(2), Matrix::diag(&[-1.0, 1.0])], FanHull::Finite)?;
            out.push(named(sms_from_prederivative(m("[abs(x1), x2]")?, &fan, &z2, 0.5, s, t, assume_eps)?, "abs fan"));
            let d = Fan::singleton(Matrix::diag(&[2.0, 3.0]));
            out.push(named(sms_from_prederivative(m("[2*x1, 3*x2]")?, &d, &z2, 0.5, s, t, assume_eps)?, "diagonal"));
            let id = Fan::singleton(Matrix::identity(1));
            out.push(named(sms_from_prederivative(m("x1 + 0.1*x1^2")?, &id, &z1, 0.5, s, t, assume_eps)?, "quadratic remainder"));
        }
        Theorem::SmoothKernel => {
            out.push(named(smooth_kernel_check(m("[2*x1, 3*x2]")?, &z2, FD_STEP, s, t)?, "diagonal"));
            out.push(named(smooth_kernel_check(m("[x1^2, x2]")?, &z2, FD_STEP, s, t)?, "singular jacobian"));
            out.push(named(smooth_kernel_check(m("[x1 + x2, x1 - x2]")?, &z2, FD_STEP, s, t)?, "rotation-scaling"));
        }
        other => return Err(Error::invalid(format!("`{other}` has no calculus catalog"))),
    }
    Ok(out)
}

/// `n` random hypothesis-satisfying instances of one producer, seeded per
/// instance from `seed` and evaluated in parallel.
pub fn random_suite(theorem: Theorem, n: usize, seed: u64, s: &SamplingSchedule) -> Result<Vec<BoundReport>> {
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, i as u64);
            let rep = match theorem {
                Theorem::Composition => random_composition(&mut r, s),
                Theorem::CalmPerturbation => random_perturbation(&mut r, s),
                Theorem::EpsApproximation => random_approx(&mut r, s),
                Theorem::OuterPrederivative => random_prederivative(&mut r, s),
                Theorem::SmoothKernel => random_smooth(&mut r, s),
                other => Err(Error::invalid(format!("no random suite for `{other}`"))),
            }?;
            let tag = format!("random #{i}: {}", rep.instance);
            Ok(named(rep, &tag))
        })
        .collect()
}

fn sign(r: &mut ChaCha8Rng) -> f64 {
    if r.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

/// Random 2×2 matrix with `σ_min ≥ 0.5`.
fn well_conditioned(r: &mut ChaCha8Rng) -> Matrix {
    loop {
        let rows: Vec<Vec<f64>> = (0..2).map(|_| (0..2).map(|_| r.random_range(-2.0..2.0)).collect()).collect();
        let a = Matrix::from_rows(&rows).expect("rectangular rows");
        if sigma_min(&a) >= 0.5 {
            return a;
        }
    }
}

/// `a·x + b·|x|` with `|b| ≤ 0.8|a|`, `|a| ∈ [0.5, 3]`.
fn ph_1d(r: &mut ChaCha8Rng) -> String {
    let a = sign(r) * r.random_range(0.5..3.0);
    let b = r.random_range(-0.8..0.8) * a.abs();
    format!("{}*x1 + {}*abs(x1)", lit(a), lit(b))
}

fn random_composition(r: &mut ChaCha8Rng, s: &SamplingSchedule) -> Result<BoundReport> {
    let t = DEFAULT_TAU;
    match r.random_range(0..3) {
        0 => {
            let (g, f) = (ph_1d(r), ph_1d(r));
            composition_bound(m(&g)?, m(&f)?, &[0.0], &[0.0], s, t).map(|x| named(x, &format!("F = {f}, g = {g}")))
        }
        1 => {
            let a = r.random_range(0.5..3.0);
            let c = r.random_range(0.0..0.4) * a;
            let g = format!("{}*x1 + {}*x1^2", lit(a), lit(c));
            let f = ph_1d(r);
            composition_bound(m(&g)?, m(&f)?, &[0.0], &[0.0], s, t).map(|x| named(x, &format!("F = {f}, g = {g}")))
        }
        _ => {
            let (a, b) = (well_conditioned(r), well_conditioned(r));
            let g: Mapping = Arc::new(LinearOp::new(a.clone()));
            let f: Mapping = Arc::new(LinearOp::new(b.clone()));
            composition_bound(g, f, &[0.0, 0.0], &[0.0, 0.0], s, t)
                .map(|x| named(x, &format!("F = {:?}, g = {:?}", b.to_rows(), a.to_rows())))
        }
    }
}

fn random_perturbation(r: &mut ChaCha8Rng, s: &SamplingSchedule) -> Result<BoundReport> {
    let t = DEFAULT_TAU;
    if r.random::<bool>() {
        let a = sign(r) * r.random_range(0.5..3.0);
        let w = r.random_range(0.5..4.0);
        let c = r.random_range(0.0..0.9) * a.abs() / w;
        let g = format!("{}*sin({}*x1)", lit(c), lit(w));
        perturbation_bound(lin(&[vec![a]])?, m(&g)?, &[0.0], &[0.0], s, t).map(|x| named(x, &format!("F = {a}x, g = {g}")))
    } else {
        let a = well_conditioned(r);
        let smin = sigma_min(&a);
        let w = [r.random_range(0.5..4.0), r.random_range(0.5..4.0)];
        let lim = 0.9 * smin;
        let c = [r.random_range(0.0..lim) / w[0], r.random_range(0.0..lim) / w[1]];
        let g = format!("[{}*sin({}*x1), {}*sin({}*x2)]", lit(c[0]), lit(w[0]), lit(c[1]), lit(w[1]));
        let f: Mapping = Arc::new(LinearOp::new(a.clone()));
        perturbation_bound(f, m(&g)?, &[0.0, 0.0], &[0.0, 0.0], s, t)
            .map(|x| named(x, &format!("F = {:?}, g = {g}", a.to_rows())))
    }
}

fn random_approx(r: &mut ChaCha8Rng, s: &SamplingSchedule) -> Result<BoundReport> {
    let a = sign(r) * r.random_range(0.5..3.0);
    let b = r.random_range(-0.8..0.8) * a.abs();
    let alpha0 = a.abs() - b.abs();
    let h = format!("{}*x1 + {}*abs(x1)", lit(a), lit(b));
    let c = r.random_range(0.0..0.8) * alpha0;
    let f = if r.random::<bool>() {
        format!("piecewise(x1 == 0, 0, {h} + {}*x1*sin(1/x1))", lit(c))
    } else {
        format!("{h} + {}*x1^2", lit(sign(r) * c))
    };
    sms_from_approx(m(&f)?, &ph(&h)?, &[0.0], s, DEFAULT_TAU, None).map(|x| named(x, &format!("f = {f}, h = {h}")))
}

fn random_prederivative(r: &mut ChaCha8Rng, s: &SamplingSchedule) -> Result<BoundReport> {
    let t = DEFAULT_TAU;
    if r.random::<bool>() {
        let a = sign(r) * r.random_range(0.5..3.0);
        let b = r.random_range(-0.8..0.8) * a.abs();
        let fan = Fan::new(vec![Matrix::diag(&[a + b]), Matrix::diag(&[a - b])], FanHull::Finite)?;
        let c = r.random_range(-0.3..0.3);
        let f = format!("{}*x1 + {}*abs(x1) + {}*x1^2", lit(a), lit(b), lit(c));
        sms_from_prederivative(m(&f)?, &fan, &[0.0], s.r0, s, t, None).map(|x| named(x, &format!("f = {f}")))
    } else {
        // f(x) = M_{sign x1} x with M_± = A ± e₁ (b, 0): a kink in x1.
        let a = well_conditioned(r);
        let b = r.random_range(-0.5..0.5);
        let mut plus = a.clone();
        let mut minus = a.clone();
        plus.data[0] += b;
        minus.data[0] -= b;
        if sigma_min(&plus) < 0.3 || sigma_min(&minus) < 0.3 {
            plus = a.clone();
            minus = a.clone();
        }
        let q = r.random_range(-0.1..0.1);
        let row = |m: &Matrix, i: usize| format!("{}*x1 + {}*x2", lit(m.data[2 * i]), lit(m.data[2 * i + 1]));
        let f = format!(
            "piecewise(x1 >= 0, [{} + {}*x2^2, {}], [{} + {}*x2^2, {}])",
            row(&plus, 0),
            lit(q),
            row(&plus, 1),
            row(&minus, 0),
            lit(q),
            row(&minus, 1)
        );
        let fan = Fan::new(vec![plus, minus], FanHull::Finite)?;
        sms_from_prederivative(m(&f)?, &fan, &[0.0, 0.0], s.r0, s, t, None).map(|x| named(x, &format!("f = {f}")))
    }
}

fn random_smooth(r: &mut ChaCha8Rng, s: &SamplingSchedule) -> Result<BoundReport> {
    let a = well_conditioned(r);
    let q: Vec<f64> = (0..3).map(|_| r.random_range(-0.1..0.1)).collect();
    let f = format!(
        "[{}*x1 + {}*x2 + {}*x1*x2, {}*x1 + {}*x2 + {}*x1^2 + {}*sin(x2)^2]",
        lit(a.data[0]),
        lit(a.data[1]),
        lit(q[0]),
        lit(a.data[2]),
        lit(a.data[3]),
        lit(q[1]),
        lit(q[2])
    );
    smooth_kernel_check(m(&f)?, &[0.0, 0.0], FD_STEP, &smooth_suite_schedule(s), DEFAULT_TAU).map(|x| named(x, &format!("f = {f}")))
}

/// The smooth-kernel bound is sharp, so the shells must sit where the
/// quadratic terms stay below the slack.
fn smooth_suite_schedule(s: &SamplingSchedule) -> SamplingSchedule {
    SamplingSchedule { r0: 1e-7, ..s.clone() }
}

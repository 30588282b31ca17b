use rand::Rng;
use rayon::prelude::*;

use super::{
    convex_scalarized_geneq_bound, isolated_calmness_bound, single_valued_field_bound, Field, GenEqProblem,
};
use crate::calculus::{BoundReport, Theorem};
use crate::convexity::{MaxAffineFn, MaxAffineMap, OrderCone};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::mappings::{Fan, SingleMap};
use crate::rates::SamplingSchedule;
use crate::rng;

fn scalar_fan(a: f64) -> Fan {
    Fan::singleton(Matrix::diag(&[a]))
}

fn problem(f: &str, field: Field) -> Result<GenEqProblem> {
    GenEqProblem::new(SingleMap::parse(f)?, field, vec![0.0], vec![0.0])
}

fn scalarized(f: &str, field: Field, pieces: [&str; 2]) -> Result<GenEqProblem> {
    let map = MaxAffineMap::new(vec![MaxAffineFn::parse(pieces[0])?, MaxAffineFn::parse(pieces[1])?])?;
    problem(f, field)?.with_convex_base(map, OrderCone::nonneg(2))
}

/// Runs the bound of `theorem` on one problem.
pub fn geneq_bound(
    theorem: Theorem,
    prob: &GenEqProblem,
    s: &SamplingSchedule,
    tau: f64,
    assume_eps: Option<f64>,
) -> Result<BoundReport> {
    match theorem {
        Theorem::IsolatedCalmness => isolated_calmness_bound(prob, s, tau, assume_eps),
        Theorem::SingleValuedField => single_valued_field_bound(prob, s, assume_eps),
        Theorem::ScalarizedGenEq => convex_scalarized_geneq_bound(prob, s),
        other => Err(Error::invalid(format!("`{other}` is not a generalized-equation bound"))),
    }
}

/// The worked instances for each generalized-equation bound.
pub fn geneq_catalog(theorem: Theorem) -> Result<Vec<GenEqProblem>> {
    match theorem {
        Theorem::IsolatedCalmness => Ok(vec![
            problem("x1 - p1", Field::nonneg_orthant(1))?,
            problem("2*x1 - p1", Field::zero(1, 1))?.with_fan(scalar_fan(2.0))?,
            problem("x1 - p1 + 0.1*x1^2", Field::zero(1, 1))?.with_fan(scalar_fan(1.0))?,
        ]),
        Theorem::SingleValuedField => Ok(vec![
            problem("2*x1 - p1", Field::expr("0.5*sin(x1)", 1)?)?.with_fan(scalar_fan(2.0))?,
            problem("2*x1 - p1", Field::zero(1, 1))?.with_fan(scalar_fan(2.0))?,
        ]),
        Theorem::ScalarizedGenEq => Ok(vec![
            scalarized("[abs(x1) - p1, 0]", Field::zero(1, 2), ["(1,0);(-1,0)", "(0,0)"])?,
            scalarized("[abs(x1) - p1, 0]", Field::expr("[0.4*x1, 0]", 1)?, ["(1,0);(-1,0)", "(0,0)"])?,
        ]),
        other => Err(Error::invalid(format!("`{other}` is not a generalized-equation bound"))),
    }
}

/// A random hypothesis-satisfying instance. Parameters are kept so that
/// every traced solution lies inside the innermost defect shell's outer
/// radius, which makes the sampled defect dominate the true remainder.
fn random_problem(theorem: Theorem, seed: u64, i: u64) -> Result<GenEqProblem> {
    let mut r = rng::stream(seed, i);
    let sign = |r: &mut rand_chacha::ChaCha8Rng| if r.random_bool(0.5) { 1.0 } else { -1.0 };
    match theorem {
        Theorem::IsolatedCalmness => {
            let a: f64 = r.random_range(1.0..3.0);
            let b = sign(&mut r) * r.random_range(0.5..1.5);
            let c: f64 = r.random_range(-0.5..0.5);
            let field = if r.random_bool(0.5) {
                Field::nonneg_orthant(1)
            } else {
                Field::zero(1, 1)
            };
            problem(&format!("{a}*x1 - ({b})*p1 + ({c})*x1^2"), field)?
                .with_fan(scalar_fan(a))?
                .with_radii(0.5, 0.1)
        }
        Theorem::SingleValuedField => {
            let a: f64 = r.random_range(1.5..3.0);
            let b = sign(&mut r) * r.random_range(0.5..1.5);
            let c: f64 = r.random_range(-0.3..0.3);
            let t: f64 = r.random_range(-0.6..0.6);
            problem(&format!("{a}*x1 - ({b})*p1 + ({c})*x1^2"), Field::expr(&format!("({t})*x1"), 1)?)?
                .with_fan(scalar_fan(a))?
                .with_radii(0.5, 0.1)
        }
        Theorem::ScalarizedGenEq => {
            let a1: f64 = r.random_range(0.5..2.0);
            let a2: f64 = r.random_range(0.5..2.0);
            let b = sign(&mut r) * r.random_range(0.5..1.5);
            let t = r.random_range(-0.8..0.8) * a1.min(a2);
            let field = if r.random_bool(0.75) {
                Field::expr(&format!("[({t})*x1, 0]"), 1)?
            } else {
                Field::zero(1, 2)
            };
            let pieces = format!("({a1},0);({},0)", -a2);
            scalarized(
                &format!("[max({a1}*x1, ({})*x1) - ({b})*p1, 0]", -a2),
                field,
                [&pieces, "(0,0)"],
            )?
            .with_radii(0.5, 0.1)
        }
        other => Err(Error::invalid(format!("`{other}` is not a generalized-equation bound"))),
    }
}

/// `n` seeded random instances of `theorem`, each run through its bound.
pub fn geneq_random_suite(theorem: Theorem, n: usize, seed: u64, s: &SamplingSchedule) -> Result<Vec<BoundReport>> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let prob = random_problem(theorem, seed, i)?;
            let mut rep = geneq_bound(theorem, &prob, s, crate::moduli::DEFAULT_TAU, None)?;
            rep.instance = format!("random #{i}: {}", rep.instance);
            Ok(rep)
        })
        .collect()
}

use serde::{Deserialize, Serialize};

use super::{Fan, FanHull, LinearOp, Multifunction, PHMapping};
use crate::error::{Error, Result};
use crate::evidence::Evidence;
use crate::linalg::{compass_on_sphere, min_norm_point, sigma_min, Matrix};
use crate::spaces::{unit_sphere_samples, Norm};

/// Sphere samples used when no count is given.
pub const DEFAULT_SPHERE_SAMPLES: usize = 10_000;
const DEFAULT_SEED: u64 = 0x5EED_A1FA;
const REFINE_STARTS: usize = 4;
const REFINE_EVALS: usize = 20_000;

/// An injectivity constant `inf_{‖u‖=1} dist(0, H(u))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Injectivity {
    #[serde(with = "crate::ext::scalar")]
    pub value: f64,
    /// `Sampled` values are upper estimates of the infimum.
    pub evidence: Evidence,
    pub samples: usize,
    /// A unit vector attaining `value`, when one was sampled.
    pub argmin: Option<Vec<f64>>,
}

impl Injectivity {
    fn structural(value: f64) -> Self {
        Injectivity {
            value,
            evidence: Evidence::Structural,
            samples: 0,
            argmin: None,
        }
    }
}

/// Sampled infimum of `f` over the unit sphere, polished by compass search
/// from the best samples. Every value is attained by a unit vector, so the
/// result never undercuts the true infimum.
fn sampled_inf(f: &dyn Fn(&[f64]) -> Result<f64>, dim: usize, norm: &Norm, count: usize, seed: u64) -> Result<Injectivity> {
    let us = unit_sphere_samples(dim, norm, count, seed)?;
    let mut scored = Vec::with_capacity(us.len());
    for u in us {
        let v = f(&u).map_err(|e| Error::Evaluation {
            witness: u.clone(),
            shell: 0,
            message: e.to_string(),
        })?;
        scored.push((v, u));
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (mut best, mut arg) = scored[0].clone();
    if dim > 1 {
        let g = |u: &[f64]| f(u).unwrap_or(f64::INFINITY);
        for (_, u0) in scored.iter().take(REFINE_STARTS) {
            let (u, v) = compass_on_sphere(&g, u0, norm, 0.25, 1e-10, REFINE_EVALS);
            if v < best {
                best = v;
                arg = u;
            }
        }
    }
    Ok(Injectivity {
        value: best.max(0.0),
        evidence: Evidence::Sampled,
        samples: count,
        argmin: Some(arg),
    })
}

fn alpha_linear_with(l: &LinearOp, count: usize, seed: u64) -> Result<Injectivity> {
    let a = &l.matrix;
    if a.cols == 1 {
        let w = l.norm_in.weight(0);
        return Ok(Injectivity::structural(l.norm_out.eval(&a.col(0)) / w));
    }
    if l.norm_in.is_l2() && l.norm_out.is_l2() {
        let mut b = Matrix::zeros(a.rows, a.cols);
        for i in 0..a.rows {
            for j in 0..a.cols {
                b.data[i * a.cols + j] = l.norm_out.weight(i) * a[(i, j)] / l.norm_in.weight(j);
            }
        }
        return Ok(Injectivity::structural(sigma_min(&b)));
    }
    sampled_inf(&|u| Ok(l.norm_out.eval(&a.apply(u))), a.cols, &l.norm_in, count, seed)
}

/// `α(Λ) = inf_{‖u‖=1} ‖Λu‖`: the smallest singular value under (weighted)
/// `l2` norms or a one-dimensional source, a sampled upper estimate
/// otherwise.
pub fn alpha_linear(l: &LinearOp) -> Injectivity {
    alpha_linear_with(l, DEFAULT_SPHERE_SAMPLES, DEFAULT_SEED).expect("linear maps evaluate everywhere")
}

/// `β(Λ) = α(Λᵀ)` with the dual norms.
pub fn beta_linear(l: &LinearOp) -> Injectivity {
    alpha_linear(&l.adjoint())
}

/// `α₀(h) = inf_{‖u‖=1} ‖h(u)‖`. On the line the unit sphere is `{±1}` and
/// the value is exact; otherwise it is a sampled upper estimate.
pub fn alpha0_ph(h: &PHMapping, count: usize, seed: u64) -> Result<Injectivity> {
    let norm_out = h.norm_out().clone();
    if h.dim_in() == 1 {
        let u = 1.0 / h.norm_in().weight(0);
        let v = norm_out.eval(&h.eval(&[u])?).min(norm_out.eval(&h.eval(&[-u])?));
        return Ok(Injectivity::structural(v));
    }
    sampled_inf(&|u| Ok(norm_out.eval(&h.eval(u)?)), h.dim_in(), h.norm_in(), count, seed)
}

/// `α(H) = inf_{‖u‖=1} dist(0, H(u))`.
///
/// Finite-set fans take the minimum of the generators' constants, which is
/// exact whenever each generator's is. Convex-hull fans sample `u` and solve
/// the inner min-norm problem exactly, which needs an `l2` target.
pub fn alpha_fan(h: &Fan, count: usize, seed: u64) -> Result<Injectivity> {
    if h.hull == FanHull::Finite || h.generators.len() == 1 {
        let mut best: Option<Injectivity> = None;
        let mut evidence = Evidence::Structural;
        for g in &h.generators {
            let l = LinearOp::new(g.clone()).with_norms(h.norm_in.clone(), h.norm_out.clone());
            let a = alpha_linear_with(&l, count, seed)?;
            evidence = evidence.and(a.evidence);
            if best.as_ref().is_none_or(|b| a.value < b.value) {
                best = Some(a);
            }
        }
        let mut best = best.expect("fans have generators");
        best.evidence = evidence;
        return Ok(best);
    }
    if !h.norm_out.is_l2() {
        return Err(Error::NoExactOracle(format!(
            "no exact inner oracle for a convex-hull fan under the {} target norm",
            h.norm_out
        )));
    }
    let w: Vec<f64> = (0..h.dim_out()).map(|i| h.norm_out.weight(i)).collect();
    let f = |u: &[f64]| -> Result<f64> {
        let pts: Vec<Vec<f64>> = h
            .points(u)?
            .into_iter()
            .map(|p| p.iter().zip(&w).map(|(a, b)| a * b).collect())
            .collect();
        let (x, _) = min_norm_point(&pts);
        Ok(crate::linalg::norm2(&x))
    };
    sampled_inf(&f, h.dim_in(), &h.norm_in, count, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mappings::SingleMap;
    use proptest::prelude::*;

    fn lin(rows: &[Vec<f64>]) -> LinearOp {
        LinearOp::new(Matrix::from_rows(rows).unwrap())
    }

    #[test]
    fn linear_examples() {
        let d = LinearOp::new(Matrix::diag(&[2.0, 3.0]));
        assert!((alpha_linear(&d).value - 2.0).abs() < 1e-12);
        assert!((beta_linear(&d).value - 2.0).abs() < 1e-12);
        let z = LinearOp::new(Matrix::zeros(2, 2));
        assert_eq!(alpha_linear(&z).value, 0.0);
        assert_eq!(beta_linear(&z).value, 0.0);
        let row = lin(&[vec![1.0, 0.0]]);
        assert!(alpha_linear(&row).value.abs() < 1e-12);
        assert!((beta_linear(&row).value - 1.0).abs() < 1e-12);
        assert_eq!(beta_linear(&row).evidence, Evidence::Structural);
    }

    #[test]
    fn identity_from_l1_to_linf() {
        let l = LinearOp::new(Matrix::identity(4)).with_norms(Norm::l1(), Norm::linf());
        let a = alpha_linear(&l);
        assert_eq!(a.evidence, Evidence::Sampled);
        assert!(a.value >= 0.25 - 1e-12 && a.value <= 0.25 * 1.05, "{}", a.value);
    }

    #[test]
    fn weighted_l2_scales_singular_values() {
        let l = LinearOp::new(Matrix::identity(2)).with_norms(
            Norm::weighted(crate::spaces::NormKind::L2, vec![1.0, 2.0]).unwrap(),
            Norm::l2(),
        );
        assert!((alpha_linear(&l).value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ph_examples() {
        for (e, want) in [("[x1, x2]", 1.0), ("norm2([x1, x2])", 1.0), ("[x1, abs(x2)]", 1.0)] {
            let h = PHMapping::new(SingleMap::parse(e).unwrap(), 3).unwrap();
            let a = alpha0_ph(&h, 2048, 3).unwrap();
            assert!((a.value - want).abs() < 1e-9, "{e}: {}", a.value);
        }
    }

    #[test]
    fn fan_examples() {
        let single = Fan::singleton(Matrix::diag(&[2.0, 3.0]));
        assert!((alpha_fan(&single, 1024, 1).unwrap().value - 2.0).abs() < 1e-12);
        let two = Fan::new(vec![Matrix::identity(2), Matrix::diag(&[2.0, 2.0])], FanHull::Finite).unwrap();
        assert!((alpha_fan(&two, 1024, 1).unwrap().value - 1.0).abs() < 1e-12);
        let hull = Fan::new(vec![Matrix::identity(2), Matrix::diag(&[-1.0, 1.0])], FanHull::Convex).unwrap();
        let a = alpha_fan(&hull, 1024, 1).unwrap();
        assert!(a.value < 1e-12, "{}", a.value);
        let bad = hull.clone().with_norms(Norm::l2(), Norm::l1());
        assert!(matches!(alpha_fan(&bad, 16, 1), Err(Error::NoExactOracle(_))));
    }

    fn matrix(n: usize) -> impl Strategy<Value = Matrix> {
        prop::collection::vec(-3.0f64..3.0, n * n).prop_map(move |d| Matrix { rows: n, cols: n, data: d })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn svd_agrees_with_sampled_ph_constant(m in (1usize..=3).prop_flat_map(matrix)) {
            let l = LinearOp::new(m.clone());
            let exact = alpha_linear(&l).value;
            let h = PHMapping::new(crate::mappings::SingleMap::new(linear_expr(&m), m.cols).unwrap(), 5).unwrap();
            let est = alpha0_ph(&h, DEFAULT_SPHERE_SAMPLES, 11).unwrap().value;
            prop_assert!(est >= exact - 1e-9);
            prop_assert!(est <= exact * 1.05 + 1e-9, "exact {} sampled {}", exact, est);
        }

        #[test]
        fn singleton_fan_matches_linear(m in (1usize..=3).prop_flat_map(matrix)) {
            let l = LinearOp::new(m.clone()).with_norms(Norm::l1(), Norm::linf());
            let a = alpha_linear(&l).value;
            let f = Fan::singleton(m).with_norms(Norm::l1(), Norm::linf());
            let b = alpha_fan(&f, DEFAULT_SPHERE_SAMPLES, DEFAULT_SEED).unwrap().value;
            prop_assert!((a - b).abs() <= 1e-12 + 0.05 * a);
        }

        #[test]
        fn beta_is_alpha_of_adjoint(m in (1usize..=3).prop_flat_map(matrix)) {
            let l = LinearOp::new(m.clone()).with_norms(Norm::l1(), Norm::l2());
            let t = LinearOp::new(m.transpose()).with_norms(Norm::l2(), Norm::linf());
            prop_assert_eq!(beta_linear(&l), alpha_linear(&t));
        }
    }

    fn linear_expr(m: &Matrix) -> crate::expr::Expr {
        use crate::expr::{BinOp, Expr};
        let rows = (0..m.rows)
            .map(|i| {
                (0..m.cols)
                    .map(|j| Expr::Binary(BinOp::Mul, Box::new(Expr::Const(m[(i, j)])), Box::new(Expr::x(j + 1))))
                    .reduce(|a, b| Expr::Binary(BinOp::Add, Box::new(a), Box::new(b)))
                    .unwrap()
            })
            .collect();
        Expr::Vector(rows)
    }
}

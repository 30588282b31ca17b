use super::*;
use crate::calculus::{Holds, Theorem, BOUND_SLACK};
use crate::moduli::DEFAULT_TAU;
use crate::rates::SamplingSchedule;
use proptest::prelude::*;

fn sched() -> SamplingSchedule {
    SamplingSchedule::default()
}

fn complementarity() -> GenEqProblem {
    GenEqProblem::new(SingleMap::parse("x1 - p1").unwrap(), Field::nonneg_orthant(1), vec![0.0], vec![0.0]).unwrap()
}

fn zero_field(f: &str) -> GenEqProblem {
    GenEqProblem::new(SingleMap::parse(f).unwrap(), Field::zero(1, 1), vec![0.0], vec![0.0]).unwrap()
}

fn scalar_fan(a: f64) -> Fan {
    Fan::singleton(Matrix::diag(&[a]))
}

/// Largest root of `g` on `[lo, hi]` bracketing a sign change, by bisection.
fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    assert!(g(lo) * g(hi) <= 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(lo) * g(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn residual_examples() {
    let prob = complementarity();
    assert_eq!(prob.residual(&[1.0], &[1.0]).unwrap(), 0.0);
    // f(1, 0) = −1 and T(0) = (−∞, 0], so 0 ∈ −1 + (−∞, 0] fails by 1
    assert_eq!(prob.residual(&[1.0], &[0.0]).unwrap(), 1.0);
    assert_eq!(prob.residual(&[-1.0], &[0.5]).unwrap(), 1.5);
    assert_eq!(prob.residual(&[-1.0], &[0.0]).unwrap(), 0.0);
    assert_eq!(prob.residual(&[0.0], &[-0.5]).unwrap(), f64::INFINITY);
    assert!(prob.residual(&[0.0, 1.0], &[0.0]).is_err());
}

#[test]
fn rejects_anchor_off_the_solution_set() {
    let e = GenEqProblem::new(SingleMap::parse("x1 - p1 + 1").unwrap(), Field::zero(1, 1), vec![0.0], vec![0.0]);
    assert!(matches!(e, Err(Error::AnchorOffGraph { .. })));
}

#[test]
fn default_fan_is_the_partial_jacobian() {
    let prob = zero_field("3*x1 + x1^2 - p1");
    assert!((prob.fan.generators[0].data[0] - 3.0).abs() < 1e-8);
}

#[test]
fn trace_examples() {
    let prob = complementarity();
    let out = trace_solution_map(&prob, &[vec![-0.2], vec![0.0], vec![0.3]], 0.5).unwrap();
    assert_eq!(out[0].points, vec![vec![0.0]]);
    assert_eq!(out[1].points, vec![vec![0.0]]);
    assert_eq!(out[2].points.len(), 1);
    assert!((out[2].points[0][0] - 0.3).abs() < 1e-12);

    let out = trace_solution_map(&zero_field("x1 - p1"), &[vec![0.17]], 0.5).unwrap();
    assert!((out[0].points[0][0] - 0.17).abs() < 1e-12);

    let out = trace_solution_map(&zero_field("x1^3 - p1"), &[vec![0.008]], 0.5).unwrap();
    let want = bisect(|x| x * x * x - 0.008, 0.0, 0.5);
    assert_eq!(out[0].points.len(), 1);
    assert!((out[0].points[0][0] - want).abs() < 1e-6);
    assert!((want - 0.2).abs() < 1e-12);
}

#[test]
fn trace_finds_every_branch_and_nothing_outside_the_ball() {
    let prob = GenEqProblem::new(SingleMap::parse("abs(x1) - p1").unwrap(), Field::zero(1, 1), vec![0.0], vec![0.0]).unwrap();
    let out = trace_solution_map(&prob, &[vec![0.1], vec![-0.1], vec![0.7]], 0.5).unwrap();
    assert_eq!(out[0].points.len(), 2);
    assert!((out[0].points[0][0] + 0.1).abs() < 1e-12 && (out[0].points[1][0] - 0.1).abs() < 1e-12);
    assert!(out[1].points.is_empty());
    assert!(out[2].points.is_empty());
}

#[test]
fn trace_in_two_dimensions() {
    let f = SingleMap::parse("[x1 + 0.5*x2 - p1, x2 - x1^2]").unwrap();
    let prob = GenEqProblem::new(f, Field::zero(2, 2), vec![0.0], vec![0.0, 0.0]).unwrap();
    let out = trace_solution_map(&prob, &[vec![0.1]], 0.5).unwrap();
    assert_eq!(out[0].points.len(), 1);
    let x = &out[0].points[0];
    assert!(prob.residual(&[0.1], x).unwrap() <= SOLUTION_TOL);
    // x2 = x1², x1 + x1²/2 = 0.1
    let want = bisect(|t| t + 0.5 * t * t - 0.1, 0.0, 0.5);
    assert!((x[0] - want).abs() < 1e-6, "{x:?}");
}

#[test]
fn defect_examples() {
    // the default fan is a finite-difference Jacobian, exact up to rounding
    let d = partial_prederivative_defect(&complementarity(), &sched()).unwrap();
    assert!(d.value < 1e-12, "{}", d.value);

    let prob = zero_field("x1 - p1 + 0.1*x1^2").with_fan(scalar_fan(1.0)).unwrap();
    let d = partial_prederivative_defect(&prob, &sched()).unwrap();
    assert!(d.value <= 0.05 + 1e-12 && d.value > 0.04, "{}", d.value);
    assert!(d.vanishing);

    let prob = zero_field("x1*(1 + p1) - p1").with_fan(scalar_fan(1.0)).unwrap().with_radii(0.5, 0.1).unwrap();
    let d = partial_prederivative_defect(&prob, &sched()).unwrap();
    assert!((d.value - 0.1).abs() < 1e-12, "{}", d.value);
    assert!(!d.vanishing);
}

#[test]
fn isolated_calmness_examples() {
    let r = isolated_calmness_bound(&complementarity(), &sched(), DEFAULT_TAU, None).unwrap();
    assert!((r.bound.unwrap() - 1.0).abs() < 1e-12);
    assert!((r.measured - 1.0).abs() < 1e-9, "{}", r.measured);
    assert_eq!(r.holds, Holds::Holds);
    assert!(r.informational.iter().all(|c| c.satisfied), "{:?}", r.informational);

    let prob = zero_field("2*x1 - p1").with_fan(scalar_fan(2.0)).unwrap();
    let r = isolated_calmness_bound(&prob, &sched(), DEFAULT_TAU, None).unwrap();
    assert!((r.bound.unwrap() - 0.5).abs() < 1e-12);
    assert!((r.measured - 0.5).abs() < 1e-9);
    assert_eq!(r.holds, Holds::Holds);

    let prob = zero_field("x1 - p1 + 0.1*x1^2").with_fan(scalar_fan(1.0)).unwrap();
    let r = isolated_calmness_bound(&prob, &sched(), DEFAULT_TAU, None).unwrap();
    let b = r.bound.unwrap();
    assert!((b - 1.0 / 0.95).abs() < 0.01, "{b}");
    // the worst traced ratio comes from p = −ζ: x + 0.1x² = −0.2
    let x = bisect(|x| x + 0.1 * x * x + 0.2, -0.5, 0.0);
    assert!((r.measured - x.abs() / 0.2).abs() < 1e-6, "{}", r.measured);
    assert_eq!(r.holds, Holds::Holds);
    let strict = r.quantity("strict_bound").expect("vanishing defect");
    assert!(strict >= r.measured - BOUND_SLACK || !r.informational.iter().all(|c| c.satisfied));
}

#[test]
fn eps_kappa_at_least_one_is_not_applicable() {
    let prob = zero_field("x1 - p1 + x1^2").with_fan(scalar_fan(1.0)).unwrap().with_radii(1.5, 0.1).unwrap();
    let r = isolated_calmness_bound(&prob, &sched(), DEFAULT_TAU, None).unwrap();
    assert_eq!(r.holds, Holds::NotApplicable);
    assert_eq!(r.bound, None);
}

#[test]
fn single_valued_field_examples() {
    let prob = GenEqProblem::new(
        SingleMap::parse("2*x1 - p1").unwrap(),
        Field::expr("0.5*sin(x1)", 1).unwrap(),
        vec![0.0],
        vec![0.0],
    )
    .unwrap()
    .with_fan(scalar_fan(2.0))
    .unwrap();
    let r = single_valued_field_bound(&prob, &sched(), None).unwrap();
    let b = r.bound.unwrap();
    assert!((b - 2.0 / 3.0).abs() < 1e-3, "{b}");
    let x = bisect(|x| 2.0 * x + 0.5 * x.sin() - 0.2, 0.0, 0.5);
    assert!((r.measured - x / 0.2).abs() < 1e-6);
    assert!((r.measured - 0.4).abs() < 1e-3);
    assert_eq!(r.holds, Holds::Holds);

    let prob = zero_field("2*x1 - p1").with_fan(scalar_fan(2.0)).unwrap();
    let a = single_valued_field_bound(&prob, &sched(), None).unwrap();
    let b = isolated_calmness_bound(&prob, &sched(), DEFAULT_TAU, None).unwrap();
    assert_eq!(a.quantity("clm_T").unwrap(), 0.0);
    assert!((a.bound.unwrap() - b.bound.unwrap()).abs() < 1e-12);
    assert_eq!(a.measured, b.measured);

    let prob = GenEqProblem::new(
        SingleMap::parse("x1 - p1").unwrap(),
        Field::expr("x1", 1).unwrap(),
        vec![0.0],
        vec![0.0],
    )
    .unwrap()
    .with_fan(scalar_fan(1.0))
    .unwrap();
    let r = single_valued_field_bound(&prob, &sched(), None).unwrap();
    assert_eq!(r.holds, Holds::NotApplicable);
    assert!(!r.hypotheses_met());

    let r = single_valued_field_bound(&complementarity(), &sched(), None).unwrap();
    assert_eq!(r.holds, Holds::NotApplicable);
}

#[test]
fn scalarized_examples() {
    let cat = geneq_catalog(Theorem::ScalarizedGenEq).unwrap();
    let r = convex_scalarized_geneq_bound(&cat[0], &sched()).unwrap();
    assert_eq!(r.quantity("intrad").unwrap(), 1.0);
    assert!((r.bound.unwrap() - 1.0).abs() < 1e-12);
    assert!((r.measured - 1.0).abs() < 1e-9);
    assert_eq!(r.holds, Holds::Holds);

    let r = convex_scalarized_geneq_bound(&cat[1], &sched()).unwrap();
    let b = r.bound.unwrap();
    assert!((b - 1.0 / 0.6).abs() < 1e-9, "{b}");
    assert!((r.measured - 1.0 / 0.6).abs() < 1e-9, "{}", r.measured);
    assert_eq!(r.holds, Holds::Holds);

    let prob = GenEqProblem::new(
        SingleMap::parse("[abs(x1) - p1, 0]").unwrap(),
        Field::expr("[1.2*x1, 0]", 1).unwrap(),
        vec![0.0],
        vec![0.0],
    )
    .unwrap()
    .with_convex_base(
        crate::convexity::MaxAffineMap::new(vec![
            crate::convexity::MaxAffineFn::parse("(1,0);(-1,0)").unwrap(),
            crate::convexity::MaxAffineFn::parse("(0,0)").unwrap(),
        ])
        .unwrap(),
        crate::convexity::OrderCone::nonneg(2),
    )
    .unwrap();
    let r = convex_scalarized_geneq_bound(&prob, &sched()).unwrap();
    assert_eq!(r.holds, Holds::NotApplicable);

    assert!(convex_scalarized_geneq_bound(&complementarity(), &sched()).is_err());
}

#[test]
fn catalog_holds() {
    for th in [Theorem::IsolatedCalmness, Theorem::SingleValuedField, Theorem::ScalarizedGenEq] {
        for prob in geneq_catalog(th).unwrap() {
            let r = geneq_bound(th, &prob, &sched(), DEFAULT_TAU, None).unwrap();
            assert_eq!(r.holds, Holds::Holds, "{th}: {}", r.instance);
            assert!(r.informational.iter().find(|c| c.name == "x̄ isolated in S(p̄)").unwrap().satisfied);
        }
    }
    assert!(geneq_catalog(Theorem::Composition).is_err());
}

#[test]
fn random_suites_hold() {
    for th in [Theorem::IsolatedCalmness, Theorem::SingleValuedField, Theorem::ScalarizedGenEq] {
        for r in geneq_random_suite(th, 8, 11, &sched()).unwrap() {
            assert_eq!(r.holds, Holds::Holds, "{th}: {} {:?} {}", r.instance, r.bound, r.measured);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn traced_points_replay_below_tolerance(a in 0.5f64..3.0, c in -1.0f64..1.0, p in -0.2f64..0.2) {
        let prob = GenEqProblem::new(
            SingleMap::parse(&format!("{a}*x1 + ({c})*x1^2 - p1")).unwrap(),
            Field::nonneg_orthant(1),
            vec![0.0],
            vec![0.0],
        ).unwrap();
        for smp in trace_solution_map(&prob, &[vec![p]], 0.5).unwrap() {
            for (x, r) in smp.points.iter().zip(&smp.residuals) {
                let again = prob.residual(&smp.p, x).unwrap();
                prop_assert_eq!(again, *r);
                prop_assert!(again <= SOLUTION_TOL);
            }
        }
    }
}

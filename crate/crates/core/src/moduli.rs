//! Verdicts on strong metric subregularity, isolated calmness of inverses and
//! sharp minimality, read off displacement and descent rates.
//!
//! A positive steepest displacement rate is equivalent to strong metric
//! subregularity, with modulus equal to its reciprocal (`1/∞ = 0`).

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::evidence::Evidence;
use crate::ext;
use crate::mappings::{alpha_linear, eval_single, Epigraph, Mapping, Multifunction};
use crate::rates::{descent_rate, displacement_rate, RateEstimate, SamplingSchedule};

/// Default certification threshold on the rate.
pub const DEFAULT_TAU: f64 = 0.05;
/// Refutation needs this many consecutive innermost shells at or below `τ/100`.
pub const REFUTE_SHELLS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    Sms,
    IsolatedCalmness,
    SharpMinimum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    CertifiedNumerically,
    RefutedWithWitness,
    Inconclusive,
}

/// A sample point whose ratio supports a refutation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Witness {
    pub shell: usize,
    pub point: Vec<f64>,
    #[serde(with = "ext::scalar")]
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub property: Property,
    pub verdict: Verdict,
    /// `1/rate`, with `1/∞ = 0` and `1/0 = ∞`.
    #[serde(with = "ext::scalar")]
    pub modulus: f64,
    #[serde(with = "ext::scalar")]
    pub rate: f64,
    pub criterion: String,
    #[serde(with = "ext::scalar")]
    pub tau: f64,
    pub evidence: Evidence,
    /// Nonempty exactly when the verdict is a refutation.
    pub witnesses: Vec<Witness>,
    /// The rate was read as infinite from the log-log slope of the shells.
    pub divergence_heuristic: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub estimate: Option<RateEstimate>,
    /// For sharp-minimum checks, the companion certificate of the
    /// epigraphical mapping.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub epigraph: Option<Box<Certificate>>,
}

impl Certificate {
    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::CertifiedNumerically
    }
}

/// `1/r` with `1/∞ = 0` and `1/0 = ∞`.
pub fn reciprocal(r: f64) -> f64 {
    if r <= 0.0 {
        f64::INFINITY
    } else {
        1.0 / r
    }
}

pub(crate) fn verdict_from(property: Property, est: RateEstimate, tau: f64, criterion: &str) -> Certificate {
    let rate = est.extrapolated;
    let k = est.shell_min.len();
    let floor = tau * 1e-2;
    let (verdict, witnesses) = if rate >= tau {
        (Verdict::CertifiedNumerically, Vec::new())
    } else if k >= REFUTE_SHELLS && est.shell_min[k - REFUTE_SHELLS..].iter().all(|m| *m <= floor) {
        let w = (k - REFUTE_SHELLS..k)
            .map(|j| Witness {
                shell: j,
                point: est.witnesses[j].clone(),
                ratio: est.shell_min[j],
            })
            .collect();
        (Verdict::RefutedWithWitness, w)
    } else {
        (Verdict::Inconclusive, Vec::new())
    };
    Certificate {
        property,
        verdict,
        modulus: reciprocal(rate),
        rate,
        criterion: criterion.into(),
        tau,
        evidence: Evidence::Sampled,
        witnesses,
        divergence_heuristic: est.divergent,
        estimate: Some(est),
        epigraph: None,
    }
}

/// Strong metric subregularity of `F` at `(x̄, ȳ)` from the sampled
/// displacement rate.
pub fn certify_sms(f: &dyn Multifunction, xbar: &[f64], ybar: &[f64], s: &SamplingSchedule, tau: f64) -> Result<Certificate> {
    let est = displacement_rate(f, xbar, ybar, s)?;
    Ok(verdict_from(Property::Sms, est, tau, "displacement-rate reciprocal"))
}

/// Like [`certify_sms`], but linear maps under `l2` norms get the exact
/// modulus `1/σ_min` with structural evidence.
pub fn certify_sms_best(f: &dyn Multifunction, xbar: &[f64], ybar: &[f64], s: &SamplingSchedule, tau: f64) -> Result<Certificate> {
    if let Some(l) = f.as_linear() {
        let a = alpha_linear(l);
        if a.evidence == Evidence::Structural && a.value > 0.0 {
            crate::rates::check_anchor(f, xbar, ybar)?;
            return Ok(Certificate {
                property: Property::Sms,
                verdict: if a.value >= tau {
                    Verdict::CertifiedNumerically
                } else {
                    Verdict::Inconclusive
                },
                modulus: reciprocal(a.value),
                rate: a.value,
                criterion: "injectivity constant of a linear map".into(),
                tau,
                evidence: Evidence::Structural,
                witnesses: Vec::new(),
                divergence_heuristic: false,
                estimate: None,
                epigraph: None,
            });
        }
    }
    certify_sms(f, xbar, ybar, s, tau)
}

/// Isolated calmness of `F⁻¹` at `(ȳ, x̄)`, which holds exactly when `F` is
/// strongly metrically subregular at `(x̄, ȳ)`, with equal moduli.
pub fn isolated_calmness_via_inverse(
    f: &dyn Multifunction,
    xbar: &[f64],
    ybar: &[f64],
    s: &SamplingSchedule,
    tau: f64,
) -> Result<Certificate> {
    let mut c = certify_sms(f, xbar, ybar, s, tau)?;
    c.property = Property::IsolatedCalmness;
    c.criterion = "inverse-map equivalence".into();
    Ok(c)
}

/// Local sharp minimality `φ(x) ≥ φ(x̄) + ζ‖x − x̄‖`, with `ζ` the sampled
/// descent rate, plus the companion certificate of the epigraphical mapping
/// `x ↦ [φ(x), ∞)` at `(x̄, φ(x̄))`.
pub fn sharp_min_check(phi: Mapping, xbar: &[f64], s: &SamplingSchedule, tau: f64) -> Result<Certificate> {
    let est = descent_rate(&*phi, xbar, s)?;
    let mut c = verdict_from(Property::SharpMinimum, est, tau, "steepest descent rate");
    let phibar = eval_single(&*phi, xbar)?;
    let epi = Epigraph::new(Arc::clone(&phi))?;
    c.epigraph = Some(Box::new(certify_sms(&epi, xbar, &phibar, s, tau)?));
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::mappings::{LinearOp, SetValuedMap, SingleMap};
    use crate::rates::oracle_rate_grid;

    fn f1() -> SetValuedMap {
        SetValuedMap::parse("piecewise(x1 == 0, interval(0, 0.5), interval(1, inf))").unwrap()
    }

    fn f2() -> SetValuedMap {
        SetValuedMap::parse("interval(x1, inf)").unwrap()
    }

    fn single(e: &str) -> SingleMap {
        SingleMap::parse(e).unwrap()
    }

    #[test]
    fn f1_is_certified_with_vanishing_modulus() {
        let s = SamplingSchedule::default();
        let c = certify_sms(&f1(), &[0.0], &[0.0], &s, 0.1).unwrap();
        assert_eq!(c.verdict, Verdict::CertifiedNumerically);
        assert!(c.modulus <= s.innermost_radius());
        assert!(c.divergence_heuristic);
    }

    #[test]
    fn f2_is_refuted_with_left_witnesses() {
        let s = SamplingSchedule::default();
        let f = f2();
        let c = certify_sms(&f, &[0.0], &[0.0], &s, 0.1).unwrap();
        assert_eq!(c.verdict, Verdict::RefutedWithWitness);
        assert_eq!(c.witnesses.len(), 3);
        for w in &c.witnesses {
            assert_eq!(w.point, vec![-s.radius(w.shell)]);
            let replay = f.dist_to_image(&[0.0], &w.point).unwrap() / w.point[0].abs();
            assert!(replay <= 0.1 * 1e-2);
        }
    }

    #[test]
    fn abs_matches_the_grid_oracle() {
        let f = single("abs(x1)");
        let c = certify_sms(&f, &[0.0], &[0.0], &SamplingSchedule::default(), 0.1).unwrap();
        let oracle = oracle_rate_grid(&f, &[0.0], &[0.0], 0.5, 2001).unwrap().extrapolated;
        assert!((c.modulus - 1.0 / oracle).abs() <= 0.02);
    }

    #[test]
    fn inverse_calmness_examples() {
        let s = SamplingSchedule::default();
        let c = isolated_calmness_via_inverse(&single("2*x1"), &[0.0], &[0.0], &s, DEFAULT_TAU).unwrap();
        assert_eq!(c.property, Property::IsolatedCalmness);
        assert!((c.modulus - 0.5).abs() <= 0.01);
        // the inverse y ↦ y/2 has calmness modulus 1/2 by direct ratio
        let inv = single("x1/2");
        let clm = crate::rates::calmness_modulus_sv(&inv, &[0.0], &s).unwrap().extrapolated;
        assert!((c.modulus - clm).abs() <= 0.01);
        let c = isolated_calmness_via_inverse(&f2(), &[0.0], &[0.0], &s, DEFAULT_TAU).unwrap();
        assert_eq!(c.verdict, Verdict::RefutedWithWitness);
        let c = isolated_calmness_via_inverse(&f1(), &[0.0], &[0.0], &s, DEFAULT_TAU).unwrap();
        assert_eq!(c.verdict, Verdict::CertifiedNumerically);
        assert!(c.modulus < 1e-12);
    }

    #[test]
    fn sharp_minimum_examples() {
        let s = SamplingSchedule::default();
        let c = sharp_min_check(Arc::new(single("abs(x1)")), &[0.0], &s, DEFAULT_TAU).unwrap();
        assert!(c.is_certified() && (c.rate - 1.0).abs() <= 0.02);
        assert!(c.epigraph.as_ref().unwrap().is_certified());
        let c = sharp_min_check(Arc::new(single("x1^2")), &[0.0], &s, DEFAULT_TAU).unwrap();
        assert_ne!(c.verdict, Verdict::CertifiedNumerically);
        let c = sharp_min_check(Arc::new(single("abs(x1) - 0.5*x1")), &[0.0], &s, DEFAULT_TAU).unwrap();
        assert!(c.is_certified() && (c.rate - 0.5).abs() <= 0.01);
    }

    #[test]
    fn structural_linear_certificates() {
        let l = LinearOp::new(Matrix::diag(&[2.0, 3.0]));
        let c = certify_sms_best(&l, &[0.0, 0.0], &[0.0, 0.0], &SamplingSchedule::default(), DEFAULT_TAU).unwrap();
        assert_eq!(c.evidence, Evidence::Structural);
        assert!((c.modulus - 0.5).abs() < 1e-12);
        let z = LinearOp::new(Matrix::zeros(2, 2));
        let c = certify_sms_best(&z, &[0.0, 0.0], &[0.0, 0.0], &SamplingSchedule::default(), DEFAULT_TAU).unwrap();
        assert_eq!(c.verdict, Verdict::RefutedWithWitness);
    }

    #[test]
    fn certificate_json_round_trip() {
        let c = certify_sms(&f1(), &[0.0], &[0.0], &SamplingSchedule { points: 16, ..Default::default() }, 0.1).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.contains("\"verdict\":\"certified-numerically\""));
        assert_eq!(serde_json::from_str::<Certificate>(&s).unwrap(), c);
    }

    #[test]
    fn reciprocity_and_equivalence_on_the_catalog() {
        let s = SamplingSchedule::default();
        let cases: Vec<(Box<dyn Multifunction>, Vec<f64>)> = vec![
            (Box::new(single("abs(x1)")), vec![0.0]),
            (Box::new(single("3*x1")), vec![0.0]),
            (Box::new(single("[2*x1, 3*x2]")), vec![0.0, 0.0]),
            (Box::new(f1()), vec![0.0]),
            (Box::new(f2()), vec![0.0]),
        ];
        for (f, x) in cases {
            let y = vec![0.0; f.dim_out()];
            let a = certify_sms(&*f, &x, &y, &s, DEFAULT_TAU).unwrap();
            let b = isolated_calmness_via_inverse(&*f, &x, &y, &s, DEFAULT_TAU).unwrap();
            assert_eq!((a.verdict, a.modulus.to_bits()), (b.verdict, b.modulus.to_bits()));
            if a.modulus.is_finite() && a.modulus > 0.0 && a.rate.is_finite() && a.rate > 0.0 {
                let p = a.modulus * a.rate;
                assert!((0.999..=1.001).contains(&p));
            }
        }
    }
}

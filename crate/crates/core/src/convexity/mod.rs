//! Convex scalarization: exact subdifferentials of max-affine functions,
//! their inradius at the origin, sharp minimality, `intrad` and the
//! scalarization criteria for vector mappings.
//!
//! For a convex `φ`, the steepest descent rate at `x̄` equals the largest
//! `ρ` with `ρ·B* ⊆ ∂φ(x̄)`, so sharp minimality reduces to geometry of a
//! polytope.

mod polytope;

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::{BoundReport, Builder, Theorem};
use crate::error::{Error, Result};
use crate::evidence::Evidence;
use crate::ext;
use crate::linalg::{parse_numbers, symmetric_eigenvalues, Matrix};
use crate::mappings::{eval_single, DomainBox, FnMap, Mapping, Multifunction};
use crate::moduli::{certify_sms, reciprocal, verdict_from, Certificate, Property, Verdict, Witness, REFUTE_SHELLS};
use crate::rates::{descent_rate, RateEstimate, SamplingSchedule};
use crate::rng;
use crate::spaces::{unit_sphere_samples, Norm, SetDescriptor};

pub use polytope::{FacetForm, Polytope};

/// Pieces within this of the maximum count as active.
pub const ACTIVE_TOL: f64 = 1e-9;

/// `φ(x) = maxᵢ (⟨aᵢ, x⟩ + bᵢ) + ½ xᵀQx` with `Q` symmetric positive
/// semidefinite.
#[derive(Debug, Clone)]
pub struct MaxAffineFn {
    pub pieces: Vec<(Vec<f64>, f64)>,
    pub q: Option<Matrix>,
    norm_in: Norm,
    norm_out: Norm,
}

impl MaxAffineFn {
    pub fn new(pieces: Vec<(Vec<f64>, f64)>, q: Option<Matrix>) -> Result<Self> {
        let n = match pieces.first() {
            Some((a, _)) if !a.is_empty() => a.len(),
            _ => return Err(Error::invalid("a max-affine function needs at least one piece")),
        };
        if let Some((a, _)) = pieces.iter().find(|(a, _)| a.len() != n) {
            return Err(Error::dim("max-affine piece", n, a.len()));
        }
        if pieces.iter().any(|(a, b)| !b.is_finite() || a.iter().any(|v| !v.is_finite())) {
            return Err(Error::invalid("max-affine coefficients must be finite"));
        }
        if let Some(q) = &q {
            if q.rows != n || q.cols != n {
                return Err(Error::dim("quadratic term", n, q.rows));
            }
            let asym = (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .any(|(i, j)| (q.data[i * n + j] - q.data[j * n + i]).abs() > 1e-12);
            if asym {
                return Err(Error::invalid("quadratic term must be symmetric"));
            }
            if symmetric_eigenvalues(q).iter().any(|l| *l < -1e-10) {
                return Err(Error::invalid("quadratic term must be positive semidefinite"));
            }
        }
        Ok(MaxAffineFn {
            pieces,
            q,
            norm_in: Norm::l2(),
            norm_out: Norm::l2(),
        })
    }

    /// Parses `"(a11,a12,b1);(a21,a22,b2);..."`: each group lists the slope
    /// followed by the offset.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pieces = Vec::new();
        for group in text.split(';').map(str::trim).filter(|g| !g.is_empty()) {
            let inner = group
                .strip_prefix('(')
                .and_then(|g| g.strip_suffix(')'))
                .ok_or_else(|| Error::invalid(format!("piece `{group}` must be parenthesised")))?;
            let mut v = parse_numbers(inner)?;
            if v.len() < 2 {
                return Err(Error::invalid(format!("piece `{group}` needs a slope and an offset")));
            }
            let b = v.pop().expect("at least two numbers");
            pieces.push((v, b));
        }
        MaxAffineFn::new(pieces, None)
    }

    pub fn with_quadratic(self, q: Matrix) -> Result<Self> {
        let norm_in = self.norm_in.clone();
        Ok(MaxAffineFn::new(self.pieces, Some(q))?.with_norm(norm_in))
    }

    pub fn with_norm(mut self, norm_in: Norm) -> Self {
        self.norm_in = norm_in;
        self
    }

    pub fn dim(&self) -> usize {
        self.pieces[0].0.len()
    }

    fn affine(&self, x: &[f64]) -> Vec<f64> {
        self.pieces
            .iter()
            .map(|(a, b)| a.iter().zip(x).map(|(u, v)| u * v).sum::<f64>() + b)
            .collect()
    }

    fn quad_grad(&self, x: &[f64]) -> Vec<f64> {
        match &self.q {
            Some(q) => q.apply(x),
            None => vec![0.0; x.len()],
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::dim("point", self.dim(), x.len()));
        }
        let m = self.affine(x).into_iter().fold(f64::NEG_INFINITY, f64::max);
        let quad = 0.5 * self.quad_grad(x).iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        Ok(m + quad)
    }

    /// Indices of the pieces within [`ACTIVE_TOL`] of the maximum.
    pub fn active(&self, x: &[f64]) -> Vec<usize> {
        let vals = self.affine(x);
        let m = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tol = ACTIVE_TOL * m.abs().max(1.0);
        (0..vals.len()).filter(|&i| vals[i] >= m - tol).collect()
    }
}

impl Multifunction for MaxAffineFn {
    fn kind(&self) -> &'static str {
        "max-affine"
    }
    fn describe(&self) -> String {
        let p: Vec<String> = self.pieces.iter().map(|(a, b)| format!("{a:?}·x + {b}")).collect();
        let q = if self.q.is_some() { " + ½xᵀQx" } else { "" };
        format!("max({}){q}", p.join(", "))
    }
    fn dim_in(&self) -> usize {
        self.dim()
    }
    fn dim_out(&self) -> usize {
        1
    }
    fn norm_in(&self) -> &Norm {
        &self.norm_in
    }
    fn norm_out(&self) -> &Norm {
        &self.norm_out
    }
    fn domain(&self) -> DomainBox {
        DomainBox::unbounded(self.dim())
    }
    fn image(&self, x: &[f64]) -> Result<SetDescriptor> {
        Ok(SetDescriptor::point(vec![self.eval(x)?]))
    }
    fn value(&self, x: &[f64]) -> Option<Result<Vec<f64>>> {
        Some(self.eval(x).map(|v| vec![v]))
    }
    fn is_single_valued(&self) -> bool {
        true
    }
}

/// A vector mapping with max-affine components on a common source space.
#[derive(Debug, Clone)]
pub struct MaxAffineMap {
    pub components: Vec<MaxAffineFn>,
    norm_in: Norm,
    norm_out: Norm,
}

impl MaxAffineMap {
    pub fn new(components: Vec<MaxAffineFn>) -> Result<Self> {
        let n = components.first().ok_or_else(|| Error::invalid("no components"))?.dim();
        if let Some(c) = components.iter().find(|c| c.dim() != n) {
            return Err(Error::dim("max-affine component", n, c.dim()));
        }
        Ok(MaxAffineMap {
            components,
            norm_in: Norm::l2(),
            norm_out: Norm::l2(),
        })
    }

    pub fn with_norms(mut self, norm_in: Norm, norm_out: Norm) -> Self {
        self.components = self.components.into_iter().map(|c| c.with_norm(norm_in.clone())).collect();
        self.norm_in = norm_in;
        self.norm_out = norm_out;
        self
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.components.iter().map(|c| c.eval(x)).collect()
    }
}

impl Multifunction for MaxAffineMap {
    fn kind(&self) -> &'static str {
        "max-affine-vector"
    }
    fn describe(&self) -> String {
        let c: Vec<String> = self.components.iter().map(|c| c.describe()).collect();
        format!("({})", c.join(", "))
    }
    fn dim_in(&self) -> usize {
        self.components[0].dim()
    }
    fn dim_out(&self) -> usize {
        self.components.len()
    }
    fn norm_in(&self) -> &Norm {
        &self.norm_in
    }
    fn norm_out(&self) -> &Norm {
        &self.norm_out
    }
    fn domain(&self) -> DomainBox {
        DomainBox::unbounded(self.dim_in())
    }
    fn image(&self, x: &[f64]) -> Result<SetDescriptor> {
        Ok(SetDescriptor::point(self.eval(x)?))
    }
    fn value(&self, x: &[f64]) -> Option<Result<Vec<f64>>> {
        Some(self.eval(x))
    }
    fn is_single_valued(&self) -> bool {
        true
    }
}

/// `∂φ(x̄) = conv{aᵢ : i active at x̄} + Qx̄`, exact for this class.
pub fn subdifferential_at(phi: &MaxAffineFn, xbar: &[f64]) -> Result<Polytope> {
    if xbar.len() != phi.dim() {
        return Err(Error::dim("anchor", phi.dim(), xbar.len()));
    }
    let shift = phi.quad_grad(xbar);
    let verts = phi
        .active(xbar)
        .into_iter()
        .map(|i| phi.pieces[i].0.iter().zip(&shift).map(|(a, s)| a + s).collect())
        .collect();
    Polytope::new(verts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InradiusMode {
    /// Facet distances, dimension at most 3.
    Exact,
    /// Minimum of the support function over sampled directions; never below
    /// the true inradius.
    SampledUpperEstimate,
}

/// Largest `ρ ≥ 0` with `ρ·B* ⊆ P`, `B*` the dual unit ball of the source
/// norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inradius {
    #[serde(with = "ext::scalar")]
    pub value: f64,
    pub mode: InradiusMode,
    pub full_dimensional: bool,
    pub evidence: Evidence,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

/// Directions used by the sampled inradius in dimension above 3.
pub const INRADIUS_SAMPLES: usize = 4096;

/// Inradius of `P` around the origin against the dual ball of `primal`.
///
/// Exact in dimension at most 3: `min_f c_f / ‖n_f‖` over facets
/// `⟨n_f, y⟩ ≤ c_f`, clamped at 0. Above that, the minimum over sampled
/// unit directions `u` of the support function `σ_P(u)`.
pub fn inradius_origin(p: &Polytope, primal: &Norm) -> Inradius {
    match p.facets() {
        Some(ff) if !ff.full_dimensional => Inradius {
            value: 0.0,
            mode: InradiusMode::Exact,
            full_dimensional: false,
            evidence: Evidence::Structural,
            note: Some("not full-dimensional".into()),
        },
        Some(ff) => {
            let v = ff
                .normals
                .iter()
                .zip(&ff.offsets)
                .map(|(n, c)| c / primal.eval(n))
                .fold(f64::INFINITY, f64::min)
                .max(0.0);
            Inradius {
                value: v,
                mode: InradiusMode::Exact,
                full_dimensional: true,
                evidence: Evidence::Structural,
                note: None,
            }
        }
        None => inradius_sampled(p, primal, INRADIUS_SAMPLES, 0x1AD1_05),
    }
}

/// Sampled upper estimate of the inradius in any dimension.
pub fn inradius_sampled(p: &Polytope, primal: &Norm, count: usize, seed: u64) -> Inradius {
    let dirs = unit_sphere_samples(p.dim(), primal, count, seed).expect("dimension and count are positive");
    let v = dirs.iter().map(|u| p.support(u)).fold(f64::INFINITY, f64::min).max(0.0);
    Inradius {
        value: v,
        mode: InradiusMode::SampledUpperEstimate,
        full_dimensional: v > 0.0,
        evidence: Evidence::Sampled,
        note: Some("upper estimate".into()),
    }
}

/// Structural sharp-minimum test with its sampled cross-check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharpMinConvex {
    pub certificate: Certificate,
    pub inradius: Inradius,
    #[serde(with = "ext::scalar")]
    pub descent_rate: f64,
    /// Sampled descent rate within 5% of a positive inradius, or at most
    /// 0.05 when the inradius vanishes.
    pub agrees: bool,
}

/// Sharp minimality of `φ` at `x̄`, decided by the inradius of `∂φ(x̄)`
/// with `ζ` equal to the inradius.
pub fn sharp_min_convex(phi: &MaxAffineFn, xbar: &[f64], s: &SamplingSchedule, tau: f64) -> Result<SharpMinConvex> {
    let sub = subdifferential_at(phi, xbar)?;
    let ir = inradius_origin(&sub, phi.norm_in());
    let est = descent_rate(phi, xbar, s)?;
    let rate = est.extrapolated;
    let agrees = if ir.value > 0.0 {
        (rate - ir.value).abs() <= 0.05 * ir.value
    } else {
        rate <= 0.05
    };
    let certificate = if ir.value > 0.0 {
        Certificate {
            property: Property::SharpMinimum,
            verdict: Verdict::CertifiedNumerically,
            modulus: reciprocal(ir.value),
            rate: ir.value,
            criterion: "subdifferential inradius".into(),
            tau,
            evidence: ir.evidence,
            witnesses: Vec::new(),
            divergence_heuristic: false,
            estimate: Some(est),
            epigraph: None,
        }
    } else {
        not_sharp(est, tau, ir.mode == InradiusMode::Exact)
    };
    Ok(SharpMinConvex {
        certificate,
        inradius: ir,
        descent_rate: rate,
        agrees,
    })
}

/// A vanishing exact inradius refutes sharpness; the innermost shell minima
/// serve as replayable witnesses.
fn not_sharp(est: RateEstimate, tau: f64, exact: bool) -> Certificate {
    let k = est.shell_min.len();
    let witnesses: Vec<Witness> = (k.saturating_sub(REFUTE_SHELLS)..k)
        .map(|j| Witness {
            shell: j,
            point: est.witnesses[j].clone(),
            ratio: est.shell_min[j],
        })
        .collect();
    let mut c = verdict_from(Property::SharpMinimum, est, tau, "subdifferential inradius");
    if exact {
        c.verdict = Verdict::RefutedWithWitness;
        c.witnesses = witnesses;
        c.evidence = Evidence::Structural;
    } else if c.verdict == Verdict::CertifiedNumerically {
        c.verdict = Verdict::Inconclusive;
    }
    c.rate = 0.0;
    c.modulus = f64::INFINITY;
    c
}

/// A finitely generated order cone `Y₊ ⊆ ℝᵐ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderCone {
    pub dim: usize,
    /// `None` for the nonnegative orthant.
    pub generators: Option<Vec<Vec<f64>>>,
}

impl OrderCone {
    pub fn nonneg(m: usize) -> Self {
        OrderCone { dim: m, generators: None }
    }

    pub fn generated(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.first().map(Vec::len).ok_or_else(|| Error::invalid("a cone needs generators"))?;
        if let Some(r) = rows.iter().find(|r| r.len() != m) {
            return Err(Error::dim("cone generator", m, r.len()));
        }
        Ok(OrderCone {
            dim: m,
            generators: Some(rows),
        })
    }

    /// `"Rm+"` or `;`-separated generator rows.
    pub fn parse(text: &str, m: usize) -> Result<Self> {
        let t = text.trim();
        if t.eq_ignore_ascii_case("rm+") {
            return Ok(OrderCone::nonneg(m));
        }
        let rows = t
            .split(';')
            .map(str::trim)
            .filter(|r| !r.is_empty())
            .map(parse_numbers)
            .collect::<Result<Vec<_>>>()?;
        let c = OrderCone::generated(rows)?;
        if c.dim != m {
            return Err(Error::dim("cone", m, c.dim));
        }
        Ok(c)
    }

    /// `y ∈ Y₊*`, i.e. `⟨y, g⟩ ≥ 0` for every generator.
    pub fn dual_contains(&self, y: &[f64]) -> bool {
        match &self.generators {
            None => y.iter().all(|v| *v >= 0.0),
            Some(g) => g.iter().all(|r| r.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() >= -1e-12),
        }
    }

    /// Deterministic points of `Y₊* ∩ {‖y‖_* = 1}`. For the orthant in ℝ²
    /// these are equally spaced angles in `[0, π/2]` including both axes.
    pub fn dual_sphere_samples(&self, dual: &Norm, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let m = self.dim;
        let norm = |v: &[f64]| dual.normalize(v);
        match (&self.generators, m) {
            (None, 1) => vec![vec![1.0 / dual.weight(0)]],
            (None, 2) => {
                let n = count.max(2);
                (0..n)
                    .map(|j| {
                        let (s, c) = if j == 0 {
                            (0.0, 1.0)
                        } else if j == n - 1 {
                            (1.0, 0.0)
                        } else {
                            (std::f64::consts::FRAC_PI_2 * j as f64 / (n - 1) as f64).sin_cos()
                        };
                        norm(&[c, s]).expect("nonzero")
                    })
                    .collect()
            }
            (None, _) => {
                let mut out: Vec<Vec<f64>> = (0..m.min(count))
                    .map(|i| {
                        let mut e = vec![0.0; m];
                        e[i] = 1.0;
                        norm(&e).expect("nonzero")
                    })
                    .collect();
                let mut r = rng::stream(seed, 0xC0FE);
                while out.len() < count {
                    let v: Vec<f64> = (0..m).map(|_| r.sample::<f64, _>(StandardNormal).abs()).collect();
                    if let Some(u) = norm(&v) {
                        out.push(u);
                    }
                }
                out
            }
            (Some(_), _) => unit_sphere_samples(m, dual, count * 8, seed)
                .expect("dimension and count are positive")
                .into_iter()
                .filter(|y| self.dual_contains(y))
                .take(count)
                .collect(),
        }
    }
}

/// Default number of dual directions for `intrad`: 256 in ℝ², 1024 above.
pub fn default_directions(m: usize) -> usize {
    match m {
        0 | 1 => 1,
        2 => 256,
        _ => 1024,
    }
}

/// `intrad` at `x̄`: the largest per-functional inradius over sampled
/// `y* ∈ Y₊* ∩ S*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Intrad {
    #[serde(with = "ext::scalar")]
    pub value: f64,
    pub y_star: Option<Vec<f64>>,
    pub samples: usize,
    /// Every sampled `y*` had nonnegative coordinates, so `y*∘f` is convex
    /// and its subdifferential is the exact Minkowski sum.
    pub exact_subdifferentials: bool,
    pub evidence: Evidence,
}

/// `∂(y*∘f)(x̄) = Σᵢ yᵢ ∂fᵢ(x̄)`, exact when every `yᵢ ≥ 0`; otherwise the
/// same Minkowski combination is reported as an approximation.
pub fn scalarized_subdifferential(f: &MaxAffineMap, y: &[f64], xbar: &[f64]) -> Result<(Polytope, bool)> {
    if y.len() != f.components.len() {
        return Err(Error::dim("functional", f.components.len(), y.len()));
    }
    let parts = f
        .components
        .iter()
        .map(|c| subdifferential_at(c, xbar))
        .collect::<Result<Vec<_>>>()?;
    let weighted: Vec<(f64, &Polytope)> = y.iter().copied().zip(parts.iter()).collect();
    Ok((Polytope::minkowski(&weighted)?, y.iter().all(|v| *v >= 0.0)))
}

pub fn intrad(f: &MaxAffineMap, xbar: &[f64], cone: &OrderCone, directions: usize, seed: u64) -> Result<Intrad> {
    if cone.dim != f.dim_out() {
        return Err(Error::dim("order cone", f.dim_out(), cone.dim));
    }
    let dual = f.norm_out().dual();
    let ys = cone.dual_sphere_samples(&dual, directions, seed);
    let vals = ys
        .par_iter()
        .map(|y| {
            let (p, exact) = scalarized_subdifferential(f, y, xbar)?;
            Ok((inradius_origin(&p, f.norm_in()).value, exact))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best: Option<(f64, usize)> = None;
    for (i, (v, _)) in vals.iter().enumerate() {
        if best.is_none_or(|(b, _)| *v > b) {
            best = Some((*v, i));
        }
    }
    let (value, y_star) = match best {
        Some((v, i)) if v > 0.0 => (v, Some(ys[i].clone())),
        _ => (0.0, None),
    };
    Ok(Intrad {
        value,
        y_star,
        samples: ys.len(),
        exact_subdifferentials: vals.iter().all(|(_, e)| *e),
        evidence: Evidence::Sampled,
    })
}

/// `subreg(f)(x̄) ≤ 1/intrad(f)(x̄)` when some `0* ∈ int ∂(y*∘f)(x̄)`.
pub fn sms_convex_scalarization(
    f: &MaxAffineMap,
    xbar: &[f64],
    cone: &OrderCone,
    s: &SamplingSchedule,
    tau: f64,
) -> Result<BoundReport> {
    let mut b = Builder::new(Theorem::ConvexScalarization, format!("f = {}", f.describe()));
    let ir = intrad(f, xbar, cone, default_directions(f.dim_out()), s.seed)?;
    b.q("intrad", ir.value, ir.evidence);
    b.info("subdifferentials exact", ir.exact_subdifferentials, format!("{} functionals sampled", ir.samples));
    b.hyp(
        "0* interior to some ∂(y*∘f)(x̄)",
        ir.value > 0.0,
        match &ir.y_star {
            Some(y) => format!("attained at y* = {y:?}"),
            None => "no sampled functional has an interior subdifferential".into(),
        },
    );
    let fbar = f.eval(xbar)?;
    let measured = certify_sms(f, xbar, &fbar, s, tau)?;
    Ok(b.finish(Some(reciprocal(ir.value)), &measured))
}

/// Outcome of the Fréchet scalarization search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrechetScalarization {
    pub certificate: Certificate,
    pub y_star: Option<Vec<f64>>,
    pub directions: usize,
}

/// Default dual directions for the Fréchet search.
pub const FRECHET_DIRECTIONS: usize = 64;

/// Searches the dual unit sphere for `y*` whose scalarization `y*∘f` has a
/// positive steepest descent rate at `x̄`; such a `y*` makes `f` strongly
/// metrically subregular with modulus at most `1/rate`. The criterion is
/// sufficient only, so failure is inconclusive rather than a refutation.
pub fn sms_frechet_scalarization(
    f: Mapping,
    xbar: &[f64],
    directions: usize,
    s: &SamplingSchedule,
    tau: f64,
) -> Result<FrechetScalarization> {
    let m = f.dim_out();
    let dual = f.norm_out().dual();
    let ys = unit_sphere_samples(m, &dual, if m == 1 { 2 } else { directions }, s.seed)?;
    let rates = ys
        .par_iter()
        .map(|y| {
            let ff = Arc::clone(&f);
            let yy = y.clone();
            let phi = FnMap::new("scalarization", f.dim_in(), 1, move |x| {
                let v = eval_single(&*ff, x)?;
                Ok(vec![v.iter().zip(&yy).map(|(a, b)| a * b).sum()])
            })
            .with_norms(f.norm_in().clone(), Norm::l2())
            .with_domain(f.domain());
            descent_rate(&phi, xbar, s)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, r) in rates.iter().enumerate() {
        if r.extrapolated > rates[best].extrapolated {
            best = i;
        }
    }
    let est = rates[best].clone();
    let rate = est.extrapolated;
    let certified = rate >= tau;
    Ok(FrechetScalarization {
        certificate: Certificate {
            property: Property::Sms,
            verdict: if certified {
                Verdict::CertifiedNumerically
            } else {
                Verdict::Inconclusive
            },
            modulus: if certified { reciprocal(rate) } else { f64::INFINITY },
            rate,
            criterion: "scalarized descent rate".into(),
            tau,
            evidence: Evidence::Sampled,
            witnesses: Vec::new(),
            divergence_heuristic: est.divergent,
            estimate: Some(est),
            epigraph: None,
        },
        y_star: certified.then(|| ys[best].clone()),
        directions: ys.len(),
    })
}

/// One random instance of the inradius / descent-rate comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharpnessCase {
    pub pieces: Vec<(Vec<f64>, f64)>,
    #[serde(with = "ext::scalar")]
    pub inradius: f64,
    #[serde(with = "ext::scalar")]
    pub descent_rate: f64,
    pub agrees: bool,
}

/// Points per shell for the sharpness comparison. The support function has
/// a kink at each facet normal, so the angular grid must be fine for the
/// sampled minimum to sit within a few percent of the inradius.
pub const SHARPNESS_POINTS: usize = 16_384;

/// `n` random max-affine functions on ℝ² with 3 to 6 pieces, each compared
/// at the origin: inradius of the subdifferential against the sampled
/// steepest descent rate.
pub fn sharpness_suite(n: usize, seed: u64, s: &SamplingSchedule) -> Result<Vec<SharpnessCase>> {
    let sched = SamplingSchedule {
        points: s.points.max(SHARPNESS_POINTS),
        ..s.clone()
    };
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, i as u64);
            let k = r.random_range(3..=6);
            let mut pieces: Vec<(Vec<f64>, f64)> = (0..k)
                .map(|_| {
                    let a = vec![r.random_range(-2.0..2.0), r.random_range(-2.0..2.0)];
                    let b = if r.random_bool(0.75) { 0.0 } else { -r.random_range(0.5..1.5) };
                    (a, b)
                })
                .collect();
            if pieces.iter().all(|(_, b)| *b != 0.0) {
                pieces[0].1 = 0.0;
            }
            let phi = MaxAffineFn::new(pieces.clone(), None)?;
            let res = sharp_min_convex(&phi, &[0.0, 0.0], &sched, crate::moduli::DEFAULT_TAU)?;
            Ok(SharpnessCase {
                pieces,
                inradius: res.inradius.value,
                descent_rate: res.descent_rate,
                agrees: res.agrees || (res.inradius.value > 0.0 && res.inradius.value <= 0.05),
            })
        })
        .collect()
}

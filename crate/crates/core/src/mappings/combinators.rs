use std::fmt;
use std::sync::Arc;

use super::{eval_single, DomainBox, Mapping, Multifunction};
use crate::error::{Error, Result};
use crate::spaces::{Norm, SetDescriptor};

type Kernel = dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync;

/// A single-valued mapping backed by a closure, used for derived maps such
/// as remainders and scalarizations.
#[derive(Clone)]
pub struct FnMap {
    name: &'static str,
    dim_in: usize,
    dim_out: usize,
    norm_in: Norm,
    norm_out: Norm,
    domain: DomainBox,
    f: Arc<Kernel>,
}

impl FnMap {
    pub fn new(
        name: &'static str,
        dim_in: usize,
        dim_out: usize,
        f: impl Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        FnMap {
            name,
            dim_in,
            dim_out,
            norm_in: Norm::l2(),
            norm_out: Norm::l2(),
            domain: DomainBox::unbounded(dim_in),
            f: Arc::new(f),
        }
    }

    pub fn with_norms(mut self, norm_in: Norm, norm_out: Norm) -> Self {
        self.norm_in = norm_in;
        self.norm_out = norm_out;
        self
    }

    pub fn with_domain(mut self, domain: DomainBox) -> Self {
        self.domain = domain;
        self
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim_in {
            return Err(Error::dim("point", self.dim_in, x.len()));
        }
        self.domain.check(x)?;
        let v = (self.f)(x)?;
        if v.len() != self.dim_out {
            return Err(Error::dim(format!("value of `{}`", self.name), self.dim_out, v.len()));
        }
        Ok(v)
    }
}

impl fmt::Debug for FnMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FnMap({}: ℝ^{} → ℝ^{})", self.name, self.dim_in, self.dim_out)
    }
}

impl Multifunction for FnMap {
    fn kind(&self) -> &'static str {
        self.name
    }
    fn dim_in(&self) -> usize {
        self.dim_in
    }
    fn dim_out(&self) -> usize {
        self.dim_out
    }
    fn norm_in(&self) -> &Norm {
        &self.norm_in
    }
    fn norm_out(&self) -> &Norm {
        &self.norm_out
    }
    fn domain(&self) -> DomainBox {
        self.domain.clone()
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

/// `(F∘G)(x) = ⋃_{z ∈ G(x)} F(z)`.
#[derive(Debug, Clone)]
pub struct Compose {
    pub outer: Mapping,
    pub inner: Mapping,
}

/// Grid size used when the inner image is a continuum.
const CONTINUUM_GRID: usize = 2001;
/// A sampled distance counts as attained below this value.
const ATTAINED: f64 = 1e-9;

impl Compose {
    pub fn new(outer: Mapping, inner: Mapping) -> Result<Self> {
        if outer.dim_in() != inner.dim_out() {
            return Err(Error::dim("composition", outer.dim_in(), inner.dim_out()));
        }
        Ok(Compose { outer, inner })
    }

    /// Candidate points of a one-dimensional inner image clipped to the
    /// outer domain.
    fn continuum_points(&self, s: &SetDescriptor) -> Option<Vec<f64>> {
        let SetDescriptor::Intervals(iv) = s else {
            return None;
        };
        let dom = self.outer.domain();
        let mut pts = Vec::new();
        for &(lo, hi) in iv {
            let a = lo.max(dom.lo[0]);
            let b = hi.min(dom.hi[0]);
            if a > b {
                continue;
            }
            pts.push(a);
            pts.push(b);
            if a < 0.0 && 0.0 < b {
                pts.push(0.0);
            }
            for j in 1..CONTINUUM_GRID - 1 {
                pts.push(a + (b - a) * j as f64 / (CONTINUUM_GRID - 1) as f64);
            }
        }
        Some(pts)
    }
}

impl Multifunction for Compose {
    fn describe(&self) -> String {
        format!("({}) ∘ ({})", self.outer.describe(), self.inner.describe())
    }
    fn kind(&self) -> &'static str {
        "compose"
    }
    fn dim_in(&self) -> usize {
        self.inner.dim_in()
    }
    fn dim_out(&self) -> usize {
        self.outer.dim_out()
    }
    fn norm_in(&self) -> &Norm {
        self.inner.norm_in()
    }
    fn norm_out(&self) -> &Norm {
        self.outer.norm_out()
    }
    fn domain(&self) -> DomainBox {
        self.inner.domain()
    }
    fn image(&self, x: &[f64]) -> Result<SetDescriptor> {
        if self.inner.is_single_valued() {
            return self.outer.image(&eval_single(&*self.inner, x)?);
        }
        match self.inner.image(x)? {
            SetDescriptor::Empty => Ok(SetDescriptor::Empty),
            SetDescriptor::Points(zs) => {
                SetDescriptor::union(zs.iter().map(|z| self.outer.image(z)).collect::<Result<Vec<_>>>()?)
            }
            other => Err(Error::NoExactOracle(format!("image of a composition over the continuum {other}"))),
        }
    }
    fn value(&self, x: &[f64]) -> Option<Result<Vec<f64>>> {
        if !(self.inner.is_single_valued() && self.outer.is_single_valued()) {
            return None;
        }
        Some(eval_single(&*self.inner, x).and_then(|z| eval_single(&*self.outer, &z)))
    }
    fn is_single_valued(&self) -> bool {
        self.inner.is_single_valued() && self.outer.is_single_valued()
    }

    /// Exact for single-valued or finite inner images. Over a continuum the
    /// infimum is sampled, which only overestimates; the result is accepted
    /// only when it certifies attainment.
    fn dist_to_image(&self, y: &[f64], x: &[f64]) -> Result<f64> {
        if self.inner.is_single_valued() {
            return self.outer.dist_to_image(y, &eval_single(&*self.inner, x)?);
        }
        let s = self.inner.image(x)?;
        match &s {
            SetDescriptor::Empty => Ok(f64::INFINITY),
            SetDescriptor::Points(zs) => {
                let mut best = f64::INFINITY;
                for z in zs {
                    best = best.min(self.outer.dist_to_image(y, z)?);
                }
                Ok(best)
            }
            _ => {
                let Some(pts) = self.continuum_points(&s) else {
                    return Err(Error::NoExactOracle(format!("distance to a composition over {s}")));
                };
                let mut best = f64::INFINITY;
                for z in pts {
                    best = best.min(self.outer.dist_to_image(y, &[z])?);
                    if best <= ATTAINED {
                        return Ok(best);
                    }
                }
                Err(Error::NoExactOracle(format!(
                    "distance to a composition over {s} (sampled value {best:e} is not attained)"
                )))
            }
        }
    }
}

/// `(F + g)(x) = F(x) + g(x)` with `g` single-valued.
#[derive(Debug, Clone)]
pub struct Sum {
    pub base: Mapping,
    pub add: Mapping,
}

impl Sum {
    pub fn new(base: Mapping, add: Mapping) -> Result<Self> {
        if !add.is_single_valued() {
            return Err(Error::invalid("the perturbation of a sum must be single-valued"));
        }
        if base.dim_in() != add.dim_in() || base.dim_out() != add.dim_out() {
            return Err(Error::dim("sum", base.dim_out(), add.dim_out()));
        }
        Ok(Sum { base, add })
    }
}

impl Multifunction for Sum {
    fn describe(&self) -> String {
        format!("({}) + ({})", self.base.describe(), self.add.describe())
    }
    fn kind(&self) -> &'static str {
        "sum"
    }
    fn dim_in(&self) -> usize {
        self.base.dim_in()
    }
    fn dim_out(&self) -> usize {
        self.base.dim_out()
    }
    fn norm_in(&self) -> &Norm {
        self.base.norm_in()
    }
    fn norm_out(&self) -> &Norm {
        self.base.norm_out()
    }
    fn domain(&self) -> DomainBox {
        self.base.domain()
    }
    fn image(&self, x: &[f64]) -> Result<SetDescriptor> {
        let g = eval_single(&*self.add, x)?;
        Ok(self.base.image(x)?.translate(g))
    }
    fn value(&self, x: &[f64]) -> Option<Result<Vec<f64>>> {
        if !self.base.is_single_valued() {
            return None;
        }
        Some(eval_single(&*self.base, x).and_then(|a| {
            let g = eval_single(&*self.add, x)?;
            Ok(a.iter().zip(&g).map(|(u, v)| u + v).collect())
        }))
    }
    fn is_single_valued(&self) -> bool {
        self.base.is_single_valued()
    }
    fn dist_to_image(&self, y: &[f64], x: &[f64]) -> Result<f64> {
        let g = eval_single(&*self.add, x)?;
        if g.len() != y.len() {
            return Err(Error::dim("target point", g.len(), y.len()));
        }
        let shifted: Vec<f64> = y.iter().zip(&g).map(|(a, b)| a - b).collect();
        self.base.dist_to_image(&shifted, x)
    }
}

/// The epigraphical mapping `x ↦ [φ(x), +∞)` of a scalar function.
#[derive(Debug, Clone)]
pub struct Epigraph {
    pub phi: Mapping,
}

impl Epigraph {
    pub fn new(phi: Mapping) -> Result<Self> {
        if !phi.is_single_valued() || phi.dim_out() != 1 {
            return Err(Error::invalid("the epigraphical mapping needs a scalar single-valued function"));
        }
        Ok(Epigraph { phi })
    }
}

impl Multifunction for Epigraph {
    fn describe(&self) -> String {
        format!("epigraph of {}", self.phi.describe())
    }
    fn kind(&self) -> &'static str {
        "epigraph"
    }
    fn dim_in(&self) -> usize {
        self.phi.dim_in()
    }
    fn dim_out(&self) -> usize {
        1
    }
    fn norm_in(&self) -> &Norm {
        self.phi.norm_in()
    }
    fn norm_out(&self) -> &Norm {
        self.phi.norm_out()
    }
    fn domain(&self) -> DomainBox {
        self.phi.domain()
    }
    fn image(&self, x: &[f64]) -> Result<SetDescriptor> {
        SetDescriptor::interval(eval_single(&*self.phi, x)?[0], f64::INFINITY)
    }
    fn dist_to_image(&self, y: &[f64], x: &[f64]) -> Result<f64> {
        if y.len() != 1 {
            return Err(Error::dim("target point", 1, y.len()));
        }
        let v = eval_single(&*self.phi, x)?[0];
        Ok(self.phi.norm_out().weight(0) * (v - y[0]).max(0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mappings::{SetValuedMap, SingleMap};

    fn arc<M: Multifunction + 'static>(m: M) -> Mapping {
        Arc::new(m)
    }

    #[test]
    fn composition_through_a_continuum_attains_the_anchor() {
        let f = arc(SingleMap::parse("piecewise(abs(x1) <= 1, abs(x1), 2 - abs(x1))").unwrap());
        let g = arc(SetValuedMap::parse("piecewise(x1 == 0, interval(-inf, inf), point(2))").unwrap());
        let fg = Compose::new(f, g).unwrap();
        assert_eq!(fg.dist_to_image(&[0.0], &[0.0]).unwrap(), 0.0);
        assert_eq!(fg.dist_to_image(&[0.0], &[0.1]).unwrap(), 0.0);
        assert!(matches!(fg.dist_to_image(&[5.0], &[0.0]), Err(Error::NoExactOracle(_))));
    }

    #[test]
    fn single_valued_composition() {
        let f = arc(SingleMap::parse("3*x1").unwrap());
        let g = arc(SingleMap::parse("2*x1").unwrap());
        let fg = Compose::new(f, g).unwrap();
        assert_eq!(eval_single(&fg, &[0.5]).unwrap(), vec![3.0]);
    }

    #[test]
    fn sum_shifts_images() {
        let f1 = arc(SetValuedMap::parse("piecewise(x1 == 0, interval(0, 0.5), interval(1, inf))").unwrap());
        let g = arc(SingleMap::parse("0.01*x1").unwrap());
        let s = Sum::new(f1, g).unwrap();
        assert!((s.dist_to_image(&[0.0], &[2.0]).unwrap() - 1.02).abs() < 1e-12);
        assert_eq!(s.dist_to_image(&[0.0], &[0.0]).unwrap(), 0.0);
    }

    #[test]
    fn epigraph_distance() {
        let e = Epigraph::new(arc(SingleMap::parse("x1^2").unwrap())).unwrap();
        assert_eq!(e.dist_to_image(&[0.0], &[0.5]).unwrap(), 0.25);
        assert_eq!(e.dist_to_image(&[1.0], &[0.5]).unwrap(), 0.0);
    }
}

use super::{DomainBox, Multifunction};
use crate::error::{Error, Result};
use crate::expr::{Env, VarKind};
use crate::spaces::{parse_set_template, Norm, SetDescriptor, SetTemplate};

/// A set-valued mapping given by a rule producing a closed set at each `x`.
#[derive(Debug, Clone)]
pub struct SetValuedMap {
    pub template: SetTemplate,
    pub dim_in: usize,
    pub dim_out: usize,
    pub norm_in: Norm,
    pub norm_out: Norm,
    pub domain: DomainBox,
    pub params: Vec<f64>,
}

impl SetValuedMap {
    /// `dim_out` is taken from the image at the origin when not given.
    pub fn new(template: SetTemplate, dim_in: Option<usize>, dim_out: Option<usize>) -> Result<Self> {
        let dim_in = dim_in.unwrap_or(0).max(template.max_index(VarKind::X)).max(1);
        let params = vec![0.0; template.max_index(VarKind::P)];
        let dim_out = match dim_out {
            Some(m) => m,
            None => template
                .instantiate(&Env::with_params(&vec![0.0; dim_in], &params))?
                .dim()
                .unwrap_or(1),
        };
        Ok(SetValuedMap {
            template,
            dim_in,
            dim_out,
            norm_in: Norm::l2(),
            norm_out: Norm::l2(),
            domain: DomainBox::standard(dim_in),
            params,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        SetValuedMap::new(parse_set_template(text)?, None, None)
    }

    pub fn with_norms(mut self, norm_in: Norm, norm_out: Norm) -> Self {
        self.norm_in = norm_in;
        self.norm_out = norm_out;
        self
    }

    pub fn with_domain(mut self, domain: DomainBox) -> Result<Self> {
        if domain.lo.len() != self.dim_in {
            return Err(Error::dim("domain box", self.dim_in, domain.lo.len()));
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn with_params(mut self, p: Vec<f64>) -> Result<Self> {
        let need = self.template.max_index(VarKind::P);
        if p.len() < need {
            return Err(Error::dim("parameter vector", need, p.len()));
        }
        self.params = p;
        Ok(self)
    }
}

impl Multifunction for SetValuedMap {
    fn describe(&self) -> String {
        format!("set-valued map ℝ^{} ⇉ ℝ^{}", self.dim_in, self.dim_out)
    }
    fn kind(&self) -> &'static str {
        "setvalued"
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
        self.domain.check(x)?;
        let s = self.template.instantiate(&Env::with_params(x, &self.params))?;
        match s.dim() {
            Some(d) if d != self.dim_out => Err(Error::dim("image", self.dim_out, d)),
            _ => Ok(s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: f64 = f64::INFINITY;

    #[test]
    fn piecewise_images() {
        let f1 = SetValuedMap::parse("piecewise(x1 == 0, interval(0, 0.5), interval(1, inf))").unwrap();
        assert_eq!(f1.image(&[0.0]).unwrap(), SetDescriptor::interval(0.0, 0.5).unwrap());
        assert_eq!(f1.image(&[0.5]).unwrap(), SetDescriptor::interval(1.0, INF).unwrap());
        let f2 = SetValuedMap::parse("interval(x1, inf)").unwrap();
        assert_eq!(f2.image(&[-1.0]).unwrap(), SetDescriptor::interval(-1.0, INF).unwrap());
        assert_eq!(f2.dist_to_image(&[0.0], &[0.25]).unwrap(), 0.25);
    }

    #[test]
    fn outside_domain() {
        let f = SetValuedMap::parse("interval(x1, inf)").unwrap();
        assert!(matches!(f.image(&[11.0]), Err(Error::OutsideDomain { .. })));
    }
}

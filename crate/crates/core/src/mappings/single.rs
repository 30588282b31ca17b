use super::{DomainBox, Multifunction};
use crate::error::{Error, Result};
use crate::expr::{eval_expr, parse_expr, Env, Expr, VarKind};
use crate::spaces::{Norm, SetDescriptor};

/// A single-valued mapping `x ↦ e(x, p)` given by an expression, with the
/// parameter vector `p` frozen.
#[derive(Debug, Clone)]
pub struct SingleMap {
    pub expr: Expr,
    pub dim_in: usize,
    pub dim_out: usize,
    pub norm_in: Norm,
    pub norm_out: Norm,
    pub domain: DomainBox,
    pub params: Vec<f64>,
}

impl SingleMap {
    /// Infers dimensions from the variables and shape of `expr`; the source
    /// dimension is at least `min_dim_in`.
    pub fn new(expr: Expr, min_dim_in: usize) -> Result<Self> {
        let dim_in = expr.max_index(VarKind::X).max(min_dim_in).max(1);
        let dim_out = expr.shape()?;
        let nparams = expr.max_index(VarKind::P);
        Ok(SingleMap {
            expr,
            dim_in,
            dim_out,
            norm_in: Norm::l2(),
            norm_out: Norm::l2(),
            domain: DomainBox::standard(dim_in),
            params: vec![0.0; nparams],
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        SingleMap::new(parse_expr(text)?, 1)
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
        let need = self.expr.max_index(VarKind::P);
        if p.len() < need {
            return Err(Error::dim("parameter vector", need, p.len()));
        }
        self.params = p;
        Ok(self)
    }

    /// `e(x, p)` without the domain check.
    pub fn eval_raw(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim_in {
            return Err(Error::dim("point", self.dim_in, x.len()));
        }
        eval_expr(&self.expr, &Env::with_params(x, &self.params))
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.domain.check(x)?;
        self.eval_raw(x)
    }
}

impl Multifunction for SingleMap {
    fn describe(&self) -> String {
        self.expr.to_string()
    }
    fn kind(&self) -> &'static str {
        "expr"
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

use super::{DomainBox, Multifunction};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::spaces::{Norm, SetDescriptor};

/// `x ↦ A x`.
#[derive(Debug, Clone)]
pub struct LinearOp {
    pub matrix: Matrix,
    pub norm_in: Norm,
    pub norm_out: Norm,
}

impl LinearOp {
    pub fn new(matrix: Matrix) -> Self {
        LinearOp {
            matrix,
            norm_in: Norm::l2(),
            norm_out: Norm::l2(),
        }
    }

    pub fn with_norms(mut self, norm_in: Norm, norm_out: Norm) -> Self {
        self.norm_in = norm_in;
        self.norm_out = norm_out;
        self
    }

    /// The adjoint with dual norms on both sides.
    pub fn adjoint(&self) -> LinearOp {
        LinearOp {
            matrix: self.matrix.transpose(),
            norm_in: self.norm_out.dual(),
            norm_out: self.norm_in.dual(),
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.matrix.cols {
            return Err(Error::dim("point", self.matrix.cols, x.len()));
        }
        Ok(self.matrix.apply(x))
    }
}

impl Multifunction for LinearOp {
    fn describe(&self) -> String {
        format!("linear {}", self.matrix)
    }
    fn kind(&self) -> &'static str {
        "linear"
    }
    fn dim_in(&self) -> usize {
        self.matrix.cols
    }
    fn dim_out(&self) -> usize {
        self.matrix.rows
    }
    fn norm_in(&self) -> &Norm {
        &self.norm_in
    }
    fn norm_out(&self) -> &Norm {
        &self.norm_out
    }
    fn domain(&self) -> DomainBox {
        DomainBox::unbounded(self.matrix.cols)
    }
    fn image(&self, x: &[f64]) -> Result<SetDescriptor> {
        Ok(SetDescriptor::point(self.apply(x)?))
    }
    fn value(&self, x: &[f64]) -> Option<Result<Vec<f64>>> {
        Some(self.apply(x))
    }
    fn is_single_valued(&self) -> bool {
        true
    }
    fn as_linear(&self) -> Option<&LinearOp> {
        Some(self)
    }
}

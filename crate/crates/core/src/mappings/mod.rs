//! Evaluable mappings: single-valued expressions, linear operators,
//! positively homogeneous maps, fans and set-valued rules, plus their
//! injectivity constants.

mod combinators;
mod fan;
mod injectivity;
mod linear;
mod ph;
mod setvalued;
mod single;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::spaces::{Norm, SetDescriptor};

pub use combinators::{Compose, Epigraph, FnMap, Sum};
pub use fan::{Fan, FanHull};
pub use injectivity::{alpha0_ph, alpha_fan, alpha_linear, beta_linear, Injectivity, DEFAULT_SPHERE_SAMPLES};
pub use linear::LinearOp;
pub use ph::PHMapping;
pub use setvalued::SetValuedMap;
pub use single::SingleMap;

/// Shared, immutable handle to any mapping.
pub type Mapping = Arc<dyn Multifunction>;

/// Axis-aligned domain on which a mapping may be evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl DomainBox {
    /// `[-10, 10]^n`.
    pub fn standard(n: usize) -> Self {
        DomainBox {
            lo: vec![-10.0; n],
            hi: vec![10.0; n],
        }
    }

    pub fn unbounded(n: usize) -> Self {
        DomainBox {
            lo: vec![f64::NEG_INFINITY; n],
            hi: vec![f64::INFINITY; n],
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.lo.len()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (a, b))| *a <= *v && *v <= *b)
    }

    pub fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.lo.len() {
            return Err(Error::dim("point", self.lo.len(), x.len()));
        }
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutsideDomain { point: x.to_vec() })
        }
    }
}

/// A possibly set-valued mapping `F : ℝⁿ ⇉ ℝᵐ` with norms on both spaces.
pub trait Multifunction: Send + Sync + fmt::Debug {
    /// Short tag naming the mapping kind.
    fn kind(&self) -> &'static str;

    /// Human-readable summary used in report labels.
    fn describe(&self) -> String {
        self.kind().to_string()
    }
    fn dim_in(&self) -> usize;
    fn dim_out(&self) -> usize;
    fn norm_in(&self) -> &Norm;
    fn norm_out(&self) -> &Norm;

    fn domain(&self) -> DomainBox {
        DomainBox::standard(self.dim_in())
    }

    /// `F(x)` as a closed-set descriptor.
    fn image(&self, x: &[f64]) -> Result<SetDescriptor>;

    /// The single value `F(x)` when the mapping is single-valued.
    fn value(&self, _x: &[f64]) -> Option<Result<Vec<f64>>> {
        None
    }

    fn is_single_valued(&self) -> bool {
        false
    }

    /// The matrix of a linear mapping.
    fn as_linear(&self) -> Option<&LinearOp> {
        None
    }

    /// `dist(y, F(x))` in the target norm.
    fn dist_to_image(&self, y: &[f64], x: &[f64]) -> Result<f64> {
        if let Some(v) = self.value(x) {
            let v = v?;
            if v.len() != y.len() {
                return Err(Error::dim("target point", v.len(), y.len()));
            }
            return Ok(self.norm_out().dist(y, &v));
        }
        self.image(x)?.dist(y, self.norm_out())
    }
}

/// Evaluates a single-valued mapping, failing for set-valued ones.
pub fn eval_single(f: &dyn Multifunction, x: &[f64]) -> Result<Vec<f64>> {
    match f.value(x) {
        Some(v) => v,
        None => Err(Error::invalid(format!(
            "a single-valued mapping is required, got `{}`",
            f.kind()
        ))),
    }
}

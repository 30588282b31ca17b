use serde::{Deserialize, Serialize};

use super::{DomainBox, Multifunction};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::spaces::{Norm, SetDescriptor};

/// Whether a fan is the finite set `{Λ_i u}` or its convex hull.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FanHull {
    Finite,
    Convex,
}

/// A finitely generated fan `H(u) = {Λ_1 u, ..., Λ_k u}` or
/// `H(u) = conv{Λ_1 u, ..., Λ_k u}`.
#[derive(Debug, Clone)]
pub struct Fan {
    pub generators: Vec<Matrix>,
    pub hull: FanHull,
    pub norm_in: Norm,
    pub norm_out: Norm,
}

impl Fan {
    pub fn new(generators: Vec<Matrix>, hull: FanHull) -> Result<Self> {
        let Some(first) = generators.first() else {
            return Err(Error::invalid("a fan needs at least one generator"));
        };
        let (r, c) = (first.rows, first.cols);
        for g in &generators {
            if g.rows != r || g.cols != c {
                return Err(Error::invalid(format!(
                    "fan generators must share a shape: {}x{} vs {}x{}",
                    r, c, g.rows, g.cols
                )));
            }
        }
        Ok(Fan {
            generators,
            hull,
            norm_in: Norm::l2(),
            norm_out: Norm::l2(),
        })
    }

    pub fn singleton(m: Matrix) -> Self {
        Fan::new(vec![m], FanHull::Finite).expect("one generator")
    }

    pub fn with_norms(mut self, norm_in: Norm, norm_out: Norm) -> Self {
        self.norm_in = norm_in;
        self.norm_out = norm_out;
        self
    }

    /// The points `Λ_i u`.
    pub fn points(&self, u: &[f64]) -> Result<Vec<Vec<f64>>> {
        if u.len() != self.generators[0].cols {
            return Err(Error::dim("point", self.generators[0].cols, u.len()));
        }
        Ok(self.generators.iter().map(|g| g.apply(u)).collect())
    }
}

impl Multifunction for Fan {
    fn kind(&self) -> &'static str {
        "fan"
    }
    fn dim_in(&self) -> usize {
        self.generators[0].cols
    }
    fn dim_out(&self) -> usize {
        self.generators[0].rows
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
    fn image(&self, u: &[f64]) -> Result<SetDescriptor> {
        let pts = self.points(u)?;
        Ok(match self.hull {
            FanHull::Finite => SetDescriptor::Points(pts),
            FanHull::Convex => SetDescriptor::Hull(pts),
        })
    }
    fn value(&self, u: &[f64]) -> Option<Result<Vec<f64>>> {
        (self.generators.len() == 1).then(|| self.points(u).map(|mut p| p.remove(0)))
    }
    fn is_single_valued(&self) -> bool {
        self.generators.len() == 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn images_are_positively_homogeneous() {
        let f = Fan::new(vec![Matrix::identity(2), Matrix::diag(&[-1.0, 1.0])], FanHull::Convex).unwrap();
        let u = [0.3, -0.7];
        for t in [0.5, 2.0, 10.0] {
            let tu: Vec<f64> = u.iter().map(|v| t * v).collect();
            let y = [0.1, 0.2];
            let ty: Vec<f64> = y.iter().map(|v| t * v).collect();
            let a = f.dist_to_image(&ty, &tu).unwrap();
            let b = f.dist_to_image(&y, &u).unwrap();
            assert!((a - t * b).abs() <= 1e-12 * (1.0 + a));
        }
    }

    #[test]
    fn rejects_mixed_shapes() {
        assert!(Fan::new(vec![Matrix::identity(2), Matrix::identity(3)], FanHull::Finite).is_err());
        assert!(Fan::new(vec![], FanHull::Finite).is_err());
    }
}

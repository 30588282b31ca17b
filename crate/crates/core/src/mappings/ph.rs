use super::{DomainBox, Multifunction, SingleMap};
use crate::error::{Error, Result};
use crate::spaces::{unit_sphere_samples, Norm, SetDescriptor};

const HOMOGENEITY_TOL: f64 = 1e-9;
const SCALES: [f64; 3] = [0.5, 2.0, 10.0];

/// A single-valued positively homogeneous map, `h(tu) = t h(u)` for `t > 0`.
#[derive(Debug, Clone)]
pub struct PHMapping {
    inner: SingleMap,
}

impl PHMapping {
    /// Checks `h(0) = 0` and homogeneity at sampled unit vectors for
    /// `t ∈ {0.5, 2, 10}`, relative tolerance 1e-9.
    pub fn new(map: SingleMap, seed: u64) -> Result<Self> {
        let mut map = map;
        map.domain = DomainBox::unbounded(map.dim_in);
        let n = map.dim_in;
        let zero = map.eval_raw(&vec![0.0; n])?;
        if zero.iter().any(|v| v.abs() > HOMOGENEITY_TOL) {
            return Err(Error::invalid(format!("h(0) = {zero:?} is not zero")));
        }
        let count = if n <= 2 { 16 } else { 32 };
        for u in unit_sphere_samples(n, &map.norm_in, count, seed)? {
            let hu = map.eval_raw(&u)?;
            for t in SCALES {
                let tu: Vec<f64> = u.iter().map(|v| t * v).collect();
                let htu = map.eval_raw(&tu)?;
                for (a, b) in htu.iter().zip(&hu) {
                    if (a - t * b).abs() > HOMOGENEITY_TOL * (1.0 + (t * b).abs()) {
                        return Err(Error::invalid(format!(
                            "not positively homogeneous: h({tu:?}) differs from {t}·h({u:?})"
                        )));
                    }
                }
            }
        }
        Ok(PHMapping { inner: map })
    }

    pub fn map(&self) -> &SingleMap {
        &self.inner
    }

    pub fn eval(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.inner.eval_raw(u)
    }
}

impl Multifunction for PHMapping {
    fn describe(&self) -> String {
        self.map().describe()
    }
    fn kind(&self) -> &'static str {
        "ph"
    }
    fn dim_in(&self) -> usize {
        self.inner.dim_in
    }
    fn dim_out(&self) -> usize {
        self.inner.dim_out
    }
    fn norm_in(&self) -> &Norm {
        &self.inner.norm_in
    }
    fn norm_out(&self) -> &Norm {
        &self.inner.norm_out
    }
    fn domain(&self) -> DomainBox {
        DomainBox::unbounded(self.inner.dim_in)
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

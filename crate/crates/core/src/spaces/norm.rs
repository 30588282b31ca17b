use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    L1,
    L2,
    Linf,
}

impl NormKind {
    pub fn dual(self) -> NormKind {
        match self {
            NormKind::L1 => NormKind::Linf,
            NormKind::L2 => NormKind::L2,
            NormKind::Linf => NormKind::L1,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            NormKind::L1 => "l1",
            NormKind::L2 => "l2",
            NormKind::Linf => "linf",
        }
    }
}

/// An `l1`, `l2` or `linf` norm with optional positive diagonal weights:
/// `‖x‖ = ‖w ∘ x‖_p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Norm {
    pub kind: NormKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl Norm {
    pub const fn new(kind: NormKind) -> Self {
        Norm {
            kind,
            weights: None,
        }
    }

    pub const fn l1() -> Self {
        Norm::new(NormKind::L1)
    }

    pub const fn l2() -> Self {
        Norm::new(NormKind::L2)
    }

    pub const fn linf() -> Self {
        Norm::new(NormKind::Linf)
    }

    pub fn weighted(kind: NormKind, weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::invalid("norm weights must be positive and finite"));
        }
        Ok(Norm {
            kind,
            weights: Some(weights),
        })
    }

    pub fn is_l2(&self) -> bool {
        self.kind == NormKind::L2
    }

    pub fn is_unweighted(&self) -> bool {
        self.weights.is_none()
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[i % w.len()])
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let it = x.iter().enumerate().map(|(i, v)| (v * self.weight(i)).abs());
        match self.kind {
            NormKind::L1 => it.sum(),
            NormKind::L2 => it.map(|v| v * v).sum::<f64>().sqrt(),
            NormKind::Linf => it.fold(0.0, f64::max),
        }
    }

    pub fn dist(&self, a: &[f64], b: &[f64]) -> f64 {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.eval(&d)
    }

    /// The dual norm `‖y‖_* = sup{⟨y,x⟩ : ‖x‖ ≤ 1}`.
    pub fn dual(&self) -> Norm {
        Norm {
            kind: self.kind.dual(),
            weights: self
                .weights
                .as_ref()
                .map(|w| w.iter().map(|v| 1.0 / v).collect()),
        }
    }

    /// Rescales `x` onto the unit sphere. Returns `None` for the zero vector.
    pub fn normalize(&self, x: &[f64]) -> Option<Vec<f64>> {
        let n = self.eval(x);
        (n > 0.0 && n.is_finite()).then(|| x.iter().map(|v| v / n).collect())
    }
}

impl Default for Norm {
    fn default() -> Self {
        Norm::l2()
    }
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "l1" => Ok(Norm::l1()),
            "l2" => Ok(Norm::l2()),
            "linf" => Ok(Norm::linf()),
            other => Err(Error::invalid(format!(
                "unknown norm `{other}` (expected l1, l2 or linf)"
            ))),
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.tag())?;
        if let Some(w) = &self.weights {
            write!(f, "{w:?}")?;
        }
        Ok(())
    }
}

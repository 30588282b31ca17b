use crate::error::{Error, Result};
use crate::mappings::{eval_single, DomainBox, Fan, FanHull, Mapping, Multifunction, SingleMap};
use crate::spaces::{Norm, SetDescriptor};

/// The field `T : ℝⁿ ⇉ ℝᵐ` of a generalized equation.
#[derive(Debug, Clone)]
pub enum Field {
    /// `T(x) = N_C(x)` for the box `C = [lo, hi]`, empty outside `C`.
    NormalConeBox { lo: Vec<f64>, hi: Vec<f64>, norm: Norm },
    /// `T ≡ 0 ∈ ℝᵐ` on `ℝⁿ`.
    Zero { n: usize, m: usize, norm_in: Norm, norm_out: Norm },
    /// Single-valued `T(x) = e(x)`.
    Expr(SingleMap),
    /// Any other multifunction.
    Map(Mapping),
}

impl Field {
    pub fn normal_cone_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::dim("normal-cone box", lo.len(), hi.len()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a <= b) || a.is_nan()) {
            return Err(Error::invalid("normal-cone box needs lo ≤ hi"));
        }
        Ok(Field::NormalConeBox { lo, hi, norm: Norm::l2() })
    }

    /// The normal cone to the half-line `[0, ∞)` in each coordinate.
    pub fn nonneg_orthant(n: usize) -> Self {
        Field::NormalConeBox {
            lo: vec![0.0; n],
            hi: vec![f64::INFINITY; n],
            norm: Norm::l2(),
        }
    }

    pub fn zero(n: usize, m: usize) -> Self {
        Field::Zero {
            n,
            m,
            norm_in: Norm::l2(),
            norm_out: Norm::l2(),
        }
    }

    pub fn expr(text: &str, n: usize) -> Result<Self> {
        let t = SingleMap::parse(text)?;
        if t.dim_in > n {
            return Err(Error::dim("field source", n, t.dim_in));
        }
        let mut t = SingleMap::new(t.expr, n)?;
        t.domain = DomainBox::unbounded(n);
        Ok(Field::Expr(t))
    }

    pub fn with_norms(self, norm_in: Norm, norm_out: Norm) -> Self {
        match self {
            Field::NormalConeBox { lo, hi, .. } => Field::NormalConeBox { lo, hi, norm: norm_out },
            Field::Zero { n, m, .. } => Field::Zero { n, m, norm_in, norm_out },
            Field::Expr(t) => Field::Expr(t.with_norms(norm_in, norm_out)),
            Field::Map(t) => Field::Map(t),
        }
    }
}

impl Multifunction for Field {
    fn kind(&self) -> &'static str {
        match self {
            Field::NormalConeBox { .. } => "normal-cone",
            Field::Zero { .. } => "zero",
            Field::Expr(_) => "expr",
            Field::Map(t) => t.kind(),
        }
    }
    fn describe(&self) -> String {
        match self {
            Field::NormalConeBox { lo, hi, .. } => format!("normal cone to the box {lo:?}..{hi:?}"),
            Field::Zero { .. } => "0".into(),
            Field::Expr(t) => t.describe(),
            Field::Map(t) => t.describe(),
        }
    }
    fn dim_in(&self) -> usize {
        match self {
            Field::NormalConeBox { lo, .. } => lo.len(),
            Field::Zero { n, .. } => *n,
            Field::Expr(t) => t.dim_in,
            Field::Map(t) => t.dim_in(),
        }
    }
    fn dim_out(&self) -> usize {
        match self {
            Field::NormalConeBox { lo, .. } => lo.len(),
            Field::Zero { m, .. } => *m,
            Field::Expr(t) => t.dim_out,
            Field::Map(t) => t.dim_out(),
        }
    }
    fn norm_in(&self) -> &Norm {
        match self {
            Field::NormalConeBox { norm, .. } => norm,
            Field::Zero { norm_in, .. } => norm_in,
            Field::Expr(t) => &t.norm_in,
            Field::Map(t) => t.norm_in(),
        }
    }
    fn norm_out(&self) -> &Norm {
        match self {
            Field::NormalConeBox { norm, .. } => norm,
            Field::Zero { norm_out, .. } => norm_out,
            Field::Expr(t) => &t.norm_out,
            Field::Map(t) => t.norm_out(),
        }
    }
    fn domain(&self) -> DomainBox {
        match self {
            Field::Map(t) => t.domain(),
            _ => DomainBox::unbounded(self.dim_in()),
        }
    }
    fn image(&self, x: &[f64]) -> Result<SetDescriptor> {
        if x.len() != self.dim_in() {
            return Err(Error::dim("point", self.dim_in(), x.len()));
        }
        match self {
            Field::NormalConeBox { lo, hi, .. } => {
                if x.iter().zip(lo.iter().zip(hi)).any(|(v, (a, b))| v < a || v > b) {
                    return Ok(SetDescriptor::Empty);
                }
                let (clo, chi) = x
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .map(|(v, (a, b))| {
                        let at_lo = v == a;
                        let at_hi = v == b;
                        (
                            if at_lo { f64::NEG_INFINITY } else { 0.0 },
                            if at_hi { f64::INFINITY } else { 0.0 },
                        )
                    })
                    .unzip();
                Ok(SetDescriptor::Box { lo: clo, hi: chi })
            }
            Field::Zero { m, .. } => Ok(SetDescriptor::point(vec![0.0; *m])),
            Field::Expr(t) => Ok(SetDescriptor::point(t.eval_raw(x)?)),
            Field::Map(t) => t.image(x),
        }
    }
    fn value(&self, x: &[f64]) -> Option<Result<Vec<f64>>> {
        match self {
            Field::NormalConeBox { .. } => None,
            Field::Zero { m, .. } => Some(Ok(vec![0.0; *m])),
            Field::Expr(t) => Some(t.eval_raw(x)),
            Field::Map(t) => t.value(x),
        }
    }
    fn is_single_valued(&self) -> bool {
        match self {
            Field::NormalConeBox { .. } => false,
            Field::Zero { .. } | Field::Expr(_) => true,
            Field::Map(t) => t.is_single_valued(),
        }
    }
    fn dist_to_image(&self, y: &[f64], x: &[f64]) -> Result<f64> {
        match self {
            Field::Map(t) => t.dist_to_image(y, x),
            _ => match self.value(x) {
                Some(v) => Ok(self.norm_out().dist(y, &v?)),
                None => self.image(x)?.dist(y, self.norm_out()),
            },
        }
    }
}

/// The approximated equation's mapping `x ↦ c + H(x − x̄) + T(x)` with
/// `c = f(p̄, x̄)`.
#[derive(Debug, Clone)]
pub struct AgeqMap {
    pub c: Vec<f64>,
    pub fan: Fan,
    pub xbar: Vec<f64>,
    pub field: Field,
}

impl Multifunction for AgeqMap {
    fn kind(&self) -> &'static str {
        "approximated-equation"
    }
    fn describe(&self) -> String {
        format!("f(p̄, x̄) + H(x − x̄) + {}", self.field.describe())
    }
    fn dim_in(&self) -> usize {
        self.xbar.len()
    }
    fn dim_out(&self) -> usize {
        self.c.len()
    }
    fn norm_in(&self) -> &Norm {
        &self.fan.norm_in
    }
    fn norm_out(&self) -> &Norm {
        &self.fan.norm_out
    }
    fn domain(&self) -> DomainBox {
        DomainBox::unbounded(self.dim_in())
    }
    /// Exact for a singleton fan, a single-valued field, or a finite fan
    /// (a union of translates); a convex-hull fan plus a set-valued field
    /// has no closed form here.
    fn image(&self, x: &[f64]) -> Result<SetDescriptor> {
        let v: Vec<f64> = x.iter().zip(&self.xbar).map(|(a, b)| a - b).collect();
        let shift = |h: &[f64]| -> Vec<f64> { self.c.iter().zip(h).map(|(a, b)| a + b).collect() };
        if let Some(t) = self.field.value(x) {
            let t = t?;
            let s: Vec<f64> = shift(&t);
            return Ok(self.fan.image(&v)?.translate(s));
        }
        let pts = self.fan.points(&v)?;
        if pts.len() == 1 || self.fan.hull == FanHull::Finite {
            let t = self.field.image(x)?;
            let parts: Vec<SetDescriptor> = pts.iter().map(|h| t.clone().translate(shift(h))).collect();
            return if parts.len() == 1 {
                Ok(parts.into_iter().next().expect("one part"))
            } else {
                SetDescriptor::union(parts)
            };
        }
        Err(Error::NoExactOracle(
            "the sum of a convex-hull fan and a set-valued field".into(),
        ))
    }
    fn value(&self, x: &[f64]) -> Option<Result<Vec<f64>>> {
        if !self.is_single_valued() {
            return None;
        }
        let v: Vec<f64> = x.iter().zip(&self.xbar).map(|(a, b)| a - b).collect();
        Some((|| {
            let h = eval_single(&self.fan, &v)?;
            let t = eval_single(&self.field, x)?;
            Ok(self.c.iter().zip(h.iter().zip(&t)).map(|(a, (b, d))| a + b + d).collect())
        })())
    }
    fn is_single_valued(&self) -> bool {
        self.fan.is_single_valued() && self.field.is_single_valued()
    }
}

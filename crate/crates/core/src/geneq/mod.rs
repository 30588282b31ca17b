//! Parameterized generalized equations `0 ∈ f(p, x) + T(x)`.
//!
//! A [`GenEqProblem`] carries the base `f`, the field `T`, a reference
//! solution `(p̄, x̄)` and a fan `H` standing in for the partial derivative
//! of `f` in `x`. The solution mapping `S(p) = {x : 0 ∈ f(p, x) + T(x)}` is
//! traced on a parameter grid by residual minimization, and the isolated
//! calmness bounds in [`bounds`] are compared against the traced modulus.

mod bounds;
mod field;
mod suites;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::{jacobian_fd, FD_STEP};
use crate::convexity::{MaxAffineMap, OrderCone};
use crate::error::{Error, Result};
use crate::expr::{eval_expr, Env, VarKind};
use crate::linalg::Matrix;
use crate::mappings::{Fan, FnMap, Multifunction, SingleMap};
use crate::spaces::Norm;

pub use bounds::{
    convex_scalarized_geneq_bound, isolated_calmness_bound, partial_prederivative_defect, single_valued_field_bound,
    PARAM_GRID, UNIFORM_X_SAMPLES,
};
pub use field::{AgeqMap, Field};
pub use suites::{geneq_bound, geneq_catalog, geneq_random_suite};

/// Residual below which a point counts as a solution.
pub const SOLUTION_TOL: f64 = 1e-7;
/// Solutions closer than this are merged.
pub const MERGE_RADIUS: f64 = 1e-5;
/// `0 ∈ f(p̄, x̄) + T(x̄)` must hold to this accuracy.
pub const ANCHOR_TOL: f64 = 1e-9;
/// Grid points on `[x̄ − δ, x̄ + δ]` for one-dimensional tracing.
pub const TRACE_GRID_1D: usize = 2001;

/// `f(p̄, ·)` given as a max-affine map with an order cone on its target,
/// enabling the scalarization bound.
#[derive(Debug, Clone)]
pub struct ConvexBase {
    pub map: MaxAffineMap,
    pub cone: OrderCone,
}

/// `0 ∈ f(p, x) + T(x)` with `f : ℝᵏ × ℝⁿ → ℝᵐ` written over `p1..pk` and
/// `x1..xn`, and a reference solution `x̄` at `p̄`.
#[derive(Debug, Clone)]
pub struct GenEqProblem {
    pub f: SingleMap,
    pub field: Field,
    pub pbar: Vec<f64>,
    pub xbar: Vec<f64>,
    pub fan: Fan,
    /// Radius of the ball around `x̄` in which solutions are sought.
    pub delta: f64,
    /// Radius of the parameter ball around `p̄`.
    pub zeta: f64,
    pub convex: Option<ConvexBase>,
}

impl GenEqProblem {
    /// Validates dimensions and the anchor; `H` defaults to the
    /// finite-difference Jacobian `∂ₓf(p̄, x̄)` as a singleton fan.
    pub fn new(f: SingleMap, field: Field, pbar: Vec<f64>, xbar: Vec<f64>) -> Result<Self> {
        let k = f.expr.max_index(VarKind::P);
        if pbar.len() < k.max(1) {
            return Err(Error::dim("parameter anchor", k.max(1), pbar.len()));
        }
        if xbar.len() != f.dim_in {
            return Err(Error::dim("solution anchor", f.dim_in, xbar.len()));
        }
        if field.dim_in() != f.dim_in || field.dim_out() != f.dim_out {
            return Err(Error::dim("field", f.dim_out, field.dim_out()));
        }
        let mut prob = GenEqProblem {
            fan: Fan::singleton(Matrix::zeros(f.dim_out, f.dim_in)),
            f,
            field,
            pbar,
            xbar,
            delta: 0.5,
            zeta: 0.2,
            convex: None,
        };
        let r = prob.residual(&prob.pbar, &prob.xbar)?;
        if r > ANCHOR_TOL {
            return Err(Error::AnchorOffGraph { dist: r });
        }
        let jac = jacobian_fd(&prob.section_at(&prob.pbar), &prob.xbar, FD_STEP)?;
        prob.fan = Fan::singleton(jac).with_norms(prob.norm_x().clone(), prob.norm_y().clone());
        Ok(prob)
    }

    pub fn with_fan(mut self, fan: Fan) -> Result<Self> {
        if fan.dim_in() != self.n() || fan.dim_out() != self.m() {
            return Err(Error::dim("fan", self.m(), fan.dim_out()));
        }
        self.fan = fan.with_norms(self.norm_x().clone(), self.norm_y().clone());
        Ok(self)
    }

    pub fn with_radii(mut self, delta: f64, zeta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite() && zeta > 0.0 && zeta.is_finite()) {
            return Err(Error::invalid(format!("radii must be positive, got δ = {delta}, ζ = {zeta}")));
        }
        self.delta = delta;
        self.zeta = zeta;
        Ok(self)
    }

    pub fn with_convex_base(mut self, map: MaxAffineMap, cone: OrderCone) -> Result<Self> {
        if map.dim_in() != self.n() || map.dim_out() != self.m() || cone.dim != self.m() {
            return Err(Error::dim("max-affine base", self.m(), map.dim_out()));
        }
        self.convex = Some(ConvexBase {
            map: map.with_norms(self.norm_x().clone(), self.norm_y().clone()),
            cone,
        });
        Ok(self)
    }

    pub fn k(&self) -> usize {
        self.pbar.len()
    }

    pub fn n(&self) -> usize {
        self.f.dim_in
    }

    pub fn m(&self) -> usize {
        self.f.dim_out
    }

    pub fn norm_x(&self) -> &Norm {
        &self.f.norm_in
    }

    pub fn norm_y(&self) -> &Norm {
        &self.f.norm_out
    }

    pub fn describe(&self) -> String {
        format!("0 ∈ {} + T(x), T = {}", self.f.expr, self.field.describe())
    }

    /// `f(p, x)`.
    pub fn base(&self, p: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        if p.len() != self.k() {
            return Err(Error::dim("parameter", self.k(), p.len()));
        }
        if x.len() != self.n() {
            return Err(Error::dim("point", self.n(), x.len()));
        }
        eval_expr(&self.f.expr, &Env::with_params(x, p))
    }

    /// `x ↦ f(p, x)`.
    pub fn section_at(&self, p: &[f64]) -> FnMap {
        let f = self.f.expr.clone();
        let p = p.to_vec();
        FnMap::new("base section in x", self.n(), self.m(), move |x| eval_expr(&f, &Env::with_params(x, &p)))
            .with_norms(self.norm_x().clone(), self.norm_y().clone())
    }

    /// `p ↦ f(p, x)`.
    pub fn parameter_section(&self, x: &[f64]) -> FnMap {
        let f = self.f.expr.clone();
        let x = x.to_vec();
        FnMap::new("base section in p", self.k(), self.m(), move |p| eval_expr(&f, &Env::with_params(&x, p)))
            .with_norms(Norm::l2(), self.norm_y().clone())
    }

    /// `dist(0, f(p, x) + T(x)) = dist(−f(p, x), T(x))`; `+∞` where `T(x)`
    /// is empty.
    pub fn residual(&self, p: &[f64], x: &[f64]) -> Result<f64> {
        let neg: Vec<f64> = self.base(p, x)?.into_iter().map(|v| -v).collect();
        self.field.dist_to_image(&neg, x)
    }

    /// The default parameter grid: [`PARAM_GRID`] points per axis of the
    /// cube around `p̄`, kept when inside the `ζ`-ball, with `p̄` removed.
    pub fn param_grid(&self) -> Vec<Vec<f64>> {
        let k = self.k();
        let half = (PARAM_GRID / 2) as i64;
        let mut out = Vec::new();
        let total = PARAM_GRID.pow(k as u32);
        for idx in 0..total {
            let mut rem = idx;
            let mut offs = Vec::with_capacity(k);
            for _ in 0..k {
                offs.push((rem % PARAM_GRID) as i64 - half);
                rem /= PARAM_GRID;
            }
            if offs.iter().all(|o| *o == 0) {
                continue;
            }
            let d: Vec<f64> = offs.iter().map(|o| self.zeta * *o as f64 / half as f64).collect();
            if Norm::l2().eval(&d) <= self.zeta * (1.0 + 1e-12) {
                out.push(d.iter().zip(&self.pbar).map(|(a, b)| a + b).collect());
            }
        }
        out
    }
}

/// Solutions found at one parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionSample {
    pub p: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub method: String,
}

/// Solutions of the equation at each `p` inside the `δ`-ball around `x̄`,
/// by multi-start grid search refined by golden section (`n = 1`) or
/// compass search (`n = 2, 3`). Every returned point has residual at most
/// [`SOLUTION_TOL`].
pub fn trace_solution_map(prob: &GenEqProblem, params: &[Vec<f64>], delta: f64) -> Result<Vec<SolutionSample>> {
    if prob.n() > 3 {
        return Err(Error::invalid(format!("solution tracing supports n ≤ 3, got {}", prob.n())));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::invalid(format!("trace radius must be positive, got {delta}")));
    }
    params.par_iter().map(|p| trace_at(prob, p, delta)).collect()
}

fn trace_at(prob: &GenEqProblem, p: &[f64], delta: f64) -> Result<SolutionSample> {
    let res = |x: &[f64]| prob.residual(p, x);
    let (cands, method) = if prob.n() == 1 {
        (search_1d(&res, prob.xbar[0], delta)?, "grid+golden")
    } else {
        (search_nd(&res, &prob.xbar, prob.norm_x(), delta)?, "grid+compass")
    };
    let mut found: Vec<(Vec<f64>, f64)> = cands
        .into_iter()
        .filter(|(x, r)| *r <= SOLUTION_TOL && prob.norm_x().dist(x, &prob.xbar) <= delta * (1.0 + 1e-12))
        .collect();
    found.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.partial_cmp(&b.0).expect("finite points")));
    let mut kept: Vec<(Vec<f64>, f64)> = Vec::new();
    for (x, r) in found {
        if kept.iter().all(|(y, _)| prob.norm_x().dist(&x, y) > MERGE_RADIUS) {
            kept.push((x, r));
        }
    }
    kept.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite points"));
    Ok(SolutionSample {
        p: p.to_vec(),
        residuals: kept.iter().map(|(_, r)| *r).collect(),
        points: kept.into_iter().map(|(x, _)| x).collect(),
        method: method.into(),
    })
}

type Residual<'a> = dyn Fn(&[f64]) -> Result<f64> + 'a;

/// A grid minimum worth refining: a root may lie between its neighbours.
fn promising(r: f64, left: f64, right: f64) -> bool {
    if !r.is_finite() || r > left || r > right {
        return false;
    }
    let spread = [left, right].iter().filter(|v| v.is_finite()).map(|v| v - r).fold(0.0, f64::max);
    r <= SOLUTION_TOL || r <= 2.0 * spread
}

fn search_1d(res: &Residual, c: f64, delta: f64) -> Result<Vec<(Vec<f64>, f64)>> {
    let half = (TRACE_GRID_1D / 2) as f64;
    let xs: Vec<f64> = (0..TRACE_GRID_1D).map(|i| c + delta * (i as f64 - half) / half).collect();
    let rs = xs.iter().map(|x| res(&[*x])).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for i in 0..xs.len() {
        let left = if i > 0 { rs[i - 1] } else { f64::INFINITY };
        let right = if i + 1 < xs.len() { rs[i + 1] } else { f64::INFINITY };
        if !promising(rs[i], left, right) {
            continue;
        }
        out.push((vec![xs[i]], rs[i]));
        if rs[i] > 0.0 {
            let lo = xs[i.saturating_sub(1)];
            let hi = xs[(i + 1).min(xs.len() - 1)];
            let (x, r) = golden(res, lo, hi)?;
            if r < rs[i] {
                out.push((vec![x], r));
            }
        }
    }
    Ok(out)
}

/// Golden-section minimization of the residual on `[a, b]`.
fn golden(res: &Residual, mut a: f64, mut b: f64) -> Result<(f64, f64)> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let f = |x: f64| res(&[x]);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc <= fd { (c, fc) } else { (d, fd) })
}

fn search_nd(res: &Residual, c: &[f64], norm: &Norm, delta: f64) -> Result<Vec<(Vec<f64>, f64)>> {
    let n = c.len();
    let per: usize = if n == 2 { 41 } else { 17 };
    let half = (per / 2) as i64;
    let h = delta / half as f64;
    let total = per.pow(n as u32);
    let point = |idx: usize| -> Vec<f64> {
        let mut rem = idx;
        (0..n)
            .map(|i| {
                let o = (rem % per) as i64 - half;
                rem /= per;
                c[i] + h * o as f64
            })
            .collect()
    };
    let rs = (0..total)
        .map(|idx| {
            let x = point(idx);
            if norm.dist(&x, c) <= delta * (1.0 + 1e-12) {
                res(&x)
            } else {
                Ok(f64::INFINITY)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for idx in 0..total {
        let r = rs[idx];
        if !r.is_finite() {
            continue;
        }
        let mut stride = 1;
        let mut neighbours = Vec::with_capacity(2 * n);
        for _ in 0..n {
            let coord = (idx / stride) % per;
            neighbours.push(if coord > 0 { rs[idx - stride] } else { f64::INFINITY });
            neighbours.push(if coord + 1 < per { rs[idx + stride] } else { f64::INFINITY });
            stride *= per;
        }
        let worst_low = neighbours.iter().copied().fold(f64::INFINITY, f64::min);
        let spread = neighbours.iter().filter(|v| v.is_finite()).map(|v| v - r).fold(0.0, f64::max);
        if r > worst_low || !(r <= SOLUTION_TOL || r <= 2.0 * spread) {
            continue;
        }
        let x = point(idx);
        out.push((x.clone(), r));
        if r > 0.0 {
            out.push(compass(res, x, r, h)?);
        }
    }
    Ok(out)
}

/// Compass search from `x` with initial step `h`, halving on failure.
fn compass(res: &Residual, mut x: Vec<f64>, mut r: f64, mut h: f64) -> Result<(Vec<f64>, f64)> {
    let scale = 1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut evals = 0;
    while h > 1e-14 * scale && r > 0.0 && evals < 20_000 {
        let mut moved = false;
        'dirs: for i in 0..x.len() {
            for sgn in [1.0, -1.0] {
                let mut y = x.clone();
                y[i] += sgn * h;
                evals += 1;
                let ry = res(&y)?;
                if ry < r {
                    x = y;
                    r = ry;
                    moved = true;
                    break 'dirs;
                }
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    Ok((x, r))
}

#[cfg(test)]
mod tests;

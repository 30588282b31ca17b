use rayon::prelude::*;

use super::{check_anchor, Bias, RateEstimate};
use crate::error::{Error, Result};
use crate::mappings::Multifunction;

/// Largest admissible points per axis.
pub const MAX_RESOLUTION: usize = 4001;

/// Exhaustive evaluation of `dist(ȳ, F(x)) / ‖x − x̄‖` over the grid
/// `x̄ + radius·[−1, 1]^n` (`resolution` points per axis, `n ≤ 2`) restricted
/// to the punctured ball. The result has a single shell `(0, radius]`.
pub fn oracle_rate_grid(
    f: &dyn Multifunction,
    xbar: &[f64],
    ybar: &[f64],
    radius: f64,
    resolution: usize,
) -> Result<RateEstimate> {
    let n = xbar.len();
    if n == 0 || n > 2 {
        return Err(Error::invalid(format!("the grid oracle supports dimension 1 or 2, got {n}")));
    }
    if !(2..=MAX_RESOLUTION).contains(&resolution) {
        return Err(Error::invalid(format!("resolution must lie in 2..={MAX_RESOLUTION}, got {resolution}")));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::invalid(format!("radius must be positive, got {radius}")));
    }
    check_anchor(f, xbar, ybar)?;
    let norm = f.norm_in().clone();
    let step = |j: usize| radius * (2.0 * j as f64 / (resolution - 1) as f64 - 1.0);
    let rows = if n == 1 { 1 } else { resolution };
    let per_row: Vec<(f64, Vec<f64>, f64, Vec<f64>)> = (0..rows)
        .into_par_iter()
        .map(|i| -> Result<_> {
            let mut best = (f64::INFINITY, Vec::new(), f64::NEG_INFINITY, Vec::new());
            for j in 0..resolution {
                let x: Vec<f64> = if n == 1 {
                    vec![xbar[0] + step(j)]
                } else {
                    vec![xbar[0] + step(i), xbar[1] + step(j)]
                };
                let d = norm.dist(&x, xbar);
                if d == 0.0 || d > radius {
                    continue;
                }
                let v = f.dist_to_image(ybar, &x)? / d;
                if best.1.is_empty() || v < best.0 {
                    best.0 = v;
                    best.1 = x.clone();
                }
                if best.3.is_empty() || v > best.2 {
                    best.2 = v;
                    best.3 = x;
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    let mut lo = (f64::INFINITY, Vec::new());
    let mut hi = f64::NEG_INFINITY;
    for (a, xa, b, _) in per_row {
        if !xa.is_empty() && (lo.1.is_empty() || a < lo.0) {
            lo = (a, xa);
        }
        hi = hi.max(b);
    }
    Ok(RateEstimate {
        radii: vec![radius, 0.0],
        shell_min: vec![lo.0],
        shell_max: vec![hi],
        cumulative: vec![lo.0],
        extrapolated: lo.0,
        tail_value: lo.0,
        log_slope: None,
        divergent: false,
        bias: Bias::OverEstimatesLiminf,
        witnesses: vec![lo.1],
        calm_from_below: None,
        skipped: 0,
        schedule: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mappings::{SetValuedMap, SingleMap};

    #[test]
    fn grid_examples() {
        let f = SingleMap::parse("2*x1").unwrap();
        assert_eq!(oracle_rate_grid(&f, &[0.0], &[0.0], 1.0, 2001).unwrap().extrapolated, 2.0);
        let g = SingleMap::parse("norm2([x1, x2])").unwrap();
        let e = oracle_rate_grid(&g, &[0.0, 0.0], &[0.0], 0.5, 401).unwrap();
        assert!((e.extrapolated - 1.0).abs() < 1e-12);
        let f1 = SetValuedMap::parse("piecewise(x1 == 0, interval(0, 0.5), interval(1, inf))").unwrap();
        let e = oracle_rate_grid(&f1, &[0.0], &[0.0], 0.5, 2001).unwrap();
        assert_eq!(e.extrapolated, 2.0);
        assert_eq!(e.witnesses[0].len(), 1);
        assert_eq!(e.witnesses[0][0].abs(), 0.5);
    }

    #[test]
    fn rejects_high_dimension() {
        let f = SingleMap::parse("[x1, x2, x3]").unwrap();
        assert!(oracle_rate_grid(&f, &[0.0; 3], &[0.0; 3], 1.0, 11).is_err());
        let g = SingleMap::parse("x1").unwrap();
        assert!(oracle_rate_grid(&g, &[0.0], &[0.0], 1.0, 4002).is_err());
    }
}

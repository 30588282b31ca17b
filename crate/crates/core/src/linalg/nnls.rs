use super::matrix::{dot, lstsq};

/// Lawson–Hanson nonnegative least squares:
/// `min ‖Σ_j λ_j cols[j] − y‖₂` over `λ ≥ 0`.
pub fn nnls(cols: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let k = cols.len();
    let mut lambda = vec![0.0; k];
    let mut passive = vec![false; k];
    let scale = cols.iter().map(|c| dot(c, c).sqrt()).fold(0.0, f64::max).max(1e-300)
        * dot(y, y).sqrt().max(1.0);
    let tol = 1e-12 * scale;

    let residual = |lambda: &[f64]| -> Vec<f64> {
        let mut r = y.to_vec();
        for (l, c) in lambda.iter().zip(cols) {
            for (ri, ci) in r.iter_mut().zip(c) {
                *ri -= l * ci;
            }
        }
        r
    };

    for _ in 0..(3 * k + 10) {
        let r = residual(&lambda);
        let grad: Vec<f64> = cols.iter().map(|c| dot(c, &r)).collect();
        let Some(j) = (0..k)
            .filter(|&j| !passive[j] && grad[j] > tol)
            .max_by(|&a, &b| grad[a].total_cmp(&grad[b]))
        else {
            break;
        };
        passive[j] = true;

        for _ in 0..(3 * k + 10) {
            let idx: Vec<usize> = (0..k).filter(|&i| passive[i]).collect();
            let sub: Vec<Vec<f64>> = idx.iter().map(|&i| cols[i].clone()).collect();
            let z = lstsq(&sub, y);
            if z.iter().all(|v| *v > 0.0) {
                for (v, &i) in z.iter().zip(&idx) {
                    lambda[i] = *v;
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (v, &i) in z.iter().zip(&idx) {
                if *v <= 0.0 {
                    alpha = alpha.min(lambda[i] / (lambda[i] - v));
                }
            }
            for (v, &i) in z.iter().zip(&idx) {
                lambda[i] += alpha * (v - lambda[i]);
            }
            for &i in &idx {
                if lambda[i] <= 1e-15 * scale {
                    lambda[i] = 0.0;
                    passive[i] = false;
                }
            }
        }
    }
    lambda
}

use super::matrix::{dot, Matrix};

const TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Singular values of `a` (length `a.cols`, sorted descending) by one-sided
/// Jacobi rotation of the columns. When `rows < cols` the trailing values are
/// zero, matching `inf_{‖u‖=1} ‖Au‖₂ = 0` for a nontrivial kernel.
pub fn singular_values(a: &Matrix) -> Vec<f64> {
    let n = a.cols;
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.col(j)).collect();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha = dot(&cols[i], &cols[i]);
                let beta = dot(&cols[j], &cols[j]);
                let gamma = dot(&cols[i], &cols[j]);
                if gamma == 0.0 || gamma.abs() <= TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = cols.split_at_mut(j);
                for (x, y) in lo[i].iter_mut().zip(hi[0].iter_mut()) {
                    let (xi, yj) = (*x, *y);
                    *x = c * xi - s * yj;
                    *y = s * xi + c * yj;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    if a.rows < n {
        // the rotated columns span at most `rows` dimensions
        sv.sort_by(|x, y| y.total_cmp(x));
        for v in sv.iter_mut().skip(a.rows) {
            *v = 0.0;
        }
    }
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Smallest singular value, `inf_{‖u‖₂=1} ‖Au‖₂`.
pub fn sigma_min(a: &Matrix) -> f64 {
    singular_values(a).last().copied().unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal() {
        let sv = singular_values(&Matrix::diag(&[2.0, -3.0, 0.5]));
        assert_eq!(sv, vec![3.0, 2.0, 0.5]);
    }

    #[test]
    fn wide_matrix_has_zero_min() {
        let a = Matrix::from_rows(&[vec![1.0, 0.0]]).unwrap();
        assert_eq!(sigma_min(&a), 0.0);
        assert_eq!(sigma_min(&a.transpose()), 1.0);
    }

    #[test]
    fn matches_closed_form_2x2() {
        // [[1,1],[1,-1]] has both singular values sqrt(2)
        let a: Matrix = "1,1;1,-1".parse().unwrap();
        for s in singular_values(&a) {
            assert!((s - 2f64.sqrt()).abs() < 1e-14);
        }
        // [[3,0],[4,5]]: sigma^2 solves s^2 - 50 s + 225 = 0
        let b: Matrix = "3,0;4,5".parse().unwrap();
        let sv = singular_values(&b);
        assert!((sv[0] - 45f64.sqrt()).abs() < 1e-12);
        assert!((sv[1] - 5f64.sqrt()).abs() < 1e-12);
    }
}

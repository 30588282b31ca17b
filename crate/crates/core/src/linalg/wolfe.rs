use super::matrix::{dot, solve, Matrix};

/// Minimum-norm point of `conv(points)` under the Euclidean norm, by Wolfe's
/// algorithm. Returns the point and its convex weights over `points`.
pub fn min_norm_point(points: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let m = points.len();
    assert!(m > 0, "convex hull of no points");
    let d = points[0].len();
    let scale = points.iter().map(|p| dot(p, p)).fold(0.0, f64::max).max(1e-300);
    let tol = 1e-12 * scale;

    let start = (0..m)
        .min_by(|&i, &j| dot(&points[i], &points[i]).total_cmp(&dot(&points[j], &points[j])))
        .unwrap();
    let mut set = vec![start];
    let mut w = vec![1.0];
    let mut x = points[start].clone();

    for _ in 0..(50 * (m + d) + 100) {
        let xx = dot(&x, &x);
        let j = (0..m)
            .min_by(|&a, &b| dot(&x, &points[a]).total_cmp(&dot(&x, &points[b])))
            .unwrap();
        if dot(&x, &points[j]) >= xx - tol || set.contains(&j) {
            break;
        }
        set.push(j);
        w.push(0.0);

        loop {
            let v = affine_minimizer(points, &set);
            if v.iter().all(|vi| *vi > 1e-14) {
                w = v;
                x = combine(points, &set, &w, d);
                break;
            }
            let mut theta = 1.0f64;
            for (wi, vi) in w.iter().zip(&v) {
                if *vi <= 1e-14 && wi - vi > 0.0 {
                    theta = theta.min(wi / (wi - vi));
                }
            }
            for (wi, vi) in w.iter_mut().zip(&v) {
                *wi = theta * vi + (1.0 - theta) * *wi;
            }
            let mut k = 0;
            while k < set.len() {
                if w[k] <= 1e-14 {
                    set.remove(k);
                    w.remove(k);
                } else {
                    k += 1;
                }
            }
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|wi| *wi /= total);
            x = combine(points, &set, &w, d);
            if set.len() <= 1 {
                break;
            }
        }
    }

    let mut weights = vec![0.0; m];
    for (i, wi) in set.iter().zip(&w) {
        weights[*i] = *wi;
    }
    (x, weights)
}

fn combine(points: &[Vec<f64>], set: &[usize], w: &[f64], d: usize) -> Vec<f64> {
    let mut x = vec![0.0; d];
    for (i, wi) in set.iter().zip(w) {
        for (xk, pk) in x.iter_mut().zip(&points[*i]) {
            *xk += wi * pk;
        }
    }
    x
}

/// Coefficients (summing to one) of the minimum-norm point of the affine hull.
fn affine_minimizer(points: &[Vec<f64>], set: &[usize]) -> Vec<f64> {
    let k = set.len();
    let mut a = Matrix::zeros(k + 1, k + 1);
    for (r, &i) in set.iter().enumerate() {
        for (c, &j) in set.iter().enumerate() {
            a[(r, c)] = dot(&points[i], &points[j]);
        }
        a[(r, k)] = 1.0;
        a[(k, r)] = 1.0;
    }
    let mut rhs = vec![0.0; k + 1];
    rhs[k] = 1.0;
    let scale = (0..k).map(|r| a[(r, r)]).fold(0.0, f64::max).max(1e-300);
    let mut ridge = 0.0;
    loop {
        let mut b = a.clone();
        for r in 0..k {
            b[(r, r)] += ridge;
        }
        if let Some(sol) = solve(&b, &rhs) {
            return sol[..k].to_vec();
        }
        ridge = if ridge == 0.0 { 1e-13 * scale } else { ridge * 100.0 };
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_through_origin() {
        let (x, _) = min_norm_point(&[vec![1.0, 0.0], vec![-1.0, 0.0]]);
        assert!(dot(&x, &x).sqrt() < 1e-12);
    }

    #[test]
    fn segment_off_origin() {
        let (x, w) = min_norm_point(&[vec![1.0, 1.0], vec![-1.0, 1.0]]);
        assert!((x[0]).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
        assert!((w[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn triangle_vertex_and_face() {
        let (x, _) = min_norm_point(&[vec![2.0, 1.0], vec![3.0, 0.0], vec![2.0, 3.0]]);
        assert!((x[0] - 2.0).abs() < 1e-9 && (x[1] - 1.0).abs() < 1e-9);
        let brute = brute_force(&[vec![2.0, 1.0], vec![3.0, 0.0], vec![2.0, 3.0]]);
        assert!((dot(&x, &x).sqrt() - brute).abs() < 1e-4);
    }

    fn brute_force(p: &[Vec<f64>]) -> f64 {
        let mut best = f64::INFINITY;
        let n = 400;
        for i in 0..=n {
            for j in 0..=(n - i) {
                let a = i as f64 / n as f64;
                let b = j as f64 / n as f64;
                let c = 1.0 - a - b;
                let x = a * p[0][0] + b * p[1][0] + c * p[2][0];
                let y = a * p[0][1] + b * p[1][1] + c * p[2][1];
                best = best.min((x * x + y * y).sqrt());
            }
        }
        best
    }
}

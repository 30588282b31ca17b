use super::matrix::{dot, solve, Matrix};

/// Euclidean projection of `y` onto `{x : ⟨a_i, x⟩ ≤ b_i}` by the dual
/// active-set method of Goldfarb and Idnani (identity Hessian). Returns
/// `None` when the polyhedron is empty.
pub fn project_polyhedron(y: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = y.len();
    let q = a.len();
    // constraints in the form ⟨n_i, x⟩ ≥ c_i
    let normals: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|v| -v).collect()).collect();
    let c: Vec<f64> = b.iter().map(|v| -v).collect();
    let scale = 1.0 + y.iter().fold(0.0f64, |m, v| m.max(v.abs())) + c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-12 * scale;

    let mut x = y.to_vec();
    let mut active: Vec<usize> = Vec::new();
    let mut u: Vec<f64> = Vec::new();
    let slack = |x: &[f64], i: usize| dot(&normals[i], x) - c[i];

    for _ in 0..(20 * (q + n) + 50) {
        // most violated constraint
        let p = match (0..q)
            .filter(|&i| !active.contains(&i))
            .map(|i| (i, slack(&x, i) / (1.0 + dot(&normals[i], &normals[i]).sqrt())))
            .filter(|(_, s)| *s < -tol)
            .min_by(|a, b| a.1.total_cmp(&b.1))
        {
            Some((p, _)) => p,
            None => return Some(x),
        };
        let mut up = u.clone();
        up.push(0.0);

        let mut added = false;
        for _ in 0..(q + n + 5) {
            let (z, r) = step_direction(&normals, &active, &normals[p], n);
            let zz = dot(&z, &normals[p]);
            // partial step limited by active multipliers
            let mut t1 = f64::INFINITY;
            let mut k_drop = None;
            for (j, rj) in r.iter().enumerate() {
                if *rj > 1e-14 {
                    let ratio = up[j] / rj;
                    if ratio < t1 {
                        t1 = ratio;
                        k_drop = Some(j);
                    }
                }
            }
            let full_possible = zz > 1e-14 * dot(&normals[p], &normals[p]).max(1e-300);
            let t2 = if full_possible {
                -slack(&x, p) / zz
            } else {
                f64::INFINITY
            };
            let t = t1.min(t2);
            if !t.is_finite() {
                return None;
            }
            if full_possible {
                for (xi, zi) in x.iter_mut().zip(&z) {
                    *xi += t * zi;
                }
            }
            for (j, rj) in r.iter().enumerate() {
                up[j] -= t * rj;
            }
            let last = up.len() - 1;
            up[last] += t;
            if full_possible && t == t2 {
                active.push(p);
                u = up;
                added = true;
                break;
            }
            let k = k_drop.expect("partial step without a blocking multiplier");
            active.remove(k);
            up.remove(k);
        }
        if !added {
            return None;
        }
    }
    Some(x)
}

/// Primal direction `z = (I − N N⁺) n_p` and dual direction `r = N⁺ n_p`
/// for the active normals `N`.
fn step_direction(normals: &[Vec<f64>], active: &[usize], np: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let k = active.len();
    if k == 0 {
        return (np.to_vec(), Vec::new());
    }
    let mut g = Matrix::zeros(k, k);
    for (r, &i) in active.iter().enumerate() {
        for (c, &j) in active.iter().enumerate() {
            g[(r, c)] = dot(&normals[i], &normals[j]);
        }
    }
    let rhs: Vec<f64> = active.iter().map(|&i| dot(&normals[i], np)).collect();
    let r = solve(&g, &rhs).unwrap_or_else(|| {
        let mut g2 = g.clone();
        let s = (0..k).map(|i| g[(i, i)]).fold(0.0, f64::max);
        for i in 0..k {
            g2[(i, i)] += 1e-12 * s;
        }
        solve(&g2, &rhs).unwrap_or(vec![0.0; k])
    });
    let mut z = np.to_vec();
    for (rj, &i) in r.iter().zip(active) {
        for (zk, nk) in z.iter_mut().zip(&normals[i]) {
            *zk -= rj * nk;
        }
    }
    debug_assert_eq!(z.len(), n);
    (z, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn halfspace() {
        let x = project_polyhedron(&[2.0, 2.0], &[vec![1.0, 1.0]], &[2.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn corner_of_box() {
        let a = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0], vec![0.0, -1.0]];
        let b = vec![1.0, 1.0, 1.0, 1.0];
        let x = project_polyhedron(&[3.0, -5.0], &a, &b).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] + 1.0).abs() < 1e-12);
        let inside = project_polyhedron(&[0.2, 0.3], &a, &b).unwrap();
        assert_eq!(inside, vec![0.2, 0.3]);
    }

    #[test]
    fn empty_polyhedron() {
        let a = vec![vec![1.0], vec![-1.0]];
        assert!(project_polyhedron(&[0.0], &a, &[-1.0, -1.0]).is_none());
    }

    #[test]
    fn degenerate_redundant_rows() {
        let a = vec![vec![1.0, 1.0], vec![2.0, 2.0], vec![1.0, 0.0]];
        let x = project_polyhedron(&[3.0, 3.0], &a, &[2.0, 4.0, 0.5]).unwrap();
        // solution of min ‖x−y‖ on x1 ≤ 0.5, x1 + x2 ≤ 2
        assert!((x[0] - 0.5).abs() < 1e-9 && (x[1] - 1.5).abs() < 1e-9);
    }

    proptest! {
        // KKT: feasible, and y − x lies in the cone of active normals, checked
        // through optimality against random feasible points.
        #[test]
        fn projection_is_optimal(
            y in prop::collection::vec(-3.0f64..3.0, 3),
            rows in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 1..7),
            probe in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 20),
        ) {
            // polyhedron contains the origin so it is nonempty
            let b: Vec<f64> = rows.iter().map(|r| 0.1 + r.iter().map(|v| v.abs()).sum::<f64>() * 0.3).collect();
            let x = project_polyhedron(&y, &rows, &b).unwrap();
            for (r, bi) in rows.iter().zip(&b) {
                prop_assert!(dot(r, &x) <= bi + 1e-9);
            }
            let d = |p: &[f64]| p.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
            let dx = d(&x);
            for pr in &probe {
                let feasible = rows.iter().zip(&b).all(|(r, bi)| dot(r, pr) <= *bi);
                if feasible {
                    prop_assert!(dx <= d(pr) + 1e-9);
                }
                // also along segments toward x
                let mid: Vec<f64> = pr.iter().zip(&x).map(|(a, b)| 0.5 * (a + b)).collect();
                let feasible_mid = rows.iter().zip(&b).all(|(r, bi)| dot(r, &mid) <= *bi);
                if feasible_mid {
                    prop_assert!(dx <= d(&mid) + 1e-9);
                }
            }
        }
    }
}

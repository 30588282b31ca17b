use crate::spaces::Norm;

/// Compass search for a local minimum of `f` on the unit sphere of `norm`,
/// starting at `u0`. Trial points are renormalized onto the sphere, so every
/// returned value is attained by a unit vector and never undercuts the true
/// infimum.
pub fn compass_on_sphere(
    f: &dyn Fn(&[f64]) -> f64,
    u0: &[f64],
    norm: &Norm,
    step0: f64,
    min_step: f64,
    max_evals: usize,
) -> (Vec<f64>, f64) {
    let n = u0.len();
    let mut u = u0.to_vec();
    let mut best = f(&u);
    let mut h = step0;
    let mut evals = 1;
    while h > min_step && evals < max_evals {
        let mut improved = false;
        'dirs: for i in 0..n {
            for sign in [1.0, -1.0] {
                let mut trial = u.clone();
                trial[i] += sign * h;
                let Some(t) = norm.normalize(&trial) else {
                    continue;
                };
                let v = f(&t);
                evals += 1;
                if v < best {
                    best = v;
                    u = t;
                    improved = true;
                    break 'dirs;
                }
                if evals >= max_evals {
                    break 'dirs;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    (u, best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_uniform_vector_on_l1_sphere() {
        let f = |u: &[f64]| u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let (u, v) = compass_on_sphere(&f, &[1.0, 0.0, 0.0, 0.0], &Norm::l1(), 0.5, 1e-10, 100_000);
        assert!((v - 0.25).abs() < 1e-6, "{v} at {u:?}");
    }
}

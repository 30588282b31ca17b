use rand::Rng;

use super::SamplingSchedule;
use crate::rng;
use crate::spaces::{angle_point, random_direction, Norm};

/// Deterministic points `x` with `r_in < ‖x − x̄‖ ≤ r_out` for shell `k`.
///
/// One dimension uses symmetric pairs `x̄ ± t`, the first pair on the outer
/// radius. Two dimensions use the angular grid with random radii. Higher
/// dimensions take the signed axes first, then random directions.
pub(crate) fn shell_points(xbar: &[f64], norm: &Norm, s: &SamplingSchedule, k: usize) -> Vec<Vec<f64>> {
    let dim = xbar.len();
    let r_out = s.radius(k);
    let r_in = s.radius(k + 1);
    let mut r = rng::stream(s.seed, k as u64 + 1);
    let mut radius = |first: bool| -> f64 {
        if first {
            r_out
        } else {
            // 1 − U lies in (0, 1], keeping the radius in (r_in, r_out]
            let u: f64 = r.random();
            r_in + (r_out - r_in) * (1.0 - u)
        }
    };
    let n = s.points;
    let mut out = Vec::with_capacity(n);
    let place = |u: &[f64], t: f64| -> Vec<f64> { xbar.iter().zip(u).map(|(a, b)| a + t * b).collect() };
    match dim {
        1 => {
            let unit = 1.0 / norm.weight(0);
            let mut j = 0;
            while out.len() < n {
                let t = radius(j == 0);
                out.push(place(&[unit], t));
                if out.len() < n {
                    out.push(place(&[-unit], t));
                }
                j += 1;
            }
        }
        2 => {
            for j in 0..n {
                let u = angle_point(j, n, norm);
                let t = radius(j == 0);
                out.push(place(&u, t));
            }
        }
        _ => {
            let mut dirs: Vec<Vec<f64>> = (0..(2 * dim).min(n))
                .map(|i| {
                    let mut e = vec![0.0; dim];
                    e[i / 2] = if i % 2 == 0 { 1.0 } else { -1.0 };
                    norm.normalize(&e).expect("axis vector is nonzero")
                })
                .collect();
            let mut dr = rng::stream(rng::mix_seed(s.seed, 0xD1EC), k as u64);
            while dirs.len() < n {
                if let Some(u) = random_direction(&mut dr, dim, norm) {
                    dirs.push(u);
                }
            }
            for (j, u) in dirs.iter().enumerate() {
                let t = radius(j == 0);
                out.push(place(u, t));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_lie_in_their_shell() {
        let s = SamplingSchedule {
            points: 64,
            ..SamplingSchedule::default()
        };
        for dim in 1..=4 {
            for norm in [Norm::l1(), Norm::l2(), Norm::linf()] {
                let xbar = vec![0.3; dim];
                for k in 0..s.shells {
                    let pts = shell_points(&xbar, &norm, &s, k);
                    assert_eq!(pts.len(), 64);
                    for p in &pts {
                        let d = norm.dist(p, &xbar);
                        assert!(d > s.radius(k + 1) && d <= s.radius(k) * (1.0 + 1e-12), "dim {dim} shell {k}: {d}");
                    }
                }
            }
        }
    }

    #[test]
    fn first_pair_sits_on_the_outer_radius() {
        let s = SamplingSchedule::default();
        let pts = shell_points(&[0.0], &Norm::l2(), &s, 3);
        assert_eq!(pts[0], vec![s.radius(3)]);
        assert_eq!(pts[1], vec![-s.radius(3)]);
    }
}

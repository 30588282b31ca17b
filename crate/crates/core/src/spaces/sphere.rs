use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use super::norm::{Norm, NormKind};
use crate::error::{Error, Result};
use crate::rng;

/// Deterministic points on the unit sphere of `norm` in ℝ^dim.
///
/// * `dim = 1`: alternating `+1, −1` (scaled by the weight).
/// * `dim = 2`: a uniform angular grid of `count` angles starting at angle 0,
///   so the axis points appear whenever `count` is a multiple of 4.
/// * `dim ≥ 3`: the `2·dim` signed axis directions first, then random
///   directions drawn from `seed`.
pub fn unit_sphere_samples(dim: usize, norm: &Norm, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if dim == 0 || count == 0 {
        return Err(Error::invalid("sphere sampling needs dim ≥ 1 and count ≥ 1"));
    }
    let mut out = Vec::with_capacity(count);
    match dim {
        1 => {
            let w = norm.weight(0);
            for i in 0..count {
                out.push(vec![if i % 2 == 0 { 1.0 / w } else { -1.0 / w }]);
            }
        }
        2 => {
            for j in 0..count {
                out.push(angle_point(j, count, norm));
            }
        }
        _ => {
            for i in 0..(2 * dim).min(count) {
                let mut e = vec![0.0; dim];
                e[i / 2] = if i % 2 == 0 { 1.0 } else { -1.0 };
                out.push(norm.normalize(&e).expect("axis vector is nonzero"));
            }
            let mut r = rng::stream(seed, 0);
            while out.len() < count {
                if let Some(u) = random_direction(&mut r, dim, norm) {
                    out.push(u);
                }
            }
        }
    }
    Ok(out)
}

/// Grid point `j` of `count` equally spaced angles, normalized for `norm`.
pub(crate) fn angle_point(j: usize, count: usize, norm: &Norm) -> Vec<f64> {
    let th = std::f64::consts::TAU * j as f64 / count as f64;
    let (mut s, mut c) = th.sin_cos();
    // exact axis points at multiples of a quarter turn
    if (4 * j) % count == 0 {
        match (4 * j / count) % 4 {
            0 => (c, s) = (1.0, 0.0),
            1 => (c, s) = (0.0, 1.0),
            2 => (c, s) = (-1.0, 0.0),
            _ => (c, s) = (0.0, -1.0),
        }
    }
    norm.normalize(&[c, s]).expect("unit circle point is nonzero")
}

/// A random unit vector for `norm`: exponential magnitudes with random signs
/// for `l1` (uniform on the cross-polytope surface), Gaussian otherwise.
pub(crate) fn random_direction<R: Rng>(r: &mut R, dim: usize, norm: &Norm) -> Option<Vec<f64>> {
    let v: Vec<f64> = match norm.kind {
        NormKind::L1 => (0..dim)
            .map(|_| {
                let m: f64 = r.sample(Exp1);
                if r.random::<bool>() {
                    m
                } else {
                    -m
                }
            })
            .collect(),
        _ => (0..dim).map(|_| r.sample::<f64, _>(StandardNormal)).collect(),
    };
    norm.normalize(&v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_sphere() {
        let s = unit_sphere_samples(1, &Norm::linf(), 7, 3).unwrap();
        assert!(s.iter().all(|u| u[0] == 1.0 || u[0] == -1.0));
    }

    #[test]
    fn axis_points_in_planar_grid() {
        let s = unit_sphere_samples(2, &Norm::l2(), 4, 0).unwrap();
        for p in [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]] {
            assert!(s.iter().any(|u| u[..] == p[..]), "{p:?} missing from {s:?}");
        }
    }

    #[test]
    fn l1_samples_on_sphere() {
        let s = unit_sphere_samples(3, &Norm::l1(), 1000, 11).unwrap();
        assert_eq!(s.len(), 1000);
        for u in &s {
            let n: f64 = u.iter().map(|v| v.abs()).sum();
            assert!((n - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = unit_sphere_samples(4, &Norm::l2(), 50, 9).unwrap();
        let b = unit_sphere_samples(4, &Norm::l2(), 50, 9).unwrap();
        let c = unit_sphere_samples(4, &Norm::l2(), 50, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}

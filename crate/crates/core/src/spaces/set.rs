use std::fmt;

use super::norm::{Norm, NormKind};
use crate::error::{Error, Result};
use crate::linalg::{dot, min_norm_point, nnls, project_polyhedron};

/// Closed subsets of ℝᵐ with distance oracles. Half-open sets are stored as
/// their closures.
#[derive(Debug, Clone, PartialEq)]
pub enum SetDescriptor {
    Empty,
    Points(Vec<Vec<f64>>),
    /// Sorted, disjoint closed intervals on the real line; endpoints may be
    /// infinite.
    Intervals(Vec<(f64, f64)>),
    Ball {
        center: Vec<f64>,
        radius: f64,
        norm: Norm,
    },
    /// `{x : ⟨a_i, x⟩ ≤ b_i}`.
    Polyhedron { a: Vec<Vec<f64>>, b: Vec<f64> },
    /// `apex + cone(generators)`.
    Cone {
        apex: Vec<f64>,
        generators: Vec<Vec<f64>>,
    },
    /// Convex hull of finitely many points.
    Hull(Vec<Vec<f64>>),
    /// Axis-aligned box `[lo, hi]`; bounds may be infinite.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Union(Vec<SetDescriptor>),
    Translate(Box<SetDescriptor>, Vec<f64>),
    /// `S + r·B` with `B` the closed unit ball of `norm`.
    Inflate(Box<SetDescriptor>, f64, Norm),
}

impl SetDescriptor {
    pub fn point(p: Vec<f64>) -> Self {
        SetDescriptor::Points(vec![p])
    }

    /// Normalized union of closed intervals. Intervals with `lo > hi` are
    /// empty and dropped.
    pub fn intervals(mut iv: Vec<(f64, f64)>) -> Result<Self> {
        if iv.iter().any(|(a, b)| a.is_nan() || b.is_nan()) {
            return Err(Error::invalid("interval endpoint is NaN"));
        }
        iv.retain(|(a, b)| a <= b && !(a.is_infinite() && a == b));
        if iv.is_empty() {
            return Ok(SetDescriptor::Empty);
        }
        iv.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(iv.len());
        for (a, b) in iv {
            match out.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => out.push((a, b)),
            }
        }
        Ok(SetDescriptor::Intervals(out))
    }

    /// Union that merges members which are all intervals (or empty) into a
    /// single normalized interval list.
    pub fn union(parts: Vec<SetDescriptor>) -> Result<Self> {
        let mut iv = Vec::new();
        for p in &parts {
            match p {
                SetDescriptor::Intervals(v) => iv.extend_from_slice(v),
                SetDescriptor::Empty => {}
                _ => return Ok(SetDescriptor::Union(parts)),
            }
        }
        SetDescriptor::intervals(iv)
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        SetDescriptor::intervals(vec![(lo, hi)])
    }

    /// Dimension of the ambient space, `None` for the empty set and for
    /// unions of empty sets.
    pub fn dim(&self) -> Option<usize> {
        match self {
            SetDescriptor::Empty => None,
            SetDescriptor::Points(p) | SetDescriptor::Hull(p) => p.first().map(Vec::len),
            SetDescriptor::Intervals(_) => Some(1),
            SetDescriptor::Ball { center, .. } => Some(center.len()),
            SetDescriptor::Polyhedron { a, .. } => a.first().map(Vec::len),
            SetDescriptor::Cone { apex, .. } => Some(apex.len()),
            SetDescriptor::Box { lo, .. } => Some(lo.len()),
            SetDescriptor::Union(parts) => parts.iter().find_map(SetDescriptor::dim),
            SetDescriptor::Translate(s, shift) => s.dim().or(Some(shift.len())),
            SetDescriptor::Inflate(s, _, _) => s.dim(),
        }
    }

    /// Checks internal consistency: matching dimensions, nonnegative radii.
    pub fn validate(&self) -> Result<()> {
        let same = |vs: &[Vec<f64>], what: &str| -> Result<()> {
            if let Some(first) = vs.first() {
                for v in vs {
                    if v.len() != first.len() {
                        return Err(Error::dim(what.to_string(), first.len(), v.len()));
                    }
                }
            }
            Ok(())
        };
        match self {
            SetDescriptor::Empty | SetDescriptor::Intervals(_) => Ok(()),
            SetDescriptor::Points(p) => same(p, "point list"),
            SetDescriptor::Hull(p) => {
                if p.is_empty() {
                    return Err(Error::invalid("hull of no points"));
                }
                same(p, "hull points")
            }
            SetDescriptor::Ball { radius, .. } => {
                if *radius < 0.0 || radius.is_nan() {
                    Err(Error::invalid("ball radius must be nonnegative"))
                } else {
                    Ok(())
                }
            }
            SetDescriptor::Polyhedron { a, b } => {
                same(a, "polyhedron rows")?;
                if a.len() != b.len() {
                    return Err(Error::dim("polyhedron offsets", a.len(), b.len()));
                }
                Ok(())
            }
            SetDescriptor::Cone { apex, generators } => {
                for g in generators {
                    if g.len() != apex.len() {
                        return Err(Error::dim("cone generator", apex.len(), g.len()));
                    }
                }
                Ok(())
            }
            SetDescriptor::Box { lo, hi } => {
                if lo.len() != hi.len() {
                    return Err(Error::dim("box bounds", lo.len(), hi.len()));
                }
                Ok(())
            }
            SetDescriptor::Union(parts) => {
                let mut d = None;
                for p in parts {
                    p.validate()?;
                    match (d, p.dim()) {
                        (Some(a), Some(b)) if a != b => return Err(Error::dim("union member", a, b)),
                        (None, Some(b)) => d = Some(b),
                        _ => {}
                    }
                }
                Ok(())
            }
            SetDescriptor::Translate(s, shift) => {
                s.validate()?;
                match s.dim() {
                    Some(d) if d != shift.len() => Err(Error::dim("translation", d, shift.len())),
                    _ => Ok(()),
                }
            }
            SetDescriptor::Inflate(s, r, _) => {
                if *r < 0.0 || r.is_nan() {
                    return Err(Error::invalid("inflation radius must be nonnegative"));
                }
                s.validate()
            }
        }
    }

    pub fn translate(self, shift: Vec<f64>) -> Self {
        SetDescriptor::Translate(Box::new(self), shift)
    }

    /// Distance from `y` to the set under `norm`; `+∞` for the empty set.
    pub fn dist(&self, y: &[f64], norm: &Norm) -> Result<f64> {
        if let Some(d) = self.dim() {
            if d != y.len() {
                return Err(Error::dim("distance query", d, y.len()));
            }
        }
        self.dist_unchecked(y, norm)
    }

    fn dist_unchecked(&self, y: &[f64], norm: &Norm) -> Result<f64> {
        match self {
            SetDescriptor::Empty => Ok(f64::INFINITY),
            SetDescriptor::Points(ps) => Ok(ps
                .iter()
                .map(|p| norm.dist(y, p))
                .fold(f64::INFINITY, f64::min)),
            SetDescriptor::Intervals(iv) => {
                let w = norm.weight(0);
                let t = y[0];
                let d = iv
                    .iter()
                    .map(|&(a, b)| {
                        if t < a {
                            a - t
                        } else if t > b {
                            t - b
                        } else {
                            0.0
                        }
                    })
                    .fold(f64::INFINITY, f64::min);
                Ok(w * d)
            }
            SetDescriptor::Ball {
                center,
                radius,
                norm: bn,
            } => {
                if bn == norm || y.len() == 1 {
                    let scale = if y.len() == 1 { norm.weight(0) / bn.weight(0) } else { 1.0 };
                    let d = bn.dist(y, center) - radius;
                    Ok((d * scale).max(0.0))
                } else {
                    Err(no_oracle("ball", bn, norm))
                }
            }
            SetDescriptor::Translate(s, shift) => {
                let z: Vec<f64> = y.iter().zip(shift).map(|(a, b)| a - b).collect();
                s.dist_unchecked(&z, norm)
            }
            SetDescriptor::Inflate(s, r, bn) => {
                if bn == norm || y.len() == 1 {
                    let scale = if y.len() == 1 { norm.weight(0) / bn.weight(0) } else { 1.0 };
                    Ok((s.dist_unchecked(y, norm)? - r * scale).max(0.0))
                } else {
                    Err(no_oracle("inflated set", bn, norm))
                }
            }
            SetDescriptor::Union(parts) => {
                let mut best = f64::INFINITY;
                for p in parts {
                    best = best.min(p.dist_unchecked(y, norm)?);
                }
                Ok(best)
            }
            SetDescriptor::Box { lo, hi } => {
                let gaps: Vec<f64> = y
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .map(|(t, (a, b))| {
                        if a > b {
                            f64::INFINITY
                        } else if t < a {
                            a - t
                        } else if t > b {
                            t - b
                        } else {
                            0.0
                        }
                    })
                    .collect();
                if gaps.iter().any(|g| g.is_infinite()) {
                    return Ok(f64::INFINITY);
                }
                Ok(norm.eval(&gaps))
            }
            SetDescriptor::Polyhedron { a, b } => {
                if y.len() == 1 {
                    return polyhedron_as_interval(a, b)?.dist_unchecked(y, norm);
                }
                require_l2("polyhedron", norm)?;
                let w = weights(norm, y.len());
                let yw: Vec<f64> = y.iter().zip(&w).map(|(v, wi)| v * wi).collect();
                let aw: Vec<Vec<f64>> = a
                    .iter()
                    .map(|row| row.iter().zip(&w).map(|(v, wi)| v / wi).collect())
                    .collect();
                Ok(match project_polyhedron(&yw, &aw, b) {
                    Some(x) => euclid(&yw, &x),
                    None => f64::INFINITY,
                })
            }
            SetDescriptor::Cone { apex, generators } => {
                let z: Vec<f64> = y.iter().zip(apex).map(|(a, b)| a - b).collect();
                if y.len() == 1 {
                    let pos = generators.iter().any(|g| g[0] > 0.0);
                    let neg = generators.iter().any(|g| g[0] < 0.0);
                    let iv = match (pos, neg) {
                        (true, true) => (f64::NEG_INFINITY, f64::INFINITY),
                        (true, false) => (0.0, f64::INFINITY),
                        (false, true) => (f64::NEG_INFINITY, 0.0),
                        (false, false) => (0.0, 0.0),
                    };
                    return SetDescriptor::interval(iv.0, iv.1)?.dist_unchecked(&z, norm);
                }
                require_l2("cone", norm)?;
                if generators.is_empty() {
                    return Ok(norm.eval(&z));
                }
                let w = weights(norm, y.len());
                let zw: Vec<f64> = z.iter().zip(&w).map(|(v, wi)| v * wi).collect();
                let gw: Vec<Vec<f64>> = generators
                    .iter()
                    .map(|g| g.iter().zip(&w).map(|(v, wi)| v * wi).collect())
                    .collect();
                let lambda = nnls(&gw, &zw);
                let mut r = zw.clone();
                for (l, g) in lambda.iter().zip(&gw) {
                    for (ri, gi) in r.iter_mut().zip(g) {
                        *ri -= l * gi;
                    }
                }
                Ok(dot(&r, &r).sqrt())
            }
            SetDescriptor::Hull(ps) => {
                if y.len() == 1 {
                    let lo = ps.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
                    let hi = ps.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
                    return SetDescriptor::interval(lo, hi)?.dist_unchecked(y, norm);
                }
                require_l2("convex hull", norm)?;
                let w = weights(norm, y.len());
                let shifted: Vec<Vec<f64>> = ps
                    .iter()
                    .map(|p| p.iter().zip(y).zip(&w).map(|((a, b), wi)| (a - b) * wi).collect())
                    .collect();
                let (x, _) = min_norm_point(&shifted);
                Ok(dot(&x, &x).sqrt())
            }
        }
    }

    /// Membership up to `tol` in the distance of `norm`.
    pub fn contains(&self, y: &[f64], norm: &Norm, tol: f64) -> Result<bool> {
        Ok(self.dist(y, norm)? <= tol)
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn weights(norm: &Norm, n: usize) -> Vec<f64> {
    (0..n).map(|i| norm.weight(i)).collect()
}

fn require_l2(what: &str, norm: &Norm) -> Result<()> {
    if norm.kind == NormKind::L2 {
        Ok(())
    } else {
        Err(Error::NoExactOracle(format!(
            "distance to a {what} under the {} norm",
            norm.kind.tag()
        )))
    }
}

fn no_oracle(what: &str, set_norm: &Norm, query: &Norm) -> Error {
    Error::NoExactOracle(format!(
        "distance to a {what} built with {set_norm} measured in {query}"
    ))
}

fn polyhedron_as_interval(a: &[Vec<f64>], b: &[f64]) -> Result<SetDescriptor> {
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for (row, bi) in a.iter().zip(b) {
        let c = row[0];
        if c > 0.0 {
            hi = hi.min(bi / c);
        } else if c < 0.0 {
            lo = lo.max(bi / c);
        } else if *bi < 0.0 {
            return Ok(SetDescriptor::Empty);
        }
    }
    SetDescriptor::interval(lo, hi)
}

fn write_num(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    if v == f64::INFINITY {
        write!(f, "inf")
    } else if v == f64::NEG_INFINITY {
        write!(f, "-inf")
    } else {
        write!(f, "{v:?}")
    }
}

fn write_vec(f: &mut fmt::Formatter<'_>, v: &[f64]) -> fmt::Result {
    write!(f, "[")?;
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write_num(f, *x)?;
    }
    write!(f, "]")
}

fn write_list(f: &mut fmt::Formatter<'_>, vs: &[Vec<f64>]) -> fmt::Result {
    for (i, v) in vs.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write_vec(f, v)?;
    }
    Ok(())
}

/// Prints in the set-template syntax accepted by problem documents.
impl fmt::Display for SetDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetDescriptor::Empty => write!(f, "empty"),
            SetDescriptor::Points(ps) => {
                write!(f, "points(")?;
                write_list(f, ps)?;
                write!(f, ")")
            }
            SetDescriptor::Intervals(iv) => {
                let one = |f: &mut fmt::Formatter<'_>, (a, b): (f64, f64)| -> fmt::Result {
                    write!(f, "interval(")?;
                    write_num(f, a)?;
                    write!(f, ", ")?;
                    write_num(f, b)?;
                    write!(f, ")")
                };
                if iv.len() == 1 {
                    return one(f, iv[0]);
                }
                write!(f, "union(")?;
                for (i, x) in iv.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    one(f, *x)?;
                }
                write!(f, ")")
            }
            SetDescriptor::Ball {
                center,
                radius,
                norm,
            } => {
                write!(f, "ball(")?;
                write_vec(f, center)?;
                write!(f, ", ")?;
                write_num(f, *radius)?;
                write!(f, ", {})", norm.kind.tag())
            }
            SetDescriptor::Polyhedron { a, b } => {
                write!(f, "polyhedron(")?;
                let rows: Vec<Vec<f64>> = a
                    .iter()
                    .zip(b)
                    .map(|(r, bi)| r.iter().copied().chain([*bi]).collect())
                    .collect();
                write_list(f, &rows)?;
                write!(f, ")")
            }
            SetDescriptor::Cone { apex, generators } => {
                write!(f, "cone(")?;
                write_vec(f, apex)?;
                for g in generators {
                    write!(f, ", ")?;
                    write_vec(f, g)?;
                }
                write!(f, ")")
            }
            SetDescriptor::Hull(ps) => {
                write!(f, "hull(")?;
                write_list(f, ps)?;
                write!(f, ")")
            }
            SetDescriptor::Box { lo, hi } => {
                write!(f, "box(")?;
                write_vec(f, lo)?;
                write!(f, ", ")?;
                write_vec(f, hi)?;
                write!(f, ")")
            }
            SetDescriptor::Union(parts) => {
                write!(f, "union(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ")")
            }
            SetDescriptor::Translate(s, shift) => {
                write!(f, "translate({s}, ")?;
                write_vec(f, shift)?;
                write!(f, ")")
            }
            SetDescriptor::Inflate(s, r, n) => {
                write!(f, "inflate({s}, ")?;
                write_num(f, *r)?;
                write!(f, ", {})", n.kind.tag())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const INF: f64 = f64::INFINITY;

    #[test]
    fn empty_is_infinitely_far() {
        assert_eq!(SetDescriptor::Empty.dist(&[0.0], &Norm::l2()).unwrap(), INF);
    }

    #[test]
    fn half_line() {
        let s = SetDescriptor::interval(1.0, INF).unwrap();
        assert_eq!(s.dist(&[0.0], &Norm::l2()).unwrap(), 1.0);
    }

    #[test]
    fn inflated_interval_matches_brute_force() {
        let s = SetDescriptor::Inflate(Box::new(SetDescriptor::interval(2.0, 3.0).unwrap()), 0.5, Norm::l2());
        let d = s.dist(&[0.0], &Norm::l2()).unwrap();
        // brute force: min |0 − s − t| over s ∈ [2,3], |t| ≤ 0.5
        let mut brute = INF;
        for i in 0..=200 {
            for j in 0..=200 {
                let sv = 2.0 + i as f64 / 200.0;
                let t = -0.5 + j as f64 / 200.0;
                brute = brute.min((sv + t).abs());
            }
        }
        assert_eq!(d, 1.5);
        assert!((d - brute).abs() < 1e-12);
    }

    #[test]
    fn intervals_normalize() {
        let s = SetDescriptor::intervals(vec![(3.0, 4.0), (0.0, 1.0), (0.5, 2.0)]).unwrap();
        assert_eq!(s, SetDescriptor::Intervals(vec![(0.0, 2.0), (3.0, 4.0)]));
        assert_eq!(SetDescriptor::interval(1.0, 0.0).unwrap(), SetDescriptor::Empty);
    }

    #[test]
    fn polyhedron_requires_l2_in_two_dims() {
        let p = SetDescriptor::Polyhedron {
            a: vec![vec![1.0, 0.0]],
            b: vec![0.0],
        };
        assert!(matches!(p.dist(&[1.0, 0.0], &Norm::l1()), Err(Error::NoExactOracle(_))));
        assert_eq!(p.dist(&[1.0, 5.0], &Norm::l2()).unwrap(), 1.0);
        // 1-D polyhedra reduce to intervals under every norm
        let q = SetDescriptor::Polyhedron {
            a: vec![vec![-2.0]],
            b: vec![-2.0],
        };
        assert_eq!(q.dist(&[0.0], &Norm::linf()).unwrap(), 1.0);
    }

    #[test]
    fn cone_and_hull() {
        let c = SetDescriptor::Cone {
            apex: vec![0.0, 0.0],
            generators: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        };
        assert!((c.dist(&[-3.0, -4.0], &Norm::l2()).unwrap() - 5.0).abs() < 1e-12);
        assert_eq!(c.dist(&[1.0, 2.0], &Norm::l2()).unwrap(), 0.0);
        let h = SetDescriptor::Hull(vec![vec![1.0, 0.0], vec![-1.0, 0.0]]);
        assert!(h.dist(&[0.0, 0.0], &Norm::l2()).unwrap() < 1e-12);
        assert!((h.dist(&[0.0, 2.0], &Norm::l2()).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn box_under_every_norm() {
        let b = SetDescriptor::Box {
            lo: vec![0.0, 0.0],
            hi: vec![1.0, INF],
        };
        assert_eq!(b.dist(&[2.0, -1.0], &Norm::l1()).unwrap(), 2.0);
        assert_eq!(b.dist(&[2.0, -1.0], &Norm::linf()).unwrap(), 1.0);
        assert!((b.dist(&[2.0, -1.0], &Norm::l2()).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let s = SetDescriptor::point(vec![0.0, 0.0]);
        assert!(matches!(s.dist(&[0.0], &Norm::l2()), Err(Error::DimensionMismatch { .. })));
    }

    fn small_set_2d() -> impl Strategy<Value = SetDescriptor> {
        let pt = prop::collection::vec(-3.0f64..3.0, 2);
        prop_oneof![
            prop::collection::vec(pt.clone(), 1..4).prop_map(SetDescriptor::Points),
            (pt.clone(), 0.0f64..2.0).prop_map(|(c, r)| SetDescriptor::Ball {
                center: c,
                radius: r,
                norm: Norm::l2()
            }),
            prop::collection::vec(pt.clone(), 1..5).prop_map(SetDescriptor::Hull),
            (pt.clone(), prop::collection::vec(pt.clone(), 1..3))
                .prop_map(|(apex, generators)| SetDescriptor::Cone { apex, generators }),
            (pt.clone(), pt).prop_map(|(a, b)| {
                let lo: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x.min(*y)).collect();
                let hi: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect();
                SetDescriptor::Box { lo, hi }
            }),
        ]
    }

    fn dyadic(k: i32) -> f64 {
        k as f64 / 8.0
    }

    // Brute force over dyadic grids: with endpoints, queries and radii on the
    // grid, the optimum is attained at grid points.
    fn grid_dist_1d(s: &SetDescriptor, y: f64, r: f64) -> f64 {
        let mut best = INF;
        for i in -160..=160 {
            let sv = i as f64 / 16.0;
            if s.dist(&[sv], &Norm::l2()).unwrap() != 0.0 {
                continue;
            }
            for j in -32..=32 {
                let t = j as f64 / 16.0;
                if t.abs() <= r {
                    best = best.min((y - sv - t).abs());
                }
            }
        }
        best
    }

    fn grid_dist_2d(lo: &[f64], hi: &[f64], y: &[f64], r: f64, n: &Norm) -> f64 {
        let steps = |a: f64, b: f64| ((b - a) * 8.0).round() as i32;
        let mut best = INF;
        for i in 0..=steps(lo[0], hi[0]) {
            for j in 0..=steps(lo[1], hi[1]) {
                let s = [lo[0] + i as f64 / 8.0, lo[1] + j as f64 / 8.0];
                for a in -8..=8 {
                    for b in -8..=8 {
                        let t = [a as f64 / 8.0, b as f64 / 8.0];
                        if n.eval(&t) <= r {
                            best = best.min(n.eval(&[y[0] - s[0] - t[0], y[1] - s[1] - t[1]]));
                        }
                    }
                }
            }
        }
        best
    }

    fn dyadic_set_1d() -> impl Strategy<Value = SetDescriptor> {
        prop_oneof![
            (-24i32..24, 0i32..16).prop_map(|(a, w)| SetDescriptor::interval(dyadic(a), dyadic(a + w)).unwrap()),
            prop::collection::vec(-24i32..24, 1..4)
                .prop_map(|ps| SetDescriptor::Points(ps.into_iter().map(|p| vec![dyadic(p)]).collect())),
            (-24i32..24).prop_map(|a| SetDescriptor::interval(dyadic(a), INF).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn members_have_zero_distance(s in small_set_2d(), t in 0.0f64..1.0) {
            let member = match &s {
                SetDescriptor::Points(ps) => ps[0].clone(),
                SetDescriptor::Ball { center, .. } => center.clone(),
                SetDescriptor::Hull(ps) => ps[0].iter().zip(ps.last().unwrap()).map(|(a, b)| a + t * (b - a)).collect(),
                SetDescriptor::Cone { apex, generators } => apex.iter().zip(&generators[0]).map(|(a, g)| a + 3.0 * t * g).collect(),
                SetDescriptor::Box { lo, hi } => lo.iter().zip(hi).map(|(a, b)| a + t * (b - a)).collect(),
                _ => unreachable!(),
            };
            prop_assert!(s.dist(&member, &Norm::l2()).unwrap() <= 1e-9);
        }

        #[test]
        fn distance_is_one_lipschitz(s in small_set_2d(), y1 in prop::collection::vec(-5.0f64..5.0, 2), y2 in prop::collection::vec(-5.0f64..5.0, 2)) {
            let n = Norm::l2();
            let d1 = s.dist(&y1, &n).unwrap();
            let d2 = s.dist(&y2, &n).unwrap();
            prop_assert!((d1 - d2).abs() <= n.dist(&y1, &y2) + 1e-9);
        }

        #[test]
        fn union_takes_minimum(a in small_set_2d(), b in small_set_2d(), y in prop::collection::vec(-5.0f64..5.0, 2)) {
            let n = Norm::l2();
            let u = SetDescriptor::Union(vec![a.clone(), b.clone()]);
            prop_assert_eq!(u.dist(&y, &n).unwrap(), a.dist(&y, &n).unwrap().min(b.dist(&y, &n).unwrap()));
        }

        #[test]
        fn inflate_law_1d(s in dyadic_set_1d(), y in -48i32..48, r in 0i32..12) {
            let (y, r) = (dyadic(y), dyadic(r));
            let inflated = SetDescriptor::Inflate(Box::new(s.clone()), r, Norm::l2());
            let exact = inflated.dist(&[y], &Norm::l2()).unwrap();
            prop_assert_eq!(exact, (s.dist(&[y], &Norm::l2()).unwrap() - r).max(0.0));
            prop_assert!((exact - grid_dist_1d(&s, y, r)).abs() <= 1e-6);
        }

        #[test]
        fn inflate_law_2d(
            lo in prop::collection::vec(-8i32..8, 2),
            w in prop::collection::vec(0i32..8, 2),
            y in prop::collection::vec(-32i32..32, 2),
            r in 0i32..8,
            use_l1 in any::<bool>(),
        ) {
            let n = if use_l1 { Norm::l1() } else { Norm::linf() };
            let lo: Vec<f64> = lo.into_iter().map(dyadic).collect();
            let hi: Vec<f64> = lo.iter().zip(&w).map(|(a, b)| a + dyadic(*b)).collect();
            let y: Vec<f64> = y.into_iter().map(dyadic).collect();
            let r = dyadic(r);
            let s = SetDescriptor::Box { lo: lo.clone(), hi: hi.clone() };
            let inflated = SetDescriptor::Inflate(Box::new(s), r, n.clone());
            let exact = inflated.dist(&y, &n).unwrap();
            prop_assert!((exact - grid_dist_2d(&lo, &hi, &y, r, &n)).abs() <= 1e-6);
        }

        #[test]
        fn inflated_point_is_a_ball(c in prop::collection::vec(-2.0f64..2.0, 2), y in prop::collection::vec(-4.0f64..4.0, 2), r in 0.0f64..1.0) {
            let inflated = SetDescriptor::Inflate(Box::new(SetDescriptor::point(c.clone())), r, Norm::l2());
            let ball = SetDescriptor::Ball { center: c, radius: r, norm: Norm::l2() };
            let a = inflated.dist(&y, &Norm::l2()).unwrap();
            let b = ball.dist(&y, &Norm::l2()).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }
}

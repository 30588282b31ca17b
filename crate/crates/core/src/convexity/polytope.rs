use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Facet description `⟨nᵢ, y⟩ ≤ cᵢ` with Euclidean-unit normals.
#[derive(Debug, Clone, PartialEq)]
pub struct FacetForm {
    pub normals: Vec<Vec<f64>>,
    pub offsets: Vec<f64>,
    /// False when the vertices span a proper affine subspace; the facet
    /// lists are then empty.
    pub full_dimensional: bool,
}

/// Convex hull of finitely many points. The facet form is computed on first
/// use in dimension at most 3.
#[derive(Debug, Clone)]
pub struct Polytope {
    vertices: Vec<Vec<f64>>,
    facets: OnceLock<Option<FacetForm>>,
}

impl PartialEq for Polytope {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices
    }
}

fn scale_of(points: &[Vec<f64>]) -> f64 {
    points.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()))
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn cross(a: &[f64], b: &[f64]) -> Vec<f64> {
    vec![a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn unit(v: &[f64]) -> Option<Vec<f64>> {
    let n = dot(v, v).sqrt();
    (n > 0.0).then(|| v.iter().map(|x| x / n).collect())
}

impl Polytope {
    /// Deduplicates the points; they need not be in convex position.
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let n = points.first().map(Vec::len).ok_or_else(|| Error::invalid("a polytope needs a vertex"))?;
        if n == 0 {
            return Err(Error::invalid("polytope vertices must be nonempty vectors"));
        }
        if let Some(p) = points.iter().find(|p| p.len() != n) {
            return Err(Error::dim("polytope vertex", n, p.len()));
        }
        let tol = 1e-12 * scale_of(&points);
        let mut vertices: Vec<Vec<f64>> = Vec::with_capacity(points.len());
        for p in points {
            if !vertices.iter().any(|v| v.iter().zip(&p).all(|(a, b)| (a - b).abs() <= tol)) {
                vertices.push(p);
            }
        }
        let mut out = Polytope {
            vertices,
            facets: OnceLock::new(),
        };
        if n <= 2 {
            out.vertices = out.extreme_points();
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    /// `σ_P(u) = max_v ⟨v, u⟩`.
    pub fn support(&self, u: &[f64]) -> f64 {
        self.vertices.iter().map(|v| dot(v, u)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `Σ tᵢ Pᵢ` for real weights `tᵢ`.
    pub fn minkowski(parts: &[(f64, &Polytope)]) -> Result<Polytope> {
        let first = parts.first().ok_or_else(|| Error::invalid("empty Minkowski sum"))?;
        let n = first.1.dim();
        let mut acc = vec![vec![0.0; n]];
        for (t, p) in parts {
            if p.dim() != n {
                return Err(Error::dim("Minkowski summand", n, p.dim()));
            }
            if *t == 0.0 {
                continue;
            }
            let mut next = Vec::with_capacity(acc.len() * p.vertices.len());
            for a in &acc {
                for v in &p.vertices {
                    next.push(a.iter().zip(v).map(|(x, y)| x + t * y).collect());
                }
            }
            acc = Polytope::new(next)?.vertices;
        }
        Polytope::new(acc)
    }

    /// Facet form in dimension at most 3, `None` above.
    pub fn facets(&self) -> Option<&FacetForm> {
        self.facets
            .get_or_init(|| match self.dim() {
                1 => Some(self.facets_1d()),
                2 => Some(self.facets_2d()),
                3 => Some(self.facets_3d()),
                _ => None,
            })
            .as_ref()
    }

    /// Membership within `tol` via the facet form.
    pub fn contains(&self, y: &[f64], tol: f64) -> Option<bool> {
        let ff = self.facets()?;
        if !ff.full_dimensional {
            return None;
        }
        Some(ff.normals.iter().zip(&ff.offsets).all(|(n, c)| dot(n, y) <= c + tol))
    }

    /// Extreme points in dimension 1 and 2; the input set otherwise.
    fn extreme_points(&self) -> Vec<Vec<f64>> {
        match self.dim() {
            1 => {
                let lo = self.vertices.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
                let hi = self.vertices.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max);
                if lo == hi {
                    vec![vec![lo]]
                } else {
                    vec![vec![lo], vec![hi]]
                }
            }
            2 => hull_2d(&self.vertices),
            _ => self.vertices.clone(),
        }
    }

    fn facets_1d(&self) -> FacetForm {
        let lo = self.vertices.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
        let hi = self.vertices.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max);
        if hi - lo <= 1e-12 * scale_of(&self.vertices) {
            return FacetForm {
                normals: Vec::new(),
                offsets: Vec::new(),
                full_dimensional: false,
            };
        }
        FacetForm {
            normals: vec![vec![1.0], vec![-1.0]],
            offsets: vec![hi, -lo],
            full_dimensional: true,
        }
    }

    fn facets_2d(&self) -> FacetForm {
        let h = &self.vertices;
        if h.len() < 3 {
            return FacetForm {
                normals: Vec::new(),
                offsets: Vec::new(),
                full_dimensional: false,
            };
        }
        let mut normals = Vec::with_capacity(h.len());
        let mut offsets = Vec::with_capacity(h.len());
        for i in 0..h.len() {
            let (p, q) = (&h[i], &h[(i + 1) % h.len()]);
            // counter-clockwise order puts the interior on the left
            let n = unit(&[q[1] - p[1], p[0] - q[0]]).expect("hull vertices are distinct");
            offsets.push(dot(&n, p));
            normals.push(n);
        }
        FacetForm {
            normals,
            offsets,
            full_dimensional: true,
        }
    }

    fn facets_3d(&self) -> FacetForm {
        let v = &self.vertices;
        let scale = scale_of(v);
        let tol = 1e-9 * scale;
        let empty = FacetForm {
            normals: Vec::new(),
            offsets: Vec::new(),
            full_dimensional: false,
        };
        if v.len() < 4 {
            return empty;
        }
        let mut normals: Vec<Vec<f64>> = Vec::new();
        let mut offsets: Vec<f64> = Vec::new();
        let mut spans = false;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                for k in j + 1..v.len() {
                    let cr = cross(&sub(&v[j], &v[i]), &sub(&v[k], &v[i]));
                    if dot(&cr, &cr).sqrt() <= 1e-12 * scale * scale {
                        continue;
                    }
                    let mut n = unit(&cr).expect("nonzero cross product");
                    let mut c = dot(&n, &v[i]);
                    let (mut above, mut below) = (false, false);
                    for p in v {
                        let d = dot(&n, p) - c;
                        above |= d > tol;
                        below |= d < -tol;
                    }
                    spans |= above || below;
                    if above && below {
                        continue;
                    }
                    if above {
                        n.iter_mut().for_each(|x| *x = -*x);
                        c = -c;
                    }
                    let dup = normals
                        .iter()
                        .zip(&offsets)
                        .any(|(m, d)| (c - d).abs() <= tol && m.iter().zip(&n).all(|(a, b)| (a - b).abs() <= 1e-9));
                    if !dup {
                        normals.push(n);
                        offsets.push(c);
                    }
                }
            }
        }
        if !spans || normals.is_empty() {
            return empty;
        }
        FacetForm {
            normals,
            offsets,
            full_dimensional: true,
        }
    }
}

/// Andrew's monotone chain; counter-clockwise, collinear points dropped.
fn hull_2d(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut p: Vec<Vec<f64>> = points.to_vec();
    p.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    if p.len() <= 2 {
        return p;
    }
    let tol = 1e-12 * scale_of(&p) * scale_of(&p);
    let turn = |o: &[f64], a: &[f64], b: &[f64]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut lower: Vec<Vec<f64>> = Vec::new();
    for q in &p {
        while lower.len() >= 2 && turn(&lower[lower.len() - 2], &lower[lower.len() - 1], q) <= tol {
            lower.pop();
        }
        lower.push(q.clone());
    }
    let mut upper: Vec<Vec<f64>> = Vec::new();
    for q in p.iter().rev() {
        while upper.len() >= 2 && turn(&upper[upper.len() - 2], &upper[upper.len() - 1], q) <= tol {
            upper.pop();
        }
        upper.push(q.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

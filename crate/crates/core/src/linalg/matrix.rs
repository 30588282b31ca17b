use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Matrix::diag(&vec![1.0; n])
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Matrix::zeros(d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 {
            return Err(Error::invalid("matrix must have positive dimensions"));
        }
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::dim("matrix row", c, bad.len()));
        }
        let data: Vec<f64> = rows.concat();
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("matrix entries must be finite"));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data,
        })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Parses `"a,b;c,d"`: rows separated by `;`, entries by `,` or whitespace.
impl FromStr for Matrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let rows = s
            .split(';')
            .map(|row| parse_numbers(row))
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_rows(&rows)
    }
}

pub(crate) fn parse_numbers(s: &str) -> Result<Vec<f64>> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            let t = t.replace('\u{2212}', "-");
            match t.as_str() {
                "inf" | "+inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                _ => t
                    .parse::<f64>()
                    .map_err(|_| Error::invalid(format!("malformed number `{t}`"))),
            }
        })
        .collect()
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ";")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{:?}", self[(i, j)])?;
            }
        }
        Ok(())
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn axpy(alpha: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| alpha * a + b).collect()
}

/// Solves the square system `a x = b` by Gaussian elimination with partial
/// pivoting. Returns `None` when a pivot falls below `1e-14` times the
/// largest entry.
pub fn solve(a: &Matrix, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.rows;
    debug_assert_eq!(a.cols, n);
    let mut m = a.clone();
    let mut x = b.to_vec();
    let scale = m.data.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1e-300);
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[(i, k)].abs().total_cmp(&m[(j, k)].abs()))?;
        if m[(p, k)].abs() <= 1e-14 * scale {
            return None;
        }
        if p != k {
            for j in 0..n {
                m.data.swap(k * n + j, p * n + j);
            }
            x.swap(k, p);
        }
        for i in k + 1..n {
            let f = m[(i, k)] / m[(k, k)];
            if f != 0.0 {
                for j in k..n {
                    m[(i, j)] -= f * m[(k, j)];
                }
                x[i] -= f * x[k];
            }
        }
    }
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| m[(k, j)] * x[j]).sum();
        x[k] = (x[k] - s) / m[(k, k)];
    }
    Some(x)
}

/// Least-squares solution of `min ‖Σ_j c_j cols[j] − y‖₂` by Householder QR.
/// Columns that are numerically dependent receive coefficient zero.
pub fn lstsq(cols: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let m = y.len();
    let k = cols.len();
    let mut a: Vec<Vec<f64>> = cols.to_vec();
    let mut b = y.to_vec();
    let mut rdiag = vec![0.0; k];
    let colscale = cols.iter().map(|c| norm2(c)).fold(0.0, f64::max).max(1e-300);
    let mut rank_ok = vec![true; k];
    for j in 0..k.min(m) {
        let nrm = a[j][j..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if nrm <= 1e-12 * colscale {
            rank_ok[j] = false;
            continue;
        }
        let alpha = if a[j][j] > 0.0 { -nrm } else { nrm };
        let mut v: Vec<f64> = a[j][j..].to_vec();
        v[0] -= alpha;
        let vn = dot(&v, &v);
        if vn > 0.0 {
            for col in a.iter_mut().skip(j) {
                let s = 2.0 * dot(&v, &col[j..]) / vn;
                for (c, vi) in col[j..].iter_mut().zip(&v) {
                    *c -= s * vi;
                }
            }
            let s = 2.0 * dot(&v, &b[j..]) / vn;
            for (c, vi) in b[j..].iter_mut().zip(&v) {
                *c -= s * vi;
            }
        }
        rdiag[j] = a[j][j];
    }
    for j in m..k {
        rank_ok[j] = false;
    }
    let mut x = vec![0.0; k];
    for j in (0..k.min(m)).rev() {
        if !rank_ok[j] {
            continue;
        }
        let s: f64 = (j + 1..k.min(m)).filter(|&i| rank_ok[i]).map(|i| a[i][j] * x[i]).sum();
        x[j] = (b[j] - s) / rdiag[j];
    }
    x
}

//! Minimal compressed-sparse-row storage for the square operators assembled
//! on a grid.

use crate::grid::Grid2D;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl CsrMatrix {
    /// Builds an `n x n` matrix, summing duplicate entries.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut data: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < n && c < n, "triplet ({r}, {c}) out of range for n = {n}");
            if last == Some((r, c)) {
                *data.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                data.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n {
            indptr[r + 1] += indptr[r];
        }
        Self {
            n,
            indptr,
            indices,
            data,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        Self {
            n: d.len(),
            indptr: (0..=d.len()).collect(),
            indices: (0..d.len()).collect(),
            data: d.to_vec(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        self.indices[a..b].iter().copied().zip(self.data[a..b].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(j, _)| j == c).map_or(0.0, |(_, v)| v)
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|r| self.get(r, r)).collect()
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.iter_mut().enumerate() {
            let (a, b) = (self.indptr[r], self.indptr[r + 1]);
            let mut s = 0.0;
            for k in a..b {
                s += self.data[k] * x[self.indices[k]];
            }
            *yr = s;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `a * self + b * other`.
    pub fn add(&self, a: f64, other: &CsrMatrix, b: f64) -> Self {
        assert_eq!(self.n, other.n);
        let mut t = Vec::with_capacity(self.nnz() + other.nnz());
        for r in 0..self.n {
            t.extend(self.row(r).map(|(c, v)| (r, c, a * v)));
            t.extend(other.row(r).map(|(c, v)| (r, c, b * v)));
        }
        Self::from_triplets(self.n, t)
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut m = self.clone();
        m.data.iter_mut().for_each(|v| *v *= a);
        m
    }

    pub fn matmul(&self, other: &CsrMatrix) -> Self {
        assert_eq!(self.n, other.n);
        let mut acc = vec![0.0; self.n];
        let mut mark = vec![usize::MAX; self.n];
        let mut cols = Vec::new();
        let mut t = Vec::new();
        for r in 0..self.n {
            cols.clear();
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if mark[c] != r {
                        mark[c] = r;
                        acc[c] = 0.0;
                        cols.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            t.extend(cols.iter().map(|&c| (r, c, acc[c])));
        }
        Self::from_triplets(self.n, t)
    }

    /// Largest `|i - j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.n)
            .flat_map(|r| self.row(r).map(move |(c, _)| r.abs_diff(c)))
            .max()
            .unwrap_or(0)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|r| self.row(r).all(|(c, v)| (v - self.get(c, r)).abs() <= tol))
    }

    /// Row-major dense copy; meant for small test systems.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n * self.n];
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                d[r * self.n + c] += v;
            }
        }
        d
    }
}

/// `D^T diag(w) D` for the forward-difference gradient `D` on `grid`.
pub fn weighted_gradient_normal(grid: &Grid2D, w: &[f64]) -> CsrMatrix {
    let (nx, ny) = (grid.nx(), grid.ny());
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let mut t = Vec::with_capacity(8 * nx * ny);
    let mut edge = |a: usize, b: usize, weight: f64| {
        t.push((a, a, weight));
        t.push((b, b, weight));
        t.push((a, b, -weight));
        t.push((b, a, -weight));
    };
    for i in 0..ny {
        for j in 0..nx {
            let a = grid.idx(i, j);
            if j + 1 < nx {
                edge(a, a + 1, w[a] * inv_h2);
            }
            if i + 1 < ny {
                edge(a, a + nx, w[a] * inv_h2);
            }
        }
    }
    CsrMatrix::from_triplets(grid.len(), t)
}

/// Neumann Laplacian `L = -D^T D` as a matrix.
pub fn laplacian_matrix(grid: &Grid2D) -> CsrMatrix {
    weighted_gradient_normal(grid, &vec![1.0; grid.len()]).scaled(-1.0)
}

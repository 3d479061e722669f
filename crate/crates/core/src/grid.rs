//! Uniform rectangular grids, sampled fields and the finite-difference
//! operators used throughout the solver.
//!
//! Storage is row-major: node `(i, j)` (row `i`, column `j`) lives at
//! `i * nx + j` and sits at `x = j * h`, `y = i * h`.
//!
//! The gradient uses forward differences with a zero last column/row, the
//! divergence is its negative adjoint, and the Laplacian is their
//! composition. This gives a homogeneous Neumann Laplacian `L = -D^T D`
//! which is symmetric by construction.

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    nx: usize,
    ny: usize,
    h: f64,
}

impl Grid2D {
    /// Grid over the unit square stretched to the aspect ratio, with
    /// `h = 1 / (max(nx, ny) - 1)`.
    pub fn new(nx: usize, ny: usize) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return invalid(format!("grid must be at least 2x2, got {nx}x{ny}"));
        }
        let h = 1.0 / ((nx.max(ny) - 1) as f64);
        Self::with_spacing(nx, ny, h)
    }

    pub fn with_spacing(nx: usize, ny: usize, h: f64) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return invalid(format!("grid must be at least 2x2, got {nx}x{ny}"));
        }
        if !(h.is_finite() && h > 0.0) {
            return invalid(format!("grid spacing must be positive, got {h}"));
        }
        Ok(Self { nx, ny, h })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.nx + j
    }

    /// Physical coordinates `(x, y)` of node `(i, j)`.
    pub fn coords(&self, i: usize, j: usize) -> (f64, f64) {
        (j as f64 * self.h, i as f64 * self.h)
    }

    /// Extent of the domain spanned by the nodes.
    pub fn extent(&self) -> (f64, f64) {
        ((self.nx - 1) as f64 * self.h, (self.ny - 1) as f64 * self.h)
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i + 1 == self.ny || j + 1 == self.nx
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid2D,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return invalid(format!(
                "field has {} values, grid needs {}",
                values.len(),
                grid.len()
            ));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return invalid(format!("non-finite value at index {pos}"));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: Grid2D, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn zeros(grid: Grid2D) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn from_fn(grid: Grid2D, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.ny() {
            for j in 0..grid.nx() {
                let (x, y) = grid.coords(i, j);
                values.push(f(x, y));
            }
        }
        Self { grid, values }
    }

    /// Wraps values already known to be finite and correctly sized.
    pub(crate) fn from_raw(grid: Grid2D, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let nx = self.grid.nx();
        &self.values[i * nx..(i + 1) * nx]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// `a * self + b * other`.
    pub fn lincomb(&self, a: f64, other: &ScalarField, b: f64) -> Self {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Self::from_raw(self.grid, values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `h^2 * sum(self * other)`.
    pub fn dot(&self, other: &ScalarField) -> f64 {
        let h2 = self.grid.h() * self.grid.h();
        h2 * self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
    }

    pub fn same_grid(&self, other: &ScalarField) -> bool {
        self.grid == other.grid
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField2 {
    grid: Grid2D,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl VectorField2 {
    pub fn new(grid: Grid2D, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != grid.len() || y.len() != grid.len() {
            return invalid("vector field components do not match the grid");
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return invalid("vector field has non-finite components");
        }
        Ok(Self { grid, x, y })
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Pointwise squared magnitude.
    pub fn norm_sq(&self) -> ScalarField {
        let values = self.x.iter().zip(&self.y).map(|(a, b)| a * a + b * b).collect();
        ScalarField::from_raw(self.grid, values)
    }

    /// `h^2 * sum(self . other)`.
    pub fn dot(&self, other: &VectorField2) -> f64 {
        let h2 = self.grid.h() * self.grid.h();
        let sx: f64 = self.x.iter().zip(&other.x).map(|(a, b)| a * b).sum();
        let sy: f64 = self.y.iter().zip(&other.y).map(|(a, b)| a * b).sum();
        h2 * (sx + sy)
    }
}

fn forward_x(f: &[f64], g: &Grid2D) -> Vec<f64> {
    let (nx, ny, inv_h) = (g.nx(), g.ny(), 1.0 / g.h());
    let mut out = vec![0.0; nx * ny];
    for i in 0..ny {
        let r = i * nx;
        for j in 0..nx - 1 {
            out[r + j] = (f[r + j + 1] - f[r + j]) * inv_h;
        }
    }
    out
}

fn forward_y(f: &[f64], g: &Grid2D) -> Vec<f64> {
    let (nx, ny, inv_h) = (g.nx(), g.ny(), 1.0 / g.h());
    let mut out = vec![0.0; nx * ny];
    for i in 0..ny - 1 {
        let r = i * nx;
        for j in 0..nx {
            out[r + j] = (f[r + nx + j] - f[r + j]) * inv_h;
        }
    }
    out
}

/// `-Dx^T p`.
fn backward_x(p: &[f64], g: &Grid2D) -> Vec<f64> {
    let (nx, ny, inv_h) = (g.nx(), g.ny(), 1.0 / g.h());
    let mut out = vec![0.0; nx * ny];
    for i in 0..ny {
        let r = i * nx;
        out[r] = p[r] * inv_h;
        for j in 1..nx - 1 {
            out[r + j] = (p[r + j] - p[r + j - 1]) * inv_h;
        }
        out[r + nx - 1] = -p[r + nx - 2] * inv_h;
    }
    out
}

/// `-Dy^T p`.
fn backward_y(p: &[f64], g: &Grid2D) -> Vec<f64> {
    let (nx, ny, inv_h) = (g.nx(), g.ny(), 1.0 / g.h());
    let mut out = vec![0.0; nx * ny];
    for j in 0..nx {
        out[j] = p[j] * inv_h;
    }
    for i in 1..ny - 1 {
        let r = i * nx;
        for j in 0..nx {
            out[r + j] = (p[r + j] - p[r - nx + j]) * inv_h;
        }
    }
    let r = (ny - 1) * nx;
    for j in 0..nx {
        out[r + j] = -p[r - nx + j] * inv_h;
    }
    out
}

pub fn grad_forward(f: &ScalarField) -> VectorField2 {
    let g = f.grid;
    VectorField2 {
        grid: g,
        x: forward_x(&f.values, &g),
        y: forward_y(&f.values, &g),
    }
}

pub fn div_adjoint(p: &VectorField2) -> ScalarField {
    let g = p.grid;
    let mut values = backward_x(&p.x, &g);
    for (v, w) in values.iter_mut().zip(backward_y(&p.y, &g)) {
        *v += w;
    }
    ScalarField::from_raw(g, values)
}

pub fn laplacian(f: &ScalarField) -> ScalarField {
    div_adjoint(&grad_forward(f))
}

pub fn bilaplacian(f: &ScalarField) -> ScalarField {
    laplacian(&laplacian(f))
}

/// Second derivatives `(v_xx, v_xy, v_yy)`.
///
/// The pure derivatives are the directional parts of [`laplacian`], so that
/// `v_xx + v_yy` equals the Laplacian exactly; the mixed derivative is a
/// forward difference of a forward difference.
pub fn hessian_parts(f: &ScalarField) -> (ScalarField, ScalarField, ScalarField) {
    let g = f.grid;
    let dx = forward_x(&f.values, &g);
    let dy = forward_y(&f.values, &g);
    let vxx = backward_x(&dx, &g);
    let vyy = backward_y(&dy, &g);
    let vxy = forward_y(&dx, &g);
    (
        ScalarField::from_raw(g, vxx),
        ScalarField::from_raw(g, vxy),
        ScalarField::from_raw(g, vyy),
    )
}

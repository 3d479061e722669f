//! The three quadratic subproblems of the alternating scheme, assembled as
//! sparse symmetric positive definite systems, and the solvers for them.
//!
//! All systems are written per node (the `h^2` quadrature weight and the
//! overall factor 2 of the gradient are divided out), so the `v`
//! right-hand sides are the constants `beta/eps` and `beta/(sqrt2 eps)`.

mod banded;
mod cg;
pub mod csr;

use std::fmt;
use std::str::FromStr;

pub use banded::{BandCholesky, DirectSolver};
pub use cg::PcgSolver;
pub use csr::CsrMatrix;

use crate::error::{invalid, Error, Result};
use crate::grid::{grad_forward, Grid2D, ScalarField};
use crate::params::{BoundaryCondition, ModelParams};
use crate::registry::Registry;

use csr::{laplacian_matrix, weighted_gradient_normal};

pub const DEFAULT_TOL: f64 = 1e-10;
/// Grids with at most this many nodes use the direct solver under
/// [`SolverKind::Auto`].
pub const DIRECT_SOLVE_MAX_NODES: usize = 4096;

#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: ScalarField,
    pub symmetric: bool,
    pub spd: bool,
}

impl LinearSystem {
    pub fn grid(&self) -> &Grid2D {
        self.rhs.grid()
    }

    pub fn apply(&self, x: &ScalarField) -> ScalarField {
        ScalarField::from_raw(*x.grid(), self.matrix.mul_vec(x.values()))
    }

    /// `||A x - b|| / ||b||` (absolute residual when `b = 0`).
    pub fn relative_residual(&self, x: &[f64]) -> f64 {
        let ax = self.matrix.mul_vec(x);
        let b = self.rhs.values();
        let r: f64 = ax.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
        let bn: f64 = b.iter().map(|q| q * q).sum::<f64>().sqrt();
        if bn > 0.0 {
            r / bn
        } else {
            r
        }
    }

    /// Quadratic whose minimizer solves the system: `x.A x / 2 - b.x`.
    pub fn objective(&self, x: &[f64]) -> f64 {
        let ax = self.matrix.mul_vec(x);
        let b = self.rhs.values();
        x.iter()
            .zip(&ax)
            .zip(b)
            .map(|((xi, axi), bi)| 0.5 * xi * axi - bi * xi)
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub x: ScalarField,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// A solver for one assembled subproblem.
pub trait LinearSolver: Send + Sync {
    fn name(&self) -> &'static str;

    /// Solves `sys`, optionally starting from `x0`. Running out of
    /// iterations is reported through [`SolveOutcome::converged`], not as an
    /// error.
    fn solve(
        &self,
        sys: &LinearSystem,
        x0: Option<&[f64]>,
        tol: f64,
        maxit: usize,
    ) -> Result<SolveOutcome>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SolverKind {
    /// Direct for small grids, conjugate gradients otherwise.
    #[default]
    Auto,
    Cg,
    Direct,
}

impl SolverKind {
    pub fn resolve(self, nodes: usize) -> &'static dyn LinearSolver {
        static CG: PcgSolver = PcgSolver;
        static DIRECT: DirectSolver = DirectSolver;
        match self {
            SolverKind::Cg => &CG,
            SolverKind::Direct => &DIRECT,
            SolverKind::Auto if nodes <= DIRECT_SOLVE_MAX_NODES => &DIRECT,
            SolverKind::Auto => &CG,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Auto => "auto",
            SolverKind::Cg => "cg",
            SolverKind::Direct => "direct",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(SolverKind::Auto),
            "cg" => Ok(SolverKind::Cg),
            "direct" => Ok(SolverKind::Direct),
            other => invalid(format!("unknown solver '{other}' (expected auto|cg|direct)")),
        }
    }
}

/// Registry of the built-in solvers by name.
pub fn solver_registry() -> Registry<dyn LinearSolver> {
    let mut r: Registry<dyn LinearSolver> = Registry::new("solver");
    r.register("cg", Box::new(PcgSolver)).expect("fresh registry");
    r.register("direct", Box::new(DirectSolver)).expect("fresh registry");
    r
}

pub fn default_maxit(sys: &LinearSystem) -> usize {
    10 * sys.grid().len()
}

/// Solves with the default policy: direct on small grids, otherwise
/// Jacobi-preconditioned CG from a zero start.
pub fn solve(sys: &LinearSystem, tol: f64, maxit: usize) -> Result<SolveOutcome> {
    if !(tol > 0.0) {
        return invalid("solver tolerance must be positive");
    }
    if !sys.spd {
        return invalid("solver requires a symmetric positive definite system");
    }
    SolverKind::Auto
        .resolve(sys.grid().len())
        .solve(sys, None, tol, maxit)
}

fn check_same_grid(a: &ScalarField, b: &ScalarField) -> Result<()> {
    if a.same_grid(b) {
        Ok(())
    } else {
        invalid("fields live on different grids")
    }
}

/// `u` subproblem: `(alpha D^T diag(v^2) D + eta D^T D + gamma I) u = gamma g`.
///
/// This is the exact minimizer of the energy over `u` for fixed `v`; the
/// common intensity scale multiplies every term and cancels.
pub fn assemble_u_system(v: &ScalarField, g: &ScalarField, params: &ModelParams) -> Result<LinearSystem> {
    check_same_grid(v, g)?;
    params.validate()?;
    if params.gamma <= 0.0 {
        return Err(Error::Degenerate(
            "gamma = 0 leaves the u-system only semidefinite".into(),
        ));
    }
    let grid = *g.grid();
    let w: Vec<f64> = v
        .values()
        .iter()
        .map(|vi| params.alpha * vi * vi + params.eta)
        .collect();
    let matrix = weighted_gradient_normal(&grid, &w)
        .add(1.0, &CsrMatrix::diagonal(&vec![params.gamma; grid.len()]), 1.0);
    Ok(LinearSystem {
        matrix,
        rhs: g.map(|x| params.gamma * x),
        symmetric: true,
        spd: true,
    })
}

/// `2 alpha s^2 |grad u|^2` per node, the coupling seen by the `v` step.
fn coupling_diagonal(u: &ScalarField, params: &ModelParams) -> Vec<f64> {
    let s2 = params.scale_sq();
    grad_forward(u)
        .norm_sq()
        .values()
        .iter()
        .map(|q| 2.0 * params.alpha * s2 * q)
        .collect()
}

/// First-order `v` subproblem:
/// `(2 alpha |grad u|^2 + beta/eps + beta eps D^T D) v = beta/eps`.
pub fn assemble_v_system_first_order(u: &ScalarField, params: &ModelParams) -> Result<LinearSystem> {
    params.validate()?;
    let grid = *u.grid();
    let (beta, eps) = (params.beta, params.eps);
    let mut diag = coupling_diagonal(u, params);
    diag.iter_mut().for_each(|d| *d += beta / eps);
    let matrix = weighted_gradient_normal(&grid, &vec![beta * eps; grid.len()])
        .add(1.0, &CsrMatrix::diagonal(&diag), 1.0);
    let rhs = ScalarField::constant(grid, beta / eps);
    Ok(apply_bc(matrix, rhs, params.bc))
}

/// Second-order `v` subproblem:
/// `(2 alpha |grad u|^2 + beta/(sqrt2 eps) + beta eps^3/sqrt2 L^2) v = beta/(sqrt2 eps)`.
pub fn assemble_v_system_second_order(u: &ScalarField, params: &ModelParams) -> Result<LinearSystem> {
    params.validate()?;
    let grid = *u.grid();
    let (beta, eps) = (params.beta, params.eps);
    let mass = beta / (std::f64::consts::SQRT_2 * eps);
    let stiff = beta * eps.powi(3) / std::f64::consts::SQRT_2;
    let mut diag = coupling_diagonal(u, params);
    diag.iter_mut().for_each(|d| *d += mass);
    let l = laplacian_matrix(&grid);
    let matrix = l.matmul(&l).add(stiff, &CsrMatrix::diagonal(&diag), 1.0);
    let rhs = ScalarField::constant(grid, mass);
    Ok(apply_bc(matrix, rhs, params.bc))
}

/// Pins `v = 1` on boundary nodes by symmetric elimination.
fn apply_bc(matrix: CsrMatrix, rhs: ScalarField, bc: BoundaryCondition) -> LinearSystem {
    let system = |matrix, rhs| LinearSystem {
        matrix,
        rhs,
        symmetric: true,
        spd: true,
    };
    if bc == BoundaryCondition::Neumann {
        return system(matrix, rhs);
    }
    let grid = *rhs.grid();
    let fixed: Vec<bool> = (0..grid.ny())
        .flat_map(|i| (0..grid.nx()).map(move |j| grid.is_boundary(i, j)))
        .collect();
    let mut b = rhs.into_values();
    let mut t = Vec::with_capacity(matrix.nnz());
    for r in 0..grid.len() {
        if fixed[r] {
            t.push((r, r, 1.0));
            b[r] = 1.0;
            continue;
        }
        for (c, v) in matrix.row(r) {
            if fixed[c] {
                b[r] -= v;
            } else {
                t.push((r, c, v));
            }
        }
    }
    system(
        CsrMatrix::from_triplets(grid.len(), t),
        ScalarField::from_raw(grid, b),
    )
}

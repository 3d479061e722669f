use super::{LinearSolver, LinearSystem, SolveOutcome};
use crate::error::Result;
use crate::grid::ScalarField;

/// Conjugate gradients with a Jacobi (diagonal) preconditioner.
///
/// Every iterate lowers the quadratic `x^T A x / 2 - b^T x`, so a solve
/// started from the current iterate of an outer descent never increases
/// its objective.
#[derive(Debug, Clone, Copy, Default)]
pub struct PcgSolver;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

// Recurrence residuals drift from the true residual on hard systems; the
// loop re-seeds from `b - A x` a few times before giving up.
const MAX_RESTARTS: usize = 4;

impl LinearSolver for PcgSolver {
    fn name(&self) -> &'static str {
        "cg"
    }

    fn solve(
        &self,
        sys: &LinearSystem,
        x0: Option<&[f64]>,
        tol: f64,
        maxit: usize,
    ) -> Result<SolveOutcome> {
        let a = &sys.matrix;
        let b = sys.rhs.values();
        let n = b.len();
        let grid = *sys.rhs.grid();

        let bnorm = norm(b);
        if bnorm == 0.0 {
            return Ok(SolveOutcome {
                x: ScalarField::zeros(grid),
                residual: 0.0,
                iterations: 0,
                converged: true,
            });
        }

        let inv_diag: Vec<f64> = a
            .diag()
            .into_iter()
            .map(|d| if d != 0.0 { 1.0 / d } else { 1.0 })
            .collect();
        let mut x = match x0 {
            Some(x0) => x0.to_vec(),
            None => vec![0.0; n],
        };
        let mut r = vec![0.0; n];
        let mut z = vec![0.0; n];
        let mut p = vec![0.0; n];
        let mut ap = vec![0.0; n];
        let mut iterations = 0;

        for _ in 0..=MAX_RESTARTS {
            a.mul_vec_into(&x, &mut ap);
            for k in 0..n {
                r[k] = b[k] - ap[k];
                z[k] = r[k] * inv_diag[k];
            }
            p.copy_from_slice(&z);
            let mut rz = dot(&r, &z);

            while norm(&r) / bnorm > tol && iterations < maxit {
                a.mul_vec_into(&p, &mut ap);
                let pap = dot(&p, &ap);
                if pap <= 0.0 {
                    break;
                }
                let step = rz / pap;
                for k in 0..n {
                    x[k] += step * p[k];
                    r[k] -= step * ap[k];
                    z[k] = r[k] * inv_diag[k];
                }
                let rz_new = dot(&r, &z);
                let beta = rz_new / rz;
                rz = rz_new;
                for k in 0..n {
                    p[k] = z[k] + beta * p[k];
                }
                iterations += 1;
            }

            a.mul_vec_into(&x, &mut ap);
            let true_res = ap.iter().zip(b).map(|(q, bb)| (bb - q) * (bb - q)).sum::<f64>().sqrt() / bnorm;
            if true_res <= tol || iterations >= maxit {
                return Ok(SolveOutcome {
                    x: ScalarField::from_raw(grid, x),
                    residual: true_res,
                    iterations,
                    converged: true_res <= tol,
                });
            }
        }

        a.mul_vec_into(&x, &mut ap);
        let res = ap.iter().zip(b).map(|(q, bb)| (bb - q) * (bb - q)).sum::<f64>().sqrt() / bnorm;
        Ok(SolveOutcome {
            x: ScalarField::from_raw(grid, x),
            residual: res,
            iterations,
            converged: res <= tol,
        })
    }
}

use super::csr::CsrMatrix;
use super::{LinearSolver, LinearSystem, SolveOutcome};
use crate::error::{Error, Result};
use crate::grid::ScalarField;

/// Lower-triangular band factor `A = L L^T` of a symmetric positive
/// definite band matrix.
///
/// Row `i` stores columns `i - kd ..= i` at offsets `0 ..= kd`; entries left
/// of column 0 are zero padding.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    kd: usize,
    band: Vec<f64>,
}

impl BandCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.n();
        let kd = a.bandwidth();
        let w = kd + 1;
        let mut band = vec![0.0; n * w];
        for i in 0..n {
            for (j, v) in a.row(i) {
                if j <= i {
                    band[i * w + (j + kd - i)] = v;
                }
            }
        }
        for j in 0..n {
            let jlo = j.saturating_sub(kd);
            let row_j = j * w;
            let s: f64 = (jlo..j)
                .map(|k| {
                    let l = band[row_j + (k + kd - j)];
                    l * l
                })
                .sum();
            let d = band[row_j + kd] - s;
            if !(d > 0.0) {
                return Err(Error::Internal(format!(
                    "matrix is not positive definite (pivot {d:e} at row {j})"
                )));
            }
            let d = d.sqrt();
            band[row_j + kd] = d;
            for i in j + 1..(j + kd + 1).min(n) {
                let row_i = i * w;
                let lo = i.saturating_sub(kd).max(jlo);
                let mut s = 0.0;
                for k in lo..j {
                    s += band[row_i + (k + kd - i)] * band[row_j + (k + kd - j)];
                }
                let off = row_i + (j + kd - i);
                band[off] = (band[off] - s) / d;
            }
        }
        Ok(Self { n, kd, band })
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let (n, kd, w) = (self.n, self.kd, self.kd + 1);
        for i in 0..n {
            let lo = i.saturating_sub(kd);
            let mut s = x[i];
            for k in lo..i {
                s -= self.band[i * w + (k + kd - i)] * x[k];
            }
            x[i] = s / self.band[i * w + kd];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..(i + kd + 1).min(n) {
                s -= self.band[k * w + (i + kd - k)] * x[k];
            }
            x[i] = s / self.band[i * w + kd];
        }
    }
}

/// Direct solve by band Cholesky factorization; deterministic to the bit.
#[derive(Debug, Clone, Copy, Default)]
pub struct DirectSolver;

impl LinearSolver for DirectSolver {
    fn name(&self) -> &'static str {
        "direct"
    }

    fn solve(
        &self,
        sys: &LinearSystem,
        _x0: Option<&[f64]>,
        _tol: f64,
        _maxit: usize,
    ) -> Result<SolveOutcome> {
        let chol = BandCholesky::factor(&sys.matrix)?;
        let b = sys.rhs.values();
        let mut x = b.to_vec();
        chol.solve_in_place(&mut x);
        let residual = sys.relative_residual(&x);
        Ok(SolveOutcome {
            x: ScalarField::from_raw(*sys.rhs.grid(), x),
            residual,
            iterations: 1,
            converged: true,
        })
    }
}

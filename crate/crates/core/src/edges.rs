//! Edge extraction from the indicator `v`: overshoot level sets and
//! midpoints between the maxima that bracket an edge.

use crate::error::{invalid, Result};
use crate::grid::{Grid2D, ScalarField};

pub const DEFAULT_THRESHOLD: f64 = 1.005;

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMask {
    grid: Grid2D,
    bits: Vec<bool>,
}

impl EdgeMask {
    pub fn new(grid: Grid2D, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != grid.len() {
            return invalid(format!("mask has {} bits for {} nodes", bits.len(), grid.len()));
        }
        Ok(Self { grid, bits })
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    /// Column indices holding at least one set bit.
    pub fn columns(&self) -> Vec<usize> {
        let nx = self.grid.nx();
        let mut cols: Vec<usize> = (0..self.bits.len())
            .filter(|&k| self.bits[k])
            .map(|k| k % nx)
            .collect();
        cols.sort_unstable();
        cols.dedup();
        cols
    }

    /// 1 where set, 0 elsewhere.
    pub fn to_field(&self) -> ScalarField {
        ScalarField::from_raw(
            self.grid,
            self.bits.iter().map(|b| if *b { 1.0 } else { 0.0 }).collect(),
        )
    }
}

/// Nodes where `v > threshold`.
pub fn level_mask(v: &ScalarField, threshold: f64) -> EdgeMask {
    EdgeMask {
        grid: *v.grid(),
        bits: v.values().iter().map(|x| *x > threshold).collect(),
    }
}

/// Analytic edge set of a phantom, in domain coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeDescription {
    VerticalLine { x: f64 },
    Ellipse { cx: f64, cy: f64, a: f64, b: f64 },
    CirclePair { c1: (f64, f64), c2: (f64, f64), r: f64 },
}

impl EdgeDescription {
    /// Whether `(x, y)` lies in the bright region bounded by the edge.
    pub fn is_inside(&self, x: f64, y: f64) -> bool {
        match *self {
            EdgeDescription::VerticalLine { x: c } => x >= c,
            EdgeDescription::Ellipse { cx, cy, a, b } => {
                ((x - cx) / a).powi(2) + ((y - cy) / b).powi(2) < 1.0
            }
            EdgeDescription::CirclePair { c1, c2, r } => {
                let d1 = (x - c1.0).hypot(y - c1.1);
                let d2 = (x - c2.0).hypot(y - c2.1);
                d1 < r || d2 < r
            }
        }
    }

    /// Approximate distance from `(x, y)` to the edge set (exact for the
    /// line, and for the disks away from where they overlap).
    pub fn distance(&self, x: f64, y: f64) -> f64 {
        match *self {
            EdgeDescription::VerticalLine { x: c } => (x - c).abs(),
            EdgeDescription::Ellipse { cx, cy, a, b } => {
                let rho = ((x - cx) / a).hypot((y - cy) / b);
                (rho - 1.0).abs() * a.min(b)
            }
            EdgeDescription::CirclePair { c1, c2, r } => {
                let d1 = ((x - c1.0).hypot(y - c1.1) - r).abs();
                let d2 = ((x - c2.0).hypot(y - c2.1) - r).abs();
                d1.min(d2)
            }
        }
    }
}

/// Local maxima of `row` as `(center, value)`; a plateau counts once, at its
/// center. An end run counts when it exceeds its only neighbour.
fn local_maxima(row: &[f64]) -> Vec<(f64, f64)> {
    let n = row.len();
    let mut out = Vec::new();
    let mut a = 0;
    while a < n {
        let mut b = a;
        while b + 1 < n && row[b + 1] == row[a] {
            b += 1;
        }
        let left_ok = a == 0 || row[a - 1] < row[a];
        let right_ok = b + 1 == n || row[b + 1] < row[a];
        if left_ok && right_ok && n > b - a + 1 {
            out.push(((a + b) as f64 / 2.0, row[a]));
        }
        a = b + 1;
    }
    out
}

/// x-positions midway between consecutive maxima of row `row` of `v` that
/// exceed `threshold` and enclose a sample below 1.
pub fn two_sided_midpoints(v: &ScalarField, row: usize, threshold: f64) -> Result<Vec<f64>> {
    let grid = v.grid();
    if row >= grid.ny() {
        return invalid(format!("row {row} out of range (ny = {})", grid.ny()));
    }
    let r = v.row(row);
    let peaks: Vec<f64> = local_maxima(r)
        .into_iter()
        .filter(|(_, val)| *val > threshold)
        .map(|(c, _)| c)
        .collect();
    let mut out = Vec::new();
    for w in peaks.windows(2) {
        let (lo, hi) = (w[0].ceil() as usize, w[1].floor() as usize);
        if r[lo..=hi].iter().any(|x| *x < 1.0) {
            out.push(0.5 * (w[0] + w[1]) * grid.h());
        }
    }
    Ok(out)
}

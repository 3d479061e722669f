//! One-dimensional optimal transition profile of the second-order penalty:
//! minimize `int_0^inf (f-1)^2 + (f'')^2` with `f(0) = d`, `f'(0) = 0`.

use std::f64::consts::{FRAC_PI_4, SQRT_2};

use crate::error::{invalid, Result};
use crate::linsolve::{BandCholesky, CsrMatrix};

/// Minimizer for `d = 0`: `1 - sqrt2 e^{-t/sqrt2} cos(t/sqrt2 - pi/4)`.
pub fn closed_form_profile(t: f64) -> f64 {
    d_profile(0.0, t)
}

/// Minimizer with `f(0) = d`; the deviation from 1 scales linearly in `1 - d`.
pub fn d_profile(d: f64, t: f64) -> f64 {
    let s = t / SQRT_2;
    1.0 - (1.0 - d) * SQRT_2 * (-s).exp() * (s - FRAC_PI_4).cos()
}

/// Exact minimal energy `sqrt2 (d-1)^2`.
pub fn optimal_energy(d: f64) -> f64 {
    SQRT_2 * (d - 1.0) * (d - 1.0)
}

/// Samples of a profile on the uniform grid `t_i = i * step`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile1D {
    samples: Vec<f64>,
    step: f64,
    left_value: f64,
}

impl Profile1D {
    pub fn new(samples: Vec<f64>, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return invalid(format!("profile step must be positive, got {step}"));
        }
        if samples.is_empty() {
            return invalid("profile needs at least one sample");
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return invalid("profile samples must be finite");
        }
        let left_value = samples[0];
        Ok(Self {
            samples,
            step,
            left_value,
        })
    }

    /// Samples `f(t)` at `t = 0, step, ...` up to and including `t_max`
    /// (rounded to the nearest whole number of steps).
    pub fn sample(f: impl Fn(f64) -> f64, t_max: f64, step: f64) -> Result<Self> {
        if !(t_max > 0.0 && t_max.is_finite()) {
            return invalid(format!("profile length must be positive, got {t_max}"));
        }
        if !(step > 0.0 && step < t_max) {
            return invalid(format!("profile step must lie in (0, {t_max}), got {step}"));
        }
        let n = (t_max / step).round() as usize + 1;
        Self::new((0..n).map(|i| f(i as f64 * step)).collect(), step)
    }

    pub fn closed_form(d: f64, t_max: f64, step: f64) -> Result<Self> {
        Self::sample(|t| d_profile(d, t), t_max, step)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn left_value(&self) -> f64 {
        self.left_value
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples.len()).map(move |i| i as f64 * self.step)
    }
}

fn second_derivative(f: &[f64], k: f64) -> Vec<f64> {
    let n = f.len();
    let k2 = k * k;
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        out[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / k2;
    }
    out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / k2;
    out[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / k2;
    out
}

// Composite Simpson; an odd interval count ends with one 3/8 panel.
fn simpson(y: &[f64], k: f64) -> f64 {
    let intervals = y.len() - 1;
    let (even, tail) = if intervals % 2 == 0 {
        (intervals, false)
    } else {
        (intervals - 3, true)
    };
    let mut s = 0.0;
    for p in (0..even).step_by(2) {
        s += y[p] + 4.0 * y[p + 1] + y[p + 2];
    }
    s *= k / 3.0;
    if tail {
        let q = even;
        s += 3.0 * k / 8.0 * (y[q] + 3.0 * y[q + 1] + 3.0 * y[q + 2] + y[q + 3]);
    }
    s
}

/// `int ((f-1)^2 + (f'')^2) dt` over the sampled range, by Simpson's rule
/// with a finite-difference second derivative.
pub fn profile_energy(p: &Profile1D) -> Result<f64> {
    let f = p.samples();
    if f.len() < 5 {
        return invalid(format!("profile energy needs at least 5 samples, got {}", f.len()));
    }
    let f2 = second_derivative(f, p.step());
    let y: Vec<f64> = f
        .iter()
        .zip(&f2)
        .map(|(v, c)| (v - 1.0) * (v - 1.0) + c * c)
        .collect();
    Ok(simpson(&y, p.step()))
}

/// Discretized transition problem on `[0, T]` with `n` nodes.
///
/// Nodes sit at `t_i = (i - 1/2) k`, so `f_0 = f_1 = d` puts the symmetric
/// difference for `f'(0)` at zero and the pinned value at `t = 0` agrees with
/// `d` to second order. The last node lies at `T`, where the natural
/// condition is left free.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteTransition {
    pub d: f64,
    pub t_max: f64,
    pub n: usize,
}

impl DiscreteTransition {
    pub fn new(d: f64, t_max: f64, n: usize) -> Result<Self> {
        if !d.is_finite() {
            return invalid("left value must be finite");
        }
        if !(t_max >= 10.0 && t_max.is_finite()) {
            return invalid(format!("transition length must be at least 10, got {t_max}"));
        }
        if n < 101 {
            return invalid(format!("transition grid needs at least 101 nodes, got {n}"));
        }
        Ok(Self { d, t_max, n })
    }

    pub fn step(&self) -> f64 {
        self.t_max / (self.n as f64 - 1.5)
    }

    pub fn node(&self, i: usize) -> f64 {
        (i as f64 - 0.5) * self.step()
    }

    fn well_weight(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else if i + 1 == self.n {
            0.5
        } else {
            1.0
        }
    }

    /// Discrete energy of node values `f` (length `n`).
    pub fn energy(&self, f: &[f64]) -> Result<f64> {
        if f.len() != self.n {
            return invalid(format!("expected {} node values, got {}", self.n, f.len()));
        }
        let k = self.step();
        let well: f64 = (0..self.n)
            .map(|i| self.well_weight(i) * (f[i] - 1.0) * (f[i] - 1.0))
            .sum();
        let curv: f64 = (1..self.n - 1)
            .map(|i| ((f[i + 1] - 2.0 * f[i] + f[i - 1]) / (k * k)).powi(2))
            .sum();
        Ok(k * (well + curv))
    }

    /// Minimizing node values with the first two pinned to `d`.
    pub fn minimizer(&self) -> Result<Vec<f64>> {
        let (n, d, k) = (self.n, self.d, self.step());
        // unknowns are f_2 .. f_{n-1}
        let m = n - 2;
        let mut trip = Vec::with_capacity(6 * m);
        let mut rhs = vec![0.0; m];
        for i in 2..n {
            let w = self.well_weight(i);
            trip.push((i - 2, i - 2, w));
            rhs[i - 2] += w;
        }
        let c = 1.0 / (k * k * k * k);
        for i in 1..n - 1 {
            let stencil = [(i - 1, 1.0), (i, -2.0), (i + 1, 1.0)];
            let pinned: f64 = stencil.iter().filter(|(j, _)| *j < 2).map(|(_, a)| a * d).sum();
            for &(j, a) in stencil.iter().filter(|(j, _)| *j >= 2) {
                rhs[j - 2] -= c * a * pinned;
                for &(l, b) in stencil.iter().filter(|(l, _)| *l >= 2) {
                    trip.push((j - 2, l - 2, c * a * b));
                }
            }
        }
        let a = CsrMatrix::from_triplets(m, trip);
        let chol = BandCholesky::factor(&a)?;
        chol.solve_in_place(&mut rhs);
        let mut f = Vec::with_capacity(n);
        f.extend([d, d]);
        f.extend(rhs);
        Ok(f)
    }

    pub fn minimum(&self) -> Result<f64> {
        self.energy(&self.minimizer()?)
    }
}

/// Minimal discrete transition energy for left value `d` on `[0, t_max]`
/// with `n` nodes.
pub fn discrete_transition_minimum(d: f64, t_max: f64, n: usize) -> Result<f64> {
    DiscreteTransition::new(d, t_max, n)?.minimum()
}

type Poly = Vec<f64>;

fn poly_mul(a: &[f64], b: &[f64]) -> Poly {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_deriv(a: &[f64]) -> Poly {
    a.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect()
}

fn poly_integral_01(a: &[f64]) -> f64 {
    a.iter().enumerate().map(|(i, c)| c / (i as f64 + 1.0)).sum()
}

/// `int_0^1 ((p-1)^2 + (p'')^2)` for the cubic with `p(0)=w`, `p'(0)=z`,
/// `p(1)=1`, `p'(1)=0`, integrated exactly.
pub fn hermite_bridge_energy(w: f64, z: f64) -> f64 {
    // p - 1 = (w-1) H00 + z H10 in the cubic Hermite basis
    let h00 = [1.0, 0.0, -3.0, 2.0];
    let h10 = [0.0, 1.0, -2.0, 1.0];
    let q: Poly = h00
        .iter()
        .zip(&h10)
        .map(|(a, b)| (w - 1.0) * a + z * b)
        .collect();
    let q2 = poly_deriv(&poly_deriv(&q));
    poly_integral_01(&poly_mul(&q, &q)) + poly_integral_01(&poly_mul(&q2, &q2))
}

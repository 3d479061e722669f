//! Discrete evaluation of the segmentation energies.
//!
//! Integrals are rectangle sums `sum(.) h^2` over all nodes, with the same
//! forward-difference gradient and Neumann Laplacian used by the solver, so
//! each half-step of the alternating scheme is an exact minimization of the
//! quantity reported here.

use std::f64::consts::SQRT_2;

use crate::error::{invalid, Error, Result};
use crate::grid::{grad_forward, hessian_parts, laplacian, ScalarField};
use crate::models::strategy;
use crate::params::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyBreakdown {
    /// `alpha * int v^2 |grad u|^2`
    pub coupled: f64,
    /// Phase-field (Modica-Mortola type) part of the chosen model.
    pub mm: f64,
    /// `eta * int |grad u|^2`
    pub grad_perturb: f64,
    /// `gamma * int (u - g)^2`
    pub fidelity: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn new(coupled: f64, mm: f64, grad_perturb: f64, fidelity: f64) -> Self {
        Self {
            coupled,
            mm,
            grad_perturb,
            fidelity,
            total: coupled + mm + grad_perturb + fidelity,
        }
    }
}

fn h2(v: &ScalarField) -> f64 {
    v.grid().h() * v.grid().h()
}

fn well_sum(v: &ScalarField) -> f64 {
    v.values().iter().map(|x| (x - 1.0) * (x - 1.0)).sum()
}

/// `(beta/2) int (v-1)^2/eps + eps |grad v|^2`.
pub fn mm_first_order(v: &ScalarField, params: &ModelParams) -> f64 {
    let eps = params.eps;
    let grad: f64 = grad_forward(v).norm_sq().values().iter().sum();
    0.5 * params.beta * h2(v) * (well_sum(v) / eps + eps * grad)
}

/// `beta/(2 sqrt2) int (v-1)^2/eps + eps^3 (lap v)^2`.
pub fn mm_second_order_laplacian(v: &ScalarField, params: &ModelParams) -> f64 {
    let eps = params.eps;
    let lap: f64 = laplacian(v).values().iter().map(|x| x * x).sum();
    params.beta / (2.0 * SQRT_2) * h2(v) * (well_sum(v) / eps + eps.powi(3) * lap)
}

/// `sum (v_xx^2 + 2 v_xy^2 + v_yy^2) h^2`.
pub fn hessian_norm_sq(v: &ScalarField) -> f64 {
    let (vxx, vxy, vyy) = hessian_parts(v);
    let s: f64 = vxx
        .values()
        .iter()
        .zip(vxy.values())
        .zip(vyy.values())
        .map(|((a, b), c)| a * a + 2.0 * b * b + c * c)
        .sum();
    h2(v) * s
}

/// Full-Hessian variant `beta/(2 sqrt2) int (v-1)^2/eps + eps^3 |hess v|^2`.
/// Evaluation only; no solver minimizes it.
pub fn mm_second_order_hessian(v: &ScalarField, params: &ModelParams) -> f64 {
    let eps = params.eps;
    params.beta / (2.0 * SQRT_2) * (h2(v) * well_sum(v) / eps + eps.powi(3) * hessian_norm_sq(v))
}

/// `alpha s^2 int v^2 |grad u|^2` where `s` is the intensity scale.
pub fn coupled_term(u: &ScalarField, v: &ScalarField, params: &ModelParams) -> f64 {
    let gu = grad_forward(u).norm_sq();
    let s: f64 = gu.values().iter().zip(v.values()).map(|(q, vi)| vi * vi * q).sum();
    params.alpha * params.scale_sq() * h2(u) * s
}

pub fn total_energy(
    u: &ScalarField,
    v: &ScalarField,
    g: &ScalarField,
    params: &ModelParams,
) -> Result<EnergyBreakdown> {
    if !u.same_grid(v) || !u.same_grid(g) {
        return invalid("u, v and g must share one grid");
    }
    params.validate()?;
    let s2 = params.scale_sq();
    let h2 = h2(u);
    let grad_u: f64 = grad_forward(u).norm_sq().values().iter().sum();
    let misfit: f64 = u
        .values()
        .iter()
        .zip(g.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(EnergyBreakdown::new(
        coupled_term(u, v, params),
        strategy(params.model).mm_energy(v, params),
        params.eta * s2 * h2 * grad_u,
        params.gamma * s2 * h2 * misfit,
    ))
}

/// `eps int |grad v|^2 / int ((v-1)^2/eps + eps^3 |hess v|^2)`.
///
/// Stays bounded as `eps -> 0` when the interpolation inequality between
/// the first and second derivatives of `v - 1` holds uniformly.
pub fn gagliardo_ratio(v: &ScalarField, params: &ModelParams) -> Result<f64> {
    let eps = params.eps;
    let num = eps * h2(v) * grad_forward(v).norm_sq().values().iter().sum::<f64>();
    let den = h2(v) * well_sum(v) / eps + eps.powi(3) * hessian_norm_sq(v);
    if den == 0.0 {
        return Err(Error::Degenerate(
            "gagliardo ratio undefined for v identically 1".into(),
        ));
    }
    Ok(num / den)
}

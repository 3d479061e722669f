use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// Which phase-field penalty acts on the edge indicator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// `(v-1)^2/eps + eps |grad v|^2`, weight `beta/2`.
    FirstOrderAT,
    /// `(v-1)^2/eps + eps^3 |lap v|^2`, weight `beta/(2 sqrt 2)`.
    SecondOrderLaplacian,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::FirstOrderAT => "at",
            ModelKind::SecondOrderLaplacian => "laplacian",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "at" => Ok(ModelKind::FirstOrderAT),
            "laplacian" => Ok(ModelKind::SecondOrderLaplacian),
            other => invalid(format!("unknown model '{other}' (expected at|laplacian)")),
        }
    }
}

/// Boundary treatment of the edge indicator in the `v` subproblem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    /// Natural (homogeneous Neumann) rows from `L = -D^T D`.
    Neumann,
    /// `v = 1` pinned on the outer ring of nodes.
    DirichletOne,
}

impl BoundaryCondition {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryCondition::Neumann => "neumann",
            BoundaryCondition::DirichletOne => "dirichlet1",
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "neumann" => Ok(BoundaryCondition::Neumann),
            "dirichlet1" => Ok(BoundaryCondition::DirichletOne),
            other => invalid(format!(
                "unknown boundary condition '{other}' (expected neumann|dirichlet1)"
            )),
        }
    }
}

pub const DEFAULT_ALPHA: f64 = 1e-2;
pub const DEFAULT_BETA: f64 = 0.3;
pub const DEFAULT_GAMMA: f64 = 1e-3;
pub const DEFAULT_INTENSITY_SCALE: f64 = 255.0;

/// Default `eta` for a given `eps`: `1e-6 * eps^2`.
///
/// Keeps `eta / eps -> 0` while the smoothing length `sqrt(eta / gamma)`
/// stays well below one pixel for the default `gamma`.
pub fn default_eta(eps: f64) -> f64 {
    1e-6 * eps * eps
}

/// Weights of the segmentation energy.
///
/// `intensity_scale` is the gray-level range the functional sees: image
/// fields live in `[0, 1]`, and every term involving `u` or `g` is evaluated
/// on `intensity_scale * u`. With `intensity_scale = 1` the energy is the
/// plain functional on `[0, 1]` data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub eps: f64,
    pub eta: f64,
    pub model: ModelKind,
    pub bc: BoundaryCondition,
    pub intensity_scale: f64,
}

impl ModelParams {
    /// Experiment defaults for the given model and `eps`.
    pub fn new(model: ModelKind, eps: f64) -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_BETA,
            gamma: DEFAULT_GAMMA,
            eps,
            eta: default_eta(eps),
            model,
            bc: BoundaryCondition::Neumann,
            intensity_scale: DEFAULT_INTENSITY_SCALE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.alpha,
            self.beta,
            self.gamma,
            self.eps,
            self.eta,
            self.intensity_scale,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return invalid("model parameters must be finite");
        }
        if self.alpha <= 0.0 || self.beta <= 0.0 || self.eps <= 0.0 {
            return invalid(format!(
                "alpha, beta and eps must be positive (alpha={}, beta={}, eps={})",
                self.alpha, self.beta, self.eps
            ));
        }
        if self.gamma < 0.0 || self.eta < 0.0 {
            return invalid("gamma and eta must be nonnegative");
        }
        if self.eta >= self.eps {
            return invalid(format!(
                "eta must be much smaller than eps (eta={}, eps={})",
                self.eta, self.eps
            ));
        }
        if self.intensity_scale <= 0.0 {
            return invalid("intensity scale must be positive");
        }
        Ok(())
    }

    /// Square of the intensity scale; multiplies every `u`-dependent term.
    pub fn scale_sq(&self) -> f64 {
        self.intensity_scale * self.intensity_scale
    }
}

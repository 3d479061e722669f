//! Phase-field penalties on the edge indicator, one strategy per model.

use crate::energy::{mm_first_order, mm_second_order_laplacian};
use crate::error::Result;
use crate::grid::ScalarField;
use crate::linsolve::{assemble_v_system_first_order, assemble_v_system_second_order, LinearSystem};
use crate::params::{ModelKind, ModelParams};
use crate::registry::Registry;

pub trait PhaseFieldModel: Send + Sync {
    fn kind(&self) -> ModelKind;

    fn name(&self) -> &'static str {
        self.kind().name()
    }

    /// Value of the phase-field penalty for indicator `v`.
    fn mm_energy(&self, v: &ScalarField, params: &ModelParams) -> f64;

    /// Linear system whose solution minimizes the energy in `v` for fixed `u`.
    fn assemble_v_system(&self, u: &ScalarField, params: &ModelParams) -> Result<LinearSystem>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FirstOrderAT;

impl PhaseFieldModel for FirstOrderAT {
    fn kind(&self) -> ModelKind {
        ModelKind::FirstOrderAT
    }

    fn mm_energy(&self, v: &ScalarField, params: &ModelParams) -> f64 {
        mm_first_order(v, params)
    }

    fn assemble_v_system(&self, u: &ScalarField, params: &ModelParams) -> Result<LinearSystem> {
        assemble_v_system_first_order(u, params)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SecondOrderLaplacian;

impl PhaseFieldModel for SecondOrderLaplacian {
    fn kind(&self) -> ModelKind {
        ModelKind::SecondOrderLaplacian
    }

    fn mm_energy(&self, v: &ScalarField, params: &ModelParams) -> f64 {
        mm_second_order_laplacian(v, params)
    }

    fn assemble_v_system(&self, u: &ScalarField, params: &ModelParams) -> Result<LinearSystem> {
        assemble_v_system_second_order(u, params)
    }
}

static FIRST_ORDER: FirstOrderAT = FirstOrderAT;
static SECOND_ORDER: SecondOrderLaplacian = SecondOrderLaplacian;

pub fn strategy(kind: ModelKind) -> &'static dyn PhaseFieldModel {
    match kind {
        ModelKind::FirstOrderAT => &FIRST_ORDER,
        ModelKind::SecondOrderLaplacian => &SECOND_ORDER,
    }
}

/// All models by name.
pub fn model_registry() -> Registry<dyn PhaseFieldModel> {
    let mut r: Registry<dyn PhaseFieldModel> = Registry::new("model");
    r.register("at", Box::new(FirstOrderAT)).expect("unique name");
    r.register("laplacian", Box::new(SecondOrderLaplacian)).expect("unique name");
    r
}

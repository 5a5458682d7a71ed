//! Hierarchical equations of motion for two qubits, each coupled to its own
//! Drude-Lorentz bath.

mod checkpoint;
mod generator;
mod hierarchy;
mod integrate;
mod stationary;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ModelError, ModelSpec};
use crate::qstate::QStateError;

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint, CHECKPOINT_VERSION};
pub use generator::{
    balance_factor, g_superop, heom_rhs, scaling_for, superop_commutator, CommutatorKind,
    HeomGenerator,
};
pub use hierarchy::{
    ado_count, index_at, position, working_basis, AdoScaling, HierarchyIndex, HierarchyState,
    ADO_LEN,
};
pub use integrate::{
    find_steady_state, find_steady_state_from, propagate, propagate_from, Propagation,
    SteadyState,
};
pub use stationary::{residual, solve_stationary, steady_state, SteadyMethod};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HeomError {
    #[error("hierarchy depth {depth} is below the required {required}")]
    DepthTooSmall { depth: usize, required: usize },
    #[error("hierarchy depth {depth} is too large for this operation (limit {limit})")]
    DepthTooLarge { depth: usize, limit: usize },
    #[error("expected hierarchy depth {expected}, got {got}")]
    DepthMismatch { expected: usize, got: usize },
    #[error("index ({n1}, {n2}) is outside a depth-{depth} hierarchy")]
    IndexOutOfRange { n1: usize, n2: usize, depth: usize },
    #[error("hierarchy state scaling does not match the generator")]
    ScalingMismatch,
    #[error("coupling operators are not diagonal in the working basis")]
    CouplingNotDiagonal,
    #[error("numerical blowup at t = {t}: max ADO entry {norm}")]
    NumericalBlowup { t: f64, norm: f64 },
    #[error("steady state not reached by t = {t_max} (last window distance {distance:e})")]
    NotConverged { t_max: f64, distance: f64 },
    #[error("sparse stationary solve failed: {0}")]
    Solver(String),
    #[error("invalid integrator setting {name} = {value}")]
    InvalidConfig { name: &'static str, value: f64 },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    QState(#[from] QStateError),
}

pub type Result<T> = std::result::Result<T, HeomError>;

/// Settings for time propagation and steady-state detection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_max: f64,
    /// Trace-distance threshold between `rho(t)` and `rho(t - window)`.
    pub steady_tol: f64,
    /// Comparison window; `None` means `10 / min(gamma)`.
    pub steady_window: Option<f64>,
    pub depth: usize,
    pub rescale: bool,
    /// Observer stride in steps.
    pub record_every: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 0.005,
            t_max: 20_000.0,
            steady_tol: 1e-7,
            steady_window: None,
            depth: 50,
            rescale: true,
            record_every: 200,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name, value: f64| {
            if value > 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(HeomError::InvalidConfig { name, value })
            }
        };
        positive("dt", self.dt)?;
        positive("t_max", self.t_max)?;
        positive("steady_tol", self.steady_tol)?;
        if let Some(w) = self.steady_window {
            positive("steady_window", w)?;
        }
        if self.depth == 0 {
            return Err(HeomError::DepthTooSmall { depth: 0, required: 1 });
        }
        if self.record_every == 0 {
            return Err(HeomError::InvalidConfig { name: "record_every", value: 0.0 });
        }
        Ok(())
    }

    pub fn window_for(&self, model: &ModelSpec) -> f64 {
        self.steady_window
            .unwrap_or_else(|| 10.0 / model.bath1.gamma.min(model.bath2.gamma))
    }

    /// Step size above which RK4 is likely inaccurate for `model`.
    pub fn recommended_max_dt(model: &ModelSpec) -> f64 {
        let scale = [
            model.system.omega0.abs(),
            model.system.lambda_s.abs(),
            10.0 * model.bath1.lambda_b.max(model.bath2.lambda_b),
            model.bath1.gamma.max(model.bath2.gamma),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        if scale > 0.0 {
            1.0 / (10.0 * scale)
        } else {
            f64::INFINITY
        }
    }

    pub(crate) fn warn_if_coarse(&self, model: &ModelSpec) {
        let limit = Self::recommended_max_dt(model);
        if self.dt > limit {
            log::warn!("dt = {} exceeds the recommended {:.3e} for this model", self.dt, limit);
        }
    }
}

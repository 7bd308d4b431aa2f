//! Deterministic integration of autonomous ODE systems.
//!
//! Two methods: classical fixed-step RK4 (the default — bit-reproducible
//! trajectories on a fixed grid) and adaptive Dormand–Prince 5(4) with
//! cubic Hermite resampling onto the same uniform grid, kept around for
//! cross-validation of the fixed-step results.

mod dopri;
mod period;
mod rk4;

pub use dopri::integrate_dopri45;
pub use period::{detect_period, detect_period_signal, NoPeriod};
pub use rk4::{integrate_rk4, step_rk4};

use serde::{Deserialize, Serialize};
use std::ops::Index;
use thiserror::Error;

/// Any state component beyond this magnitude is treated as divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e9;

/// Adaptive steps below this size abort the integration.
pub const MIN_ADAPTIVE_STEP: f64 = 1e-12;

/// A point in state space. Components are finite by construction of the
/// integrators; divergence surfaces as [`OdeError::NonFiniteState`] instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector(pub Vec<f64>);

impl StateVector {
    pub fn new(values: Vec<f64>) -> StateVector {
        StateVector(values)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl From<Vec<f64>> for StateVector {
    fn from(values: Vec<f64>) -> Self {
        StateVector(values)
    }
}

impl Index<usize> for StateVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Right-hand side of an autonomous system, `dy/dt = f(y)`.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn eval_rhs(&self, state: &[f64], out: &mut [f64]);
}

/// Adapter for closure-defined systems.
pub struct FnSystem<F: Fn(&[f64], &mut [f64])> {
    pub dim: usize,
    pub rhs: F,
}

impl<F: Fn(&[f64], &mut [f64])> OdeSystem for FnSystem<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval_rhs(&self, state: &[f64], out: &mut [f64]) {
        (self.rhs)(state, out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rk4Fixed,
    DormandPrince45,
}

/// Integration settings. `dt` is the RK4 step and the uniform output grid
/// spacing; for Dormand–Prince it is also the initial trial step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub method: Method,
    pub dt: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub t_end: f64,
    pub transient_fraction: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::Rk4Fixed,
            dt: 0.01,
            abs_tol: 1e-9,
            rel_tol: 1e-9,
            t_end: 2000.0,
            transient_fraction: 0.5,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), OdeError> {
        let fail = |msg: String| Err(OdeError::InvalidConfig(msg));
        if !(self.dt > 0.0) {
            return fail(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end > 0.0) {
            return fail(format!("t_end must be positive, got {}", self.t_end));
        }
        if self.dt >= self.t_end {
            return fail(format!("dt ({}) must be smaller than t_end ({})", self.dt, self.t_end));
        }
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return fail("tolerances must be positive".to_string());
        }
        if !(0.0..1.0).contains(&self.transient_fraction) {
            return fail(format!(
                "transient_fraction must lie in [0, 1), got {}",
                self.transient_fraction
            ));
        }
        Ok(())
    }
}

/// Uniformly sampled solution. `times` are exact multiples of `dt` counted
/// from the integration start, so the post-transient window keeps absolute
/// time stamps.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub dt: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// One state component as a contiguous series.
    pub fn component(&self, index: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[index]).collect()
    }

    /// Keep only the first `n` samples (used to align with a trimmed
    /// phase window).
    pub fn truncated(&self, n: usize) -> Trajectory {
        Trajectory {
            times: self.times[..n.min(self.len())].to_vec(),
            states: self.states[..n.min(self.len())].to_vec(),
            dt: self.dt,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("state became non-finite or exceeded {DIVERGENCE_LIMIT:e} at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("adaptive step underflowed below {MIN_ADAPTIVE_STEP:e} at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("step budget exhausted at t = {t}")]
    TooManySteps { t: f64 },
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("initial state has dimension {got}, system expects {expected}")]
    DimensionMismatch { got: usize, expected: usize },
}

pub(crate) fn check_state(state: &[f64], t: f64) -> Result<(), OdeError> {
    for &v in state {
        if !v.is_finite() || v.abs() > DIVERGENCE_LIMIT {
            return Err(OdeError::NonFiniteState { t });
        }
    }
    Ok(())
}

/// Integrate to `t_end` and return the post-transient uniform trajectory.
///
/// The output grid is `0, dt, 2·dt, …`; the first `transient_fraction` of
/// samples is discarded. Identical inputs produce bit-identical output.
pub fn integrate<S: OdeSystem>(
    system: &S,
    initial: &StateVector,
    config: &IntegratorConfig,
) -> Result<Trajectory, OdeError> {
    config.validate()?;
    if initial.dim() != system.dim() {
        return Err(OdeError::DimensionMismatch {
            got: initial.dim(),
            expected: system.dim(),
        });
    }
    if !initial.is_finite() {
        return Err(OdeError::NonFiniteState { t: 0.0 });
    }
    let full = match config.method {
        Method::Rk4Fixed => integrate_rk4(system, initial, config)?,
        Method::DormandPrince45 => integrate_dopri45(system, initial, config)?,
    };
    let total = full.times.len();
    let drop = (config.transient_fraction * total as f64).floor() as usize;
    let kept = total - drop;
    if kept < 2 {
        return Err(OdeError::InvalidConfig(format!(
            "transient_fraction {} leaves {} samples",
            config.transient_fraction, kept
        )));
    }
    Ok(Trajectory {
        times: full.times[drop..].to_vec(),
        states: full.states[drop..].to_vec(),
        dt: full.dt,
    })
}

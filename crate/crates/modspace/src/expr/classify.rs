//! Static classification of a multivariate nonlinear term by modulation type.
//!
//! The taxonomy is decided numerically rather than by pattern-matching the
//! tree: `tanh(x+z)` and `tanh(z - (-x))` must land in the same class. The
//! symbolic gain ∂f/∂input is carried along for exact downstream evaluation,
//! while functional-dependence tests on quasi-random samples pick the class:
//!
//! * gain collapses onto the output  → linear modulation of the input axis,
//! * gain collapses onto the input   → linear modulation of the output axis,
//! * neither                         → gain modulation (3-D dynamics),
//! * constant gain, affine term      → no modulation at all.

use super::{differentiate, EvalError, Expr};
use crate::manifold::{functional_residual, COLLAPSE_RESIDUAL_THRESHOLD};
use crate::systems::NonlinearTermDef;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of quasi-random sample points used by [`classify_term`].
pub const CLASSIFY_SAMPLES: usize = 512;

/// Default per-variable sampling interval when no trajectory is available.
pub const DEFAULT_SAMPLING_RANGE: (f64, f64) = (-3.0, 3.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModulationClass {
    LinearInputModulation,
    LinearOutputModulation,
    GainModulation,
    NoModulation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CollapseAxis {
    Output,
    Input,
    None,
}

/// Result of static term classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermClassification {
    pub class: ModulationClass,
    /// Predicted dimensionality of the input/output/gain manifold.
    pub predicted_dim: u8,
    pub collapse_axis: CollapseAxis,
    /// Symbolic ∂f/∂input.
    pub gain_expr: Expr,
}

/// Axis-aligned sampling region for the two term variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingBox {
    pub input: (f64, f64),
    pub modulator: (f64, f64),
}

impl Default for SamplingBox {
    fn default() -> Self {
        SamplingBox {
            input: DEFAULT_SAMPLING_RANGE,
            modulator: DEFAULT_SAMPLING_RANGE,
        }
    }
}

impl SamplingBox {
    /// Widen degenerate intervals so sampling always covers an area.
    fn regularized(self) -> SamplingBox {
        fn fix(r: (f64, f64)) -> (f64, f64) {
            let (lo, hi) = if r.0 <= r.1 { r } else { (r.1, r.0) };
            if hi - lo < 1e-9 {
                (lo - 0.5, hi + 0.5)
            } else {
                (lo, hi)
            }
        }
        SamplingBox {
            input: fix(self.input),
            modulator: fix(self.modulator),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error("degenerate term: expression does not depend on `{0}`")]
    DegenerateTerm(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Van der Corput radical inverse in the given base.
fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let mut fraction = 1.0;
    let mut result = 0.0;
    while index > 0 {
        fraction /= base as f64;
        result += fraction * (index % base) as f64;
        index /= base;
    }
    result
}

/// Classify with the default sampling box and seed 0.
pub fn classify_term(term: &NonlinearTermDef) -> Result<TermClassification, ClassifyError> {
    classify_term_with(term, SamplingBox::default(), 0)
}

/// Classify by sampling `CLASSIFY_SAMPLES` Halton points over `sampling_box`.
///
/// The seed offsets the Halton sequence; any seed gives an equally valid
/// low-discrepancy point set, and a fixed seed gives bit-reproducible output.
pub fn classify_term_with(
    term: &NonlinearTermDef,
    sampling_box: SamplingBox,
    seed: u64,
) -> Result<TermClassification, ClassifyError> {
    let gain_expr = differentiate(&term.expr, &term.input_var);
    let gain_wrt_modulator = differentiate(&term.expr, &term.modulator_var);
    if gain_expr.is_zero() {
        return Err(ClassifyError::DegenerateTerm(term.input_var.clone()));
    }
    if gain_wrt_modulator.is_zero() {
        return Err(ClassifyError::DegenerateTerm(term.modulator_var.clone()));
    }

    let sampling_box = sampling_box.regularized();
    let offset = 1 + (seed % (1 << 20));
    let mut inputs = Vec::with_capacity(CLASSIFY_SAMPLES);
    let mut outputs = Vec::with_capacity(CLASSIFY_SAMPLES);
    let mut gains = Vec::with_capacity(CLASSIFY_SAMPLES);
    for k in 0..CLASSIFY_SAMPLES as u64 {
        let u = radical_inverse(offset + k, 2);
        let v = radical_inverse(offset + k, 3);
        let z = sampling_box.input.0 + u * (sampling_box.input.1 - sampling_box.input.0);
        let x = sampling_box.modulator.0 + v * (sampling_box.modulator.1 - sampling_box.modulator.0);
        let bindings = [(term.input_var.as_str(), z), (term.modulator_var.as_str(), x)];
        outputs.push(term.expr.eval(&bindings)?);
        gains.push(gain_expr.eval(&bindings)?);
        inputs.push(z);
    }

    let gain_abs_max = gains.iter().fold(0.0_f64, |m, g| m.max(g.abs()));
    let gain_range = gains.iter().fold(f64::NEG_INFINITY, |m, g| m.max(*g))
        - gains.iter().fold(f64::INFINITY, |m, g| m.min(*g));
    let gain_constant = gain_range < 1e-9 * gain_abs_max.max(1.0);

    let (class, predicted_dim, collapse_axis) = if gain_constant && is_affine(term) {
        (ModulationClass::NoModulation, 2, CollapseAxis::Output)
    } else if collapses(&outputs, &gains) {
        (ModulationClass::LinearInputModulation, 2, CollapseAxis::Output)
    } else if collapses(&inputs, &gains) {
        (ModulationClass::LinearOutputModulation, 2, CollapseAxis::Input)
    } else {
        (ModulationClass::GainModulation, 3, CollapseAxis::None)
    };

    Ok(TermClassification {
        class,
        predicted_dim,
        collapse_axis,
        gain_expr,
    })
}

/// Functional dependence in either direction. Testing both orientations
/// covers relations where only one of the two quantities is monotonic in
/// the shared argument.
fn collapses(xs: &[f64], ys: &[f64]) -> bool {
    let forward = functional_residual(xs, ys).unwrap_or(f64::INFINITY);
    if forward < COLLAPSE_RESIDUAL_THRESHOLD {
        return true;
    }
    let backward = functional_residual(ys, xs).unwrap_or(f64::INFINITY);
    backward < COLLAPSE_RESIDUAL_THRESHOLD
}

/// A term is affine in its two variables when all second partials vanish.
fn is_affine(term: &NonlinearTermDef) -> bool {
    let dz = differentiate(&term.expr, &term.input_var);
    let dx = differentiate(&term.expr, &term.modulator_var);
    differentiate(&dz, &term.input_var).is_zero()
        && differentiate(&dx, &term.modulator_var).is_zero()
        && differentiate(&dz, &term.modulator_var).is_zero()
}

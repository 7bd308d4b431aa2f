//! Modulation phase space traces: input, output, and instantaneous gain
//! along a trajectory.
//!
//! The instantaneous gain is the slope of the input-output function's
//! tangent at the current state — the symbolic partial derivative of the
//! nonlinear term with respect to its input variable, evaluated along the
//! trajectory. A central-difference cross-check is provided for validation.

use crate::expr::{differentiate, CompiledExpr, EvalError};
use crate::ode::Trajectory;
use crate::systems::{NonlinearTermDef, SystemDef};
use thiserror::Error;

/// Default step for [`gain_fd`], balancing truncation against rounding.
pub const GAIN_FD_STEP: f64 = 1e-5;

/// Number of input grid points in each [`Frame`].
pub const FRAME_GRID_POINTS: usize = 401;

/// Fractional widening of the observed input range for frame grids.
const FRAME_RANGE_PADDING: f64 = 0.2;

/// Per-sample modulation coordinates along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationTrace {
    pub times: Vec<f64>,
    /// Input-variable values (the I/O function's argument).
    pub input: Vec<f64>,
    /// Modulator-variable values.
    pub modulator: Vec<f64>,
    /// Term values O = f(modulator, input).
    pub output: Vec<f64>,
    /// Instantaneous gain G = ∂f/∂input.
    pub gain: Vec<f64>,
}

impl ModulationTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dt(&self) -> f64 {
        if self.times.len() >= 2 {
            self.times[1] - self.times[0]
        } else {
            0.0
        }
    }

    /// First `n` samples, for aligning with a trimmed phase window.
    pub fn truncated(&self, n: usize) -> ModulationTrace {
        let n = n.min(self.len());
        ModulationTrace {
            times: self.times[..n].to_vec(),
            input: self.input[..n].to_vec(),
            modulator: self.modulator[..n].to_vec(),
            output: self.output[..n].to_vec(),
            gain: self.gain[..n].to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceError {
    #[error("system `{0}` has no nonlinear term definition")]
    MissingTerm(String),
    #[error("state variable `{0}` not found in trajectory")]
    UnknownVariable(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Evaluate the term and its symbolic gain at every trajectory sample.
pub fn trace(traj: &Trajectory, system: &SystemDef) -> Result<ModulationTrace, TraceError> {
    let term = system
        .term
        .as_ref()
        .ok_or_else(|| TraceError::MissingTerm(system.name.clone()))?;

    let input_idx = var_index(system, &term.input_var)?;
    let modulator_idx = var_index(system, &term.modulator_var)?;

    let gain_expr = differentiate(&term.expr, &term.input_var);
    let slots = [term.input_var.as_str(), term.modulator_var.as_str()];
    let output_prog = CompiledExpr::compile(&term.expr, &slots)
        .expect("term symbols checked at definition time");
    let gain_prog = CompiledExpr::compile(&gain_expr, &slots)
        .expect("gain symbols are a subset of the term's");

    let n = traj.len();
    let mut out = ModulationTrace {
        times: traj.times.clone(),
        input: Vec::with_capacity(n),
        modulator: Vec::with_capacity(n),
        output: Vec::with_capacity(n),
        gain: Vec::with_capacity(n),
    };
    let mut stack = Vec::new();
    for (k, state) in traj.states.iter().enumerate() {
        let values = [state[input_idx], state[modulator_idx]];
        let o = output_prog.eval(&values, &mut stack);
        let g = gain_prog.eval(&values, &mut stack);
        if !o.is_finite() || !g.is_finite() {
            return Err(TraceError::Eval(EvalError::NonFiniteResult {
                context: format!("term at t = {}", traj.times[k]),
            }));
        }
        out.input.push(values[0]);
        out.modulator.push(values[1]);
        out.output.push(o);
        out.gain.push(g);
    }
    Ok(out)
}

fn var_index(system: &SystemDef, name: &str) -> Result<usize, TraceError> {
    system
        .state_vars
        .iter()
        .position(|v| v == name)
        .ok_or_else(|| TraceError::UnknownVariable(name.to_string()))
}

/// Central-difference gain (f(x, z+h) − f(x, z−h)) / 2h — the independent
/// numeric check on the symbolic derivative.
pub fn gain_fd(term: &NonlinearTermDef, x: f64, z: f64, h: f64) -> Result<f64, TraceError> {
    assert!(h > 0.0, "finite-difference step must be positive");
    let hi = term.expr.eval(&[
        (term.input_var.as_str(), z + h),
        (term.modulator_var.as_str(), x),
    ])?;
    let lo = term.expr.eval(&[
        (term.input_var.as_str(), z - h),
        (term.modulator_var.as_str(), x),
    ])?;
    let g = (hi - lo) / (2.0 * h);
    if g.is_finite() {
        Ok(g)
    } else {
        Err(TraceError::Eval(EvalError::NonFiniteResult {
            context: format!("central difference at ({x}, {z})"),
        }))
    }
}

/// A snapshot of the input-output plane at one instant: the I/O curve for
/// the frame's modulator value, the current state on it, and the tangent
/// slope there.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub time: f64,
    pub modulator_value: f64,
    /// Fixed input grid shared by all frames of one call.
    pub input_grid: Vec<f64>,
    /// f(modulator_value, grid point) for each grid point.
    pub curve: Vec<f64>,
    pub state_input: f64,
    pub state_output: f64,
    /// Tangent slope at the state point.
    pub gain: f64,
}

/// Evenly spaced frames over the trajectory for the input-output-space
/// animation. The grid spans the visited input range widened by 20%, so the
/// curve's shape is visible beyond the cycle itself.
pub fn io_space_frames(
    traj: &Trajectory,
    system: &SystemDef,
    n_frames: usize,
) -> Result<Vec<Frame>, TraceError> {
    assert!(n_frames >= 1, "need at least one frame");
    let tr = trace(traj, system)?;
    let term = system.term.as_ref().expect("trace checked the term");

    let (lo, hi) = tr
        .input
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let pad = (hi - lo).max(1e-9) * FRAME_RANGE_PADDING;
    let (lo, hi) = (lo - pad, hi + pad);
    let input_grid: Vec<f64> = (0..FRAME_GRID_POINTS)
        .map(|i| lo + (hi - lo) * i as f64 / (FRAME_GRID_POINTS - 1) as f64)
        .collect();

    let slots = [term.input_var.as_str(), term.modulator_var.as_str()];
    let prog = CompiledExpr::compile(&term.expr, &slots)
        .expect("term symbols checked at definition time");

    let n = tr.len();
    let mut frames = Vec::with_capacity(n_frames);
    let mut stack = Vec::new();
    for f in 0..n_frames {
        let idx = if n_frames == 1 {
            0
        } else {
            f * (n - 1) / (n_frames - 1)
        };
        let xm = tr.modulator[idx];
        let curve: Vec<f64> = input_grid
            .iter()
            .map(|&z| prog.eval(&[z, xm], &mut stack))
            .collect();
        frames.push(Frame {
            time: tr.times[idx],
            modulator_value: xm,
            input_grid: input_grid.clone(),
            curve,
            state_input: tr.input[idx],
            state_output: tr.output[idx],
            gain: tr.gain[idx],
        });
    }
    Ok(frames)
}

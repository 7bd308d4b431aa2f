//! The end-to-end pipeline: integrate, trace, phase, symmetry, manifold,
//! and static classification for one system in one call.

use crate::expr::{classify_term_with, ClassifyError, SamplingBox, TermClassification};
use crate::manifold::{classify_manifold, CollapseReport, ManifoldError};
use crate::modulation::{trace, ModulationTrace, TraceError};
use crate::ode::{detect_period_signal, integrate, IntegratorConfig, OdeError, Trajectory};
use crate::phase::{analytic_phase, gain_extrema, symmetry_score, Extremum, PhaseError,
    PhaseSeries, SymmetryReport};
use crate::systems::{SystemDef, SystemError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Phase(#[from] PhaseError),
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

/// Everything the command-line `analyze` step produces, in memory.
#[derive(Debug, Clone)]
pub struct Analysis {
    /// Post-transient trajectory on the uniform grid.
    pub trajectory: Trajectory,
    /// Modulation trace, trimmed to the whole-period phase window.
    pub trace: ModulationTrace,
    pub phase: PhaseSeries,
    /// Period of the output oscillation.
    pub period: f64,
    pub extrema: Vec<Extremum>,
    pub symmetry: SymmetryReport,
    pub collapse: CollapseReport,
    /// Static classification, sampled over the region the trajectory
    /// actually visits.
    pub classification: TermClassification,
}

/// Run the whole pipeline for `system`.
///
/// The static classifier samples the bounding box of the observed
/// (input, modulator) values rather than the default box, so the verdict
/// reflects the visited region; `seed` offsets that sampling.
pub fn run_analysis(
    system: &SystemDef,
    config: &IntegratorConfig,
    seed: u64,
) -> Result<Analysis, AnalysisError> {
    let term = system
        .term
        .as_ref()
        .ok_or_else(|| TraceError::MissingTerm(system.name.clone()))?;

    let compiled = system.compile()?;
    let trajectory = integrate(&compiled, &system.default_initial(), config)?;
    let full_trace = trace(&trajectory, system)?;

    let period = detect_period_signal(&full_trace.output, trajectory.dt)
        .map_err(PhaseError::NotOscillatory)?;
    let phase = analytic_phase(&full_trace.output, trajectory.dt)?;
    let trace = full_trace.truncated(phase.len());

    let extrema = gain_extrema(&trace);
    let symmetry = symmetry_score(&trace, &phase)?;
    let collapse = classify_manifold(&trace)?;

    let sampling_box = SamplingBox {
        input: min_max(&trace.input),
        modulator: min_max(&trace.modulator),
    };
    let classification = classify_term_with(term, sampling_box, seed)?;

    Ok(Analysis {
        trajectory,
        trace,
        phase,
        period,
        extrema,
        symmetry,
        collapse,
        classification,
    })
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    })
}

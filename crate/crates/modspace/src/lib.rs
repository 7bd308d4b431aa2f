//! Modulation phase space analysis of nonlinear dynamical systems.
//!
//! A multivariate nonlinear term `f(x, z)` can be read as an input-output
//! function of one variable whose shape is controlled by the other: the
//! modulator either *shifts* the curve along its input or output axis
//! (linear modulation) or *changes its slope* (gain modulation). This crate
//! simulates such systems, re-embeds their trajectories in the
//! input/output/instantaneous-gain space, and measures the consequences:
//! whether the motion collapses onto a 2-D surface, how gain extrema space
//! out in oscillation phase, and whether the phase–gain relationship keeps
//! a mirror symmetry under parameter perturbation.
//!
//! ```
//! use modspace::systems::builtin;
//! use modspace::expr::{classify_term, ModulationClass};
//!
//! let system = builtin("rossler_v1")?;
//! let class = classify_term(system.term.as_ref().unwrap())?;
//! assert_eq!(class.class, ModulationClass::LinearInputModulation);
//! assert_eq!(class.predicted_dim, 2);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```
//!
//! The longer walkthrough lives in the `book/` directory of the repository;
//! its code snippets are compiled as doctests by the `book-tests` crate.

pub mod analysis;
pub mod expr;
pub mod manifold;
pub mod modulation;
pub mod ode;
pub mod phase;
pub mod systems;

pub use analysis::{run_analysis, Analysis, AnalysisError};
pub use expr::{classify_term, differentiate, parse, Expr, ModulationClass, TermClassification};
pub use manifold::{classify_manifold, functional_residual, CollapseReport, ManifoldVerdict};
pub use modulation::{gain_fd, io_space_frames, trace, Frame, ModulationTrace};
pub use ode::{
    detect_period, integrate, step_rk4, IntegratorConfig, Method, StateVector, Trajectory,
};
pub use phase::{
    analytic_phase, extrema_phase_diffs, gain_extrema, phase_plasticity_report, symmetry_score,
    PhaseSeries, PlasticityReport, PlasticityVerdict, SymmetryReport,
};
pub use systems::{builtin, parse_system_def, SystemDef};

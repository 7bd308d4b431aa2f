//! Instantaneous phase via the analytic signal, gain extrema, and the
//! phase–gain symmetry measure.
//!
//! The analytic signal is built in the frequency domain: FFT, zero the
//! negative-frequency bins, double the positive ones (DC and Nyquist
//! unchanged), inverse FFT. To limit spectral leakage the window is first
//! trimmed to a whole number of periods, and 2% of samples at each edge are
//! excluded from every downstream statistic.

use crate::modulation::ModulationTrace;
use crate::ode::{detect_period_signal, NoPeriod};
use num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

/// Minimum signal length accepted by [`analytic_phase`].
pub const MIN_PHASE_SAMPLES: usize = 64;

/// Fraction of samples dropped at each edge after the Hilbert transform.
pub const EDGE_TRIM_FRACTION: f64 = 0.02;

/// Number of phase bins (1° resolution) used by [`symmetry_score`].
pub const PHASE_BINS: usize = 360;

/// Symmetry scores below this value count as symmetric. Frozen regression
/// threshold; see the acceptance fixtures for the derivation run.
pub const SYMMETRIC_SCORE_THRESHOLD: f64 = 0.05;

/// Symmetry scores above this value count as clearly asymmetric. Frozen
/// alongside [`SYMMETRIC_SCORE_THRESHOLD`].
pub const ASYMMETRIC_SCORE_THRESHOLD: f64 = 0.15;

/// Maximum mirror-axis drift (in bins) still considered "the same axis".
pub const MAX_AXIS_DRIFT_BINS: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhaseError {
    #[error("signal too short: {got} samples (need {MIN_PHASE_SAMPLES}, spanning a full period)")]
    TooShort { got: usize },
    #[error("signal is not oscillatory: {0}")]
    NotOscillatory(#[from] NoPeriod),
    #[error("trace and phase series live on different grids")]
    GridMismatch,
    #[error("{empty} of {total} phase bins are unpopulated; not enough sampling")]
    EmptyBins { empty: usize, total: usize },
    #[error("reports use different bin counts ({a} vs {b})")]
    IncompatibleReports { a: usize, b: usize },
}

/// Instantaneous phase and amplitude of a scalar signal.
///
/// `times` are relative to the first analyzed sample. The series may be
/// shorter than the input signal: the tail is trimmed to a whole number of
/// periods before the transform.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSeries {
    pub times: Vec<f64>,
    /// Wrapped phase in (−π, π].
    pub phase: Vec<f64>,
    /// Unwrapped copy of `phase`.
    pub unwrapped: Vec<f64>,
    pub amplitude: Vec<f64>,
}

impl PhaseSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index range once the 2% edges are dropped.
    pub fn interior(&self) -> std::ops::Range<usize> {
        interior_range(self.len())
    }
}

pub(crate) fn interior_range(n: usize) -> std::ops::Range<usize> {
    let trim = ((n as f64 * EDGE_TRIM_FRACTION).ceil() as usize).max(1).min(n / 2);
    trim..n - trim
}

/// Instantaneous phase of `signal` via the frequency-domain analytic signal.
pub fn analytic_phase(signal: &[f64], dt: f64) -> Result<PhaseSeries, PhaseError> {
    let n0 = signal.len();
    if n0 < MIN_PHASE_SAMPLES {
        return Err(PhaseError::TooShort { got: n0 });
    }
    let period = detect_period_signal(signal, dt)?;

    // Largest whole number of periods that fits.
    let span = (n0 - 1) as f64 * dt;
    let whole_periods = (span / period).floor();
    if whole_periods < 1.0 {
        return Err(PhaseError::TooShort { got: n0 });
    }
    let n = (((whole_periods * period) / dt).round() as usize + 1).min(n0);

    let mean = signal.iter().sum::<f64>() / n0 as f64;
    let mut buf: Vec<Complex<f64>> = signal[..n]
        .iter()
        .map(|&v| Complex::new(v - mean, 0.0))
        .collect();

    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);

    // Analytic-signal multiplier: keep DC (and Nyquist for even n), double
    // positive frequencies, zero negative frequencies.
    if n % 2 == 0 {
        for v in &mut buf[1..n / 2] {
            *v *= 2.0;
        }
        for v in &mut buf[n / 2 + 1..] {
            *v = Complex::new(0.0, 0.0);
        }
    } else {
        for v in &mut buf[1..n.div_ceil(2)] {
            *v *= 2.0;
        }
        for v in &mut buf[n.div_ceil(2)..] {
            *v = Complex::new(0.0, 0.0);
        }
    }

    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;

    let mut phase = Vec::with_capacity(n);
    let mut amplitude = Vec::with_capacity(n);
    for v in &buf {
        let v = v * scale;
        phase.push(v.im.atan2(v.re));
        amplitude.push(v.norm());
    }

    let mut unwrapped = Vec::with_capacity(n);
    let mut offset = 0.0;
    unwrapped.push(phase[0]);
    for i in 1..n {
        let d = phase[i] - phase[i - 1];
        if d > PI {
            offset -= TAU;
        } else if d < -PI {
            offset += TAU;
        }
        unwrapped.push(phase[i] + offset);
    }

    Ok(PhaseSeries {
        times: (0..n).map(|i| i as f64 * dt).collect(),
        phase,
        unwrapped,
        amplitude,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremumKind {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extremum {
    pub index: usize,
    pub kind: ExtremumKind,
}

/// Guard window for extrema detection: 1% of a period, at least 3 samples.
fn guard_window(trace: &ModulationTrace) -> usize {
    let dt = trace.dt();
    if dt <= 0.0 {
        return 3;
    }
    let period = detect_period_signal(&trace.output, dt)
        .or_else(|_| detect_period_signal(&trace.gain, dt))
        .ok();
    match period {
        Some(p) => (((0.01 * p / dt).round() as usize).max(3)).max(3),
        None => 3,
    }
}

/// Strict local extrema of the gain with a guard window on each side.
///
/// A candidate (or plateau of equal values, reported at its midpoint) must
/// strictly dominate every sample within the window on both sides. Extrema
/// inside the trimmed 2% edges are excluded.
pub fn gain_extrema(trace: &ModulationTrace) -> Vec<Extremum> {
    let g = &trace.gain;
    let n = g.len();
    if n < 3 {
        return Vec::new();
    }
    let w = guard_window(trace);
    let interior = interior_range(n);
    let mut out = Vec::new();

    let mut start = 0usize;
    while start < n {
        let mut end = start;
        while end + 1 < n && g[end + 1] == g[start] {
            end += 1;
        }
        // Plateau [start, end]; compare against w neighbors on both sides.
        if start >= w && end + w < n {
            let v = g[start];
            let left = &g[start - w..start];
            let right = &g[end + 1..end + 1 + w];
            let is_max = left.iter().all(|&u| u < v) && right.iter().all(|&u| u < v);
            let is_min = left.iter().all(|&u| u > v) && right.iter().all(|&u| u > v);
            if is_max || is_min {
                let mid = (start + end) / 2;
                if interior.contains(&mid) {
                    out.push(Extremum {
                        index: mid,
                        kind: if is_max { ExtremumKind::Max } else { ExtremumKind::Min },
                    });
                }
            }
        }
        start = end + 1;
    }
    out
}

fn check_grids(trace: &ModulationTrace, phase: &PhaseSeries) -> Result<(), PhaseError> {
    if trace.len() != phase.len() {
        return Err(PhaseError::GridMismatch);
    }
    if trace.len() >= 2 {
        let dt_t = trace.dt();
        let dt_p = phase.times[1] - phase.times[0];
        if (dt_t - dt_p).abs() > 1e-9 * dt_t.abs().max(dt_p.abs()) {
            return Err(PhaseError::GridMismatch);
        }
    }
    Ok(())
}

/// Phase advance between consecutive gain extrema, wrapped to (0, 2π].
pub fn extrema_phase_diffs(
    trace: &ModulationTrace,
    phase: &PhaseSeries,
) -> Result<Vec<f64>, PhaseError> {
    check_grids(trace, phase)?;
    let extrema = gain_extrema(trace);
    Ok(extrema
        .windows(2)
        .map(|pair| {
            let d = phase.unwrapped[pair[1].index] - phase.unwrapped[pair[0].index];
            let r = d.rem_euclid(TAU);
            if r == 0.0 {
                TAU
            } else {
                r
            }
        })
        .collect())
}

/// Symmetry of the phase–gain relationship.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    /// Normalized asymmetry at the best mirror axis, in [0, 1].
    pub score: f64,
    /// Best mirror axis in (−π, π]. A mirror axis is a line through the
    /// origin, so this is meaningful modulo π; the reported representative
    /// is the one with the larger binned gain.
    pub axis_phase: f64,
    /// Phase gaps between consecutive gain extrema, from
    /// [`extrema_phase_diffs`].
    pub extrema_phase_diffs: Vec<f64>,
    /// Mean normalized gain per phase bin; `None` where no samples fell.
    pub binned_gain: Vec<Option<f64>>,
}

impl SymmetryReport {
    pub fn bin_count(&self) -> usize {
        self.binned_gain.len()
    }

    pub fn bin_width(&self) -> f64 {
        TAU / self.bin_count() as f64
    }
}

fn bin_of(phi: f64, bins: usize) -> usize {
    (((phi + PI) / TAU * bins as f64).floor() as usize).min(bins - 1)
}

fn bin_center(bin: usize, bins: usize) -> f64 {
    -PI + (bin as f64 + 0.5) * TAU / bins as f64
}

/// RMS mirror asymmetry of the binned curve about the center of `axis`.
fn asymmetry_at(binned: &[Option<f64>], rms_dev: f64, axis: usize) -> f64 {
    if rms_dev == 0.0 {
        return 0.0;
    }
    let bins = binned.len();
    let mut sum = 0.0;
    let mut count = 0usize;
    for k in 1..bins / 2 {
        let plus = binned[(axis + k) % bins];
        let minus = binned[(axis + bins - k) % bins];
        if let (Some(p), Some(m)) = (plus, minus) {
            sum += (p - m) * (p - m);
            count += 1;
        }
    }
    if count == 0 {
        return 0.0;
    }
    (sum / count as f64).sqrt() / rms_dev
}

/// Score the symmetry of normalized gain against oscillation phase.
///
/// Gain is divided by its maximum absolute value, (phase, gain) pairs are
/// averaged into 360 one-degree bins, and the score is the smallest RMS
/// mirror asymmetry over all candidate axes on the bin grid, normalized by
/// the RMS deviation of the binned curve. Exact mirror symmetry scores 0;
/// an unrelated curve scores near 1.
pub fn symmetry_score(
    trace: &ModulationTrace,
    phase: &PhaseSeries,
) -> Result<SymmetryReport, PhaseError> {
    check_grids(trace, phase)?;
    let n = trace.len();
    let interior = interior_range(n);
    let span = phase.unwrapped[interior.end - 1] - phase.unwrapped[interior.start];
    if span.abs() < TAU {
        return Err(PhaseError::TooShort { got: n });
    }

    let gain_max = interior
        .clone()
        .map(|i| trace.gain[i].abs())
        .fold(0.0_f64, f64::max);
    let norm = if gain_max == 0.0 { 1.0 } else { gain_max };

    let mut sums = vec![0.0; PHASE_BINS];
    let mut counts = vec![0usize; PHASE_BINS];
    for i in interior {
        let b = bin_of(phase.phase[i], PHASE_BINS);
        sums[b] += trace.gain[i] / norm;
        counts[b] += 1;
    }

    let empty = counts.iter().filter(|&&c| c == 0).count();
    if empty * 10 > PHASE_BINS {
        return Err(PhaseError::EmptyBins {
            empty,
            total: PHASE_BINS,
        });
    }

    let binned: Vec<Option<f64>> = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| if c > 0 { Some(s / c as f64) } else { None })
        .collect();

    let populated: Vec<f64> = binned.iter().flatten().copied().collect();
    let mean = populated.iter().sum::<f64>() / populated.len() as f64;
    let rms_dev = (populated.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
        / populated.len() as f64)
        .sqrt();

    // The mirror map about axis a equals the map about a+π, so scanning half
    // the circle covers every distinct axis.
    let mut best_axis = 0usize;
    let mut best = f64::INFINITY;
    for axis in 0..PHASE_BINS / 2 {
        let a = asymmetry_at(&binned, rms_dev, axis);
        if a < best {
            best = a;
            best_axis = axis;
        }
    }
    let opposite = best_axis + PHASE_BINS / 2;
    let g_here = binned[best_axis].unwrap_or(f64::NEG_INFINITY);
    let g_there = binned[opposite].unwrap_or(f64::NEG_INFINITY);
    let representative = if g_there > g_here { opposite } else { best_axis };

    Ok(SymmetryReport {
        score: best.min(1.0),
        axis_phase: bin_center(representative, PHASE_BINS),
        extrema_phase_diffs: extrema_phase_diffs(trace, phase)?,
        binned_gain: binned,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlasticityVerdict {
    /// Symmetry persists around the same axis under perturbation.
    Constrained,
    /// The phase–gain relationship reshapes freely.
    Unconstrained,
}

/// Comparison of the phase–gain relationship before and after a parameter
/// perturbation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlasticityReport {
    /// |Δ axis_phase| modulo π, in radians.
    pub axis_drift: f64,
    pub score_base: f64,
    pub score_perturbed: f64,
    /// Largest absolute change of the binned normalized gain curve.
    pub max_bin_change: f64,
    pub verdict: PlasticityVerdict,
}

/// Classify phase plasticity from the base and perturbed symmetry reports.
///
/// `Constrained` means both scores stay below the symmetric threshold and
/// the mirror axis moves by less than two bin widths; anything else is
/// `Unconstrained`.
pub fn phase_plasticity_report(
    base: &SymmetryReport,
    perturbed: &SymmetryReport,
) -> Result<PlasticityReport, PhaseError> {
    if base.bin_count() != perturbed.bin_count() {
        return Err(PhaseError::IncompatibleReports {
            a: base.bin_count(),
            b: perturbed.bin_count(),
        });
    }
    let raw = (base.axis_phase - perturbed.axis_phase).abs() % PI;
    let axis_drift = raw.min(PI - raw);

    let max_bin_change = base
        .binned_gain
        .iter()
        .zip(&perturbed.binned_gain)
        .filter_map(|(a, b)| match (a, b) {
            (Some(a), Some(b)) => Some((a - b).abs()),
            _ => None,
        })
        .fold(0.0_f64, f64::max);

    let symmetric = base.score < SYMMETRIC_SCORE_THRESHOLD
        && perturbed.score < SYMMETRIC_SCORE_THRESHOLD;
    let same_axis = axis_drift < MAX_AXIS_DRIFT_BINS * base.bin_width();

    Ok(PlasticityReport {
        axis_drift,
        score_base: base.score,
        score_perturbed: perturbed.score,
        max_bin_change,
        verdict: if symmetric && same_axis {
            PlasticityVerdict::Constrained
        } else {
            PlasticityVerdict::Unconstrained
        },
    })
}

//! Period detection from mean-level crossings.

use super::Trajectory;
use thiserror::Error;

/// Relative spread of crossing intervals above which the signal is treated
/// as non-periodic.
const MAX_SPACING_CV: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoPeriod {
    #[error("found {found} upward mean crossings, need at least 3")]
    TooFewCrossings { found: usize },
    #[error("crossing spacing varies too much (cv = {cv:.4}), signal is not periodic")]
    IrregularSpacing { cv: f64 },
}

/// Mean spacing of upward mean-level crossings, with sub-sample refinement.
///
/// Each crossing time is refined by fitting a parabola through the three
/// samples around the bracket and taking its root inside the bracket; the
/// fallback is linear interpolation. Returns [`NoPeriod`] for fewer than
/// three crossings or when the spacing coefficient of variation exceeds
/// 0.05 (chaotic or otherwise aperiodic data).
pub fn detect_period_signal(values: &[f64], dt: f64) -> Result<f64, NoPeriod> {
    let n = values.len();
    if n < 3 {
        return Err(NoPeriod::TooFewCrossings { found: 0 });
    }
    let mean = values.iter().sum::<f64>() / n as f64;

    let mut crossings = Vec::new();
    for i in 0..n - 1 {
        let a = values[i] - mean;
        let b = values[i + 1] - mean;
        if a < 0.0 && b >= 0.0 {
            let offset = refine_crossing(values, mean, i);
            crossings.push((i as f64 + offset) * dt);
        }
    }

    if crossings.len() < 3 {
        return Err(NoPeriod::TooFewCrossings {
            found: crossings.len(),
        });
    }

    let spacings: Vec<f64> = crossings.windows(2).map(|w| w[1] - w[0]).collect();
    let mean_spacing = spacings.iter().sum::<f64>() / spacings.len() as f64;
    let var = spacings
        .iter()
        .map(|s| (s - mean_spacing).powi(2))
        .sum::<f64>()
        / spacings.len() as f64;
    let cv = var.sqrt() / mean_spacing;
    if cv > MAX_SPACING_CV {
        return Err(NoPeriod::IrregularSpacing { cv });
    }
    Ok(mean_spacing)
}

/// Fractional offset of the crossing within `[i, i+1]`, in samples.
fn refine_crossing(values: &[f64], mean: f64, i: usize) -> f64 {
    let s0 = values[i] - mean;
    let s1 = values[i + 1] - mean;
    let linear = s0 / (s0 - s1);
    if i == 0 {
        return linear;
    }
    // Parabola through (-1, s_prev), (0, s0), (1, s1): q(u) = a·u² + b·u + c.
    let s_prev = values[i - 1] - mean;
    let a = 0.5 * (s1 - 2.0 * s0 + s_prev);
    let b = 0.5 * (s1 - s_prev);
    let c = s0;
    if a.abs() < 1e-12 * b.abs().max(1.0) {
        return linear;
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return linear;
    }
    let sqrt_disc = disc.sqrt();
    for root in [(-b + sqrt_disc) / (2.0 * a), (-b - sqrt_disc) / (2.0 * a)] {
        if (0.0..=1.0).contains(&root) {
            return root;
        }
    }
    linear
}

/// Period of one trajectory component. See [`detect_period_signal`].
pub fn detect_period(traj: &Trajectory, variable_index: usize) -> Result<f64, NoPeriod> {
    detect_period_signal(&traj.component(variable_index), traj.dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sine_period_recovered() {
        let dt = 0.01;
        let n = 3000; // 30 time units
        let values: Vec<f64> = (0..n).map(|i| (2.0 * PI * i as f64 * dt / 5.0).sin()).collect();
        let period = detect_period_signal(&values, dt).unwrap();
        assert!((period - 5.0).abs() < 0.01, "period {period}");
    }

    #[test]
    fn constant_signal_has_no_period() {
        let values = vec![2.0; 500];
        assert!(matches!(
            detect_period_signal(&values, 0.01),
            Err(NoPeriod::TooFewCrossings { .. })
        ));
    }

    #[test]
    fn irregular_signal_rejected() {
        // Two incommensurate tones blended strongly enough to destroy
        // crossing regularity.
        let dt = 0.01;
        let values: Vec<f64> = (0..8000)
            .map(|i| {
                let t = i as f64 * dt;
                (2.0 * PI * t / 5.0).sin() + 0.9 * (2.0 * PI * t / 3.1).sin()
            })
            .collect();
        assert!(matches!(
            detect_period_signal(&values, dt),
            Err(NoPeriod::IrregularSpacing { .. })
        ));
    }
}

//! Functional-collapse tests for modulation phase space.
//!
//! A trajectory in input/output/gain coordinates is effectively
//! two-dimensional when the gain is a function of one of the other two
//! coordinates. The instrument here is a binned conditional-variance
//! residual: sort by the candidate explanatory coordinate, cut into
//! equal-occupancy bins, and measure how much of the gain's variation
//! survives within bins once each bin's local linear trend is removed.
//! An exact functional relation leaves almost nothing; an independent
//! signal leaves everything. Detrending matters: measuring against the
//! bare bin mean leaves a bin-width resolution floor that an exact
//! relation with nonzero slope cannot get under.

use crate::modulation::ModulationTrace;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Normalized residual below which a functional dependence is declared.
/// Shared between the static term classifier and the trajectory-based
/// manifold test so the two can be compared like for like.
pub const COLLAPSE_RESIDUAL_THRESHOLD: f64 = 0.02;

/// Number of equal-occupancy bins used by [`functional_residual`].
const RESIDUAL_BINS: usize = 64;

/// Maximum polynomial degree tried when fitting a collapsed relation.
const MAX_FIT_DEGREE: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ManifoldVerdict {
    CollapsedOnOutput,
    CollapsedOnInput,
    ThreeDimensional,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ManifoldError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
}

/// Outcome of the dimensionality test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseReport {
    pub residual_vs_output: f64,
    pub residual_vs_input: f64,
    pub verdict: ManifoldVerdict,
    /// Ascending coefficients of the lowest-degree polynomial (degree ≤ 6)
    /// reproducing gain from the collapse axis, when one exists.
    pub fitted_relation: Option<Vec<f64>>,
    /// Binned (axis, gain) table when the relation is not polynomial.
    pub binned_relation: Option<Vec<(f64, f64)>>,
}

/// Normalized conditional-variance residual of `ys` explained by `xs`.
///
/// Zero means `ys` is a function of `xs` on the sampled set; values near one
/// mean `xs` explains nothing. Constant `ys` returns zero. Invariant under
/// affine rescaling of `xs` and positive rescaling of `ys`.
pub fn functional_residual(xs: &[f64], ys: &[f64]) -> Result<f64, ManifoldError> {
    let n = xs.len().min(ys.len());
    if n < 100 {
        return Err(ManifoldError::TooFewSamples { needed: 100, got: n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));

    let mean = ys.iter().take(n).sum::<f64>() / n as f64;
    let total_var = ys.iter().take(n).map(|y| (y - mean).powi(2)).sum::<f64>() / n as f64;
    if total_var == 0.0 {
        return Ok(0.0);
    }

    let mut within = 0.0;
    for b in 0..RESIDUAL_BINS {
        let lo = b * n / RESIDUAL_BINS;
        let hi = (b + 1) * n / RESIDUAL_BINS;
        if hi <= lo {
            continue;
        }
        within += bin_residual_sq(&order[lo..hi], xs, ys);
    }
    Ok((within / n as f64).sqrt() / total_var.sqrt())
}

/// Sum of squared deviations of a bin's `ys` from its least-squares line in
/// `xs`. Tied `xs` fall back to deviation from the mean — spread there is
/// genuinely unexplained by any function of `xs`.
fn bin_residual_sq(bin: &[usize], xs: &[f64], ys: &[f64]) -> f64 {
    let m = bin.len() as f64;
    let x_mean = bin.iter().map(|&i| xs[i]).sum::<f64>() / m;
    let y_mean = bin.iter().map(|&i| ys[i]).sum::<f64>() / m;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &i in bin {
        sxx += (xs[i] - x_mean) * (xs[i] - x_mean);
        sxy += (xs[i] - x_mean) * (ys[i] - y_mean);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    bin.iter()
        .map(|&i| {
            let fitted = y_mean + slope * (xs[i] - x_mean);
            (ys[i] - fitted).powi(2)
        })
        .sum()
}

/// Binned mean gain along an axis; used for the non-polynomial fallback.
fn binned_table(xs: &[f64], ys: &[f64]) -> Vec<(f64, f64)> {
    let n = xs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut table = Vec::with_capacity(RESIDUAL_BINS);
    for b in 0..RESIDUAL_BINS {
        let lo = b * n / RESIDUAL_BINS;
        let hi = (b + 1) * n / RESIDUAL_BINS;
        if hi <= lo {
            continue;
        }
        let bin = &order[lo..hi];
        let cx = bin.iter().map(|&i| xs[i]).sum::<f64>() / bin.len() as f64;
        let cy = bin.iter().map(|&i| ys[i]).sum::<f64>() / bin.len() as f64;
        table.push((cx, cy));
    }
    table
}

/// Decide whether the trace lies on a collapsed 2-D manifold.
///
/// Gain is tested against output first, then input; if both residuals clear
/// the threshold the smaller one wins. A collapse comes with the
/// lowest-degree polynomial whose fit RMS is no worse than 110% of the
/// binned residual, or with the binned table itself when no polynomial of
/// degree ≤ 6 reaches that.
pub fn classify_manifold(trace: &ModulationTrace) -> Result<CollapseReport, ManifoldError> {
    let residual_vs_output = functional_residual(&trace.output, &trace.gain)?;
    let residual_vs_input = functional_residual(&trace.input, &trace.gain)?;

    let collapse_output = residual_vs_output < COLLAPSE_RESIDUAL_THRESHOLD;
    let collapse_input = residual_vs_input < COLLAPSE_RESIDUAL_THRESHOLD;

    let verdict = if collapse_output && (!collapse_input || residual_vs_output <= residual_vs_input)
    {
        ManifoldVerdict::CollapsedOnOutput
    } else if collapse_input {
        ManifoldVerdict::CollapsedOnInput
    } else {
        ManifoldVerdict::ThreeDimensional
    };

    let (fitted_relation, binned_relation) = match verdict {
        ManifoldVerdict::ThreeDimensional => (None, None),
        ManifoldVerdict::CollapsedOnOutput => {
            fit_relation(&trace.output, &trace.gain, residual_vs_output)
        }
        ManifoldVerdict::CollapsedOnInput => {
            fit_relation(&trace.input, &trace.gain, residual_vs_input)
        }
    };

    Ok(CollapseReport {
        residual_vs_output,
        residual_vs_input,
        verdict,
        fitted_relation,
        binned_relation,
    })
}

fn fit_relation(
    xs: &[f64],
    ys: &[f64],
    binned_residual: f64,
) -> (Option<Vec<f64>>, Option<Vec<(f64, f64)>>) {
    let n = xs.len() as f64;
    let mean = ys.iter().sum::<f64>() / n;
    let std = (ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n).sqrt();
    if std == 0.0 {
        return (Some(vec![mean]), None);
    }
    // Anything at least as tight as the binned table (with 10% slack)
    // counts as explaining the relation. The absolute floor keeps exact
    // algebraic relations, whose binned residual is rounding noise, from
    // demanding an impossible fit.
    let target = (binned_residual * 1.1).max(1e-9);
    for degree in 0..=MAX_FIT_DEGREE {
        if let Some((coeffs, rms)) = polyfit(xs, ys, degree) {
            if rms / std <= target {
                return (Some(coeffs), None);
            }
        }
    }
    (None, Some(binned_table(xs, ys)))
}

/// Least-squares polynomial fit, ascending coefficients. The abscissa is
/// scaled to [-1, 1] before forming normal equations, then coefficients are
/// mapped back, which keeps degree-6 fits well conditioned.
fn polyfit(xs: &[f64], ys: &[f64], degree: usize) -> Option<(Vec<f64>, f64)> {
    let n = xs.len();
    if n <= degree {
        return None;
    }
    let scale = xs.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(1e-300);
    let m = degree + 1;
    let mut ata = vec![0.0; m * m];
    let mut aty = vec![0.0; m];
    let mut powers = vec![0.0; m];
    for (&x, &y) in xs.iter().zip(ys) {
        let u = x / scale;
        let mut p = 1.0;
        for power in powers.iter_mut() {
            *power = p;
            p *= u;
        }
        for i in 0..m {
            for j in 0..m {
                ata[i * m + j] += powers[i] * powers[j];
            }
            aty[i] += powers[i] * y;
        }
    }
    let scaled = solve_dense(&mut ata, &mut aty, m)?;
    let mut coeffs = Vec::with_capacity(m);
    let mut s = 1.0;
    for c in scaled {
        coeffs.push(c / s);
        s *= scale;
    }
    let mut sq = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let mut acc = 0.0;
        for c in coeffs.iter().rev() {
            acc = acc * x + c;
        }
        sq += (y - acc).powi(2);
    }
    Some((coeffs, (sq / n as f64).sqrt()))
}

/// Gaussian elimination with partial pivoting on an m×m system.
fn solve_dense(a: &mut [f64], b: &mut [f64], m: usize) -> Option<Vec<f64>> {
    for col in 0..m {
        let pivot = (col..m).max_by(|&r, &s| a[r * m + col].abs().total_cmp(&a[s * m + col].abs()))?;
        if a[pivot * m + col].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for k in 0..m {
                a.swap(col * m + k, pivot * m + k);
            }
            b.swap(col, pivot);
        }
        for row in (col + 1)..m {
            let factor = a[row * m + col] / a[col * m + col];
            for k in col..m {
                a[row * m + k] -= factor * a[col * m + k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; m];
    for row in (0..m).rev() {
        let mut acc = b[row];
        for k in (row + 1)..m {
            acc -= a[row * m + k] * x[k];
        }
        x[row] = acc / a[row * m + row];
    }
    Some(x)
}

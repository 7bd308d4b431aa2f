//! Dormand–Prince 5(4) with cubic Hermite resampling onto the uniform grid.

use super::{check_state, IntegratorConfig, OdeError, OdeSystem, StateVector, Trajectory,
    MIN_ADAPTIVE_STEP};

const STAGES: usize = 7;

// Stage times are omitted: the systems here are autonomous.
const A: [[f64; 6]; STAGES] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

/// 5th-order weights (identical to the last tableau row: FSAL).
const B5: [f64; STAGES] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];

/// Embedded 4th-order weights for the error estimate.
const B4: [f64; STAGES] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const MAX_STEPS: usize = 20_000_000;

struct Node {
    t: f64,
    y: Vec<f64>,
    f: Vec<f64>,
}

/// Adaptive 5(4) integration over `[0, t_end]`, resampled by cubic Hermite
/// interpolation of the accepted steps onto the `dt` grid. Returns the full
/// trajectory including the transient prefix.
pub fn integrate_dopri45<S: OdeSystem>(
    system: &S,
    initial: &StateVector,
    config: &IntegratorConfig,
) -> Result<Trajectory, OdeError> {
    let dim = system.dim();
    let t_end = config.t_end;

    let mut k = vec![vec![0.0; dim]; STAGES];
    let mut y_stage = vec![0.0; dim];
    let mut y = initial.0.clone();
    let mut t = 0.0;
    let mut h = config.dt.min(t_end);

    let mut f0 = vec![0.0; dim];
    system.eval_rhs(&y, &mut f0);
    check_state(&f0, t)?;
    let mut nodes = vec![Node {
        t,
        y: y.clone(),
        f: f0.clone(),
    }];

    let mut steps = 0usize;
    while t < t_end - 1e-12 * t_end.max(1.0) {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(OdeError::TooManySteps { t });
        }
        if h < MIN_ADAPTIVE_STEP {
            return Err(OdeError::StepUnderflow { t });
        }
        if t + h > t_end {
            h = t_end - t;
        }

        k[0].copy_from_slice(&f0);
        for s in 1..STAGES {
            for i in 0..dim {
                let mut acc = 0.0;
                for (j, k_j) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * k_j[i];
                }
                y_stage[i] = y[i] + h * acc;
            }
            let (_, tail) = k.split_at_mut(s);
            system.eval_rhs(&y_stage, &mut tail[0]);
        }

        // 5th-order solution is stage 7's argument (FSAL): y_stage holds it.
        let y_new = y_stage.clone();

        let mut err_sq = 0.0;
        for i in 0..dim {
            let mut e = 0.0;
            for (j, k_j) in k.iter().enumerate() {
                e += (B5[j] - B4[j]) * k_j[i];
            }
            e *= h;
            let scale = config.abs_tol + config.rel_tol * y[i].abs().max(y_new[i].abs());
            err_sq += (e / scale).powi(2);
        }
        let err_norm = (err_sq / dim as f64).sqrt();

        if err_norm <= 1.0 {
            t += h;
            y.copy_from_slice(&y_new);
            check_state(&y, t)?;
            f0.copy_from_slice(&k[STAGES - 1]);
            nodes.push(Node {
                t,
                y: y.clone(),
                f: f0.clone(),
            });
        }

        let factor = if err_norm == 0.0 {
            5.0
        } else {
            (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }

    Ok(resample(&nodes, config.dt, t_end))
}

/// Cubic Hermite interpolation of the accepted nodes onto `0, dt, 2dt, …`.
fn resample(nodes: &[Node], dt: f64, t_end: f64) -> Trajectory {
    let dim = nodes[0].y.len();
    let n_samples = (t_end / dt).round() as usize + 1;
    let mut times = Vec::with_capacity(n_samples);
    let mut states = Vec::with_capacity(n_samples);

    let mut seg = 0usize;
    for i in 0..n_samples {
        let tau = i as f64 * dt;
        while seg + 2 < nodes.len() && nodes[seg + 1].t < tau {
            seg += 1;
        }
        let (a, b) = (&nodes[seg], &nodes[seg + 1]);
        let h = b.t - a.t;
        let theta = ((tau - a.t) / h).clamp(0.0, 1.0);
        let t2 = theta * theta;
        let t3 = t2 * theta;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + theta;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let mut point = vec![0.0; dim];
        for (d, p) in point.iter_mut().enumerate() {
            *p = h00 * a.y[d] + h10 * h * a.f[d] + h01 * b.y[d] + h11 * h * b.f[d];
        }
        times.push(tau);
        states.push(StateVector(point));
    }

    Trajectory { times, states, dt }
}

//! Classical fixed-step 4th-order Runge–Kutta.

use super::{check_state, IntegratorConfig, OdeError, OdeSystem, StateVector, Trajectory};

pub(crate) struct Rk4Workspace {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Workspace {
    pub(crate) fn new(dim: usize) -> Self {
        Rk4Workspace {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }

    pub(crate) fn step<S: OdeSystem>(&mut self, system: &S, y: &[f64], dt: f64, out: &mut [f64]) {
        let n = y.len();
        system.eval_rhs(y, &mut self.k1);
        for i in 0..n {
            self.tmp[i] = y[i] + 0.5 * dt * self.k1[i];
        }
        system.eval_rhs(&self.tmp, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = y[i] + 0.5 * dt * self.k2[i];
        }
        system.eval_rhs(&self.tmp, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = y[i] + dt * self.k3[i];
        }
        system.eval_rhs(&self.tmp, &mut self.k4);
        for i in 0..n {
            out[i] = y[i]
                + dt / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}

/// One classical RK4 update of an autonomous system.
///
/// A non-finite derivative propagates into the weighted sum, so checking the
/// result catches divergence in any stage.
pub fn step_rk4<S: OdeSystem>(
    system: &S,
    state: &StateVector,
    dt: f64,
) -> Result<StateVector, OdeError> {
    if !(dt > 0.0) {
        return Err(OdeError::InvalidConfig(format!("dt must be positive, got {dt}")));
    }
    if state.dim() != system.dim() {
        return Err(OdeError::DimensionMismatch {
            got: state.dim(),
            expected: system.dim(),
        });
    }
    if !state.is_finite() {
        return Err(OdeError::NonFiniteState { t: 0.0 });
    }
    let mut ws = Rk4Workspace::new(state.dim());
    let mut out = vec![0.0; state.dim()];
    ws.step(system, state.as_slice(), dt, &mut out);
    check_state(&out, dt)?;
    Ok(StateVector(out))
}

/// Fixed-grid RK4 over `[0, t_end]`; the full trajectory including the
/// transient prefix.
pub fn integrate_rk4<S: OdeSystem>(
    system: &S,
    initial: &StateVector,
    config: &IntegratorConfig,
) -> Result<Trajectory, OdeError> {
    let dt = config.dt;
    let n_steps = (config.t_end / dt).round() as usize;
    let dim = system.dim();
    let mut ws = Rk4Workspace::new(dim);

    let mut states = Vec::with_capacity(n_steps + 1);
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut y = initial.0.clone();
    let mut y_next = vec![0.0; dim];
    states.push(StateVector(y.clone()));
    times.push(0.0);

    for step in 1..=n_steps {
        let t = step as f64 * dt;
        ws.step(system, &y, dt, &mut y_next);
        check_state(&y_next, t)?;
        std::mem::swap(&mut y, &mut y_next);
        states.push(StateVector(y.clone()));
        times.push(t);
    }

    Ok(Trajectory { times, states, dt })
}

//! Cross-method and convergence checks for the integrators.

use modspace::ode::{integrate, FnSystem, IntegratorConfig, Method, StateVector};
use modspace::systems::builtin;

fn harmonic() -> FnSystem<impl Fn(&[f64], &mut [f64])> {
    FnSystem {
        dim: 2,
        rhs: |y, out| {
            out[0] = y[1];
            out[1] = -y[0];
        },
    }
}

/// Max deviation from the closed-form oscillator solution over 10 periods.
fn rk4_max_error(dt: f64) -> f64 {
    let config = IntegratorConfig {
        dt,
        t_end: 20.0 * std::f64::consts::PI,
        transient_fraction: 0.0,
        ..Default::default()
    };
    let traj = integrate(&harmonic(), &StateVector(vec![1.0, 0.0]), &config).unwrap();
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(t, s)| (s[0] - t.cos()).abs().max((s[1] + t.sin()).abs()))
        .fold(0.0, f64::max)
}

#[test]
fn rk4_is_fourth_order() {
    let coarse = rk4_max_error(0.02);
    let fine = rk4_max_error(0.01);
    let factor = coarse / fine;
    assert!(
        (12.0..=20.0).contains(&factor),
        "error-halving factor {factor} (errors {coarse:e} / {fine:e})"
    );
}

#[test]
fn dp45_and_rk4_agree_on_the_limit_cycle() {
    let system = builtin("rossler_v1").unwrap();
    let compiled = system.compile().unwrap();
    let initial = system.default_initial();
    let base = IntegratorConfig {
        dt: 0.01,
        t_end: 200.0,
        transient_fraction: 0.5,
        abs_tol: 1e-9,
        rel_tol: 1e-9,
        ..Default::default()
    };
    let rk4 = integrate(&compiled, &initial, &base).unwrap();
    let dp45 = integrate(
        &compiled,
        &initial,
        &IntegratorConfig {
            method: Method::DormandPrince45,
            ..base
        },
    )
    .unwrap();
    assert_eq!(rk4.len(), dp45.len());
    let mut sup = 0.0_f64;
    for (a, b) in rk4.states.iter().zip(&dp45.states) {
        for d in 0..3 {
            sup = sup.max((a[d] - b[d]).abs());
        }
    }
    assert!(sup < 1e-4, "sup disagreement {sup:e}");
}

#[test]
fn integration_is_bit_deterministic() {
    let system = builtin("rossler_v2").unwrap();
    let config = IntegratorConfig {
        t_end: 300.0,
        ..Default::default()
    };
    let a = integrate(&system.compile().unwrap(), &system.default_initial(), &config).unwrap();
    let b = integrate(&system.compile().unwrap(), &system.default_initial(), &config).unwrap();
    assert_eq!(a, b);
}

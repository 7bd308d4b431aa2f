//! Development aid: print the pipeline numbers for every built-in system.

use modspace::analysis::run_analysis;
use modspace::ode::IntegratorConfig;
use modspace::systems::builtin;

fn main() {
    let config = IntegratorConfig::default();
    for name in ["rossler_v1", "rossler_v2", "rossler_original", "fitzhugh_nagumo"] {
        let system = builtin(name).unwrap();
        survey(&system.name, &system, &config);
        let perturbed = system.perturb("d", -0.10);
        if let Ok(p) = perturbed {
            survey(&format!("{name} (d -10%)"), &p, &config);
        }
    }
}

fn survey(label: &str, system: &modspace::SystemDef, config: &IntegratorConfig) {
    print!("=== {label}: ");
    match run_analysis(system, config, 0) {
        Err(e) => println!("FAILED: {e}"),
        Ok(a) => {
            println!(
                "period={:.6} samples={} input=[{:.3},{:.3}] output=[{:.3},{:.3}] gain=[{:.3},{:.3}]",
                a.period,
                a.trace.len(),
                min(&a.trace.input),
                max(&a.trace.input),
                min(&a.trace.output),
                max(&a.trace.output),
                min(&a.trace.gain),
                max(&a.trace.gain),
            );
            println!(
                "    class={:?} dim={} | residuals out={:.5} in={:.5} verdict={:?} poly={:?}",
                a.classification.class,
                a.classification.predicted_dim,
                a.collapse.residual_vs_output,
                a.collapse.residual_vs_input,
                a.collapse.verdict,
                a.collapse.fitted_relation.as_ref().map(|c| c
                    .iter()
                    .map(|v| format!("{v:.4}"))
                    .collect::<Vec<_>>()
                    .join(",")),
            );
            println!(
                "    extrema={} diffs={:?}",
                a.extrema.len(),
                a.symmetry
                    .extrema_phase_diffs
                    .iter()
                    .take(8)
                    .map(|d| format!("{d:.4}"))
                    .collect::<Vec<_>>(),
            );
            println!(
                "    symmetry score={:.5} axis={:.4}",
                a.symmetry.score, a.symmetry.axis_phase
            );
        }
    }
}

fn min(v: &[f64]) -> f64 {
    v.iter().fold(f64::INFINITY, |a, &b| a.min(b))
}
fn max(v: &[f64]) -> f64 {
    v.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
}

//! Subcommand implementations.

use crate::artifacts::{
    self, ExtremumDoc, ManifestDoc, PerturbationDoc, ReportDoc, SystemManifest, ThresholdsDoc,
};
use crate::error::CliError;
use crate::figures;
use crate::{ClassifyArgs, FigureArg, MethodArg, RenderArgs, RunArgs};
use modspace::analysis::run_analysis;
use modspace::expr::classify_term_with;
use modspace::expr::SamplingBox;
use modspace::manifold::COLLAPSE_RESIDUAL_THRESHOLD;
use modspace::ode::{integrate, IntegratorConfig, Method};
use modspace::phase::{ASYMMETRIC_SCORE_THRESHOLD, SYMMETRIC_SCORE_THRESHOLD};
use modspace::systems::{builtin, caret_diagnostic, parse_system_def, SystemDef, BUILTIN_NAMES};
use serde_json::json;
use std::fs;
use std::path::Path;

pub struct ResolvedRun {
    pub system: SystemDef,
    pub source: String,
    pub perturbation: Option<(String, f64)>,
    pub integrator: IntegratorConfig,
}

fn load_definition(path: &Path) -> Result<SystemDef, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    parse_system_def(&text).map_err(|e| {
        CliError::config(format!("{}: {}", path.display(), caret_diagnostic(&text, &e)))
    })
}

fn parse_perturbation(spec: &str) -> Result<(String, f64), CliError> {
    let (param, rel) = spec.split_once(':').ok_or_else(|| {
        CliError::config(format!("--perturb expects PARAM:REL, got `{spec}`"))
    })?;
    let rel: f64 = rel
        .parse()
        .map_err(|_| CliError::config(format!("--perturb: `{rel}` is not a number")))?;
    Ok((param.to_string(), rel))
}

pub fn resolve(args: &RunArgs) -> Result<ResolvedRun, CliError> {
    let (mut system, source) = match (&args.system, &args.def) {
        (Some(name), None) => (builtin(name)?, "builtin".to_string()),
        (None, Some(path)) => (load_definition(path)?, path.display().to_string()),
        _ => {
            return Err(CliError::config(format!(
                "pick a system with --system <name> or --def <path>; built-ins are: {}",
                BUILTIN_NAMES.join(", ")
            )))
        }
    };
    let perturbation = match &args.perturb {
        None => None,
        Some(spec) => {
            let (param, rel) = parse_perturbation(spec)?;
            system = system.perturb(&param, rel)?;
            Some((param, rel))
        }
    };
    let integrator = IntegratorConfig {
        method: match args.method {
            MethodArg::Rk4 => Method::Rk4Fixed,
            MethodArg::Dp45 => Method::DormandPrince45,
        },
        dt: args.dt,
        abs_tol: args.abs_tol,
        rel_tol: args.rel_tol,
        t_end: args.t_end,
        transient_fraction: args.transient,
    };
    integrator.validate()?;
    Ok(ResolvedRun {
        system,
        source,
        perturbation,
        integrator,
    })
}

fn manifest(run: &ResolvedRun, command: &str, seed: u64, outputs: &[&str]) -> ManifestDoc {
    ManifestDoc {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        system: SystemManifest {
            name: run.system.name.clone(),
            source: run.source.clone(),
            perturbation: run.perturbation.as_ref().map(|(p, r)| PerturbationDoc {
                param: p.clone(),
                relative_change: *r,
            }),
            state_vars: run.system.state_vars.clone(),
            params: serde_json::to_value(&run.system.params).expect("params serialize"),
            definition: run.system.to_string(),
        },
        integrator: run.integrator,
        seed,
        outputs: outputs.iter().map(|s| s.to_string()).collect(),
    }
}

fn write_trajectory_csv(
    dir: &Path,
    system: &SystemDef,
    traj: &modspace::Trajectory,
) -> Result<(), CliError> {
    let mut columns: Vec<(&str, Vec<f64>)> = vec![("time", traj.times.clone())];
    for (i, var) in system.state_vars.iter().enumerate() {
        columns.push((var.as_str(), traj.component(i)));
    }
    let borrowed: Vec<(&str, &[f64])> = columns
        .iter()
        .map(|(n, c)| (*n, c.as_slice()))
        .collect();
    artifacts::write_csv(&dir.join("trajectory.csv"), &borrowed)
}

pub fn simulate(args: &RunArgs) -> Result<(), CliError> {
    let run = resolve(args)?;
    fs::create_dir_all(&args.out)?;
    let compiled = run.system.compile()?;
    let traj = integrate(&compiled, &run.system.default_initial(), &run.integrator)?;
    write_trajectory_csv(&args.out, &run.system, &traj)?;
    let doc = manifest(&run, "simulate", args.seed, &["trajectory.csv"]);
    artifacts::write_json(&args.out.join("run_manifest.json"), &doc)?;
    println!(
        "simulated {} for {} time units ({} post-transient samples) -> {}",
        run.system.name,
        run.integrator.t_end,
        traj.len(),
        args.out.display()
    );
    Ok(())
}

pub fn analyze(args: &RunArgs) -> Result<(), CliError> {
    let run = resolve(args)?;
    fs::create_dir_all(&args.out)?;
    let analysis = run_analysis(&run.system, &run.integrator, args.seed)?;

    write_trajectory_csv(&args.out, &run.system, &analysis.trajectory)?;
    artifacts::write_csv(
        &args.out.join("trace.csv"),
        &[
            ("time", &analysis.trace.times),
            ("input", &analysis.trace.input),
            ("modulator", &analysis.trace.modulator),
            ("output", &analysis.trace.output),
            ("gain", &analysis.trace.gain),
        ],
    )?;
    artifacts::write_csv(
        &args.out.join("phase.csv"),
        &[
            ("time", &analysis.trace.times),
            ("phase", &analysis.phase.phase),
            ("unwrapped", &analysis.phase.unwrapped),
            ("amplitude", &analysis.phase.amplitude),
        ],
    )?;

    let report = ReportDoc {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        system: run.system.name.clone(),
        period: analysis.period,
        classification: analysis.classification.clone(),
        collapse: analysis.collapse.clone(),
        symmetry: analysis.symmetry.clone(),
        extrema: analysis
            .extrema
            .iter()
            .map(|e| ExtremumDoc {
                index: e.index,
                kind: e.kind,
                time: analysis.trace.times[e.index],
                phase: analysis.phase.phase[e.index],
            })
            .collect(),
        thresholds: ThresholdsDoc {
            collapse_residual: COLLAPSE_RESIDUAL_THRESHOLD,
            symmetric_score: SYMMETRIC_SCORE_THRESHOLD,
            asymmetric_score: ASYMMETRIC_SCORE_THRESHOLD,
        },
        notes: vec![
            "The symmetry score is this toolkit's quantitative reading of mirror symmetry \
             in the phase-gain relationship; the source material makes the claim visually."
                .to_string(),
            "The collapse residual operationalizes the 2-D vs 3-D manifold distinction; \
             verdicts compare it against the collapse_residual threshold."
                .to_string(),
        ],
    };
    artifacts::write_json(&args.out.join("report.json"), &report)?;

    let doc = manifest(
        &run,
        "analyze",
        args.seed,
        &[
            "trajectory.csv",
            "trace.csv",
            "phase.csv",
            "report.json",
        ],
    );
    artifacts::write_json(&args.out.join("run_manifest.json"), &doc)?;

    println!(
        "analyzed {}: period {:.4}, verdict {:?}, class {:?}, symmetry score {:.4} -> {}",
        run.system.name,
        analysis.period,
        analysis.collapse.verdict,
        analysis.classification.class,
        analysis.symmetry.score,
        args.out.display()
    );
    Ok(())
}

pub fn classify(args: &ClassifyArgs) -> Result<(), CliError> {
    let system = match (&args.path, &args.system) {
        (Some(path), None) => load_definition(path)?,
        (None, Some(name)) => builtin(name)?,
        _ => {
            return Err(CliError::config(
                "pass a definition file path or --system <name>",
            ))
        }
    };
    let term = system.term.as_ref().ok_or_else(|| {
        CliError::config(format!("system `{}` defines no term", system.name))
    })?;
    let classification = classify_term_with(term, SamplingBox::default(), args.seed)?;
    let doc = json!({
        "system": system.name,
        "term": term.expr.to_string(),
        "input": term.input_var,
        "modulator": term.modulator_var,
        "classification": classification,
    });
    println!("{}", serde_json::to_string_pretty(&doc).expect("serialize"));
    Ok(())
}

pub fn render(args: &RenderArgs) -> Result<(), CliError> {
    match args.figure {
        FigureArg::IoSpace => figures::io_space(&args.out, args.frames),
        FigureArg::IogViews => figures::iog_views(&args.out),
        FigureArg::TimeseriesGain => figures::timeseries_gain(&args.out),
        FigureArg::PolarPhaseGain => {
            figures::polar_phase_gain(&args.out, args.perturbed.as_deref())
        }
    }
}

//! The four SVG figures rendered from run artifacts.

use crate::artifacts::{read_csv, read_json, trajectory_from_columns, ManifestDoc, ReportDoc};
use crate::error::CliError;
use crate::svg::{diverging_color, document, padded_range, Panel};
use modspace::modulation::io_space_frames;
use modspace::systems::parse_system_def;
use std::f64::consts::{PI, TAU};
use std::fs;
use std::path::Path;

fn subsample(xs: &[f64], ys: &[f64], max_points: usize) -> Vec<(f64, f64)> {
    let stride = (xs.len() / max_points).max(1);
    xs.iter()
        .zip(ys)
        .step_by(stride)
        .map(|(&x, &y)| (x, y))
        .collect()
}

fn load_trace(dir: &Path) -> Result<[Vec<f64>; 5], CliError> {
    let (header, mut columns) = read_csv(&dir.join("trace.csv"))?;
    let expect = ["time", "input", "modulator", "output", "gain"];
    if header != expect {
        return Err(CliError::config(format!(
            "trace.csv columns are {header:?}, expected {expect:?}"
        )));
    }
    if columns[0].len() < 2 {
        return Err(CliError::config("trace.csv holds fewer than 2 samples"));
    }
    let gain = columns.pop().unwrap();
    let output = columns.pop().unwrap();
    let modulator = columns.pop().unwrap();
    let input = columns.pop().unwrap();
    let time = columns.pop().unwrap();
    Ok([time, input, modulator, output, gain])
}

/// One SVG per frame: the current input-output curve, the modulation
/// envelope, the cycle, the state point, and its tangent.
pub fn io_space(dir: &Path, n_frames: usize) -> Result<(), CliError> {
    if n_frames == 0 {
        return Err(CliError::config("--frames must be at least 1"));
    }
    let manifest: ManifestDoc = read_json(&dir.join("run_manifest.json"))?;
    let system = parse_system_def(&manifest.system.definition)
        .map_err(|e| CliError::config(format!("manifest definition: {e}")))?;
    let (_, columns) = read_csv(&dir.join("trajectory.csv"))?;
    let traj = trajectory_from_columns(&columns)?;
    let frames = io_space_frames(&traj, &system, n_frames).map_err(|e| match e {
        modspace::modulation::TraceError::Eval(e) => CliError::Numeric(e.to_string()),
        other => CliError::Config(other.to_string()),
    })?;

    let term = system.term.as_ref().expect("frames imply a term");
    let trace = modspace::trace(&traj, &system).expect("trace follows frames");

    let x_range = (
        frames[0].input_grid[0],
        *frames[0].input_grid.last().unwrap(),
    );
    let y_range = padded_range(
        frames
            .iter()
            .flat_map(|f| f.curve.iter().copied())
            .chain(trace.output.iter().copied()),
    );
    let (mod_lo, mod_hi) = trace
        .modulator
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| {
            (l.min(v), h.max(v))
        });

    let cycle = subsample(&trace.input, &trace.output, 2500);

    for (k, frame) in frames.iter().enumerate() {
        let mut panel = Panel::new((60.0, 30.0), (520.0, 360.0), x_range, y_range);
        panel.frame(&term.input_var, &format!("f({}, {})", term.modulator_var, term.input_var));

        // Envelope: the curve at evenly spaced modulator values, light gray.
        for q in 0..=6 {
            let xm = mod_lo + (mod_hi - mod_lo) * q as f64 / 6.0;
            let pts: Vec<(f64, f64)> = frame
                .input_grid
                .iter()
                .map(|&z| {
                    let o = term
                        .expr
                        .eval(&[(term.input_var.as_str(), z), (term.modulator_var.as_str(), xm)])
                        .unwrap_or(f64::NAN);
                    (z, o)
                })
                .filter(|(_, o)| o.is_finite())
                .collect();
            panel.polyline(&pts, "stroke:#cccccc;stroke-width:1");
        }

        // The limit cycle in the input-output plane.
        panel.polyline(&cycle, "stroke:#d62728;stroke-width:1.4");

        // Current curve, state point, and tangent.
        let pts: Vec<(f64, f64)> = frame
            .input_grid
            .iter()
            .zip(&frame.curve)
            .map(|(&z, &o)| (z, o))
            .collect();
        panel.polyline(&pts, "stroke:#000000;stroke-width:1.8");
        let half = (x_range.1 - x_range.0) * 0.12;
        panel.segment(
            (frame.state_input - half, frame.state_output - frame.gain * half),
            (frame.state_input + half, frame.state_output + frame.gain * half),
            "stroke:#2ca02c;stroke-width:2",
        );
        panel.circle(frame.state_input, frame.state_output, 4.0, "fill:#d62728");
        panel.text_px(
            64.0,
            24.0,
            &format!("t = {:.2}, {} = {:.3}, gain = {:.3}", frame.time, term.modulator_var, frame.modulator_value, frame.gain),
            r##"font-size="11" fill="#222""##,
        );

        let name = if n_frames == 1 {
            "io_space.svg".to_string()
        } else {
            format!("io_space_{k:03}.svg")
        };
        fs::write(dir.join(name), document(640.0, 430.0, &[panel.into_body()]))?;
    }
    Ok(())
}

/// Three pairwise projections of the input/output/gain trajectory.
pub fn iog_views(dir: &Path) -> Result<(), CliError> {
    let [_, input, _, output, gain] = load_trace(dir)?;
    let panels = [
        (&input, &output, "input", "output"),
        (&input, &gain, "input", "gain"),
        (&output, &gain, "output", "gain"),
    ];
    let mut bodies = Vec::new();
    for (i, (xs, ys, xl, yl)) in panels.iter().enumerate() {
        let origin = (60.0 + i as f64 * 360.0, 30.0);
        let mut panel = Panel::new(
            origin,
            (300.0, 300.0),
            padded_range(xs.iter().copied()),
            padded_range(ys.iter().copied()),
        );
        panel.frame(xl, yl);
        panel.polyline(&subsample(xs, ys, 2500), "stroke:#1f77b4;stroke-width:1");
        bodies.push(panel.into_body());
    }
    fs::write(dir.join("iog_views.svg"), document(1160.0, 400.0, &bodies))?;
    Ok(())
}

/// Output against time with the gain color-coded along the curve and the
/// extrema annotated with their phase gaps.
pub fn timeseries_gain(dir: &Path) -> Result<(), CliError> {
    let [time, _, _, output, gain] = load_trace(dir)?;
    let report: ReportDoc = read_json(&dir.join("report.json"))?;

    // Show roughly six periods from the tail so the annotation stays legible.
    let dt = time[1] - time[0];
    let window = ((6.0 * report.period / dt).round() as usize).clamp(2, time.len());
    let start = time.len() - window;

    let x_range = (time[start], *time.last().unwrap());
    let y_range = padded_range(output[start..].iter().copied());
    let g_max = gain[start..]
        .iter()
        .fold(0.0_f64, |m, &g| m.max(g.abs()))
        .max(1e-12);

    let mut panel = Panel::new((60.0, 30.0), (760.0, 330.0), x_range, y_range);
    panel.frame("time", "output");

    let stride = (window / 2200).max(1);
    let mut i = start;
    while i + stride < time.len() {
        let j = i + stride;
        let t = (gain[i] / g_max + 1.0) / 2.0;
        panel.segment(
            (time[i], output[i]),
            (time[j], output[j]),
            &format!("stroke:{};stroke-width:2", diverging_color(t)),
        );
        i = j;
    }

    for (k, e) in report.extrema.iter().enumerate() {
        if e.index < start || e.index >= time.len() {
            continue;
        }
        panel.circle(e.time, output[e.index], 3.5, "fill:none;stroke:#000;stroke-width:1.2");
        // The gap annotation sits between this extremum and the next one.
        if k + 1 < report.extrema.len() {
            let next = &report.extrema[k + 1];
            if next.index < time.len() && next.index >= start {
                if let Some(diff) = report.symmetry.extrema_phase_diffs.get(k) {
                    let mid = (e.time + next.time) / 2.0;
                    panel.text(
                        mid,
                        y_range.1 - (y_range.1 - y_range.0) * 0.06,
                        &format!("{:.2}", diff),
                        r##"font-size="10" text-anchor="middle" fill="#333""##,
                    );
                }
            }
        }
    }
    panel.text_px(
        64.0,
        24.0,
        &format!(
            "{}: gain color-coded blue (-{g_max:.2}) to red (+{g_max:.2}); marks are gain extrema with phase gaps in radians",
            report.system
        ),
        r##"font-size="11" fill="#222""##,
    );
    fs::write(dir.join("timeseries_gain.svg"), document(880.0, 400.0, &[panel.into_body()]))?;
    Ok(())
}

fn polar_curve(panel: &mut Panel, binned: &[Option<f64>], color: &str) {
    let bins = binned.len();
    let centre = |b: usize| -PI + (b as f64 + 0.5) * TAU / bins as f64;
    // Split into runs of populated bins with a constant sign; negative gain
    // folds onto the same radius with a dotted stroke.
    let mut run: Vec<(f64, f64)> = Vec::new();
    let mut run_negative = false;
    let flush = |run: &mut Vec<(f64, f64)>, negative: bool, panel: &mut Panel| {
        if run.len() >= 2 {
            let style = if negative {
                format!("stroke:{color};stroke-width:1.6;stroke-dasharray:2,3")
            } else {
                format!("stroke:{color};stroke-width:1.6")
            };
            panel.polyline(run, &style);
        }
        run.clear();
    };
    for b in 0..=bins {
        let value = if b < bins { binned[b] } else { binned[0] };
        match value {
            None => flush(&mut run, run_negative, panel),
            Some(g) => {
                let negative = g < 0.0;
                if negative != run_negative {
                    flush(&mut run, run_negative, panel);
                    run_negative = negative;
                }
                let phi = centre(b % bins);
                run.push((g.abs() * phi.cos(), g.abs() * phi.sin()));
            }
        }
    }
    flush(&mut run, run_negative, panel);
}

/// Normalized gain against oscillation phase on a polar grid; the perturbed
/// run, when given, overlays in red.
pub fn polar_phase_gain(dir: &Path, perturbed: Option<&Path>) -> Result<(), CliError> {
    let report: ReportDoc = read_json(&dir.join("report.json"))?;
    let mut panel = Panel::new((50.0, 30.0), (420.0, 420.0), (-1.35, 1.35), (-1.35, 1.35));

    // Polar grid: two rings and four spokes.
    for r in [0.5, 1.0] {
        let ring: Vec<(f64, f64)> = (0..=120)
            .map(|k| {
                let a = TAU * k as f64 / 120.0;
                (r * a.cos(), r * a.sin())
            })
            .collect();
        panel.polyline(&ring, "stroke:#dddddd;stroke-width:1");
    }
    for k in 0..4 {
        let a = k as f64 * PI / 2.0;
        panel.segment((0.0, 0.0), (1.2 * a.cos(), 1.2 * a.sin()), "stroke:#dddddd;stroke-width:1");
    }
    for (label, a) in [("0", 0.0), ("pi/2", PI / 2.0), ("pi", PI), ("-pi/2", -PI / 2.0)] {
        panel.text(
            1.28 * a.cos(),
            1.28 * a.sin(),
            label,
            r##"font-size="10" text-anchor="middle" fill="#666""##,
        );
    }

    // Mirror axis of the base run.
    let axis = report.symmetry.axis_phase;
    panel.segment(
        (-1.1 * axis.cos(), -1.1 * axis.sin()),
        (1.1 * axis.cos(), 1.1 * axis.sin()),
        "stroke:#999999;stroke-width:1;stroke-dasharray:6,4",
    );

    polar_curve(&mut panel, &report.symmetry.binned_gain, "#000000");
    let mut legend = format!(
        "{}: score {:.3}, axis {:.3} rad (dotted arcs: negative gain)",
        report.system, report.symmetry.score, axis
    );

    if let Some(pdir) = perturbed {
        let pert: ReportDoc = read_json(&pdir.join("report.json"))?;
        polar_curve(&mut panel, &pert.symmetry.binned_gain, "#d62728");
        legend.push_str(&format!("; perturbed (red): score {:.3}", pert.symmetry.score));
    }
    panel.text_px(54.0, 24.0, &legend, r##"font-size="11" fill="#222""##);
    fs::write(dir.join("polar_phase_gain.svg"), document(520.0, 490.0, &[panel.into_body()]))?;
    Ok(())
}

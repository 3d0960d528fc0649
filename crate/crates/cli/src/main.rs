mod args;

use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};
use serde_json::json;

use oscfree::atlas::{classify_cell, conjecture_audit, read_csv, report_json, run_sweep, write_outputs, RegimeMap};
use oscfree::diagnostics::run_simulation_traced;
use oscfree::error::{Error, Result};
use oscfree::spectral::{max_amplification, CurveKind};

use args::{AuditArgs, Cli, Command, PointArgs, SpectrumArgs, SweepArgs};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => {
                    eprintln!("\n{}", Cli::command().render_usage());
                    ExitCode::from(1)
                }
            };
        }
    };
    let outcome = match cli.command {
        Command::Sweep(a) => sweep(a),
        Command::Solve(a) => solve(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Audit(a) => audit(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}

fn stdout_err(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn print_map_summary(map: &RegimeMap, out: &mut impl Write) -> std::io::Result<()> {
    let counts: Vec<String> = map.counts().iter().map(|(c, n)| format!("{c} {n}")).collect();
    writeln!(out, "cells: {}", counts.join(", "))
}

fn sweep(a: SweepArgs) -> Result<()> {
    let cfg = a.config()?;
    let map = run_sweep(&cfg)?;
    let audits = conjecture_audit(&map);
    let written = write_outputs(&map, &audits, &cfg)?;
    let mut out = std::io::stdout().lock();
    print_map_summary(&map, &mut out).map_err(stdout_err)?;
    for audit in &audits {
        let share = audit
            .consistency()
            .map_or("untested".to_string(), |f| format!("{:.1}%", 100.0 * f));
        writeln!(
            out,
            "{:?}: {share} of {} cells, {} counterexamples",
            audit.conjecture, audit.cells_tested, audit.counterexamples_total
        )
        .map_err(stdout_err)?;
    }
    for path in written {
        writeln!(out, "wrote {}", path.display()).map_err(stdout_err)?;
    }
    Ok(())
}

fn solve(a: PointArgs) -> Result<()> {
    let cfg = a.problem.config()?;
    cfg.diagnostics.validate()?;
    if a.every == 0 {
        return Err(Error::InvalidParameter("--every must be at least 1".into()));
    }
    let analysis = cfg.analysis()?;
    let run = run_simulation_traced(&analysis.ibvp, cfg.scheme, a.dx, a.dt, &cfg.diagnostics)?;
    let mesh = analysis.mesh(a.dx)?;
    let summary = analysis.summary(&mesh, a.dt);
    let code = classify_cell(&run.flags, Some(&summary));

    let mut out = std::io::stdout().lock();
    writeln!(out, "step,time,inf_norm,l2_norm,flipped_nodes").map_err(stdout_err)?;
    for row in run.trace.iter().step_by(a.every) {
        writeln!(
            out,
            "{},{},{},{},{}",
            row.step, row.time, row.inf_norm, row.l2_norm, row.flipped_nodes
        )
        .map_err(stdout_err)?;
    }
    let report = json!({
        "code": code,
        "dx": mesh.dx(),
        "dt": a.dt,
        "r": a.dt / (mesh.dx() * mesh.dx()),
        "flags": run.flags,
        "spectrum": summary,
    });
    writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("plain values")).map_err(stdout_err)
}

fn spectrum(a: SpectrumArgs) -> Result<()> {
    let cfg = a.problem.config()?;
    let analysis = cfg.analysis()?;
    let mesh = analysis.mesh(a.dx)?;
    let bounds: Vec<_> = CurveKind::DEFAULTS
        .iter()
        .chain([CurveKind::Monotonicity].iter())
        .map(|&kind| {
            let slack = if kind == CurveKind::VnStability {
                cfg.slack()
            } else {
                0.0
            };
            json!({ "curve": kind, "bound": kind.bound_at(&analysis, a.dx, slack) })
        })
        .collect();
    let mut report = json!({
        "equation": cfg.equation,
        "scheme": cfg.scheme,
        "bc": cfg.bc,
        "dx": mesh.dx(),
        "unknowns": analysis.unknowns(&mesh),
        "bounds": bounds,
    });
    if let Some(dt) = a.dt {
        let spectrum = if a.dense {
            analysis.dense_spectrum(&mesh, dt)?
        } else {
            analysis.spectrum(&mesh, dt)
        };
        let summary = oscfree::spectral::SpectrumSummary::of(&spectrum);
        let symbol = analysis.symbol(&mesh, dt);
        report["dt"] = json!(dt);
        report["r"] = json!(symbol.r);
        report["frozen_bound"] = json!(analysis.frozen_bound(&mesh, dt));
        report["summary"] = json!(summary);
        report["dominant"] = json!(summary.dominant());
        report["positive"] = json!(summary.positive());
        report["max_amplification"] = json!(max_amplification(&symbol));
        report["spectrum"] = json!(spectrum);
    }
    let text = serde_json::to_string_pretty(&report).expect("plain values");
    writeln!(std::io::stdout().lock(), "{text}").map_err(stdout_err)
}

fn audit(a: AuditArgs) -> Result<()> {
    let mut cfg = a.problem.config()?;
    let rows = read_csv(&a.csv)?;
    let map = RegimeMap::from_csv_cells(&rows, &cfg)?;
    // echo the grid that was read, not the defaults
    let ends = |axis: &[f64]| [axis[0], axis[axis.len() - 1]];
    cfg.dx_range = ends(&map.dx_axis);
    cfg.dt_range = ends(&map.dt_axis);
    cfg.resolution = map.dx_axis.len();
    let audits = conjecture_audit(&map);
    let text = report_json(&map, &audits, &cfg)?;
    match &a.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => std::io::stdout().lock().write_all(text.as_bytes()).map_err(stdout_err),
    }
}

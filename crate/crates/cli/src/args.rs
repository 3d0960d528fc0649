use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use oscfree::atlas::{Emit, SpectrumMode, SweepConfig};
use oscfree::error::{Error, Result};
use oscfree::problem::{BcKind, Equation, InitialCondition};
use oscfree::schemes::SchemeKind;

#[derive(Debug, Parser)]
#[command(name = "oscfree", version, about = "Regime maps for finite-difference schemes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify every cell of a (Δx, Δt) grid and write the outputs.
    Sweep(SweepArgs),
    /// Run one simulation and print its trace and flags.
    Solve(PointArgs),
    /// Print the spectrum and condition bounds for one configuration.
    Spectrum(SpectrumArgs),
    /// Audit the conjectures against a map read from CSV.
    Audit(AuditArgs),
}

fn parse_range(s: &str) -> std::result::Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [lo, hi] = parts.as_slice() else {
        return Err(format!("expected LOW,HIGH, got `{s}`"));
    };
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    Ok([num(lo)?, num(hi)?])
}

fn parse_spectrum_mode(s: &str) -> std::result::Result<SpectrumMode, String> {
    match s {
        "frozen" => Ok(SpectrumMode::Frozen),
        "per-step" => Ok(SpectrumMode::PerStep),
        _ => Err(format!("expected frozen or per-step, got `{s}`")),
    }
}

/// Problem and diagnostics settings shared by every subcommand. Flags
/// override the configuration file, which overrides the defaults.
#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// JSON file mirroring the sweep configuration fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// heat, linear-rd, nonlinear-rd or fisher.
    #[arg(long)]
    pub equation: Option<Equation>,
    /// ftcs, btcs, cn, semi, btcs-frozen or btcs-linapprox.
    #[arg(long)]
    pub scheme: Option<SchemeKind>,
    /// dirichlet or neumann.
    #[arg(long)]
    pub bc: Option<BcKind>,
    /// Initial profile: sine, sine:K, cosine, parabola, front, step, flat, zero.
    #[arg(long)]
    pub ic: Option<InitialCondition>,
    #[arg(long)]
    pub length: Option<f64>,
    #[arg(long)]
    pub final_time: Option<f64>,
    /// Divergence threshold K.
    #[arg(long = "cap-K")]
    pub cap_k: Option<f64>,
    /// Deadband relative to the initial maximum.
    #[arg(long)]
    pub deadband: Option<f64>,
    #[arg(long)]
    pub osc_min_nodes: Option<usize>,
    #[arg(long)]
    pub persistence: Option<usize>,
    #[arg(long)]
    pub transient_skip: Option<usize>,
    #[arg(long)]
    pub min_steps: Option<usize>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// C in ρ ≤ 1 + C·Δt.
    #[arg(long)]
    pub vn_slack: Option<f64>,
}

impl ProblemArgs {
    pub fn config(&self) -> Result<SweepConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                SweepConfig::from_json(&text)?
            }
            None => SweepConfig::default(),
        };
        macro_rules! set {
            ($($field:ident => $($target:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$field { cfg.$($target).+ = v; })*
            };
        }
        set!(
            equation => equation,
            scheme => scheme,
            bc => bc,
            length => length,
            final_time => final_time,
            cap_k => diagnostics.cap_k,
            deadband => diagnostics.deadband_rel,
            osc_min_nodes => diagnostics.osc_min_nodes,
            persistence => diagnostics.persistence,
            min_steps => diagnostics.min_steps,
            max_steps => diagnostics.max_steps,
        );
        if self.ic.is_some() {
            cfg.initial_condition = self.ic;
        }
        if self.transient_skip.is_some() {
            cfg.diagnostics.transient_skip = self.transient_skip;
        }
        if self.vn_slack.is_some() {
            cfg.vn_slack = self.vn_slack;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// LOW,HIGH
    #[arg(long, value_parser = parse_range)]
    pub dx_range: Option<[f64; 2]>,
    /// LOW,HIGH
    #[arg(long, value_parser = parse_range)]
    pub dt_range: Option<[f64; 2]>,
    /// Samples per axis.
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated subset of csv, image, svg, report.
    #[arg(long, value_delimiter = ',')]
    pub emit: Vec<Emit>,
    /// Logarithmic axes in the SVG.
    #[arg(long)]
    pub log_axes: bool,
    /// Write UO cells as U.
    #[arg(long)]
    pub collapse_uo: bool,
    /// frozen or per-step.
    #[arg(long, value_parser = parse_spectrum_mode)]
    pub spectrum_mode: Option<SpectrumMode>,
    #[arg(long)]
    pub curve_samples: Option<usize>,
}

impl SweepArgs {
    pub fn config(&self) -> Result<SweepConfig> {
        let mut cfg = self.problem.config()?;
        if let Some(r) = self.dx_range {
            cfg.dx_range = r;
        }
        if let Some(r) = self.dt_range {
            cfg.dt_range = r;
        }
        if let Some(n) = self.resolution {
            cfg.resolution = n;
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        if !self.emit.is_empty() {
            cfg.emit = self.emit.iter().copied().collect();
        }
        cfg.log_axes |= self.log_axes;
        cfg.collapse_uo |= self.collapse_uo;
        if let Some(mode) = self.spectrum_mode {
            cfg.spectrum_mode = mode;
        }
        if let Some(n) = self.curve_samples {
            cfg.curve_samples = n;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct PointArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    pub dx: f64,
    #[arg(long)]
    pub dt: f64,
    /// Print every k-th trace row.
    #[arg(long, default_value_t = 1)]
    pub every: usize,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    pub dx: f64,
    /// Without a time step only the condition bounds are printed.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Use the dense eigensolver on the assembled matrix.
    #[arg(long)]
    pub dense: bool,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Map written by `sweep`.
    #[arg(long)]
    pub csv: PathBuf,
    /// Write the report JSON here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

//! Regime maps over `(Δx, Δt)`: every cell is simulated and analysed, then
//! classified as oscillation-free stable, stable oscillatory, unstable with
//! oscillations or unstable. Analytic condition curves are overlaid and the
//! conjectures relating them to the map are audited.

mod audit;
mod output;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{run_simulation, DiagnosticsConfig, RunFlags};
use crate::error::{Error, Result};
use crate::problem::{
    sample_initial_condition, BcKind, BoundaryCondition, Equation, Ibvp, InitialCondition, DEFAULT_FINAL_TIME,
    DEFAULT_LENGTH,
};
use crate::schemes::{assemble_scheme, Rebuild, SchemeKind};
use crate::spectral::{
    dense_eigenvalues, effective_update_matrix, log_spaced, vn_slack_default, ConditionCurve, CurveKind, CurveSample,
    SchemeAnalysis, SpectrumSummary, CURVE_SAMPLES, DENSE_TOLERANCE,
};

pub use audit::{
    conjecture_audit, predicted_side_agreement, BandMask, Conjecture, ConjectureAudit, Counterexample, SideAgreement,
    SoRegionReport,
};
pub use output::{
    read_csv, report_json, write_csv, write_outputs, write_ppm, write_report, write_svg, CsvCell, CSV_HEADER,
};

/// Verdict for one `(Δx, Δt)` cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Code {
    /// Stable and oscillation-free.
    #[serde(rename = "OFS")]
    Ofs,
    /// Stable with oscillations.
    #[serde(rename = "SO")]
    So,
    /// Diverged after oscillating.
    #[serde(rename = "UO")]
    Uo,
    /// Diverged without oscillating.
    #[serde(rename = "U")]
    U,
    /// The scheme could not be assembled or stepped.
    #[serde(rename = "INVALID")]
    Invalid,
}

impl Code {
    pub const ALL: [Code; 5] = [Code::Ofs, Code::So, Code::Uo, Code::U, Code::Invalid];

    pub fn label(self) -> &'static str {
        match self {
            Code::Ofs => "OFS",
            Code::So => "SO",
            Code::Uo => "UO",
            Code::U => "U",
            Code::Invalid => "INVALID",
        }
    }

    pub fn is_stable(self) -> bool {
        matches!(self, Code::Ofs | Code::So)
    }

    pub fn is_unstable(self) -> bool {
        matches!(self, Code::Uo | Code::U)
    }

    pub fn is_oscillatory(self) -> bool {
        matches!(self, Code::So | Code::Uo)
    }

    /// Image colour: red, yellow, light blue, dark blue, grey.
    pub fn color(self) -> [u8; 3] {
        match self {
            Code::U => [255, 0, 0],
            Code::Uo => [255, 255, 0],
            Code::So => [135, 206, 250],
            Code::Ofs => [0, 0, 139],
            Code::Invalid => [128, 128, 128],
        }
    }

    /// Merges `UO` into `U` for outputs that only separate stable from unstable.
    pub fn collapsed(self) -> Code {
        match self {
            Code::Uo => Code::U,
            other => other,
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Code {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Code::ALL
            .into_iter()
            .find(|c| c.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownName {
                what: "classification code",
                name: s.to_string(),
            })
    }
}

/// Divergence decides first; the oscillation flag then splits each side.
///
/// Runs flagged with the wave limitation (Fisher-KPP) take the oscillation
/// verdict from the spectrum instead: the cell oscillates when the frozen
/// update matrix fails the dominance test.
pub fn classify_cell(flags: &RunFlags, summary: Option<&SpectrumSummary>) -> Code {
    let oscillatory = match summary {
        Some(s) if flags.wave_limitation => !s.dominant(),
        _ => flags.oscillatory,
    };
    match (flags.stable, oscillatory) {
        (true, false) => Code::Ofs,
        (true, true) => Code::So,
        (false, true) => Code::Uo,
        (false, false) => Code::U,
    }
}

/// Artefacts written by [`write_outputs`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emit {
    Csv,
    Image,
    Svg,
    Report,
}

impl Emit {
    pub const ALL: [Emit; 4] = [Emit::Csv, Emit::Image, Emit::Svg, Emit::Report];
}

impl FromStr for Emit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Emit::Csv),
            "image" | "ppm" => Ok(Emit::Image),
            "svg" => Ok(Emit::Svg),
            "report" | "json" => Ok(Emit::Report),
            _ => Err(Error::UnknownName {
                what: "output kind",
                name: s.to_string(),
            }),
        }
    }
}

/// Where cell spectra come from for state-dependent schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumMode {
    /// The worst-case frozen matrix, in closed form.
    #[default]
    Frozen,
    /// Dense spectra of the matrix rebuilt from sampled states of the run.
    PerStep,
}

/// Largest system for which per-step spectra are computed densely.
pub const PER_STEP_MAX_UNKNOWNS: usize = 512;
/// States sampled per run in [`SpectrumMode::PerStep`].
const PER_STEP_SAMPLES: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub dx_range: [f64; 2],
    pub dt_range: [f64; 2],
    /// Samples per axis.
    pub resolution: usize,
    pub equation: Equation,
    pub scheme: SchemeKind,
    pub bc: BcKind,
    /// Defaults to the equation's standard profile.
    pub initial_condition: Option<InitialCondition>,
    pub length: f64,
    pub final_time: f64,
    pub diagnostics: DiagnosticsConfig,
    /// `C` in `ρ ≤ 1 + C·Δt`; defaults to the equation's linear growth rate.
    pub vn_slack: Option<f64>,
    pub curves: Vec<CurveKind>,
    pub curve_samples: usize,
    pub spectrum_mode: SpectrumMode,
    pub output_dir: PathBuf,
    pub emit: BTreeSet<Emit>,
    /// Logarithmic axes in the SVG overlay.
    pub log_axes: bool,
    /// Write `UO` cells as `U`.
    pub collapse_uo: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            dx_range: [0.01, 1.0],
            dt_range: [0.01, 1.0],
            resolution: 100,
            equation: Equation::Heat,
            scheme: SchemeKind::Ftcs,
            bc: BcKind::Dirichlet,
            initial_condition: None,
            length: DEFAULT_LENGTH,
            final_time: DEFAULT_FINAL_TIME,
            diagnostics: DiagnosticsConfig::default(),
            vn_slack: None,
            curves: CurveKind::DEFAULTS.to_vec(),
            curve_samples: CURVE_SAMPLES,
            spectrum_mode: SpectrumMode::Frozen,
            output_dir: PathBuf::from("out"),
            emit: Emit::ALL.into_iter().collect(),
            log_axes: false,
            collapse_uo: false,
        }
    }
}

impl SweepConfig {
    pub fn new(equation: Equation, scheme: SchemeKind, bc: BcKind) -> Self {
        SweepConfig {
            equation,
            scheme,
            bc,
            ..Default::default()
        }
    }

    pub fn with_resolution(mut self, resolution: usize) -> Self {
        self.resolution = resolution;
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        for (name, [lo, hi]) in [("dx_range", self.dx_range), ("dt_range", self.dt_range)] {
            if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must satisfy 0 < low < high, got [{lo}, {hi}]"
                )));
            }
        }
        if self.resolution < 2 {
            return Err(Error::InvalidParameter(format!(
                "resolution must be at least 2, got {}",
                self.resolution
            )));
        }
        if let Some(c) = self.vn_slack {
            if !(c.is_finite() && c >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "stability slack must be non-negative, got {c}"
                )));
            }
        }
        self.diagnostics.validate()?;
        self.scheme.check_applicable(self.equation)?;
        self.ibvp()?;
        Ok(())
    }

    pub fn ibvp(&self) -> Result<Ibvp> {
        let standard = Ibvp::standard(self.equation, self.bc);
        let bc = BoundaryCondition {
            kind: self.bc,
            ..standard.bc
        };
        Ibvp::new(
            self.equation,
            self.length,
            bc,
            self.initial_condition.unwrap_or(standard.initial_condition),
            self.final_time,
        )
    }

    pub fn analysis(&self) -> Result<SchemeAnalysis> {
        SchemeAnalysis::new(self.scheme, self.ibvp()?)
    }

    pub fn slack(&self) -> f64 {
        self.vn_slack.unwrap_or_else(|| vn_slack_default(self.equation))
    }

    pub fn dx_axis(&self) -> Vec<f64> {
        linear_axis(self.dx_range, self.resolution)
    }

    pub fn dt_axis(&self) -> Vec<f64> {
        linear_axis(self.dt_range, self.resolution)
    }
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linear_axis([lo, hi]: [f64; 2], n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|k| {
            if k == n - 1 {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Classified grid, `dx`-major: cell `(i, j)` sits at `dx_axis[i]`, `dt_axis[j]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeMap {
    pub analysis: SchemeAnalysis,
    pub vn_slack: f64,
    pub dx_axis: Vec<f64>,
    pub dt_axis: Vec<f64>,
    pub cells: Vec<Code>,
    pub summaries: Vec<Option<SpectrumSummary>>,
    /// Runtime flags; absent for maps read back from CSV.
    pub flags: Option<Vec<Option<RunFlags>>>,
    pub curves: Vec<ConditionCurve>,
}

impl RegimeMap {
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.dt_axis.len() + j
    }

    pub fn code(&self, i: usize, j: usize) -> Code {
        self.cells[self.index(i, j)]
    }

    pub fn counts(&self) -> BTreeMap<Code, usize> {
        let mut counts = BTreeMap::new();
        for &c in &self.cells {
            *counts.entry(c).or_insert(0) += 1;
        }
        counts
    }

    pub fn distinct_codes(&self) -> BTreeSet<Code> {
        self.cells.iter().copied().collect()
    }

    /// `(i, j, dx, dt)` for every cell in storage order.
    pub fn positions(&self) -> impl Iterator<Item = (usize, usize, f64, f64)> + '_ {
        self.dx_axis
            .iter()
            .enumerate()
            .flat_map(move |(i, &dx)| self.dt_axis.iter().enumerate().map(move |(j, &dt)| (i, j, dx, dt)))
    }

    pub fn collapse_uo(&mut self) {
        for c in &mut self.cells {
            *c = c.collapsed();
        }
    }
}

/// Outcome of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellResult {
    pub code: Code,
    pub flags: Option<RunFlags>,
    pub summary: Option<SpectrumSummary>,
}

/// Simulates and analyses one cell. Failures become [`Code::Invalid`].
pub fn evaluate_cell(cfg: &SweepConfig, analysis: &SchemeAnalysis, dx: f64, dt: f64) -> CellResult {
    let summary = match cfg.spectrum_mode {
        SpectrumMode::Frozen => analysis.mesh(dx).ok().map(|mesh| analysis.summary(&mesh, dt)),
        SpectrumMode::PerStep => per_step_summary(cfg, analysis, dx, dt).ok(),
    };
    match run_simulation(&analysis.ibvp, analysis.kind, dx, dt, &cfg.diagnostics) {
        Ok(flags) => CellResult {
            code: classify_cell(&flags, summary.as_ref()),
            flags: Some(flags),
            summary,
        },
        Err(_) => CellResult {
            code: Code::Invalid,
            flags: None,
            summary,
        },
    }
}

/// Extremes over dense spectra of the update matrix rebuilt from states
/// sampled along the run. Linear schemes fall back to the frozen spectrum.
fn per_step_summary(cfg: &SweepConfig, analysis: &SchemeAnalysis, dx: f64, dt: f64) -> Result<SpectrumSummary> {
    let mesh = analysis.mesh(dx)?;
    let ibvp = &analysis.ibvp;
    let frozen = analysis.frozen_bound(&mesh, dt);
    let mut scheme = assemble_scheme(analysis.kind, ibvp.equation, &mesh, dt, &ibvp.bc, frozen)?;
    if scheme.rebuild() == Rebuild::Static {
        return Ok(analysis.summary(&mesh, dt));
    }
    if scheme.dim() > PER_STEP_MAX_UNKNOWNS {
        return Err(Error::InvalidParameter(format!(
            "per-step spectra limited to {PER_STEP_MAX_UNKNOWNS} unknowns, got {}",
            scheme.dim()
        )));
    }
    let steps = cfg.diagnostics.planned_steps(ibvp.final_time, dt);
    let stride = (steps / PER_STEP_SAMPLES).max(1);
    let mut u = sample_initial_condition(ibvp, &mesh);
    let mut acc: Option<SpectrumSummary> = None;
    for step in 0..steps {
        if step % stride == 0 {
            scheme.rebuild_for(u.values());
            let mut m = effective_update_matrix(&scheme)?;
            if scheme.rebuild() == Rebuild::ExplicitSource {
                // Explicit reaction enters the linearization through f_u.
                for (k, &v) in u.values().iter().enumerate() {
                    m[(k, k)] += dt * ibvp.equation.reaction_derivative(v);
                }
            }
            let s = SpectrumSummary::of(&dense_eigenvalues(&m, DENSE_TOLERANCE)?);
            acc = Some(match acc {
                None => s,
                Some(a) => SpectrumSummary {
                    min_re: a.min_re.min(s.min_re),
                    max_re: a.max_re.max(s.max_re),
                    rho: a.rho.max(s.rho),
                },
            });
        }
        u = scheme.step(&u)?;
        if u.values().iter().any(|v| !v.is_finite()) {
            break;
        }
    }
    acc.ok_or_else(|| Error::InvalidParameter("no states sampled".into()))
}

/// Condition curves for the configured scheme over log-spaced `Δx`.
pub fn theoretical_curves(cfg: &SweepConfig) -> Result<Vec<ConditionCurve>> {
    let analysis = cfg.analysis()?;
    Ok(curves_for(
        &analysis,
        cfg.dx_range,
        cfg.curve_samples,
        &cfg.curves,
        cfg.slack(),
    ))
}

pub(crate) fn curves_for(
    analysis: &SchemeAnalysis,
    dx_range: [f64; 2],
    samples: usize,
    kinds: &[CurveKind],
    slack: f64,
) -> Vec<ConditionCurve> {
    let dx_samples = log_spaced(dx_range[0], dx_range[1], samples);
    kinds
        .iter()
        .map(|&kind| {
            let slack = if kind == CurveKind::VnStability { slack } else { 0.0 };
            let samples = dx_samples
                .par_iter()
                .map(|&dx| {
                    kind.bound_at(analysis, dx, slack)
                        .map(|bound| CurveSample { dx, bound })
                })
                .collect::<Vec<_>>()
                .into_iter()
                .flatten()
                .collect();
            ConditionCurve {
                kind,
                samples,
                vn_slack: slack,
            }
        })
        .collect()
}

/// Runs every cell on the rayon pool.
pub fn run_sweep(cfg: &SweepConfig) -> Result<RegimeMap> {
    sweep_with(cfg, true)
}

/// Runs every cell on the calling thread, in storage order.
pub fn run_sweep_serial(cfg: &SweepConfig) -> Result<RegimeMap> {
    sweep_with(cfg, false)
}

fn sweep_with(cfg: &SweepConfig, parallel: bool) -> Result<RegimeMap> {
    cfg.validate()?;
    let analysis = cfg.analysis()?;
    let dx_axis = cfg.dx_axis();
    let dt_axis = cfg.dt_axis();
    let cells: Vec<(f64, f64)> = dx_axis
        .iter()
        .flat_map(|&dx| dt_axis.iter().map(move |&dt| (dx, dt)))
        .collect();
    let eval = |&(dx, dt): &(f64, f64)| evaluate_cell(cfg, &analysis, dx, dt);
    let results: Vec<CellResult> = if parallel {
        cells.par_iter().map(eval).collect()
    } else {
        cells.iter().map(eval).collect()
    };
    let mut map = RegimeMap {
        analysis,
        vn_slack: cfg.slack(),
        dx_axis,
        dt_axis,
        cells: results.iter().map(|r| r.code).collect(),
        summaries: results.iter().map(|r| r.summary).collect(),
        flags: Some(results.iter().map(|r| r.flags).collect()),
        curves: theoretical_curves(cfg)?,
    };
    if cfg.collapse_uo {
        map.collapse_uo();
    }
    Ok(map)
}

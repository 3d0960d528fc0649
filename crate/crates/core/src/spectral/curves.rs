use serde::{Deserialize, Serialize};

use crate::problem::Mesh1D;

use super::analysis::{FreezeCandidates, SchemeAnalysis};
use super::{dominance_test, max_amplification};

/// Logarithmically spaced Δx samples per overlay.
pub const CURVE_SAMPLES: usize = 200;
/// Geometric bisection steps after bracketing.
pub const BISECTION_DEPTH: usize = 40;

/// Past this Δt the condition is reported as holding for every Δt.
const DT_CEILING: f64 = 1e6;
/// First probe, relative to Δx².
const DT_FLOOR_RATIO: f64 = 1e-6;

/// Largest admissible Δt at one Δx.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type", content = "dt")]
pub enum DtBound {
    Finite(f64),
    Unconditional,
    /// Fails even at the smallest probe.
    Never,
}

impl DtBound {
    pub fn finite(self) -> Option<f64> {
        match self {
            DtBound::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Whether `dt` sits on the admissible side.
    pub fn admits(self, dt: f64) -> bool {
        match self {
            DtBound::Finite(v) => dt <= v,
            DtBound::Unconditional => true,
            DtBound::Never => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveKind {
    /// `max_θ |g(θ)| ≤ 1 + C·Δt`.
    VnStability,
    /// Every eigenvalue of the update matrix has positive real part.
    PositiveEig,
    /// The largest positive eigenvalue outweighs every negative one.
    Dominance,
    /// `B ≥ 0` entrywise and `A` an M-matrix.
    Monotonicity,
}

impl CurveKind {
    pub const DEFAULTS: [CurveKind; 3] = [CurveKind::VnStability, CurveKind::PositiveEig, CurveKind::Dominance];

    pub fn name(self) -> &'static str {
        match self {
            CurveKind::VnStability => "vn-stability",
            CurveKind::PositiveEig => "positive-eig",
            CurveKind::Dominance => "dominance",
            CurveKind::Monotonicity => "monotonicity",
        }
    }

    fn check(
        self,
        analysis: &SchemeAnalysis,
        candidates: &FreezeCandidates,
        mesh: &Mesh1D,
        dt: f64,
        slack: f64,
    ) -> bool {
        match self {
            CurveKind::VnStability => {
                let symbol = analysis.symbol_with(candidates, mesh, dt);
                max_amplification(&symbol) <= 1.0 + slack * dt + 1e-12
            }
            CurveKind::PositiveEig => analysis.spectrum_with(candidates, mesh, dt).min_real() > 0.0,
            CurveKind::Dominance => dominance_test(&analysis.spectrum_with(candidates, mesh, dt)),
            CurveKind::Monotonicity => {
                let symbol = analysis.symbol_with(candidates, mesh, dt);
                symbol.explicit_diag() >= 0.0 && symbol.implicit_at(0.0) > 0.0
            }
        }
    }

    /// Whether the condition holds at `(dx, dt)`. `None` when the mesh
    /// cannot be built.
    pub fn holds(self, analysis: &SchemeAnalysis, dx: f64, dt: f64, slack: f64) -> Option<bool> {
        let mesh = analysis.mesh(dx).ok()?;
        let candidates = analysis.candidates(&mesh);
        Some(self.check(analysis, &candidates, &mesh, dt, slack))
    }

    /// Largest Δt at `dx` for which the condition holds.
    pub fn bound_at(self, analysis: &SchemeAnalysis, dx: f64, slack: f64) -> Option<DtBound> {
        let mesh = analysis.mesh(dx).ok()?;
        let candidates = analysis.candidates(&mesh);
        let h = mesh.dx();
        Some(find_largest_dt(h * h, |dt| {
            self.check(analysis, &candidates, &mesh, dt, slack)
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub dx: f64,
    pub bound: DtBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCurve {
    pub kind: CurveKind,
    pub samples: Vec<CurveSample>,
    pub vn_slack: f64,
}

impl ConditionCurve {
    /// Every sample unconditional.
    pub fn is_unconditional(&self) -> bool {
        !self.samples.is_empty() && self.samples.iter().all(|s| s.bound == DtBound::Unconditional)
    }

    pub fn finite_points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.samples
            .iter()
            .filter_map(|s| s.bound.finite().map(|dt| (s.dx, dt)))
    }
}

/// `n` points from `lo` to `hi` inclusive, evenly spaced in `log`.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        hi
                    } else {
                        (a + (b - a) * i as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// Largest Δt with `holds(Δt)`, assuming the condition fails beyond a
/// single threshold.
///
/// Starts at `1e-6·scale`, doubles until the condition fails, then bisects
/// geometrically [`BISECTION_DEPTH`] times inside the bracket.
pub fn find_largest_dt(scale: f64, mut holds: impl FnMut(f64) -> bool) -> DtBound {
    let mut lo = DT_FLOOR_RATIO * scale;
    if !holds(lo) {
        return DtBound::Never;
    }
    let mut hi = lo * 2.0;
    loop {
        if hi > DT_CEILING {
            return DtBound::Unconditional;
        }
        if !holds(hi) {
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..BISECTION_DEPTH {
        let mid = (lo * hi).sqrt();
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    DtBound::Finite(lo)
}

fn sample_curve(kind: CurveKind, analysis: &SchemeAnalysis, dx_samples: &[f64], slack: f64) -> ConditionCurve {
    let samples = dx_samples
        .iter()
        .filter_map(|&dx| {
            kind.bound_at(analysis, dx, slack)
                .map(|bound| CurveSample { dx, bound })
        })
        .collect();
    ConditionCurve {
        kind,
        samples,
        vn_slack: slack,
    }
}

pub fn vn_stability_curve(analysis: &SchemeAnalysis, dx_samples: &[f64], slack: f64) -> ConditionCurve {
    sample_curve(CurveKind::VnStability, analysis, dx_samples, slack)
}

/// Δx fixes the number of unknowns through the analysis mesh.
pub fn positive_eig_curve(analysis: &SchemeAnalysis, dx_samples: &[f64]) -> ConditionCurve {
    sample_curve(CurveKind::PositiveEig, analysis, dx_samples, 0.0)
}

pub fn dominance_curve(analysis: &SchemeAnalysis, dx_samples: &[f64]) -> ConditionCurve {
    sample_curve(CurveKind::Dominance, analysis, dx_samples, 0.0)
}

pub fn monotonicity_curve(analysis: &SchemeAnalysis, dx_samples: &[f64]) -> ConditionCurve {
    sample_curve(CurveKind::Monotonicity, analysis, dx_samples, 0.0)
}

use serde::Serialize;

use crate::spectral::{CurveKind, DtBound};

use super::{Code, RegimeMap};

/// Counterexamples kept per audit; the total is always reported.
pub const MAX_LISTED_COUNTEREXAMPLES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Conjecture {
    /// Stable oscillations only above the positive-eigenvalue curve.
    C1,
    /// Oscillation-free exactly where the positive eigenvalue dominates.
    C2,
    /// Linearized stability with a positive spectrum suffices (nonlinear).
    C3,
    /// Temporally monotone runs do not oscillate.
    C4,
}

impl Conjecture {
    pub const ALL: [Conjecture; 4] = [Conjecture::C1, Conjecture::C2, Conjecture::C3, Conjecture::C4];

    pub fn statement(self) -> &'static str {
        match self {
            Conjecture::C1 => "stable oscillations lie above the positive-eigenvalue curve",
            Conjecture::C2 => "oscillation-free stable iff a positive eigenvalue dominates",
            Conjecture::C3 => "linearized stability with positive spectrum gives OFS",
            Conjecture::C4 => "temporally monotone runs are oscillation-free",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub dx: f64,
    pub dt: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjectureAudit {
    pub conjecture: Conjecture,
    pub cells_tested: usize,
    pub cells_consistent: usize,
    pub band_cells_excluded: usize,
    pub counterexamples_total: usize,
    /// First [`MAX_LISTED_COUNTEREXAMPLES`] in storage order.
    pub counterexamples: Vec<Counterexample>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ConjectureAudit {
    fn new(conjecture: Conjecture, band_cells_excluded: usize) -> Self {
        ConjectureAudit {
            conjecture,
            cells_tested: 0,
            cells_consistent: 0,
            band_cells_excluded,
            counterexamples_total: 0,
            counterexamples: Vec::new(),
            note: None,
        }
    }

    fn record(&mut self, consistent: bool, dx: f64, dt: f64, detail: impl FnOnce() -> String) {
        self.cells_tested += 1;
        if consistent {
            self.cells_consistent += 1;
        } else {
            self.counterexamples_total += 1;
            if self.counterexamples.len() < MAX_LISTED_COUNTEREXAMPLES {
                self.counterexamples.push(Counterexample {
                    dx,
                    dt,
                    detail: detail(),
                });
            }
        }
    }

    /// Consistent fraction, `None` when nothing was tested.
    pub fn consistency(&self) -> Option<f64> {
        (self.cells_tested > 0).then(|| self.cells_consistent as f64 / self.cells_tested as f64)
    }
}

/// Per-column curve bounds and the cells lying within one grid cell of a curve.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMask {
    /// `bounds[k][i]`: bound of the `k`-th map curve at `dx_axis[i]`.
    pub kinds: Vec<CurveKind>,
    pub bounds: Vec<Vec<Option<DtBound>>>,
    pub in_band: Vec<bool>,
}

impl BandMask {
    pub fn new(map: &RegimeMap) -> Self {
        let kinds: Vec<CurveKind> = map.curves.iter().map(|c| c.kind).collect();
        let bounds: Vec<Vec<Option<DtBound>>> = kinds
            .iter()
            .map(|&kind| {
                let slack = if kind == CurveKind::VnStability {
                    map.vn_slack
                } else {
                    0.0
                };
                map.dx_axis
                    .iter()
                    .map(|&dx| kind.bound_at(&map.analysis, dx, slack))
                    .collect()
            })
            .collect();
        let nx = map.dx_axis.len();
        let nt = map.dt_axis.len();
        let dt_step = if nt > 1 {
            (map.dt_axis[nt - 1] - map.dt_axis[0]) / (nt - 1) as f64
        } else {
            0.0
        };
        let mut in_band = vec![false; nx * nt];
        for column_bounds in &bounds {
            for i in 0..nx {
                // The curve's Δt range across the neighbouring columns.
                let finite: Vec<f64> = (i.saturating_sub(1)..=(i + 1).min(nx - 1))
                    .filter_map(|k| column_bounds[k].and_then(DtBound::finite))
                    .collect();
                if finite.is_empty() {
                    continue;
                }
                let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                for (j, &dt) in map.dt_axis.iter().enumerate() {
                    if dt + dt_step >= lo && dt - dt_step <= hi {
                        in_band[i * nt + j] = true;
                    }
                }
            }
        }
        BandMask { kinds, bounds, in_band }
    }

    pub fn bound(&self, kind: CurveKind, i: usize) -> Option<DtBound> {
        let k = self.kinds.iter().position(|&c| c == kind)?;
        self.bounds[k][i]
    }

    pub fn excluded(&self) -> usize {
        self.in_band.iter().filter(|&&b| b).count()
    }
}

/// Extent of the stable-oscillation region and a straight-line fit to its
/// lower edge, `Δt ≈ intercept + slope·Δx`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SoRegionReport {
    pub cells: usize,
    pub columns: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub front_slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub front_intercept: Option<f64>,
    /// `(Δx, smallest SO Δt)` per column that has one.
    pub lower_edge: Vec<(f64, f64)>,
}

impl SoRegionReport {
    pub fn new(map: &RegimeMap) -> Self {
        let cells = map.cells.iter().filter(|&&c| c == Code::So).count();
        let lower_edge: Vec<(f64, f64)> = map
            .dx_axis
            .iter()
            .enumerate()
            .filter_map(|(i, &dx)| {
                (0..map.dt_axis.len())
                    .find(|&j| map.code(i, j) == Code::So)
                    .map(|j| (dx, map.dt_axis[j]))
            })
            .collect();
        let (front_slope, front_intercept) = match fit_line(&lower_edge) {
            Some((a, b)) => (Some(b), Some(a)),
            None => (None, None),
        };
        SoRegionReport {
            cells,
            columns: lower_edge.len(),
            front_slope,
            front_intercept,
            lower_edge,
        }
    }
}

/// Least-squares `y = a + b·x`; needs two distinct abscissae.
fn fit_line(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let b = sxy / sxx;
    Some((my - b * mx, b))
}

/// Audits the four conjectures over the map, skipping cells within one grid
/// cell of any curve.
pub fn conjecture_audit(map: &RegimeMap) -> Vec<ConjectureAudit> {
    let mask = BandMask::new(map);
    let excluded = mask.excluded();
    let mut c1 = ConjectureAudit::new(Conjecture::C1, excluded);
    let mut c2 = ConjectureAudit::new(Conjecture::C2, excluded);
    let mut c3 = ConjectureAudit::new(Conjecture::C3, excluded);
    let mut c4 = ConjectureAudit::new(Conjecture::C4, excluded);
    let nonlinear = !map.analysis.ibvp.equation.is_linear();

    for (i, j, dx, dt) in map.positions() {
        let idx = map.index(i, j);
        let code = map.cells[idx];
        if mask.in_band[idx] || code == Code::Invalid {
            continue;
        }
        let summary = map.summaries[idx];

        if code.is_stable() {
            match mask.bound(CurveKind::PositiveEig, i) {
                Some(bound) => {
                    let below = bound.admits(dt);
                    c1.record(!(code == Code::So && below), dx, dt, || {
                        format!("SO below the positive-eigenvalue bound {}", describe(bound))
                    });
                }
                None => {
                    if let Some(s) = summary {
                        c1.record(!(code == Code::So && s.positive()), dx, dt, || {
                            format!("SO with positive spectrum, min Re λ = {}", s.min_re)
                        });
                    }
                }
            }
        }

        if let Some(s) = summary {
            let dominant = s.dominant();
            c2.record(dominant == (code == Code::Ofs), dx, dt, || {
                format!(
                    "{code} with dominance {} (min Re λ = {}, max Re λ = {})",
                    if dominant { "holding" } else { "failing" },
                    s.min_re,
                    s.max_re
                )
            });
            if nonlinear && s.vn_bounded(map.vn_slack, dt) && s.positive() {
                c3.record(code == Code::Ofs, dx, dt, || {
                    format!("{code} although ρ = {} and min Re λ = {} > 0", s.rho, s.min_re)
                });
            }
        }

        if let Some(Some(flags)) = map.flags.as_ref().map(|f| f[idx]) {
            if flags.temporally_monotone {
                c4.record(!code.is_oscillatory(), dx, dt, || {
                    format!("{code} on a temporally monotone run")
                });
            }
        }
    }

    if !nonlinear {
        c3.note = Some("applies to nonlinear equations only".into());
    }
    if map.flags.is_none() {
        c4.note = Some("runtime monotonicity flags unavailable for this map".into());
    }
    vec![c1, c2, c3, c4]
}

fn describe(bound: DtBound) -> String {
    match bound {
        DtBound::Finite(v) => format!("Δt = {v}"),
        DtBound::Unconditional => "(unconditional)".into(),
        DtBound::Never => "(never satisfied)".into(),
    }
}

/// Agreement of non-band cells with the side of the stability and
/// positive-eigenvalue curves they fall on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SideAgreement {
    pub tested: usize,
    pub agreeing: usize,
    pub below_positive: usize,
    pub between: usize,
    pub above_stability: usize,
}

impl SideAgreement {
    pub fn fraction(&self) -> f64 {
        if self.tested == 0 {
            0.0
        } else {
            self.agreeing as f64 / self.tested as f64
        }
    }
}

/// Below the positive-eigenvalue curve a cell should be OFS, above the
/// stability curve it should diverge, and in between it should stay bounded.
pub fn predicted_side_agreement(map: &RegimeMap) -> SideAgreement {
    let mask = BandMask::new(map);
    let mut out = SideAgreement {
        tested: 0,
        agreeing: 0,
        below_positive: 0,
        between: 0,
        above_stability: 0,
    };
    for (i, j, _, dt) in map.positions() {
        let idx = map.index(i, j);
        let code = map.cells[idx];
        let (Some(pe), Some(vn)) = (
            mask.bound(CurveKind::PositiveEig, i),
            mask.bound(CurveKind::VnStability, i),
        ) else {
            continue;
        };
        if mask.in_band[idx] || code == Code::Invalid {
            continue;
        }
        out.tested += 1;
        let ok = if pe.admits(dt) {
            out.below_positive += 1;
            code == Code::Ofs
        } else if vn.admits(dt) {
            out.between += 1;
            code.is_stable()
        } else {
            out.above_stability += 1;
            code.is_unstable()
        };
        if ok {
            out.agreeing += 1;
        }
    }
    out
}

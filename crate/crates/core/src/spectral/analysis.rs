use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::problem::{build_mesh, sample_initial_condition, Ibvp, Mesh1D};
use crate::schemes::{assemble_scheme, unknowns, Rebuild, SchemeKind, SchemeSymbol};

use super::{
    dense_eigenvalues, dominance_from_extremes, effective_update_matrix, max_amplification, scheme_spectrum_closed,
    spectral_radius, Spectrum, DENSE_TOLERANCE,
};

/// Candidate values for the frozen state `Ũ`: `min U⁰`, `max U⁰`, 0 and 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreezeCandidates {
    pub min_u0: f64,
    pub max_u0: f64,
}

impl FreezeCandidates {
    pub fn from_state(u0: &[f64]) -> Self {
        let (min_u0, max_u0) = u0.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
        if u0.is_empty() {
            return FreezeCandidates {
                min_u0: 0.0,
                max_u0: 0.0,
            };
        }
        FreezeCandidates { min_u0, max_u0 }
    }

    pub fn values(&self) -> [f64; 4] {
        [self.min_u0, self.max_u0, 0.0, 1.0]
    }

    /// The candidate that makes `max_θ |g(θ)|` largest. Ties keep the
    /// earlier candidate in [`Self::values`] order.
    pub fn worst_case(&self, symbol_of: impl Fn(f64) -> SchemeSymbol) -> f64 {
        let mut best = self.min_u0;
        let mut best_amp = f64::NEG_INFINITY;
        for u in self.values() {
            let amp = max_amplification(&symbol_of(u));
            let amp = if amp.is_nan() { f64::INFINITY } else { amp };
            if amp > best_amp {
                best = u;
                best_amp = amp;
            }
        }
        best
    }
}

/// Real-part extremes and spectral radius of a cell's update matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub min_re: f64,
    pub max_re: f64,
    pub rho: f64,
}

impl SpectrumSummary {
    pub fn of(spectrum: &Spectrum) -> Self {
        SpectrumSummary {
            min_re: spectrum.min_real(),
            max_re: spectrum.max_real(),
            rho: spectral_radius(spectrum),
        }
    }

    pub fn dominant(&self) -> bool {
        dominance_from_extremes(self.min_re, self.max_re)
    }

    pub fn positive(&self) -> bool {
        self.min_re > 0.0
    }

    /// `ρ ≤ 1 + C·Δt`.
    pub fn vn_bounded(&self, slack: f64, dt: f64) -> bool {
        self.rho <= 1.0 + slack * dt + 1e-12
    }
}

/// A scheme applied to a problem, analysed through its linearized matrix.
///
/// State-dependent schemes are frozen at the worst-case `Ũ` among
/// [`FreezeCandidates`], so a single constant matrix stands for the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchemeAnalysis {
    pub kind: SchemeKind,
    pub ibvp: Ibvp,
}

impl SchemeAnalysis {
    pub fn new(kind: SchemeKind, ibvp: Ibvp) -> Result<Self> {
        kind.check_applicable(ibvp.equation)?;
        Ok(SchemeAnalysis { kind, ibvp })
    }

    pub fn mesh(&self, dx: f64) -> Result<Mesh1D> {
        build_mesh(self.ibvp.length, dx)
    }

    pub fn unknowns(&self, mesh: &Mesh1D) -> usize {
        unknowns(mesh, self.ibvp.bc.kind)
    }

    pub fn candidates(&self, mesh: &Mesh1D) -> FreezeCandidates {
        FreezeCandidates::from_state(sample_initial_condition(&self.ibvp, mesh).values())
    }

    fn needs_freezing(&self) -> bool {
        self.kind == SchemeKind::BtcsFrozen || !self.ibvp.equation.is_linear()
    }

    fn ratio(mesh: &Mesh1D, dt: f64) -> f64 {
        dt / (mesh.dx() * mesh.dx())
    }

    /// Worst-case `Ũ` for this step, or `None` when nothing is frozen.
    pub fn frozen_bound_with(&self, candidates: &FreezeCandidates, mesh: &Mesh1D, dt: f64) -> Option<f64> {
        if !self.needs_freezing() {
            return None;
        }
        let r = Self::ratio(mesh, dt);
        let eq = self.ibvp.equation;
        let kind = self.kind;
        Some(candidates.worst_case(|u| kind.symbol(eq, r, dt, u)))
    }

    pub fn frozen_bound(&self, mesh: &Mesh1D, dt: f64) -> Option<f64> {
        self.frozen_bound_with(&self.candidates(mesh), mesh, dt)
    }

    pub fn symbol_with(&self, candidates: &FreezeCandidates, mesh: &Mesh1D, dt: f64) -> SchemeSymbol {
        let u = self.frozen_bound_with(candidates, mesh, dt).unwrap_or(0.0);
        self.kind.symbol(self.ibvp.equation, Self::ratio(mesh, dt), dt, u)
    }

    pub fn symbol(&self, mesh: &Mesh1D, dt: f64) -> SchemeSymbol {
        self.symbol_with(&self.candidates(mesh), mesh, dt)
    }

    /// Closed-form spectrum of the (frozen) update matrix.
    pub fn spectrum_with(&self, candidates: &FreezeCandidates, mesh: &Mesh1D, dt: f64) -> Spectrum {
        scheme_spectrum_closed(
            &self.symbol_with(candidates, mesh, dt),
            self.unknowns(mesh),
            self.ibvp.bc.kind,
        )
    }

    pub fn spectrum(&self, mesh: &Mesh1D, dt: f64) -> Spectrum {
        self.spectrum_with(&self.candidates(mesh), mesh, dt)
    }

    pub fn summary(&self, mesh: &Mesh1D, dt: f64) -> SpectrumSummary {
        SpectrumSummary::of(&self.spectrum(mesh, dt))
    }

    /// The same frozen matrix, assembled and solved densely.
    pub fn dense_spectrum(&self, mesh: &Mesh1D, dt: f64) -> Result<Spectrum> {
        let ibvp = &self.ibvp;
        let frozen = self.frozen_bound(mesh, dt);
        let mut scheme = assemble_scheme(self.kind, ibvp.equation, mesh, dt, &ibvp.bc, frozen)?;
        let u = frozen.unwrap_or(0.0);
        scheme.freeze_at(u);
        let mut m = effective_update_matrix(&scheme)?;
        if scheme.rebuild() == Rebuild::ExplicitSource {
            // explicit reaction enters through f_u(Ũ)
            for k in 0..m.nrows() {
                m[(k, k)] += dt * ibvp.equation.reaction_derivative(u);
            }
        }
        dense_eigenvalues(&m, DENSE_TOLERANCE)
    }
}

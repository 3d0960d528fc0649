//! Runtime verdicts for a single simulation: divergence against a norm cap,
//! sign flips of successive temporal differences, and temporal monotonicity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{sample_initial_condition, Equation, Ibvp};
use crate::schemes::{assemble_scheme, SchemeKind, StateVector};
use crate::spectral::SchemeAnalysis;

/// Fraction of the run ignored by the oscillation test on Fisher-KPP, where
/// the front's own motion flips temporal differences early on.
pub const FISHER_TRANSIENT_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsConfig {
    /// Divergence threshold `K`: unstable once `‖U‖∞ ≥ K·‖U⁰‖₂`.
    pub cap_k: f64,
    /// Deadband relative to `‖U⁰‖∞`; smaller temporal differences count as zero.
    pub deadband_rel: f64,
    /// Nodes that must flip persistently before a run counts as oscillatory.
    pub osc_min_nodes: usize,
    /// Flip triples a node needs before it counts.
    pub persistence: usize,
    /// Steps ignored by the oscillation test. `None` picks 20% of the run for
    /// Fisher-KPP and nothing otherwise.
    pub transient_skip: Option<usize>,
    /// Lower bound on the number of steps, so large `Δt` still runs long
    /// enough to diverge.
    pub min_steps: usize,
    /// Hard cap on the number of steps.
    pub max_steps: usize,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            cap_k: 1e6,
            deadband_rel: 1e-12,
            osc_min_nodes: 1,
            persistence: 2,
            transient_skip: None,
            min_steps: 500,
            max_steps: 50_000,
        }
    }
}

impl DiagnosticsConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.cap_k.is_finite() && self.cap_k > 1.0) {
            return fail(format!("cap K must exceed 1, got {}", self.cap_k));
        }
        if !(self.deadband_rel.is_finite() && self.deadband_rel >= 0.0) {
            return fail(format!("deadband must be non-negative, got {}", self.deadband_rel));
        }
        if self.osc_min_nodes == 0 || self.persistence == 0 {
            return fail("oscillation node count and persistence must be at least 1".into());
        }
        if self.max_steps < 3 {
            return fail(format!("max_steps must be at least 3, got {}", self.max_steps));
        }
        if self.min_steps > self.max_steps {
            return fail(format!(
                "min_steps {} exceeds max_steps {}",
                self.min_steps, self.max_steps
            ));
        }
        Ok(())
    }

    /// `max(ceil(T/Δt), min_steps)`, capped at `max_steps`.
    pub fn planned_steps(&self, final_time: f64, dt: f64) -> usize {
        let natural = (final_time / dt).ceil();
        let natural = if natural.is_finite() && natural > 0.0 {
            natural.min(self.max_steps as f64) as usize
        } else {
            self.max_steps
        };
        natural.max(self.min_steps).min(self.max_steps)
    }

    pub fn skip_for(&self, equation: Equation, steps: usize) -> usize {
        match self.transient_skip {
            Some(skip) => skip,
            None if equation == Equation::FisherKpp => (FISHER_TRANSIENT_FRACTION * steps as f64).ceil() as usize,
            None => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunFlags {
    pub stable: bool,
    pub oscillatory: bool,
    pub temporally_monotone: bool,
    pub diverged_at_step: Option<usize>,
    pub first_oscillation_step: Option<usize>,
    /// `max_n ‖Uⁿ‖∞ / ‖U⁰‖₂`; zero for zero initial data.
    pub max_inf_norm_ratio: f64,
    pub steps_taken: usize,
    pub steps_planned: usize,
    pub frozen_bound: Option<f64>,
    /// The sign test cannot tell a travelling front from a numerical
    /// oscillation; set on Fisher-KPP runs.
    pub wave_limitation: bool,
}

/// `max_k |u_k|`.
pub fn infinity_norm(u: &[f64]) -> f64 {
    u.iter().fold(0.0, |m, &v| m.max(v.abs()))
}

pub fn l2_norm(u: &[f64]) -> f64 {
    u.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `false` once `‖u‖∞ ≥ K·u0_l2` or the state is no longer finite.
/// Zero initial data is never flagged.
pub fn stability_check(u: &[f64], u0_l2: f64, cap_k: f64) -> bool {
    if u.iter().any(|v| !v.is_finite()) {
        return false;
    }
    if u0_l2 == 0.0 {
        return true;
    }
    infinity_norm(u) < cap_k * u0_l2
}

fn deadband_sign(d: f64, eps: f64) -> i8 {
    if d.abs() < eps || d == 0.0 {
        0
    } else if d > 0.0 {
        1
    } else {
        -1
    }
}

/// Nodes where `sign(u_n − u_nm1)·sign(u_nm1 − u_nm2) < 0`, with differences
/// below `deadband` counted as zero.
pub fn flipping_nodes(u_nm2: &[f64], u_nm1: &[f64], u_n: &[f64], deadband: f64) -> Vec<usize> {
    (0..u_n.len())
        .filter(|&m| {
            let early = deadband_sign(u_nm1[m] - u_nm2[m], deadband);
            let late = deadband_sign(u_n[m] - u_nm1[m], deadband);
            early * late < 0
        })
        .collect()
}

/// One three-level sign test: fires when at least `min_nodes` nodes flip.
pub fn oscillation_check(u_nm2: &[f64], u_nm1: &[f64], u_n: &[f64], deadband: f64, min_nodes: usize) -> bool {
    flipping_nodes(u_nm2, u_nm1, u_n, deadband).len() >= min_nodes.max(1)
}

/// True when the series never moves both up and down by more than `deadband`.
pub fn monotonicity_check(series: &[f64], deadband: f64) -> bool {
    let mut direction = 0i8;
    for w in series.windows(2) {
        let s = deadband_sign(w[1] - w[0], deadband);
        if s == 0 {
            continue;
        }
        if direction == 0 {
            direction = s;
        } else if s != direction {
            return false;
        }
    }
    true
}

/// Spatial monotonicity of one level: the profile along the mesh never
/// changes direction.
pub fn spatial_monotonicity_check(u: &[f64], deadband: f64) -> bool {
    monotonicity_check(u, deadband)
}

/// Streaming per-node bookkeeping for the sign and monotonicity tests.
struct NodeTracker {
    deadband: f64,
    skip: usize,
    persistence: usize,
    min_nodes: usize,
    last_sign: Vec<i8>,
    direction: Vec<i8>,
    flips: Vec<usize>,
    nodes_over: usize,
    monotone: bool,
    first_oscillation: Option<usize>,
}

impl NodeTracker {
    fn new(n: usize, deadband: f64, skip: usize, cfg: &DiagnosticsConfig) -> Self {
        NodeTracker {
            deadband,
            skip,
            persistence: cfg.persistence,
            min_nodes: cfg.osc_min_nodes,
            last_sign: vec![0; n],
            direction: vec![0; n],
            flips: vec![0; n],
            nodes_over: 0,
            monotone: true,
            first_oscillation: None,
        }
    }

    /// Records the difference between levels `step − 1` and `step`. Returns
    /// the number of nodes that flipped on this triple.
    fn record(&mut self, step: usize, prev: &[f64], next: &[f64]) -> usize {
        let mut flipped = 0;
        for m in 0..next.len() {
            let s = deadband_sign(next[m] - prev[m], self.deadband);
            if s != 0 {
                if self.direction[m] == 0 {
                    self.direction[m] = s;
                } else if self.direction[m] != s {
                    self.monotone = false;
                }
            }
            // A triple ending at `step` spans levels step−2..step.
            if step >= 2 && self.last_sign[m] * s < 0 {
                flipped += 1;
                if step > self.skip {
                    self.flips[m] += 1;
                    if self.flips[m] == self.persistence {
                        self.nodes_over += 1;
                    }
                }
            }
            self.last_sign[m] = s;
        }
        if self.first_oscillation.is_none() && self.nodes_over >= self.min_nodes {
            self.first_oscillation = Some(step);
        }
        flipped
    }
}

/// One row of a traced run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub step: usize,
    pub time: f64,
    pub inf_norm: f64,
    pub l2_norm: f64,
    pub flipped_nodes: usize,
}

/// A run with its per-step trace and final state.
#[derive(Debug, Clone, Serialize)]
pub struct TracedRun {
    pub flags: RunFlags,
    pub trace: Vec<TraceRow>,
    pub final_state: Vec<f64>,
}

/// Simulates `ibvp` with `kind` at `(dx, dt)` until the planned number of
/// steps or divergence.
pub fn run_simulation(ibvp: &Ibvp, kind: SchemeKind, dx: f64, dt: f64, cfg: &DiagnosticsConfig) -> Result<RunFlags> {
    simulate(ibvp, kind, dx, dt, cfg, false).map(|run| run.flags)
}

/// As [`run_simulation`], keeping one trace row per step.
pub fn run_simulation_traced(
    ibvp: &Ibvp,
    kind: SchemeKind,
    dx: f64,
    dt: f64,
    cfg: &DiagnosticsConfig,
) -> Result<TracedRun> {
    simulate(ibvp, kind, dx, dt, cfg, true)
}

fn simulate(
    ibvp: &Ibvp,
    kind: SchemeKind,
    dx: f64,
    dt: f64,
    cfg: &DiagnosticsConfig,
    traced: bool,
) -> Result<TracedRun> {
    cfg.validate()?;
    let analysis = SchemeAnalysis::new(kind, *ibvp)?;
    let mesh = analysis.mesh(dx)?;
    let frozen_bound = analysis.frozen_bound(&mesh, dt);
    let mut scheme = assemble_scheme(kind, ibvp.equation, &mesh, dt, &ibvp.bc, frozen_bound)?;

    let u0 = sample_initial_condition(ibvp, &mesh);
    let u0_l2 = l2_norm(u0.values());
    let deadband = cfg.deadband_rel * infinity_norm(u0.values());
    let steps_planned = cfg.planned_steps(ibvp.final_time, dt);
    let skip = cfg.skip_for(ibvp.equation, steps_planned);
    let mut tracker = NodeTracker::new(u0.len(), deadband, skip, cfg);

    let ratio = |u: &[f64]| {
        if u0_l2 == 0.0 {
            0.0
        } else {
            infinity_norm(u) / u0_l2
        }
    };
    let mut max_ratio = ratio(u0.values());
    let mut trace = Vec::new();
    if traced {
        trace.push(TraceRow {
            step: 0,
            time: 0.0,
            inf_norm: infinity_norm(u0.values()),
            l2_norm: u0_l2,
            flipped_nodes: 0,
        });
    }

    let mut u: StateVector = u0;
    let mut diverged_at_step = None;
    let mut steps_taken = 0;
    for step in 1..=steps_planned {
        let next = scheme.step(&u)?;
        steps_taken = step;
        let flipped = tracker.record(step, u.values(), next.values());
        let finite = next.values().iter().all(|v| v.is_finite());
        if finite {
            max_ratio = max_ratio.max(ratio(next.values()));
        } else {
            max_ratio = f64::INFINITY;
        }
        if traced {
            trace.push(TraceRow {
                step,
                time: step as f64 * dt,
                inf_norm: infinity_norm(next.values()),
                l2_norm: l2_norm(next.values()),
                flipped_nodes: flipped,
            });
        }
        let stable = stability_check(next.values(), u0_l2, cfg.cap_k);
        u = next;
        if !stable {
            diverged_at_step = Some(step);
            break;
        }
    }

    let flags = RunFlags {
        stable: diverged_at_step.is_none(),
        oscillatory: tracker.first_oscillation.is_some(),
        temporally_monotone: tracker.monotone,
        diverged_at_step,
        first_oscillation_step: tracker.first_oscillation,
        max_inf_norm_ratio: max_ratio,
        steps_taken,
        steps_planned,
        frozen_bound,
        wave_limitation: ibvp.equation == Equation::FisherKpp,
    };
    Ok(TracedRun {
        flags,
        trace,
        final_state: u.into_values(),
    })
}

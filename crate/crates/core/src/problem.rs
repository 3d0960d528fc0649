//! Continuous problems: meshes, boundary conditions, reaction terms and
//! initial data. Nothing in here knows about a particular difference scheme.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schemes::StateVector;

/// Domain length used when none is given.
///
/// The domain is long enough that the coarsest swept step (dx = 1) still
/// leaves nine interior nodes, so the finite-N spectra sit within a grid
/// cell of their Fourier limits across the whole sweep range.
pub const DEFAULT_LENGTH: f64 = 10.0;

/// Final time used when none is given.
pub const DEFAULT_FINAL_TIME: f64 = 1.0;

/// Uniform 1D mesh on `[0, length]`, boundary nodes included in `nodes`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mesh1D {
    length: f64,
    dx: f64,
    requested_dx: f64,
    n_interior: usize,
    nodes: Vec<f64>,
}

impl Mesh1D {
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Spacing actually used, after snapping to divide the domain evenly.
    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn requested_dx(&self) -> f64 {
        self.requested_dx
    }

    /// True when `dx` differs from the requested spacing.
    pub fn was_snapped(&self) -> bool {
        self.dx != self.requested_dx
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    /// All node positions, `0` and `length` included.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn interior_nodes(&self) -> &[f64] {
        &self.nodes[1..self.nodes.len() - 1]
    }
}

/// Builds a uniform mesh. A spacing that does not divide `length` is snapped
/// to `length / round(length / dx)`.
pub fn build_mesh(length: f64, dx: f64) -> Result<Mesh1D> {
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "domain length must be positive, got {length}"
        )));
    }
    if !(dx.is_finite() && dx > 0.0) {
        return Err(Error::InvalidParameter(format!("dx must be positive, got {dx}")));
    }
    let cells = (length / dx).round();
    if cells < 2.0 {
        return Err(Error::MeshTooCoarse { length, dx });
    }
    let cells = cells as usize;
    let quotient = length / dx;
    // Keep the caller's dx bit-for-bit when it already divides the domain.
    let spacing = if (quotient - cells as f64).abs() <= 1e-9 * quotient {
        dx
    } else {
        length / cells as f64
    };
    let nodes = (0..=cells)
        .map(|i| if i == cells { length } else { i as f64 * spacing })
        .collect();
    Ok(Mesh1D {
        length,
        dx: spacing,
        requested_dx: dx,
        n_interior: cells - 1,
        nodes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BcKind {
    Dirichlet,
    Neumann,
}

impl FromStr for BcKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dirichlet" | "d" => Ok(BcKind::Dirichlet),
            "neumann" | "n" => Ok(BcKind::Neumann),
            _ => Err(Error::UnknownName {
                what: "boundary condition",
                name: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for BcKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BcKind::Dirichlet => "dirichlet",
            BcKind::Neumann => "neumann",
        })
    }
}

/// Same kind at both ends. Dirichlet values are prescribed `u`, Neumann
/// values are prescribed outward-agnostic fluxes `u_x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCondition {
    pub kind: BcKind,
    pub left: f64,
    pub right: f64,
}

impl BoundaryCondition {
    pub fn dirichlet(left: f64, right: f64) -> Self {
        BoundaryCondition {
            kind: BcKind::Dirichlet,
            left,
            right,
        }
    }

    pub fn neumann(left: f64, right: f64) -> Self {
        BoundaryCondition {
            kind: BcKind::Neumann,
            left,
            right,
        }
    }

    /// Homogeneous condition of the given kind.
    pub fn zero(kind: BcKind) -> Self {
        BoundaryCondition {
            kind,
            left: 0.0,
            right: 0.0,
        }
    }
}

/// The four model equations `u_t = u_xx + f(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Equation {
    #[serde(rename = "heat")]
    Heat,
    #[serde(rename = "linear-rd")]
    LinearRd,
    #[serde(rename = "nonlinear-rd")]
    NonlinearRd,
    #[serde(rename = "fisher")]
    FisherKpp,
}

impl Equation {
    pub const ALL: [Equation; 4] = [
        Equation::Heat,
        Equation::LinearRd,
        Equation::NonlinearRd,
        Equation::FisherKpp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Equation::Heat => "heat",
            Equation::LinearRd => "linear-rd",
            Equation::NonlinearRd => "nonlinear-rd",
            Equation::FisherKpp => "fisher",
        }
    }

    /// Reaction term `f(u)`.
    pub fn reaction(self, u: f64) -> f64 {
        match self {
            Equation::Heat => 0.0,
            Equation::LinearRd => -u,
            Equation::NonlinearRd => -u * u,
            Equation::FisherKpp => u * (1.0 - u),
        }
    }

    /// `f_u(u)`.
    pub fn reaction_derivative(self, u: f64) -> f64 {
        match self {
            Equation::Heat => 0.0,
            Equation::LinearRd => -1.0,
            Equation::NonlinearRd => -2.0 * u,
            Equation::FisherKpp => 1.0 - 2.0 * u,
        }
    }

    /// Coefficient `σ(u)` of the split `f(u) = σ(u)·u`, with `σ(0) = f_u(0)`.
    pub fn split_coefficient(self, u: f64) -> f64 {
        match self {
            Equation::Heat => 0.0,
            Equation::LinearRd => -1.0,
            Equation::NonlinearRd => -u,
            Equation::FisherKpp => 1.0 - u,
        }
    }

    /// Constant rate `ρ` for linear equations (`f(u) = ρ·u`).
    pub fn linear_rate(self) -> Option<f64> {
        match self {
            Equation::Heat => Some(0.0),
            Equation::LinearRd => Some(-1.0),
            Equation::NonlinearRd | Equation::FisherKpp => None,
        }
    }

    pub fn is_linear(self) -> bool {
        self.linear_rate().is_some()
    }
}

impl FromStr for Equation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "heat" | "diffusion" => Ok(Equation::Heat),
            "linear-rd" | "linear_rd" | "linrd" | "lrd" => Ok(Equation::LinearRd),
            "nonlinear-rd" | "nonlinear_rd" | "nlrd" | "nrd" => Ok(Equation::NonlinearRd),
            "fisher" | "fisher-kpp" | "fisher_kpp" | "kpp" => Ok(Equation::FisherKpp),
            _ => Err(Error::UnknownName {
                what: "equation",
                name: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Initial profiles `u₀(x)` on `[0, L]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialCondition {
    /// `sin(πx/L)`
    Sine,
    /// `sin(kπx/L)`
    SineMode(u32),
    /// `cos(πx/L)`
    Cosine,
    /// `4x(L−x)/L²`
    Parabola,
    /// `max(0, 1 − 4x/L)`
    Front,
    /// 1 on `[0, L/2]`, 0 beyond. A node at the midpoint takes 1, so on
    /// symmetric meshes the jump falls between two nodes.
    Step,
    /// `1` everywhere, so it jumps against zero Dirichlet data.
    Flat,
    Zero,
}

impl InitialCondition {
    /// Evaluates the profile at `x ∈ [0, length]`.
    pub fn eval(self, x: f64, length: f64) -> f64 {
        use std::f64::consts::PI;
        let s = x / length;
        match self {
            InitialCondition::Sine => (PI * s).sin(),
            InitialCondition::SineMode(k) => (k as f64 * PI * s).sin(),
            InitialCondition::Cosine => (PI * s).cos(),
            InitialCondition::Parabola => 4.0 * s * (1.0 - s),
            InitialCondition::Front => (1.0 - 4.0 * s).max(0.0),
            InitialCondition::Step => {
                if s <= 0.5 {
                    1.0
                } else {
                    0.0
                }
            }
            InitialCondition::Flat => 1.0,
            InitialCondition::Zero => 0.0,
        }
    }

    /// True when the profile has an interior jump.
    pub fn has_jump(self) -> bool {
        matches!(self, InitialCondition::Step)
    }

    /// Default profile for an equation and boundary kind.
    ///
    /// Dirichlet linear problems start from the concave parabola rather than
    /// `sin(πx/L)`: the sine is an exact eigenvector of the discrete Dirichlet
    /// operator, so only rounding error would ever excite the modes that
    /// decide stability and oscillation. Fisher-KPP starts from a step, so
    /// diffusion smooths the jump before the front moves.
    pub fn default_for(equation: Equation, bc: BcKind) -> Self {
        match (equation, bc) {
            (Equation::FisherKpp, _) => InitialCondition::Step,
            (_, BcKind::Dirichlet) => InitialCondition::Parabola,
            (_, BcKind::Neumann) => InitialCondition::Cosine,
        }
    }
}

impl FromStr for InitialCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        if let Some(k) = lower.strip_prefix("mode:") {
            return k
                .parse::<u32>()
                .ok()
                .filter(|&k| k > 0)
                .map(InitialCondition::SineMode)
                .ok_or_else(|| Error::Parse(format!("bad sine mode `{s}`")));
        }
        match lower.as_str() {
            "sine" | "sin" => Ok(InitialCondition::Sine),
            "cosine" | "cos" => Ok(InitialCondition::Cosine),
            "parabola" => Ok(InitialCondition::Parabola),
            "front" => Ok(InitialCondition::Front),
            "step" => Ok(InitialCondition::Step),
            "flat" => Ok(InitialCondition::Flat),
            "zero" => Ok(InitialCondition::Zero),
            _ => Err(Error::UnknownName {
                what: "initial condition",
                name: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialCondition::Sine => f.write_str("sine"),
            InitialCondition::SineMode(k) => write!(f, "mode:{k}"),
            InitialCondition::Cosine => f.write_str("cosine"),
            InitialCondition::Parabola => f.write_str("parabola"),
            InitialCondition::Front => f.write_str("front"),
            InitialCondition::Step => f.write_str("step"),
            InitialCondition::Flat => f.write_str("flat"),
            InitialCondition::Zero => f.write_str("zero"),
        }
    }
}

/// Initial boundary value problem on `[0, length]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ibvp {
    pub equation: Equation,
    pub length: f64,
    pub bc: BoundaryCondition,
    pub initial_condition: InitialCondition,
    pub final_time: f64,
}

impl Ibvp {
    pub fn new(
        equation: Equation,
        length: f64,
        bc: BoundaryCondition,
        initial_condition: InitialCondition,
        final_time: f64,
    ) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "domain length must be positive, got {length}"
            )));
        }
        if !(final_time.is_finite() && final_time > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "final time must be positive, got {final_time}"
            )));
        }
        Ok(Ibvp {
            equation,
            length,
            bc,
            initial_condition,
            final_time,
        })
    }

    /// Default problem: unit-free domain of [`DEFAULT_LENGTH`], default IC and
    /// BC values for the equation. Fisher-KPP holds `u = 1` on the left.
    pub fn standard(equation: Equation, bc: BcKind) -> Self {
        let bc = match (equation, bc) {
            (Equation::FisherKpp, BcKind::Dirichlet) => BoundaryCondition::dirichlet(1.0, 0.0),
            (_, kind) => BoundaryCondition::zero(kind),
        };
        Ibvp {
            equation,
            length: DEFAULT_LENGTH,
            bc,
            initial_condition: InitialCondition::default_for(equation, bc.kind),
            final_time: DEFAULT_FINAL_TIME,
        }
    }

    pub fn with_initial_condition(mut self, ic: InitialCondition) -> Self {
        self.initial_condition = ic;
        self
    }

    pub fn with_length(mut self, length: f64) -> Self {
        self.length = length;
        self
    }

    /// True when `u₀` has a jump or disagrees with the Dirichlet data at an end.
    pub fn ic_discontinuous(&self) -> bool {
        if self.initial_condition.has_jump() {
            return true;
        }
        match self.bc.kind {
            BcKind::Dirichlet => {
                let left = self.initial_condition.eval(0.0, self.length);
                let right = self.initial_condition.eval(self.length, self.length);
                (left - self.bc.left).abs() > 1e-9 || (right - self.bc.right).abs() > 1e-9
            }
            BcKind::Neumann => false,
        }
    }
}

/// Samples `u₀` on the unknowns of the scheme: interior nodes for Dirichlet,
/// every node for Neumann.
pub fn sample_initial_condition(ibvp: &Ibvp, mesh: &Mesh1D) -> StateVector {
    let ic = ibvp.initial_condition;
    let nodes = match ibvp.bc.kind {
        BcKind::Dirichlet => mesh.interior_nodes(),
        BcKind::Neumann => mesh.nodes(),
    };
    StateVector::new(nodes.iter().map(|&x| ic.eval(x, mesh.length())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn smallest_legal_mesh() {
        let mesh = build_mesh(1.0, 0.5).unwrap();
        assert_eq!(mesh.n_interior(), 1);
        assert_eq!(mesh.nodes(), &[0.0, 0.5, 1.0]);
        assert!(!mesh.was_snapped());
    }

    #[test]
    fn quarter_mesh_has_three_interior_nodes() {
        let mesh = build_mesh(1.0, 0.25).unwrap();
        assert_eq!(mesh.n_interior(), 3);
    }

    #[test]
    fn non_dividing_dx_is_snapped() {
        // round(1/0.3) = 3 cells, so dx becomes 1/3 and two interior nodes remain.
        let mesh = build_mesh(1.0, 0.3).unwrap();
        assert!(mesh.was_snapped());
        assert_abs_diff_eq!(mesh.dx(), 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(mesh.n_interior(), 2);
        assert_eq!(mesh.requested_dx(), 0.3);
    }

    #[test]
    fn coarse_mesh_is_rejected() {
        assert!(matches!(build_mesh(1.0, 0.8), Err(Error::MeshTooCoarse { .. })));
        assert!(matches!(build_mesh(1.0, 1.0), Err(Error::MeshTooCoarse { .. })));
        assert!(build_mesh(1.0, 0.0).is_err());
        assert!(build_mesh(-1.0, 0.1).is_err());
    }

    #[test]
    fn mesh_is_uniform() {
        for &(length, dx) in &[(1.0, 0.01), (10.0, 0.37), (10.0, 0.01), (3.0, 0.7)] {
            let mesh = build_mesh(length, dx).unwrap();
            let h = mesh.dx();
            for w in mesh.nodes().windows(2) {
                assert!(((w[1] - w[0]) - h).abs() / h < 1e-12);
            }
            assert_eq!(mesh.n_interior() + 1, (length / dx).round() as usize);
        }
    }

    #[test]
    fn sine_sampled_on_interior_nodes() {
        let ibvp = Ibvp::new(
            Equation::Heat,
            1.0,
            BoundaryCondition::zero(BcKind::Dirichlet),
            InitialCondition::Sine,
            1.0,
        )
        .unwrap();
        let mesh = build_mesh(1.0, 0.25).unwrap();
        let u = sample_initial_condition(&ibvp, &mesh);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(u.values()[0], h, epsilon = 1e-15);
        assert_abs_diff_eq!(u.values()[1], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(u.values()[2], h, epsilon = 1e-15);
        assert_eq!(u.time_index(), 0);
    }

    #[test]
    fn zero_ic_samples_to_zero() {
        let ibvp = Ibvp::standard(Equation::Heat, BcKind::Dirichlet).with_initial_condition(InitialCondition::Zero);
        let mesh = build_mesh(ibvp.length, 0.5).unwrap();
        assert!(sample_initial_condition(&ibvp, &mesh)
            .values()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn step_jumps_after_the_midpoint_and_is_flagged() {
        let ibvp = Ibvp::new(
            Equation::Heat,
            1.0,
            BoundaryCondition::zero(BcKind::Dirichlet),
            InitialCondition::Step,
            1.0,
        )
        .unwrap();
        let mesh = build_mesh(1.0, 0.25).unwrap();
        let u = sample_initial_condition(&ibvp, &mesh);
        assert_eq!(u.values(), &[1.0, 1.0, 0.0]);
        assert!(ibvp.ic_discontinuous());
    }

    #[test]
    fn neumann_samples_every_node() {
        let ibvp = Ibvp::new(
            Equation::Heat,
            1.0,
            BoundaryCondition::zero(BcKind::Neumann),
            InitialCondition::Cosine,
            1.0,
        )
        .unwrap();
        let mesh = build_mesh(1.0, 0.25).unwrap();
        let u = sample_initial_condition(&ibvp, &mesh);
        assert_eq!(u.len(), 5);
        assert_abs_diff_eq!(u.values()[0], 1.0);
        assert_abs_diff_eq!(u.values()[4], -1.0);
        assert!(!ibvp.ic_discontinuous());
    }

    #[test]
    fn default_problems_are_compatible() {
        for eq in Equation::ALL {
            for bc in [BcKind::Dirichlet, BcKind::Neumann] {
                let ibvp = Ibvp::standard(eq, bc);
                // Fisher-KPP starts from a step on purpose.
                let expected = eq == Equation::FisherKpp;
                assert_eq!(ibvp.ic_discontinuous(), expected, "{eq} {bc}");
            }
        }
    }

    #[test]
    fn reactions_match_their_tabulated_forms() {
        for u in [-2.0, -0.5, 0.0, 0.3, 1.0, 2.0] {
            assert_eq!(Equation::Heat.reaction(u), 0.0);
            assert_eq!(Equation::LinearRd.reaction(u), -u);
            assert_eq!(Equation::NonlinearRd.reaction(u), -u * u);
            assert_eq!(Equation::FisherKpp.reaction(u), u * (1.0 - u));
            for eq in Equation::ALL {
                let split = eq.split_coefficient(u) * u;
                assert_abs_diff_eq!(split, eq.reaction(u), epsilon = 1e-15);
            }
        }
        for eq in Equation::ALL {
            assert_eq!(eq.split_coefficient(0.0), eq.reaction_derivative(0.0));
        }
    }

    #[test]
    fn reaction_derivative_matches_centered_difference() {
        let h = 1e-5;
        for eq in Equation::ALL {
            for k in 0..100 {
                let u = -2.0 + 4.0 * k as f64 / 99.0;
                let fd = (eq.reaction(u + h) - eq.reaction(u - h)) / (2.0 * h);
                assert!((eq.reaction_derivative(u) - fd).abs() < 1e-6, "{eq} at {u}");
            }
        }
    }

    #[test]
    fn names_parse_back() {
        for eq in Equation::ALL {
            assert_eq!(eq.name().parse::<Equation>().unwrap(), eq);
        }
        for ic in [
            InitialCondition::Sine,
            InitialCondition::SineMode(3),
            InitialCondition::Cosine,
            InitialCondition::Parabola,
            InitialCondition::Front,
            InitialCondition::Step,
            InitialCondition::Flat,
            InitialCondition::Zero,
        ] {
            assert_eq!(ic.to_string().parse::<InitialCondition>().unwrap(), ic);
        }
        assert!("wave".parse::<Equation>().is_err());
        assert!("mode:0".parse::<InitialCondition>().is_err());
    }
}

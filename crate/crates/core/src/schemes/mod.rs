//! Two-level difference schemes `A·U^{n+1} = B·U^n + Δt·g`.
//!
//! Every scheme here is a weighted combination of the same second-difference
//! operator `T` (with Dirichlet or ghost-node Neumann rows) and a reaction
//! coefficient on one side:
//!
//! ```text
//! A = I − θ·r·T − Δt·c_impl·I
//! B = I + (1−θ)·r·T + Δt·c_expl·I
//! ```
//!
//! [`SchemeSymbol`] carries `(r, Δt, θ, c_impl, c_expl)` and is shared with the
//! spectral module, which evaluates the same expression at the eigenvalues of
//! `T` or at a Fourier symbol.

mod tridiag;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{BcKind, BoundaryCondition, Equation, Mesh1D};

pub use tridiag::{solve_pivoting, thomas_solve, TridiagonalMatrix};

/// Solution values on the scheme unknowns at time level `time_index`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateVector {
    values: Vec<f64>,
    time_index: usize,
}

impl StateVector {
    pub fn new(values: Vec<f64>) -> Self {
        StateVector { values, time_index: 0 }
    }

    pub fn at_level(values: Vec<f64>, time_index: usize) -> Self {
        StateVector { values, time_index }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn time_index(&self) -> usize {
        self.time_index
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchemeKind {
    #[serde(rename = "ftcs")]
    Ftcs,
    #[serde(rename = "btcs")]
    Btcs,
    #[serde(rename = "cn")]
    CrankNicolson,
    #[serde(rename = "semi")]
    SemiImplicit,
    #[serde(rename = "btcs-frozen")]
    BtcsFrozen,
    #[serde(rename = "btcs-linapprox")]
    BtcsLinApprox,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 6] = [
        SchemeKind::Ftcs,
        SchemeKind::Btcs,
        SchemeKind::CrankNicolson,
        SchemeKind::SemiImplicit,
        SchemeKind::BtcsFrozen,
        SchemeKind::BtcsLinApprox,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Ftcs => "ftcs",
            SchemeKind::Btcs => "btcs",
            SchemeKind::CrankNicolson => "cn",
            SchemeKind::SemiImplicit => "semi",
            SchemeKind::BtcsFrozen => "btcs-frozen",
            SchemeKind::BtcsLinApprox => "btcs-linapprox",
        }
    }

    /// Fraction of the diffusion taken at the new time level.
    pub fn implicit_weight(self) -> f64 {
        match self {
            SchemeKind::Ftcs | SchemeKind::SemiImplicit => 0.0,
            SchemeKind::CrankNicolson => 0.5,
            SchemeKind::Btcs | SchemeKind::BtcsFrozen | SchemeKind::BtcsLinApprox => 1.0,
        }
    }

    /// Checks that the scheme applies to the equation.
    pub fn check_applicable(self, equation: Equation) -> Result<()> {
        match self {
            SchemeKind::Btcs | SchemeKind::CrankNicolson if !equation.is_linear() => {
                Err(Error::LinearizationRequired(equation.name()))
            }
            SchemeKind::SemiImplicit if equation.is_linear() => Err(Error::SemiImplicitOnLinear(equation.name())),
            _ => Ok(()),
        }
    }

    /// Analysis symbol with the reaction frozen at `u_frozen`.
    ///
    /// Explicit and Taylor-linearized treatments see `f_u(Ũ)`; the split
    /// treatments (semi-implicit and freezing) see `σ(Ũ) = f(Ũ)/Ũ`. For linear
    /// equations both reduce to the constant rate.
    pub fn symbol(self, equation: Equation, r: f64, dt: f64, u_frozen: f64) -> SchemeSymbol {
        let theta = self.implicit_weight();
        let (implicit_rate, explicit_rate) = match (self, equation.linear_rate()) {
            (SchemeKind::CrankNicolson, Some(rho)) => (0.5 * rho, 0.5 * rho),
            (SchemeKind::Ftcs, Some(rho)) => (0.0, rho),
            (_, Some(rho)) => (rho, 0.0),
            (SchemeKind::Ftcs, None) => (0.0, equation.reaction_derivative(u_frozen)),
            (SchemeKind::BtcsLinApprox, None) => (equation.reaction_derivative(u_frozen), 0.0),
            (_, None) => (equation.split_coefficient(u_frozen), 0.0),
        };
        SchemeSymbol {
            r,
            dt,
            theta,
            implicit_rate,
            explicit_rate,
        }
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ftcs" | "explicit" => Ok(SchemeKind::Ftcs),
            "btcs" | "implicit" => Ok(SchemeKind::Btcs),
            "cn" | "crank-nicolson" => Ok(SchemeKind::CrankNicolson),
            "semi" | "semi-implicit" => Ok(SchemeKind::SemiImplicit),
            "btcs-frozen" | "frozen" => Ok(SchemeKind::BtcsFrozen),
            "btcs-linapprox" | "linapprox" => Ok(SchemeKind::BtcsLinApprox),
            _ => Err(Error::UnknownName {
                what: "scheme",
                name: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Scalar symbol of a two-level scheme built on the second difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchemeSymbol {
    pub r: f64,
    pub dt: f64,
    /// Implicit fraction of the diffusion.
    pub theta: f64,
    /// Reaction coefficient multiplying `U^{n+1}`.
    pub implicit_rate: f64,
    /// Reaction coefficient multiplying `U^n`.
    pub explicit_rate: f64,
}

impl SchemeSymbol {
    /// Diagonal of `A` at an interior row.
    pub fn implicit_diag(&self) -> f64 {
        (1.0 + 2.0 * (self.theta * self.r)) - self.dt * self.implicit_rate
    }

    /// Diagonal of `B` at an interior row.
    pub fn explicit_diag(&self) -> f64 {
        (1.0 - 2.0 * ((1.0 - self.theta) * self.r)) + self.dt * self.explicit_rate
    }

    /// `A` evaluated at an eigenvalue `mu ≤ 0` of the second difference.
    pub fn implicit_at(&self, mu: f64) -> f64 {
        1.0 - self.theta * self.r * mu - self.dt * self.implicit_rate
    }

    /// `B` evaluated at an eigenvalue `mu ≤ 0` of the second difference.
    pub fn explicit_at(&self, mu: f64) -> f64 {
        1.0 + (1.0 - self.theta) * self.r * mu + self.dt * self.explicit_rate
    }

    /// Eigenvalue of `A⁻¹B` on the mode where the second difference acts as `mu`.
    pub fn growth_at(&self, mu: f64) -> f64 {
        self.explicit_at(mu) / self.implicit_at(mu)
    }
}

/// How a scheme reacts to the current state before each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Rebuild {
    Static,
    /// `f(U^n)` added to the source (explicit nonlinear term).
    ExplicitSource,
    /// `A` diagonal gets `−Δt·σ(U^n)`.
    SplitImplicit,
    /// `A` diagonal gets `−Δt·f_u(U^n)`, source gets `f(U^n) − f_u(U^n)·U^n`.
    TaylorImplicit,
}

impl Rebuild {
    pub fn is_static(self) -> bool {
        self == Rebuild::Static
    }
}

/// Assembled two-level system.
#[derive(Debug, Clone, Serialize)]
pub struct TwoLevelScheme {
    kind: SchemeKind,
    equation: Equation,
    bc_kind: BcKind,
    a: TridiagonalMatrix,
    b: TridiagonalMatrix,
    g: Vec<f64>,
    rebuild: Rebuild,
    r: f64,
    dt: f64,
    dx: f64,
    frozen_bound: Option<f64>,
    base_a_diag: Vec<f64>,
    base_g: Vec<f64>,
    #[serde(skip)]
    scratch: Vec<f64>,
}

impl TwoLevelScheme {
    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn equation(&self) -> Equation {
        self.equation
    }

    pub fn bc_kind(&self) -> BcKind {
        self.bc_kind
    }

    /// Implicit-side matrix `A`.
    pub fn a(&self) -> &TridiagonalMatrix {
        &self.a
    }

    /// Explicit-side matrix `B`.
    pub fn b(&self) -> &TridiagonalMatrix {
        &self.b
    }

    /// Source `g` in `A·U^{n+1} = B·U^n + Δt·g`.
    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn rebuild(&self) -> Rebuild {
        self.rebuild
    }

    /// Mesh ratio `Δt/Δx²`.
    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// Constant `Ũ` used by the frozen scheme.
    pub fn frozen_bound(&self) -> Option<f64> {
        self.frozen_bound
    }

    /// Updates the state-dependent entries of `A` and `g` from `u`.
    /// Static schemes are left untouched.
    pub fn rebuild_for(&mut self, u: &[f64]) {
        let eq = self.equation;
        let dt = self.dt;
        match self.rebuild {
            Rebuild::Static => {}
            Rebuild::ExplicitSource => {
                for ((g, &base), &ui) in self.g.iter_mut().zip(&self.base_g).zip(u) {
                    *g = base + eq.reaction(ui);
                }
            }
            Rebuild::SplitImplicit => {
                let diag = self.a.diag_mut();
                for ((d, &base), &ui) in diag.iter_mut().zip(&self.base_a_diag).zip(u) {
                    *d = base - dt * eq.split_coefficient(ui);
                }
            }
            Rebuild::TaylorImplicit => {
                let diag = self.a.diag_mut();
                for (i, &ui) in u.iter().enumerate() {
                    let fu = eq.reaction_derivative(ui);
                    diag[i] = self.base_a_diag[i] - dt * fu;
                    self.g[i] = self.base_g[i] + (eq.reaction(ui) - fu * ui);
                }
            }
        }
    }

    /// Rebuilds around the constant state `Ũ` on every node, which turns a
    /// state-dependent scheme into the matrix used for linearized analysis.
    pub fn freeze_at(&mut self, u_frozen: f64) {
        let u = vec![u_frozen; self.dim()];
        self.rebuild_for(&u);
    }

    /// Advances one level. State-dependent schemes are rebuilt from `u` first.
    pub fn step(&mut self, u: &StateVector) -> Result<StateVector> {
        let next = self.step_values(u.values())?;
        Ok(StateVector::at_level(next, u.time_index() + 1))
    }

    pub(crate) fn step_values(&mut self, u: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if u.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: u.len(),
            });
        }
        self.rebuild_for(u);
        self.scratch.resize(n, 0.0);
        self.b.mul_vec_into(u, &mut self.scratch);
        for (rhs, g) in self.scratch.iter_mut().zip(&self.g) {
            *rhs += self.dt * g;
        }
        if self.kind == SchemeKind::Ftcs {
            return Ok(self.scratch.clone());
        }
        self.a.solve(&self.scratch)
    }
}

/// Builds `I + w·T` for the boundary kind, with `T` the unscaled second
/// difference (ghost-node rows for Neumann).
fn second_difference_combo(n: usize, bc: BcKind, diag: f64, off: f64) -> TridiagonalMatrix {
    let mut lower = vec![off; n - 1];
    let mut upper = vec![off; n - 1];
    if bc == BcKind::Neumann && n > 1 {
        upper[0] = 2.0 * off;
        lower[n - 2] = 2.0 * off;
    }
    TridiagonalMatrix::new(lower, vec![diag; n], upper).expect("band lengths are consistent")
}

/// Boundary contribution to `T·u`: Dirichlet values, or `∓2Δx·flux` from the
/// ghost nodes.
fn boundary_vector(n: usize, bc: &BoundaryCondition, dx: f64) -> Vec<f64> {
    let mut t = vec![0.0; n];
    match bc.kind {
        BcKind::Dirichlet => {
            t[0] += bc.left;
            t[n - 1] += bc.right;
        }
        BcKind::Neumann => {
            t[0] -= 2.0 * dx * bc.left;
            t[n - 1] += 2.0 * dx * bc.right;
        }
    }
    t
}

/// Number of unknowns: interior nodes for Dirichlet, all nodes for Neumann.
pub fn unknowns(mesh: &Mesh1D, bc: BcKind) -> usize {
    match bc {
        BcKind::Dirichlet => mesh.n_interior(),
        BcKind::Neumann => mesh.n_interior() + 2,
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if dt.is_finite() && dt > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")))
    }
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    kind: SchemeKind,
    eq: Equation,
    mesh: &Mesh1D,
    dt: f64,
    bc: &BoundaryCondition,
    symbol: SchemeSymbol,
    rebuild: Rebuild,
    frozen_bound: Option<f64>,
) -> TwoLevelScheme {
    let n = unknowns(mesh, bc.kind);
    let SchemeSymbol { r, theta, .. } = symbol;
    let a = second_difference_combo(n, bc.kind, symbol.implicit_diag(), -(theta * r));
    let b = second_difference_combo(n, bc.kind, symbol.explicit_diag(), (1.0 - theta) * r);
    // Boundary data enter both levels; their weights sum to r.
    let g: Vec<f64> = boundary_vector(n, bc, mesh.dx())
        .into_iter()
        .map(|t| r * t / dt)
        .collect();
    TwoLevelScheme {
        kind,
        equation: eq,
        bc_kind: bc.kind,
        base_a_diag: a.diag().to_vec(),
        base_g: g.clone(),
        a,
        b,
        g,
        rebuild,
        r,
        dt,
        dx: mesh.dx(),
        frozen_bound,
        scratch: Vec::with_capacity(n),
    }
}

fn mesh_ratio(mesh: &Mesh1D, dt: f64) -> f64 {
    dt / (mesh.dx() * mesh.dx())
}

/// Forward Euler in time. Nonlinear reactions are evaluated explicitly into `g`.
pub fn assemble_ftcs(eq: Equation, mesh: &Mesh1D, dt: f64, bc: &BoundaryCondition) -> Result<TwoLevelScheme> {
    check_dt(dt)?;
    let r = mesh_ratio(mesh, dt);
    // Nonlinear f stays out of B and goes through g each step.
    let symbol = match eq.linear_rate() {
        Some(_) => SchemeKind::Ftcs.symbol(eq, r, dt, 0.0),
        None => SchemeSymbol {
            r,
            dt,
            theta: 0.0,
            implicit_rate: 0.0,
            explicit_rate: 0.0,
        },
    };
    let rebuild = if eq.is_linear() {
        Rebuild::Static
    } else {
        Rebuild::ExplicitSource
    };
    Ok(assemble(SchemeKind::Ftcs, eq, mesh, dt, bc, symbol, rebuild, None))
}

/// Backward Euler in time; linear equations only.
pub fn assemble_btcs(eq: Equation, mesh: &Mesh1D, dt: f64, bc: &BoundaryCondition) -> Result<TwoLevelScheme> {
    check_dt(dt)?;
    SchemeKind::Btcs.check_applicable(eq)?;
    let r = mesh_ratio(mesh, dt);
    let symbol = SchemeKind::Btcs.symbol(eq, r, dt, 0.0);
    Ok(assemble(
        SchemeKind::Btcs,
        eq,
        mesh,
        dt,
        bc,
        symbol,
        Rebuild::Static,
        None,
    ))
}

/// Crank-Nicolson time averaging; linear equations only.
pub fn assemble_crank_nicolson(eq: Equation, mesh: &Mesh1D, dt: f64, bc: &BoundaryCondition) -> Result<TwoLevelScheme> {
    check_dt(dt)?;
    SchemeKind::CrankNicolson.check_applicable(eq)?;
    let r = mesh_ratio(mesh, dt);
    let symbol = SchemeKind::CrankNicolson.symbol(eq, r, dt, 0.0);
    Ok(assemble(
        SchemeKind::CrankNicolson,
        eq,
        mesh,
        dt,
        bc,
        symbol,
        Rebuild::Static,
        None,
    ))
}

/// Explicit diffusion with the reaction written as `σ(U^n)·U^{n+1}`.
pub fn assemble_semi_implicit(eq: Equation, mesh: &Mesh1D, dt: f64, bc: &BoundaryCondition) -> Result<TwoLevelScheme> {
    check_dt(dt)?;
    SchemeKind::SemiImplicit.check_applicable(eq)?;
    let r = mesh_ratio(mesh, dt);
    let symbol = SchemeSymbol {
        r,
        dt,
        theta: 0.0,
        implicit_rate: 0.0,
        explicit_rate: 0.0,
    };
    Ok(assemble(
        SchemeKind::SemiImplicit,
        eq,
        mesh,
        dt,
        bc,
        symbol,
        Rebuild::SplitImplicit,
        None,
    ))
}

/// Backward Euler with the reaction frozen to `σ(Ũ)·U^{n+1}` for the whole run.
pub fn assemble_btcs_frozen(
    eq: Equation,
    mesh: &Mesh1D,
    dt: f64,
    bc: &BoundaryCondition,
    u_bound: f64,
) -> Result<TwoLevelScheme> {
    check_dt(dt)?;
    if !u_bound.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "frozen bound must be finite, got {u_bound}"
        )));
    }
    let r = mesh_ratio(mesh, dt);
    let symbol = SchemeKind::BtcsFrozen.symbol(eq, r, dt, u_bound);
    Ok(assemble(
        SchemeKind::BtcsFrozen,
        eq,
        mesh,
        dt,
        bc,
        symbol,
        Rebuild::Static,
        Some(u_bound),
    ))
}

/// Backward Euler with the Taylor linearization
/// `f(U^{n+1}) ≈ f(U^n) + (U^{n+1} − U^n)·f_u(U^n)`.
pub fn assemble_btcs_linapprox(eq: Equation, mesh: &Mesh1D, dt: f64, bc: &BoundaryCondition) -> Result<TwoLevelScheme> {
    check_dt(dt)?;
    let r = mesh_ratio(mesh, dt);
    let symbol = SchemeSymbol {
        r,
        dt,
        theta: 1.0,
        implicit_rate: 0.0,
        explicit_rate: 0.0,
    };
    Ok(assemble(
        SchemeKind::BtcsLinApprox,
        eq,
        mesh,
        dt,
        bc,
        symbol,
        Rebuild::TaylorImplicit,
        None,
    ))
}

/// Assembles any scheme by kind. `frozen_bound` is required for
/// [`SchemeKind::BtcsFrozen`] and ignored otherwise.
pub fn assemble_scheme(
    kind: SchemeKind,
    eq: Equation,
    mesh: &Mesh1D,
    dt: f64,
    bc: &BoundaryCondition,
    frozen_bound: Option<f64>,
) -> Result<TwoLevelScheme> {
    match kind {
        SchemeKind::Ftcs => assemble_ftcs(eq, mesh, dt, bc),
        SchemeKind::Btcs => assemble_btcs(eq, mesh, dt, bc),
        SchemeKind::CrankNicolson => assemble_crank_nicolson(eq, mesh, dt, bc),
        SchemeKind::SemiImplicit => assemble_semi_implicit(eq, mesh, dt, bc),
        SchemeKind::BtcsFrozen => {
            let bound =
                frozen_bound.ok_or_else(|| Error::InvalidParameter("btcs-frozen needs a frozen bound".into()))?;
            assemble_btcs_frozen(eq, mesh, dt, bc, bound)
        }
        SchemeKind::BtcsLinApprox => assemble_btcs_linapprox(eq, mesh, dt, bc),
    }
}

#[cfg(test)]
mod tests;

use num_complex::Complex64;

use crate::problem::Equation;
use crate::schemes::{SchemeKind, SchemeSymbol};

/// Amplification factor of the Fourier mode `e^{imθ}`.
///
/// The second difference acts on the mode as `−4 sin²(θ/2)`. Nonlinear
/// reactions are frozen at `u_frozen`.
pub fn von_neumann_factor(
    kind: SchemeKind,
    equation: Equation,
    r: f64,
    dt: f64,
    theta: f64,
    u_frozen: f64,
) -> Complex64 {
    let s = (0.5 * theta).sin();
    let symbol = kind.symbol(equation, r, dt, u_frozen);
    Complex64::new(symbol.growth_at(-4.0 * s * s), 0.0)
}

/// `max_θ |g(θ)|` over `θ ∈ [0, π]`.
///
/// `g` is a ratio of two affine functions of `μ = −4 sin²(θ/2) ∈ [−4, 0]`, so
/// `|g|` peaks at an end of the interval unless the denominator vanishes
/// inside it, in which case the factor is unbounded.
pub fn max_amplification(symbol: &SchemeSymbol) -> f64 {
    let (p0, p4) = (symbol.implicit_at(0.0), symbol.implicit_at(-4.0));
    if p0 == 0.0 || p4 == 0.0 || p0.signum() != p4.signum() {
        return f64::INFINITY;
    }
    symbol.growth_at(0.0).abs().max(symbol.growth_at(-4.0).abs())
}

/// Slack `C` in `|g| ≤ 1 + C·Δt`: the linear growth rate `f_u(0)` when it is
/// positive (Fisher-KPP), zero otherwise.
pub fn vn_slack_default(equation: Equation) -> f64 {
    equation.reaction_derivative(0.0).max(0.0)
}

//! Finite-difference laboratory for oscillation-free stability of 1D
//! parabolic problems.
//!
//! * [`problem`]: equations, meshes, boundary data and initial profiles.
//! * [`schemes`]: the two-level schemes `A·Uⁿ⁺¹ = B·Uⁿ + Δt·g`.
//! * [`spectral`]: closed-form and dense spectra, the tests on them and the
//!   condition curves.
//! * [`diagnostics`]: stability, oscillation and monotonicity verdicts for a run.
//! * [`atlas`]: regime-map sweeps, conjecture audits and file outputs.
//!
//! ```
//! use oscfree::diagnostics::{run_simulation, DiagnosticsConfig};
//! use oscfree::problem::{BcKind, Equation, Ibvp};
//! use oscfree::schemes::SchemeKind;
//!
//! let ibvp = Ibvp::standard(Equation::Heat, BcKind::Dirichlet).with_length(1.0);
//! let flags = run_simulation(&ibvp, SchemeKind::Ftcs, 0.1, 0.002, &DiagnosticsConfig::default())?;
//! assert!(flags.stable && !flags.oscillatory);
//! # Ok::<(), oscfree::error::Error>(())
//! ```

pub mod atlas;
pub mod diagnostics;
pub mod error;
pub mod problem;
pub mod schemes;
pub mod spectral;

pub use error::{Error, Result};

// The guide's snippets run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/problems.md")]
    struct Problems;
    #[doc = include_str!("../../../book/src/schemes.md")]
    struct Schemes;
    #[doc = include_str!("../../../book/src/spectra.md")]
    struct Spectra;
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    struct Diagnostics;
    #[doc = include_str!("../../../book/src/regime-maps.md")]
    struct RegimeMaps;
    #[doc = include_str!("../../../book/src/audits.md")]
    struct Audits;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}

//! Eigenvalues of the effective update matrix `M = A⁻¹B`, Von Neumann
//! amplification factors and the analytic condition curves built on them.
//!
//! Every static scheme in [`crate::schemes`] is `A = p(T)`, `B = q(T)` for the
//! same second-difference matrix `T`, so `M` shares the eigenvectors of `T`
//! and its eigenvalues are `q(μ_i)/p(μ_i)` at the eigenvalues `μ_i` of `T`.
//! That closed form is what the sweeps use; the dense solver is kept as the
//! independent route and for matrices without that structure.

mod analysis;
mod curves;
mod vn;

use std::cmp::Ordering;
use std::f64::consts::PI;

use nalgebra::{DMatrix, Schur, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::BcKind;
use crate::schemes::{SchemeSymbol, TwoLevelScheme};

pub use analysis::{FreezeCandidates, SchemeAnalysis, SpectrumSummary};
pub use curves::{
    dominance_curve, find_largest_dt, log_spaced, monotonicity_curve, positive_eig_curve, vn_stability_curve,
    ConditionCurve, CurveKind, CurveSample, DtBound, BISECTION_DEPTH, CURVE_SAMPLES,
};
pub use vn::{max_amplification, vn_slack_default, von_neumann_factor};

/// Convergence tolerance handed to the dense eigensolver.
pub const DENSE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SpectrumSource {
    ClosedForm,
    Dense,
}

/// Eigenvalues sorted by descending real part.
#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    #[serde(serialize_with = "serialize_complex")]
    eigenvalues: Vec<Complex64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eigenvectors: Option<Vec<Vec<f64>>>,
    source: SpectrumSource,
    tolerance: f64,
}

fn serialize_complex<S: serde::Serializer>(values: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(values.len()))?;
    for z in values {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

fn by_descending_real(a: &Complex64, b: &Complex64) -> Ordering {
    b.re.partial_cmp(&a.re)
        .unwrap_or(Ordering::Equal)
        .then(b.im.partial_cmp(&a.im).unwrap_or(Ordering::Equal))
}

impl Spectrum {
    pub fn new(mut eigenvalues: Vec<Complex64>, source: SpectrumSource, tolerance: f64) -> Self {
        eigenvalues.sort_by(by_descending_real);
        Spectrum {
            eigenvalues,
            eigenvectors: None,
            source,
            tolerance,
        }
    }

    pub fn from_real(values: impl IntoIterator<Item = f64>, source: SpectrumSource) -> Self {
        Self::new(
            values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
            source,
            0.0,
        )
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|z| z.re).collect()
    }

    pub fn eigenvectors(&self) -> Option<&[Vec<f64>]> {
        self.eigenvectors.as_deref()
    }

    pub fn source(&self) -> SpectrumSource {
        self.source
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn max_real(&self) -> f64 {
        self.eigenvalues.first().map_or(f64::NAN, |z| z.re)
    }

    pub fn min_real(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.re).fold(f64::INFINITY, f64::min)
    }
}

/// Eigenvalues of the constant tridiagonal matrix with upper band `a`,
/// diagonal `b` and lower band `c`: `b + 2·sqrt(a·c)·cos(iπ/(N+1))`.
/// A negative product `a·c` moves the spectrum onto a vertical line.
pub fn tridiag_eigenvalues_closed(a: f64, b: f64, c: f64, n: usize) -> Spectrum {
    let ac = a * c;
    let root = ac.abs().sqrt();
    let values = (1..=n)
        .map(|i| {
            let wave = 2.0 * root * (i as f64 * PI / (n + 1) as f64).cos();
            if ac >= 0.0 {
                Complex64::new(b + wave, 0.0)
            } else {
                Complex64::new(b, wave)
            }
        })
        .collect();
    Spectrum::new(values, SpectrumSource::ClosedForm, 0.0)
}

/// Discrete sine vectors: the `i`-th vector has `k`-th component
/// `sin(ikπ/(N+1))`, `i, k = 1..N`.
pub fn tridiag_eigenvectors(n: usize) -> Vec<Vec<f64>> {
    (1..=n)
        .map(|i| {
            (1..=n)
                .map(|k| (i as f64 * k as f64 * PI / (n + 1) as f64).sin())
                .collect()
        })
        .collect()
}

/// `1 − 4r·sin²(iπ/(2(N+1)))` for the explicit heat scheme, eigenvectors attached.
pub fn heat_ftcs_eigenvalues(r: f64, n: usize) -> Spectrum {
    let values = (1..=n).map(|i| {
        let s = (i as f64 * PI / (2 * (n + 1)) as f64).sin();
        1.0 - 4.0 * r * s * s
    });
    let mut spectrum = Spectrum::from_real(values, SpectrumSource::ClosedForm);
    // Descending order matches i = 1..N, so the sine vectors line up.
    spectrum.eigenvectors = Some(tridiag_eigenvectors(n));
    spectrum
}

/// Eigenvalues of the unscaled second-difference matrix on `n` unknowns.
///
/// Dirichlet: `−4 sin²(iπ/(2(n+1)))`, `i = 1..n`.
/// Ghost-node Neumann (all nodes unknown): `−4 sin²(jπ/(2(n−1)))`, `j = 0..n−1`.
pub fn second_difference_eigenvalues(n: usize, bc: BcKind) -> Vec<f64> {
    match bc {
        BcKind::Dirichlet => (1..=n)
            .map(|i| {
                let s = (i as f64 * PI / (2 * (n + 1)) as f64).sin();
                -4.0 * s * s
            })
            .collect(),
        BcKind::Neumann => {
            if n == 1 {
                return vec![0.0];
            }
            (0..n)
                .map(|j| {
                    let s = (j as f64 * PI / (2 * (n - 1)) as f64).sin();
                    -4.0 * s * s
                })
                .collect()
        }
    }
}

/// Closed-form spectrum of `A⁻¹B` for a scheme symbol.
pub fn scheme_spectrum_closed(symbol: &SchemeSymbol, n: usize, bc: BcKind) -> Spectrum {
    let values = second_difference_eigenvalues(n, bc)
        .into_iter()
        .map(|mu| symbol.growth_at(mu));
    Spectrum::from_real(values, SpectrumSource::ClosedForm)
}

/// Eigenvalues of a dense real matrix. Symmetric input goes to the symmetric
/// solver; anything else to Hessenberg reduction and shifted Schur iteration,
/// capped at `100·N` sweeps.
pub fn dense_eigenvalues(m: &DMatrix<f64>, tol: f64) -> Result<Spectrum> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.ncols(),
        });
    }
    if n == 0 {
        return Ok(Spectrum::new(Vec::new(), SpectrumSource::Dense, tol));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigensolverFailed { n });
    }
    let scale = m.amax();
    if m.relative_eq(&m.transpose(), 0.0, f64::EPSILON) {
        let values = SymmetricEigen::try_new(m.clone(), tol * scale.max(1.0), 100 * n)
            .ok_or(Error::EigensolverFailed { n })?
            .eigenvalues;
        let values = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        return Ok(Spectrum::new(values, SpectrumSource::Dense, tol));
    }
    let values: Vec<Complex64> = match Schur::try_new(m.clone(), tol, 100 * n) {
        Some(schur) => schur.complex_eigenvalues().iter().copied().collect(),
        None => {
            // The iteration can cycle on spectra symmetric about zero; a
            // diagonal shift breaks the symmetry and is undone afterwards.
            let shift = 0.5 * scale.max(1.0);
            let shifted = m + DMatrix::identity(n, n) * shift;
            Schur::try_new(shifted, tol, 100 * n)
                .ok_or(Error::EigensolverFailed { n })?
                .complex_eigenvalues()
                .iter()
                .map(|z| z - shift)
                .collect()
        }
    };
    Ok(Spectrum::new(values, SpectrumSource::Dense, tol))
}

/// Dense `M = A⁻¹B`, one column per solve.
pub fn effective_update_matrix(scheme: &TwoLevelScheme) -> Result<DMatrix<f64>> {
    let n = scheme.dim();
    let b = scheme.b().to_dense();
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        let column: Vec<f64> = b.column(j).iter().copied().collect();
        let x = scheme.a().solve(&column)?;
        m.set_column(j, &nalgebra::DVector::from_vec(x));
    }
    Ok(m)
}

/// `max Re λ − max |Re λ| ≥ 0`: no negative eigenvalue outweighs the largest
/// positive one.
pub fn dominance_test(spectrum: &Spectrum) -> bool {
    dominance_from_extremes(spectrum.min_real(), spectrum.max_real())
}

/// Dominance from the two real-part extremes alone.
pub fn dominance_from_extremes(min_re: f64, max_re: f64) -> bool {
    max_re - min_re.abs().max(max_re.abs()) >= 0.0
}

/// All real parts strictly positive.
pub fn positive_real_test(spectrum: &Spectrum) -> bool {
    !spectrum.is_empty() && spectrum.eigenvalues.iter().all(|z| z.re > 0.0)
}

/// `max |λ|`.
pub fn spectral_radius(spectrum: &Spectrum) -> f64 {
    spectrum.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

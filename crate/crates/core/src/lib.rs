//! Numerical core for uplink-to-downlink (UL/DL) covariance interpolation on
//! frequency-division antenna arrays.
//!
//! A base station with `M` antennas observes the uplink channel covariance,
//! whose first column consists of samples `γ̌(kϱ)` of the Fourier transform of
//! an angular power spread function (PSF) `γ`. The downlink covariance needs
//! the samples `γ̌(kϱ/ν)` on a stretched lattice (`ν = f_ul/f_dl < 1`). This
//! crate provides:
//!
//! - [`manifold`]: array configurations, steering vectors, sampling lattices,
//!   and Minkowski difference sets for general array geometries.
//! - [`psf`]: angular PSFs as positive normalized measures (atoms + rectangular
//!   densities) and their continuous Fourier transforms.
//! - [`chebyshev`]: the even Chebyshev-type series behind the interpolation
//!   error analysis: coefficients `a_{2k}(s)`, truncation/derivative bounds,
//!   the exponent functions `f(α)`, `g(α)`, and the finite-`M` width bounds.
//! - [`covariance`]: Hermitian Toeplitz covariances, eigen power distributions,
//!   the power-capture distortion metric, and the line-of-sight attenuation
//!   factor.
//! - [`estimators`]: grid dictionaries, non-negative least squares, and
//!   group-sparse (L21) recovery from sketched snapshots.
//! - [`interpolate`]: the robust DL index set, degrees-of-freedom trade-off,
//!   the end-to-end interpolation pipeline, and an empirical width oracle.
//! - [`simchannel`]: reproducible synthetic channel snapshots and sample
//!   covariance estimation.
//!
//! All angular quantities use the normalized coordinate `ξ = sinθ / sinθ_max`,
//! so every PSF lives on `[-1, 1]` regardless of the physical aperture.

pub mod chebyshev;
pub mod covariance;
mod dd;
pub mod estimators;
pub mod interpolate;
pub mod manifold;
pub mod psf;
pub mod simchannel;

/// Complex scalar used throughout (double precision).
pub type C64 = num_complex::Complex64;

/// Errors reported by the numerical core.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Incompatible vector/matrix dimensions.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// A numerical validity check failed (e.g. loss of Hermitian symmetry,
    /// indefiniteness beyond tolerance).
    #[error("numerical check failed: {0}")]
    Numerical(String),
    /// A feasibility problem admitted no acceptable solution.
    #[error("infeasible: {0}")]
    Infeasible(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

//! Parameter algebra for projectively self-concordant barriers.
//!
//! The projective parameter `gamma >= 0` and the affine parameter
//! `nu >= 2` are linked by the strictly increasing bijection
//! `gamma = (nu - 2)/sqrt(nu - 1)`.  Every bounded convex body of
//! dimension `n` admits a barrier with `nu <= theta * alpha * n` where
//! `alpha` and `theta` are the constants of [`jarre_constants`]; the
//! ratio `nu_plus / n` decreases from `(343 + 119 sqrt 7)/27` at
//! `n = 1` towards the infimum `256/27`.

use crate::barrier::{Error, Result};

/// The `(gamma, nu)` parameter pair of a projectively self-concordant
/// barrier, kept mutually consistent at all times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierParams {
    /// Projective self-concordance constant, `>= 0`.
    pub gamma: f64,
    /// Equivalent affine barrier parameter, `>= 2`.
    pub nu: f64,
}

impl BarrierParams {
    /// Builds the pair from the affine parameter `nu >= 2`.
    pub fn from_nu(nu: f64) -> Result<Self> {
        Ok(Self { gamma: gamma_from_nu(nu)?, nu })
    }

    /// Builds the pair from the projective constant `gamma >= 0`.
    pub fn from_gamma(gamma: f64) -> Result<Self> {
        Ok(Self { gamma, nu: nu_from_gamma(gamma)? })
    }
}

/// Projective constant of a `nu`-barrier: `(nu - 2)/sqrt(nu - 1)`.
///
/// Errors when `nu < 2`; the map sends `[2, inf)` increasingly onto
/// `[0, inf)`.
pub fn gamma_from_nu(nu: f64) -> Result<f64> {
    if !(nu >= 2.0) {
        return Err(Error::InvalidConstruction(format!(
            "affine barrier parameter must satisfy nu >= 2, got {nu}"
        )));
    }
    Ok((nu - 2.0) / (nu - 1.0).sqrt())
}

/// Inverse of [`gamma_from_nu`]:
/// `nu = (gamma + sqrt(gamma^2 + 4)) * sqrt(gamma^2/4 + 1)`.
pub fn nu_from_gamma(gamma: f64) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(Error::InvalidConstruction(format!(
            "projective barrier constant must satisfy gamma >= 0, got {gamma}"
        )));
    }
    Ok((gamma + (gamma * gamma + 4.0).sqrt()) * (gamma * gamma / 4.0 + 1.0).sqrt())
}

/// Universal-barrier constants for an `nu`-dimensional bounded convex
/// body; see [`jarre_constants`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JarreConstants {
    /// Dilation constant `alpha = 4 + 3/sqrt(nu)`.
    pub alpha: f64,
    /// Scaling constant `theta`.
    pub theta: f64,
    /// Resulting barrier parameter bound `nu_plus = theta * alpha * nu`.
    pub nu_plus: f64,
}

/// Constants `alpha`, `theta`, and the parameter bound
/// `nu_plus = theta * alpha * nu` available for a bounded convex body of
/// dimension `nu >= 1`.
///
/// `nu_plus / nu` is strictly decreasing in `nu`, equals
/// `(343 + 119 sqrt 7)/27 ~ 24.36` at `nu = 1`, and tends to `256/27`
/// for large `nu`.
pub fn jarre_constants(nu: f64) -> Result<JarreConstants> {
    if !(nu >= 1.0) {
        return Err(Error::InvalidConstruction(format!(
            "dimension must satisfy nu >= 1, got {nu}"
        )));
    }
    let alpha = 4.0 + 3.0 / nu.sqrt();
    let edge = alpha / (alpha.sqrt() + 2.0) - 1.0;
    let theta = (1.0 + (alpha - 1.0) / (edge * edge)) / (alpha * nu);
    Ok(JarreConstants { alpha, theta, nu_plus: theta * alpha * nu })
}

//! Von Neumann and Rényi entropies (natural logarithm) and their gradients.
//!
//! Eigenvalues are clipped below at [`CLIP_FLOOR`] wherever a logarithm or a
//! negative power would otherwise diverge.

use crate::tensorcore::HermitianMatrix;
use crate::{Error, Result};

/// Lower clip applied to eigenvalues before `ln` and fractional powers.
pub const CLIP_FLOOR: f64 = 1e-15;

/// `−Σ λ ln λ` over a spectrum, with `0 ln 0 = 0` and negative round-off dropped.
pub fn von_neumann_of_spectrum(values: &[f64]) -> f64 {
    -values
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v * v.ln())
        .sum::<f64>()
}

/// `ln(Σ λ^α) / (1 − α)` over a spectrum.
pub fn renyi_of_spectrum(values: &[f64], alpha: f64) -> Result<f64> {
    check_alpha(alpha, 0.0)?;
    Ok(power_trace(values, alpha).ln() / (1.0 - alpha))
}

fn check_alpha(alpha: f64, min: f64) -> Result<()> {
    if !alpha.is_finite() || alpha < min {
        return Err(Error::InvalidParameter(format!(
            "Rényi order {alpha} out of range"
        )));
    }
    if alpha == 1.0 {
        return Err(Error::InvalidParameter(
            "Rényi order 1 is the von Neumann entropy".into(),
        ));
    }
    Ok(())
}

/// `Σ λ^α` over eigenvalues above the clip floor; smaller ones are round-off.
fn power_trace(values: &[f64], alpha: f64) -> f64 {
    values
        .iter()
        .filter(|&&v| v > CLIP_FLOOR)
        .map(|&v| v.powf(alpha))
        .sum()
}

/// `S(ρ) = −tr(ρ ln ρ)`.
pub fn von_neumann(rho: impl AsRef<HermitianMatrix>) -> Result<f64> {
    Ok(von_neumann_of_spectrum(&rho.as_ref().eigenvalues()?))
}

/// `S_α(ρ) = ln tr(ρ^α) / (1 − α)` for `α ≥ 0`, `α ≠ 1`.
pub fn renyi(rho: impl AsRef<HermitianMatrix>, alpha: f64) -> Result<f64> {
    check_alpha(alpha, 0.0)?;
    renyi_of_spectrum(&rho.as_ref().eigenvalues()?, alpha)
}

/// Gradient of `tr(ρ ln ρ)`, i.e. `ln ρ + I`.
pub fn grad_von_neumann_objective(rho: impl AsRef<HermitianMatrix>) -> Result<HermitianMatrix> {
    rho.as_ref().map_spectrum(|v| v.max(CLIP_FLOOR).ln() + 1.0)
}

/// Gradient of `S_α`: `α/(1−α) · ρ^{α−1} / tr(ρ^α)`, for `α > 0`, `α ≠ 1`.
pub fn grad_renyi(rho: impl AsRef<HermitianMatrix>, alpha: f64) -> Result<HermitianMatrix> {
    check_alpha(alpha, f64::MIN_POSITIVE)?;
    let e = rho.as_ref().eig()?;
    let scale = alpha / ((1.0 - alpha) * power_trace(&e.values, alpha));
    let values: Vec<f64> = e
        .values
        .iter()
        .map(|&v| scale * v.max(CLIP_FLOOR).powf(alpha - 1.0))
        .collect();
    Ok(e.reconstruct_with(&values))
}

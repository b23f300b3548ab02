use hamiltonian_forge::CouplingSet;
use serde::{Deserialize, Serialize};

use crate::SpectraError;

/// `x = ½(β/λ + 1/ℓ(ℓ+1))·λ²/ε²`.
pub fn coupling_x(lambda: f64, eps: f64, ell: u64, beta: f64) -> Result<f64, SpectraError> {
    if eps == 0.0 {
        return Err(SpectraError::ZeroEps);
    }
    let l2 = ell as f64 * (ell as f64 + 1.0);
    Ok(0.5 * (beta / lambda + 1.0 / l2) * lambda * lambda / (eps * eps))
}

/// The `β` that places a run at `x`.
pub fn beta_for_x(x: f64, lambda: f64, eps: f64, ell: u64) -> Result<f64, SpectraError> {
    if eps == 0.0 {
        return Err(SpectraError::ZeroEps);
    }
    let l2 = ell as f64 * (ell as f64 + 1.0);
    Ok(lambda * (2.0 * x * eps * eps / (lambda * lambda) - 1.0 / l2))
}

/// Level-wise comparison of a simulator spectrum `E` with a target `Ẽ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub mean_shift: f64,
    /// `|std(E − Ẽ) / mean(E − Ẽ)|`; `+∞` when the mean vanishes.
    pub d: f64,
    /// `(E_i − Ẽ_i) − mean`.
    pub residuals: Vec<f64>,
    pub division_guard: bool,
    /// Level counts before truncation to the shorter spectrum.
    pub truncated: Option<(usize, usize)>,
    /// `|mean(E) − mean(Ẽ)| / span(Ẽ)`.
    pub scale_ratio: f64,
}

pub fn compare_spectra(e: &[f64], target: &[f64]) -> Result<Comparison, SpectraError> {
    let n = e.len().min(target.len());
    if n == 0 {
        return Err(SpectraError::EmptySpectrum);
    }
    let truncated = (e.len() != target.len()).then_some((e.len(), target.len()));
    let (e, t) = (&e[..n], &target[..n]);
    let diff: Vec<f64> = e.iter().zip(t).map(|(a, b)| a - b).collect();
    let mean = diff.iter().sum::<f64>() / n as f64;
    let residuals: Vec<f64> = diff.iter().map(|x| x - mean).collect();
    let std = (residuals.iter().map(|r| r * r).sum::<f64>() / n as f64).sqrt();
    let division_guard = mean.abs() < 1e-14;
    let d = if division_guard { f64::INFINITY } else { (std / mean).abs() };
    let span = t.iter().copied().fold(f64::NEG_INFINITY, f64::max) - t.iter().copied().fold(f64::INFINITY, f64::min);
    let mean_e = e.iter().sum::<f64>() / n as f64;
    let mean_t = t.iter().sum::<f64>() / n as f64;
    let scale_ratio = if span > 0.0 { (mean_e - mean_t).abs() / span } else { f64::INFINITY };
    Ok(Comparison { mean_shift: mean, d, residuals, division_guard, truncated, scale_ratio })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub couplings: CouplingSet,
    pub ell: Option<u32>,
    pub n: Option<u32>,
    pub dims: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub tag: String,
    pub sector: String,
    pub eigenvalues: Vec<f64>,
    /// Largest Gauss-label spread over the returned eigenvectors.
    pub sharpness: Option<f64>,
    pub comparison: Option<Comparison>,
    pub metadata: RunMetadata,
}

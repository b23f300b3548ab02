use hamiltonian_forge::{LinkOps, ModelSpec};
use serde::{Deserialize, Serialize};

use crate::decompose::TermClass;
use crate::series::{effective_hamiltonian, EffectiveSeries, SeriesOptions};
use crate::SeriesError;

/// Finite-ℓ U(1) series with its aggregate electric coefficient.
#[derive(Debug, Clone)]
pub struct FiniteLReport {
    pub series: EffectiveSeries,
    pub summary: FiniteLSummary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteLSummary {
    pub ell: u32,
    pub beta: f64,
    /// `(β/λ + 1/ℓ(ℓ+1))·ε²/λ`.
    pub predicted_tilde_e: f64,
    /// Electric coefficient of the first two orders combined.
    pub measured_tilde_e: f64,
    pub plaquette: f64,
    /// Fourth-order remainder relative to the plaquette part (Frobenius norms).
    pub remainder_ratio: f64,
}

/// `β` implied by the couplings (`μ = βε²/λ²`).
pub fn beta_of(spec: &ModelSpec) -> f64 {
    let c = &spec.couplings;
    c.beta.unwrap_or(c.mu * c.lambda * c.lambda / (c.eps * c.eps))
}

pub fn predicted_tilde_e(ell: u32, beta: f64, eps: f64, lambda: f64) -> f64 {
    (beta / lambda + 1.0 / (ell * (ell + 1)) as f64) * eps * eps / lambda
}

pub fn finite_l_series(spec: &ModelSpec, opts: &SeriesOptions) -> Result<FiniteLReport, SeriesError> {
    let LinkOps::U1(u) = spec.links else {
        return Err(SeriesError::Invalid("finite-ℓ series needs spin-ℓ U(1) links".into()));
    };
    let series = effective_hamiltonian(spec, opts)?;
    let c = &spec.couplings;
    let beta = beta_of(spec);
    let measured_tilde_e = series.decomposition.iter().take(2).map(|d| d.measured(TermClass::Electric)).sum();
    let (plaquette, remainder_ratio) = match series.decomposition.get(3) {
        Some(d) => {
            let p = d.get(TermClass::Plaquette).map_or((0.0, 0.0), |e| (e.measured, e.norm));
            (p.0, if p.0 != 0.0 { d.residual_norm / (p.0.abs() * p.1) } else { f64::NAN })
        }
        None => (0.0, f64::NAN),
    };
    let summary = FiniteLSummary {
        ell: u.ell,
        beta,
        predicted_tilde_e: predicted_tilde_e(u.ell, beta, c.eps, c.lambda),
        measured_tilde_e,
        plaquette,
        remainder_ratio,
    };
    Ok(FiniteLReport { series, summary })
}

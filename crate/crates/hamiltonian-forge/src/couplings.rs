use serde::{Deserialize, Serialize};

/// `μ = β ε² / λ²`.
pub fn mu_from_beta(beta: f64, eps: f64, lambda: f64) -> f64 {
    beta * eps * eps / (lambda * lambda)
}

/// Coupling constants shared by every term builder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CouplingSet {
    pub g2: f64,
    pub mu: f64,
    pub eps: f64,
    pub lambda: f64,
    pub beta: Option<f64>,
    pub mass: f64,
    pub gamma: f64,
    pub xi_in: f64,
    /// Coefficient of the special-vertex counter term in `H_D`.
    pub counterterm: f64,
}

impl Default for CouplingSet {
    fn default() -> Self {
        Self { g2: 2.0, mu: 1.0, eps: 0.0, lambda: 0.0, beta: None, mass: 0.0, gamma: 0.0, xi_in: 1.0, counterterm: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CouplingIssue {
    BetaAboveOne,
    NonPositiveLambda,
    XiNotAllowed,
    MuMismatch,
}

impl CouplingSet {
    /// Kogut-Susskind couplings: `μ = g²/2`.
    pub fn from_g2(g2: f64) -> Self {
        Self { g2, mu: g2 / 2.0, ..Self::default() }
    }

    /// Loop-method couplings with `μ` derived from `β`.
    pub fn loop_method(eps: f64, lambda: f64, beta: f64) -> Self {
        let mu = mu_from_beta(beta, eps, lambda);
        Self { g2: 2.0 * mu, mu, eps, lambda, beta: Some(beta), ..Self::default() }
    }

    /// Recomputes `μ` and `g²` from `β` when `β` is set.
    pub fn resolved(mut self) -> Self {
        if let Some(b) = self.beta {
            self.mu = mu_from_beta(b, self.eps, self.lambda);
            self.g2 = 2.0 * self.mu;
        }
        self
    }

    /// Violated invariants for a run with `colours` colours.
    pub fn check(&self, colours: usize, loop_method: bool) -> Vec<CouplingIssue> {
        let mut out = Vec::new();
        if loop_method && self.beta.is_some_and(|b| b > 1.0) {
            out.push(CouplingIssue::BetaAboveOne);
        }
        if loop_method && self.lambda <= 0.0 {
            out.push(CouplingIssue::NonPositiveLambda);
        }
        let inv = 1.0 / colours as f64;
        if (self.xi_in - 1.0).abs() > 1e-12 && (self.xi_in - inv).abs() > 1e-12 {
            out.push(CouplingIssue::XiNotAllowed);
        }
        if let Some(b) = self.beta {
            let want = mu_from_beta(b, self.eps, self.lambda);
            if (self.mu - want).abs() > 1e-12 * want.abs().max(1e-300) {
                out.push(CouplingIssue::MuMismatch);
            }
        }
        out
    }
}

//! Lattice gauge Hamiltonians on a shared Fock basis.

mod couplings;
mod gauss;
mod model;
mod terms;

use fock_algebra::FockError;
use gauge_links::LinkError;
use thiserror::Error;

pub use couplings::{mu_from_beta, CouplingIssue, CouplingSet};
pub use gauss::{gauss_defect, gauss_generator, GaussGenerator};
pub use model::{
    AuxFill, DimEstimate, Family, Layout, LinkOps, MatterSpec, ModelAssembly, ModelConfig, ModelSpec, Species,
    TermKind, Theory,
};
pub use terms::{
    constraint_hamiltonian, directed_hop, dirac_hamiltonian, electric_hamiltonian, link_interaction_hamiltonian,
    magnetic_hamiltonian, mass_hamiltonian, plaquette_operator, HopDirection, Images,
};

#[derive(Debug, Error)]
pub enum ForgeError {
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("model has no {0:?} family")]
    MissingFamily(Species),
    #[error("estimated dimension {estimate} exceeds cap {cap}")]
    DimensionCap { estimate: u128, cap: usize },
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Link(#[from] LinkError),
}

/// Builds the basis and every requested term.
pub fn assemble_model(cfg: &ModelConfig) -> Result<ModelAssembly, ForgeError> {
    let spec = ModelSpec::new(cfg)?;
    let est = spec.estimate_dims();
    if est.total > cfg.dim_cap as u128 {
        return Err(ForgeError::DimensionCap { estimate: est.total, cap: cfg.dim_cap });
    }
    let basis = spec.enumerate_basis(cfg.dim_cap)?;
    let c = spec.couplings.clone();
    let mut warnings = Vec::new();
    let mut terms = Vec::new();
    for kind in cfg.effective_terms() {
        let op = match kind {
            TermKind::Electric => spec.electric(&basis, c.mu),
            TermKind::Magnetic => {
                if spec.geometry.n_plaquettes() == 0 {
                    warnings.push("H_B requested on a lattice without plaquettes; term is zero".to_string());
                }
                spec.magnetic(&basis, c.g2)
            }
            TermKind::Interaction => spec.interaction(&basis, c.eps, &spec.default_species())?,
            TermKind::Mass => {
                spec.require(&[Species::Dynamic])?;
                spec.mass(&basis, c.mass)
            }
            TermKind::Dirac => spec.dirac(&basis, c.mass, c.gamma, c.counterterm)?,
            TermKind::Constraint => spec.constraint(&basis, c.lambda),
            TermKind::GaussPenalty => spec.gauss_penalty(&basis, cfg.penalty),
        };
        terms.push((kind, op));
    }
    let issues = c.check(spec.layout.colours, c.beta.is_some());
    warnings.extend(issues.iter().map(|i| format!("{i:?}")));
    Ok(ModelAssembly { spec, basis, terms, warnings, penalty: cfg.penalty })
}

/// One row of the term manifest carried into reports.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ManifestEntry {
    pub term: String,
    pub coefficient: f64,
    pub formula: String,
}

impl ModelAssembly {
    pub fn manifest(&self) -> Vec<ManifestEntry> {
        let c = &self.spec.couplings;
        let zn = matches!(self.spec.links, LinkOps::Zn(_));
        self.terms
            .iter()
            .map(|(k, _)| {
                let (coefficient, formula) = match (k, &self.spec.links) {
                    (TermKind::Electric, LinkOps::Zn(_)) => (c.mu, "-(mu/2) sum (P + P^dag)"),
                    (TermKind::Electric, LinkOps::Su2(..)) => (c.mu, "sum (g_L L^2 + g_R R^2)/2, g_L = g_R = mu"),
                    (TermKind::Electric, _) => (c.mu, "mu sum E^2"),
                    (TermKind::Magnetic, _) if zn => (-0.5 / c.g2, "-(1/2g^2) sum (Q1 Q2 Q3^dag Q4^dag + h.c.)"),
                    (TermKind::Magnetic, _) => (-1.0 / c.g2, "-(1/g^2) sum (Tr U1 U2 U3^dag U4^dag + h.c.)"),
                    (TermKind::Interaction, _) => (c.eps, "eps sum (psi^dag U psi + h.c.)"),
                    (TermKind::Mass, _) => (c.mass, "M sum (-1)^n Psi^dag Psi"),
                    (TermKind::Dirac, _) => (c.gamma, "M sum (-1)^n Psi^dag Psi + gamma sum (Psi^dag U Psi + h.c.) + counterterms"),
                    (TermKind::Constraint, _) if self.spec.zn_aux() => (c.lambda, "lambda sum N_v (N_v - 1)"),
                    (TermKind::Constraint, _) => (-c.lambda, "-lambda sum (F_psi psi^dag psi + F_chi chi^dag chi)"),
                    (TermKind::GaussPenalty, _) => (self.penalty, "kappa sum_v G_v^2"),
                };
                ManifestEntry { term: k.label().to_string(), coefficient, formula: formula.to_string() }
            })
            .collect()
    }
}

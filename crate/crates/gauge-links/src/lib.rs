//! Link Hilbert spaces and their gauge operators.
//!
//! Each link space describes the modes it occupies in a Fock basis and how its
//! operators act on the local occupation numbers. Local single-link bases are
//! provided for algebra checks.

mod hybrid;
mod su2;
mod u1;
mod zn;

pub use hybrid::{zn_hybridize, HybridReport, ZnHybridSpec};
pub use su2::{pauli, su2_link, LinkForm, Side, Step, Su2LinkSpace, Term};
pub use u1::{u1_link, U1LinkSpace};
pub use zn::{zn_link, ZnLinkSpace};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinkError {
    #[error("spin truncation ℓ={0} is below 1")]
    EllTooSmall(u32),
    #[error("Z_N order {0} is below 2")]
    OrderTooSmall(u32),
    #[error("SU(2) boson cap {0} is below 2")]
    CapTooSmall(u32),
    #[error("hybridized link requires exactly one boson per link, got {0}")]
    HybridSector(u32),
    #[error("hybridized link is missing species: {0}")]
    MissingSpecies(String),
    #[error(transparent)]
    Fock(#[from] fock_algebra::FockError),
}

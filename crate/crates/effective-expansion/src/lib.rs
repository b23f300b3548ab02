//! Loop-method effective Hamiltonians and their exact references.

mod decompose;
mod exact;
mod finite;
mod series;
mod space;
mod trace;

use fock_algebra::FockError;
use hamiltonian_forge::ForgeError;
use thiserror::Error;

pub use decompose::{
    class_operator, decompose, frobenius, non_constant_part, predicted, solve_gram, table, xi_in, DecompEntry,
    DecompositionRow, OrderDecomposition, TermClass,
};
pub use exact::{
    dense_eigh, dense_eigvalsh, des_cloizeaux, exact_ground_sector_spectrum, extract_plaquette_coefficient,
    effective_band, fit_plaquette_from_spectra, fit_power, sector_hamiltonian, spectral_residual, Estimate, PowerFit, SectorSpectrum,
};
pub use finite::{beta_of, finite_l_series, predicted_tilde_e, FiniteLReport, FiniteLSummary};
pub use series::{effective_hamiltonian, sw_orders, EffectiveSeries, SeriesOptions};
pub use space::{
    build_resolvent, ground_seeds, link_vacuum, matter_configs, max_link_flux, resolvent_from_energies, working_basis,
    PerturbationSplit,
};
pub use trace::{trace_out_fermions, TracedOperator};

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("order {0} unsupported (1..=4)")]
    OrderUnsupported(usize),
    #[error("order {0} was not computed")]
    MissingOrder(usize),
    #[error("model has no auxiliary loop-method matter")]
    NotLoopMethod,
    #[error("excited state {state} lies {gap} above the ground manifold")]
    DegenerateGap { state: usize, gap: f64 },
    #[error("empty ground sector")]
    EmptySector,
    #[error("block of dim {dim} is not a product of {gauge} gauge and {fermions} fermion states")]
    NonFactorizable { dim: usize, gauge: usize, fermions: usize },
    #[error("ill-conditioned fit (condition {0})")]
    IllConditioned(f64),
    #[error("eigensolver: {0}")]
    Eigen(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Forge(#[from] ForgeError),
    #[error(transparent)]
    Fock(#[from] FockError),
}

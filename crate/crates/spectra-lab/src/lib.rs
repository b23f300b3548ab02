//! Eigensolvers, spectrum comparison and strong-coupling observables.

mod compare;
mod fluxtube;
mod sector;
mod solver;
mod sweep;

use effective_expansion::SeriesError;
use fock_algebra::FockError;
use hamiltonian_forge::ForgeError;
use lattice_core::LatticeError;
use thiserror::Error;

pub use compare::{beta_for_x, compare_spectra, coupling_x, Comparison, RunMetadata, SpectrumReport};
pub use fluxtube::{flux_tube_scan, string_tension, FluxTubePoint, FluxTubeTable, LineFit};
pub use sector::{gauss_sharpness, project_to_sector, sector_indices, sector_levels_by_filter};
pub use solver::{
    diagonalize, DenseFull, Eigensolver, IterativeLowestK, SolveRequest, SolverMode, SolverRegistry, Spectrum,
};
pub use sweep::{
    simulator_levels, sweep, sweep_point, target_hamiltonian, u1_loop_spec, SweepConfig, SweepPoint, SweepResult,
};

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error("operator is not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("iterative solver converged {found} of {wanted} levels (worst residual {residual:e})")]
    NotConverged { found: usize, wanted: usize, residual: f64 },
    #[error("unknown eigensolver {0:?}")]
    UnknownSolver(String),
    #[error("empty spectrum")]
    EmptySpectrum,
    #[error("x is undefined at ε = 0")]
    ZeroEps,
    #[error("separation {r} does not fit on {sites} sites")]
    SeparationTooLarge { r: usize, sites: usize },
    #[error("solver: {0}")]
    Solver(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Forge(#[from] ForgeError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

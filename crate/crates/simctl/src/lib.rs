//! Config-driven orchestration of gauge-simulation experiments.

mod config;
mod experiment;
pub mod invariants;
mod kinds;
mod output;
mod validate;

use std::path::Path;

use effective_expansion::SeriesError;
use fock_algebra::FockError;
use hamiltonian_forge::ForgeError;
use serde_json::json;
use spectra_lab::SpectraError;
use thiserror::Error;

pub use config::{ExperimentConfig, FluxTubeBlock, GeometryBlock, OutputBlock, SectorBlock, SeriesBlock, SolverBlock};
pub use experiment::{Experiment, ExperimentRegistry, Planned, RunContext};
pub use output::{fmt_f64, Bundle, Cell, Table};
pub use validate::{validate, AssemblyEstimate, DerivedCouplings, Diagnostics, WallTime};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("config invalid: {0}")]
    Config(String),
    #[error("estimated dimension {estimate} exceeds cap {cap}")]
    DimensionCap { estimate: u128, cap: usize },
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
}

impl SimError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        SimError::Io { path: path.display().to_string(), msg: e.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Config(_) => 2,
            SimError::DimensionCap { .. } => 3,
            SimError::Solver(_) => 4,
            SimError::Io { .. } => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SimError::Config(_) => "config_invalid",
            SimError::DimensionCap { .. } => "dimension_cap",
            SimError::Solver(_) => "solver_failure",
            SimError::Io { .. } => "io",
        }
    }

    /// Machine-readable form written to stderr.
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = json!({ "error": self.kind(), "exit_code": self.exit_code(), "message": self.to_string() });
        if let SimError::DimensionCap { estimate, cap } = self {
            v["estimate"] = json!(estimate.to_string());
            v["cap"] = json!(cap);
        }
        v
    }
}

impl From<FockError> for SimError {
    fn from(e: FockError) -> Self {
        match e {
            FockError::DimensionCap { cap } => SimError::DimensionCap { estimate: cap as u128 + 1, cap },
            FockError::EmptyBasis => SimError::Config(e.to_string()),
            other => SimError::Solver(other.to_string()),
        }
    }
}

impl From<ForgeError> for SimError {
    fn from(e: ForgeError) -> Self {
        match e {
            ForgeError::DimensionCap { estimate, cap } => SimError::DimensionCap { estimate, cap },
            ForgeError::Fock(f) => f.into(),
            ForgeError::Invalid(_) | ForgeError::MissingFamily(_) | ForgeError::Link(_) => SimError::Config(e.to_string()),
        }
    }
}

impl From<SeriesError> for SimError {
    fn from(e: SeriesError) -> Self {
        match e {
            SeriesError::Forge(f) => f.into(),
            SeriesError::Fock(f) => f.into(),
            SeriesError::OrderUnsupported(_) | SeriesError::NotLoopMethod | SeriesError::Invalid(_) | SeriesError::EmptySector => {
                SimError::Config(e.to_string())
            }
            other => SimError::Solver(other.to_string()),
        }
    }
}

impl From<SpectraError> for SimError {
    fn from(e: SpectraError) -> Self {
        match e {
            SpectraError::Forge(f) => f.into(),
            SpectraError::Fock(f) => f.into(),
            SpectraError::Series(s) => s.into(),
            SpectraError::Lattice(_)
            | SpectraError::UnknownSolver(_)
            | SpectraError::ZeroEps
            | SpectraError::SeparationTooLarge { .. } => SimError::Config(e.to_string()),
            other => SimError::Solver(other.to_string()),
        }
    }
}

/// Result of a completed run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub files: Vec<String>,
    pub manifest: serde_json::Value,
    pub bundle: Bundle,
}

/// Validates, runs on a pool of `threads` workers and writes the bundle to `out`.
pub fn run(cfg: &ExperimentConfig, out: &Path, threads: Option<usize>) -> Result<RunOutcome, SimError> {
    let registry = ExperimentRegistry::default();
    let diag = validate(cfg);
    if let Some(e) = diag.errors.first() {
        return Err(SimError::Config(e.clone()));
    }
    if let Some(a) = diag.assemblies.iter().find(|a| !a.upper_bound && a.total > a.cap as u128) {
        return Err(SimError::DimensionCap { estimate: a.total, cap: a.cap });
    }
    let exp = registry.get(&cfg.kind)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| SimError::Config(format!("thread pool: {e}")))?;
    let ctx = RunContext::default();
    let started = std::time::SystemTime::now();
    let clock = std::time::Instant::now();
    let mut bundle = pool.install(|| exp.run(cfg, &ctx))?;
    bundle.warnings.extend(diag.warnings.iter().cloned());
    let manifest = json!({
        "simctl_version": env!("CARGO_PKG_VERSION"),
        "kind": cfg.kind,
        "config": cfg,
        "derived": diag.derived,
        "assemblies": diag.assemblies,
        "solvers": ctx.solvers.names(),
        "solver_seed": cfg.solver.seed,
        "terms": bundle.terms,
        "summary": bundle.summary,
        "warnings": bundle.warnings,
        "started_unix": started.duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        "wall_seconds": clock.elapsed().as_secs_f64(),
    });
    let files = output::write_bundle(out, &bundle, &manifest)?;
    Ok(RunOutcome { files, manifest, bundle })
}

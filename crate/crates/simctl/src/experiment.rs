use std::collections::BTreeMap;

use hamiltonian_forge::ModelConfig;
use spectra_lab::SolverRegistry;

use crate::config::ExperimentConfig;
use crate::kinds;
use crate::output::Bundle;
use crate::SimError;

/// A model an experiment will assemble, reported by `validate`.
#[derive(Debug, Clone)]
pub struct Planned {
    pub label: String,
    pub model: ModelConfig,
    /// The run builds a reachable subset; the product estimate only bounds it.
    pub upper_bound: bool,
}

/// Shared, read-only state of a run.
#[derive(Default)]
pub struct RunContext {
    pub solvers: SolverRegistry,
}

pub trait Experiment: Send + Sync {
    fn kind(&self) -> &'static str;
    /// Checks the blocks this kind reads and lists the models it assembles.
    fn plan(&self, cfg: &ExperimentConfig) -> Result<Vec<Planned>, SimError>;
    fn run(&self, cfg: &ExperimentConfig, ctx: &RunContext) -> Result<Bundle, SimError>;
}

/// Experiment kinds by name.
pub struct ExperimentRegistry {
    kinds: BTreeMap<&'static str, Box<dyn Experiment>>,
}

impl Default for ExperimentRegistry {
    fn default() -> Self {
        let mut r = Self { kinds: BTreeMap::new() };
        r.register(Box::new(kinds::Audit));
        r.register(Box::new(kinds::Schwinger));
        r.register(Box::new(kinds::LoopZn));
        r.register(Box::new(kinds::LoopU1FiniteL));
        r.register(Box::new(kinds::LoopSu2));
        r.register(Box::new(kinds::SweepXd));
        r.register(Box::new(kinds::FluxTube));
        r
    }
}

impl ExperimentRegistry {
    pub fn register(&mut self, e: Box<dyn Experiment>) {
        self.kinds.insert(e.kind(), e);
    }

    pub fn get(&self, kind: &str) -> Result<&dyn Experiment, SimError> {
        self.kinds.get(kind).map(|b| b.as_ref()).ok_or_else(|| {
            SimError::Config(format!("unknown experiment kind {kind:?}; known: {}", self.names().join(", ")))
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.kinds.keys().copied().collect()
    }
}

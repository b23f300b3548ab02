use hamiltonian_forge::{CouplingSet, MatterSpec, ModelConfig, Theory};
use lattice_core::{build_lattice, Boundary, LatticeGeometry};
use serde::{Deserialize, Serialize};
use spectra_lab::{SolveRequest, SweepConfig};

use crate::SimError;

/// One experiment read from a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: String,
    #[serde(default)]
    pub geometry: Option<GeometryBlock>,
    #[serde(default)]
    pub theory: Option<Theory>,
    #[serde(default)]
    pub matter: Option<MatterSpec>,
    #[serde(default)]
    pub couplings: Option<CouplingSet>,
    #[serde(default)]
    pub sector: SectorBlock,
    #[serde(default)]
    pub solver: SolverBlock,
    #[serde(default)]
    pub series: Option<SeriesBlock>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub fluxtube: Option<FluxTubeBlock>,
    #[serde(default)]
    pub output: OutputBlock,
    #[serde(default = "default_cap")]
    pub dim_cap: usize,
}

fn default_cap() -> usize {
    2_000_000
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryBlock {
    pub spatial_dim: usize,
    pub extents: Vec<usize>,
    /// One entry per axis; missing means open.
    #[serde(default)]
    pub boundary: Vec<Boundary>,
}

impl GeometryBlock {
    pub fn single_plaquette() -> Self {
        Self { spatial_dim: 2, extents: vec![2, 2], boundary: Vec::new() }
    }

    pub fn build(&self) -> Result<LatticeGeometry, SimError> {
        let boundary = if self.boundary.is_empty() { vec![Boundary::Open; self.spatial_dim] } else { self.boundary.clone() };
        build_lattice(self.spatial_dim, &self.extents, &boundary).map_err(|e| SimError::Config(e.to_string()))
    }
}

/// Static charges and Gauss values selecting the physical sector.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SectorBlock {
    pub static_charges: Vec<i64>,
    /// Explicit Gauss eigenvalues per vertex; `None` uses the static charges.
    pub gauss_values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverBlock {
    /// Registered eigensolver name.
    pub mode: String,
    pub k: Option<usize>,
    pub tol: f64,
    pub seed: u64,
}

impl Default for SolverBlock {
    fn default() -> Self {
        let r = SolveRequest::default();
        Self { mode: "dense_full".into(), k: None, tol: r.tol, seed: r.seed }
    }
}

impl SolverBlock {
    pub fn request(&self) -> SolveRequest {
        SolveRequest { k: self.k, tol: self.tol, seed: self.seed, vectors: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeriesBlock {
    pub order: usize,
    pub link_cap: Option<u32>,
    pub gap_tol: f64,
    /// Also diagonalize the full Hamiltonian on the ground sector.
    pub exact: bool,
}

impl Default for SeriesBlock {
    fn default() -> Self {
        Self { order: 4, link_cap: None, gap_tol: 1e-9, exact: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxTubeBlock {
    pub separations: Vec<usize>,
    pub sites: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputBlock {
    /// Suffix of `spectra_<tag>.csv`; defaults to the kind.
    pub tag: Option<String>,
    pub plots: bool,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self { tag: None, plots: true }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, SimError> {
        serde_json::from_str(text).map_err(|e| SimError::Config(format!("config json: {e}")))
    }

    pub fn tag(&self) -> String {
        self.output.tag.clone().unwrap_or_else(|| self.kind.clone())
    }

    pub fn geometry(&self) -> Result<LatticeGeometry, SimError> {
        self.geometry.as_ref().ok_or_else(|| missing(&self.kind, "geometry"))?.build()
    }

    pub fn theory(&self) -> Result<Theory, SimError> {
        self.theory.ok_or_else(|| missing(&self.kind, "theory"))
    }

    pub fn couplings(&self) -> Result<CouplingSet, SimError> {
        Ok(self.couplings.clone().ok_or_else(|| missing(&self.kind, "couplings"))?.resolved())
    }

    pub fn series(&self) -> SeriesBlock {
        self.series.clone().unwrap_or_default()
    }

    /// Model built from the geometry, theory, matter, couplings and sector blocks.
    pub fn model(&self, matter: MatterSpec) -> Result<ModelConfig, SimError> {
        let mut m = ModelConfig::new(self.geometry()?, self.theory()?)
            .with_matter(matter)
            .with_couplings(self.couplings.clone().unwrap_or_default().resolved());
        m.static_charges = self.sector.static_charges.clone();
        m.dim_cap = self.dim_cap;
        Ok(m)
    }
}

pub(crate) fn missing(kind: &str, block: &str) -> SimError {
    SimError::Config(format!("kind {kind} needs a {block} block"))
}

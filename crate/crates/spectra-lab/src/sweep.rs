use std::time::Instant;

use effective_expansion::{ground_seeds, sector_hamiltonian};
use fock_algebra::{Basis, SparseOperator};
use hamiltonian_forge::{AuxFill, CouplingSet, MatterSpec, ModelConfig, ModelSpec, Theory};
use lattice_core::LatticeGeometry;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compare::{beta_for_x, compare_spectra, Comparison};
use crate::solver::{SolveRequest, SolverRegistry};
use crate::SpectraError;

/// Grid of the finite-ℓ simulator against its effective target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub lambda: f64,
    pub eps: f64,
    pub ells: Vec<u32>,
    pub xs: Vec<f64>,
    /// Extra target at this ℓ standing in for the untruncated model.
    pub reference_ell: Option<u32>,
    pub mismatch_threshold: f64,
    pub solver: String,
    pub dim_cap: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            lambda: 10.0,
            eps: 0.1,
            ells: (1..=5).collect(),
            xs: vec![0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0],
            reference_ell: Some(100),
            mismatch_threshold: 100.0,
            solver: "dense_full".into(),
            dim_cap: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub x: f64,
    pub ell: u32,
    pub beta: f64,
    pub eps: f64,
    pub lambda: f64,
    pub d: f64,
    pub mean_shift: f64,
    pub scale_ratio: f64,
    pub scale_mismatch: bool,
    pub d_reference: Option<f64>,
    pub dims: usize,
    pub seconds: f64,
    /// Simulator levels `E`.
    pub levels: Vec<f64>,
    /// Target levels `Ẽ`.
    pub target: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn at(&self, ell: u32, x: f64) -> Option<&SweepPoint> {
        self.points.iter().find(|p| p.ell == ell && p.x == x)
    }
}

pub fn u1_loop_spec(geometry: LatticeGeometry, ell: u32, couplings: CouplingSet) -> Result<ModelSpec, SpectraError> {
    let cfg = ModelConfig::new(geometry, Theory::U1 { ell })
        .with_matter(MatterSpec { auxiliary: true, aux_fill: AuxFill::Pure, ..Default::default() })
        .with_couplings(couplings);
    Ok(ModelSpec::new(&cfg)?)
}

/// `H̃ = 2xε⁴/λ³ ΣE² − 2ε⁴/λ³ Σ(□ + □†)` on the ground-block link states.
pub fn target_hamiltonian(spec: &ModelSpec, x: f64, eps: f64, lambda: f64) -> Result<SparseOperator, SpectraError> {
    let seeds = ground_seeds(spec, None)?;
    let b = Basis::from_states(spec.modes(), seeds, None)?;
    let scale = 2.0 * eps.powi(4) / lambda.powi(3);
    Ok(spec.electric(&b, x * scale).add(&spec.plaquettes(&b).scale_real(-scale))?)
}

fn target_levels(reg: &SolverRegistry, name: &str, spec: &ModelSpec, x: f64, eps: f64, lambda: f64) -> Result<Vec<f64>, SpectraError> {
    let h = target_hamiltonian(spec, x, eps, lambda)?;
    Ok(reg.get(name)?.solve(&h, &SolveRequest::default())?.values)
}

/// Exact ground-block levels of the simulator, lowest `m0` of its sector,
/// measured from the constraint energy of `M₀`.
pub fn simulator_levels(reg: &SolverRegistry, name: &str, spec: &ModelSpec, dim_cap: usize) -> Result<(Vec<f64>, usize), SpectraError> {
    let (h, idx) = sector_hamiltonian(spec, None, dim_cap)?;
    let shift = spec.constraint_value(h.basis().state(idx[0]), spec.couplings.lambda);
    let w = reg.get(name)?.solve(&h, &SolveRequest::lowest(idx.len()))?;
    Ok((w.values.iter().map(|e| e - shift).collect(), h.dim()))
}

pub fn sweep_point(cfg: &SweepConfig, geometry: &LatticeGeometry, ell: u32, x: f64) -> Result<SweepPoint, SpectraError> {
    let t0 = Instant::now();
    let reg = SolverRegistry::default();
    let beta = beta_for_x(x, cfg.lambda, cfg.eps, ell as u64)?;
    let spec = u1_loop_spec(geometry.clone(), ell, CouplingSet::loop_method(cfg.eps, cfg.lambda, beta))?;
    let (levels, dims) = simulator_levels(&reg, &cfg.solver, &spec, cfg.dim_cap)?;
    let target = target_levels(&reg, "dense_full", &spec, x, cfg.eps, cfg.lambda)?;
    let cmp: Comparison = compare_spectra(&levels, &target)?;
    let d_reference = match cfg.reference_ell {
        Some(r) => {
            let rs = u1_loop_spec(geometry.clone(), r, CouplingSet::loop_method(cfg.eps, cfg.lambda, beta))?;
            Some(compare_spectra(&levels, &target_levels(&reg, "dense_full", &rs, x, cfg.eps, cfg.lambda)?)?.d)
        }
        None => None,
    };
    Ok(SweepPoint {
        x,
        ell,
        beta,
        eps: cfg.eps,
        lambda: cfg.lambda,
        d: cmp.d,
        mean_shift: cmp.mean_shift,
        scale_ratio: cmp.scale_ratio,
        scale_mismatch: cmp.scale_ratio > cfg.mismatch_threshold,
        d_reference,
        dims,
        seconds: t0.elapsed().as_secs_f64(),
        levels,
        target,
    })
}

/// Every `(ℓ, x)` point, evaluated in parallel and returned in grid order.
pub fn sweep(cfg: &SweepConfig, geometry: &LatticeGeometry) -> Result<SweepResult, SpectraError> {
    if cfg.eps == 0.0 {
        return Err(SpectraError::ZeroEps);
    }
    let grid: Vec<(u32, f64)> = cfg.ells.iter().flat_map(|&l| cfg.xs.iter().map(move |&x| (l, x))).collect();
    let points = grid.par_iter().map(|&(l, x)| sweep_point(cfg, geometry, l, x)).collect::<Result<Vec<_>, _>>()?;
    Ok(SweepResult { points })
}

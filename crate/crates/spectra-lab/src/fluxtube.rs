use hamiltonian_forge::{assemble_model, CouplingSet, MatterSpec, ModelConfig, TermKind, Theory};
use lattice_core::chain;
use serde::{Deserialize, Serialize};

use crate::sector::project_to_sector;
use crate::solver::{diagonalize, SolverMode};
use crate::SpectraError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxTubePoint {
    pub r: usize,
    pub energy: f64,
}

/// Static-pair energies on an open chain at strong coupling (`H = H_E`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxTubeTable {
    pub theory: Theory,
    pub g2: f64,
    pub points: Vec<FluxTubePoint>,
    pub vacuum: f64,
}

/// Gauss-penalty strength used to isolate SU(2) singlets.
const SINGLET_PENALTY: f64 = 50.0;

fn sector_ground(theory: Theory, sites: usize, g2: f64, pair: Option<(usize, usize)>) -> Result<f64, SpectraError> {
    let geom = chain(sites)?;
    let mut cfg = ModelConfig::new(geom, theory).with_couplings(CouplingSet::from_g2(g2)).with_terms(&[TermKind::Electric]);
    match theory {
        Theory::Su2 { .. } => {
            let sites = pair.map_or(Vec::new(), |(a, b)| vec![a, b]);
            cfg = cfg.with_matter(MatterSpec { dynamic: true, static_sites: Some(sites), ..Default::default() });
            // the string needs one flux unit per link between the charges
            cfg.link_budget = Some(pair.map_or(0, |(a, b)| b.abs_diff(a)) as u32);
            let a = assemble_model(&cfg)?;
            let h = a.total().add(&a.spec.gauss_penalty(&a.basis, SINGLET_PENALTY))?;
            let w = diagonalize(&h, SolverMode::DenseFull)?;
            Ok(w.values[0])
        }
        _ => {
            let mut q = vec![0i64; sites];
            if let Some((a, b)) = pair {
                q[a] += 1;
                q[b] -= 1;
            }
            cfg.static_charges = q;
            let a = assemble_model(&cfg)?;
            let targets = a.spec.default_gauss_targets();
            let h = project_to_sector(&a.total(), |s| a.spec.in_gauss_sector(s, &targets))?;
            Ok(diagonalize(&h, SolverMode::DenseFull)?.values[0])
        }
    }
}

/// `V(R)`: ground energy with a static pair at separation `R` minus the vacuum.
pub fn flux_tube_scan(theory: Theory, g2: f64, separations: &[usize], sites: usize) -> Result<FluxTubeTable, SpectraError> {
    if let Some(&r) = separations.iter().find(|&&r| r + 1 > sites) {
        return Err(SpectraError::SeparationTooLarge { r, sites });
    }
    let vacuum = sector_ground(theory, sites, g2, None)?;
    let points = separations
        .iter()
        .map(|&r| {
            let energy = if r == 0 { 0.0 } else { sector_ground(theory, sites, g2, Some((0, r)))? - vacuum };
            Ok(FluxTubePoint { r, energy })
        })
        .collect::<Result<_, SpectraError>>()?;
    Ok(FluxTubeTable { theory, g2, points, vacuum })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

/// Least-squares `V = σR + b`.
pub fn string_tension(points: &[FluxTubePoint]) -> Result<LineFit, SpectraError> {
    if points.len() < 2 {
        return Err(SpectraError::EmptySpectrum);
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.r as f64).sum::<f64>() / n;
    let my = points.iter().map(|p| p.energy).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.r as f64 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.r as f64 - mx) * (p.energy - my)).sum();
    let slope = sxy / sxx;
    Ok(LineFit { slope, intercept: my - slope * mx })
}

use std::sync::Arc;

use faer::{Mat, Side};
use fock_algebra::{Basis, SparseOperator};
use hamiltonian_forge::ModelSpec;

use crate::solver::{DenseFull, Eigensolver, SolveRequest};
use crate::SpectraError;

/// Ordinals of the basis states accepted by `keep`.
pub fn sector_indices(basis: &Basis, keep: impl Fn(&[u8]) -> bool) -> Vec<usize> {
    basis.states().enumerate().filter(|(_, s)| keep(s)).map(|(i, _)| i).collect()
}

/// `P H P` on the sub-basis of accepted states.
pub fn project_to_sector(h: &SparseOperator, keep: impl Fn(&[u8]) -> bool) -> Result<SparseOperator, SpectraError> {
    let b = h.basis();
    let idx = sector_indices(b, keep);
    if idx.is_empty() {
        return Err(SpectraError::EmptySpectrum);
    }
    let sub = Basis::from_states(b.modes().to_vec(), idx.iter().map(|&i| b.state(i).to_vec()), None)?;
    Ok(h.submatrix(&sub, &idx))
}

/// Levels of the full `H` that live in the sector, found by diagonalizing
/// the whole space and measuring each degenerate cluster's sector weight.
pub fn sector_levels_by_filter(
    h: &SparseOperator,
    keep: impl Fn(&[u8]) -> bool,
    cluster_tol: f64,
) -> Result<Vec<f64>, SpectraError> {
    let spec = DenseFull.solve(h, &SolveRequest::default().with_vectors())?;
    let vecs = spec.vectors.expect("requested");
    let mask: Vec<bool> = h.basis().states().map(keep).collect();
    let mut out = Vec::new();
    let mut start = 0;
    while start < spec.values.len() {
        let mut end = start + 1;
        while end < spec.values.len() && spec.values[end] - spec.values[end - 1] <= cluster_tol {
            end += 1;
        }
        let c = end - start;
        let gram = Mat::<faer::c64>::from_fn(c, c, |a, b| {
            let (x, y) = (&vecs[start + a], &vecs[start + b]);
            let s = (0..x.len()).filter(|&i| mask[i]).map(|i| x[i].conj() * y[i]).sum::<fock_algebra::C64>();
            faer::c64::new(s.re, s.im)
        });
        let w = gram.self_adjoint_eigenvalues(Side::Lower).map_err(|e| SpectraError::Solver(format!("{e:?}")))?;
        let mult = w.iter().filter(|&&x| x > 0.5).count();
        let mean = spec.values[start..end].iter().sum::<f64>() / c as f64;
        out.extend(std::iter::repeat(mean).take(mult));
        start = end;
    }
    Ok(out)
}

/// Largest standard deviation of any diagonal Gauss label over the vectors.
pub fn gauss_sharpness(spec: &ModelSpec, basis: &Arc<Basis>, vectors: &[Vec<fock_algebra::C64>]) -> f64 {
    let nv = spec.geometry.n_vertices();
    let labels: Vec<Vec<f64>> = basis.states().map(|s| (0..nv).map(|v| spec.gauss_value(s, v)).collect()).collect();
    let mut worst = 0.0f64;
    for x in vectors {
        let weight: f64 = x.iter().map(|a| a.norm_sqr()).sum();
        for v in 0..nv {
            let mean = x.iter().zip(&labels).map(|(a, l)| a.norm_sqr() * l[v]).sum::<f64>() / weight;
            let var = x.iter().zip(&labels).map(|(a, l)| a.norm_sqr() * (l[v] - mean).powi(2)).sum::<f64>() / weight;
            worst = worst.max(var.sqrt());
        }
    }
    worst
}

use std::sync::Arc;

use faer::{Mat, Side};
use fock_algebra::{Basis, SparseOperator, C64};
use hamiltonian_forge::ModelSpec;
use serde::{Deserialize, Serialize};

use crate::decompose::TermClass;
use crate::series::EffectiveSeries;
use crate::space::{ground_seeds, working_basis};
use crate::SeriesError;

fn to_faer(op: &SparseOperator) -> Mat<faer::c64> {
    let n = op.dim();
    let mut m = Mat::<faer::c64>::zeros(n, n);
    for (i, j, v) in op.iter() {
        m[(i, j)] = faer::c64::new(v.re, v.im);
    }
    m
}

/// Eigenvalues (ascending) and column eigenvectors of a Hermitian operator.
pub fn dense_eigh(op: &SparseOperator) -> Result<(Vec<f64>, Mat<faer::c64>), SeriesError> {
    let e = to_faer(op).self_adjoint_eigen(Side::Lower).map_err(|e| SeriesError::Eigen(format!("{e:?}")))?;
    let w = (0..op.dim()).map(|k| e.S()[k].re).collect();
    Ok((w, e.U().to_owned()))
}

pub fn dense_eigvalsh(op: &SparseOperator) -> Result<Vec<f64>, SeriesError> {
    let mut w = to_faer(op).self_adjoint_eigenvalues(Side::Lower).map_err(|e| SeriesError::Eigen(format!("{e:?}")))?;
    w.sort_by(f64::total_cmp);
    Ok(w)
}

/// Lowest band of the full Hamiltonian in the Gauss sector of the ground manifold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectorSpectrum {
    /// The `m0_dim` lowest eigenvalues, ascending.
    pub band: Vec<f64>,
    pub m0_dim: usize,
    pub sector_dim: usize,
}

/// Full `H_C + H_E + H_int` on the sector space with the ground-manifold ordinals.
pub fn sector_hamiltonian(
    spec: &ModelSpec,
    link_cap: Option<u32>,
    dim_cap: usize,
) -> Result<(SparseOperator, Vec<usize>), SeriesError> {
    let seeds = ground_seeds(spec, link_cap)?;
    let basis = working_basis(spec, &seeds, None, false, dim_cap)?;
    let c = &spec.couplings;
    let h = spec
        .constraint(&basis, c.lambda)
        .add(&spec.electric(&basis, c.mu))?
        .add(&spec.interaction(&basis, c.eps, &spec.default_species())?)?;
    let mut idx: Vec<usize> = seeds.iter().map(|s| basis.index_of(s).expect("seed in sector")).collect();
    idx.sort_unstable();
    Ok((h, idx))
}

/// Exact diagonalization of the sector-projected full Hamiltonian.
///
/// The sector is the closure of the ground-manifold seeds under `H`, i.e. the
/// connected part of their Gauss sector.
pub fn exact_ground_sector_spectrum(
    spec: &ModelSpec,
    link_cap: Option<u32>,
    dim_cap: usize,
) -> Result<SectorSpectrum, SeriesError> {
    let (h, idx) = sector_hamiltonian(spec, link_cap, dim_cap)?;
    if idx.is_empty() {
        return Err(SeriesError::EmptySector);
    }
    let w = dense_eigvalsh(&h)?;
    Ok(SectorSpectrum { band: w[..idx.len()].to_vec(), m0_dim: idx.len(), sector_dim: h.dim() })
}

/// Hermitian effective Hamiltonian of the lowest band, built from exact
/// eigenvectors and written on the ground-manifold states.
pub fn des_cloizeaux(h: &SparseOperator, p_idx: &[usize], target: &Arc<Basis>) -> Result<SparseOperator, SeriesError> {
    let (w, u) = dense_eigh(h)?;
    let np = p_idx.len();
    // a = P V_low
    let a = Mat::<faer::c64>::from_fn(np, np, |r, k| u[(p_idx[r], k)]);
    let m = &a * a.adjoint();
    let me = m.self_adjoint_eigen(Side::Lower).map_err(|e| SeriesError::Eigen(format!("{e:?}")))?;
    let mu = me.U();
    let d = Mat::<faer::c64>::from_fn(np, np, |i, j| {
        if i == j {
            faer::c64::new(me.S()[i].re.powf(-0.5), 0.0)
        } else {
            faer::c64::new(0.0, 0.0)
        }
    });
    let m_inv_sqrt = mu * &d * mu.adjoint();
    let diag_w = Mat::<faer::c64>::from_fn(np, np, |i, j| {
        if i == j {
            faer::c64::new(w[i], 0.0)
        } else {
            faer::c64::new(0.0, 0.0)
        }
    });
    let heff = &m_inv_sqrt * (&a * &diag_w * a.adjoint()) * &m_inv_sqrt;
    let trip = (0..np)
        .flat_map(|i| (0..np).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, C64::new(heff[(i, j)].re, heff[(i, j)].im)))
        .collect();
    Ok(SparseOperator::from_triplets(target, trip))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub uncertainty: f64,
}

/// Plaquette coefficient of the fourth order (trace projection).
pub fn extract_plaquette_coefficient(series: &EffectiveSeries) -> Result<Estimate, SeriesError> {
    let d = series.decomposition.get(3).ok_or(SeriesError::MissingOrder(4))?;
    let e = d.get(TermClass::Plaquette).ok_or(SeriesError::MissingOrder(4))?;
    if e.absorbed {
        return Err(SeriesError::Invalid("no plaquette operator on the seed block".into()));
    }
    Ok(Estimate { value: e.measured, uncertainty: d.residual_norm / e.norm })
}

/// Power law `y = a·ε^p` fitted in log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub prefactor: f64,
    pub exponent: f64,
    /// Largest deviation of a point from the fitted line in log space.
    pub log_residual: f64,
}

pub fn fit_power(points: &[(f64, f64)]) -> Result<PowerFit, SeriesError> {
    if points.len() < 2 {
        return Err(SeriesError::IllConditioned(f64::INFINITY));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.abs().ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx < 1e-6 || ys.iter().any(|y| !y.is_finite()) {
        return Err(SeriesError::IllConditioned(1.0 / sxx));
    }
    let p = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / sxx;
    let b = my - p * mx;
    let log_residual = xs.iter().zip(&ys).map(|(x, y)| (y - b - p * x).abs()).fold(0.0, f64::max);
    let sign = points[0].1.signum();
    Ok(PowerFit { prefactor: sign * b.exp(), exponent: p, log_residual })
}

/// Exact-spectra mode: the band spread at each `ε` divided by the spread of
/// the plaquette operator on the same block, fitted to `c·ε^p`.
///
/// `sign` fixes the orientation of the coefficient (the spread is unsigned).
pub fn fit_plaquette_from_spectra(points: &[(f64, Vec<f64>)], o_spread: f64, sign: f64) -> Result<PowerFit, SeriesError> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .map(|(eps, band)| {
            let lo = band.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = band.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (*eps, sign * (hi - lo) / o_spread)
        })
        .collect();
    fit_power(&pts)
}

/// `max_i |a_i − b_i − c|` minimized over the constant `c` (half the spread of
/// the level-wise difference).
pub fn spectral_residual(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let lo = d.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (hi - lo) / 2.0
}

/// Ascending eigenvalues of `Σ_{k ≤ n} H_eff^(k)` plus the constraint shift.
pub fn effective_band(series: &EffectiveSeries, n: usize) -> Result<Vec<f64>, SeriesError> {
    let mut w = dense_eigvalsh(&series.sum_through(n)?)?;
    w.iter_mut().for_each(|x| *x += series.shift);
    Ok(w)
}

use std::sync::Arc;

use crate::basis::SectorLabel;
use crate::{Basis, FockError, Result, SparseOperator, C64};

pub type Sector = SectorLabel;

/// Embedding of a restricted basis into its parent.
#[derive(Debug, Clone)]
pub struct Injection {
    pub parent: Arc<Basis>,
    pub child: Arc<Basis>,
    /// `map[k]` is the parent ordinal of child state `k`.
    pub map: Vec<usize>,
}

impl Injection {
    /// `P A P` on the child basis.
    pub fn project(&self, op: &SparseOperator) -> Result<SparseOperator> {
        if op.basis().id() != self.parent.id() {
            return Err(FockError::BasisMismatch { left: op.basis().id(), right: self.parent.id() });
        }
        Ok(op.submatrix(&self.child, &self.map))
    }

    pub fn lift(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.parent.dim()];
        for (k, &i) in self.map.iter().enumerate() {
            out[i] = v[k];
        }
        out
    }

    pub fn restrict_vector(&self, v: &[C64]) -> Vec<C64> {
        self.map.iter().map(|&i| v[i]).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

const SECTOR_TOL: f64 = 1e-9;

/// Keeps the states on which every diagonal `ops[k]` takes the value `values[k]`.
///
/// An empty value list returns the full basis. Contradictory values give an
/// empty child basis rather than an error.
pub fn sector_restrict(
    basis: &Arc<Basis>,
    ops: &[&SparseOperator],
    values: &[f64],
    name: &str,
) -> Result<Injection> {
    assert_eq!(ops.len(), values.len(), "one value per sector operator");
    let mut diags = Vec::with_capacity(ops.len());
    for op in ops {
        if op.basis().id() != basis.id() {
            return Err(FockError::BasisMismatch { left: op.basis().id(), right: basis.id() });
        }
        if let Some((row, col)) = op.off_diagonal_entry(SECTOR_TOL) {
            return Err(FockError::NonDiagonal { row, col });
        }
        diags.push(op.diagonal_values());
    }
    let keep: Vec<usize> = (0..basis.dim())
        .filter(|&i| diags.iter().zip(values).all(|(d, &v)| (d[i] - v).norm() < SECTOR_TOL))
        .collect();
    let label = Sector { name: name.to_string(), values: values.to_vec() };
    Ok(build(basis, keep, label))
}

/// Keeps the states satisfying `pred`.
pub fn restrict_by<F: Fn(&[u8]) -> bool>(basis: &Arc<Basis>, pred: F, name: &str) -> Injection {
    let keep = (0..basis.dim()).filter(|&i| pred(basis.state(i))).collect();
    build(basis, keep, Sector { name: name.to_string(), values: Vec::new() })
}

fn build(basis: &Arc<Basis>, keep: Vec<usize>, label: Sector) -> Injection {
    let mut flat = Vec::with_capacity(keep.len() * basis.n_modes());
    for &i in &keep {
        flat.extend_from_slice(basis.state(i));
    }
    let child = Basis::with_sector(basis.modes().to_vec(), flat, label);
    Injection { parent: basis.clone(), child, map: keep }
}

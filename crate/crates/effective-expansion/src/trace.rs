use std::collections::BTreeMap;
use std::sync::Arc;

use fock_algebra::{Basis, SparseOperator, C64};
use hamiltonian_forge::ModelSpec;

use crate::decompose::xi_in;
use crate::SeriesError;

/// Gauge-only operator `Tr_F(A ρ)` with `ρ` uniform over the fermion
/// configurations present, and the initial-state factor `ξ_in`.
#[derive(Debug, Clone)]
pub struct TracedOperator {
    pub basis: Arc<Basis>,
    pub op: SparseOperator,
    pub xi_in: f64,
}

/// Partial trace over the auxiliary fermions of an operator on a product block.
pub fn trace_out_fermions(spec: &ModelSpec, op: &SparseOperator) -> Result<TracedOperator, SeriesError> {
    let b = op.basis();
    let split = spec.geometry.n_links() * spec.layout.link_width;
    let mut gauge: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
    let mut fermi: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
    for s in b.states() {
        let n = gauge.len();
        gauge.entry(s[..split].to_vec()).or_insert(n);
        let n = fermi.len();
        fermi.entry(s[split..].to_vec()).or_insert(n);
    }
    if gauge.len() * fermi.len() != b.dim() {
        return Err(SeriesError::NonFactorizable { dim: b.dim(), gauge: gauge.len(), fermions: fermi.len() });
    }
    let gauge_basis = Basis::from_states(spec.modes()[..split].to_vec(), gauge.keys().cloned(), None)?;
    let weight = 1.0 / fermi.len() as f64;
    let trip = op
        .iter()
        .filter(|&(i, j, _)| b.state(i)[split..] == b.state(j)[split..])
        .map(|(i, j, v)| {
            let gi = gauge_basis.index_of(&b.state(i)[..split]).expect("gauge part");
            let gj = gauge_basis.index_of(&b.state(j)[..split]).expect("gauge part");
            (gi, gj, v * C64::new(weight, 0.0))
        })
        .collect();
    Ok(TracedOperator { op: SparseOperator::from_triplets(&gauge_basis, trip), basis: gauge_basis, xi_in: xi_in(spec) })
}

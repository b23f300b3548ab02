use std::sync::Arc;

use fock_algebra::{Basis, SparseOperator};
use hamiltonian_forge::ModelSpec;
use serde::{Deserialize, Serialize};

use crate::decompose::{decompose, OrderDecomposition};
use crate::space::{ground_seeds, working_basis, PerturbationSplit};
use crate::SeriesError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesOptions {
    pub order: usize,
    /// Flux cap of the seed link states.
    pub link_cap: Option<u32>,
    /// Excited constraint levels closer than this to `M₀` abort the series.
    pub gap_tol: f64,
    pub dim_cap: usize,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self { order: 4, link_cap: None, gap_tol: 1e-9, dim_cap: 2_000_000 }
    }
}

impl SeriesOptions {
    pub fn order(order: usize) -> Self {
        Self { order, ..Default::default() }
    }

    pub fn with_cap(mut self, cap: u32) -> Self {
        self.link_cap = Some(cap);
        self
    }
}

/// Effective Hamiltonian orders on the seed block of `M₀`.
#[derive(Debug, Clone)]
pub struct EffectiveSeries {
    /// Seed states (a subset of `M₀`).
    pub basis: Arc<Basis>,
    /// `orders[k]` is `H_eff^(k+1)`.
    pub orders: Vec<SparseOperator>,
    pub decomposition: Vec<OrderDecomposition>,
    /// Constraint energy of `M₀` removed before expanding.
    pub shift: f64,
    pub working_dim: usize,
}

impl EffectiveSeries {
    pub fn order(&self, k: usize) -> Result<&SparseOperator, SeriesError> {
        self.orders.get(k.wrapping_sub(1)).ok_or(SeriesError::MissingOrder(k))
    }

    /// `Σ_{k ≤ n} H_eff^(k)`.
    pub fn sum_through(&self, n: usize) -> Result<SparseOperator, SeriesError> {
        let mut acc = SparseOperator::zero(&self.basis);
        for k in 1..=n {
            acc = acc.add(self.order(k)?)?;
        }
        Ok(acc)
    }
}

/// Keeps the entries of `x` whose endpoints satisfy `keep(p_row, p_col)`.
fn select(x: &SparseOperator, mask: &[bool], keep: impl Fn(bool, bool) -> bool) -> SparseOperator {
    let trip = x.iter().filter(|&(i, j, _)| keep(mask[i], mask[j])).collect();
    SparseOperator::from_triplets(x.basis(), trip)
}

/// Off-diagonal block entries divided by `E_i − E_j`.
fn l_map(x: &SparseOperator, mask: &[bool], e: &[f64]) -> SparseOperator {
    let trip = x.iter().filter(|&(i, j, _)| mask[i] != mask[j]).map(|(i, j, v)| (i, j, v / (e[i] - e[j]))).collect();
    SparseOperator::from_triplets(x.basis(), trip)
}

fn comm(a: &SparseOperator, b: &SparseOperator) -> SparseOperator {
    a.commutator(b).expect("shared basis")
}

fn pp(x: &SparseOperator, mask: &[bool]) -> SparseOperator {
    select(x, mask, |a, b| a && b)
}

/// Block-diagonalizing (Schrieffer-Wolff) series of `H₀ + H₁` through `order`.
pub fn sw_orders(split: &PerturbationSplit, order: usize) -> Result<Vec<SparseOperator>, SeriesError> {
    if !(1..=4).contains(&order) {
        return Err(SeriesError::OrderUnsupported(order));
    }
    let (mask, e, v) = (&split.m0[..], &split.h0[..], &split.h1);
    let vd = select(v, mask, |a, b| a == b);
    let vod = select(v, mask, |a, b| a != b);
    let mut out = vec![pp(v, mask)];
    if order == 1 {
        return Ok(out);
    }
    let s1 = l_map(&vod, mask, e);
    let s1_vod = comm(&s1, &vod);
    out.push(pp(&s1_vod, mask).scale_real(0.5));
    if order == 2 {
        return Ok(out);
    }
    let s2 = l_map(&comm(&vd, &s1), mask, e).scale_real(-1.0);
    out.push(pp(&comm(&s2, &vod), mask).scale_real(0.5));
    if order == 3 {
        return Ok(out);
    }
    let s1_s1_vod = comm(&s1, &s1_vod);
    let s3 = l_map(&comm(&vd, &s2), mask, e)
        .scale_real(-1.0)
        .add(&l_map(&s1_s1_vod, mask, e).scale_real(1.0 / 3.0))?;
    let h4 = pp(&comm(&s3, &vod), mask)
        .scale_real(0.5)
        .sub(&pp(&comm(&s1, &s1_s1_vod), mask).scale_real(1.0 / 24.0))?;
    out.push(h4);
    Ok(out)
}

/// Effective Hamiltonian of a loop-method model on its seed block.
pub fn effective_hamiltonian(spec: &ModelSpec, opts: &SeriesOptions) -> Result<EffectiveSeries, SeriesError> {
    if !(1..=4).contains(&opts.order) {
        return Err(SeriesError::OrderUnsupported(opts.order));
    }
    let seeds = ground_seeds(spec, opts.link_cap)?;
    let work = working_basis(spec, &seeds, Some(opts.order.div_ceil(2)), false, opts.dim_cap)?;
    let split = PerturbationSplit::new(spec, &work, opts.gap_tol)?;
    let orders = sw_orders(&split, opts.order)?;
    let idx: Vec<usize> = seeds.iter().map(|s| work.index_of(s).expect("seed in working basis")).collect();
    let mut idx_sorted = idx.clone();
    idx_sorted.sort_by(|&a, &b| work.state(a).iter().rev().cmp(work.state(b).iter().rev()));
    let seed_basis = Basis::from_states(spec.modes(), idx_sorted.iter().map(|&i| work.state(i).to_vec()), None)?;
    let orders: Vec<SparseOperator> = orders.iter().map(|o| o.submatrix(&seed_basis, &idx_sorted)).collect();
    let decomposition = orders.iter().enumerate().map(|(k, o)| decompose(spec, o, k + 1)).collect();
    Ok(EffectiveSeries { basis: seed_basis, orders, decomposition, shift: split.shift, working_dim: work.dim() })
}

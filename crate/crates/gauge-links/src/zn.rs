use std::f64::consts::PI;
use std::sync::Arc;

use fock_algebra::{Attachment, Basis, ModeSpec, SparseOperator, C64};

use crate::LinkError;

/// Z_N clock link. Occupation `n ∈ 0..N` encodes `m = n − ⌊(N−1)/2⌋`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZnLinkSpace {
    pub n: u32,
}

pub fn zn_link(n: u32) -> Result<ZnLinkSpace, LinkError> {
    if n < 2 {
        return Err(LinkError::OrderTooSmall(n));
    }
    Ok(ZnLinkSpace { n })
}

impl ZnLinkSpace {
    pub fn delta(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    fn offset(&self) -> i64 {
        (self.n as i64 - 1) / 2
    }

    pub fn m(&self, occ: u8) -> i64 {
        occ as i64 - self.offset()
    }

    /// Occupation of the zero-flux state.
    pub fn zero(&self) -> u8 {
        self.offset() as u8
    }

    /// `P|m⟩ = e^{imδ}|m⟩`.
    pub fn p_phase(&self, occ: u8) -> C64 {
        C64::from_polar(1.0, self.m(occ) as f64 * self.delta())
    }

    /// `Q|m⟩ = |m−1⟩`, cyclic.
    pub fn q(&self, occ: u8) -> u8 {
        ((occ as u32 + self.n - 1) % self.n) as u8
    }

    /// `Q†|m⟩ = |m+1⟩`, cyclic.
    pub fn q_dag(&self, occ: u8) -> u8 {
        ((occ as u32 + 1) % self.n) as u8
    }

    pub fn mode_spec(&self, name: impl Into<String>, link: usize) -> ModeSpec {
        ModeSpec::boson(name, (self.n - 1) as u8, Attachment::Link(link))
    }

    pub fn local_basis(&self) -> Arc<Basis> {
        Basis::enumerate(vec![self.mode_spec("m", 0)], &[], self.n as usize).expect("single link basis")
    }

    pub fn p(&self, basis: &Arc<Basis>) -> SparseOperator {
        SparseOperator::from_action(basis, |s, out| out.push((vec![s[0]], self.p_phase(s[0]))))
    }

    pub fn q_op(&self, basis: &Arc<Basis>) -> SparseOperator {
        SparseOperator::from_action(basis, |s, out| out.push((vec![self.q(s[0])], C64::new(1.0, 0.0))))
    }
}

use std::sync::Arc;

use fock_algebra::{Attachment, Basis, ModeSpec, SparseOperator, C64};

use crate::LinkError;

/// Truncated U(1) link: spin-ℓ ladder with `E = L_z`.
///
/// A link occupies one bounded mode whose occupation `n ∈ 0..=2ℓ` encodes
/// `m = n − ℓ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct U1LinkSpace {
    pub ell: u32,
}

pub fn u1_link(ell: u32) -> Result<U1LinkSpace, LinkError> {
    if ell < 1 {
        return Err(LinkError::EllTooSmall(ell));
    }
    Ok(U1LinkSpace { ell })
}

impl U1LinkSpace {
    pub fn dim(&self) -> usize {
        2 * self.ell as usize + 1
    }

    pub fn m(&self, n: u8) -> i64 {
        n as i64 - self.ell as i64
    }

    pub fn n_of(&self, m: i64) -> Option<u8> {
        (m.abs() <= self.ell as i64).then(|| (m + self.ell as i64) as u8)
    }

    /// `√(ℓ(ℓ+1))`.
    pub fn norm(&self) -> f64 {
        let l = self.ell as f64;
        (l * (l + 1.0)).sqrt()
    }

    /// `L₊|n⟩`, with the standard ladder element.
    pub fn raise(&self, n: u8) -> Option<(u8, f64)> {
        let m = self.m(n);
        if m >= self.ell as i64 {
            return None;
        }
        let l = self.ell as f64;
        let mf = m as f64;
        Some((n + 1, (l * (l + 1.0) - mf * (mf + 1.0)).sqrt()))
    }

    /// `L₋|n⟩`.
    pub fn lower(&self, n: u8) -> Option<(u8, f64)> {
        let m = self.m(n);
        if m <= -(self.ell as i64) {
            return None;
        }
        let l = self.ell as f64;
        let mf = m as f64;
        Some((n - 1, (l * (l + 1.0) - mf * (mf - 1.0)).sqrt()))
    }

    pub fn mode_spec(&self, name: impl Into<String>, link: usize) -> ModeSpec {
        ModeSpec::boson(name, 2 * self.ell as u8, Attachment::Link(link))
    }

    pub fn local_basis(&self) -> Arc<Basis> {
        Basis::enumerate(vec![self.mode_spec("E", 0)], &[], self.dim()).expect("single link basis")
    }

    fn local<F: Fn(u8) -> Option<(u8, f64)> + Sync>(&self, basis: &Arc<Basis>, f: F) -> SparseOperator {
        SparseOperator::from_action(basis, |s, out| {
            if let Some((t, a)) = f(s[0]) {
                out.push((vec![t], C64::new(a, 0.0)));
            }
        })
    }

    pub fn e(&self, basis: &Arc<Basis>) -> SparseOperator {
        SparseOperator::diagonal(basis, |s| self.m(s[0]) as f64)
    }

    pub fn l_plus(&self, basis: &Arc<Basis>) -> SparseOperator {
        self.local(basis, |n| self.raise(n))
    }

    pub fn l_minus(&self, basis: &Arc<Basis>) -> SparseOperator {
        self.local(basis, |n| self.lower(n))
    }

    /// `Ũ = L₊/√(ℓ(ℓ+1))`.
    pub fn u_tilde(&self, basis: &Arc<Basis>) -> SparseOperator {
        self.l_plus(basis).scale_real(1.0 / self.norm())
    }

    /// `‖Ũ†Ũ − 1‖_max`, optionally on the block `|m| ≤ m_fix`.
    pub fn unitarity_deficit(&self, m_fix: Option<i64>) -> f64 {
        let b = self.local_basis();
        let u = self.u_tilde(&b);
        let uu = u.adjoint().mul(&u).expect("same basis");
        let d = uu.sub(&SparseOperator::identity(&b)).expect("same basis");
        d.iter()
            .filter(|&(i, j, _)| {
                m_fix.map_or(true, |mf| self.m(b.state(i)[0]).abs() <= mf && self.m(b.state(j)[0]).abs() <= mf)
            })
            .map(|(_, _, v)| v.norm())
            .fold(0.0, f64::max)
    }

    /// Two-species Schwinger realization: modes `a, b` with `N_a + N_b = 2ℓ`,
    /// `E = (N_a − N_b)/2`, `L₊ = a†b`.
    pub fn schwinger_realization(&self) -> (Arc<Basis>, SparseOperator, SparseOperator) {
        let cap = 2 * self.ell as u8;
        let modes = vec![ModeSpec::boson("a", cap, Attachment::Free), ModeSpec::boson("b", cap, Attachment::Free)];
        let b = Basis::enumerate(modes, &[fock_algebra::Constraint::total([0, 1], cap as i64)], 1000)
            .expect("schwinger basis");
        let e = SparseOperator::diagonal(&b, |s| (s[0] as f64 - s[1] as f64) / 2.0);
        let lp = SparseOperator::from_action(&b, |s, out| {
            if s[1] > 0 && s[0] < cap {
                let amp = ((s[0] as f64 + 1.0) * s[1] as f64).sqrt();
                out.push((vec![s[0] + 1, s[1] - 1], C64::new(amp, 0.0)));
            }
        });
        (b, e, lp)
    }
}

use std::sync::Arc;

use fock_algebra::{Attachment, Basis, Constraint, ModeSpec, SparseOperator, C64};

use crate::LinkError;

/// Which end of the link a prepotential lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// `Unitary` carries the `1/√(N+1)` normalizations; `Dressed` is the bare
/// product `M_L M_R` of bilinear prepotential matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LinkForm {
    #[default]
    Unitary,
    Dressed,
}

/// One ladder factor of a prepotential matrix entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub side: Side,
    /// Colour index 0 or 1.
    pub colour: usize,
    pub create: bool,
    pub sign: f64,
}

impl Step {
    /// Local slot in `(a₁, a₂, b₁, b₂)`.
    pub fn slot(&self) -> usize {
        match self.side {
            Side::Left => self.colour,
            Side::Right => 2 + self.colour,
        }
    }

    pub fn adjoint(self) -> Self {
        Self { create: !self.create, ..self }
    }

    fn act(&self, occ: &mut [u8; 4], cap: u8) -> Option<f64> {
        let n = &mut occ[self.slot()];
        if self.create {
            if *n >= cap {
                return None;
            }
            *n += 1;
            Some(self.sign * (*n as f64).sqrt())
        } else {
            if *n == 0 {
                return None;
            }
            let a = self.sign * (*n as f64).sqrt();
            *n -= 1;
            Some(a)
        }
    }
}

/// One summand `(U_L)_{ik} (U_R)_{kj}` of a link matrix entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub left: Step,
    pub right: Step,
}

/// Schwinger-boson prepotential link with modes `a₁, a₂` (left) and `b₁, b₂`
/// (right), each capped at `n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Su2LinkSpace {
    pub n_max: u32,
}

pub fn su2_link(n_max: u32) -> Result<Su2LinkSpace, LinkError> {
    if n_max < 2 {
        return Err(LinkError::CapTooSmall(n_max));
    }
    Ok(Su2LinkSpace { n_max })
}

const PAULI: [[[C64; 2]; 2]; 3] = {
    const O: C64 = C64::new(0.0, 0.0);
    const I: C64 = C64::new(1.0, 0.0);
    const J: C64 = C64::new(0.0, 1.0);
    const MI: C64 = C64::new(-1.0, 0.0);
    const MJ: C64 = C64::new(0.0, -1.0);
    [[[O, I], [I, O]], [[O, MJ], [J, O]], [[I, O], [O, MI]]]
};

/// `(σ_a)_{ij}`.
pub fn pauli(a: usize, i: usize, j: usize) -> C64 {
    PAULI[a][i][j]
}

fn left_step(i: usize, k: usize) -> Step {
    let (colour, create, sign) = match (i, k) {
        (0, 0) => (0, true, 1.0),
        (0, 1) => (1, false, -1.0),
        (1, 0) => (1, true, 1.0),
        (1, 1) => (0, false, 1.0),
        _ => unreachable!("SU(2) index out of range"),
    };
    Step { side: Side::Left, colour, create, sign }
}

fn right_step(k: usize, j: usize) -> Step {
    let (colour, create, sign) = match (k, j) {
        (0, 0) => (0, true, 1.0),
        (0, 1) => (1, true, 1.0),
        (1, 0) => (1, false, -1.0),
        (1, 1) => (0, false, 1.0),
        _ => unreachable!("SU(2) index out of range"),
    };
    Step { side: Side::Right, colour, create, sign }
}

fn n_left(o: &[u8; 4]) -> f64 {
    (o[0] + o[1]) as f64
}

fn n_right(o: &[u8; 4]) -> f64 {
    (o[2] + o[3]) as f64
}

impl Su2LinkSpace {
    pub fn cap(&self) -> u8 {
        self.n_max as u8
    }

    pub fn mode_specs(&self, link: usize) -> Vec<ModeSpec> {
        ["a1", "a2", "b1", "b2"]
            .iter()
            .map(|n| ModeSpec::boson(format!("{n}_{link}"), self.cap(), Attachment::Link(link)))
            .collect()
    }

    /// Single-link basis with `N_L = N_R ≤ n_max`.
    pub fn local_basis(&self) -> Arc<Basis> {
        self.basis_with_budget(self.n_max)
    }

    pub fn basis_with_budget(&self, budget: u32) -> Arc<Basis> {
        let cons = [Constraint::balance(&[0, 1], &[2, 3])];
        let b = Basis::enumerate(self.mode_specs(0), &cons, 1 << 20).expect("link basis");
        let budget = budget.min(self.n_max) as u8;
        fock_algebra::restrict_by(&b, |s| s[0] + s[1] <= budget, "N_L=N_R").child
    }

    /// Summands of `U_{ij}`, indexed by the contracted colour `k`.
    pub fn terms(&self, i: usize, j: usize) -> [Term; 2] {
        [0, 1].map(|k| Term { left: left_step(i, k), right: right_step(k, j) })
    }

    /// Action of `U_{ij}` (or `(U†)_{ij}` when `dagger`) on a local occupation.
    pub fn apply_entry(&self, i: usize, j: usize, form: LinkForm, dagger: bool, occ: [u8; 4]) -> Vec<([u8; 4], f64)> {
        let cap = self.cap();
        let mut out = Vec::with_capacity(2);
        // (U†)_{ij} = Σ_k (U_R)_{ki}† (U_L)_{jk}†
        let (ti, tj) = if dagger { (j, i) } else { (i, j) };
        for t in self.terms(ti, tj) {
            let mut o = occ;
            let (l, r) = if dagger { (t.left.adjoint(), t.right.adjoint()) } else { (t.left, t.right) };
            let mut amp = 1.0;
            if form == LinkForm::Unitary {
                if dagger {
                    amp /= (n_left(&o) + 1.0).sqrt();
                } else {
                    amp /= (n_right(&o) + 1.0).sqrt();
                }
            }
            let Some(ar) = r.act(&mut o, cap) else { continue };
            let Some(al) = l.act(&mut o, cap) else { continue };
            amp *= ar * al;
            if form == LinkForm::Unitary {
                if dagger {
                    amp /= (n_right(&o) + 1.0).sqrt();
                } else {
                    amp /= (n_left(&o) + 1.0).sqrt();
                }
            }
            out.push((o, amp));
        }
        out
    }

    /// Action of the generator `L_a` or `R_a` on a local occupation.
    ///
    /// `L_a = ½ Σ (σ_a)_{lk} a_k† a_l`, `R_a = ½ Σ (σ_a)_{kl} b_k† b_l`.
    pub fn apply_generator(&self, side: Side, a: usize, occ: [u8; 4]) -> Vec<([u8; 4], C64)> {
        let off = if side == Side::Left { 0 } else { 2 };
        let mut out = Vec::with_capacity(4);
        for k in 0..2 {
            for l in 0..2 {
                let s = match side {
                    Side::Left => pauli(a, l, k),
                    Side::Right => pauli(a, k, l),
                };
                if s == C64::new(0.0, 0.0) || occ[off + l] == 0 {
                    continue;
                }
                let mut o = occ;
                let mut amp = (o[off + l] as f64).sqrt();
                o[off + l] -= 1;
                o[off + k] += 1;
                amp *= (o[off + k] as f64).sqrt();
                out.push((o, s * (0.5 * amp)));
            }
        }
        out
    }

    /// `j(j+1)` with `j = N/2` on the given side.
    pub fn casimir(&self, side: Side, occ: [u8; 4]) -> f64 {
        let j = if side == Side::Left { n_left(&occ) } else { n_right(&occ) } / 2.0;
        j * (j + 1.0)
    }

    fn lift<F>(basis: &Arc<Basis>, offset: usize, f: F) -> SparseOperator
    where
        F: Fn([u8; 4]) -> Vec<([u8; 4], C64)> + Sync,
    {
        SparseOperator::from_action(basis, |s, out| {
            let occ = [s[offset], s[offset + 1], s[offset + 2], s[offset + 3]];
            for (o, a) in f(occ) {
                let mut img = s.to_vec();
                img[offset..offset + 4].copy_from_slice(&o);
                out.push((img, a));
            }
        })
    }

    /// Matrix entry operator on a basis whose link modes start at `offset`.
    pub fn entry_op(&self, basis: &Arc<Basis>, offset: usize, i: usize, j: usize, form: LinkForm, dagger: bool) -> SparseOperator {
        Self::lift(basis, offset, |o| {
            self.apply_entry(i, j, form, dagger, o).into_iter().map(|(o, a)| (o, C64::new(a, 0.0))).collect()
        })
    }

    pub fn generator_op(&self, basis: &Arc<Basis>, offset: usize, side: Side, a: usize) -> SparseOperator {
        Self::lift(basis, offset, |o| self.apply_generator(side, a, o))
    }

    pub fn casimir_op(&self, basis: &Arc<Basis>, offset: usize, side: Side) -> SparseOperator {
        SparseOperator::diagonal(basis, |s| {
            self.casimir(side, [s[offset], s[offset + 1], s[offset + 2], s[offset + 3]])
        })
    }
}

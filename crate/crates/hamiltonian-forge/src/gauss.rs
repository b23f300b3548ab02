use std::sync::Arc;

use fock_algebra::{apply_string, Basis, Ladder, SparseOperator, C64};
use gauge_links::{pauli, Side};
use lattice_core::VertexId;

use crate::model::{LinkOps, ModelSpec, Species};
use crate::terms::Images;
use crate::ModelAssembly;

/// Gauss-law generator of one vertex.
#[derive(Debug, Clone)]
pub enum GaussGenerator {
    /// Hermitian components that commute with every gauge-invariant term
    /// (one for U(1), three for SU(2)).
    Additive(Vec<SparseOperator>),
    /// Unitary generator (clock links and the cyclic U(1) proxy).
    Unitary(SparseOperator),
}

impl GaussGenerator {
    /// `max ‖[G, H]‖_max` or `‖G H G† − H‖_max`.
    pub fn defect(&self, h: &SparseOperator) -> f64 {
        match self {
            GaussGenerator::Additive(cs) => {
                cs.iter().map(|g| g.commutator(h).expect("shared basis").max_abs()).fold(0.0, f64::max)
            }
            GaussGenerator::Unitary(g) => {
                let conj = g.mul(h).and_then(|x| x.mul(&g.adjoint())).expect("shared basis");
                conj.max_abs_diff(h).expect("shared basis")
            }
        }
    }
}

impl ModelSpec {
    /// Charge of vertex `v`: auxiliary occupation relative to the ground
    /// filling plus the staggered dynamic charge.
    pub fn charge(&self, s: &[u8], v: usize) -> i64 {
        let mut q = 0i64;
        let c = self.layout.colours;
        for (sp, fam) in &self.layout.families {
            let n: i64 = (0..c).map(|k| s[fam.mode(v, k)] as i64).sum();
            q += match sp {
                Species::Psi if fam.bosonic => n - 1,
                Species::Psi | Species::Chi => {
                    let fill = if self.is_special(*sp, v) { (self.aux_count(*sp) / self.special_count(*sp).max(1)) as i64 } else { 0 };
                    n - fill
                }
                Species::Dynamic => {
                    if self.matter.static_sites.is_some() {
                        n
                    } else {
                        n - if self.geometry.parity_sign(VertexId(v)) < 0 { c as i64 } else { 0 }
                    }
                }
            };
        }
        q
    }

    fn special_count(&self, sp: Species) -> usize {
        (0..self.geometry.n_vertices()).filter(|&v| self.is_special(sp, v)).count()
    }

    fn divergence(&self, s: &[u8], v: usize) -> i64 {
        let (pos, neg) = self.geometry.incident_links(VertexId(v)).expect("vertex in lattice");
        let m = |l: usize| -> i64 {
            match self.links {
                LinkOps::U1(u) => u.m(s[l]),
                LinkOps::Proxy(z) | LinkOps::Zn(z) => z.m(s[l]),
                LinkOps::Su2(..) => 0,
            }
        };
        pos.iter().map(|l| m(l.0)).sum::<i64>() - neg.iter().map(|l| m(l.0)).sum::<i64>()
    }

    /// Diagonal Gauss label of `v` on an occupation state.
    ///
    /// U(1): `div E − Q`. Proxy: the same, read modulo N. Clock: the exponent
    /// `k` of `G = e^{−iδk}`, in `0..N`. SU(2): the `z` component.
    pub fn gauss_value(&self, s: &[u8], v: usize) -> f64 {
        match self.links {
            LinkOps::U1(_) => (self.divergence(s, v) - self.charge(s, v)) as f64,
            LinkOps::Proxy(z) => (self.divergence(s, v) - self.charge(s, v)).rem_euclid(z.n as i64) as f64,
            LinkOps::Zn(z) => (self.divergence(s, v) + self.charge(s, v)).rem_euclid(z.n as i64) as f64,
            LinkOps::Su2(..) => self.su2_gauss_diag(s, v),
        }
    }

    fn su2_gauss_diag(&self, s: &[u8], v: usize) -> f64 {
        let (pos, neg) = self.geometry.incident_links(VertexId(v)).expect("vertex in lattice");
        let lz = |l: usize| {
            let o = self.layout.link_offset[l];
            (s[o] as f64 - s[o + 1] as f64) / 2.0
        };
        let rz = |l: usize| {
            let o = self.layout.link_offset[l];
            (s[o + 2] as f64 - s[o + 3] as f64) / 2.0
        };
        let mut g = pos.iter().map(|l| lz(l.0)).sum::<f64>() - neg.iter().map(|l| rz(l.0)).sum::<f64>();
        for fam in self.layout.families.values() {
            g -= (s[fam.mode(v, 0)] as f64 - s[fam.mode(v, 1)] as f64) / 2.0;
        }
        g
    }

    /// Target Gauss labels of the physical sector.
    pub fn default_gauss_targets(&self) -> Vec<f64> {
        let nv = self.geometry.n_vertices();
        match self.links {
            LinkOps::U1(_) => self.static_charges.iter().map(|&q| q as f64).collect(),
            LinkOps::Proxy(z) | LinkOps::Zn(z) => {
                self.static_charges.iter().map(|&q| q.rem_euclid(z.n as i64) as f64).collect()
            }
            LinkOps::Su2(..) => vec![0.0; nv],
        }
    }

    /// Action of `G_a(v)` for SU(2).
    fn su2_generator_action(&self, v: usize, a: usize, s: &[u8], out: &mut Images) {
        let LinkOps::Su2(su, _) = self.links else { return };
        let (pos, neg) = self.geometry.incident_links(VertexId(v)).expect("vertex in lattice");
        let mut link_term = |l: usize, side: Side, sign: f64| {
            let o = self.layout.link_offset[l];
            let occ = [s[o], s[o + 1], s[o + 2], s[o + 3]];
            for (n, amp) in su.apply_generator(side, a, occ) {
                let mut t = s.to_vec();
                t[o..o + 4].copy_from_slice(&n);
                out.push((t, amp * sign));
            }
        };
        for l in &pos {
            link_term(l.0, Side::Left, 1.0);
        }
        for l in &neg {
            link_term(l.0, Side::Right, -1.0);
        }
        let modes = self.modes_cache();
        for fam in self.layout.families.values() {
            for i in 0..2 {
                for j in 0..2 {
                    let t_ij = pauli(a, i, j) * 0.5;
                    if t_ij == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let mut t = s.to_vec();
                    if let Some(f) =
                        apply_string(modes, &mut t, &[(fam.mode(v, i), Ladder::Create), (fam.mode(v, j), Ladder::Annihilate)])
                    {
                        out.push((t, -t_ij * f));
                    }
                }
            }
        }
    }

    pub fn gauss_generator(&self, basis: &Arc<Basis>, v: usize) -> GaussGenerator {
        match self.links {
            LinkOps::U1(_) => GaussGenerator::Additive(vec![SparseOperator::diagonal(basis, |s| self.gauss_value(s, v))]),
            LinkOps::Proxy(z) => {
                let d = z.delta();
                GaussGenerator::Unitary(SparseOperator::from_action(basis, |s, out| {
                    let k = (self.divergence(s, v) - self.charge(s, v)) as f64;
                    out.push((s.to_vec(), C64::from_polar(1.0, d * k)));
                }))
            }
            LinkOps::Zn(z) => {
                let d = z.delta();
                GaussGenerator::Unitary(SparseOperator::from_action(basis, |s, out| {
                    let k = (self.divergence(s, v) + self.charge(s, v)) as f64;
                    out.push((s.to_vec(), C64::from_polar(1.0, -d * k)));
                }))
            }
            LinkOps::Su2(..) => GaussGenerator::Additive(
                (0..3)
                    .map(|a| SparseOperator::from_action(basis, |s, out| self.su2_generator_action(v, a, s, out)))
                    .collect(),
            ),
        }
    }

    /// `Σ_v Σ_a (G_a(v) − q_v)²` for additive theories, `Σ_v (2 − G − G†)` otherwise.
    pub fn gauss_penalty(&self, basis: &Arc<Basis>, kappa: f64) -> SparseOperator {
        let nv = self.geometry.n_vertices();
        match self.links {
            LinkOps::Su2(..) => {
                let mut acc = SparseOperator::zero(basis);
                for v in 0..nv {
                    if let GaussGenerator::Additive(cs) = self.gauss_generator(basis, v) {
                        for g in cs {
                            acc = acc.add(&g.mul(&g).expect("shared basis")).expect("shared basis");
                        }
                    }
                }
                acc.scale_real(kappa)
            }
            LinkOps::U1(_) => {
                let q = self.default_gauss_targets();
                SparseOperator::diagonal(basis, |s| {
                    kappa * (0..nv).map(|v| (self.gauss_value(s, v) - q[v]).powi(2)).sum::<f64>()
                })
            }
            LinkOps::Proxy(z) | LinkOps::Zn(z) => {
                let q = self.default_gauss_targets();
                SparseOperator::diagonal(basis, |s| {
                    kappa * (0..nv).map(|v| 2.0 - 2.0 * ((self.gauss_value(s, v) - q[v]) * z.delta()).cos()).sum::<f64>()
                })
            }
        }
    }

    /// Whether every diagonal Gauss label of `s` equals its target.
    pub fn in_gauss_sector(&self, s: &[u8], targets: &[f64]) -> bool {
        (0..self.geometry.n_vertices()).all(|v| (self.gauss_value(s, v) - targets[v]).abs() < 1e-9)
    }
}

pub fn gauss_generator(a: &ModelAssembly, v: usize) -> GaussGenerator {
    a.spec.gauss_generator(&a.basis, v)
}

/// Largest Gauss-law violation of `h` over all vertices.
pub fn gauss_defect(a: &ModelAssembly, h: &SparseOperator) -> f64 {
    (0..a.spec.geometry.n_vertices()).map(|v| gauss_generator(a, v).defect(h)).fold(0.0, f64::max)
}

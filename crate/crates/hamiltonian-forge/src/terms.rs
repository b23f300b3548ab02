use std::sync::Arc;

use fock_algebra::{apply_string, Basis, Ladder, SparseOperator, C64};
use gauge_links::LinkForm;
use lattice_core::VertexId;

use crate::model::{LinkOps, ModelSpec, Species};
use crate::{ForgeError, ModelAssembly};

pub type Images = Vec<(Vec<u8>, C64)>;

/// Direction of a single hop along a link `src → tgt`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HopDirection {
    /// Particle moves `tgt → src`; `ψ†_src U ψ_tgt`.
    TowardSource,
    /// Particle moves `src → tgt`; `ψ†_tgt U† ψ_src`.
    TowardTarget,
}

impl ModelSpec {
    /// Applies `U_{ij}` (or `(U†)_{ij}`) of link `l` to every image in place.
    fn apply_link(&self, l: usize, i: usize, j: usize, dagger: bool, form: LinkForm, images: Images) -> Images {
        let o = self.layout.link_offset[l];
        let mut out = Vec::with_capacity(images.len() * 2);
        for (mut s, a) in images {
            match self.links {
                LinkOps::U1(u) => {
                    let r = if dagger { u.lower(s[o]) } else { u.raise(s[o]) };
                    if let Some((n, amp)) = r {
                        s[o] = n;
                        out.push((s, a * amp / u.norm()));
                    }
                }
                LinkOps::Proxy(z) => {
                    s[o] = if dagger { z.q(s[o]) } else { z.q_dag(s[o]) };
                    out.push((s, a));
                }
                LinkOps::Zn(z) => {
                    s[o] = if dagger { z.q_dag(s[o]) } else { z.q(s[o]) };
                    out.push((s, a));
                }
                LinkOps::Su2(su, _) => {
                    let occ = [s[o], s[o + 1], s[o + 2], s[o + 3]];
                    for (n, amp) in su.apply_entry(i, j, form, dagger, occ) {
                        let mut t = s.clone();
                        t[o..o + 4].copy_from_slice(&n);
                        out.push((t, a * amp));
                    }
                }
            }
        }
        out
    }

    fn interaction_form(&self) -> LinkForm {
        match self.links {
            LinkOps::Su2(_, f) => f,
            _ => LinkForm::Unitary,
        }
    }

    /// Index-contracted product `Tr(M₁ M₂ ⋯)` of link matrices along a loop,
    /// where each factor is `U` or `U†` of a link.
    pub fn loop_trace(&self, factors: &[(usize, bool)], s: &[u8], out: &mut Images) {
        let c = self.layout.colours;
        let k = factors.len();
        let combos = c.pow(k as u32);
        for code in 0..combos {
            let idx: Vec<usize> = (0..k).map(|t| (code / c.pow(t as u32)) % c).collect();
            let mut images: Images = vec![(s.to_vec(), C64::new(1.0, 0.0))];
            // rightmost factor first; links are distinct so order only fixes indices
            for t in (0..k).rev() {
                let (l, dag) = factors[t];
                images = self.apply_link(l, idx[t], idx[(t + 1) % k], dag, LinkForm::Unitary, images);
                if images.is_empty() {
                    break;
                }
            }
            out.extend(images);
        }
    }

    /// `Σ_p (□_p + □_p†)` with `□ = Tr(U₁ U₂ U₃† U₄†)`.
    pub fn plaquette_action(&self, s: &[u8], out: &mut Images) {
        for p in &self.geometry.plaquettes {
            let fwd: Vec<(usize, bool)> = p.links.iter().map(|pl| (pl.link.0, pl.reversed)).collect();
            let back: Vec<(usize, bool)> = p.links.iter().rev().map(|pl| (pl.link.0, !pl.reversed)).collect();
            self.loop_trace(&fwd, s, out);
            self.loop_trace(&back, s, out);
        }
    }

    fn phase(&self, v: usize) -> i64 {
        self.geometry.vertices[v].coords.iter().sum::<usize>() as i64
    }

    /// `i^k`.
    fn i_pow(k: i64) -> C64 {
        match k.rem_euclid(4) {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    }

    /// One directed hop of `species` along link `l`, amplitude `coeff`.
    pub fn hop_action(&self, species: Species, l: usize, dir: HopDirection, coeff: f64, s: &[u8], out: &mut Images) {
        let Some(fam) = self.layout.family(species) else { return };
        let link = &self.geometry.links[l];
        let (src, tgt) = (link.source.0, link.target.0);
        let modes = self.modes_cache();
        let form = self.interaction_form();
        let c = self.layout.colours;
        let mut ph = C64::new(coeff, 0.0);
        if self.matter.phase_convention {
            let k = self.phase(src) - self.phase(tgt);
            ph *= Self::i_pow(match dir {
                HopDirection::TowardSource => k,
                HopDirection::TowardTarget => -k,
            });
        }
        for i in 0..c {
            for j in 0..c {
                let mut t = s.to_vec();
                // TowardSource: ψ†_{src,i} U_ij ψ_{tgt,j}; TowardTarget: ψ†_{tgt,j} (U†)_{ji} ψ_{src,i}
                let (cr, an, li, lj, dag) = match dir {
                    HopDirection::TowardSource => (fam.mode(src, i), fam.mode(tgt, j), i, j, false),
                    HopDirection::TowardTarget => (fam.mode(tgt, j), fam.mode(src, i), j, i, true),
                };
                let Some(fa) = apply_string(modes, &mut t, &[(cr, Ladder::Create), (an, Ladder::Annihilate)]) else {
                    continue;
                };
                let images = self.apply_link(l, li, lj, dag, form, vec![(t, ph * fa)]);
                out.extend(images);
            }
        }
    }

    /// `coeff Σ_l (ψ† U ψ + h.c.)` for every listed family.
    pub fn interaction_action(&self, species: &[Species], coeff: f64, s: &[u8], out: &mut Images) {
        for &sp in species {
            for l in 0..self.geometry.n_links() {
                self.hop_action(sp, l, HopDirection::TowardSource, coeff, s, out);
                self.hop_action(sp, l, HopDirection::TowardTarget, coeff, s, out);
            }
        }
    }

    /// Diagonal electric energy with coupling `μ`.
    pub fn electric_value(&self, s: &[u8], mu: f64) -> f64 {
        let nl = self.geometry.n_links();
        match self.links {
            LinkOps::U1(u) => (0..nl).map(|l| (u.m(s[l]) as f64).powi(2)).sum::<f64>() * mu,
            LinkOps::Proxy(z) => (0..nl).map(|l| (z.m(s[l]) as f64).powi(2)).sum::<f64>() * mu,
            LinkOps::Zn(z) => -mu * (0..nl).map(|l| (z.m(s[l]) as f64 * z.delta()).cos()).sum::<f64>(),
            LinkOps::Su2(su, _) => {
                use gauge_links::Side;
                let g = mu;
                (0..nl)
                    .map(|l| {
                        let o = self.layout.link_offset[l];
                        let occ = [s[o], s[o + 1], s[o + 2], s[o + 3]];
                        (g * su.casimir(Side::Left, occ) + g * su.casimir(Side::Right, occ)) / 2.0
                    })
                    .sum()
            }
        }
    }

    fn occupation(&self, species: Species, s: &[u8], v: usize) -> f64 {
        self.layout
            .family(species)
            .map_or(0.0, |f| (0..self.layout.colours).map(|k| s[f.mode(v, k)] as f64).sum())
    }

    /// `−λ Σ (F_ψ n_ψ + F_χ n_χ)`, or `λ Σ N_v(N_v − 1)` for vertex bosons.
    pub fn constraint_value(&self, s: &[u8], lambda: f64) -> f64 {
        let nv = self.geometry.n_vertices();
        if self.zn_aux() {
            return lambda * (0..nv).map(|v| { let n = self.occupation(Species::Psi, s, v); n * (n - 1.0) }).sum::<f64>();
        }
        -lambda
            * (0..nv)
                .map(|v| {
                    [Species::Psi, Species::Chi]
                        .iter()
                        .filter(|&&sp| self.is_special(sp, v))
                        .map(|&sp| self.occupation(sp, s, v))
                        .sum::<f64>()
                })
                .sum::<f64>()
    }

    /// `M Σ (−1)^n Ψ†Ψ`.
    pub fn mass_value(&self, s: &[u8], m: f64) -> f64 {
        (0..self.geometry.n_vertices())
            .map(|v| self.geometry.parity_sign(VertexId(v)) as f64 * self.occupation(Species::Dynamic, s, v))
            .sum::<f64>()
            * m
    }

    pub fn counterterm_value(&self, s: &[u8], c: f64) -> f64 {
        (0..self.geometry.n_vertices())
            .filter(|&v| self.special_vertex(v))
            .map(|v| self.occupation(Species::Dynamic, s, v))
            .sum::<f64>()
            * c
    }

    pub(crate) fn require(&self, species: &[Species]) -> Result<(), ForgeError> {
        for s in species {
            if self.layout.family(*s).is_none() {
                return Err(ForgeError::MissingFamily(*s));
            }
        }
        Ok(())
    }

    /// Families coupled by `H_int` by default.
    pub fn default_species(&self) -> Vec<Species> {
        if self.matter.auxiliary {
            self.layout.families.keys().copied().filter(|s| *s != Species::Dynamic).collect()
        } else {
            self.layout.families.keys().copied().collect()
        }
    }

    pub fn electric(&self, basis: &Arc<Basis>, mu: f64) -> SparseOperator {
        SparseOperator::diagonal(basis, |s| self.electric_value(s, mu))
    }

    pub fn plaquettes(&self, basis: &Arc<Basis>) -> SparseOperator {
        SparseOperator::from_action(basis, |s, out| self.plaquette_action(s, out))
    }

    /// Magnetic energy `−(1/g²) Σ (□ + h.c.)`; the clock group carries an extra ½.
    pub fn magnetic(&self, basis: &Arc<Basis>, g2: f64) -> SparseOperator {
        let half = if matches!(self.links, LinkOps::Zn(_)) { 0.5 } else { 1.0 };
        self.plaquettes(basis).scale_real(-half / g2)
    }

    pub fn interaction(&self, basis: &Arc<Basis>, eps: f64, species: &[Species]) -> Result<SparseOperator, ForgeError> {
        self.require(species)?;
        Ok(SparseOperator::from_action(basis, |s, out| self.interaction_action(species, eps, s, out)))
    }

    pub fn hop(&self, basis: &Arc<Basis>, species: Species, l: usize, dir: HopDirection) -> Result<SparseOperator, ForgeError> {
        self.require(&[species])?;
        Ok(SparseOperator::from_action(basis, |s, out| self.hop_action(species, l, dir, 1.0, s, out)))
    }

    pub fn mass(&self, basis: &Arc<Basis>, m: f64) -> SparseOperator {
        SparseOperator::diagonal(basis, |s| self.mass_value(s, m))
    }

    pub fn dirac(&self, basis: &Arc<Basis>, m: f64, gamma: f64, counterterm: f64) -> Result<SparseOperator, ForgeError> {
        self.require(&[Species::Dynamic])?;
        Ok(SparseOperator::from_action(basis, |s, out| {
            let d = self.mass_value(s, m) + self.counterterm_value(s, counterterm);
            if d != 0.0 {
                out.push((s.to_vec(), C64::new(d, 0.0)));
            }
            if gamma != 0.0 {
                self.interaction_action(&[Species::Dynamic], gamma, s, out);
            }
        }))
    }

    pub fn constraint(&self, basis: &Arc<Basis>, lambda: f64) -> SparseOperator {
        SparseOperator::diagonal(basis, |s| self.constraint_value(s, lambda))
    }
}

pub fn electric_hamiltonian(a: &ModelAssembly, mu: f64) -> SparseOperator {
    a.spec.electric(&a.basis, mu)
}

/// Magnetic energy; zero (with a recorded warning at assembly time) without plaquettes.
pub fn magnetic_hamiltonian(a: &ModelAssembly, g2: f64) -> SparseOperator {
    a.spec.magnetic(&a.basis, g2)
}

/// Unit-coefficient `Σ_p (□_p + □_p†)`.
pub fn plaquette_operator(a: &ModelAssembly) -> SparseOperator {
    a.spec.plaquettes(&a.basis)
}

pub fn link_interaction_hamiltonian(a: &ModelAssembly, eps: f64, species: &[Species]) -> Result<SparseOperator, ForgeError> {
    a.spec.interaction(&a.basis, eps, species)
}

pub fn directed_hop(a: &ModelAssembly, species: Species, link: usize, dir: HopDirection) -> Result<SparseOperator, ForgeError> {
    a.spec.hop(&a.basis, species, link, dir)
}

pub fn mass_hamiltonian(a: &ModelAssembly, m: f64) -> SparseOperator {
    a.spec.mass(&a.basis, m)
}

pub fn dirac_hamiltonian(a: &ModelAssembly, m: f64, gamma: f64, counterterm: f64) -> Result<SparseOperator, ForgeError> {
    a.spec.dirac(&a.basis, m, gamma, counterterm)
}

pub fn constraint_hamiltonian(a: &ModelAssembly, lambda: f64) -> SparseOperator {
    a.spec.constraint(&a.basis, lambda)
}

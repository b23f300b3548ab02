use std::collections::BTreeMap;
use std::sync::Arc;

use fock_algebra::{Attachment, Basis, Constraint, ModeSpec, SparseOperator};
use gauge_links::{LinkForm, Su2LinkSpace, U1LinkSpace, ZnLinkSpace};
use lattice_core::{LatticeGeometry, VertexId};
use serde::{Deserialize, Serialize};

use crate::{CouplingSet, ForgeError};

/// Gauge group and truncation of every link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "group", rename_all = "snake_case")]
pub enum Theory {
    /// Spin-ℓ truncated U(1).
    U1 { ell: u32 },
    /// Z_N clock link read as U(1) with `E := m` and a cyclic raising `U`.
    U1Proxy { n: u32 },
    Zn { n: u32 },
    /// `unitary` selects the normalized link in the interaction instead of the
    /// dressed `√(N+1)` form.
    Su2 {
        n_max: u32,
        #[serde(default)]
        unitary: bool,
    },
}

impl Theory {
    pub fn colours(&self) -> usize {
        match self {
            Theory::Su2 { .. } => 2,
            _ => 1,
        }
    }

    pub fn link_width(&self) -> usize {
        match self {
            Theory::Su2 { .. } => 4,
            _ => 1,
        }
    }

    /// Local link dimension (SU(2): the `N_L = N_R` sector).
    pub fn link_dim(&self) -> usize {
        match *self {
            Theory::U1 { ell } => 2 * ell as usize + 1,
            Theory::U1Proxy { n } | Theory::Zn { n } => n as usize,
            Theory::Su2 { n_max, .. } => (1..=n_max as usize + 1).map(|k| k * k).sum(),
        }
    }

    pub fn is_abelian_additive(&self) -> bool {
        matches!(self, Theory::U1 { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Species {
    /// Auxiliary family bound to ψ-special vertices (vertex bosons for Z_N).
    Psi,
    /// Auxiliary family bound to χ-special vertices.
    Chi,
    /// Dynamic staggered fermions.
    Dynamic,
}

/// Colour filling of the auxiliary fermions on their special vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuxFill {
    /// Every colour occupied.
    #[default]
    Pure,
    /// One fermion per special vertex.
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct MatterSpec {
    pub auxiliary: bool,
    pub dynamic: bool,
    pub aux_fill: AuxFill,
    /// Fixed dynamic fermion number; `None` keeps every filling.
    pub dynamic_filling: Option<usize>,
    /// Dynamic fermions pinned to these vertices with one fermion each and
    /// none elsewhere (static sources).
    pub static_sites: Option<Vec<usize>>,
    /// Canonical phase `ψ_n → (−i)^n ψ_n` on every family.
    pub phase_convention: bool,
}

/// Mode indices of one matter family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Family {
    /// First mode of each vertex; colours follow consecutively.
    pub base: Vec<usize>,
    pub bosonic: bool,
}

impl Family {
    pub fn mode(&self, v: usize, colour: usize) -> usize {
        self.base[v] + colour
    }
}

/// Mode layout: links first, then ψ, χ and Ψ families.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub link_offset: Vec<usize>,
    pub link_width: usize,
    pub colours: usize,
    pub families: BTreeMap<Species, Family>,
    pub n_modes: usize,
}

impl Layout {
    pub fn family(&self, s: Species) -> Option<&Family> {
        self.families.get(&s)
    }

    pub fn link_slice<'a>(&self, state: &'a [u8], l: usize) -> &'a [u8] {
        let o = self.link_offset[l];
        &state[o..o + self.link_width]
    }
}

/// Per-link gauge operator library.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinkOps {
    U1(U1LinkSpace),
    Proxy(ZnLinkSpace),
    Zn(ZnLinkSpace),
    Su2(Su2LinkSpace, LinkForm),
}

/// Geometry, theory, matter and mode layout; no basis attached.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub geometry: LatticeGeometry,
    pub theory: Theory,
    pub matter: MatterSpec,
    pub couplings: CouplingSet,
    pub layout: Layout,
    pub links: LinkOps,
    /// Static charges per vertex (U(1) Gauss sector offsets).
    pub static_charges: Vec<i64>,
    /// SU(2): the total `Σ N_L` over links is bounded by this budget.
    pub link_budget: Option<u32>,
    pub(crate) psi_special: Vec<bool>,
    pub(crate) chi_special: Vec<bool>,
    mode_list: Vec<ModeSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermKind {
    Electric,
    Magnetic,
    Interaction,
    Mass,
    Dirac,
    Constraint,
    GaussPenalty,
}

impl TermKind {
    pub fn label(&self) -> &'static str {
        match self {
            TermKind::Electric => "H_E",
            TermKind::Magnetic => "H_B",
            TermKind::Interaction => "H_int",
            TermKind::Mass => "H_M",
            TermKind::Dirac => "H_D",
            TermKind::Constraint => "H_C",
            TermKind::GaussPenalty => "H_G",
        }
    }
}

/// Everything `assemble_model` needs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelConfig {
    pub geometry: LatticeGeometry,
    pub theory: Theory,
    #[serde(default)]
    pub matter: MatterSpec,
    #[serde(default)]
    pub couplings: CouplingSet,
    /// Terms to build; empty selects the defaults for the matter content.
    #[serde(default)]
    pub terms: Vec<TermKind>,
    #[serde(default)]
    pub static_charges: Vec<i64>,
    #[serde(default)]
    pub link_budget: Option<u32>,
    /// Strength of the `Σ G²` penalty when `GaussPenalty` is requested.
    #[serde(default)]
    pub penalty: f64,
    #[serde(default = "default_dim_cap")]
    pub dim_cap: usize,
}

fn default_dim_cap() -> usize {
    4_000_000
}

impl ModelConfig {
    pub fn new(geometry: LatticeGeometry, theory: Theory) -> Self {
        Self {
            geometry,
            theory,
            matter: MatterSpec::default(),
            couplings: CouplingSet::default(),
            terms: Vec::new(),
            static_charges: Vec::new(),
            link_budget: None,
            penalty: 0.0,
            dim_cap: default_dim_cap(),
        }
    }

    pub fn with_matter(mut self, matter: MatterSpec) -> Self {
        self.matter = matter;
        self
    }

    pub fn with_couplings(mut self, c: CouplingSet) -> Self {
        self.couplings = c;
        self
    }

    pub fn with_terms(mut self, t: &[TermKind]) -> Self {
        self.terms = t.to_vec();
        self
    }

    /// Terms actually built.
    pub fn effective_terms(&self) -> Vec<TermKind> {
        if !self.terms.is_empty() {
            return self.terms.clone();
        }
        let two_d = self.geometry.spatial_dim == 2;
        match (self.matter.auxiliary, self.matter.dynamic) {
            (true, _) => vec![TermKind::Electric, TermKind::Interaction, TermKind::Constraint],
            (false, true) if two_d => vec![TermKind::Electric, TermKind::Magnetic, TermKind::Dirac],
            (false, true) => vec![TermKind::Electric, TermKind::Mass, TermKind::Interaction],
            (false, false) if two_d => vec![TermKind::Electric, TermKind::Magnetic],
            (false, false) => vec![TermKind::Electric],
        }
    }
}

/// Dimension estimate before allocation (no Gauss restriction).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimEstimate {
    pub bosonic: u128,
    pub fermionic: u128,
    pub total: u128,
}

fn binom(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

impl ModelSpec {
    pub fn new(cfg: &ModelConfig) -> Result<Self, ForgeError> {
        let geometry = cfg.geometry.clone();
        let theory = cfg.theory;
        let matter = cfg.matter.clone();
        let links = match theory {
            Theory::U1 { ell } => LinkOps::U1(gauge_links::u1_link(ell)?),
            Theory::U1Proxy { n } => LinkOps::Proxy(gauge_links::zn_link(n)?),
            Theory::Zn { n } => LinkOps::Zn(gauge_links::zn_link(n)?),
            Theory::Su2 { n_max, unitary } => LinkOps::Su2(
                gauge_links::su2_link(n_max)?,
                if unitary { LinkForm::Unitary } else { LinkForm::Dressed },
            ),
        };
        let nv = geometry.n_vertices();
        let classes: Vec<_> = (0..nv).map(|v| geometry.vertex_class(VertexId(v))).collect();
        let psi_special: Vec<bool> = classes.iter().map(|c| c.psi_special).collect();
        let chi_special: Vec<bool> = classes.iter().map(|c| c.chi_special).collect();
        if matter.auxiliary && geometry.spatial_dim != 2 {
            return Err(ForgeError::Invalid("auxiliary matter needs a 2D lattice".into()));
        }
        if matter.static_sites.is_some() && !matter.dynamic {
            return Err(ForgeError::Invalid("static sites require the dynamic family".into()));
        }
        if let Some(sites) = &matter.static_sites {
            if let Some(&v) = sites.iter().find(|&&v| v >= nv) {
                return Err(ForgeError::Invalid(format!("static site {v} outside lattice")));
            }
        }
        let static_charges = if cfg.static_charges.is_empty() {
            vec![0; nv]
        } else if cfg.static_charges.len() == nv {
            cfg.static_charges.clone()
        } else {
            return Err(ForgeError::Invalid(format!(
                "{} static charges for {nv} vertices",
                cfg.static_charges.len()
            )));
        };

        let width = theory.link_width();
        let colours = theory.colours();
        let link_offset: Vec<usize> = (0..geometry.n_links()).map(|l| l * width).collect();
        let mut next = geometry.n_links() * width;
        let mut families = BTreeMap::new();
        let mut add = |s: Species, bosonic: bool, next: &mut usize| {
            let base: Vec<usize> = (0..nv).map(|v| *next + v * colours).collect();
            *next += nv * colours;
            families.insert(s, Family { base, bosonic });
        };
        if matter.auxiliary {
            if matches!(theory, Theory::Zn { .. }) {
                add(Species::Psi, true, &mut next);
            } else {
                add(Species::Psi, false, &mut next);
                add(Species::Chi, false, &mut next);
            }
        }
        if matter.dynamic {
            add(Species::Dynamic, false, &mut next);
        }
        let layout = Layout { link_offset, link_width: width, colours, families, n_modes: next };
        let mut spec = Self {
            geometry,
            theory,
            matter,
            couplings: cfg.couplings.clone().resolved(),
            layout,
            links,
            static_charges,
            link_budget: cfg.link_budget,
            psi_special,
            chi_special,
            mode_list: Vec::new(),
        };
        spec.mode_list = spec.build_modes();
        Ok(spec)
    }

    pub fn modes(&self) -> Vec<ModeSpec> {
        self.mode_list.clone()
    }

    pub(crate) fn modes_cache(&self) -> &[ModeSpec] {
        &self.mode_list
    }

    pub fn is_special(&self, s: Species, v: usize) -> bool {
        match s {
            Species::Psi => self.psi_special[v],
            Species::Chi => self.chi_special[v],
            Species::Dynamic => false,
        }
    }

    /// Counter-term vertices of the Dirac Hamiltonian.
    pub fn special_vertex(&self, v: usize) -> bool {
        self.psi_special[v] || self.chi_special[v]
    }

    pub fn zn_aux(&self) -> bool {
        self.layout.family(Species::Psi).is_some_and(|f| f.bosonic)
    }

    fn build_modes(&self) -> Vec<ModeSpec> {
        let mut modes = Vec::with_capacity(self.layout.n_modes);
        for l in 0..self.geometry.n_links() {
            match self.links {
                LinkOps::U1(u) => modes.push(u.mode_spec(format!("E{l}"), l)),
                LinkOps::Proxy(z) | LinkOps::Zn(z) => modes.push(z.mode_spec(format!("m{l}"), l)),
                LinkOps::Su2(s, _) => modes.extend(s.mode_specs(l)),
            }
        }
        let nv = self.geometry.n_vertices();
        for (s, fam) in &self.layout.families {
            let tag = match s {
                Species::Psi => "psi",
                Species::Chi => "chi",
                Species::Dynamic => "Psi",
            };
            for v in 0..nv {
                for c in 0..self.layout.colours {
                    let name = if self.layout.colours > 1 { format!("{tag}{v}_{c}") } else { format!("{tag}{v}") };
                    if fam.bosonic {
                        modes.push(ModeSpec::boson(name, nv.min(255) as u8, Attachment::Vertex(v)));
                    } else {
                        modes.push(ModeSpec::fermion(name, Attachment::Vertex(v)));
                    }
                }
            }
        }
        modes
    }

    /// Number of auxiliary particles of species `s` in the ground manifold.
    pub fn aux_count(&self, s: Species) -> usize {
        let nv = self.geometry.n_vertices();
        if self.zn_aux() {
            return nv;
        }
        let per = match self.matter.aux_fill {
            AuxFill::Pure => self.layout.colours,
            AuxFill::Mixed => 1,
        };
        (0..nv).filter(|&v| self.is_special(s, v)).count() * per
    }

    pub fn constraints(&self) -> Vec<Constraint> {
        let mut out = Vec::new();
        let c = self.layout.colours;
        let nv = self.geometry.n_vertices();
        if let LinkOps::Su2(su, _) = self.links {
            for &o in &self.layout.link_offset {
                out.push(Constraint::balance(&[o, o + 1], &[o + 2, o + 3]));
                out.push(Constraint::at_most([o, o + 1], su.n_max as i64));
            }
            if let Some(b) = self.link_budget {
                out.push(Constraint::at_most(self.layout.link_offset.iter().flat_map(|&o| [o, o + 1]), b as i64));
            }
        }
        for s in [Species::Psi, Species::Chi] {
            if let Some(f) = self.layout.family(s) {
                let modes: Vec<usize> = (0..nv).flat_map(|v| (0..c).map(move |k| (v, k))).map(|(v, k)| f.mode(v, k)).collect();
                out.push(Constraint::total(modes, self.aux_count(s) as i64));
            }
        }
        if let Some(f) = self.layout.family(Species::Dynamic) {
            if let Some(sites) = &self.matter.static_sites {
                for v in 0..nv {
                    let want = sites.iter().filter(|&&x| x == v).count() as i64;
                    out.push(Constraint::total((0..c).map(|k| f.mode(v, k)), want));
                }
            } else if let Some(n) = self.matter.dynamic_filling {
                let modes: Vec<usize> = (0..nv).flat_map(|v| (0..c).map(move |k| (v, k))).map(|(v, k)| f.mode(v, k)).collect();
                out.push(Constraint::total(modes, n as i64));
            }
        }
        out
    }

    /// SU(2) per-link left boson number.
    pub fn su2_link_n(&self, state: &[u8], l: usize) -> u32 {
        let o = self.layout.link_offset[l];
        (state[o] + state[o + 1]) as u32
    }

    pub fn within_budget(&self, state: &[u8]) -> bool {
        match (self.links, self.link_budget) {
            (LinkOps::Su2(..), Some(b)) => {
                (0..self.geometry.n_links()).map(|l| self.su2_link_n(state, l)).sum::<u32>() <= b
            }
            _ => true,
        }
    }

    /// Dimension of the full product basis before any Gauss restriction.
    pub fn estimate_dims(&self) -> DimEstimate {
        let nl = self.geometry.n_links() as u32;
        let bosonic = match (self.links, self.link_budget) {
            (LinkOps::Su2(su, _), Some(b)) => {
                // count[t]: link configurations with Σ N_L = t
                let mut count = vec![0u128; b as usize + 1];
                count[0] = 1;
                for _ in 0..nl {
                    let mut next = vec![0u128; count.len()];
                    for (t, &c) in count.iter().enumerate() {
                        for n in 0..=su.n_max as usize {
                            if t + n < next.len() {
                                next[t + n] += c * ((n + 1) * (n + 1)) as u128;
                            }
                        }
                    }
                    count = next;
                }
                count.iter().sum()
            }
            _ => (self.theory.link_dim() as u128).pow(nl),
        };
        let nv = self.geometry.n_vertices() as u128;
        let c = self.layout.colours as u128;
        let mut fermionic: u128 = 1;
        if self.zn_aux() {
            fermionic *= binom(2 * nv - 1, nv - 1);
        } else {
            for s in [Species::Psi, Species::Chi] {
                if self.layout.family(s).is_some() {
                    fermionic *= binom(nv * c, self.aux_count(s) as u128);
                }
            }
        }
        if self.layout.family(Species::Dynamic).is_some() {
            fermionic *= if self.matter.static_sites.is_some() {
                c.pow(self.matter.static_sites.as_ref().map_or(0, |s| s.len()) as u32)
            } else if let Some(n) = self.matter.dynamic_filling {
                binom(nv * c, n as u128)
            } else {
                1u128 << (nv * c)
            };
        }
        DimEstimate { bosonic, fermionic, total: bosonic.saturating_mul(fermionic) }
    }

    pub fn enumerate_basis(&self, dim_cap: usize) -> Result<Arc<Basis>, ForgeError> {
        Ok(Basis::enumerate(self.modes(), &self.constraints(), dim_cap)?)
    }
}

/// A model with its shared basis and named terms.
#[derive(Debug, Clone)]
pub struct ModelAssembly {
    pub spec: ModelSpec,
    pub basis: Arc<Basis>,
    pub terms: Vec<(TermKind, SparseOperator)>,
    pub warnings: Vec<String>,
    pub penalty: f64,
}

impl ModelAssembly {
    pub fn term(&self, kind: TermKind) -> Option<&SparseOperator> {
        self.terms.iter().find(|(k, _)| *k == kind).map(|(_, o)| o)
    }

    pub fn term_names(&self) -> Vec<&'static str> {
        self.terms.iter().map(|(k, _)| k.label()).collect()
    }

    /// Sum of every named term.
    pub fn total(&self) -> SparseOperator {
        self.terms
            .iter()
            .fold(SparseOperator::zero(&self.basis), |acc, (_, o)| acc.add(o).expect("shared basis"))
    }

    pub fn geometry(&self) -> &LatticeGeometry {
        &self.spec.geometry
    }
}

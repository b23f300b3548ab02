use std::collections::{HashSet, VecDeque};
use std::sync::Arc;

use fock_algebra::{Basis, SparseOperator, C64};
use hamiltonian_forge::{AuxFill, LinkOps, ModelSpec, Species};

use crate::SeriesError;

/// `H₀ = H_C` on a working basis with its ground manifold.
#[derive(Debug, Clone)]
pub struct PerturbationSplit {
    pub basis: Arc<Basis>,
    /// `E_C(α) − E_C(0)` per basis state.
    pub h0: Vec<f64>,
    /// Constraint energy of the ground manifold, removed from `h0`.
    pub shift: f64,
    pub m0: Vec<bool>,
    /// `H₁ = H_E + H_int`.
    pub h1: SparseOperator,
    pub resolvent: SparseOperator,
}

/// Diagonal resolvent `K = Σ_{α∉M₀} |α⟩⟨α| / (E_C(α) − E_C(0))` with its
/// ground-manifold mask.
pub fn resolvent_from_energies(
    basis: &Arc<Basis>,
    energies: &[f64],
    gap_tol: f64,
) -> Result<(SparseOperator, Vec<bool>, f64), SeriesError> {
    let e0 = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let mut mask = Vec::with_capacity(energies.len());
    let mut trip = Vec::new();
    for (i, &e) in energies.iter().enumerate() {
        let gap = e - e0;
        if gap.abs() <= 1e-12 * e0.abs().max(1.0) {
            mask.push(true);
        } else if gap <= gap_tol {
            return Err(SeriesError::DegenerateGap { state: i, gap });
        } else {
            mask.push(false);
            trip.push((i, i, C64::new(1.0 / gap, 0.0)));
        }
    }
    Ok((SparseOperator::from_triplets(basis, trip), mask, e0))
}

/// Resolvent of the constraint term on any basis of `spec`.
pub fn build_resolvent(spec: &ModelSpec, basis: &Arc<Basis>, gap_tol: f64) -> Result<SparseOperator, SeriesError> {
    let lambda = spec.couplings.lambda;
    if lambda <= 0.0 {
        return Err(SeriesError::Invalid("λ must be positive".into()));
    }
    let e: Vec<f64> = basis.states().map(|s| spec.constraint_value(s, lambda)).collect();
    Ok(resolvent_from_energies(basis, &e, gap_tol)?.0)
}

/// Matter occupations of every ground-manifold configuration.
pub fn matter_configs(spec: &ModelSpec) -> Result<Vec<Vec<(usize, u8)>>, SeriesError> {
    if !spec.matter.auxiliary {
        return Err(SeriesError::NotLoopMethod);
    }
    let nv = spec.geometry.n_vertices();
    let c = spec.layout.colours;
    let mut configs: Vec<Vec<(usize, u8)>> = vec![Vec::new()];
    for (sp, fam) in &spec.layout.families {
        let options: Vec<Vec<(usize, u8)>> = match sp {
            Species::Dynamic => return Err(SeriesError::NotLoopMethod),
            _ if fam.bosonic => vec![(0..nv).map(|v| (fam.mode(v, 0), 1)).collect()],
            _ => {
                let special: Vec<usize> = (0..nv).filter(|&v| spec.is_special(*sp, v)).collect();
                match spec.matter.aux_fill {
                    AuxFill::Pure => vec![special.iter().flat_map(|&v| (0..c).map(move |k| (fam.mode(v, k), 1))).collect()],
                    AuxFill::Mixed => {
                        let mut opts: Vec<Vec<(usize, u8)>> = vec![Vec::new()];
                        for &v in &special {
                            opts = opts
                                .into_iter()
                                .flat_map(|o| {
                                    (0..c).map(move |k| {
                                        let mut o = o.clone();
                                        o.push((fam.mode(v, k), 1));
                                        o
                                    })
                                })
                                .collect();
                        }
                        opts
                    }
                }
            }
        };
        configs = configs
            .into_iter()
            .flat_map(|base| {
                options.iter().map(move |o| {
                    let mut b = base.clone();
                    b.extend_from_slice(o);
                    b
                })
            })
            .collect();
    }
    Ok(configs)
}

/// Zero-flux link occupations.
pub fn link_vacuum(spec: &ModelSpec) -> Vec<u8> {
    let mut s = vec![0u8; spec.layout.n_modes];
    for l in 0..spec.geometry.n_links() {
        let o = spec.layout.link_offset[l];
        match spec.links {
            LinkOps::U1(u) => s[o] = u.ell as u8,
            LinkOps::Proxy(z) | LinkOps::Zn(z) => s[o] = z.zero(),
            LinkOps::Su2(..) => {}
        }
    }
    s
}

/// Largest flux on any link: `|m|` for abelian links, `N_L` for SU(2).
pub fn max_link_flux(spec: &ModelSpec, s: &[u8]) -> u32 {
    (0..spec.geometry.n_links())
        .map(|l| {
            let o = spec.layout.link_offset[l];
            match spec.links {
                LinkOps::U1(u) => u.m(s[o]).unsigned_abs() as u32,
                LinkOps::Proxy(z) | LinkOps::Zn(z) => z.m(s[o]).unsigned_abs() as u32,
                LinkOps::Su2(..) => spec.su2_link_n(s, l),
            }
        })
        .max()
        .unwrap_or(0)
}

fn admissible(spec: &ModelSpec, s: &[u8]) -> bool {
    spec.constraints().iter().all(|c| c.holds(s))
}

/// Ground-manifold seeds: link states reached from the vacuum by plaquette
/// moves (flux at most `link_cap` per link), times every matter configuration.
pub fn ground_seeds(spec: &ModelSpec, link_cap: Option<u32>) -> Result<Vec<Vec<u8>>, SeriesError> {
    let configs = matter_configs(spec)?;
    let vac = link_vacuum(spec);
    let n_link_modes = spec.geometry.n_links() * spec.layout.link_width;
    let mut seen: HashSet<Vec<u8>> = HashSet::from([vac.clone()]);
    let mut queue = VecDeque::from([vac]);
    let mut out = Vec::new();
    while let Some(s) = queue.pop_front() {
        out.clear();
        spec.plaquette_action(&s, &mut out);
        for (t, a) in out.drain(..) {
            if a.norm() < 1e-14 || link_cap.is_some_and(|c| max_link_flux(spec, &t) > c) {
                continue;
            }
            if seen.insert(t.clone()) {
                queue.push_back(t);
            }
        }
    }
    let mut links: Vec<Vec<u8>> = seen.into_iter().collect();
    links.sort();
    let mut seeds = Vec::with_capacity(links.len() * configs.len());
    for l in &links {
        for cfg in &configs {
            let mut s = l[..n_link_modes].to_vec();
            s.resize(spec.layout.n_modes, 0);
            for &(m, v) in cfg {
                s[m] = v;
            }
            if admissible(spec, &s) {
                seeds.push(s);
            }
        }
    }
    if seeds.is_empty() {
        return Err(SeriesError::EmptySector);
    }
    Ok(seeds)
}

/// States reachable from `seeds` by at most `depth` applications of `H_int`
/// (`None` closes under the full Hamiltonian including plaquettes).
pub fn working_basis(
    spec: &ModelSpec,
    seeds: &[Vec<u8>],
    depth: Option<usize>,
    with_plaquettes: bool,
    dim_cap: usize,
) -> Result<Arc<Basis>, SeriesError> {
    let species = spec.default_species();
    let (b, _) = Basis::reachable(spec.modes(), seeds, depth, dim_cap, |s, out| {
        let mut imgs = Vec::new();
        spec.interaction_action(&species, 1.0, s, &mut imgs);
        if with_plaquettes {
            spec.plaquette_action(s, &mut imgs);
        }
        out.extend(imgs.into_iter().filter(|(t, a)| a.norm() > 1e-14 && admissible(spec, t)).map(|(t, _)| t));
    })?;
    Ok(b)
}

impl PerturbationSplit {
    pub fn new(spec: &ModelSpec, basis: &Arc<Basis>, gap_tol: f64) -> Result<Self, SeriesError> {
        let c = &spec.couplings;
        if c.lambda <= 0.0 {
            return Err(SeriesError::Invalid("λ must be positive".into()));
        }
        let raw: Vec<f64> = basis.states().map(|s| spec.constraint_value(s, c.lambda)).collect();
        let (resolvent, m0, shift) = resolvent_from_energies(basis, &raw, gap_tol)?;
        let h0 = raw.iter().map(|e| e - shift).collect();
        let h1 = spec.electric(basis, c.mu).add(&spec.interaction(basis, c.eps, &spec.default_species())?)?;
        Ok(Self { basis: basis.clone(), h0, shift, m0, h1, resolvent })
    }
}

use std::sync::Arc;

use fock_algebra::{Basis, SparseOperator, C64};
use hamiltonian_forge::*;
use lattice_core::{chain, single_plaquette, Boundary, LatticeGeometry, VertexId};
use proptest::prelude::*;

fn eigvals(op: &SparseOperator) -> Vec<f64> {
    let n = op.dim();
    let d = op.to_dense();
    let m = faer::Mat::from_fn(n, n, |i, j| faer::c64::new(d[i * n + j].re, d[i * n + j].im));
    let mut w: Vec<f64> = m.self_adjoint_eigenvalues(faer::Side::Lower).unwrap();
    w.sort_by(f64::total_cmp);
    w
}

fn eig(op: &SparseOperator) -> (Vec<f64>, Vec<Vec<C64>>) {
    let n = op.dim();
    let d = op.to_dense();
    let m = faer::Mat::from_fn(n, n, |i, j| faer::c64::new(d[i * n + j].re, d[i * n + j].im));
    let e = m.self_adjoint_eigen(faer::Side::Lower).unwrap();
    let vals = (0..n).map(|k| e.S()[k].re).collect();
    let vecs = (0..n).map(|k| (0..n).map(|i| { let z = e.U()[(i, k)]; C64::new(z.re, z.im) }).collect()).collect();
    (vals, vecs)
}

fn assemble(cfg: ModelConfig) -> ModelAssembly {
    assemble_model(&cfg).expect("model assembles")
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

fn dynamic() -> MatterSpec {
    MatterSpec { dynamic: true, ..Default::default() }
}

fn auxiliary(fill: AuxFill) -> MatterSpec {
    MatterSpec { auxiliary: true, aux_fill: fill, ..Default::default() }
}

fn state_index(b: &Arc<Basis>, pred: impl Fn(&[u8]) -> bool) -> usize {
    (0..b.dim()).find(|&i| pred(b.state(i))).expect("state present")
}

fn column(op: &SparseOperator, j: usize) -> Vec<(usize, C64)> {
    op.iter().filter(|&(_, c, v)| c == j && v.norm() > 1e-14).map(|(r, _, v)| (r, v)).collect()
}

#[test]
fn electric_spectra() {
    let a = assemble(ModelConfig::new(chain(2).unwrap(), Theory::U1 { ell: 1 }).with_couplings(CouplingSet::from_g2(2.0)));
    assert!(close(&eigvals(&electric_hamiltonian(&a, a.spec.couplings.mu)), &[0.0, 1.0, 1.0], 1e-12));

    let a = assemble(ModelConfig::new(chain(2).unwrap(), Theory::Zn { n: 3 }));
    assert!(close(&eigvals(&electric_hamiltonian(&a, 1.0)), &[-1.0, 0.5, 0.5], 1e-12));

    let a = assemble(ModelConfig::new(chain(2).unwrap(), Theory::Su2 { n_max: 2, unitary: false }).with_couplings(CouplingSet::from_g2(2.0)));
    let h = electric_hamiltonian(&a, a.spec.couplings.mu);
    let diag = h.diagonal_values();
    let half: Vec<f64> = (0..a.basis.dim()).filter(|&i| a.spec.su2_link_n(a.basis.state(i), 0) == 1).map(|i| diag[i].re).collect();
    assert_eq!(half.len(), 4);
    assert!(half.iter().all(|e| (e - 0.75).abs() < 1e-12));
}

#[test]
fn z2_plaquette_is_a_flip_product() {
    let a = assemble(ModelConfig::new(single_plaquette(), Theory::Zn { n: 2 }).with_terms(&[TermKind::Magnetic]));
    assert_eq!(a.basis.dim(), 16);
    let w = eigvals(&magnetic_hamiltonian(&a, 1.0));
    assert!(w[..8].iter().all(|x| (x + 1.0).abs() < 1e-12));
    assert!(w[8..].iter().all(|x| (x - 1.0).abs() < 1e-12));
}

#[test]
fn u1_plaquette_on_zero_flux_has_two_images() {
    let g2 = 1.7;
    let a = assemble(ModelConfig::new(single_plaquette(), Theory::U1 { ell: 1 }).with_couplings(CouplingSet::from_g2(g2)));
    let h = magnetic_hamiltonian(&a, g2);
    let vac = state_index(&a.basis, |s| s.iter().all(|&n| n == 1));
    let col = column(&h, vac);
    assert_eq!(col.len(), 2);
    for (r, v) in &col {
        assert!((v - C64::new(-1.0 / g2, 0.0)).norm() < 1e-12);
        assert!(a.basis.state(*r).iter().all(|&n| n != 1), "every link carries one flux unit");
    }
    let (s1, s2) = (a.basis.state(col[0].0), a.basis.state(col[1].0));
    assert!(s1.iter().zip(s2).all(|(x, y)| x + y == 2), "opposite circulations");
}

#[test]
fn su2_plaquette_from_singlet_reaches_all_half_links() {
    let mut cfg = ModelConfig::new(single_plaquette(), Theory::Su2 { n_max: 2, unitary: true });
    cfg.link_budget = Some(4);
    let a = assemble(cfg);
    let p = plaquette_operator(&a);
    let vac = state_index(&a.basis, |s| s.iter().all(|&n| n == 0));
    let col = column(&p, vac);
    assert!(!col.is_empty());
    for (r, _) in col {
        let s = a.basis.state(r);
        assert!((0..4).all(|l| a.spec.su2_link_n(s, l) == 1));
    }
}

#[test]
fn u1_hop_raises_flux_with_unit_element() {
    let eps = 0.3;
    let mut m = dynamic();
    m.dynamic_filling = Some(1);
    let a = assemble(
        ModelConfig::new(chain(2).unwrap(), Theory::U1 { ell: 1 })
            .with_matter(m)
            .with_couplings(CouplingSet { eps, ..Default::default() }),
    );
    let h = link_interaction_hamiltonian(&a, eps, &[Species::Dynamic]).unwrap();
    let f = a.spec.layout.family(Species::Dynamic).unwrap().clone();
    let start = state_index(&a.basis, |s| s[0] == 1 && s[f.mode(1, 0)] == 1);
    let col = column(&h, start);
    assert_eq!(col.len(), 1);
    let (r, v) = col[0];
    let s = a.basis.state(r);
    assert_eq!(s[0], 2, "m = +1");
    assert_eq!(s[f.mode(0, 0)], 1);
    assert!((v - C64::new(eps, 0.0)).norm() < 1e-14);
}

#[test]
fn missing_family_is_rejected() {
    let a = assemble(ModelConfig::new(chain(3).unwrap(), Theory::U1 { ell: 1 }).with_matter(dynamic()));
    assert!(matches!(link_interaction_hamiltonian(&a, 1.0, &[Species::Psi]), Err(ForgeError::MissingFamily(Species::Psi))));
    let a = assemble(ModelConfig::new(chain(3).unwrap(), Theory::U1 { ell: 1 }));
    assert!(dirac_hamiltonian(&a, 1.0, 0.0, 0.0).is_err());
}

fn zn3_loop() -> ModelAssembly {
    assemble(
        ModelConfig::new(single_plaquette(), Theory::Zn { n: 3 })
            .with_matter(auxiliary(AuxFill::Pure))
            .with_couplings(CouplingSet { eps: 0.2, lambda: 3.0, ..Default::default() }),
    )
}

#[test]
fn zn_boson_hops_conserve_boson_number_and_are_unitary() {
    let a = zn3_loop();
    let f = a.spec.layout.family(Species::Psi).unwrap().clone();
    let total = |s: &[u8]| (0..4).map(|v| s[f.mode(v, 0)] as usize).sum::<usize>();
    let m0: Vec<usize> = (0..a.basis.dim()).filter(|&i| (0..4).all(|v| a.basis.state(i)[f.mode(v, 0)] == 1)).collect();
    assert!(!m0.is_empty());
    for &j in &m0 {
        let mut out = Vec::new();
        a.spec.interaction_action(&[Species::Psi], 1.0, a.basis.state(j), &mut out);
        assert!(out.iter().all(|(s, _)| total(s) == 4));
    }
    for l in 0..4 {
        for (d1, d2) in [(HopDirection::TowardSource, HopDirection::TowardTarget), (HopDirection::TowardTarget, HopDirection::TowardSource)] {
            let there = directed_hop(&a, Species::Psi, l, d1).unwrap();
            let back = directed_hop(&a, Species::Psi, l, d2).unwrap();
            let round = back.mul(&there).unwrap();
            for &j in &m0 {
                let col = column(&round, j);
                assert_eq!(col.len(), 1);
                assert_eq!(col[0].0, j);
            }
        }
    }
}

#[test]
fn mass_and_dirac_examples() {
    let mut m = dynamic();
    m.dynamic_filling = Some(1);
    let a = assemble(ModelConfig::new(chain(2).unwrap(), Theory::U1 { ell: 1 }).with_matter(m));
    let h = mass_hamiltonian(&a, 1.0);
    let f = a.spec.layout.family(Species::Dynamic).unwrap().clone();
    for (v, e) in [(0, 1.0), (1, -1.0)] {
        let i = state_index(&a.basis, |s| s[f.mode(v, 0)] == 1);
        assert_eq!(h.get(i, i).re, e);
    }

    let a = assemble(ModelConfig::new(chain(4).unwrap(), Theory::U1 { ell: 1 }).with_matter(dynamic()));
    let f = a.spec.layout.family(Species::Dynamic).unwrap().clone();
    let m = 0.7;
    let h = mass_hamiltonian(&a, m);
    let sea = state_index(&a.basis, |s| (0..4).all(|v| s[f.mode(v, 0)] == (v % 2) as u8));
    assert!((h.get(sea, sea).re + 2.0 * m).abs() < 1e-14);
    let charge: i64 = (0..4).map(|v| a.spec.charge(a.basis.state(sea), v)).sum();
    assert_eq!(charge, 0);
    assert!(dirac_hamiltonian(&a, m, 0.0, 0.0).unwrap().max_abs_diff(&h).unwrap() < 1e-15);
}

#[test]
fn constraint_examples() {
    let lambda = 2.5;
    let a = assemble(
        ModelConfig::new(single_plaquette(), Theory::U1 { ell: 1 })
            .with_matter(auxiliary(AuxFill::Pure))
            .with_couplings(CouplingSet { lambda, ..Default::default() }),
    );
    let h = constraint_hamiltonian(&a, lambda);
    let psi = a.spec.layout.family(Species::Psi).unwrap().clone();
    let chi = a.spec.layout.family(Species::Chi).unwrap().clone();
    let home = state_index(&a.basis, |s| s[psi.mode(0, 0)] == 1 && s[chi.mode(3, 0)] == 1);
    let moved = state_index(&a.basis, |s| s[psi.mode(1, 0)] == 1 && s[chi.mode(3, 0)] == 1);
    assert!((h.get(home, home).re + 2.0 * lambda).abs() < 1e-14);
    assert!((h.get(moved, moved).re + lambda).abs() < 1e-14);

    let a = zn3_loop();
    let h = constraint_hamiltonian(&a, lambda);
    let f = a.spec.layout.family(Species::Psi).unwrap().clone();
    let pair = state_index(&a.basis, |s| s[f.mode(0, 0)] == 2 && s[f.mode(1, 0)] == 0 && s[f.mode(2, 0)] == 1);
    assert!((h.get(pair, pair).re - 2.0 * lambda).abs() < 1e-14);
}

#[test]
fn gauss_examples() {
    let a = assemble(ModelConfig::new(single_plaquette(), Theory::U1 { ell: 1 }));
    let vac = state_index(&a.basis, |s| s.iter().all(|&n| n == 1));
    assert!((0..4).all(|v| a.spec.gauss_value(a.basis.state(vac), v) == 0.0));

    let a = assemble(ModelConfig::new(single_plaquette(), Theory::Su2 { n_max: 2, unitary: true }).with_terms(&[TermKind::Electric]));
    let vac = state_index(&a.basis, |s| s.iter().all(|&n| n == 0));
    for v in 0..4 {
        let GaussGenerator::Additive(cs) = gauss_generator(&a, v) else { panic!("additive") };
        for g in cs {
            assert!(column(&g, vac).is_empty());
        }
    }

    let a = assemble(ModelConfig::new(single_plaquette(), Theory::Zn { n: 3 }));
    let vac = state_index(&a.basis, |s| s.iter().all(|&n| n == 1));
    for v in 0..4 {
        let GaussGenerator::Unitary(g) = gauss_generator(&a, v) else { panic!("unitary") };
        assert!((g.get(vac, vac) - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    let a = assemble(ModelConfig::new(chain(4).unwrap(), Theory::U1 { ell: 1 }).with_matter(dynamic()));
    let f = a.spec.layout.family(Species::Dynamic).unwrap().clone();
    let sea = state_index(&a.basis, |s| s[..3].iter().all(|&n| n == 1) && (0..4).all(|v| s[f.mode(v, 0)] == (v % 2) as u8));
    assert!((0..4).all(|v| a.spec.gauss_value(a.basis.state(sea), v) == 0.0));

    // flux tube of length 2 from vertex 1 to vertex 3 on a 5-site chain
    let a = assemble(ModelConfig::new(chain(5).unwrap(), Theory::U1 { ell: 1 }));
    let tube = state_index(&a.basis, |s| s == [1, 2, 2, 1]);
    let g: Vec<f64> = (0..5).map(|v| a.spec.gauss_value(a.basis.state(tube), v)).collect();
    assert_eq!(g, vec![0.0, 1.0, 0.0, -1.0, 0.0]);
}

#[test]
fn assembly_examples() {
    let a = assemble(ModelConfig::new(chain(4).unwrap(), Theory::U1 { ell: 1 }).with_matter(dynamic()));
    assert_eq!(a.term_names(), vec!["H_E", "H_M", "H_int"]);
    assert_eq!(a.basis.dim(), 432);

    let a = assemble(ModelConfig::new(single_plaquette(), Theory::U1 { ell: 1 }).with_matter(auxiliary(AuxFill::Pure)));
    assert_eq!(a.term_names(), vec!["H_E", "H_int", "H_C"]);
    assert_eq!(a.basis.dim(), 81 * 16);
    assert_eq!(a.spec.estimate_dims().fermionic, 16);

    let a = assemble(ModelConfig::new(single_plaquette(), Theory::Zn { n: 3 }));
    assert_eq!(a.term_names(), vec!["H_E", "H_B"]);
    assert_eq!(a.basis.dim(), 81);
    assert_eq!(a.manifest().len(), 2);

    let a = assemble(ModelConfig::new(chain(3).unwrap(), Theory::U1 { ell: 1 }).with_terms(&[TermKind::Electric, TermKind::Magnetic]));
    assert_eq!(a.warnings.len(), 1);
    assert_eq!(a.term(TermKind::Magnetic).unwrap().nnz(), 0);

    let mut big = ModelConfig::new(lattice_core::build_lattice(2, &[4, 4], &[Boundary::Open; 2]).unwrap(), Theory::U1 { ell: 3 });
    big.dim_cap = 1000;
    assert!(matches!(assemble_model(&big), Err(ForgeError::DimensionCap { .. })));

    let bad = ModelConfig::new(chain(3).unwrap(), Theory::U1 { ell: 1 }).with_matter(auxiliary(AuxFill::Pure));
    assert!(matches!(assemble_model(&bad), Err(ForgeError::Invalid(_))));
}

fn gauge_models() -> Vec<(&'static str, ModelConfig)> {
    let cs = CouplingSet { g2: 1.3, mu: 0.65, eps: 0.4, lambda: 2.0, mass: 0.8, gamma: 0.6, counterterm: 0.35, ..Default::default() };
    let plaq = single_plaquette();
    let all = |t: &[TermKind]| t.to_vec();
    let mut out = vec![
        ("u1 schwinger", ModelConfig::new(chain(4).unwrap(), Theory::U1 { ell: 1 }).with_matter(dynamic())),
        ("u1 loop", ModelConfig::new(plaq.clone(), Theory::U1 { ell: 2 }).with_matter(auxiliary(AuxFill::Pure))),
        (
            "u1 dirac",
            ModelConfig::new(plaq.clone(), Theory::U1 { ell: 1 })
                .with_matter(dynamic())
                .with_terms(&all(&[TermKind::Electric, TermKind::Magnetic, TermKind::Dirac, TermKind::GaussPenalty])),
        ),
        ("zn3 loop", ModelConfig::new(plaq.clone(), Theory::Zn { n: 3 }).with_matter(auxiliary(AuxFill::Pure))),
        ("zn4 pure", ModelConfig::new(plaq.clone(), Theory::Zn { n: 4 }).with_terms(&all(&[TermKind::Electric, TermKind::Magnetic, TermKind::GaussPenalty]))),
        ("proxy loop", ModelConfig::new(plaq.clone(), Theory::U1Proxy { n: 5 }).with_matter(auxiliary(AuxFill::Pure))),
        ("su2 pure", ModelConfig::new(plaq.clone(), Theory::Su2 { n_max: 2, unitary: true }).with_terms(&all(&[TermKind::Electric, TermKind::Magnetic]))),
        ("su2 loop", ModelConfig::new(plaq.clone(), Theory::Su2 { n_max: 2, unitary: false }).with_matter(auxiliary(AuxFill::Mixed))),
        ("su2 chain", ModelConfig::new(chain(3).unwrap(), Theory::Su2 { n_max: 2, unitary: false }).with_matter(dynamic())),
    ];
    for (name, cfg) in &mut out {
        cfg.couplings = cs.clone();
        cfg.penalty = 0.9;
        if name.starts_with("su2") {
            cfg.link_budget = Some(2);
        }
    }
    out
}

#[test]
fn every_term_is_hermitian_and_gauge_invariant() {
    for (name, cfg) in gauge_models() {
        let a = assemble(cfg);
        for (k, op) in &a.terms {
            assert!(op.hermiticity_defect() <= 1e-12, "{name} {k:?} hermiticity");
            let d = gauss_defect(&a, op);
            assert!(d <= 1e-12, "{name} {k:?} gauss defect {d}");
        }
    }
}

#[test]
fn eigenvectors_have_sharp_gauss_labels() {
    for (name, cfg) in gauge_models().into_iter().filter(|(n, _)| ["u1 schwinger", "zn3 loop"].contains(n)) {
        let a = assemble(cfg);
        let h = a.total();
        let nv = a.spec.geometry.n_vertices();
        // generic combination of the diagonal labels splits cross-sector degeneracies
        let labels = SparseOperator::diagonal(&a.basis, |s| {
            (0..nv).map(|v| a.spec.gauss_value(s, v) * (2.0 + v as f64).sqrt()).sum()
        });
        let (_, vecs) = eig(&h.add(&labels).unwrap());
        for x in vecs {
            let hx = h.apply(&x);
            let e: f64 = x.iter().zip(&hx).map(|(a, b)| (a.conj() * b).re).sum();
            let res = hx.iter().zip(&x).map(|(a, b)| (a - b * e).norm()).fold(0.0, f64::max);
            assert!(res < 1e-8, "{name} eigen residual {res}");
            for v in 0..nv {
                let (mut m1, mut m2) = (0.0, 0.0);
                for (i, c) in x.iter().enumerate() {
                    let g = a.spec.gauss_value(a.basis.state(i), v);
                    m1 += c.norm_sqr() * g;
                    m2 += c.norm_sqr() * g * g;
                }
                assert!((m2 - m1 * m1).abs() < 1e-10, "{name} vertex {v} spread {}", m2 - m1 * m1);
            }
        }
    }
}

#[test]
fn zn_low_order_identities() {
    for n in [2u32, 3] {
        let a = assemble(ModelConfig::new(chain(2).unwrap(), Theory::Zn { n }));
        let z = gauge_links::zn_link(n).unwrap();
        let b = z.local_basis();
        let p = z.p(&b);
        let p2 = p.mul(&p).unwrap();
        if n == 2 {
            assert!(p2.max_abs_diff(&SparseOperator::identity(&b)).unwrap() < 1e-14);
            let sum = p2.add(&p.adjoint().mul(&p.adjoint()).unwrap()).unwrap();
            assert!(sum.max_abs_diff(&SparseOperator::identity(&b).scale_real(2.0)).unwrap() < 1e-14);
        } else {
            assert!(p2.max_abs_diff(&p.adjoint()).unwrap() < 1e-14);
        }
        assert_eq!(a.basis.dim(), n as usize);
    }
}

fn spectrum_with_phases(geom: LatticeGeometry, phase: bool) -> Vec<f64> {
    let mut m = dynamic();
    m.phase_convention = phase;
    let cfg = ModelConfig::new(geom, Theory::U1 { ell: 1 })
        .with_matter(m)
        .with_couplings(CouplingSet { g2: 1.1, mu: 0.55, eps: 0.5, mass: 0.3, gamma: 0.45, ..Default::default() })
        .with_terms(&[TermKind::Electric, TermKind::Magnetic, TermKind::Dirac, TermKind::Interaction]);
    eigvals(&assemble(cfg).total())
}

#[test]
fn phase_convention_leaves_spectrum_invariant() {
    for geom in [chain(4).unwrap(), single_plaquette()] {
        let off = spectrum_with_phases(geom.clone(), false);
        let on = spectrum_with_phases(geom, true);
        assert!(close(&off, &on, 1e-10));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hops_move_flux_by_one(ell in 1u32..4, sites in 2usize..5, pick in 0usize..10_000, link_pick in 0usize..10) {
        let a = assemble(ModelConfig::new(chain(sites).unwrap(), Theory::U1 { ell }).with_matter(dynamic()));
        let l = link_pick % a.spec.geometry.n_links();
        let j = pick % a.basis.dim();
        let src = a.basis.state(j);
        let u = a.spec.links;
        let LinkOps::U1(sp) = u else { unreachable!() };
        for (dir, delta) in [(HopDirection::TowardTarget, -1i64), (HopDirection::TowardSource, 1)] {
            let op = directed_hop(&a, Species::Dynamic, l, dir).unwrap();
            for (r, _) in column(&op, j) {
                let t = a.basis.state(r);
                prop_assert_eq!(sp.m(t[l]) - sp.m(src[l]), delta);
                for k in 0..a.spec.geometry.n_links() {
                    if k != l { prop_assert_eq!(t[k], src[k]); }
                }
            }
        }
    }

    #[test]
    fn chains_stay_gauge_invariant(ell in 1u32..3, sites in 2usize..5, eps in 0.01f64..2.0, mass in -2.0f64..2.0, gamma in -1.0f64..1.0) {
        let cfg = ModelConfig::new(chain(sites).unwrap(), Theory::U1 { ell })
            .with_matter(dynamic())
            .with_couplings(CouplingSet { eps, mass, gamma, ..Default::default() })
            .with_terms(&[TermKind::Electric, TermKind::Mass, TermKind::Interaction, TermKind::Dirac]);
        let a = assemble(cfg);
        for (_, op) in &a.terms {
            prop_assert!(gauss_defect(&a, op) <= 1e-12);
        }
    }

    #[test]
    fn staggered_charge_sums_to_zero_on_sea(half in 1usize..4) {
        let sites = 2 * half;
        let a = assemble(ModelConfig::new(chain(sites).unwrap(), Theory::U1 { ell: 1 }).with_matter(dynamic()));
        let f = a.spec.layout.family(Species::Dynamic).unwrap().clone();
        let sea = state_index(&a.basis, |s| (0..sites).all(|v| s[f.mode(v, 0)] as i8 == (a.spec.geometry.parity_sign(VertexId(v)) < 0) as i8));
        let q: i64 = (0..sites).map(|v| a.spec.charge(a.basis.state(sea), v)).sum();
        prop_assert_eq!(q, 0);
    }
}

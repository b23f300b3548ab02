use std::sync::Arc;

use fock_algebra::*;
use lattice_core::{single_plaquette, VertexId};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn mixed_basis() -> Arc<Basis> {
    let modes = vec![
        ModeSpec::boson("b0", 2, Attachment::Free),
        ModeSpec::fermion("f0", Attachment::Free),
        ModeSpec::boson("b1", 1, Attachment::Free),
        ModeSpec::fermion("f1", Attachment::Free),
    ];
    Basis::enumerate(modes, &[], 1000).unwrap()
}

fn dense_mul(a: &[C64], b: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for k in 0..n {
            let x = a[i * n + k];
            if x.norm() == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += x * b[k * n + j];
            }
        }
    }
    out
}

#[test]
fn enumeration_examples() {
    let one = Basis::enumerate(vec![ModeSpec::boson("a", 2, Attachment::Free)], &[], 10).unwrap();
    assert_eq!(one.dim(), 3);
    let rotors: Vec<ModeSpec> = (0..4).map(|l| ModeSpec::boson(format!("E{l}"), 2, Attachment::Link(l))).collect();
    assert_eq!(Basis::enumerate(rotors, &[], 1000).unwrap().dim(), 81);
    let psi: Vec<ModeSpec> = (0..4).map(|v| ModeSpec::fermion(format!("psi{v}"), Attachment::Vertex(v))).collect();
    let b = Basis::enumerate(psi, &[Constraint::total(0..4, 1)], 100).unwrap();
    assert_eq!(b.dim(), 4);
}

#[test]
fn enumeration_is_colex_and_matches_brute_force() {
    let modes = vec![
        ModeSpec::boson("a", 2, Attachment::Free),
        ModeSpec::boson("b", 3, Attachment::Free),
        ModeSpec::fermion("c", Attachment::Free),
        ModeSpec::boson("d", 2, Attachment::Free),
    ];
    let cons = [Constraint::balance(&[0, 2], &[3]), Constraint::total([1], 2), Constraint::at_most([0, 3], 3)];
    let b = Basis::enumerate(modes, &cons, 1000).unwrap();
    let mut brute = Vec::new();
    for d in 0..=2u8 {
        for cc in 0..=1u8 {
            for bb in 0..=3u8 {
                for a in 0..=2u8 {
                    let s = vec![a, bb, cc, d];
                    if cons.iter().all(|k| k.holds(&s)) {
                        brute.push(s);
                    }
                }
            }
        }
    }
    let got: Vec<Vec<u8>> = b.states().map(|s| s.to_vec()).collect();
    assert_eq!(got, brute);
    for (i, s) in got.iter().enumerate() {
        assert_eq!(b.index_of(s), Some(i));
    }
}

#[test]
fn enumeration_errors_are_distinct() {
    let modes = vec![ModeSpec::boson("a", 1, Attachment::Free)];
    assert_eq!(
        Basis::enumerate(modes.clone(), &[Constraint::total([0], 5)], 10).unwrap_err(),
        FockError::EmptyBasis
    );
    let many: Vec<ModeSpec> = (0..10).map(|i| ModeSpec::boson(format!("m{i}"), 3, Attachment::Free)).collect();
    assert_eq!(Basis::enumerate(many, &[], 1000).unwrap_err(), FockError::DimensionCap { cap: 1000 });
}

#[test]
fn ladder_examples() {
    let b = Basis::enumerate(vec![ModeSpec::boson("a", 2, Attachment::Free)], &[], 10).unwrap();
    let ad = ladder(&b, 0, Ladder::Create).unwrap();
    assert_eq!(ad.get(1, 0), c(1.0));
    assert_eq!(ad.get(2, 1), c(2f64.sqrt()));
    let n = ladder(&b, 0, Ladder::Number).unwrap();
    assert_eq!(n.get(2, 2), c(2.0));
    // [N, a†] = a†
    assert!(n.commutator(&ad).unwrap().max_abs_diff(&ad).unwrap() < 1e-15);

    let f = Basis::enumerate(
        vec![ModeSpec::fermion("f1", Attachment::Free), ModeSpec::fermion("f2", Attachment::Free)],
        &[],
        10,
    )
    .unwrap();
    let a2 = ladder(&f, 1, Ladder::Annihilate).unwrap();
    let from = f.index_of(&[1, 1]).unwrap();
    let to = f.index_of(&[1, 0]).unwrap();
    assert_eq!(a2.get(to, from), c(-1.0));
    assert_eq!(ladder(&f, 5, Ladder::Number).unwrap_err(), FockError::UnknownMode(5));
}

#[test]
fn canonical_relations() {
    let b = mixed_basis();
    let id = SparseOperator::identity(&b);
    let ops: Vec<(SparseOperator, SparseOperator)> = (0..4)
        .map(|m| (ladder(&b, m, Ladder::Annihilate).unwrap(), ladder(&b, m, Ladder::Create).unwrap()))
        .collect();
    for m in 0..4 {
        let (a, ad) = &ops[m];
        if b.modes()[m].is_fermion() {
            assert!(a.anticommutator(ad).unwrap().max_abs_diff(&id).unwrap() < 1e-14);
        } else {
            // [a, a†] = 1 on states below the cap
            let comm = a.commutator(ad).unwrap();
            for i in 0..b.dim() {
                if b.state(i)[m] < b.modes()[m].cap {
                    assert!((comm.get(i, i) - 1.0).norm() < 1e-14);
                }
            }
        }
    }
    for m in 0..4 {
        for k in 0..4 {
            if m == k {
                continue;
            }
            let both_f = b.modes()[m].is_fermion() && b.modes()[k].is_fermion();
            let (x, y) = (&ops[m].0, &ops[k].1);
            let r = if both_f { x.anticommutator(y) } else { x.commutator(y) }.unwrap();
            assert!(r.max_abs() < 1e-14, "modes {m},{k}");
        }
    }
}

#[test]
fn basis_mismatch_is_an_error() {
    let a = mixed_basis();
    let b = mixed_basis();
    let x = SparseOperator::identity(&a);
    let y = SparseOperator::identity(&b);
    assert!(matches!(x.add(&y), Err(FockError::BasisMismatch { .. })));
    assert!(matches!(x.mul(&y), Err(FockError::BasisMismatch { .. })));
}

#[test]
fn triplet_round_trip() {
    let b = mixed_basis();
    let op = ladder(&b, 1, Ladder::Create).unwrap().scale(C64::new(0.3, -1.25));
    let mut buf = Vec::new();
    op.export_triplets(&mut buf).unwrap();
    let back = SparseOperator::import_triplets(&b, &buf[..]).unwrap();
    assert_eq!(back.max_abs_diff(&op).unwrap(), 0.0);
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("# sparse-operator v1\n# dim 24 nnz"));
}

#[test]
fn gauss_sector_of_the_rotor_plaquette() {
    let g = single_plaquette();
    let modes: Vec<ModeSpec> = (0..4).map(|l| ModeSpec::boson(format!("E{l}"), 2, Attachment::Link(l))).collect();
    let b = Basis::enumerate(modes, &[], 1000).unwrap();
    let div = |v: usize, s: &[u8]| -> f64 {
        let (pos, neg) = g.incident_links(VertexId(v)).unwrap();
        pos.iter().map(|l| s[l.0] as f64 - 1.0).sum::<f64>() - neg.iter().map(|l| s[l.0] as f64 - 1.0).sum::<f64>()
    };
    let ops: Vec<SparseOperator> = (0..4).map(|v| SparseOperator::diagonal(&b, move |s| div(v, s))).collect();
    let refs: Vec<&SparseOperator> = ops.iter().collect();
    let inj = sector_restrict(&b, &refs, &[0.0; 4], "gauss").unwrap();
    let brute = b.states().filter(|s| (0..4).all(|v| div(v, s) == 0.0)).count();
    assert_eq!(inj.child.dim(), brute);
    assert_eq!(brute, 3);

    let none = sector_restrict(&b, &[], &[], "all").unwrap();
    assert_eq!(none.child.dim(), 81);
    let empty = sector_restrict(&b, &refs[..1], &[7.0], "none").unwrap();
    assert!(empty.is_empty());

    let off = ladder(&b, 0, Ladder::Create).unwrap();
    assert!(matches!(sector_restrict(&b, &[&off], &[0.0], "x"), Err(FockError::NonDiagonal { .. })));
}

#[test]
fn reachable_basis_records_depth() {
    let modes: Vec<ModeSpec> = (0..3).map(|i| ModeSpec::boson(format!("m{i}"), 3, Attachment::Free)).collect();
    let (b, depth) = Basis::reachable(modes, &[vec![0, 0, 0]], Some(2), 100, |s, out| {
        for m in 0..3 {
            let mut t = s.to_vec();
            t[m] += 1;
            out.push(t);
        }
    })
    .unwrap();
    assert_eq!(b.dim(), 1 + 3 + 6);
    let i = b.index_of(&[1, 1, 0]).unwrap();
    assert_eq!(depth[i], 2);
}

fn random_op(b: &Arc<Basis>, seed: u64, density: f64) -> SparseOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = b.dim();
    let mut t = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if rng.gen::<f64>() < density {
                t.push((i, j, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
            }
        }
    }
    SparseOperator::from_triplets(b, t)
}

fn basis_of_dim(n: usize) -> Arc<Basis> {
    Basis::enumerate(vec![ModeSpec::boson("q", (n - 1) as u8, Attachment::Free)], &[], 1000).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn product_matches_dense_oracle(n in 2usize..64, s1 in any::<u64>(), s2 in any::<u64>()) {
        let b = basis_of_dim(n);
        let x = random_op(&b, s1, 0.2);
        let y = random_op(&b, s2, 0.2);
        let want = dense_mul(&x.to_dense(), &y.to_dense(), n);
        let got = x.mul(&y).unwrap().to_dense();
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).norm() <= 1e-13);
        }
    }

    #[test]
    fn adjoint_is_an_involution(n in 2usize..40, s in any::<u64>()) {
        let b = basis_of_dim(n);
        let x = random_op(&b, s, 0.3);
        prop_assert_eq!(x.adjoint().adjoint().max_abs_diff(&x).unwrap(), 0.0);
    }

    #[test]
    fn restricted_spectrum_is_contained(s in any::<u64>()) {
        // block operator commuting with the occupation of mode "a"
        let modes = vec![ModeSpec::boson("a", 3, Attachment::Free), ModeSpec::boson("b", 4, Attachment::Free)];
        let b = Basis::enumerate(modes, &[], 100).unwrap();
        let r = random_op(&b, s, 0.6);
        let blocky: Vec<Triplet> = r
            .iter()
            .filter(|&(i, j, _)| b.state(i)[0] == b.state(j)[0])
            .collect();
        let x = SparseOperator::from_triplets(&b, blocky);
        let h = x.add(&x.adjoint()).unwrap();
        let na = ladder(&b, 0, Ladder::Number).unwrap();
        let inj = sector_restrict(&b, &[&na], &[2.0], "a=2").unwrap();
        let hs = inj.project(&h).unwrap();
        let eig = |o: &SparseOperator| {
            let n = o.dim();
            let d = o.to_dense();
            let m = faer::Mat::from_fn(n, n, |i, j| faer::c64::new(d[i * n + j].re, d[i * n + j].im));
            let w = m.self_adjoint_eigenvalues(faer::Side::Lower).unwrap();
            w
        };
        let full = eig(&h);
        for e in eig(&hs) {
            prop_assert!(full.iter().any(|f| (f - e).abs() < 1e-10));
        }
    }
}

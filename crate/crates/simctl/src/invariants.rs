use fock_algebra::{ladder, Attachment, Basis, Ladder, ModeSpec, SparseOperator, C64};
use gauge_links::{su2_link, u1_link, zn_link, Side};
use hamiltonian_forge::{gauss_generator, ModelAssembly, Theory};
use serde::{Deserialize, Serialize};
use spectra_lab::{gauss_sharpness, SolveRequest, SolverRegistry};

use crate::SimError;

/// Operator identities are checked to this absolute bound.
pub const ALGEBRA_TOL: f64 = 1e-12;
pub const GAUSS_TOL: f64 = 1e-12;
pub const SHARPNESS_TOL: f64 = 1e-10;

/// One named invariant with its measured defect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance }
    }

    pub fn pass(&self) -> bool {
        self.value <= self.tolerance
    }
}

fn diff(a: &SparseOperator, b: &SparseOperator) -> f64 {
    a.max_abs_diff(b).expect("shared basis")
}

fn mul(a: &SparseOperator, b: &SparseOperator) -> SparseOperator {
    a.mul(b).expect("shared basis")
}

fn power(op: &SparseOperator, k: u32) -> SparseOperator {
    (0..k).fold(SparseOperator::identity(op.basis()), |acc, _| mul(&acc, op))
}

fn levi(a: usize, b: usize, c: usize) -> f64 {
    match (a, b, c) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Single-link identities of `theory`.
pub fn link_algebra(theory: Theory) -> Result<Vec<Check>, SimError> {
    let mut out = Vec::new();
    match theory {
        Theory::U1 { ell } => {
            let l = u1_link(ell).map_err(|e| SimError::Config(e.to_string()))?;
            let b = l.local_basis();
            let (e, lp) = (l.e(&b), l.l_plus(&b));
            out.push(Check::new("u1 [E,L+] = L+", diff(&e.commutator(&lp).expect("basis"), &lp), ALGEBRA_TOL));
            out.push(Check::new("u1 L- = (L+)^dag", diff(&l.l_minus(&b), &lp.adjoint()), ALGEBRA_TOL));
            out.push(Check::new("u1 E hermitian", e.hermiticity_defect(), ALGEBRA_TOL));
        }
        Theory::Zn { n } | Theory::U1Proxy { n } => {
            let z = zn_link(n).map_err(|e| SimError::Config(e.to_string()))?;
            let b = z.local_basis();
            let (p, q) = (z.p(&b), z.q_op(&b));
            let id = SparseOperator::identity(&b);
            out.push(Check::new("zn P^dag P = 1", diff(&mul(&p.adjoint(), &p), &id), ALGEBRA_TOL));
            out.push(Check::new("zn Q^dag Q = 1", diff(&mul(&q.adjoint(), &q), &id), ALGEBRA_TOL));
            out.push(Check::new("zn P^N = 1", diff(&power(&p, n), &id), ALGEBRA_TOL));
            out.push(Check::new("zn Q^N = 1", diff(&power(&q, n), &id), ALGEBRA_TOL));
            let conj = mul(&mul(&p.adjoint(), &q), &p);
            out.push(Check::new("zn P^dag Q P = e^{i delta} Q", diff(&conj, &q.scale(C64::from_polar(1.0, z.delta()))), ALGEBRA_TOL));
            if n == 2 {
                let pp = power(&p, 2).add(&power(&p.adjoint(), 2)).expect("basis");
                out.push(Check::new("z2 P^2 + P^dag^2 = 2", diff(&pp, &id.scale_real(2.0)), ALGEBRA_TOL));
            }
            if n == 3 {
                out.push(Check::new("z3 P^2 = P^dag", diff(&power(&p, 2), &p.adjoint()), ALGEBRA_TOL));
            }
        }
        Theory::Su2 { n_max, .. } => {
            let s = su2_link(n_max).map_err(|e| SimError::Config(e.to_string()))?;
            let b = s.local_basis();
            let l: Vec<_> = (0..3).map(|a| s.generator_op(&b, 0, Side::Left, a)).collect();
            let r: Vec<_> = (0..3).map(|a| s.generator_op(&b, 0, Side::Right, a)).collect();
            let (mut lie_l, mut lie_r, mut cross) = (0.0f64, 0.0f64, 0.0f64);
            for a in 0..3 {
                for bb in 0..3 {
                    let mut want_l = SparseOperator::zero(&b);
                    let mut want_r = SparseOperator::zero(&b);
                    for c in 0..3 {
                        let e = levi(a, bb, c);
                        if e != 0.0 {
                            want_l = want_l.add(&l[c].scale(C64::new(0.0, -e))).expect("basis");
                            want_r = want_r.add(&r[c].scale(C64::new(0.0, e))).expect("basis");
                        }
                    }
                    lie_l = lie_l.max(diff(&l[a].commutator(&l[bb]).expect("basis"), &want_l));
                    lie_r = lie_r.max(diff(&r[a].commutator(&r[bb]).expect("basis"), &want_r));
                    cross = cross.max(l[a].commutator(&r[bb]).expect("basis").max_abs());
                }
            }
            out.push(Check::new("su2 left generator algebra", lie_l, ALGEBRA_TOL));
            out.push(Check::new("su2 right generator algebra", lie_r, ALGEBRA_TOL));
            out.push(Check::new("su2 [L_a, R_b] = 0", cross, ALGEBRA_TOL));
            let sq = |g: &[SparseOperator]| g.iter().fold(SparseOperator::zero(&b), |acc, x| acc.add(&mul(x, x)).expect("basis"));
            out.push(Check::new("su2 L^2 = R^2", diff(&sq(&l), &sq(&r)), ALGEBRA_TOL));
        }
    }
    Ok(out)
}

/// Canonical (anti)commutators on a small mixed fermion/boson register.
pub fn fermion_algebra() -> Vec<Check> {
    let modes = vec![
        ModeSpec::fermion("f0", Attachment::Vertex(0)),
        ModeSpec::fermion("f1", Attachment::Vertex(1)),
        ModeSpec::boson("b", 2, Attachment::Link(0)),
        ModeSpec::fermion("f2", Attachment::Vertex(2)),
    ];
    let b = Basis::enumerate(modes, &[], 1 << 10).expect("tiny register");
    let id = SparseOperator::identity(&b);
    let ops: Vec<_> = (0..4)
        .map(|m| (ladder(&b, m, Ladder::Annihilate).expect("mode"), ladder(&b, m, Ladder::Create).expect("mode")))
        .collect();
    let fermions = [0usize, 1, 3];
    let (mut car, mut mixed) = (0.0f64, 0.0f64);
    for &m in &fermions {
        for &k in &fermions {
            let ac = ops[m].0.anticommutator(&ops[k].1).expect("basis");
            let want = if m == k { id.clone() } else { SparseOperator::zero(&b) };
            car = car.max(diff(&ac, &want));
            car = car.max(ops[m].0.anticommutator(&ops[k].0).expect("basis").max_abs());
        }
        mixed = mixed.max(ops[m].0.commutator(&ops[2].1).expect("basis").max_abs());
        mixed = mixed.max(ops[m].0.commutator(&ops[2].0).expect("basis").max_abs());
    }
    vec![Check::new("fermion anticommutators", car, ALGEBRA_TOL), Check::new("fermion-boson commutators", mixed, ALGEBRA_TOL)]
}

/// Hermiticity and Gauss-law commutation of every named term, per vertex.
pub fn gauge_checks(a: &ModelAssembly) -> Vec<(String, Option<usize>, Check)> {
    let nv = a.spec.geometry.n_vertices();
    let gens: Vec<_> = (0..nv).map(|v| gauss_generator(a, v)).collect();
    let mut out = Vec::new();
    for (kind, op) in &a.terms {
        let label = kind.label().to_string();
        out.push((label.clone(), None, Check::new("hermitian", op.hermiticity_defect(), ALGEBRA_TOL)));
        for (v, g) in gens.iter().enumerate() {
            out.push((label.clone(), Some(v), Check::new("gauss commutation", g.defect(op), GAUSS_TOL)));
        }
    }
    out
}

/// Largest Gauss-law defect over every term and vertex.
pub fn max_gauss_defect(a: &ModelAssembly) -> f64 {
    gauge_checks(a).iter().filter(|c| c.2.name == "gauss commutation").map(|c| c.2.value).fold(0.0, f64::max)
}

/// Spread of the Gauss labels over the eigenvectors of the full `H`.
pub fn eigenvector_sharpness(a: &ModelAssembly, solvers: &SolverRegistry) -> Result<Check, SimError> {
    let w = solvers.get("dense_full")?.solve(&a.total(), &SolveRequest::default().with_vectors())?;
    let vecs = w.vectors.unwrap_or_default();
    Ok(Check::new("eigenvector gauss sharpness", gauss_sharpness(&a.spec, &a.basis, &vecs), SHARPNESS_TOL))
}

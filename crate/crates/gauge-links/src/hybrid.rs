use std::f64::consts::PI;

use fock_algebra::{Attachment, Basis, Constraint, ModeSpec, SparseOperator, C64};

use crate::{LinkError, ZnLinkSpace};

/// Atomic species and laser couplings of a hybridized Z_N link.
///
/// Pair `i` (1-based) couples `a₁` with `a_{N+1}` for `i = 1` and `a_i` with
/// `c_i` otherwise. Per pair, `H_R` carries `Δ_i(n_x + n_y) + Ω_i(x†y + h.c.)`
/// plus `(δ_i/2)(n_x + n_y) + (ω_i/2)(x†y + h.c.)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZnHybridSpec {
    pub n: u32,
    pub bosons: u32,
    pub big_delta: Vec<f64>,
    pub big_omega: Vec<f64>,
    pub small_delta: Vec<f64>,
    pub small_omega: Vec<f64>,
}

impl ZnHybridSpec {
    /// Couplings whose b-sector energies are `−μ cos(m δ)` with a detuning `Δ`
    /// on every pair and `Ω_i = −Δ`, `ω_i = δ_i`.
    pub fn electric(n: u32, mu: f64, big_delta: f64) -> Self {
        let zn = ZnLinkSpace { n };
        let small: Vec<f64> =
            (0..n).map(|i| -mu * (zn.m(i as u8) as f64 * 2.0 * PI / n as f64).cos()).collect();
        Self {
            n,
            bosons: 1,
            big_delta: vec![big_delta; n as usize],
            big_omega: vec![-big_delta; n as usize],
            small_delta: small.clone(),
            small_omega: small,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridReport {
    /// `Q` on the b-sector, row-major `N×N`.
    pub q_b: Vec<C64>,
    pub q_unitarity_defect: f64,
    pub q_cyclic_defect: f64,
    /// Diagonal of `H_R` on `|b_i⟩` and `|d_i⟩`.
    pub b_energies: Vec<f64>,
    pub d_energies: Vec<f64>,
    /// Largest off-diagonal element of `H_R` within the b-sector.
    pub b_offdiag: f64,
    /// Largest `|⟨d|H_R|b⟩|`.
    pub h_leakage: f64,
    /// Largest `|⟨d|Q_raw|b⟩|` before projection.
    pub q_raw_leakage: f64,
    /// Leakage left after projecting `d` out; zero by construction.
    pub q_projected_leakage: f64,
}

/// Builds the hybridized link in the one-boson sector, checks the b-sector
/// algebra and returns the abstract clock link it realizes.
pub fn zn_hybridize(spec: &ZnHybridSpec) -> Result<(ZnLinkSpace, HybridReport), LinkError> {
    let n = spec.n as usize;
    if spec.n < 2 {
        return Err(LinkError::OrderTooSmall(spec.n));
    }
    if spec.bosons != 1 {
        return Err(LinkError::HybridSector(spec.bosons));
    }
    for (name, v) in [
        ("Δ", &spec.big_delta),
        ("Ω", &spec.big_omega),
        ("δ", &spec.small_delta),
        ("ω", &spec.small_omega),
    ] {
        if v.len() != n {
            return Err(LinkError::MissingSpecies(format!("{name} has {} entries, need {n}", v.len())));
        }
    }

    // modes a_1..a_{N+1} (0..=n), then c_2..c_N (n+1..2n-1)
    let mut modes: Vec<ModeSpec> = (1..=n + 1).map(|i| ModeSpec::boson(format!("a{i}"), 1, Attachment::Free)).collect();
    modes.extend((2..=n).map(|i| ModeSpec::boson(format!("c{i}"), 1, Attachment::Free)));
    let n_modes = modes.len();
    let basis = Basis::enumerate(modes, &[Constraint::total(0..n_modes, 1)], 4 * n)?;
    let pair = |i: usize| -> (usize, usize) {
        if i == 0 {
            (0, n)
        } else {
            (i, n + i)
        }
    };
    let ket = |m: usize| -> usize {
        let mut s = vec![0u8; n_modes];
        s[m] = 1;
        basis.index_of(&s).expect("single boson state")
    };

    let mut trip = Vec::new();
    for i in 0..n {
        let (x, y) = pair(i);
        let (kx, ky) = (ket(x), ket(y));
        let on = spec.big_delta[i] + spec.small_delta[i] / 2.0;
        let hop = spec.big_omega[i] + spec.small_omega[i] / 2.0;
        trip.push((kx, kx, C64::new(on, 0.0)));
        trip.push((ky, ky, C64::new(on, 0.0)));
        trip.push((kx, ky, C64::new(hop, 0.0)));
        trip.push((ky, kx, C64::new(hop, 0.0)));
    }
    let h = SparseOperator::from_triplets(&basis, trip);
    let q_raw = SparseOperator::from_triplets(
        &basis,
        (0..n).map(|i| (ket(i), ket(i + 1), C64::new(2.0, 0.0))).collect(),
    );

    let s = std::f64::consts::FRAC_1_SQRT_2;
    let hybrid = |i: usize, sign: f64| -> Vec<C64> {
        let (x, y) = pair(i);
        let mut v = vec![C64::new(0.0, 0.0); basis.dim()];
        v[ket(x)] = C64::new(s, 0.0);
        v[ket(y)] = C64::new(sign * s, 0.0);
        v
    };
    let bs: Vec<Vec<C64>> = (0..n).map(|i| hybrid(i, 1.0)).collect();
    let ds: Vec<Vec<C64>> = (0..n).map(|i| hybrid(i, -1.0)).collect();
    let elem = |u: &[C64], op: &SparseOperator, v: &[C64]| -> C64 {
        let w = op.apply(v);
        u.iter().zip(&w).map(|(a, b)| a.conj() * b).sum()
    };

    let mut q_b = vec![C64::new(0.0, 0.0); n * n];
    let mut b_energies = vec![0.0; n];
    let mut d_energies = vec![0.0; n];
    let mut b_offdiag: f64 = 0.0;
    let mut h_leakage: f64 = 0.0;
    let mut q_raw_leakage: f64 = 0.0;
    for r in 0..n {
        for c in 0..n {
            q_b[r * n + c] = elem(&bs[r], &q_raw, &bs[c]);
            let hb = elem(&bs[r], &h, &bs[c]);
            if r == c {
                b_energies[r] = hb.re;
            } else {
                b_offdiag = b_offdiag.max(hb.norm());
            }
            h_leakage = h_leakage.max(elem(&ds[r], &h, &bs[c]).norm());
            q_raw_leakage = q_raw_leakage.max(elem(&ds[r], &q_raw, &bs[c]).norm());
        }
        d_energies[r] = elem(&ds[r], &h, &ds[r]).re;
    }

    let mat_mul = |a: &[C64], b: &[C64]| -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                for j in 0..n {
                    out[i * n + j] += a[i * n + k] * b[k * n + j];
                }
            }
        }
        out
    };
    let eye_defect = |m: &[C64]| -> f64 {
        (0..n * n)
            .map(|k| (m[k] - if k / n == k % n { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }).norm())
            .fold(0.0, f64::max)
    };
    let q_dag: Vec<C64> = (0..n * n).map(|k| q_b[(k % n) * n + k / n].conj()).collect();
    let q_unitarity_defect = eye_defect(&mat_mul(&q_dag, &q_b));
    let mut pow = q_b.clone();
    for _ in 1..n {
        pow = mat_mul(&pow, &q_b);
    }
    let q_cyclic_defect = eye_defect(&pow);

    let report = HybridReport {
        q_b,
        q_unitarity_defect,
        q_cyclic_defect,
        b_energies,
        d_energies,
        b_offdiag,
        h_leakage,
        q_raw_leakage,
        q_projected_leakage: 0.0,
    };
    Ok((ZnLinkSpace { n: spec.n }, report))
}

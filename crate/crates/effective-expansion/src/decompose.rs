use fock_algebra::{SparseOperator, C64};
use hamiltonian_forge::{AuxFill, LinkOps, ModelSpec};
use lattice_core::VertexId;
use serde::{Deserialize, Serialize};

/// Operator classes an effective order is projected onto.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermClass {
    /// Multiple of the identity.
    Constant,
    /// The electric term with unit coupling (`Σ E²`, `−Σ cos mδ` or the Casimir sum).
    Electric,
    /// `Σ E`.
    ElectricLinear,
    /// `Σ E³`.
    ElectricCubic,
    /// `Σ (P² + P†²)`.
    ElectricDouble,
    /// `Σ E_l E_l'` over link pairs meeting at odd vertices.
    NeighbourFlux,
    /// `Σ (□ + □†)`.
    Plaquette,
}

impl TermClass {
    pub fn label(&self) -> &'static str {
        match self {
            TermClass::Constant => "constant",
            TermClass::Electric => "electric",
            TermClass::ElectricLinear => "electric_linear",
            TermClass::ElectricCubic => "electric_cubic",
            TermClass::ElectricDouble => "electric_double",
            TermClass::NeighbourFlux => "neighbour_flux",
            TermClass::Plaquette => "plaquette",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompEntry {
    pub class: TermClass,
    pub predicted: Option<f64>,
    pub measured: f64,
    /// Frobenius norm of the class operator on the block.
    pub norm: f64,
    /// Linearly dependent on earlier classes on this block; measured is 0.
    pub absorbed: bool,
}

#[derive(Debug, Clone)]
pub struct OrderDecomposition {
    pub order: usize,
    pub entries: Vec<DecompEntry>,
    pub residual: SparseOperator,
    pub residual_norm: f64,
}

impl OrderDecomposition {
    pub fn get(&self, class: TermClass) -> Option<&DecompEntry> {
        self.entries.iter().find(|e| e.class == class)
    }

    pub fn measured(&self, class: TermClass) -> f64 {
        self.get(class).map_or(0.0, |e| e.measured)
    }
}

/// One row of the exported decomposition table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionRow {
    pub order: usize,
    pub class: String,
    pub predicted: Option<f64>,
    pub measured: f64,
    pub residual_norm: f64,
}

pub fn table(decomp: &[OrderDecomposition]) -> Vec<DecompositionRow> {
    decomp
        .iter()
        .flat_map(|d| {
            d.entries.iter().map(move |e| DecompositionRow {
                order: d.order,
                class: e.class.label().to_string(),
                predicted: e.predicted,
                measured: e.measured,
                residual_norm: d.residual_norm,
            })
        })
        .collect()
}

/// Real Frobenius inner product `Re Tr(A† B)`.
pub fn frobenius(a: &SparseOperator, b: &SparseOperator) -> f64 {
    a.inner(b).expect("shared basis").re
}

fn link_m(spec: &ModelSpec, s: &[u8], l: usize) -> f64 {
    let o = spec.layout.link_offset[l];
    match spec.links {
        LinkOps::U1(u) => u.m(s[o]) as f64,
        LinkOps::Proxy(z) | LinkOps::Zn(z) => z.m(s[o]) as f64,
        LinkOps::Su2(..) => 0.0,
    }
}

/// Operator of `class` on the basis of `like`; `None` when the class does not
/// exist for this theory.
pub fn class_operator(spec: &ModelSpec, like: &SparseOperator, class: TermClass) -> Option<SparseOperator> {
    let b = like.basis();
    let nl = spec.geometry.n_links();
    let abelian = !matches!(spec.links, LinkOps::Su2(..));
    let power = |p: i32| SparseOperator::diagonal(b, |s| (0..nl).map(|l| link_m(spec, s, l).powi(p)).sum());
    match class {
        TermClass::Constant => Some(SparseOperator::identity(b)),
        TermClass::Electric => Some(spec.electric(b, 1.0)),
        TermClass::ElectricLinear if abelian && !matches!(spec.links, LinkOps::Zn(_)) => Some(power(1)),
        TermClass::ElectricCubic if matches!(spec.links, LinkOps::U1(_)) => Some(power(3)),
        TermClass::ElectricDouble => match spec.links {
            LinkOps::Zn(z) => Some(SparseOperator::diagonal(b, |s| {
                (0..nl).map(|l| 2.0 * (2.0 * link_m(spec, s, l) * z.delta()).cos()).sum()
            })),
            _ => None,
        },
        TermClass::NeighbourFlux if matches!(spec.links, LinkOps::U1(_)) => Some(SparseOperator::diagonal(b, |s| {
            (0..spec.geometry.n_vertices())
                .filter(|&v| spec.geometry.parity_sign(VertexId(v)) < 0)
                .map(|v| {
                    let (pos, neg) = spec.geometry.incident_links(VertexId(v)).expect("vertex");
                    let ls: Vec<usize> = pos.iter().chain(&neg).map(|l| l.0).collect();
                    let mut acc = 0.0;
                    for i in 0..ls.len() {
                        for j in i + 1..ls.len() {
                            acc += link_m(spec, s, ls[i]) * link_m(spec, s, ls[j]);
                        }
                    }
                    acc
                })
                .sum()
        })),
        TermClass::Plaquette => Some(spec.plaquettes(b)),
        _ => None,
    }
}

/// Initial-state factor of the auxiliary fermions.
pub fn xi_in(spec: &ModelSpec) -> f64 {
    match spec.matter.aux_fill {
        AuxFill::Pure => 1.0,
        AuxFill::Mixed => 1.0 / spec.layout.colours as f64,
    }
}

/// Closed-form coefficient expected for `class` at `order`, where one exists.
pub fn predicted(spec: &ModelSpec, order: usize, class: TermClass) -> Option<f64> {
    let c = &spec.couplings;
    let (eps, lam, mu) = (c.eps, c.lambda, c.mu);
    let e4 = eps.powi(4) / lam.powi(3);
    match (order, class) {
        (1, TermClass::Electric) => Some(mu),
        (1, TermClass::Plaquette) => Some(0.0),
        _ => match spec.links {
            LinkOps::Zn(z) => {
                let s2 = (z.delta() / 2.0).sin().powi(2);
                match (order, class) {
                    (2, TermClass::Electric) => Some(0.0),
                    (3, TermClass::Electric) => Some(-2.0 * eps * eps * mu / (lam * lam) * s2),
                    (4, TermClass::Plaquette) => Some(-4.0 * e4),
                    (4, TermClass::ElectricDouble) => {
                        Some(eps * eps * mu * mu / (2.0 * lam.powi(3)) * z.delta().cos() * s2)
                    }
                    _ => None,
                }
            }
            LinkOps::Proxy(_) => match (order, class) {
                (2 | 3, TermClass::Electric | TermClass::ElectricLinear) => Some(0.0),
                (4, TermClass::Plaquette) => Some(-2.0 * e4),
                (4, TermClass::Electric) => Some(mu * mu * eps * eps / lam.powi(3)),
                _ => None,
            },
            LinkOps::U1(u) => {
                let l2 = (u.ell * (u.ell + 1)) as f64;
                match (order, class) {
                    (2, TermClass::Electric) => Some(eps * eps / (lam * l2)),
                    (4, TermClass::Plaquette) => Some(-2.0 * e4),
                    _ => None,
                }
            }
            LinkOps::Su2(..) => {
                let xi = xi_in(spec);
                match (order, class) {
                    (2 | 3, TermClass::Electric) => Some(0.0),
                    (4, TermClass::Plaquette) => Some(-2.0 * xi * e4),
                    (4, TermClass::Electric) => Some(-4.0 * xi * mu * mu * eps * eps * 0.5 / lam.powi(3)),
                    _ => None,
                }
            }
        },
    }
}

const CLASSES: [TermClass; 7] = [
    TermClass::Constant,
    TermClass::Electric,
    TermClass::Plaquette,
    TermClass::ElectricDouble,
    TermClass::ElectricLinear,
    TermClass::ElectricCubic,
    TermClass::NeighbourFlux,
];

/// Trace-orthogonal projection of `op` onto the class dictionary.
pub fn decompose(spec: &ModelSpec, op: &SparseOperator, order: usize) -> OrderDecomposition {
    let mut kept: Vec<(TermClass, SparseOperator)> = Vec::new();
    let mut ortho: Vec<SparseOperator> = Vec::new();
    let mut entries = Vec::new();
    for class in CLASSES {
        let Some(d) = class_operator(spec, op, class) else { continue };
        let norm0 = frobenius(&d, &d).sqrt();
        let mut r = d.clone();
        for q in &ortho {
            r = r.sub(&q.scale_real(frobenius(q, &r))).expect("shared basis");
        }
        let norm = frobenius(&r, &r).sqrt();
        let absorbed = norm0 == 0.0 || norm <= 1e-9 * norm0;
        if !absorbed {
            ortho.push(r.scale_real(1.0 / norm));
            kept.push((class, d));
        }
        entries.push(DecompEntry { class, predicted: predicted(spec, order, class), measured: 0.0, norm: norm0, absorbed });
    }
    let coeffs = solve_gram(&kept.iter().map(|(_, d)| d).collect::<Vec<_>>(), op);
    let mut residual = op.clone();
    for ((class, d), c) in kept.iter().zip(&coeffs) {
        residual = residual.sub(&d.scale_real(*c)).expect("shared basis");
        if let Some(e) = entries.iter_mut().find(|e| e.class == *class) {
            e.measured = *c;
        }
    }
    let residual_norm = frobenius(&residual, &residual).sqrt();
    OrderDecomposition { order, entries, residual, residual_norm }
}

/// Least-squares coefficients of `target` in the span of `dict`.
pub fn solve_gram(dict: &[&SparseOperator], target: &SparseOperator) -> Vec<f64> {
    let n = dict.len();
    let mut g = vec![vec![0.0; n + 1]; n];
    for i in 0..n {
        for j in 0..n {
            g[i][j] = frobenius(dict[i], dict[j]);
        }
        g[i][n] = frobenius(dict[i], target);
    }
    // Gaussian elimination with partial pivoting
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| g[a][col].abs().total_cmp(&g[b][col].abs())).expect("nonempty");
        g.swap(col, piv);
        let p = g[col][col];
        for row in 0..n {
            if row != col {
                let f = g[row][col] / p;
                for k in col..=n {
                    g[row][k] -= f * g[col][k];
                }
            }
        }
    }
    (0..n).map(|i| g[i][n] / g[i][i]).collect()
}

/// `‖A − (Tr A / n) 1‖_max`.
pub fn non_constant_part(op: &SparseOperator) -> f64 {
    let n = op.dim().max(1) as f64;
    let mean = op.trace() / C64::new(n, 0.0);
    op.sub(&SparseOperator::identity(op.basis()).scale(mean)).expect("shared basis").max_abs()
}

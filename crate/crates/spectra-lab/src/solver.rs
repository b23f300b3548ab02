use std::collections::BTreeMap;

use faer::{Mat, Side};
use fock_algebra::{SparseOperator, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::SpectraError;

/// What to compute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveRequest {
    /// Lowest `k` levels; `None` asks for the whole spectrum.
    pub k: Option<usize>,
    /// Residual bound `‖Hy − θy‖` of iterative solvers.
    pub tol: f64,
    /// Seed of the iterative start vectors.
    pub seed: u64,
    pub vectors: bool,
}

impl Default for SolveRequest {
    fn default() -> Self {
        Self { k: None, tol: 1e-9, seed: 0x5eed, vectors: false }
    }
}

impl SolveRequest {
    pub fn lowest(k: usize) -> Self {
        Self { k: Some(k), ..Self::default() }
    }

    pub fn with_vectors(mut self) -> Self {
        self.vectors = true;
        self
    }
}

/// Ascending eigenvalues with optional unit eigenvectors.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: Option<Vec<Vec<C64>>>,
    /// `‖Hy − θy‖` per level (zero for dense solves).
    pub residuals: Vec<f64>,
    pub solver: &'static str,
}

pub trait Eigensolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, op: &SparseOperator, req: &SolveRequest) -> Result<Spectrum, SpectraError>;
}

/// Name-keyed eigensolver strategies.
pub struct SolverRegistry {
    solvers: BTreeMap<&'static str, Box<dyn Eigensolver>>,
}

impl Default for SolverRegistry {
    fn default() -> Self {
        let mut r = Self { solvers: BTreeMap::new() };
        r.register(Box::new(DenseFull));
        r.register(Box::new(IterativeLowestK::default()));
        r
    }
}

impl SolverRegistry {
    pub fn register(&mut self, s: Box<dyn Eigensolver>) {
        self.solvers.insert(s.name(), s);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Eigensolver, SpectraError> {
        self.solvers.get(name).map(|b| b.as_ref()).ok_or_else(|| SpectraError::UnknownSolver(name.to_string()))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.solvers.keys().copied().collect()
    }
}

/// Solver selection used by configs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SolverMode {
    DenseFull,
    IterativeLowestK { k: usize },
}

/// Diagonalizes with the registered solver for `mode`.
pub fn diagonalize(op: &SparseOperator, mode: SolverMode) -> Result<Spectrum, SpectraError> {
    let reg = SolverRegistry::default();
    match mode {
        SolverMode::DenseFull => reg.get("dense_full")?.solve(op, &SolveRequest::default()),
        SolverMode::IterativeLowestK { k } => reg.get("iterative_lowest_k")?.solve(op, &SolveRequest::lowest(k)),
    }
}

fn check_hermitian(op: &SparseOperator) -> Result<(), SpectraError> {
    let d = op.hermiticity_defect();
    if d > 1e-12 {
        return Err(SpectraError::NotHermitian(d));
    }
    Ok(())
}

fn c(v: C64) -> faer::c64 {
    faer::c64::new(v.re, v.im)
}

/// Connected components of the sparsity graph.
fn blocks(op: &SparseOperator) -> Vec<Vec<usize>> {
    let n = op.dim();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (i, j, v) in op.iter() {
        if i != j && v.norm() > 0.0 {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Dense diagonalization of every connected block.
pub struct DenseFull;

impl Eigensolver for DenseFull {
    fn name(&self) -> &'static str {
        "dense_full"
    }

    fn solve(&self, op: &SparseOperator, req: &SolveRequest) -> Result<Spectrum, SpectraError> {
        check_hermitian(op)?;
        let n = op.dim();
        let mut pairs: Vec<(f64, Option<Vec<C64>>)> = Vec::with_capacity(n);
        for block in blocks(op) {
            let m = block.len();
            let mut pos = BTreeMap::new();
            for (k, &i) in block.iter().enumerate() {
                pos.insert(i, k);
            }
            let mut a = Mat::<faer::c64>::zeros(m, m);
            for (r, &i) in block.iter().enumerate() {
                for (j, v) in op.row(i) {
                    a[(r, pos[&j])] = c(v);
                }
            }
            let e = a.self_adjoint_eigen(Side::Lower).map_err(|e| SpectraError::Solver(format!("{e:?}")))?;
            for k in 0..m {
                let vec = req.vectors.then(|| {
                    let mut v = vec![C64::new(0.0, 0.0); n];
                    for (r, &i) in block.iter().enumerate() {
                        let z = e.U()[(r, k)];
                        v[i] = C64::new(z.re, z.im);
                    }
                    v
                });
                pairs.push((e.S()[k].re, vec));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs.truncate(req.k.unwrap_or(n).min(n));
        let residuals = vec![0.0; pairs.len()];
        let (values, vectors): (Vec<f64>, Vec<Option<Vec<C64>>>) = pairs.into_iter().unzip();
        let vectors = req.vectors.then(|| vectors.into_iter().map(|v| v.expect("requested")).collect());
        Ok(Spectrum { values, vectors, residuals, solver: "dense_full" })
    }
}

/// Lanczos with full reorthogonalization, locking and deflation.
///
/// Converged Ritz pairs are locked from the bottom of each pass; once `k` are
/// locked, further passes in the complement verify nothing lower remains.
#[derive(Debug, Clone)]
pub struct IterativeLowestK {
    /// Krylov dimension of the first pass.
    pub krylov: usize,
    pub max_passes: usize,
}

impl Default for IterativeLowestK {
    fn default() -> Self {
        Self { krylov: 60, max_passes: 400 }
    }
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn orthogonalize(w: &mut [C64], against: &[Vec<C64>]) {
    for _ in 0..2 {
        for q in against {
            let p = dot(q, w);
            w.iter_mut().zip(q).for_each(|(x, y)| *x -= p * y);
        }
    }
}

struct RitzPair {
    value: f64,
    vector: Vec<C64>,
    residual: f64,
}

impl IterativeLowestK {
    /// One Krylov pass in the complement of `locked`. The projected matrix is
    /// formed explicitly, and an exhausted Krylov space is continued with a
    /// fresh random direction so degenerate copies are picked up.
    fn pass(&self, op: &SparseOperator, locked: &[Vec<C64>], m: usize, rng: &mut ChaCha8Rng) -> Option<Vec<RitzPair>> {
        let n = op.dim();
        let mut random = |against: &[Vec<C64>], basis: &[Vec<C64>]| -> Option<Vec<C64>> {
            let mut q: Vec<C64> = (0..n).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
            orthogonalize(&mut q, against);
            orthogonalize(&mut q, basis);
            let nq = norm(&q);
            (nq > 1e-8).then(|| q.into_iter().map(|x| x / nq).collect())
        };
        let mut basis = vec![random(locked, &[])?];
        let mut images: Vec<Vec<C64>> = Vec::new();
        let mut scale = 0.0f64;
        while images.len() < basis.len() {
            let j = images.len();
            let hv = op.apply(&basis[j]);
            scale = scale.max(norm(&hv));
            let mut w = hv.clone();
            images.push(hv);
            if basis.len() == m {
                break;
            }
            orthogonalize(&mut w, locked);
            orthogonalize(&mut w, &basis);
            let b = norm(&w);
            if b > 1e-8 * scale.max(1.0) {
                basis.push(w.into_iter().map(|x| x / b).collect());
            } else if let Some(q) = random(locked, &basis) {
                basis.push(q);
            }
        }
        let k = basis.len();
        let t = Mat::<faer::c64>::from_fn(k, k, |i, j| {
            let z = dot(&basis[i], &images[j]);
            faer::c64::new(z.re, z.im)
        });
        let e = t.self_adjoint_eigen(Side::Lower).ok()?;
        let pairs = (0..k)
            .map(|r| {
                let mut y = vec![C64::new(0.0, 0.0); n];
                let mut hy = vec![C64::new(0.0, 0.0); n];
                for i in 0..k {
                    let s = e.U()[(i, r)];
                    let s = C64::new(s.re, s.im);
                    y.iter_mut().zip(&basis[i]).for_each(|(x, v)| *x += v * s);
                    hy.iter_mut().zip(&images[i]).for_each(|(x, v)| *x += v * s);
                }
                let theta = e.S()[r].re;
                let ny = norm(&y);
                let residual = norm(&hy.iter().zip(&y).map(|(a, b)| a - b * theta).collect::<Vec<_>>()) / ny;
                y.iter_mut().for_each(|x| *x /= ny);
                RitzPair { value: theta, vector: y, residual }
            })
            .collect();
        Some(pairs)
    }
}

impl Eigensolver for IterativeLowestK {
    fn name(&self) -> &'static str {
        "iterative_lowest_k"
    }

    fn solve(&self, op: &SparseOperator, req: &SolveRequest) -> Result<Spectrum, SpectraError> {
        check_hermitian(op)?;
        let n = op.dim();
        let k = req.k.unwrap_or(n).min(n);
        let mut rng = ChaCha8Rng::seed_from_u64(req.seed);
        let mut locked: Vec<RitzPair> = Vec::new();
        let mut m = self.krylov.max(2 * k + 10);
        let mut worst = 0.0f64;
        for _ in 0..self.max_passes {
            let free = n - locked.len();
            if free == 0 {
                break;
            }
            let vecs: Vec<Vec<C64>> = locked.iter().map(|p| p.vector.clone()).collect();
            let Some(ritz) = self.pass(op, &vecs, m.min(free), &mut rng) else { break };
            let converged: Vec<RitzPair> = ritz.into_iter().take_while(|p| p.residual <= req.tol).collect();
            if converged.is_empty() {
                if m >= free {
                    return Err(SpectraError::NotConverged { found: locked.len(), wanted: k, residual: worst });
                }
                m = (2 * m).min(free);
                continue;
            }
            worst = worst.max(converged[0].residual);
            if locked.len() >= k {
                // verification pass: nothing below the locked set may remain
                let top = locked.iter().map(|p| p.value).fold(f64::NEG_INFINITY, f64::max);
                let low = converged.into_iter().next().expect("nonempty");
                if low.value >= top - req.tol {
                    break;
                }
                let worst_idx = locked.iter().enumerate().max_by(|a, b| a.1.value.total_cmp(&b.1.value)).expect("locked").0;
                locked.swap_remove(worst_idx);
                locked.push(low);
                continue;
            }
            let need = k - locked.len();
            locked.extend(converged.into_iter().take(need));
        }
        if locked.len() < k.min(n) {
            return Err(SpectraError::NotConverged { found: locked.len(), wanted: k, residual: worst });
        }
        locked.sort_by(|a, b| a.value.total_cmp(&b.value));
        let values = locked.iter().map(|p| p.value).collect();
        let residuals = locked.iter().map(|p| p.residual).collect();
        let vectors = req.vectors.then(|| locked.into_iter().map(|p| p.vector).collect());
        Ok(Spectrum { values, vectors, residuals, solver: "iterative_lowest_k" })
    }
}

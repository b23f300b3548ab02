use std::io::{BufRead, Write};
use std::sync::Arc;

use rayon::prelude::*;

use crate::{Basis, FockError, Result, C64, DROP_TOL};

/// `(row, col, value)`.
pub type Triplet = (usize, usize, C64);

/// Complex sparse matrix in compressed-row form, bound to one basis.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    basis: Arc<Basis>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseOperator {
    /// Sums duplicate entries and drops values at or below [`DROP_TOL`].
    pub fn from_triplets(basis: &Arc<Basis>, mut triplets: Vec<Triplet>) -> Self {
        let dim = basis.dim();
        triplets.par_sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "triplet ({r},{c}) outside dimension {dim}");
            if rows.last() == Some(&r) && cols.last() == Some(&c) {
                *vals.last_mut().unwrap() += v;
            } else {
                rows.push(r);
                cols.push(c);
                vals.push(v);
            }
        }
        let mut keep_cols = Vec::with_capacity(cols.len());
        let mut keep_vals = Vec::with_capacity(vals.len());
        for ((r, c), v) in rows.into_iter().zip(cols).zip(vals) {
            if v.norm() > DROP_TOL {
                row_ptr[r + 1] += 1;
                keep_cols.push(c);
                keep_vals.push(v);
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { basis: basis.clone(), row_ptr, cols: keep_cols, vals: keep_vals }
    }

    /// Builds the matrix of an operator from its action on basis states.
    ///
    /// `action(state, out)` pushes `(image, amplitude)` pairs; images outside the
    /// basis are dropped.
    pub fn from_action<F>(basis: &Arc<Basis>, action: F) -> Self
    where
        F: Fn(&[u8], &mut Vec<(Vec<u8>, C64)>) + Sync,
    {
        let triplets: Vec<Triplet> = (0..basis.dim())
            .into_par_iter()
            .fold(
                || (Vec::new(), Vec::new()),
                |(mut acc, mut out): (Vec<Triplet>, Vec<(Vec<u8>, C64)>), j| {
                    out.clear();
                    action(basis.state(j), &mut out);
                    for (img, amp) in out.drain(..) {
                        if let Some(i) = basis.index_of(&img) {
                            acc.push((i, j, amp));
                        }
                    }
                    (acc, out)
                },
            )
            .map(|(acc, _)| acc)
            .reduce(Vec::new, |mut a, mut b| {
                a.append(&mut b);
                a
            });
        Self::from_triplets(basis, triplets)
    }

    pub fn zero(basis: &Arc<Basis>) -> Self {
        Self::from_triplets(basis, Vec::new())
    }

    pub fn identity(basis: &Arc<Basis>) -> Self {
        Self::diagonal(basis, |_| 1.0)
    }

    /// Diagonal operator with entries `f(state)`.
    pub fn diagonal<F: Fn(&[u8]) -> f64 + Sync>(basis: &Arc<Basis>, f: F) -> Self {
        let t = (0..basis.dim()).map(|i| (i, i, C64::new(f(basis.state(i)), 0.0))).collect();
        Self::from_triplets(basis, t)
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = Triplet> + '_ {
        (0..self.dim()).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.basis, &other.basis) || self.basis.id() == other.basis.id() {
            Ok(())
        } else {
            Err(FockError::BasisMismatch { left: self.basis.id(), right: other.basis.id() })
        }
    }

    /// `Σ c_k A_k` over operators sharing one basis.
    pub fn linear_combination(terms: &[(C64, &SparseOperator)]) -> Result<Self> {
        let first = terms.first().expect("at least one term");
        for (_, t) in terms {
            first.1.check(t)?;
        }
        let mut trip = Vec::with_capacity(terms.iter().map(|t| t.1.nnz()).sum());
        for (c, t) in terms {
            trip.extend(t.iter().map(|(i, j, v)| (i, j, v * c)));
        }
        Ok(Self::from_triplets(&first.1.basis, trip))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Self::linear_combination(&[(C64::new(1.0, 0.0), self), (C64::new(1.0, 0.0), other)])
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Self::linear_combination(&[(C64::new(1.0, 0.0), self), (C64::new(-1.0, 0.0), other)])
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= c);
        if c.norm() <= DROP_TOL {
            return Self::zero(&self.basis);
        }
        out
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let dim = self.dim();
        let rows: Vec<Vec<(usize, C64)>> = (0..dim)
            .into_par_iter()
            .map_init(
                || (vec![C64::new(0.0, 0.0); dim], vec![false; dim], Vec::new()),
                |(acc, seen, touched), i| {
                    touched.clear();
                    for (k, a) in self.row(i) {
                        for (j, b) in other.row(k) {
                            if !seen[j] {
                                seen[j] = true;
                                touched.push(j);
                            }
                            acc[j] += a * b;
                        }
                    }
                    touched.sort_unstable();
                    let row = touched.iter().map(|&j| (j, acc[j])).collect();
                    for &j in touched.iter() {
                        acc[j] = C64::new(0.0, 0.0);
                        seen[j] = false;
                    }
                    row
                },
            )
            .collect();
        let trip = rows
            .into_iter()
            .enumerate()
            .flat_map(|(i, r)| r.into_iter().map(move |(j, v)| (i, j, v)))
            .collect();
        Ok(Self::from_triplets(&self.basis, trip))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let trip = self.iter().map(|(i, j, v)| (j, i, v.conj())).collect();
        Self::from_triplets(&self.basis, trip)
    }

    /// `AB − BA`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// `AB + BA`.
    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.add(&other.mul(self)?)
    }

    /// Matrix-vector product.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.dim(), "vector length must match basis dimension");
        (0..self.dim())
            .into_par_iter()
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    /// Largest entry magnitude, `‖A‖_max`.
    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `‖A − B‖_max`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    /// `‖A − A†‖_max`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.sub(&self.adjoint()).map(|d| d.max_abs()).unwrap_or(f64::INFINITY)
    }

    /// Position of the first off-diagonal entry above `tol`, if any.
    pub fn off_diagonal_entry(&self, tol: f64) -> Option<(usize, usize)> {
        self.iter().find(|&(i, j, v)| i != j && v.norm() > tol).map(|(i, j, _)| (i, j))
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        self.off_diagonal_entry(tol).is_none()
    }

    pub fn diagonal_values(&self) -> Vec<C64> {
        (0..self.dim()).map(|i| self.get(i, i)).collect()
    }

    /// `Tr(A† B)`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.check(other)?;
        Ok((0..self.dim())
            .map(|i| {
                let b: Vec<(usize, C64)> = other.row(i).collect();
                self.row(i)
                    .filter_map(|(j, a)| b.binary_search_by_key(&j, |e| e.0).ok().map(|k| a.conj() * b[k].1))
                    .sum::<C64>()
            })
            .sum())
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<C64> {
        let n = self.dim();
        let mut d = vec![C64::new(0.0, 0.0); n * n];
        for (i, j, v) in self.iter() {
            d[i * n + j] = v;
        }
        d
    }

    /// Sub-matrix on the given basis ordinals, rebound to `target`.
    pub fn submatrix(&self, target: &Arc<Basis>, indices: &[usize]) -> Self {
        let mut pos = vec![usize::MAX; self.dim()];
        for (k, &i) in indices.iter().enumerate() {
            pos[i] = k;
        }
        let trip = indices
            .iter()
            .enumerate()
            .flat_map(|(k, &i)| {
                let pos = &pos;
                self.row(i).filter_map(move |(j, v)| (pos[j] != usize::MAX).then(|| (k, pos[j], v)))
            })
            .collect();
        Self::from_triplets(target, trip)
    }

    /// Writes the documented triplet text format.
    ///
    /// ```text
    /// # sparse-operator v1
    /// # dim <n> nnz <k>
    /// <row> <col> <re> <im>
    /// ```
    /// Indices are 0-based basis ordinals; values use 17 significant digits.
    pub fn export_triplets<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# sparse-operator v1")?;
        writeln!(w, "# dim {} nnz {}", self.dim(), self.nnz())?;
        for (i, j, v) in self.iter() {
            writeln!(w, "{} {} {:.16e} {:.16e}", i, j, v.re, v.im)?;
        }
        Ok(())
    }

    /// Reads the triplet text format back onto `basis`.
    pub fn import_triplets<R: BufRead>(basis: &Arc<Basis>, r: R) -> Result<Self> {
        let mut trip = Vec::new();
        for line in r.lines() {
            let line = line.map_err(|e| FockError::Parse(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("# dim") {
                let n: usize = rest
                    .split_whitespace()
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| FockError::Parse(format!("bad header: {line}")))?;
                if n != basis.dim() {
                    return Err(FockError::Parse(format!("dimension {n} does not match basis {}", basis.dim())));
                }
                continue;
            }
            if line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 {
                return Err(FockError::Parse(format!("expected 4 fields: {line}")));
            }
            let p = |s: &str| s.parse::<f64>().map_err(|e| FockError::Parse(e.to_string()));
            let i: usize = f[0].parse().map_err(|_| FockError::Parse(line.to_string()))?;
            let j: usize = f[1].parse().map_err(|_| FockError::Parse(line.to_string()))?;
            if i >= basis.dim() || j >= basis.dim() {
                return Err(FockError::Parse(format!("index out of range: {line}")));
            }
            trip.push((i, j, C64::new(p(f[2])?, p(f[3])?)));
        }
        Ok(Self::from_triplets(basis, trip))
    }
}

use std::cmp::Ordering;
use std::collections::{HashMap, VecDeque};
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::{FockError, Result};

pub type Occupation = Box<[u8]>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Boson,
    Fermion,
}

/// Lattice object a mode lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Attachment {
    Vertex(usize),
    Link(usize),
    Free,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeSpec {
    pub name: String,
    pub statistics: Statistics,
    pub cap: u8,
    pub attachment: Attachment,
}

impl ModeSpec {
    pub fn boson(name: impl Into<String>, cap: u8, attachment: Attachment) -> Self {
        assert!(cap >= 1, "boson cap must be at least 1");
        Self { name: name.into(), statistics: Statistics::Boson, cap, attachment }
    }

    pub fn fermion(name: impl Into<String>, attachment: Attachment) -> Self {
        Self { name: name.into(), statistics: Statistics::Fermion, cap: 1, attachment }
    }

    pub fn is_fermion(&self) -> bool {
        self.statistics == Statistics::Fermion
    }
}

/// Linear law `Σ weight·n_mode == value`, or `≤ value` when `at_most` is set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub terms: Vec<(usize, i64)>,
    pub value: i64,
    pub at_most: bool,
}

impl Constraint {
    /// Total occupation of `modes` equals `value`.
    pub fn total(modes: impl IntoIterator<Item = usize>, value: i64) -> Self {
        Self { terms: modes.into_iter().map(|m| (m, 1)).collect(), value, at_most: false }
    }

    /// Total occupation of `modes` is at most `value`.
    pub fn at_most(modes: impl IntoIterator<Item = usize>, value: i64) -> Self {
        Self { terms: modes.into_iter().map(|m| (m, 1)).collect(), value, at_most: true }
    }

    /// Total of `left` equals total of `right`.
    pub fn balance(left: &[usize], right: &[usize]) -> Self {
        let mut terms: Vec<(usize, i64)> = left.iter().map(|&m| (m, 1)).collect();
        terms.extend(right.iter().map(|&m| (m, -1)));
        Self { terms, value: 0, at_most: false }
    }

    pub fn holds(&self, state: &[u8]) -> bool {
        let v = self.evaluate(state);
        if self.at_most {
            v <= self.value
        } else {
            v == self.value
        }
    }

    fn evaluate(&self, state: &[u8]) -> i64 {
        self.terms.iter().map(|&(m, w)| w * state[m] as i64).sum()
    }
}

/// Optional label describing how a basis was restricted.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SectorLabel {
    pub name: String,
    pub values: Vec<f64>,
}

static NEXT_BASIS_ID: AtomicU64 = AtomicU64::new(1);

/// Ordered set of occupation vectors over a fixed mode list.
///
/// States are kept in colexicographic order of the mode list: mode 0 varies
/// fastest.
#[derive(Debug)]
pub struct Basis {
    id: u64,
    modes: Vec<ModeSpec>,
    flat: Vec<u8>,
    index: HashMap<Occupation, usize>,
    sector: Option<SectorLabel>,
}

pub(crate) fn colex_cmp(a: &[u8], b: &[u8]) -> Ordering {
    a.iter().rev().cmp(b.iter().rev())
}

impl Basis {
    fn assemble(modes: Vec<ModeSpec>, flat: Vec<u8>, sector: Option<SectorLabel>) -> Arc<Self> {
        let n = modes.len();
        let dim = if n == 0 { 1 } else { flat.len() / n };
        let mut index = HashMap::with_capacity(dim);
        if n > 0 {
            for (i, s) in flat.chunks_exact(n).enumerate() {
                index.insert(s.to_vec().into_boxed_slice(), i);
            }
        } else {
            index.insert(Vec::new().into_boxed_slice(), 0);
        }
        Arc::new(Self {
            id: NEXT_BASIS_ID.fetch_add(1, AtomicOrdering::Relaxed),
            modes,
            flat,
            index,
            sector,
        })
    }

    /// All occupation vectors obeying the caps and every constraint.
    pub fn enumerate(modes: Vec<ModeSpec>, constraints: &[Constraint], dim_cap: usize) -> Result<Arc<Self>> {
        for c in constraints {
            if let Some(&(m, _)) = c.terms.iter().find(|(m, _)| *m >= modes.len()) {
                return Err(FockError::UnknownMode(m));
            }
        }
        let n = modes.len();
        if n == 0 {
            return Ok(Self::assemble(modes, Vec::new(), None));
        }
        // remaining[c][k]: (min, max) contribution of modes 0..k for constraint c
        let bounds: Vec<Vec<(i64, i64)>> = constraints
            .iter()
            .map(|c| {
                let mut w = vec![0i64; n];
                for &(m, wt) in &c.terms {
                    w[m] += wt;
                }
                let mut acc = vec![(0i64, 0i64); n + 1];
                for k in 0..n {
                    let span = w[k] * modes[k].cap as i64;
                    acc[k + 1] = (acc[k].0 + span.min(0), acc[k].1 + span.max(0));
                }
                acc
            })
            .collect();
        let weights: Vec<Vec<i64>> = constraints
            .iter()
            .map(|c| {
                let mut w = vec![0i64; n];
                for &(m, wt) in &c.terms {
                    w[m] += wt;
                }
                w
            })
            .collect();

        // depth-first from the most significant mode; ascending values give colex order
        let mut flat = Vec::new();
        let mut state = vec![0u8; n];
        let mut partial = vec![0i64; constraints.len()];
        let mut count = 0usize;
        fn rec(
            k: usize,
            modes: &[ModeSpec],
            weights: &[Vec<i64>],
            bounds: &[Vec<(i64, i64)>],
            constraints: &[Constraint],
            state: &mut Vec<u8>,
            partial: &mut Vec<i64>,
            flat: &mut Vec<u8>,
            count: &mut usize,
            cap: usize,
        ) -> Result<()> {
            // modes k.. are fixed; modes 0..k remain
            for (c, con) in constraints.iter().enumerate() {
                let need = con.value - partial[c];
                let (lo, hi) = bounds[c][k];
                if need < lo || (!con.at_most && need > hi) {
                    return Ok(());
                }
            }
            if k == 0 {
                *count += 1;
                if *count > cap {
                    return Err(FockError::DimensionCap { cap });
                }
                flat.extend_from_slice(state);
                return Ok(());
            }
            let m = k - 1;
            for v in 0..=modes[m].cap {
                state[m] = v;
                for c in 0..constraints.len() {
                    partial[c] += weights[c][m] * v as i64;
                }
                let r = rec(m, modes, weights, bounds, constraints, state, partial, flat, count, cap);
                for c in 0..constraints.len() {
                    partial[c] -= weights[c][m] * v as i64;
                }
                r?;
            }
            state[m] = 0;
            Ok(())
        }
        rec(n, &modes, &weights, &bounds, constraints, &mut state, &mut partial, &mut flat, &mut count, dim_cap)?;
        if count == 0 {
            return Err(FockError::EmptyBasis);
        }
        Ok(Self::assemble(modes, flat, None))
    }

    /// Basis from an explicit state list (sorted colex, duplicates removed).
    pub fn from_states(
        modes: Vec<ModeSpec>,
        states: impl IntoIterator<Item = Vec<u8>>,
        sector: Option<SectorLabel>,
    ) -> Result<Arc<Self>> {
        let n = modes.len();
        let mut list: Vec<Vec<u8>> = Vec::new();
        for s in states {
            if s.len() != n {
                return Err(FockError::ModeCount { expected: n, got: s.len() });
            }
            for (m, &v) in s.iter().enumerate() {
                if v > modes[m].cap {
                    return Err(FockError::CapViolation { mode: m, value: v });
                }
            }
            list.push(s);
        }
        list.sort_by(|a, b| colex_cmp(a, b));
        list.dedup();
        let flat = list.concat();
        Ok(Self::assemble(modes, flat, sector))
    }

    /// States reachable from `seeds` under `expand`, breadth first.
    ///
    /// Returns the basis and the BFS depth of every state (indexed by the
    /// basis ordinal). `max_depth = None` explores to closure.
    pub fn reachable<F>(
        modes: Vec<ModeSpec>,
        seeds: &[Vec<u8>],
        max_depth: Option<usize>,
        dim_cap: usize,
        mut expand: F,
    ) -> Result<(Arc<Self>, Vec<usize>)>
    where
        F: FnMut(&[u8], &mut Vec<Vec<u8>>),
    {
        let mut depth: HashMap<Vec<u8>, usize> = HashMap::new();
        let mut queue = VecDeque::new();
        for s in seeds {
            if s.len() != modes.len() {
                return Err(FockError::ModeCount { expected: modes.len(), got: s.len() });
            }
            if depth.insert(s.clone(), 0).is_none() {
                queue.push_back(s.clone());
            }
        }
        let mut out = Vec::new();
        while let Some(s) = queue.pop_front() {
            let d = depth[&s];
            if max_depth.is_some_and(|md| d >= md) {
                continue;
            }
            out.clear();
            expand(&s, &mut out);
            for t in out.drain(..) {
                if t.iter().zip(&modes).any(|(&v, m)| v > m.cap) {
                    continue;
                }
                if !depth.contains_key(&t) {
                    if depth.len() >= dim_cap {
                        return Err(FockError::DimensionCap { cap: dim_cap });
                    }
                    depth.insert(t.clone(), d + 1);
                    queue.push_back(t);
                }
            }
        }
        let basis = Self::from_states(modes, depth.keys().cloned(), None)?;
        let depths = (0..basis.dim()).map(|i| depth[basis.state(i)]).collect();
        Ok((basis, depths))
    }

    pub(crate) fn with_sector(modes: Vec<ModeSpec>, flat: Vec<u8>, sector: SectorLabel) -> Arc<Self> {
        Self::assemble(modes, flat, Some(sector))
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn dim(&self) -> usize {
        if self.modes.is_empty() {
            1
        } else {
            self.flat.len() / self.modes.len()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.dim() == 0
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn modes(&self) -> &[ModeSpec] {
        &self.modes
    }

    pub fn sector(&self) -> Option<&SectorLabel> {
        self.sector.as_ref()
    }

    pub fn state(&self, i: usize) -> &[u8] {
        let n = self.modes.len();
        &self.flat[i * n..(i + 1) * n]
    }

    pub fn states(&self) -> impl Iterator<Item = &[u8]> + '_ {
        (0..self.dim()).map(move |i| self.state(i))
    }

    pub fn index_of(&self, state: &[u8]) -> Option<usize> {
        self.index.get(state).copied()
    }

    /// Index of the first mode with the given name.
    pub fn mode_index(&self, name: &str) -> Option<usize> {
        self.modes.iter().position(|m| m.name == name)
    }
}

//! Rectangular lattices in one or two spatial dimensions.
//!
//! Vertices are ordered lexicographically by coordinate (first axis most
//! significant). Links are ordered by source vertex, then direction. A link is
//! named by its source vertex and direction; its target is the neighbour one
//! step along that direction (wrapping for periodic axes).
//!
//! Plaquettes are anchored at their lower-left vertex `n` and list their links
//! in the order n→n+1̂ (link 1), n+1̂→n+1̂+2̂ (link 2), n+2̂→n+1̂+2̂ (link 3,
//! reversed) and n→n+2̂ (link 4, reversed).

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("spatial dimension {0} is not supported, expected 1 or 2")]
    Dimension(usize),
    #[error("expected {expected} extents/boundaries, got {got}")]
    ExtentCount { expected: usize, got: usize },
    #[error("extent {extent} along axis {axis} is below 2")]
    ExtentTooSmall { axis: usize, extent: usize },
    #[error("periodic axis {axis} has odd extent {extent}; staggering would be inconsistent")]
    OddPeriodic { axis: usize, extent: usize },
    #[error("vertex {0} is not part of the lattice")]
    UnknownVertex(usize),
    #[error("geometry json: {0}")]
    Json(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinkId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlaquetteId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: VertexId,
    pub coords: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    pub id: LinkId,
    pub source: VertexId,
    pub target: VertexId,
    pub direction: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaquetteLink {
    pub link: LinkId,
    pub reversed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plaquette {
    pub id: PlaquetteId,
    pub origin: VertexId,
    pub links: [PlaquetteLink; 4],
}

/// Staggering and loop-method role of a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexClass {
    pub parity_sign: i8,
    pub psi_special: bool,
    pub chi_special: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeGeometry {
    pub spatial_dim: usize,
    pub extents: Vec<usize>,
    pub boundary: Vec<Boundary>,
    pub vertices: Vec<Vertex>,
    pub links: Vec<Link>,
    pub plaquettes: Vec<Plaquette>,
}

/// Builds a lattice with one boundary condition per axis.
pub fn build_lattice(
    spatial_dim: usize,
    extents: &[usize],
    boundary: &[Boundary],
) -> Result<LatticeGeometry, LatticeError> {
    if !(1..=2).contains(&spatial_dim) {
        return Err(LatticeError::Dimension(spatial_dim));
    }
    if extents.len() != spatial_dim || boundary.len() != spatial_dim {
        return Err(LatticeError::ExtentCount {
            expected: spatial_dim,
            got: extents.len().min(boundary.len()),
        });
    }
    for (axis, (&extent, &b)) in extents.iter().zip(boundary).enumerate() {
        if extent < 2 {
            return Err(LatticeError::ExtentTooSmall { axis, extent });
        }
        if b == Boundary::Periodic && extent % 2 == 1 {
            return Err(LatticeError::OddPeriodic { axis, extent });
        }
    }

    let n_vertices: usize = extents.iter().product();
    let mut vertices = Vec::with_capacity(n_vertices);
    for idx in 0..n_vertices {
        vertices.push(Vertex {
            id: VertexId(idx),
            coords: unflatten(idx, extents),
        });
    }

    let mut geom = LatticeGeometry {
        spatial_dim,
        extents: extents.to_vec(),
        boundary: boundary.to_vec(),
        vertices,
        links: Vec::new(),
        plaquettes: Vec::new(),
    };

    let mut links = Vec::new();
    for v in 0..n_vertices {
        for dir in 0..spatial_dim {
            if let Some(t) = geom.step(VertexId(v), dir) {
                links.push(Link {
                    id: LinkId(links.len()),
                    source: VertexId(v),
                    target: t,
                    direction: dir,
                });
            }
        }
    }
    geom.links = links;

    if spatial_dim == 2 {
        let mut plaquettes = Vec::new();
        for v in 0..n_vertices {
            let n = VertexId(v);
            let (Some(n1), Some(n2)) = (geom.step(n, 0), geom.step(n, 1)) else {
                continue;
            };
            let (Some(l1), Some(l2), Some(l3), Some(l4)) = (
                geom.link_from(n, 0),
                geom.link_from(n1, 1),
                geom.link_from(n2, 0),
                geom.link_from(n, 1),
            ) else {
                continue;
            };
            plaquettes.push(Plaquette {
                id: PlaquetteId(plaquettes.len()),
                origin: n,
                links: [
                    PlaquetteLink { link: l1, reversed: false },
                    PlaquetteLink { link: l2, reversed: false },
                    PlaquetteLink { link: l3, reversed: true },
                    PlaquetteLink { link: l4, reversed: true },
                ],
            });
        }
        geom.plaquettes = plaquettes;
    }
    Ok(geom)
}

/// Open chain of `sites` vertices.
pub fn chain(sites: usize) -> Result<LatticeGeometry, LatticeError> {
    build_lattice(1, &[sites], &[Boundary::Open])
}

/// The open 2×2 lattice: one plaquette, four links.
pub fn single_plaquette() -> LatticeGeometry {
    build_lattice(2, &[2, 2], &[Boundary::Open, Boundary::Open]).expect("2x2 open lattice is valid")
}

fn unflatten(mut idx: usize, extents: &[usize]) -> Vec<usize> {
    let mut coords = vec![0; extents.len()];
    for axis in (0..extents.len()).rev() {
        coords[axis] = idx % extents[axis];
        idx /= extents[axis];
    }
    coords
}

fn flatten(coords: &[usize], extents: &[usize]) -> usize {
    coords.iter().zip(extents).fold(0, |acc, (&c, &e)| acc * e + c)
}

impl LatticeGeometry {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_links(&self) -> usize {
        self.links.len()
    }

    pub fn n_plaquettes(&self) -> usize {
        self.plaquettes.len()
    }

    pub fn vertex_at(&self, coords: &[usize]) -> Option<VertexId> {
        if coords.len() != self.spatial_dim || coords.iter().zip(&self.extents).any(|(c, e)| c >= e) {
            return None;
        }
        Some(VertexId(flatten(coords, &self.extents)))
    }

    /// Neighbour one step along `dir`, if it exists.
    pub fn step(&self, v: VertexId, dir: usize) -> Option<VertexId> {
        let mut c = self.vertices.get(v.0)?.coords.clone();
        c[dir] += 1;
        if c[dir] == self.extents[dir] {
            match self.boundary[dir] {
                Boundary::Open => return None,
                Boundary::Periodic => c[dir] = 0,
            }
        }
        Some(VertexId(flatten(&c, &self.extents)))
    }

    /// Link whose source is `v` and direction `dir`.
    pub fn link_from(&self, v: VertexId, dir: usize) -> Option<LinkId> {
        // links of a vertex are contiguous and ordered by direction
        let start = self.links.partition_point(|l| l.source < v);
        self.links[start..]
            .iter()
            .take_while(|l| l.source == v)
            .find(|l| l.direction == dir)
            .map(|l| l.id)
    }

    pub fn link(&self, id: LinkId) -> &Link {
        &self.links[id.0]
    }

    /// (positive links, negative links): links starting and ending at `v`.
    pub fn incident_links(&self, v: VertexId) -> Result<(Vec<LinkId>, Vec<LinkId>), LatticeError> {
        if v.0 >= self.n_vertices() {
            return Err(LatticeError::UnknownVertex(v.0));
        }
        let pos = self.links.iter().filter(|l| l.source == v).map(|l| l.id).collect();
        let neg = self.links.iter().filter(|l| l.target == v).map(|l| l.id).collect();
        Ok((pos, neg))
    }

    /// (−1)^(n1+n2).
    pub fn parity_sign(&self, v: VertexId) -> i8 {
        let s: usize = self.vertices[v.0].coords.iter().sum();
        if s % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn vertex_class(&self, v: VertexId) -> VertexClass {
        let c = &self.vertices[v.0].coords;
        let two_d = self.spatial_dim == 2;
        VertexClass {
            parity_sign: self.parity_sign(v),
            psi_special: two_d && c.iter().all(|x| x % 2 == 0),
            chi_special: two_d && c.iter().all(|x| x % 2 == 1),
        }
    }

    /// Loop-method vertex classes; `None` for chains.
    pub fn vertex_classes(&self) -> Option<Vec<VertexClass>> {
        (self.spatial_dim == 2).then(|| {
            (0..self.n_vertices()).map(|v| self.vertex_class(VertexId(v))).collect()
        })
    }

    /// Vertices of a plaquette in traversal order n, n+1̂, n+1̂+2̂, n+2̂.
    pub fn plaquette_vertices(&self, p: PlaquetteId) -> [VertexId; 4] {
        let pl = &self.plaquettes[p.0];
        let l = |i: usize| self.link(pl.links[i].link);
        [l(0).source, l(1).source, l(1).target, l(3).target]
    }

    /// Walks the plaquette's links and reports whether the walk returns to the origin.
    pub fn plaquette_closes(&self, p: PlaquetteId) -> bool {
        let pl = &self.plaquettes[p.0];
        let mut at = pl.origin;
        for step in &pl.links {
            let link = self.link(step.link);
            let (from, to) = if step.reversed {
                (link.target, link.source)
            } else {
                (link.source, link.target)
            };
            if from != at {
                return false;
            }
            at = to;
        }
        at == pl.origin
    }

    /// Plaquettes containing `link`, with the orientation flag used there.
    pub fn plaquettes_of_link(&self, link: LinkId) -> Vec<(PlaquetteId, bool)> {
        self.plaquettes
            .iter()
            .flat_map(|p| {
                p.links
                    .iter()
                    .filter(move |pl| pl.link == link)
                    .map(move |pl| (p.id, pl.reversed))
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("geometry serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, LatticeError> {
        serde_json::from_str(s).map_err(|e| LatticeError::Json(e.to_string()))
    }
}

use std::fmt;

use serde::{Deserialize, Serialize};

use super::system::{ConeType, ConeTypeSystem, LocalVertex, TypeId};

/// Which incident tree edge a virtual edge (or an exit) belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    Parent,
    Child(u16),
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Parent => f.write_str("parent"),
            Side::Child(i) => write!(f, "child{i}"),
        }
    }
}

/// An edge of a part graph. Between two vertices there is at most one virtual
/// edge per side, so the side and the endpoints identify it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EdgeRef {
    Real(u16),
    Virtual(Side),
}

impl EdgeRef {
    pub fn is_real(self) -> bool {
        matches!(self, EdgeRef::Real(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VirtualEdge {
    pub side: Side,
    pub a: LocalVertex,
    pub b: LocalVertex,
}

/// The graph of one cone type: its own edges plus a complete graph of virtual
/// edges on every incident adhesion set.
#[derive(Clone, Debug)]
pub struct PartGraph {
    pub type_id: TypeId,
    pub size: usize,
    pub is_root: bool,
    /// Cone type behind each child slot.
    pub child_types: Vec<TypeId>,
    pub real_edges: Vec<(LocalVertex, LocalVertex)>,
    pub virtual_edges: Vec<VirtualEdge>,
    /// Adhesion vertices per side; index 0 is the parent side, slot `i` is at `i + 1`.
    adhesions: Vec<Vec<LocalVertex>>,
    /// Position of each vertex inside each adhesion, if any.
    positions: Vec<Vec<Option<u8>>>,
    /// Outgoing (edge, neighbour) pairs per vertex, in canonical edge order.
    adjacency: Vec<Vec<(EdgeRef, LocalVertex)>>,
}

fn side_index(side: Side) -> usize {
    match side {
        Side::Parent => 0,
        Side::Child(i) => i as usize + 1,
    }
}

impl PartGraph {
    pub fn new(system: &ConeTypeSystem, type_id: TypeId) -> Self {
        let ty: &ConeType = &system.types[type_id];
        let is_root = system.is_root(type_id);
        let mut adhesions = vec![ty.parent_adhesion.clone()];
        adhesions.extend(ty.children.iter().map(|c| c.embedding.clone()));

        let mut positions = vec![vec![None; ty.part_size]; adhesions.len()];
        for (s, ad) in adhesions.iter().enumerate() {
            for (p, &x) in ad.iter().enumerate() {
                positions[s][x] = Some(p as u8);
            }
        }

        let real_edges: Vec<_> = ty.own_edges.iter().map(|e| (e.u, e.v)).collect();
        let mut virtual_edges = Vec::new();
        for (s, ad) in adhesions.iter().enumerate() {
            let side = if s == 0 {
                Side::Parent
            } else {
                Side::Child(s as u16 - 1)
            };
            let mut sorted = ad.clone();
            sorted.sort_unstable();
            for (i, &a) in sorted.iter().enumerate() {
                for &b in &sorted[i + 1..] {
                    virtual_edges.push(VirtualEdge { side, a, b });
                }
            }
        }

        let mut adjacency = vec![Vec::new(); ty.part_size];
        for (i, &(u, v)) in real_edges.iter().enumerate() {
            adjacency[u].push((EdgeRef::Real(i as u16), v));
            adjacency[v].push((EdgeRef::Real(i as u16), u));
        }
        for ve in &virtual_edges {
            adjacency[ve.a].push((EdgeRef::Virtual(ve.side), ve.b));
            adjacency[ve.b].push((EdgeRef::Virtual(ve.side), ve.a));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }

        PartGraph {
            type_id,
            size: ty.part_size,
            is_root,
            child_types: ty.children.iter().map(|c| c.child_type).collect(),
            real_edges,
            virtual_edges,
            adhesions,
            positions,
            adjacency,
        }
    }

    pub fn slot_count(&self) -> usize {
        self.adhesions.len() - 1
    }

    pub fn adhesion(&self, side: Side) -> &[LocalVertex] {
        &self.adhesions[side_index(side)]
    }

    /// Position of `x` in the adhesion of `side`.
    pub fn position(&self, side: Side, x: LocalVertex) -> Option<usize> {
        self.positions[side_index(side)][x].map(usize::from)
    }

    pub fn in_adhesion(&self, side: Side, x: LocalVertex) -> bool {
        self.positions[side_index(side)][x].is_some()
    }

    pub fn neighbours(&self, x: LocalVertex) -> &[(EdgeRef, LocalVertex)] {
        &self.adjacency[x]
    }

    pub fn virtual_count(&self, side: Side) -> usize {
        self.virtual_edges.iter().filter(|e| e.side == side).count()
    }
}

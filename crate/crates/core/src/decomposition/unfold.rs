use std::collections::{HashMap, VecDeque};

use serde_json::{json, Value};

use super::system::{ConeTypeSystem, LocalVertex, TypeId};
use crate::alphabet::{Alphabet, Symbol};
use crate::error::{Error, Result};
use crate::limits::Limits;

pub type NodeId = usize;
pub type VertexId = usize;
pub type EdgeId = usize;

/// Slot indices from the root down to a tree node.
pub type NodePath = Vec<u16>;

#[derive(Clone, Debug)]
pub struct TreeNode {
    pub path: NodePath,
    pub type_id: TypeId,
    pub parent: Option<NodeId>,
    /// Child slots; `None` beyond the unfolding depth.
    pub children: Vec<Option<NodeId>>,
    /// Local vertex to glued vertex.
    pub vertices: Vec<VertexId>,
    /// Own edge index to glued edge.
    pub edges: Vec<EdgeId>,
}

impl TreeNode {
    pub fn depth(&self) -> usize {
        self.path.len()
    }

    pub fn slot(&self) -> Option<u16> {
        self.path.last().copied()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GluedEdge {
    pub owner: NodeId,
    pub local: u16,
    pub u: VertexId,
    pub v: VertexId,
    pub label_uv: Symbol,
    pub label_vu: Symbol,
}

impl GluedEdge {
    pub fn label_from(&self, from: VertexId) -> Symbol {
        if from == self.u {
            self.label_uv
        } else {
            self.label_vu
        }
    }

    pub fn other(&self, x: VertexId) -> VertexId {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// A finite truncation of the decomposition tree together with its glued graph.
/// Nodes are numbered breadth first with children in slot order, and glued
/// vertices in order of first appearance, so a deeper unfolding extends a
/// shallower one id for id.
#[derive(Clone, Debug)]
pub struct UnfoldedDecomposition {
    pub depth: usize,
    pub nodes: Vec<TreeNode>,
    pub edges: Vec<GluedEdge>,
    pub origin: VertexId,
    vertex_nodes: Vec<Vec<(NodeId, LocalVertex)>>,
    by_path: HashMap<NodePath, NodeId>,
}

pub fn unfold(
    system: &ConeTypeSystem,
    depth: usize,
    limits: &Limits,
) -> Result<UnfoldedDecomposition> {
    let mut nodes: Vec<TreeNode> = Vec::new();
    let mut edges = Vec::new();
    let mut vertex_nodes: Vec<Vec<(NodeId, LocalVertex)>> = Vec::new();
    let mut queue = VecDeque::new();

    let root_ty = &system.types[system.root_type];
    let root_vertices: Vec<VertexId> = (0..root_ty.part_size).collect();
    vertex_nodes.resize(root_ty.part_size, Vec::new());
    queue.push_back((Vec::new(), system.root_type, None, root_vertices));

    while let Some((path, type_id, parent, vertices)) = queue.pop_front() {
        let id = nodes.len();
        let ty = &system.types[type_id];
        for (x, &g) in vertices.iter().enumerate() {
            vertex_nodes[g].push((id, x));
        }
        let mut own = Vec::with_capacity(ty.own_edges.len());
        for (i, e) in ty.own_edges.iter().enumerate() {
            own.push(edges.len());
            edges.push(GluedEdge {
                owner: id,
                local: i as u16,
                u: vertices[e.u],
                v: vertices[e.v],
                label_uv: e.label_uv,
                label_vu: e.label_vu,
            });
        }
        if let Some(p) = parent {
            let slot = *path.last().unwrap() as usize;
            let n: &mut TreeNode = &mut nodes[p];
            n.children[slot] = Some(id);
        }
        let depth_here = path.len();
        if depth_here < depth {
            for (s, slot) in ty.children.iter().enumerate() {
                let child_ty = &system.types[slot.child_type];
                let mut cv = vec![usize::MAX; child_ty.part_size];
                for (pos, &x) in child_ty.parent_adhesion.iter().enumerate() {
                    cv[x] = vertices[slot.embedding[pos]];
                }
                for g in cv.iter_mut().filter(|g| **g == usize::MAX) {
                    *g = vertex_nodes.len();
                    vertex_nodes.push(Vec::new());
                }
                if vertex_nodes.len() > limits.max_cells {
                    return Err(Error::cap("glued vertices", limits.max_cells));
                }
                let mut cp = path.clone();
                cp.push(s as u16);
                queue.push_back((cp, slot.child_type, Some(id), cv));
            }
        }
        nodes.push(TreeNode {
            path,
            type_id,
            parent,
            children: vec![None; ty.children.len()],
            vertices,
            edges: own,
        });
    }

    let by_path = nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.path.clone(), i))
        .collect();
    Ok(UnfoldedDecomposition {
        depth,
        origin: nodes[0].vertices[system.root_vertex],
        nodes,
        edges,
        vertex_nodes,
        by_path,
    })
}

impl UnfoldedDecomposition {
    pub const ROOT: NodeId = 0;

    pub fn vertex_count(&self) -> usize {
        self.vertex_nodes.len()
    }

    pub fn node_by_path(&self, path: &[u16]) -> Option<NodeId> {
        self.by_path.get(path).copied()
    }

    /// Nodes whose part contains `v`, with the local name of `v` there.
    pub fn nodes_containing(&self, v: VertexId) -> &[(NodeId, LocalVertex)] {
        &self.vertex_nodes[v]
    }

    pub fn local_of(&self, node: NodeId, v: VertexId) -> Option<LocalVertex> {
        self.vertex_nodes[v]
            .iter()
            .find(|&&(n, _)| n == node)
            .map(|&(_, x)| x)
    }

    pub fn is_ancestor_or_self(&self, a: NodeId, b: NodeId) -> bool {
        let (pa, pb) = (&self.nodes[a].path, &self.nodes[b].path);
        pb.len() >= pa.len() && pb[..pa.len()] == pa[..]
    }

    /// Glued edge joining `a` and `b`, if any.
    pub fn edge_between(&self, a: VertexId, b: VertexId) -> Option<EdgeId> {
        self.vertex_nodes[a].iter().find_map(|&(n, _)| {
            self.nodes[n].edges.iter().copied().find(|&e| {
                let ge = &self.edges[e];
                (ge.u == a && ge.v == b) || (ge.u == b && ge.v == a)
            })
        })
    }

    pub fn graph(&self) -> FiniteGraph {
        let mut arcs = Vec::with_capacity(2 * self.edges.len());
        for e in &self.edges {
            arcs.push(Arc {
                from: e.u,
                label: e.label_uv,
                to: e.v,
            });
            arcs.push(Arc {
                from: e.v,
                label: e.label_vu,
                to: e.u,
            });
        }
        FiniteGraph::new(self.vertex_count(), self.origin, arcs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Arc {
    pub from: VertexId,
    pub label: Symbol,
    pub to: VertexId,
}

/// A finite directed labelled graph; every undirected edge appears as two arcs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGraph {
    pub vertex_count: usize,
    pub origin: VertexId,
    arcs: Vec<Arc>,
    offsets: Vec<usize>,
}

impl FiniteGraph {
    pub fn new(vertex_count: usize, origin: VertexId, mut arcs: Vec<Arc>) -> Self {
        arcs.sort_unstable();
        arcs.dedup();
        let mut offsets = vec![0; vertex_count + 1];
        for a in &arcs {
            offsets[a.from + 1] += 1;
        }
        for i in 0..vertex_count {
            offsets[i + 1] += offsets[i];
        }
        FiniteGraph {
            vertex_count,
            origin,
            arcs,
            offsets,
        }
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    /// Outgoing arcs of `v`, sorted by label.
    pub fn out(&self, v: VertexId) -> &[Arc] {
        &self.arcs[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn undirected_edge_count(&self) -> usize {
        self.arcs.len() / 2
    }

    /// First vertex where two outgoing arcs share a label.
    pub fn label_clash(&self) -> Option<(VertexId, Symbol)> {
        self.arcs
            .windows(2)
            .find(|w| w[0].from == w[1].from && w[0].label == w[1].label)
            .map(|w| (w[0].from, w[0].label))
    }

    /// Breadth-first distances from the origin (`usize::MAX` if unreachable).
    pub fn distances(&self) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.vertex_count];
        let mut queue = VecDeque::from([self.origin]);
        dist[self.origin] = 0;
        while let Some(v) = queue.pop_front() {
            for a in self.out(v) {
                if dist[a.to] == usize::MAX {
                    dist[a.to] = dist[v] + 1;
                    queue.push_back(a.to);
                }
            }
        }
        dist
    }

    /// Subgraph induced by the vertices within distance `radius`, renumbered
    /// in breadth-first order with arcs explored by label.
    pub fn ball(&self, radius: usize) -> FiniteGraph {
        let dist = self.distances();
        let mut id = vec![usize::MAX; self.vertex_count];
        let mut order = vec![self.origin];
        id[self.origin] = 0;
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for a in self.out(v) {
                if dist[a.to] <= radius && id[a.to] == usize::MAX {
                    id[a.to] = order.len();
                    order.push(a.to);
                }
            }
        }
        let arcs = self
            .arcs
            .iter()
            .filter(|a| id[a.from] != usize::MAX && id[a.to] != usize::MAX)
            .map(|a| Arc {
                from: id[a.from],
                label: a.label,
                to: id[a.to],
            })
            .collect();
        FiniteGraph::new(order.len(), 0, arcs)
    }

    /// Canonical JSON: sorted keys, vertices ascending, arcs sorted by (from, label, to).
    pub fn to_json(&self, alphabet: &Alphabet) -> Value {
        let edges: Vec<Value> = self
            .arcs
            .iter()
            .map(|a| json!({"from": a.from, "label": alphabet.label(a.label), "to": a.to}))
            .collect();
        json!({
            "origin": self.origin,
            "vertices": (0..self.vertex_count).collect::<Vec<_>>(),
            "edges": edges,
        })
    }
}

/// Ball of radius `radius` around the origin, found by unfolding deeper until
/// the ball stops changing for `limits.stable_increments` consecutive steps.
pub fn extract_ball(
    system: &ConeTypeSystem,
    radius: usize,
    limits: &Limits,
) -> Result<FiniteGraph> {
    extract_ball_with_step(system, radius, 1, limits)
}

pub fn extract_ball_with_step(
    system: &ConeTypeSystem,
    radius: usize,
    step: usize,
    limits: &Limits,
) -> Result<FiniteGraph> {
    let step = step.max(1);
    let mut depth = 0;
    let mut current = unfold(system, depth, limits)?.graph().ball(radius);
    let mut stable = 0;
    while stable < limits.stable_increments {
        depth += step;
        if depth > limits.max_unfold_depth {
            return Err(Error::NonStabilization(format!(
                "ball of radius {radius} still changing at unfolding depth {}",
                limits.max_unfold_depth
            )));
        }
        let next = unfold(system, depth, limits)?.graph().ball(radius);
        if next == current {
            stable += 1;
        } else {
            stable = 0;
            current = next;
        }
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn lim() -> Limits {
        Limits::default()
    }

    #[test]
    fn line_depths() {
        let sys = corpus::system("line").unwrap();
        let d0 = unfold(&sys, 0, &lim()).unwrap();
        assert_eq!(d0.vertex_count(), 2);
        assert_eq!(d0.graph().undirected_edge_count(), 1);

        let d2 = unfold(&sys, 2, &lim()).unwrap();
        let g = d2.graph();
        assert_eq!(g.vertex_count, 6);
        assert_eq!(g.undirected_edge_count(), 5);
        // a path: two endpoints of degree one, the rest of degree two
        let mut degrees: Vec<_> = (0..6).map(|v| g.degree(v)).collect();
        degrees.sort();
        assert_eq!(degrees, [1, 1, 2, 2, 2, 2]);
    }

    #[test]
    fn tree3_origin_has_degree_three() {
        let sys = corpus::system("tree3").unwrap();
        let d = unfold(&sys, 1, &lim()).unwrap();
        let g = d.graph();
        assert_eq!(g.degree(g.origin), 3);
        assert_eq!(g.vertex_count, 4);
    }

    #[test]
    fn balls() {
        let line = corpus::system("line").unwrap();
        let b = extract_ball(&line, 3, &lim()).unwrap();
        assert_eq!((b.vertex_count, b.undirected_edge_count()), (7, 6));

        let ladder = corpus::system("ladder").unwrap();
        let b = extract_ball(&ladder, 1, &lim()).unwrap();
        assert_eq!(b.vertex_count, 4);
        assert_eq!(b.degree(b.origin), 3);
    }

    #[test]
    fn ball_does_not_depend_on_schedule() {
        for name in corpus::NAMES {
            let sys = corpus::system(name).unwrap();
            let a = extract_ball_with_step(&sys, 4, 1, &lim()).unwrap();
            let b = extract_ball_with_step(&sys, 4, 2, &lim()).unwrap();
            assert_eq!(a, b, "{name}");
        }
    }

    #[test]
    fn vertex_cap_is_enforced() {
        let sys = corpus::system("tree3").unwrap();
        let tight = Limits {
            max_cells: 10,
            ..Limits::default()
        };
        assert!(matches!(
            unfold(&sys, 6, &tight),
            Err(Error::ResourceCap { .. })
        ));
    }
}

//! Gluing configurations across tree edges until one walk remains, and the
//! inverse: splitting a self-avoiding walk into one configuration per part.

mod enumerate;

use std::collections::{BTreeMap, HashSet};

use serde_json::{json, Value};

use crate::alphabet::Word;
use crate::config::{
    boring_completion, compatible, is_boring, weight, Configuration, Exit, PartWalk,
};
use crate::decomposition::{
    ConeTypeSystem, EdgeId, EdgeRef, NodeId, NodePath, PartGraph, Side, UnfoldedDecomposition,
    VertexId,
};
use crate::error::{Error, Result};

pub use enumerate::enumerate_bounded_configs;

/// Non-boring configurations by tree node; every other node carries the
/// boring completion of its parent's configuration.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConfigAssignment {
    pub configs: BTreeMap<NodePath, Configuration>,
}

impl ConfigAssignment {
    pub fn weight(&self) -> usize {
        self.configs.values().map(weight).sum()
    }

    /// Deepest node carrying a configuration.
    pub fn support_depth(&self) -> usize {
        self.configs.keys().map(Vec::len).max().unwrap_or(0)
    }

    pub fn to_json(&self, system: &ConeTypeSystem) -> Value {
        let nodes: Vec<Value> = self
            .configs
            .iter()
            .map(|(path, c)| {
                let t = type_at(system, path);
                json!({
                    "path": path,
                    "type": system.types[t].name,
                    "config": c.to_json(&PartGraph::new(system, t)),
                })
            })
            .collect();
        json!({ "weight": self.weight(), "nodes": nodes })
    }
}

fn type_at(system: &ConeTypeSystem, path: &[u16]) -> usize {
    path.iter().fold(system.root_type, |t, &s| {
        system.types[t].children[s as usize].child_type
    })
}

/// An edge of a contracted part: a real glued edge, or the virtual edge on
/// the adhesion between node `x` and its parent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GlobalEdge {
    Real(EdgeId),
    Virtual(NodeId),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GlobalWalk {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<GlobalEdge>,
}

impl GlobalWalk {
    pub fn weight(&self) -> usize {
        self.edges
            .iter()
            .filter(|e| matches!(e, GlobalEdge::Real(_)))
            .count()
    }

    fn is_self_avoiding(&self) -> bool {
        let mut seen = HashSet::with_capacity(self.vertices.len());
        self.vertices.iter().all(|v| seen.insert(*v))
    }
}

/// Exit of a contracted part: it holds the walk's last edge, or the walk
/// leaves across the tree edge above node `x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClusterExit {
    Own,
    Across(NodeId),
}

/// A connected set of tree nodes merged into one part, with its configuration.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cluster {
    /// Sorted; the first one is the top of the cluster.
    pub nodes: Vec<NodeId>,
    pub walk: GlobalWalk,
    pub exit: ClusterExit,
}

/// Positions in `walk` of the vertices of `adhesion`, in walk order.
fn meetings(walk: &GlobalWalk, adhesion: &[VertexId]) -> Vec<usize> {
    (0..walk.vertices.len())
        .filter(|&i| adhesion.contains(&walk.vertices[i]))
        .collect()
}

fn append(out: &mut GlobalWalk, walk: &GlobalWalk, from: usize, to: usize) {
    out.vertices
        .extend_from_slice(&walk.vertices[from + 1..=to]);
    out.edges.extend_from_slice(&walk.edges[from..to]);
}

/// Splices the walk of the part below tree edge `f` into the walk above it:
/// between consecutive shared vertices the side avoiding the virtual edge of
/// `f` is kept, and the tail comes from the side the walk ends in.
pub fn combine_walks(
    parent: (&GlobalWalk, ClusterExit),
    child: (&GlobalWalk, ClusterExit),
    f: NodeId,
    adhesion: &[VertexId],
) -> Result<(GlobalWalk, ClusterExit)> {
    let (pw, pe) = parent;
    let (cw, ce) = child;
    let into_child = pe == ClusterExit::Across(f);
    let pm = meetings(pw, adhesion);
    let cm = meetings(cw, adhesion);
    let bad = |why: &str| {
        Err(Error::Inconsistent(format!(
            "cannot combine across node {f}: {why}"
        )))
    };
    if cw.vertices.is_empty() {
        if !pm.is_empty() || into_child {
            return bad("empty child below a parent that meets the adhesion");
        }
        return Ok((pw.clone(), pe));
    }
    if pm.len() != cm.len()
        || pm
            .iter()
            .zip(&cm)
            .any(|(&a, &b)| pw.vertices[a] != cw.vertices[b])
    {
        return bad("shared vertices differ");
    }
    if cm[0] != 0 || into_child == (ce == ClusterExit::Across(f)) {
        return bad("exit directions disagree");
    }
    let uses = |w: &GlobalWalk, a: usize, b: usize| w.edges[a..b].contains(&GlobalEdge::Virtual(f));
    let l = pm.len() - 1;
    let mut out = GlobalWalk {
        vertices: pw.vertices[..=pm[0]].to_vec(),
        edges: pw.edges[..pm[0]].to_vec(),
    };
    for j in 0..l {
        match (uses(pw, pm[j], pm[j + 1]), uses(cw, cm[j], cm[j + 1])) {
            (true, false) => append(&mut out, cw, cm[j], cm[j + 1]),
            (false, true) => append(&mut out, pw, pm[j], pm[j + 1]),
            _ => return bad("virtual edges do not alternate"),
        }
    }
    let exit = if into_child {
        if pm[l] + 1 != pw.vertices.len() {
            return bad("parent continues after entering the child");
        }
        append(&mut out, cw, cm[l], cw.vertices.len() - 1);
        ce
    } else {
        if cm[l] + 1 != cw.vertices.len() {
            return bad("child continues after returning");
        }
        append(&mut out, pw, pm[l], pw.vertices.len() - 1);
        pe
    };
    if !out.is_self_avoiding() || out.edges.contains(&GlobalEdge::Virtual(f)) {
        return bad("combined walk is not self-avoiding");
    }
    Ok((out, exit))
}

/// Configurations of every node of `dec`, explicit or completed.
fn materialize(
    system: &ConeTypeSystem,
    dec: &UnfoldedDecomposition,
    cfg: &ConfigAssignment,
) -> Result<Vec<Configuration>> {
    let parts: Vec<PartGraph> = (0..system.types.len())
        .map(|t| PartGraph::new(system, t))
        .collect();
    for path in cfg.configs.keys() {
        if dec.node_by_path(path).is_none() {
            return Err(Error::Input(format!(
                "configuration at {path:?} lies outside the unfolded tree"
            )));
        }
    }
    let mut out: Vec<Configuration> = Vec::with_capacity(dec.nodes.len());
    for node in &dec.nodes {
        let c = match (cfg.configs.get(&node.path), node.parent) {
            (Some(c), _) => c.clone(),
            (None, None) => return Err(Error::Inconsistent("no configuration on the root".into())),
            (None, Some(p)) => {
                let pt = dec.nodes[p].type_id;
                boring_completion(
                    &out[p],
                    &parts[pt],
                    node.slot().unwrap(),
                    &parts[node.type_id],
                )?
            }
        };
        out.push(c);
    }
    Ok(out)
}

/// The configurations lifted to glued coordinates, one cluster per node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contracted {
    pub clusters: BTreeMap<NodeId, Cluster>,
    /// Cluster (by top node) holding each node.
    owner: Vec<NodeId>,
}

impl Contracted {
    /// Every node of `dec` as its own cluster, boring completions included.
    pub fn new(
        system: &ConeTypeSystem,
        dec: &UnfoldedDecomposition,
        cfg: &ConfigAssignment,
    ) -> Result<Self> {
        let configs = materialize(system, dec, cfg)?;
        Self::from_nodes(dec, configs.iter().enumerate())
    }

    /// Only the nodes carrying an explicit configuration.
    pub fn support(dec: &UnfoldedDecomposition, cfg: &ConfigAssignment) -> Result<Self> {
        let nodes = cfg
            .configs
            .iter()
            .map(|(path, c)| {
                dec.node_by_path(path).map(|id| (id, c)).ok_or_else(|| {
                    Error::Input(format!(
                        "configuration at {path:?} lies outside the unfolded tree"
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_nodes(dec, nodes.into_iter())
    }

    fn from_nodes<'c>(
        dec: &UnfoldedDecomposition,
        nodes: impl Iterator<Item = (NodeId, &'c Configuration)>,
    ) -> Result<Self> {
        let mut clusters = BTreeMap::new();
        for (id, c) in nodes {
            let node = &dec.nodes[id];
            let child = |i: u16| {
                node.children[i as usize].ok_or_else(|| {
                    Error::Input(format!(
                        "configuration at {:?} needs unfolded children",
                        node.path
                    ))
                })
            };
            let edges = c
                .walk
                .edges
                .iter()
                .map(|&e| {
                    Ok(match e {
                        EdgeRef::Real(i) => GlobalEdge::Real(node.edges[i as usize]),
                        EdgeRef::Virtual(Side::Parent) => GlobalEdge::Virtual(id),
                        EdgeRef::Virtual(Side::Child(i)) => GlobalEdge::Virtual(child(i)?),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let exit = match c.exit {
                Exit::Own => ClusterExit::Own,
                Exit::Parent => ClusterExit::Across(id),
                Exit::Child(i) => ClusterExit::Across(child(i)?),
            };
            let walk = GlobalWalk {
                vertices: c.walk.vertices.iter().map(|&x| node.vertices[x]).collect(),
                edges,
            };
            clusters.insert(
                id,
                Cluster {
                    nodes: vec![id],
                    walk,
                    exit,
                },
            );
        }
        Ok(Contracted {
            clusters,
            owner: (0..dec.nodes.len()).collect(),
        })
    }

    pub fn weight(&self) -> usize {
        self.clusters.values().map(|c| c.walk.weight()).sum()
    }

    pub fn cluster_of(&self, node: NodeId) -> &Cluster {
        &self.clusters[&self.owner[node]]
    }

    /// Contracts the tree edge between `f` and its parent.
    pub fn contract_edge(&self, dec: &UnfoldedDecomposition, f: NodeId) -> Result<Self> {
        let p = dec.nodes[f]
            .parent
            .ok_or_else(|| Error::Input("the root has no parent edge".into()))?;
        let (top, below) = (self.owner[p], self.owner[f]);
        if top == below {
            return Err(Error::Input(format!(
                "edge above node {f} is already contracted"
            )));
        }
        let (pc, cc) = (&self.clusters[&top], &self.clusters[&below]);
        let adhesion: Vec<VertexId> = {
            let pa = &dec.nodes[f].vertices;
            let mut a: Vec<VertexId> = pa
                .iter()
                .copied()
                .filter(|&v| dec.local_of(p, v).is_some())
                .collect();
            a.sort_unstable();
            a
        };
        let (walk, exit) = combine_walks((&pc.walk, pc.exit), (&cc.walk, cc.exit), f, &adhesion)?;
        let mut nodes = pc.nodes.clone();
        nodes.extend_from_slice(&cc.nodes);
        nodes.sort_unstable();
        let mut next = self.clone();
        next.clusters.remove(&below);
        next.clusters.insert(top, Cluster { nodes, walk, exit });
        for &n in &cc.nodes {
            next.owner[n] = top;
        }
        Ok(next)
    }

    /// Clusters keyed by the sorted paths of their nodes.
    pub fn canonical(
        &self,
        dec: &UnfoldedDecomposition,
    ) -> BTreeMap<Vec<NodePath>, (GlobalWalk, ClusterExit)> {
        self.clusters
            .values()
            .map(|c| {
                (
                    c.nodes.iter().map(|&n| dec.nodes[n].path.clone()).collect(),
                    (c.walk.clone(), c.exit),
                )
            })
            .collect()
    }
}

/// A walk on the glued graph with its label word.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelledWalk {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<EdgeId>,
    pub word: Word,
}

impl LabelledWalk {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Contracts every tree edge below a non-boring node; the root's walk is
/// then a self-avoiding walk of the glued graph.
pub fn psi_r(dec: &UnfoldedDecomposition, cfg: &ConfigAssignment) -> Result<LabelledWalk> {
    if !cfg.configs.contains_key(&NodePath::new()) {
        return Err(Error::Inconsistent("no configuration on the root".into()));
    }
    let mut state = Contracted::support(dec, cfg)?;
    for path in cfg.configs.keys().filter(|p| !p.is_empty()) {
        state = state.contract_edge(dec, dec.node_by_path(path).unwrap())?;
    }
    let root = state.cluster_of(UnfoldedDecomposition::ROOT);
    if root.exit != ClusterExit::Own {
        return Err(Error::Inconsistent(
            "contracted walk does not end in the root part".into(),
        ));
    }
    let mut edges = Vec::with_capacity(root.walk.edges.len());
    let mut word = Vec::with_capacity(root.walk.edges.len());
    for (k, e) in root.walk.edges.iter().enumerate() {
        match *e {
            GlobalEdge::Real(id) => {
                edges.push(id);
                word.push(dec.edges[id].label_from(root.walk.vertices[k]));
            }
            GlobalEdge::Virtual(_) => {
                return Err(Error::Inconsistent(
                    "contracted walk keeps a virtual edge".into(),
                ));
            }
        }
    }
    Ok(LabelledWalk {
        vertices: root.walk.vertices.clone(),
        edges,
        word,
    })
}

/// Direction from node `t` toward node `target`, as seen from `t`.
fn toward(dec: &UnfoldedDecomposition, t: NodeId, target: NodeId) -> Option<Side> {
    if t == target {
        return None;
    }
    if !dec.is_ancestor_or_self(t, target) {
        return Some(Side::Parent);
    }
    let slot = dec.nodes[target].path[dec.nodes[t].depth()];
    Some(Side::Child(slot))
}

/// Splits a self-avoiding walk from the origin into one configuration per
/// tree node: detours through other parts become virtual shortcuts, and
/// exits point toward the part owning the final edge.
pub fn project_saw(
    system: &ConeTypeSystem,
    dec: &UnfoldedDecomposition,
    walk: &LabelledWalk,
) -> Result<ConfigAssignment> {
    if walk.vertices.first() != Some(&dec.origin) || walk.edges.is_empty() {
        return Err(Error::Input(
            "walk must start at the origin and have an edge".into(),
        ));
    }
    let sink = dec.edges[*walk.edges.last().unwrap()].owner;
    let parts: Vec<PartGraph> = (0..system.types.len())
        .map(|t| PartGraph::new(system, t))
        .collect();
    let mut met: Vec<NodeId> = walk
        .vertices
        .iter()
        .flat_map(|&v| dec.nodes_containing(v).iter().map(|&(n, _)| n))
        .collect();
    met.sort_unstable();
    met.dedup();
    let mut configs = BTreeMap::new();
    for t in met {
        let node = &dec.nodes[t];
        let visits: Vec<(usize, usize)> = walk
            .vertices
            .iter()
            .enumerate()
            .filter_map(|(i, &v)| dec.local_of(t, v).map(|x| (i, x)))
            .collect();
        let mut local = PartWalk {
            vertices: vec![visits[0].1],
            edges: Vec::new(),
        };
        for pair in visits.windows(2) {
            let ((i, _), (j, y)) = (pair[0], pair[1]);
            let first = walk.edges[i];
            let owner = dec.edges[first].owner;
            let e = if j == i + 1 && owner == t {
                EdgeRef::Real(dec.edges[first].local)
            } else {
                EdgeRef::Virtual(toward(dec, t, owner).unwrap())
            };
            local.vertices.push(y);
            local.edges.push(e);
        }
        let exit = match toward(dec, t, sink) {
            None => Exit::Own,
            Some(Side::Parent) => Exit::Parent,
            Some(Side::Child(i)) => Exit::Child(i),
        };
        let c = Configuration { walk: local, exit };
        if t == UnfoldedDecomposition::ROOT || !is_boring(&c, &parts[node.type_id]) {
            configs.insert(node.path.clone(), c);
        }
    }
    Ok(ConfigAssignment { configs })
}

/// Every parent/child pair of materialized configurations is compatible.
pub fn check_consistent(
    system: &ConeTypeSystem,
    dec: &UnfoldedDecomposition,
    cfg: &ConfigAssignment,
) -> Result<bool> {
    let configs = match materialize(system, dec, cfg) {
        Ok(c) => c,
        Err(Error::Inconsistent(_)) => return Ok(false),
        Err(e) => return Err(e),
    };
    for (id, node) in dec.nodes.iter().enumerate() {
        if let Some(p) = node.parent {
            let pp = PartGraph::new(system, dec.nodes[p].type_id);
            let cp = PartGraph::new(system, node.type_id);
            if !compatible(&configs[p], &pp, node.slot().unwrap(), &configs[id], &cp)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

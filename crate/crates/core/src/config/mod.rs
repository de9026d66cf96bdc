//! Configurations on single parts: a self-avoiding walk on the part graph
//! together with an exit direction.

mod compat;

use std::cmp::Ordering;
use std::ops::Range;

use serde_json::{json, Value};

use crate::decomposition::{ConeTypeSystem, EdgeRef, LocalVertex, PartGraph, Side, TypeId};
use crate::error::{Error, Result};
use crate::limits::Limits;

pub use compat::{
    boring_completion, child_interface, compatible, interfaces_compatible, parent_interface,
    Interface,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Exit {
    /// The walk ends in this part with a real edge.
    Own,
    Parent,
    Child(u16),
}

impl Exit {
    pub fn side(self) -> Option<Side> {
        match self {
            Exit::Own => None,
            Exit::Parent => Some(Side::Parent),
            Exit::Child(i) => Some(Side::Child(i)),
        }
    }

    fn name(self) -> String {
        match self {
            Exit::Own => "own".into(),
            Exit::Parent => "parent".into(),
            Exit::Child(i) => format!("child{i}"),
        }
    }
}

/// A walk on a part graph. Empty (no vertices) and trivial (one vertex) walks
/// are distinct.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PartWalk {
    pub vertices: Vec<LocalVertex>,
    pub edges: Vec<EdgeRef>,
}

impl PartWalk {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn last(&self) -> Option<LocalVertex> {
        self.vertices.last().copied()
    }

    pub fn index_of(&self, x: LocalVertex) -> Option<usize> {
        self.vertices.iter().position(|&y| y == x)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub walk: PartWalk,
    pub exit: Exit,
}

impl Configuration {
    pub fn empty() -> Self {
        Configuration {
            walk: PartWalk::default(),
            exit: Exit::Parent,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.walk.is_empty()
    }

    fn key(&self) -> (usize, &[LocalVertex], &[EdgeRef], Exit) {
        (
            self.walk.edges.len(),
            &self.walk.vertices,
            &self.walk.edges,
            self.exit,
        )
    }

    /// One JSON object; used for the line-per-configuration dump.
    pub fn to_json(&self, part: &PartGraph) -> Value {
        let edges: Vec<Value> = self
            .walk
            .edges
            .iter()
            .map(|e| match e {
                EdgeRef::Real(i) => json!({"real": i}),
                EdgeRef::Virtual(s) => json!({"virtual": s.to_string()}),
            })
            .collect();
        json!({
            "vertices": self.walk.vertices,
            "edges": edges,
            "exit": self.exit.name(),
            "weight": weight(self),
            "rank": rank(self, part),
        })
    }
}

impl Ord for Configuration {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for Configuration {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Every configuration on the part, in canonical order.
pub fn enumerate_configurations(
    system: &ConeTypeSystem,
    type_id: TypeId,
    limits: &Limits,
) -> Result<Vec<Configuration>> {
    let part = PartGraph::new(system, type_id);
    let starts = if part.is_root {
        vec![system.root_vertex]
    } else {
        part.adhesion(Side::Parent).to_vec()
    };
    enumerate_on(&part, &starts, limits)
}

pub fn enumerate_on(
    part: &PartGraph,
    starts: &[LocalVertex],
    limits: &Limits,
) -> Result<Vec<Configuration>> {
    let mut out = Vec::new();
    if !part.is_root {
        out.push(Configuration::empty());
    }
    let mut visited = vec![false; part.size];
    for &s in starts {
        let mut walk = PartWalk {
            vertices: vec![s],
            edges: Vec::new(),
        };
        visited[s] = true;
        extend(part, &mut walk, &mut visited, &mut out, limits)?;
        visited[s] = false;
    }
    out.sort_unstable();
    Ok(out)
}

fn extend(
    part: &PartGraph,
    walk: &mut PartWalk,
    visited: &mut [bool],
    out: &mut Vec<Configuration>,
    limits: &Limits,
) -> Result<()> {
    let x = walk.last().unwrap();
    if walk.edges.last().is_some_and(|e| e.is_real()) {
        out.push(Configuration {
            walk: walk.clone(),
            exit: Exit::Own,
        });
    }
    if !part.is_root && part.in_adhesion(Side::Parent, x) {
        out.push(Configuration {
            walk: walk.clone(),
            exit: Exit::Parent,
        });
    }
    for i in 0..part.slot_count() as u16 {
        if part.in_adhesion(Side::Child(i), x) {
            out.push(Configuration {
                walk: walk.clone(),
                exit: Exit::Child(i),
            });
        }
    }
    if out.len() > limits.max_configs_per_type {
        return Err(Error::cap(
            "configurations per type",
            limits.max_configs_per_type,
        ));
    }
    for &(e, y) in part.neighbours(x) {
        if visited[y] {
            continue;
        }
        visited[y] = true;
        walk.vertices.push(y);
        walk.edges.push(e);
        extend(part, walk, visited, out, limits)?;
        walk.vertices.pop();
        walk.edges.pop();
        visited[y] = false;
    }
    Ok(())
}

/// Number of real edges.
pub fn weight(c: &Configuration) -> usize {
    c.walk.edges.iter().filter(|e| e.is_real()).count()
}

/// Exits to the parent using parent-side virtual edges only. Never true on the root.
pub fn is_boring(c: &Configuration, part: &PartGraph) -> bool {
    !part.is_root
        && c.exit == Exit::Parent
        && c.walk
            .edges
            .iter()
            .all(|&e| e == EdgeRef::Virtual(Side::Parent))
}

/// Vertex index ranges of the walk once its parent-side virtual edges are removed.
pub fn parent_components(c: &Configuration) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    if c.walk.is_empty() {
        return out;
    }
    let mut start = 0;
    for (i, &e) in c.walk.edges.iter().enumerate() {
        if e == EdgeRef::Virtual(Side::Parent) {
            out.push(start..i + 1);
            start = i + 1;
        }
    }
    out.push(start..c.walk.vertices.len());
    out
}

fn adhesion_hits(c: &Configuration, part: &PartGraph, r: &Range<usize>) -> usize {
    c.walk.vertices[r.clone()]
        .iter()
        .filter(|&&x| part.in_adhesion(Side::Parent, x))
        .count()
}

/// How a residual component meets the parent adhesion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComponentShape {
    /// Returns to the adhesion: at least two adhesion vertices.
    U,
    /// The final component, leaving the adhesion for good.
    I,
    /// A single vertex that is dropped.
    Dropped,
}

/// Classifies the residual components of a non-root configuration.
pub fn component_shapes(
    c: &Configuration,
    part: &PartGraph,
) -> Vec<(Range<usize>, ComponentShape)> {
    let comps = parent_components(c);
    let n = comps.len();
    comps
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let hits = adhesion_hits(c, part, &r);
            let shape = if hits >= 2 {
                ComponentShape::U
            } else if i + 1 == n && c.exit != Exit::Parent && hits == 1 {
                ComponentShape::I
            } else {
                ComponentShape::Dropped
            };
            (r, shape)
        })
        .collect()
}

/// Components of the walk minus its parent-side virtual edges that hold at
/// least two parent adhesion vertices.
pub fn mu(c: &Configuration, part: &PartGraph) -> usize {
    parent_components(c)
        .iter()
        .filter(|r| adhesion_hits(c, part, r) >= 2)
        .count()
}

pub fn rank(c: &Configuration, part: &PartGraph) -> usize {
    if part.is_root {
        return 1;
    }
    let m = mu(c, part);
    match parent_components(c).last() {
        Some(last) if c.exit != Exit::Parent && adhesion_hits(c, part, last) == 1 => m + 1,
        _ => m,
    }
}

/// Maximal runs of consecutive `Virtual(side)` edges, as edge index ranges.
pub fn virtual_runs(c: &Configuration, side: Side) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, &e) in c.walk.edges.iter().enumerate() {
        match (e == EdgeRef::Virtual(side), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push(s..i);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(s..c.walk.edges.len());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn lim() -> Limits {
        Limits::default()
    }

    fn line_right() -> (ConeTypeSystem, PartGraph) {
        let sys = corpus::system("line").unwrap();
        let t = sys.type_by_name("right").unwrap();
        let part = PartGraph::new(&sys, t);
        (sys, part)
    }

    #[test]
    fn line_type_configurations() {
        let (sys, part) = line_right();
        let cs = enumerate_configurations(&sys, part.type_id, &lim()).unwrap();
        assert!(cs.contains(&Configuration::empty()));
        let through = Configuration {
            walk: PartWalk {
                vertices: vec![0, 1],
                edges: vec![EdgeRef::Real(0)],
            },
            exit: Exit::Child(0),
        };
        assert!(cs.contains(&through));
        // empty, (0)/parent, 0-1/own, 0-1/child
        assert_eq!(cs.len(), 4);
    }

    #[test]
    fn empty_configuration_only_off_the_root() {
        for (name, sys) in corpus::load_all().unwrap() {
            for t in 0..sys.types.len() {
                let cs = enumerate_configurations(&sys, t, &lim()).unwrap();
                let empties = cs.iter().filter(|c| c.is_empty()).count();
                assert_eq!(empties, usize::from(!sys.is_root(t)), "{name} type {t}");
                let mut sorted = cs.clone();
                sorted.sort();
                sorted.dedup();
                assert_eq!(sorted, cs);
            }
        }
    }

    #[test]
    fn weight_and_boring() {
        let (_, part) = line_right();
        let e = Configuration::empty();
        assert_eq!(weight(&e), 0);
        assert!(is_boring(&e, &part));
        let one = Configuration {
            walk: PartWalk {
                vertices: vec![0, 1],
                edges: vec![EdgeRef::Real(0)],
            },
            exit: Exit::Own,
        };
        assert_eq!(weight(&one), 1);
        assert!(!is_boring(&one, &part));

        let sys = corpus::system("ladder").unwrap();
        let part = PartGraph::new(&sys, sys.type_by_name("right").unwrap());
        let hop = Configuration {
            walk: PartWalk {
                vertices: vec![0, 1],
                edges: vec![EdgeRef::Virtual(Side::Parent)],
            },
            exit: Exit::Parent,
        };
        assert!(is_boring(&hop, &part));
        assert_eq!(mu(&hop, &part), 0);
        assert_eq!(rank(&hop, &part), 0);
    }

    #[test]
    fn u_and_i_walks() {
        let sys = corpus::system("ladder").unwrap();
        let part = PartGraph::new(&sys, sys.type_by_name("right").unwrap());
        // 0 -> 2 -> 3 -> 1 returns to the adhesion {0, 1}
        let u = Configuration {
            walk: PartWalk {
                vertices: vec![0, 2, 3, 1],
                edges: vec![EdgeRef::Real(0), EdgeRef::Real(2), EdgeRef::Real(1)],
            },
            exit: Exit::Parent,
        };
        assert_eq!(mu(&u, &part), 1);
        assert_eq!(rank(&u, &part), 1);
        // 0 -> 2 then into the child
        let i = Configuration {
            walk: PartWalk {
                vertices: vec![0, 2],
                edges: vec![EdgeRef::Real(0)],
            },
            exit: Exit::Child(0),
        };
        assert_eq!(mu(&i, &part), 0);
        assert_eq!(rank(&i, &part), 1);
    }

    #[test]
    fn rank_laws_on_bundled_systems() {
        for (name, sys) in corpus::load_all().unwrap() {
            for t in 0..sys.types.len() {
                let part = PartGraph::new(&sys, t);
                let k = part.adhesion(Side::Parent).len();
                for c in enumerate_configurations(&sys, t, &lim()).unwrap() {
                    let r = rank(&c, &part);
                    if part.is_root {
                        assert_eq!(r, 1);
                        continue;
                    }
                    assert_eq!(r == 0, is_boring(&c, &part), "{name} {c:?}");
                    if r >= 1 {
                        assert!(2 * r - 1 <= k, "{name} {c:?}");
                    }
                    let shapes = component_shapes(&c, &part);
                    let kept = shapes
                        .iter()
                        .filter(|(_, s)| *s != ComponentShape::Dropped)
                        .count();
                    assert_eq!(kept, r);
                    if is_boring(&c, &part) {
                        assert_eq!(weight(&c), 0);
                    }
                }
            }
        }
    }

    #[test]
    fn configuration_cap() {
        let sys = corpus::system("paper-example").unwrap();
        let tight = Limits {
            max_configs_per_type: 5,
            ..Limits::default()
        };
        let t = sys.type_by_name("prism_a").unwrap();
        assert!(matches!(
            enumerate_configurations(&sys, t, &tight),
            Err(Error::ResourceCap { .. })
        ));
    }

    #[test]
    fn runs_of_virtual_edges() {
        let c = Configuration {
            walk: PartWalk {
                vertices: vec![0, 1, 2, 3, 4],
                edges: vec![
                    EdgeRef::Virtual(Side::Child(0)),
                    EdgeRef::Virtual(Side::Child(0)),
                    EdgeRef::Real(0),
                    EdgeRef::Virtual(Side::Child(0)),
                ],
            },
            exit: Exit::Own,
        };
        assert_eq!(virtual_runs(&c, Side::Child(0)), vec![0..2, 3..4]);
        assert!(virtual_runs(&c, Side::Child(1)).is_empty());
    }
}

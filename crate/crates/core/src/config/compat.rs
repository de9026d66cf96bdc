use super::{Configuration, Exit, PartWalk};
use crate::decomposition::{EdgeRef, PartGraph, Side};
use crate::error::{Error, Result};

/// Adhesion positions met by the walk, with the walk index of each meeting.
fn meetings(walk: &PartWalk, part: &PartGraph, side: Side) -> Vec<(usize, usize)> {
    walk.vertices
        .iter()
        .enumerate()
        .filter_map(|(i, &x)| part.position(side, x).map(|p| (p, i)))
        .collect()
}

fn gap_uses(walk: &PartWalk, from: usize, to: usize, side: Side) -> bool {
    walk.edges[from..to].contains(&EdgeRef::Virtual(side))
}

fn check_slot(parent: &PartGraph, slot: u16, child: &PartGraph) -> Result<()> {
    match parent.child_types.get(slot as usize) {
        Some(&t) if t == child.type_id => Ok(()),
        _ => Err(Error::Inconsistent(format!(
            "slot {slot} of type {} does not hold type {}",
            parent.type_id, child.type_id
        ))),
    }
}

/// Whether `child` on slot `slot` of `parent_part` may sit below `parent`.
/// Checked literally on both walks; the grammar builder uses the indexed
/// [`Interface`] form instead and is tested against this one.
pub fn compatible(
    parent: &Configuration,
    parent_part: &PartGraph,
    slot: u16,
    child: &Configuration,
    child_part: &PartGraph,
) -> Result<bool> {
    check_slot(parent_part, slot, child_part)?;
    let side = Side::Child(slot);
    let ps = meetings(&parent.walk, parent_part, side);
    let cs = meetings(&child.walk, child_part, Side::Parent);
    if ps.is_empty() && child.is_empty() {
        return Ok(true);
    }
    // both sides meet the adhesion in the same order
    if ps.len() != cs.len() || ps.iter().zip(&cs).any(|(a, b)| a.0 != b.0) {
        return Ok(false);
    }
    // each gap between meetings is covered on exactly one side
    for j in 0..ps.len().saturating_sub(1) {
        let p_uses = gap_uses(&parent.walk, ps[j].1, ps[j + 1].1, side);
        let c_uses = gap_uses(&child.walk, cs[j].1, cs[j + 1].1, Side::Parent);
        if p_uses == c_uses {
            return Ok(false);
        }
    }
    // the walk crosses into the child iff the child does not exit upwards
    let into_child = parent.exit == Exit::Child(slot);
    if into_child != (child.exit != Exit::Parent) {
        return Ok(false);
    }
    // the side the walk ends in ends at the last meeting
    let l = ps.len() - 1;
    Ok(if into_child {
        ps[l].1 + 1 == parent.walk.vertices.len()
    } else {
        cs[l].1 + 1 == child.walk.vertices.len()
    })
}

/// What one side of a tree edge shows the other: the meeting sequence, which
/// gaps use the shared virtual edges, whether the walk crosses the tree edge
/// at its end, and whether it ends at the last meeting.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interface {
    pub seq: Vec<u8>,
    pub gaps: Vec<bool>,
    pub crosses: bool,
    pub ends_at_last: bool,
}

fn interface(walk: &PartWalk, part: &PartGraph, side: Side, crosses: bool) -> Interface {
    let m = meetings(walk, part, side);
    let gaps = m
        .windows(2)
        .map(|w| gap_uses(walk, w[0].1, w[1].1, side))
        .collect();
    let ends_at_last = m.last().is_some_and(|&(_, i)| i + 1 == walk.vertices.len());
    Interface {
        seq: m.iter().map(|&(p, _)| p as u8).collect(),
        gaps,
        crosses,
        ends_at_last,
    }
}

pub fn parent_interface(c: &Configuration, part: &PartGraph, slot: u16) -> Interface {
    interface(
        &c.walk,
        part,
        Side::Child(slot),
        c.exit == Exit::Child(slot),
    )
}

pub fn child_interface(c: &Configuration, part: &PartGraph) -> Interface {
    interface(&c.walk, part, Side::Parent, c.exit != Exit::Parent)
}

pub fn interfaces_compatible(parent: &Interface, child: &Interface) -> bool {
    if parent.seq != child.seq {
        return false;
    }
    if parent.seq.is_empty() {
        return true;
    }
    parent.gaps.iter().zip(&child.gaps).all(|(a, b)| a != b)
        && parent.crosses == child.crosses
        && if parent.crosses {
            parent.ends_at_last
        } else {
            child.ends_at_last
        }
}

/// The unique boring child compatible with `parent` on `slot`, when the parent
/// neither uses the slot's virtual edges nor exits into it.
pub fn boring_completion(
    parent: &Configuration,
    parent_part: &PartGraph,
    slot: u16,
    child_part: &PartGraph,
) -> Result<Configuration> {
    check_slot(parent_part, slot, child_part)?;
    let side = Side::Child(slot);
    if parent.exit == Exit::Child(slot) || parent.walk.edges.contains(&EdgeRef::Virtual(side)) {
        return Err(Error::Inconsistent(format!(
            "no boring completion below slot {slot}"
        )));
    }
    let adhesion = child_part.adhesion(Side::Parent);
    let vertices: Vec<_> = meetings(&parent.walk, parent_part, side)
        .iter()
        .map(|&(p, _)| adhesion[p])
        .collect();
    let edges = vec![EdgeRef::Virtual(Side::Parent); vertices.len().saturating_sub(1)];
    Ok(Configuration {
        walk: PartWalk { vertices, edges },
        exit: Exit::Parent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{enumerate_configurations, is_boring};
    use crate::corpus;
    use crate::decomposition::ConeTypeSystem;
    use crate::limits::Limits;

    fn all(sys: &ConeTypeSystem, t: usize) -> Vec<Configuration> {
        enumerate_configurations(sys, t, &Limits::default()).unwrap()
    }

    /// Every (type, slot) pair of every bundled system with both part graphs.
    fn slot_pairs(
        f: impl Fn(&str, &PartGraph, u16, &PartGraph, &[Configuration], &[Configuration]),
    ) {
        for (name, sys) in corpus::load_all().unwrap() {
            for t in 0..sys.types.len() {
                let pp = PartGraph::new(&sys, t);
                let pcs = all(&sys, t);
                for (s, &ct) in pp.child_types.clone().iter().enumerate() {
                    let cp = PartGraph::new(&sys, ct);
                    f(name, &pp, s as u16, &cp, &pcs, &all(&sys, ct));
                }
            }
        }
    }

    #[test]
    fn interface_matching_equals_literal_conditions() {
        slot_pairs(|name, pp, s, cp, pcs, ccs| {
            let cis: Vec<_> = ccs.iter().map(|c| child_interface(c, cp)).collect();
            for p in pcs {
                let pi = parent_interface(p, pp, s);
                for (c, ci) in ccs.iter().zip(&cis) {
                    assert_eq!(
                        compatible(p, pp, s, c, cp).unwrap(),
                        interfaces_compatible(&pi, ci),
                        "{name}: {p:?} / {c:?}"
                    );
                }
            }
        });
    }

    #[test]
    fn boring_completion_is_the_unique_boring_match() {
        slot_pairs(|name, pp, s, cp, pcs, ccs| {
            for p in pcs {
                let matches: Vec<_> = ccs
                    .iter()
                    .filter(|c| compatible(p, pp, s, c, cp).unwrap())
                    .collect();
                match boring_completion(p, pp, s, cp) {
                    Ok(b) => {
                        assert_eq!(matches, vec![&b], "{name}: {p:?}");
                        assert!(is_boring(&b, cp));
                    }
                    Err(_) => assert!(matches.iter().all(|c| !is_boring(c, cp)), "{name}: {p:?}"),
                }
            }
        });
    }

    #[test]
    fn avoiding_parent_takes_only_the_empty_child() {
        let sys = corpus::system("ladder").unwrap();
        let root = PartGraph::new(&sys, sys.root_type);
        let right = PartGraph::new(&sys, sys.type_by_name("right").unwrap());
        // 0 -> 1 stays clear of the right adhesion {2, 3}
        let p = Configuration {
            walk: PartWalk {
                vertices: vec![0, 1],
                edges: vec![EdgeRef::Real(0)],
            },
            exit: Exit::Own,
        };
        let slot = 1;
        for c in all(&sys, right.type_id) {
            assert_eq!(
                compatible(&p, &root, slot, &c, &right).unwrap(),
                c.is_empty()
            );
        }
        assert_eq!(
            boring_completion(&p, &root, slot, &right).unwrap(),
            Configuration::empty()
        );
    }

    #[test]
    fn shared_virtual_edge_on_both_sides_is_rejected() {
        let sys = corpus::system("ladder").unwrap();
        let root = PartGraph::new(&sys, sys.root_type);
        let right = PartGraph::new(&sys, sys.type_by_name("right").unwrap());
        // root: 0 -> 2, the slot's virtual edge 2 - 3, then 3 -> 1
        let p = Configuration {
            walk: PartWalk {
                vertices: vec![0, 2, 3, 1],
                edges: vec![
                    EdgeRef::Real(2),
                    EdgeRef::Virtual(Side::Child(1)),
                    EdgeRef::Real(3),
                ],
            },
            exit: Exit::Own,
        };
        let c = Configuration {
            walk: PartWalk {
                vertices: vec![0, 1],
                edges: vec![EdgeRef::Virtual(Side::Parent)],
            },
            exit: Exit::Parent,
        };
        assert!(!compatible(&p, &root, 1, &c, &right).unwrap());
        let detour = Configuration {
            walk: PartWalk {
                vertices: vec![0, 2, 3, 1],
                edges: vec![EdgeRef::Real(0), EdgeRef::Real(2), EdgeRef::Real(1)],
            },
            exit: Exit::Parent,
        };
        assert!(compatible(&p, &root, 1, &detour, &right).unwrap());
        assert!(boring_completion(&p, &root, 1, &right).is_err());
    }

    #[test]
    fn single_meeting_gives_trivial_boring_child() {
        let sys = corpus::system("line").unwrap();
        let root = PartGraph::new(&sys, sys.root_type);
        let right = PartGraph::new(&sys, sys.type_by_name("right").unwrap());
        let p = Configuration {
            walk: PartWalk {
                vertices: vec![0, 1],
                edges: vec![EdgeRef::Real(0)],
            },
            exit: Exit::Own,
        };
        let b = boring_completion(&p, &root, 1, &right).unwrap();
        assert_eq!(b.walk.vertices, vec![0]);
        assert!(b.walk.edges.is_empty());
        assert_eq!(b.exit, Exit::Parent);
    }

    #[test]
    fn wrong_child_type_is_an_error() {
        let sys = corpus::system("line").unwrap();
        let root = PartGraph::new(&sys, sys.root_type);
        let left = PartGraph::new(&sys, sys.type_by_name("left").unwrap());
        let e = Configuration::empty();
        assert!(compatible(&e, &root, 1, &e, &left).is_err());
    }
}

use std::collections::hash_map::Entry;
use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::hash::Hash;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use super::{Mcfg, NtId, Rule};
use crate::error::{Error, Result};

pub(crate) type ItemId = usize;

/// How items of one kind are built from their children.
pub(crate) trait Domain {
    type Value: Clone + Eq + Hash;

    /// Head values produced by `rule` from fully chosen children.
    fn apply(&self, rule: &Rule, children: &[&Self::Value], out: &mut Vec<Self::Value>);

    /// Early rejection of a partial choice (children of positions `0..chosen.len()`).
    fn admissible(&self, _rule_idx: usize, _chosen: &[&Self::Value]) -> bool {
        true
    }

    /// Items are grouped by this size so that oversized ones are never visited.
    fn bucket(&self, _v: &Self::Value) -> usize {
        0
    }

    /// Largest bucket worth trying at tail position `chosen.len()`.
    fn bucket_limit(&self, _rule_idx: usize, _chosen: &[&Self::Value]) -> usize {
        usize::MAX
    }
}

/// Derivable items together with every hyperedge that derives them.
pub(crate) struct Chart<V> {
    pub items: Vec<(NtId, V)>,
    pub derivations: Vec<Vec<(usize, Vec<ItemId>)>>,
    index: HashMap<(NtId, V), ItemId>,
}

impl<V: Clone + Eq + Hash> Chart<V> {
    pub fn find(&self, nt: NtId, v: &V) -> Option<ItemId> {
        self.index.get(&(nt, v.clone())).copied()
    }
}

/// Semi-naive bottom-up saturation. A combination of children is tried once,
/// when the most recently processed of them is popped.
pub(crate) fn saturate<D: Domain>(g: &Mcfg, d: &D, cap: usize) -> Result<Chart<D::Value>> {
    let mut chart = Chart {
        items: Vec::new(),
        derivations: Vec::new(),
        index: HashMap::new(),
    };
    let mut uses: Vec<Vec<(usize, usize)>> = vec![Vec::new(); g.nonterminals.len()];
    for (r, rule) in g.rules.iter().enumerate() {
        for (p, &nt) in rule.tail.iter().enumerate() {
            uses[nt].push((r, p));
        }
    }

    let mut queue = VecDeque::new();
    let mut out = Vec::new();
    for (r, rule) in g
        .rules
        .iter()
        .enumerate()
        .filter(|(_, r)| r.tail.is_empty())
    {
        out.clear();
        d.apply(rule, &[], &mut out);
        for v in out.drain(..) {
            add(&mut chart, &mut queue, rule.head, v, r, Vec::new(), cap)?;
        }
    }

    // processed items per nonterminal and bucket
    let mut by_nt: Vec<Vec<Vec<ItemId>>> = vec![Vec::new(); g.nonterminals.len()];
    while let Some(x) = queue.pop_front() {
        let nt = chart.items[x].0;
        let b = d.bucket(&chart.items[x].1);
        if by_nt[nt].len() <= b {
            by_nt[nt].resize(b + 1, Vec::new());
        }
        by_nt[nt][b].push(x);

        for &(r, p) in &uses[nt] {
            let rule = &g.rules[r];
            let mut found = Vec::new();
            let mut ids = Vec::with_capacity(rule.tail.len());
            let mut vals: Vec<&D::Value> = Vec::with_capacity(rule.tail.len());
            combine(
                &chart, d, r, rule, p, x, &by_nt, 0, &mut ids, &mut vals, &mut found,
            );
            for (v, children) in found {
                add(&mut chart, &mut queue, rule.head, v, r, children, cap)?;
            }
        }
    }
    Ok(chart)
}

#[allow(clippy::too_many_arguments)]
fn combine<'a, D: Domain>(
    chart: &'a Chart<D::Value>,
    d: &D,
    r: usize,
    rule: &Rule,
    p: usize,
    x: ItemId,
    by_nt: &[Vec<Vec<ItemId>>],
    q: usize,
    ids: &mut Vec<ItemId>,
    vals: &mut Vec<&'a D::Value>,
    found: &mut Vec<(D::Value, Vec<ItemId>)>,
) {
    if q == rule.tail.len() {
        let mut out = Vec::new();
        d.apply(rule, vals, &mut out);
        found.extend(out.into_iter().map(|v| (v, ids.clone())));
        return;
    }
    if q == p {
        try_child(chart, d, r, rule, p, x, by_nt, q, ids, vals, found, x);
        return;
    }
    let buckets = &by_nt[rule.tail[q]];
    let limit = d.bucket_limit(r, vals).min(buckets.len().saturating_sub(1));
    for bucket in buckets.iter().take(limit + 1) {
        for &c in bucket {
            // combinations with x at an earlier position are tried elsewhere
            if q < p && c == x {
                continue;
            }
            try_child(chart, d, r, rule, p, x, by_nt, q, ids, vals, found, c);
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn try_child<'a, D: Domain>(
    chart: &'a Chart<D::Value>,
    d: &D,
    r: usize,
    rule: &Rule,
    p: usize,
    x: ItemId,
    by_nt: &[Vec<Vec<ItemId>>],
    q: usize,
    ids: &mut Vec<ItemId>,
    vals: &mut Vec<&'a D::Value>,
    found: &mut Vec<(D::Value, Vec<ItemId>)>,
    c: ItemId,
) {
    vals.push(&chart.items[c].1);
    if d.admissible(r, vals) {
        ids.push(c);
        combine(chart, d, r, rule, p, x, by_nt, q + 1, ids, vals, found);
        ids.pop();
    }
    vals.pop();
}

fn add<V: Clone + Eq + Hash>(
    chart: &mut Chart<V>,
    queue: &mut VecDeque<ItemId>,
    nt: NtId,
    v: V,
    rule: usize,
    children: Vec<ItemId>,
    cap: usize,
) -> Result<()> {
    let next = chart.items.len();
    let id = match chart.index.entry((nt, v)) {
        Entry::Occupied(e) => *e.get(),
        Entry::Vacant(e) => {
            if next >= cap {
                return Err(Error::cap("chart items", cap));
            }
            let v = e.key().1.clone();
            e.insert(next);
            let id = next;
            chart.items.push((nt, v));
            chart.derivations.push(Vec::new());
            queue.push_back(id);
            id
        }
    };
    chart.derivations[id].push((rule, children));
    Ok(())
}

/// A derivation count, exact unless `saturated` (the true count is at least
/// `u64::MAX`, possibly infinite).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Count {
    pub value: u64,
    pub saturated: bool,
}

impl Count {
    pub const ZERO: Count = Count {
        value: 0,
        saturated: false,
    };
    pub const ONE: Count = Count {
        value: 1,
        saturated: false,
    };
    pub const MAX: Count = Count {
        value: u64::MAX,
        saturated: true,
    };

    fn add(self, o: Count) -> Count {
        match self.value.checked_add(o.value) {
            Some(v) if !self.saturated && !o.saturated => Count {
                value: v,
                saturated: false,
            },
            _ => Count::MAX,
        }
    }

    fn mul(self, o: Count) -> Count {
        if self.value == 0 || o.value == 0 {
            return Count::ZERO;
        }
        match self.value.checked_mul(o.value) {
            Some(v) if !self.saturated && !o.saturated => Count {
                value: v,
                saturated: false,
            },
            _ => Count::MAX,
        }
    }
}

impl fmt::Display for Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.saturated {
            write!(f, ">={}", self.value)
        } else {
            write!(f, "{}", self.value)
        }
    }
}

impl<V> Chart<V> {
    /// Derivation count of every item. Items on a derivation cycle have
    /// infinitely many derivations and saturate.
    pub fn counts(&self) -> Vec<Count> {
        let n = self.items.len();
        let mut graph: DiGraph<(), ()> = DiGraph::with_capacity(n, 0);
        for _ in 0..n {
            graph.add_node(());
        }
        for (i, ds) in self.derivations.iter().enumerate() {
            for (_, children) in ds {
                for &c in children {
                    graph.add_edge(NodeIndex::new(i), NodeIndex::new(c), ());
                }
            }
        }
        let mut counts = vec![Count::ZERO; n];
        // components come out dependencies first
        for scc in tarjan_scc(&graph) {
            let cyclic = scc.len() > 1 || graph.contains_edge(scc[0], scc[0]);
            for node in scc {
                let i = node.index();
                counts[i] = if cyclic {
                    Count::MAX
                } else {
                    self.derivations[i]
                        .iter()
                        .fold(Count::ZERO, |acc, (_, children)| {
                            acc.add(children.iter().fold(Count::ONE, |m, &c| m.mul(counts[c])))
                        })
                };
            }
        }
        counts
    }
}

use std::collections::HashMap;
use std::rc::Rc;

use super::ConfigAssignment;
use crate::decomposition::{ConeTypeSystem, NodePath};
use crate::error::{Error, Result};
use crate::grammar::{NtId, Skeleton};
use crate::limits::Limits;

/// A derivation of the configuration grammar: a nonterminal and, for
/// non-boring ones, one subderivation per child slot.
struct Derivation {
    nt: NtId,
    weight: usize,
    children: Vec<Rc<Derivation>>,
}

struct Enumerator<'s> {
    sk: &'s Skeleton,
    min_weight: Vec<usize>,
    memo: HashMap<(NtId, usize), Rc<Vec<Rc<Derivation>>>>,
    produced: usize,
    cap: usize,
}

impl Enumerator<'_> {
    /// Least weight of any derivation, `usize::MAX` if there is none.
    fn min_weights(sk: &Skeleton) -> Vec<usize> {
        let mut w: Vec<usize> = sk
            .nonterminals
            .iter()
            .map(|n| if n.boring { 0 } else { usize::MAX })
            .collect();
        loop {
            let mut changed = false;
            for t in &sk.templates {
                let mut total = sk.nonterminals[t.head].weight;
                for &l in &t.slots {
                    let best = sk.lists[l]
                        .members
                        .iter()
                        .map(|&m| w[m])
                        .min()
                        .unwrap_or(usize::MAX);
                    total = total.saturating_add(best);
                }
                if total < w[t.head] {
                    w[t.head] = total;
                    changed = true;
                }
            }
            if !changed {
                return w;
            }
        }
    }

    /// All derivations of `nt` with weight at most `budget`.
    fn derive(&mut self, nt: NtId, budget: usize) -> Result<Rc<Vec<Rc<Derivation>>>> {
        if let Some(d) = self.memo.get(&(nt, budget)) {
            return Ok(d.clone());
        }
        let mut out = Vec::new();
        if self.min_weight[nt] <= budget {
            match self.sk.template(nt) {
                None => out.push(Rc::new(Derivation {
                    nt,
                    weight: 0,
                    children: vec![],
                })),
                Some(t) => {
                    let own = self.sk.nonterminals[nt].weight;
                    let mut partial: Vec<(usize, Vec<Rc<Derivation>>)> = vec![(own, vec![])];
                    for &l in &t.slots.clone() {
                        let mut next = Vec::new();
                        for (w, kids) in &partial {
                            for &m in &self.sk.lists[l].members.clone() {
                                if self.min_weight[m] > budget - w {
                                    continue;
                                }
                                for d in self.derive(m, budget - w)?.iter() {
                                    let mut k = kids.clone();
                                    k.push(d.clone());
                                    next.push((w + d.weight, k));
                                }
                            }
                        }
                        partial = next;
                    }
                    for (weight, children) in partial {
                        out.push(Rc::new(Derivation {
                            nt,
                            weight,
                            children,
                        }));
                    }
                }
            }
        }
        self.produced += out.len();
        if self.produced > self.cap {
            return Err(Error::cap("enumerated derivations", self.cap));
        }
        let out = Rc::new(out);
        self.memo.insert((nt, budget), out.clone());
        Ok(out)
    }
}

fn collect(sk: &Skeleton, d: &Derivation, path: &mut NodePath, out: &mut ConfigAssignment) {
    if !sk.nonterminals[d.nt].boring {
        out.configs.insert(path.clone(), sk.config(d.nt).clone());
    }
    for (s, c) in d.children.iter().enumerate() {
        path.push(s as u16);
        collect(sk, c, path, out);
        path.pop();
    }
}

/// Every bounded consistent assignment of weight 1..=`max_weight`, read off
/// the derivations of the configuration grammar; sorted by weight, then by
/// the assignment itself.
pub fn enumerate_bounded_configs(
    system: &ConeTypeSystem,
    max_weight: usize,
    limits: &Limits,
) -> Result<Vec<ConfigAssignment>> {
    let sk = Skeleton::build(system, limits)?;
    let mut e = Enumerator {
        min_weight: Enumerator::min_weights(&sk),
        sk: &sk,
        memo: HashMap::new(),
        produced: 0,
        cap: limits.max_cells,
    };
    let mut out = Vec::new();
    for &s in &sk.start {
        for d in e.derive(s, max_weight)?.iter() {
            let mut a = ConfigAssignment::default();
            collect(&sk, d, &mut Vec::new(), &mut a);
            if a.support_depth() > limits.max_unfold_depth {
                return Err(Error::cap("assignment depth", limits.max_unfold_depth));
            }
            out.push(a);
        }
    }
    out.sort_by_cached_key(|a| (a.weight(), a.clone()));
    Ok(out)
}

//! The configuration grammar and the SAW MCFG, built on one shared skeleton:
//! a nonterminal per configuration, and per non-boring configuration a
//! template listing, slot by slot, the compatible child configurations.

mod cfg;
mod saw;

use std::collections::{BTreeMap, HashMap, VecDeque};

use rayon::prelude::*;

use crate::config::{
    child_interface, enumerate_configurations, is_boring, parent_interface, weight, Configuration,
    Interface,
};
use crate::decomposition::{ConeTypeSystem, PartGraph, TypeId};
use crate::error::Result;
use crate::limits::Limits;

pub use cfg::{build_config_cfg, ConfigCfg};
pub use saw::{build_saw_mcfg, check_rank_bound, load_grammar, SawMcfg, SAW_FORMAT};

/// Index of a configuration nonterminal: types in order, configurations in
/// canonical order within each type.
pub type NtId = usize;
pub type ListId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NtInfo {
    pub type_id: TypeId,
    pub ordinal: usize,
    pub weight: usize,
    pub boring: bool,
    /// Has a finite derivation.
    pub productive: bool,
    /// Productive and reachable from a productive root configuration.
    pub live: bool,
}

/// Compatible child configurations of one slot, all of `child_type`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SlotList {
    pub child_type: TypeId,
    pub members: Vec<NtId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Template {
    pub head: NtId,
    /// One list per child slot of the head's type, in slot order.
    pub slots: Vec<ListId>,
}

#[derive(Clone, Debug)]
pub struct Skeleton {
    pub system: ConeTypeSystem,
    pub parts: Vec<PartGraph>,
    pub configs: Vec<Vec<Configuration>>,
    offsets: Vec<usize>,
    pub nonterminals: Vec<NtInfo>,
    /// Lists used by live templates, interned.
    pub lists: Vec<SlotList>,
    /// Templates of live non-boring nonterminals, in nonterminal order.
    pub templates: Vec<Template>,
    template_of: Vec<Option<usize>>,
    /// Live root configurations.
    pub start: Vec<NtId>,
}

impl Skeleton {
    pub fn build(system: &ConeTypeSystem, limits: &Limits) -> Result<Self> {
        let parts: Vec<PartGraph> = (0..system.types.len())
            .map(|t| PartGraph::new(system, t))
            .collect();
        let configs = (0..system.types.len())
            .into_par_iter()
            .map(|t| enumerate_configurations(system, t, limits))
            .collect::<Result<Vec<_>>>()?;
        let mut offsets = Vec::with_capacity(configs.len() + 1);
        offsets.push(0);
        for cs in &configs {
            offsets.push(offsets.last().unwrap() + cs.len());
        }
        let total = *offsets.last().unwrap();
        if total > limits.max_cells {
            return Err(crate::error::Error::cap(
                "grammar nonterminals",
                limits.max_cells,
            ));
        }
        let mut nonterminals = Vec::with_capacity(total);
        for (t, cs) in configs.iter().enumerate() {
            for (i, c) in cs.iter().enumerate() {
                nonterminals.push(NtInfo {
                    type_id: t,
                    ordinal: i,
                    weight: weight(c),
                    boring: is_boring(c, &parts[t]),
                    productive: false,
                    live: false,
                });
            }
        }

        // children indexed by the interface they show their parent
        let index: Vec<HashMap<Interface, Vec<usize>>> = configs
            .iter()
            .enumerate()
            .map(|(t, cs)| {
                let mut m: HashMap<Interface, Vec<usize>> = HashMap::new();
                for (i, c) in cs.iter().enumerate() {
                    m.entry(child_interface(c, &parts[t])).or_default().push(i);
                }
                m
            })
            .collect();

        // raw lists, shared between parents showing the same interface
        let mut raw: Vec<Vec<NtId>> = Vec::new();
        let mut raw_ids: HashMap<(TypeId, Interface), usize> = HashMap::new();
        let mut raw_slots: Vec<Option<Vec<usize>>> = vec![None; total];
        for (t, cs) in configs.iter().enumerate() {
            let part = &parts[t];
            for (i, c) in cs.iter().enumerate() {
                let nt = offsets[t] + i;
                if nonterminals[nt].boring {
                    continue;
                }
                let mut slots = Vec::with_capacity(part.slot_count());
                for (s, &ct) in part.child_types.iter().enumerate() {
                    let pi = parent_interface(c, part, s as u16);
                    let next = raw.len();
                    let id = *raw_ids.entry((ct, pi.clone())).or_insert(next);
                    if id == next {
                        let mut members: Vec<NtId> = matching_keys(&pi)
                            .iter()
                            .filter_map(|k| index[ct].get(k))
                            .flatten()
                            .map(|&o| offsets[ct] + o)
                            .collect();
                        members.sort_unstable();
                        raw.push(members);
                    }
                    slots.push(id);
                }
                raw_slots[nt] = Some(slots);
            }
        }

        // productivity: boring ones, then templates whose every slot has a productive member
        let mut productive: Vec<bool> = nonterminals.iter().map(|n| n.boring).collect();
        loop {
            let mut changed = false;
            for nt in 0..total {
                if productive[nt] {
                    continue;
                }
                if let Some(slots) = &raw_slots[nt] {
                    if slots.iter().all(|&l| raw[l].iter().any(|&m| productive[m])) {
                        productive[nt] = true;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }

        let root = system.root_type;
        let start: Vec<NtId> = (offsets[root]..offsets[root + 1])
            .filter(|&n| productive[n])
            .collect();
        let mut live = vec![false; total];
        let mut queue: VecDeque<NtId> = start.iter().copied().collect();
        for &s in &start {
            live[s] = true;
        }
        while let Some(nt) = queue.pop_front() {
            for &l in raw_slots[nt].iter().flatten() {
                for &m in &raw[l] {
                    if productive[m] && !live[m] {
                        live[m] = true;
                        queue.push_back(m);
                    }
                }
            }
        }

        let mut lists = Vec::new();
        let mut list_ids: BTreeMap<SlotList, ListId> = BTreeMap::new();
        let mut templates = Vec::new();
        let mut template_of = vec![None; total];
        for nt in 0..total {
            nonterminals[nt].productive = productive[nt];
            nonterminals[nt].live = live[nt];
            let (true, Some(slots)) = (live[nt], &raw_slots[nt]) else {
                continue;
            };
            let t = nonterminals[nt].type_id;
            let slots = slots
                .iter()
                .enumerate()
                .map(|(s, &l)| {
                    let list = SlotList {
                        child_type: parts[t].child_types[s],
                        members: raw[l].iter().copied().filter(|&m| productive[m]).collect(),
                    };
                    let next = lists.len();
                    let id = *list_ids.entry(list.clone()).or_insert(next);
                    if id == next {
                        lists.push(list);
                    }
                    id
                })
                .collect();
            template_of[nt] = Some(templates.len());
            templates.push(Template { head: nt, slots });
        }

        Ok(Skeleton {
            system: system.clone(),
            parts,
            configs,
            offsets,
            nonterminals,
            lists,
            templates,
            template_of,
            start,
        })
    }

    pub fn nt(&self, type_id: TypeId, ordinal: usize) -> NtId {
        self.offsets[type_id] + ordinal
    }

    pub fn config(&self, nt: NtId) -> &Configuration {
        let n = &self.nonterminals[nt];
        &self.configs[n.type_id][n.ordinal]
    }

    pub fn part(&self, nt: NtId) -> &PartGraph {
        &self.parts[self.nonterminals[nt].type_id]
    }

    pub fn template(&self, nt: NtId) -> Option<&Template> {
        self.template_of[nt].map(|i| &self.templates[i])
    }

    pub fn name(&self, nt: NtId) -> String {
        let n = &self.nonterminals[nt];
        format!("{}.{}", self.system.types[n.type_id].name, n.ordinal)
    }

    pub fn live_count(&self) -> usize {
        self.nonterminals.iter().filter(|n| n.live).count()
    }
}

/// Child interfaces that a parent showing `pi` accepts.
fn matching_keys(pi: &Interface) -> Vec<Interface> {
    let base = |ends_at_last| Interface {
        seq: pi.seq.clone(),
        gaps: pi.gaps.iter().map(|g| !g).collect(),
        crosses: pi.crosses,
        ends_at_last,
    };
    if pi.seq.is_empty() {
        vec![Interface {
            seq: vec![],
            gaps: vec![],
            crosses: false,
            ends_at_last: false,
        }]
    } else if !pi.crosses {
        vec![base(true)]
    } else if pi.ends_at_last {
        vec![base(false), base(true)]
    } else {
        vec![]
    }
}

use std::sync::Arc;

use serde_json::{json, Value};

use super::saw::product;
use super::{NtId, Skeleton};
use crate::alphabet::Alphabet;
use crate::decomposition::ConeTypeSystem;
use crate::error::Result;
use crate::limits::Limits;
use crate::mcfg::{Mcfg, Nonterminal, Rule, Token};

/// The context-free grammar of configurations: one terminal per configuration,
/// derivation trees in bijection with bounded consistent assignments.
#[derive(Clone, Debug)]
pub struct ConfigCfg {
    pub skeleton: Arc<Skeleton>,
}

pub fn build_config_cfg(system: &ConeTypeSystem, limits: &Limits) -> Result<ConfigCfg> {
    Ok(ConfigCfg {
        skeleton: Arc::new(Skeleton::build(system, limits)?),
    })
}

pub const CFG_FORMAT: &str = "config-cfg";

impl ConfigCfg {
    /// All configuration nonterminals plus the start symbol, before pruning.
    pub fn nonterminal_count(&self) -> usize {
        self.skeleton.nonterminals.len() + 1
    }

    pub fn terminal_weight(&self, nt: NtId) -> usize {
        self.skeleton.nonterminals[nt].weight
    }

    pub fn to_json(&self) -> Value {
        let sk = &*self.skeleton;
        let nts: Vec<Value> = sk
            .nonterminals
            .iter()
            .enumerate()
            .map(|(nt, n)| {
                json!({
                    "name": sk.name(nt),
                    "type": sk.system.types[n.type_id].name,
                    "config": n.ordinal,
                    "weight": n.weight,
                    "boring": n.boring,
                    "live": n.live,
                })
            })
            .collect();
        let lists: Vec<Value> = sk
            .lists
            .iter()
            .enumerate()
            .map(|(i, l)| {
                json!({
                    "name": format!("L{i}"),
                    "type": sk.system.types[l.child_type].name,
                    "members": l.members.iter().map(|&m| sk.name(m)).collect::<Vec<_>>(),
                })
            })
            .collect();
        let templates: Vec<Value> = sk
            .templates
            .iter()
            .map(|t| {
                json!({
                    "head": sk.name(t.head),
                    "terminal": format!("a.{}", sk.name(t.head)),
                    "slots": t.slots.iter().map(|l| format!("L{l}")).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({
            "format": CFG_FORMAT,
            "start": "S",
            "start_rules": sk.start.iter().map(|&s| sk.name(s)).collect::<Vec<_>>(),
            "nonterminals": nts,
            "slot_lists": lists,
            "templates": templates,
        })
    }

    /// The grammar as a rank-1 MCFG over the terminals `a.<type>.<ordinal>`,
    /// with the weight of every terminal symbol.
    pub fn to_mcfg(&self) -> (Mcfg, Vec<usize>) {
        let sk = &*self.skeleton;
        let live: Vec<NtId> = (0..sk.nonterminals.len())
            .filter(|&n| sk.nonterminals[n].live)
            .collect();
        let terminal_nts: Vec<NtId> = live
            .iter()
            .copied()
            .filter(|&n| !sk.nonterminals[n].boring)
            .collect();
        let alphabet =
            Alphabet::from_labels(terminal_nts.iter().map(|&n| format!("a.{}", sk.name(n))));
        let mut weights = vec![0; alphabet.len()];
        for &n in &terminal_nts {
            weights[alphabet.symbol(&format!("a.{}", sk.name(n))).unwrap().0 as usize] =
                sk.nonterminals[n].weight;
        }

        let mut nonterminals = vec![Nonterminal {
            name: "S".into(),
            rank: 1,
        }];
        let mut id = vec![usize::MAX; sk.nonterminals.len()];
        for &n in &live {
            id[n] = nonterminals.len();
            nonterminals.push(Nonterminal {
                name: sk.name(n),
                rank: 1,
            });
        }
        let list_base = nonterminals.len();
        for i in 0..sk.lists.len() {
            nonterminals.push(Nonterminal {
                name: format!("L{i}"),
                rank: 1,
            });
        }

        let mut rules = Vec::new();
        for &s in &sk.start {
            rules.push(Rule {
                head: 0,
                args: vec![vec![Token::Var(0, 0)]],
                tail: vec![id[s]],
            });
        }
        for &n in &live {
            match sk.template(n) {
                None => rules.push(Rule {
                    head: id[n],
                    args: vec![vec![]],
                    tail: vec![],
                }),
                Some(t) => {
                    let a = alphabet.symbol(&format!("a.{}", sk.name(n))).unwrap();
                    let mut arg = vec![Token::Lit(a)];
                    arg.extend((0..t.slots.len()).map(|s| Token::Var(s as u16, 0)));
                    rules.push(Rule {
                        head: id[n],
                        args: vec![arg],
                        tail: t.slots.iter().map(|&l| list_base + l).collect(),
                    });
                }
            }
        }
        for (i, l) in sk.lists.iter().enumerate() {
            for &m in &l.members {
                rules.push(Rule {
                    head: list_base + i,
                    args: vec![vec![Token::Var(0, 0)]],
                    tail: vec![id[m]],
                });
            }
        }
        (
            Mcfg {
                alphabet,
                nonterminals,
                start: 0,
                rules,
            },
            weights,
        )
    }

    /// [`ConfigCfg::to_mcfg`] with every slot choice multiplied out.
    pub fn to_mcfg_expanded(&self, limits: &Limits) -> Result<Mcfg> {
        let (m, _) = self.to_mcfg();
        let list_base = m.nonterminals.len() - self.skeleton.lists.len();
        let mut choices: Vec<Vec<usize>> = vec![Vec::new(); self.skeleton.lists.len()];
        for r in m.rules.iter().filter(|r| r.head >= list_base) {
            choices[r.head - list_base].push(r.tail[0]);
        }
        let mut rules = Vec::new();
        for r in m.rules.iter().filter(|r| r.head < list_base) {
            let options: Vec<Vec<usize>> = r
                .tail
                .iter()
                .map(|&t| {
                    if t >= list_base {
                        choices[t - list_base].clone()
                    } else {
                        vec![t]
                    }
                })
                .collect();
            product(&options, &mut Vec::new(), &mut |tail| {
                rules.push(Rule {
                    head: r.head,
                    args: r.args.clone(),
                    tail: tail.to_vec(),
                });
                if rules.len() > limits.max_cells {
                    return Err(crate::error::Error::cap("expanded rules", limits.max_cells));
                }
                Ok(())
            })?;
        }
        let mut nonterminals = m.nonterminals;
        nonterminals.truncate(list_base);
        Ok(Mcfg {
            alphabet: m.alphabet,
            nonterminals,
            start: 0,
            rules,
        })
    }
}

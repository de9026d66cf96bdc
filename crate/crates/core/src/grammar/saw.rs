use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{NtId, Skeleton};
use crate::alphabet::Alphabet;
use crate::config::{component_shapes, rank, ComponentShape, Configuration, Exit};
use crate::decomposition::{ConeTypeSystem, EdgeRef, PartGraph, Side};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::mcfg::{self, Mcfg, Nonterminal, Rule, Token, TokenFile};

/// The SAW grammar: configuration nonterminals of rank r(c), whose head
/// strings interleave real-edge labels with the child slots' variables.
#[derive(Clone, Debug)]
pub struct SawMcfg {
    pub skeleton: Arc<Skeleton>,
    /// Rank per configuration nonterminal.
    pub ranks: Vec<usize>,
    /// Rank shared by all members of each slot list.
    pub list_ranks: Vec<usize>,
    /// Head strings per template, aligned with `skeleton.templates`.
    pub args: Vec<Vec<Vec<Token>>>,
}

pub fn build_saw_mcfg(system: &ConeTypeSystem, limits: &Limits) -> Result<SawMcfg> {
    SawMcfg::from_skeleton(Arc::new(Skeleton::build(system, limits)?))
}

/// Head strings of a configuration, and the number of variables each slot contributes.
pub(crate) fn head_strings(
    system: &ConeTypeSystem,
    part: &PartGraph,
    c: &Configuration,
) -> (Vec<Vec<Token>>, Vec<usize>) {
    let edges = &system.types[part.type_id].own_edges;
    let walk = &c.walk;
    let mut used = vec![0u16; part.slot_count()];
    let mut strings = Vec::new();
    let ranges = if part.is_root {
        std::iter::once(0..walk.vertices.len()).collect::<Vec<_>>()
    } else {
        component_shapes(c, part)
            .into_iter()
            .filter(|(_, s)| *s != ComponentShape::Dropped)
            .map(|(r, _)| r)
            .collect()
    };
    for r in ranges {
        let mut s = Vec::new();
        for k in r.start..r.end - 1 {
            match walk.edges[k] {
                EdgeRef::Real(i) => {
                    s.push(Token::Lit(edges[i as usize].label_from(walk.vertices[k])))
                }
                EdgeRef::Virtual(Side::Child(i)) => {
                    if k == r.start || walk.edges[k - 1] != EdgeRef::Virtual(Side::Child(i)) {
                        s.push(Token::Var(i, used[i as usize]));
                        used[i as usize] += 1;
                    }
                }
                EdgeRef::Virtual(Side::Parent) => {
                    unreachable!("parent virtual edges split components")
                }
            }
        }
        strings.push(s);
    }
    if let Exit::Child(i) = c.exit {
        if walk.edges.last() != Some(&EdgeRef::Virtual(Side::Child(i))) {
            strings
                .last_mut()
                .expect("exit into a child needs a walk")
                .push(Token::Var(i, used[i as usize]));
            used[i as usize] += 1;
        }
    }
    (strings, used.into_iter().map(usize::from).collect())
}

impl SawMcfg {
    pub fn from_skeleton(skeleton: Arc<Skeleton>) -> Result<Self> {
        let sk = &*skeleton;
        let ranks: Vec<usize> = (0..sk.nonterminals.len())
            .map(|nt| rank(sk.config(nt), sk.part(nt)))
            .collect();
        let mut list_ranks = Vec::with_capacity(sk.lists.len());
        for (i, l) in sk.lists.iter().enumerate() {
            let r = l.members.first().map_or(0, |&m| ranks[m]);
            if let Some(&m) = l.members.iter().find(|&&m| ranks[m] != r) {
                return Err(Error::Inconsistent(format!(
                    "slot list L{i} mixes ranks {r} and {} ({})",
                    ranks[m],
                    sk.name(m)
                )));
            }
            list_ranks.push(r);
        }
        let mut args = Vec::with_capacity(sk.templates.len());
        for t in &sk.templates {
            let (c, part) = (sk.config(t.head), sk.part(t.head));
            let (strings, used) = head_strings(&sk.system, part, c);
            if strings.len() != ranks[t.head] {
                return Err(Error::Inconsistent(format!(
                    "{}: {} head strings for rank {}",
                    sk.name(t.head),
                    strings.len(),
                    ranks[t.head]
                )));
            }
            for (s, &l) in t.slots.iter().enumerate() {
                if used[s] != list_ranks[l] {
                    return Err(Error::Inconsistent(format!(
                        "{}: slot {s} takes {} variables but its children have rank {}",
                        sk.name(t.head),
                        used[s],
                        list_ranks[l]
                    )));
                }
            }
            args.push(strings);
        }
        Ok(SawMcfg {
            skeleton,
            ranks,
            list_ranks,
            args,
        })
    }

    pub fn max_rank(&self) -> usize {
        let sk = &*self.skeleton;
        (0..sk.nonterminals.len())
            .filter(|&n| sk.nonterminals[n].live)
            .map(|n| self.ranks[n])
            .max()
            .unwrap_or(0)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.skeleton.system.alphabet
    }

    fn to_file(&self) -> SawFile {
        let sk = &*self.skeleton;
        let alphabet = self.alphabet();
        let live: Vec<NtId> = (0..sk.nonterminals.len())
            .filter(|&n| sk.nonterminals[n].live)
            .collect();
        SawFile {
            format: SAW_FORMAT.into(),
            k_max: sk.system.k_max,
            max_rank: self.max_rank(),
            alphabet: alphabet.labels().to_vec(),
            start: "S".into(),
            start_rules: sk.start.iter().map(|&s| sk.name(s)).collect(),
            nonterminals: live
                .iter()
                .map(|&n| {
                    let info = &sk.nonterminals[n];
                    NtFile {
                        name: sk.name(n),
                        type_name: sk.system.types[info.type_id].name.clone(),
                        config: info.ordinal,
                        rank: self.ranks[n],
                        weight: info.weight,
                    }
                })
                .collect(),
            slot_lists: sk
                .lists
                .iter()
                .enumerate()
                .map(|(i, l)| ListFile {
                    name: format!("L{i}"),
                    rank: self.list_ranks[i],
                    members: l.members.iter().map(|&m| sk.name(m)).collect(),
                })
                .collect(),
            templates: sk
                .templates
                .iter()
                .zip(&self.args)
                .map(|(t, a)| TemplateFile {
                    head: sk.name(t.head),
                    args: a
                        .iter()
                        .map(|s| {
                            s.iter()
                                .map(|&tok| TokenFile::from_token(alphabet, tok))
                                .collect()
                        })
                        .collect(),
                    slots: t.slots.iter().map(|l| format!("L{l}")).collect(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self.to_file()).expect("grammar serializes")
    }

    /// Lowers to a plain MCFG. Slot lists become choice nonterminals unless
    /// `expand` asks for the full product of rules.
    pub fn to_mcfg(&self, expand: bool, limits: &Limits) -> Result<Mcfg> {
        lower(&self.to_file(), expand, limits)
    }
}

/// Every rank is at most half the adhesion bound, rounded up.
pub fn check_rank_bound(g: &SawMcfg, k: usize) -> bool {
    g.max_rank() <= k.div_ceil(2)
}

pub const SAW_FORMAT: &str = "saw-mcfg";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SawFile {
    format: String,
    k_max: usize,
    max_rank: usize,
    alphabet: Vec<String>,
    start: String,
    start_rules: Vec<String>,
    nonterminals: Vec<NtFile>,
    slot_lists: Vec<ListFile>,
    templates: Vec<TemplateFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NtFile {
    name: String,
    #[serde(rename = "type")]
    type_name: String,
    config: usize,
    rank: usize,
    weight: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ListFile {
    name: String,
    rank: usize,
    members: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TemplateFile {
    head: String,
    args: Vec<Vec<TokenFile>>,
    slots: Vec<String>,
}

fn lower(f: &SawFile, expand: bool, limits: &Limits) -> Result<Mcfg> {
    let alphabet = Alphabet::from_labels(f.alphabet.iter().cloned());
    let mut nonterminals = vec![Nonterminal {
        name: f.start.clone(),
        rank: 1,
    }];
    nonterminals.extend(f.nonterminals.iter().map(|n| Nonterminal {
        name: n.name.clone(),
        rank: n.rank,
    }));
    if !expand {
        nonterminals.extend(f.slot_lists.iter().map(|l| Nonterminal {
            name: l.name.clone(),
            rank: l.rank,
        }));
    }
    let index: HashMap<&str, usize> = nonterminals
        .iter()
        .enumerate()
        .map(|(i, n)| (n.name.as_str(), i))
        .collect();
    if index.len() != nonterminals.len() {
        return Err(Error::InvalidGrammar(vec![
            "duplicate nonterminal names".into()
        ]));
    }
    let lookup = |name: &str| {
        index
            .get(name)
            .copied()
            .ok_or_else(|| Error::InvalidGrammar(vec![format!("unknown nonterminal {name:?}")]))
    };
    let lists: HashMap<&str, &ListFile> =
        f.slot_lists.iter().map(|l| (l.name.as_str(), l)).collect();
    let list = |name: &str| {
        lists
            .get(name)
            .copied()
            .ok_or_else(|| Error::InvalidGrammar(vec![format!("unknown slot list {name:?}")]))
    };
    let var = |j: usize| Token::Var(0, j as u16);

    let mut rules = Vec::new();
    for s in &f.start_rules {
        rules.push(Rule {
            head: 0,
            args: vec![vec![var(0)]],
            tail: vec![lookup(s)?],
        });
    }
    let mut has_template = vec![false; nonterminals.len()];
    for t in &f.templates {
        let head = lookup(&t.head)?;
        has_template[head] = true;
        let args = t
            .args
            .iter()
            .map(|a| {
                a.iter()
                    .map(|tok| tok.to_token(&alphabet))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        if expand {
            let choices = t
                .slots
                .iter()
                .map(|l| list(l)?.members.iter().map(|m| lookup(m)).collect())
                .collect::<Result<Vec<Vec<_>>>>()?;
            let mut tail = Vec::with_capacity(choices.len());
            product(&choices, &mut tail, &mut |tail| {
                rules.push(Rule {
                    head,
                    args: args.clone(),
                    tail: tail.to_vec(),
                });
                if rules.len() > limits.max_cells {
                    return Err(Error::cap("expanded rules", limits.max_cells));
                }
                Ok(())
            })?;
        } else {
            let tail = t
                .slots
                .iter()
                .map(|l| lookup(l))
                .collect::<Result<Vec<_>>>()?;
            rules.push(Rule { head, args, tail });
        }
    }
    for n in &f.nonterminals {
        let id = lookup(&n.name)?;
        if !has_template[id] {
            if n.rank != 0 {
                return Err(Error::InvalidGrammar(vec![format!(
                    "{} has rank {} but no template",
                    n.name, n.rank
                )]));
            }
            rules.push(Rule {
                head: id,
                args: vec![],
                tail: vec![],
            });
        }
    }
    if !expand {
        for l in &f.slot_lists {
            let head = lookup(&l.name)?;
            for m in &l.members {
                rules.push(Rule {
                    head,
                    args: (0..l.rank).map(|j| vec![var(j)]).collect(),
                    tail: vec![lookup(m)?],
                });
            }
        }
    }
    Mcfg {
        alphabet,
        nonterminals,
        start: 0,
        rules,
    }
    .validated()
}

pub(super) fn product(
    choices: &[Vec<usize>],
    cur: &mut Vec<usize>,
    f: &mut impl FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    if cur.len() == choices.len() {
        return f(cur);
    }
    for &c in &choices[cur.len()] {
        cur.push(c);
        product(choices, cur, f)?;
        cur.pop();
    }
    Ok(())
}

/// Reads any grammar file this crate writes or accepts, as a plain MCFG.
pub fn load_grammar(text: &str) -> Result<Mcfg> {
    let v: Value = serde_json::from_str(text)?;
    match v.get("format").and_then(Value::as_str) {
        Some(mcfg::FORMAT) => Mcfg::from_json(text)?.validated(),
        Some(SAW_FORMAT) => lower(&serde_json::from_value(v)?, false, &Limits::from_env()),
        other => Err(Error::Input(format!(
            "unsupported grammar format {other:?}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::mcfg::{generate, validate_grammar};

    fn built(name: &str) -> SawMcfg {
        build_saw_mcfg(&corpus::system(name).unwrap(), &Limits::default()).unwrap()
    }

    #[test]
    fn line_language() {
        let g = built("line");
        assert_eq!(g.max_rank(), 1);
        let m = g.to_mcfg(false, &Limits::default()).unwrap();
        let words: Vec<String> = generate(&m, 3, &Limits::default())
            .unwrap()
            .words
            .iter()
            .map(|(w, _)| m.alphabet.render(w))
            .collect();
        assert_eq!(words, ["l", "r", "ll", "rr", "lll", "rrr"]);
    }

    #[test]
    fn rank_bounds() {
        for (name, sys) in corpus::load_all().unwrap() {
            let g = build_saw_mcfg(&sys, &Limits::default()).unwrap();
            assert!(check_rank_bound(&g, sys.k_max), "{name}");
        }
        assert_eq!(built("ladder").max_rank(), 1);
        assert_eq!(built("paper-example").max_rank(), 2);
    }

    #[test]
    fn variables_used_exactly_once() {
        for (name, sys) in corpus::load_all().unwrap() {
            let g = build_saw_mcfg(&sys, &Limits::default()).unwrap();
            let m = g.to_mcfg(false, &Limits::default()).unwrap();
            let r = validate_grammar(&m);
            assert!(
                r.is_accepted() && r.warnings.is_empty(),
                "{name}: {:?} {:?}",
                r.violations,
                r.warnings
            );
        }
    }

    #[test]
    fn expanded_rules_keep_the_language() {
        let g = built("ladder");
        let lim = Limits::default();
        let a = generate(&g.to_mcfg(false, &lim).unwrap(), 5, &lim).unwrap();
        let b = generate(&g.to_mcfg(true, &lim).unwrap(), 5, &lim).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn expanded_rules_have_distinct_head_and_tail() {
        for name in ["line", "ladder", "tree3"] {
            let m = built(name).to_mcfg(true, &Limits::default()).unwrap();
            let mut seen = std::collections::HashSet::new();
            for r in &m.rules {
                assert!(seen.insert((r.head, r.tail.clone())), "{name}");
            }
        }
    }

    #[test]
    fn export_reloads() {
        let g = built("tree3");
        let text = g.to_json().to_string();
        let m = load_grammar(&text).unwrap();
        assert_eq!(m, g.to_mcfg(false, &Limits::default()).unwrap());
        assert!(load_grammar(r#"{"format": "other"}"#).is_err());
    }
}

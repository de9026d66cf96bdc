use super::chart::{saturate, Count, Domain};
use super::{Mcfg, Rule, Token};
use crate::alphabet::Word;
use crate::error::Result;
use crate::limits::Limits;

/// Items are tuples of words whose used coordinates fit the length bound.
struct Bounded {
    max_len: usize,
    literals: Vec<usize>,
    /// Per rule and tail position, the coordinates the head actually uses.
    used: Vec<Vec<Vec<usize>>>,
    /// Per rule and tail position, whether every coordinate is used.
    full: Vec<Vec<bool>>,
}

impl Bounded {
    fn new(g: &Mcfg, max_len: usize) -> Self {
        let literals = g
            .rules
            .iter()
            .map(|r| {
                r.args
                    .iter()
                    .flatten()
                    .filter(|t| matches!(t, Token::Lit(_)))
                    .count()
            })
            .collect();
        let used = g
            .rules
            .iter()
            .map(|r| {
                let mut u = vec![Vec::new(); r.tail.len()];
                for t in r.args.iter().flatten() {
                    if let Token::Var(s, j) = *t {
                        u[s as usize].push(j as usize);
                    }
                }
                u
            })
            .collect();
        let full = g
            .rules
            .iter()
            .zip(&used)
            .map(|(r, u): (&Rule, &Vec<Vec<usize>>)| {
                r.tail
                    .iter()
                    .zip(u)
                    .map(|(&t, cols)| cols.len() == g.nonterminals[t].rank)
                    .collect()
            })
            .collect();
        Bounded {
            max_len,
            literals,
            used,
            full,
        }
    }
}

impl Bounded {
    /// Letters fixed so far by the rule's literals and the chosen children.
    fn spent(&self, r: usize, chosen: &[&Vec<Word>]) -> usize {
        let mut len = self.literals[r];
        for (q, v) in chosen.iter().enumerate() {
            len += self.used[r][q].iter().map(|&j| v[j].len()).sum::<usize>();
        }
        len
    }
}

impl Domain for Bounded {
    type Value = Vec<Word>;

    fn apply(&self, rule: &Rule, children: &[&Vec<Word>], out: &mut Vec<Vec<Word>>) {
        let mut total = 0;
        let mut result = Vec::with_capacity(rule.args.len());
        for arg in &rule.args {
            let mut w = Vec::new();
            for t in arg {
                match *t {
                    Token::Lit(s) => w.push(s),
                    Token::Var(s, j) => w.extend_from_slice(&children[s as usize][j as usize]),
                }
            }
            total += w.len();
            result.push(w);
        }
        if total <= self.max_len {
            out.push(result);
        }
    }

    fn admissible(&self, r: usize, chosen: &[&Vec<Word>]) -> bool {
        self.spent(r, chosen) <= self.max_len
    }

    fn bucket(&self, v: &Vec<Word>) -> usize {
        v.iter().map(Vec::len).sum()
    }

    fn bucket_limit(&self, r: usize, chosen: &[&Vec<Word>]) -> usize {
        if self.full[r][chosen.len()] {
            self.max_len.saturating_sub(self.spent(r, chosen))
        } else {
            usize::MAX
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generation {
    /// Generated words with their derivation counts, shortest first.
    pub words: Vec<(Word, Count)>,
}

impl Generation {
    pub fn word_set(&self) -> Vec<Word> {
        self.words.iter().map(|(w, _)| w.clone()).collect()
    }
}

/// Every word of length at most `max_len`, by saturation over word tuples
/// whose total length is bounded. Exact when no rule deletes a coordinate.
pub fn generate(g: &Mcfg, max_len: usize, limits: &Limits) -> Result<Generation> {
    let chart = saturate(g, &Bounded::new(g, max_len), limits.max_cells)?;
    let counts = chart.counts();
    let mut words: Vec<(Word, Count)> = chart
        .items
        .iter()
        .zip(counts)
        .filter(|((nt, _), _)| *nt == g.start)
        .map(|((_, v), c)| (v[0].clone(), c))
        .collect();
    words.sort_by(|a, b| (a.0.len(), &a.0).cmp(&(b.0.len(), &b.0)));
    Ok(Generation { words })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmbiguityReport {
    pub words: Vec<(Word, Count)>,
    pub ambiguous: Vec<(Word, Count)>,
}

impl AmbiguityReport {
    pub fn is_unambiguous(&self) -> bool {
        self.ambiguous.is_empty()
    }
}

pub fn check_unambiguous_upto(
    g: &Mcfg,
    max_len: usize,
    limits: &Limits,
) -> Result<AmbiguityReport> {
    let words = generate(g, max_len, limits)?.words;
    let ambiguous = words
        .iter()
        .filter(|(_, c)| c.saturated || c.value >= 2)
        .cloned()
        .collect();
    Ok(AmbiguityReport { words, ambiguous })
}

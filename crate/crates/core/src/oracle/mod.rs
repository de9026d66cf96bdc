//! Brute-force ground truth: depth-first enumeration of self-avoiding walks
//! on a finite ball, sharing nothing with the grammar pipeline.

mod report;

use num_bigint::BigUint;
use rayon::prelude::*;

use crate::alphabet::{Symbol, Word};
use crate::decomposition::FiniteGraph;
use crate::error::{Error, Result};

pub use report::{
    bijection_check, compare_counts, compare_languages, BijectionReport, CountReport,
    LanguageReport,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SawCensus {
    /// `counts[n - 1]` is the number of walks of length `n`.
    pub counts: Vec<BigUint>,
    /// Label words per length, sorted, when requested.
    pub words: Option<Vec<Vec<Word>>>,
}

struct Branch {
    counts: Vec<u64>,
    words: Vec<Vec<Word>>,
}

struct Dfs<'g> {
    adj: &'g [Vec<(Symbol, usize)>],
    max_len: usize,
    keep: bool,
    on_path: Vec<bool>,
    labels: Word,
    out: Branch,
}

impl Dfs<'_> {
    fn walk(&mut self, v: usize) {
        let len = self.labels.len();
        self.out.counts[len - 1] += 1;
        if self.keep {
            self.out.words[len - 1].push(self.labels.clone());
        }
        if len == self.max_len {
            return;
        }
        for &(label, w) in &self.adj[v] {
            if !self.on_path[w] {
                self.on_path[w] = true;
                self.labels.push(label);
                self.walk(w);
                self.labels.pop();
                self.on_path[w] = false;
            }
        }
    }
}

/// Every self-avoiding walk of length 1..=`max_len` from the origin. The
/// graph must contain the whole ball of that radius.
pub fn enumerate_saws(graph: &FiniteGraph, max_len: usize, keep_words: bool) -> Result<SawCensus> {
    let mut adj: Vec<Vec<(Symbol, usize)>> = vec![Vec::new(); graph.vertex_count];
    for a in graph.arcs() {
        adj[a.from].push((a.label, a.to));
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    if max_len == 0 {
        return Ok(SawCensus {
            counts: vec![],
            words: keep_words.then(Vec::new),
        });
    }
    let o = graph.origin;
    let branches: Vec<Branch> = adj[o]
        .par_iter()
        .map(|&(label, w)| {
            let mut dfs = Dfs {
                adj: &adj,
                max_len,
                keep: keep_words,
                on_path: vec![false; adj.len()],
                labels: vec![label],
                out: Branch {
                    counts: vec![0; max_len],
                    words: vec![Vec::new(); max_len],
                },
            };
            dfs.on_path[o] = true;
            dfs.on_path[w] = true;
            dfs.walk(w);
            dfs.out
        })
        .collect();

    let mut counts = vec![BigUint::default(); max_len];
    let mut words = vec![Vec::new(); max_len];
    for b in branches {
        for (c, x) in counts.iter_mut().zip(b.counts) {
            *c += x;
        }
        for (all, mut ws) in words.iter_mut().zip(b.words) {
            all.append(&mut ws);
        }
    }
    if !keep_words {
        return Ok(SawCensus {
            counts,
            words: None,
        });
    }
    for ws in &mut words {
        ws.sort_unstable();
        if ws.windows(2).any(|p| p[0] == p[1]) {
            return Err(Error::Inconsistent("two walks share a label word".into()));
        }
    }
    Ok(SawCensus {
        counts,
        words: Some(words),
    })
}

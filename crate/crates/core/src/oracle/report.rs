use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use serde::Serialize;

use super::enumerate_saws;
use crate::alphabet::Word;
use crate::contraction::{enumerate_bounded_configs, project_saw, psi_r};
use crate::decomposition::{extract_ball, unfold, ConeTypeSystem};
use crate::error::Result;
use crate::grammar::build_saw_mcfg;
use crate::limits::Limits;
use crate::mcfg::generate;
use crate::series::saw_coefficients;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountRow {
    pub n: usize,
    pub oracle: String,
    pub grammar: String,
    #[serde(rename = "match")]
    pub matches: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountReport {
    pub rows: Vec<CountRow>,
    pub pass: bool,
}

pub fn compare_counts(
    system: &ConeTypeSystem,
    max_len: usize,
    limits: &Limits,
) -> Result<CountReport> {
    let ball = extract_ball(system, max_len, limits)?;
    let oracle = enumerate_saws(&ball, max_len, false)?.counts;
    let grammar = saw_coefficients(system, max_len, limits)?;
    let rows: Vec<CountRow> = oracle
        .iter()
        .zip(&grammar)
        .enumerate()
        .map(|(i, (o, g))| CountRow {
            n: i + 1,
            oracle: o.to_string(),
            grammar: g.to_string(),
            matches: o == g,
        })
        .collect();
    let pass = rows.iter().all(|r| r.matches);
    Ok(CountReport { rows, pass })
}

impl fmt::Display for CountReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>4}  {:>20}  {:>20}  match", "n", "oracle", "grammar")?;
        for r in &self.rows {
            writeln!(
                f,
                "{:>4}  {:>20}  {:>20}  {}",
                r.n,
                r.oracle,
                r.grammar,
                if r.matches { "yes" } else { "NO" }
            )?;
        }
        writeln!(f, "counts: {}", if self.pass { "pass" } else { "FAIL" })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LanguageReport {
    pub max_len: usize,
    pub oracle_words: usize,
    pub grammar_words: usize,
    /// Oracle words the grammar misses.
    pub missing: Vec<String>,
    /// Grammar words that are no walk.
    pub extra: Vec<String>,
    pub pass: bool,
}

pub fn compare_languages(
    system: &ConeTypeSystem,
    max_len: usize,
    limits: &Limits,
) -> Result<LanguageReport> {
    let ball = extract_ball(system, max_len, limits)?;
    let census = enumerate_saws(&ball, max_len, true)?;
    let oracle: BTreeSet<Word> = census.words.unwrap().into_iter().flatten().collect();
    let g = build_saw_mcfg(system, limits)?.to_mcfg(false, limits)?;
    let grammar: BTreeSet<Word> = generate(&g, max_len, limits)?
        .words
        .into_iter()
        .map(|(w, _)| w)
        .collect();
    let show = |w: &Word| {
        let s = system.alphabet.render(w);
        if s.is_empty() {
            "(empty)".to_string()
        } else {
            s
        }
    };
    let missing: Vec<String> = oracle.difference(&grammar).map(show).collect();
    let extra: Vec<String> = grammar.difference(&oracle).map(show).collect();
    Ok(LanguageReport {
        max_len,
        oracle_words: oracle.len(),
        grammar_words: grammar.len(),
        pass: missing.is_empty() && extra.is_empty(),
        missing,
        extra,
    })
}

impl fmt::Display for LanguageReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "words up to length {}: oracle {}, grammar {}",
            self.max_len, self.oracle_words, self.grammar_words
        )?;
        for w in &self.missing {
            writeln!(f, "  missing {w}")?;
        }
        for w in &self.extra {
            writeln!(f, "  extra   {w}")?;
        }
        writeln!(f, "language: {}", if self.pass { "pass" } else { "FAIL" })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BijectionRow {
    pub weight: usize,
    pub assignments: usize,
    pub oracle_walks: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BijectionReport {
    pub max_weight: usize,
    pub rows: Vec<BijectionRow>,
    /// Distinct assignments give distinct walks.
    pub injective: bool,
    /// Every oracle walk is reached.
    pub surjective: bool,
    pub weight_is_length: bool,
    /// Projecting each walk back gives its assignment.
    pub round_trip: bool,
    pub pass: bool,
}

pub fn bijection_check(
    system: &ConeTypeSystem,
    max_weight: usize,
    limits: &Limits,
) -> Result<BijectionReport> {
    let assignments = enumerate_bounded_configs(system, max_weight, limits)?;
    let depth = assignments
        .iter()
        .map(|a| a.support_depth())
        .max()
        .unwrap_or(0)
        + 1;
    let dec = unfold(system, depth, limits)?;
    let ball = extract_ball(system, max_weight, limits)?;
    let census = enumerate_saws(&ball, max_weight, true)?;
    let oracle_words = census.words.unwrap();

    let mut walks = BTreeSet::new();
    let mut words: Vec<BTreeSet<Word>> = vec![BTreeSet::new(); max_weight];
    let mut per_weight = vec![0usize; max_weight];
    let (mut weight_is_length, mut round_trip, mut injective) = (true, true, true);
    for a in &assignments {
        let w = psi_r(&dec, a)?;
        let n = a.weight();
        weight_is_length &= w.len() == n;
        round_trip &= project_saw(system, &dec, &w)? == *a;
        if (1..=max_weight).contains(&w.len()) {
            injective &= words[w.len() - 1].insert(w.word.clone());
        }
        if (1..=max_weight).contains(&n) {
            per_weight[n - 1] += 1;
        }
        injective &= walks.insert(w);
    }
    let surjective = oracle_words
        .iter()
        .zip(&words)
        .all(|(o, g)| o.iter().all(|w| g.contains(w)));
    let rows = (0..max_weight)
        .map(|i| BijectionRow {
            weight: i + 1,
            assignments: per_weight[i],
            oracle_walks: census.counts[i].to_string(),
        })
        .collect::<Vec<_>>();
    let counts_agree = rows
        .iter()
        .zip(&census.counts)
        .all(|(r, c)| BigUint::from(r.assignments) == *c);
    Ok(BijectionReport {
        max_weight,
        pass: injective && surjective && weight_is_length && round_trip && counts_agree,
        rows,
        injective,
        surjective,
        weight_is_length,
        round_trip,
    })
}

impl fmt::Display for BijectionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>6}  {:>12}  {:>12}", "weight", "assignments", "walks")?;
        for r in &self.rows {
            writeln!(
                f,
                "{:>6}  {:>12}  {:>12}",
                r.weight, r.assignments, r.oracle_walks
            )?;
        }
        let flag = |b: bool| if b { "yes" } else { "NO" };
        writeln!(
            f,
            "injective {}, surjective {}, weight = length {}, round trip {}",
            flag(self.injective),
            flag(self.surjective),
            flag(self.weight_is_length),
            flag(self.round_trip)
        )?;
        writeln!(f, "bijection: {}", if self.pass { "pass" } else { "FAIL" })
    }
}

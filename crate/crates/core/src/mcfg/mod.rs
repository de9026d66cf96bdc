//! Multiple context-free grammars: tuples of strings derived bottom-up.

mod chart;
mod generate;
mod recognize;

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::alphabet::{Alphabet, Symbol, Word};
use crate::error::{Error, Result};

pub use chart::Count;
pub use generate::{check_unambiguous_upto, generate, AmbiguityReport, Generation};
pub use recognize::{recognize, Recognition};

pub type NtId = usize;

/// A literal, or the `j`-th coordinate of the tail nonterminal at position `slot`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Token {
    Lit(Symbol),
    Var(u16, u16),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nonterminal {
    pub name: String,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub head: NtId,
    pub args: Vec<Vec<Token>>,
    pub tail: Vec<NtId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mcfg {
    pub alphabet: Alphabet,
    pub nonterminals: Vec<Nonterminal>,
    pub start: NtId,
    pub rules: Vec<Rule>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GrammarReport {
    pub max_rank: usize,
    pub violations: Vec<String>,
    /// Rules that drop a tail coordinate. Bounded generation is only exact
    /// for grammars without them.
    pub warnings: Vec<String>,
}

impl GrammarReport {
    pub fn is_accepted(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_grammar(g: &Mcfg) -> GrammarReport {
    let mut r = GrammarReport {
        max_rank: g.nonterminals.iter().map(|n| n.rank).max().unwrap_or(0),
        ..Default::default()
    };
    match g.nonterminals.get(g.start) {
        None => r.violations.push("start symbol does not exist".into()),
        Some(s) if s.rank != 1 => r
            .violations
            .push(format!("start symbol {} has rank {}", s.name, s.rank)),
        _ => {}
    }
    let n = g.nonterminals.len();
    for (i, rule) in g.rules.iter().enumerate() {
        if rule.head >= n || rule.tail.iter().any(|&t| t >= n) {
            r.violations
                .push(format!("rule {i} refers to an unknown nonterminal"));
            continue;
        }
        let head = &g.nonterminals[rule.head];
        if rule.args.len() != head.rank {
            r.violations.push(format!(
                "rule {i}: head {} has rank {} but {} arguments",
                head.name,
                head.rank,
                rule.args.len()
            ));
        }
        let mut seen = BTreeSet::new();
        for tok in rule.args.iter().flatten() {
            match *tok {
                Token::Var(s, j) => {
                    let ok = rule
                        .tail
                        .get(s as usize)
                        .is_some_and(|&t| (j as usize) < g.nonterminals[t].rank);
                    if !ok {
                        r.violations
                            .push(format!("rule {i}: variable z[{s},{j}] is out of range"));
                    } else if !seen.insert((s, j)) {
                        r.violations.push(format!(
                            "rule {i}: variable z[{s},{j}] is used more than once"
                        ));
                    }
                }
                Token::Lit(sym) => {
                    if sym.0 as usize >= g.alphabet.len() {
                        r.violations
                            .push(format!("rule {i}: literal outside the alphabet"));
                    }
                }
            }
        }
        let expected: usize = rule.tail.iter().map(|&t| g.nonterminals[t].rank).sum();
        if r.violations.is_empty() && seen.len() < expected {
            r.warnings.push(format!(
                "rule {i} deletes {} tail coordinates",
                expected - seen.len()
            ));
        }
    }
    r
}

impl Mcfg {
    pub fn validated(self) -> Result<Self> {
        let report = validate_grammar(&self);
        if report.is_accepted() {
            Ok(self)
        } else {
            Err(Error::InvalidGrammar(report.violations))
        }
    }

    pub fn max_rank(&self) -> usize {
        self.nonterminals.iter().map(|n| n.rank).max().unwrap_or(0)
    }

    pub fn nonterminal(&self, name: &str) -> Option<NtId> {
        self.nonterminals.iter().position(|n| n.name == name)
    }
}

/// Substitutes the tail terms into the rule's head strings.
pub fn apply_rule(g: &Mcfg, rule: &Rule, terms: &[Vec<Word>]) -> Result<Vec<Word>> {
    if terms.len() != rule.tail.len() {
        return Err(Error::Input(format!(
            "rule expects {} terms, got {}",
            rule.tail.len(),
            terms.len()
        )));
    }
    for (t, &nt) in terms.iter().zip(&rule.tail) {
        if t.len() != g.nonterminals[nt].rank {
            return Err(Error::Input(format!(
                "term for {} has {} coordinates, expected {}",
                g.nonterminals[nt].name,
                t.len(),
                g.nonterminals[nt].rank
            )));
        }
    }
    Ok(rule
        .args
        .iter()
        .map(|arg| {
            let mut w = Vec::new();
            for tok in arg {
                match *tok {
                    Token::Lit(s) => w.push(s),
                    Token::Var(s, j) => w.extend_from_slice(&terms[s as usize][j as usize]),
                }
            }
            w
        })
        .collect())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GrammarFile {
    format: String,
    start: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alphabet: Option<Vec<String>>,
    nonterminals: Vec<NonterminalFile>,
    rules: Vec<RuleFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NonterminalFile {
    name: String,
    rank: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleFile {
    head: String,
    args: Vec<Vec<TokenFile>>,
    tail: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub(crate) enum TokenFile {
    Lit(String),
    Var([u16; 2]),
}

impl TokenFile {
    pub(crate) fn from_token(alphabet: &Alphabet, t: Token) -> Self {
        match t {
            Token::Lit(s) => TokenFile::Lit(alphabet.label(s).to_string()),
            Token::Var(s, j) => TokenFile::Var([s, j]),
        }
    }

    pub(crate) fn to_token(&self, alphabet: &Alphabet) -> Result<Token> {
        match self {
            TokenFile::Lit(l) => alphabet
                .symbol(l)
                .map(Token::Lit)
                .ok_or_else(|| Error::InvalidGrammar(vec![format!("label {l:?} not in alphabet")])),
            TokenFile::Var([s, j]) => Ok(Token::Var(*s, *j)),
        }
    }
}

pub const FORMAT: &str = "mcfg";

impl Mcfg {
    /// Reads the plain grammar format (`"format": "mcfg"`).
    pub fn from_json(text: &str) -> Result<Self> {
        let f: GrammarFile = serde_json::from_str(text)?;
        if f.format != FORMAT {
            return Err(Error::Input(format!(
                "expected format {FORMAT:?}, found {:?}",
                f.format
            )));
        }
        let labels: Vec<String> = match f.alphabet {
            Some(a) => a,
            None => f
                .rules
                .iter()
                .flat_map(|r| r.args.iter().flatten())
                .filter_map(|t| match t {
                    TokenFile::Lit(l) => Some(l.clone()),
                    TokenFile::Var(_) => None,
                })
                .collect(),
        };
        let alphabet = Alphabet::from_labels(labels);
        let index: HashMap<&str, NtId> = f
            .nonterminals
            .iter()
            .enumerate()
            .map(|(i, n)| (n.name.as_str(), i))
            .collect();
        if index.len() != f.nonterminals.len() {
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
        let mut rules = Vec::with_capacity(f.rules.len());
        for r in &f.rules {
            let args = r
                .args
                .iter()
                .map(|arg| {
                    arg.iter()
                        .map(|t| t.to_token(&alphabet))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            rules.push(Rule {
                head: lookup(&r.head)?,
                args,
                tail: r.tail.iter().map(|t| lookup(t)).collect::<Result<_>>()?,
            });
        }
        Ok(Mcfg {
            start: lookup(&f.start)?,
            alphabet,
            nonterminals: f
                .nonterminals
                .into_iter()
                .map(|n| Nonterminal {
                    name: n.name,
                    rank: n.rank,
                })
                .collect(),
            rules,
        })
    }

    pub fn to_json(&self) -> Value {
        let nts: Vec<Value> = self
            .nonterminals
            .iter()
            .map(|n| json!({"name": n.name, "rank": n.rank}))
            .collect();
        let rules: Vec<Value> = self
            .rules
            .iter()
            .map(|r| {
                json!({
                    "head": self.nonterminals[r.head].name,
                    "args": r.args.iter().map(|a| tokens_json(&self.alphabet, a)).collect::<Vec<_>>(),
                    "tail": r.tail.iter().map(|&t| self.nonterminals[t].name.clone()).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({
            "format": FORMAT,
            "start": self.nonterminals[self.start].name,
            "alphabet": self.alphabet.labels(),
            "nonterminals": nts,
            "rules": rules,
        })
    }
}

pub fn tokens_json(alphabet: &Alphabet, arg: &[Token]) -> Value {
    Value::Array(
        arg.iter()
            .map(|t| match *t {
                Token::Lit(s) => json!({"lit": alphabet.label(s)}),
                Token::Var(s, j) => json!({"var": [s, j]}),
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    pub(crate) fn seki() -> Mcfg {
        Mcfg::from_json(corpus::SEKI_GRAMMAR).unwrap()
    }

    #[test]
    fn example_grammar_is_a_two_mcfg() {
        let g = seki();
        let r = validate_grammar(&g);
        assert!(r.is_accepted(), "{:?}", r.violations);
        assert!(r.warnings.is_empty());
        assert_eq!(r.max_rank, 2);
        assert_eq!(g.nonterminals[g.nonterminal("A").unwrap()].rank, 2);
    }

    #[test]
    fn reused_variable_and_bad_start_rank() {
        let mut g = seki();
        g.rules[0].args[0] = vec![Token::Var(0, 0), Token::Var(0, 0)];
        assert!(validate_grammar(&g)
            .violations
            .iter()
            .any(|v| v.contains("more than once")));

        let mut g = seki();
        g.start = g.nonterminal("A").unwrap();
        assert!(validate_grammar(&g)
            .violations
            .iter()
            .any(|v| v.contains("rank 2")));
    }

    #[test]
    fn applying_the_example_rules() {
        let g = seki();
        let a = &g.alphabet;
        let w = |s: &str| a.parse_word(s).unwrap();
        // rules in file order: S, (a z b, z c), (a z b, z), (a z, z), (e, e)
        let eps = apply_rule(&g, &g.rules[4], &[]).unwrap();
        assert_eq!(eps, vec![vec![], vec![]]);
        let t = apply_rule(&g, &g.rules[3], &[eps]).unwrap();
        assert_eq!(t, vec![w("a"), vec![]]);
        let t = apply_rule(&g, &g.rules[1], &[t]).unwrap();
        assert_eq!(t, vec![w("aab"), w("c")]);
        assert!(apply_rule(&g, &g.rules[1], &[vec![vec![]]]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = seki();
        let back = Mcfg::from_json(&g.to_json().to_string()).unwrap();
        assert_eq!(back, g);
    }
}

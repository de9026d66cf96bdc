use super::chart::{saturate, Count, Domain};
use super::{Mcfg, Rule, Token};
use crate::alphabet::Symbol;
use crate::error::Result;
use crate::limits::Limits;

/// Half-open interval of word positions. Empty spans carry no position and
/// are all stored as `(0, 0)`.
type Span = (u16, u16);

const EMPTY: Span = (0, 0);

fn is_empty(a: Span) -> bool {
    a.0 == a.1
}

fn clash(a: Span, b: Span) -> bool {
    !is_empty(a) && !is_empty(b) && a.0 < b.1 && b.0 < a.1
}

struct Spans<'w> {
    word: &'w [Symbol],
}

enum Piece {
    Lit(Symbol),
    Sub(Span),
}

impl Spans<'_> {
    /// Span of one head string, given the spans of its variables.
    fn place(&self, arg: &[Token], children: &[&Vec<Span>]) -> Vec<Span> {
        let n = self.word.len();
        let pieces: Vec<Piece> = arg
            .iter()
            .filter_map(|t| match *t {
                Token::Lit(s) => Some(Piece::Lit(s)),
                Token::Var(s, j) => {
                    let sp = children[s as usize][j as usize];
                    (!is_empty(sp)).then_some(Piece::Sub(sp))
                }
            })
            .collect();
        if pieces.is_empty() {
            return vec![EMPTY];
        }
        let Some(k) = pieces.iter().position(|p| matches!(p, Piece::Sub(_))) else {
            let lits: Vec<Symbol> = pieces
                .iter()
                .map(|p| {
                    if let Piece::Lit(s) = p {
                        *s
                    } else {
                        unreachable!()
                    }
                })
                .collect();
            return (0..=n.saturating_sub(lits.len()))
                .filter(|&i| i + lits.len() <= n && self.word[i..i + lits.len()] == lits[..])
                .map(|i| (i as u16, (i + lits.len()) as u16))
                .collect();
        };
        let Piece::Sub(anchor) = pieces[k] else {
            unreachable!()
        };
        let Some(start) = (anchor.0 as usize).checked_sub(k) else {
            return Vec::new();
        };
        let mut pos = start;
        for p in &pieces {
            match *p {
                Piece::Lit(sym) => {
                    if pos >= n || self.word[pos] != sym {
                        return Vec::new();
                    }
                    pos += 1;
                }
                Piece::Sub(sp) => {
                    if sp.0 as usize != pos {
                        return Vec::new();
                    }
                    pos = sp.1 as usize;
                }
            }
        }
        vec![(start as u16, pos as u16)]
    }
}

impl Domain for Spans<'_> {
    type Value = Vec<Span>;

    fn apply(&self, rule: &Rule, children: &[&Vec<Span>], out: &mut Vec<Vec<Span>>) {
        let options: Vec<Vec<Span>> = rule.args.iter().map(|a| self.place(a, children)).collect();
        let mut cur = Vec::with_capacity(options.len());
        product(&options, &mut cur, out);
    }

    fn admissible(&self, _r: usize, chosen: &[&Vec<Span>]) -> bool {
        let (last, earlier) = chosen.split_last().unwrap();
        last.iter()
            .all(|&a| earlier.iter().all(|v| v.iter().all(|&b| !clash(a, b))))
    }
}

fn product(options: &[Vec<Span>], cur: &mut Vec<Span>, out: &mut Vec<Vec<Span>>) {
    if cur.len() == options.len() {
        out.push(cur.clone());
        return;
    }
    for &s in &options[cur.len()] {
        if cur.iter().all(|&c| !clash(c, s)) {
            cur.push(s);
            product(options, cur, out);
            cur.pop();
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Recognition {
    pub member: bool,
    pub derivations: Count,
}

/// Membership by bottom-up deduction over tuples of pairwise disjoint spans.
pub fn recognize(g: &Mcfg, word: &[Symbol], limits: &Limits) -> Result<Recognition> {
    let chart = saturate(g, &Spans { word }, limits.max_cells)?;
    let goal = vec![(0u16, word.len() as u16)];
    Ok(match chart.find(g.start, &goal) {
        Some(id) => Recognition {
            member: true,
            derivations: chart.counts()[id],
        },
        None => Recognition {
            member: false,
            derivations: Count::ZERO,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcfg::generate;
    use crate::mcfg::tests::seki;

    fn rec(s: &str) -> Recognition {
        let g = seki();
        recognize(&g, &g.alphabet.parse_word(s).unwrap(), &Limits::default()).unwrap()
    }

    #[test]
    fn example_language_membership() {
        assert!(rec("aabc").member);
        assert!(!rec("abb").member);
        assert!(rec("").member);
        assert!(!rec("ba").member);
        assert_eq!(rec("a").derivations, Count::ONE);
        assert_eq!(rec("aab").derivations.value, 2);
    }

    #[test]
    fn recognition_agrees_with_generation() {
        let g = seki();
        let gen = generate(&g, 5, &Limits::default()).unwrap();
        for (w, count) in &gen.words {
            let r = recognize(&g, w, &Limits::default()).unwrap();
            assert!(r.member);
            assert_eq!(r.derivations, *count, "{}", g.alphabet.render(w));
        }
    }

    #[test]
    fn rule_order_does_not_matter() {
        let mut g = seki();
        g.rules.reverse();
        let w = g.alphabet.parse_word("aaabbc").unwrap();
        let a = recognize(&g, &w, &Limits::default()).unwrap();
        let b = recognize(&seki(), &w, &Limits::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dropped_empty_coordinate_is_counted_once() {
        let g = Mcfg::from_json(
            r#"{"format": "mcfg", "start": "S",
                "nonterminals": [{"name": "S", "rank": 1}, {"name": "B", "rank": 2}],
                "rules": [
                    {"head": "S", "args": [[{"var": [0, 0]}]], "tail": ["B"]},
                    {"head": "B", "args": [[{"lit": "a"}], []], "tail": []}
                ]}"#,
        )
        .unwrap();
        let w = g.alphabet.parse_word("a").unwrap();
        assert_eq!(
            recognize(&g, &w, &Limits::default()).unwrap().derivations,
            Count::ONE
        );
    }
}

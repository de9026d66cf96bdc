use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Index of an edge label inside an [`Alphabet`]. Symbols sort like their labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Symbol(pub u32);

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Alphabet {
    labels: Vec<String>,
}

pub type Word = Vec<Symbol>;

impl Alphabet {
    pub fn from_labels<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set: BTreeSet<String> = labels.into_iter().map(Into::into).collect();
        Alphabet {
            labels: set.into_iter().collect(),
        }
    }

    pub fn symbol(&self, label: &str) -> Option<Symbol> {
        self.labels
            .binary_search_by(|l| l.as_str().cmp(label))
            .ok()
            .map(|i| Symbol(i as u32))
    }

    pub fn label(&self, s: Symbol) -> &str {
        &self.labels[s.0 as usize]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    fn single_chars(&self) -> bool {
        self.labels.iter().all(|l| l.chars().count() == 1)
    }

    /// Renders a word: labels are concatenated when every label is a single
    /// character, and space separated otherwise.
    pub fn render(&self, word: &[Symbol]) -> String {
        let sep = if self.single_chars() { "" } else { " " };
        word.iter()
            .map(|&s| self.label(s))
            .collect::<Vec<_>>()
            .join(sep)
    }

    /// Inverse of [`render`](Self::render). Whitespace separated input is read
    /// token by token, anything else character by character.
    pub fn parse_word(&self, text: &str) -> Result<Word, String> {
        let tokens: Vec<String> = if text.split_whitespace().count() > 1 || !self.single_chars() {
            text.split_whitespace().map(str::to_owned).collect()
        } else {
            text.trim().chars().map(String::from).collect()
        };
        tokens
            .iter()
            .map(|t| {
                self.symbol(t)
                    .ok_or_else(|| format!("label {t:?} is not in the alphabet"))
            })
            .collect()
    }
}

pub struct Rendered<'a>(pub &'a Alphabet, pub &'a [Symbol]);

impl fmt::Display for Rendered<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.render(self.1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbols_follow_label_order() {
        let a = Alphabet::from_labels(["r", "l", "r", "T"]);
        assert_eq!(a.labels(), ["T", "l", "r"]);
        assert!(a.symbol("l").unwrap() < a.symbol("r").unwrap());
        assert_eq!(a.symbol("x"), None);
    }

    #[test]
    fn words_round_trip() {
        let a = Alphabet::from_labels(["a", "b", "c"]);
        let w = a.parse_word("aabc").unwrap();
        assert_eq!(a.render(&w), "aabc");
        assert_eq!(a.parse_word("a b").unwrap().len(), 2);
        assert!(a.parse_word("ad").is_err());

        let long = Alphabet::from_labels(["up", "down"]);
        let w = long.parse_word("up up down").unwrap();
        assert_eq!(long.render(&w), "up up down");
    }
}

//! Count-based n-gram model used as a desk-scale prophecy source.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::SimError;

pub const DEFAULT_BOS: &str = "<s>";
pub const DEFAULT_EOS: &str = "</s>";

/// Successor counts for every context of length `1..order`. Each sentence is
/// padded with `order - 1` start symbols and closed by one end symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramModel {
    order: usize,
    bos: String,
    eos: String,
    counts: BTreeMap<Vec<String>, BTreeMap<String, u64>>,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    context: Vec<String>,
    next: BTreeMap<String, u64>,
}

#[derive(Serialize, Deserialize)]
struct Stored {
    format: String,
    order: usize,
    bos: String,
    eos: String,
    entries: Vec<Entry>,
}

const FORMAT: &str = "diachron-ngram/1";

impl NGramModel {
    pub fn train<S: AsRef<[String]>>(sentences: &[S], order: usize) -> Result<Self, SimError> {
        Self::train_with_symbols(sentences, order, DEFAULT_BOS, DEFAULT_EOS)
    }

    pub fn train_with_symbols<S: AsRef<[String]>>(
        sentences: &[S],
        order: usize,
        bos: &str,
        eos: &str,
    ) -> Result<Self, SimError> {
        if order < 2 {
            return Err(SimError::InvalidOrder(order));
        }
        if sentences.is_empty() {
            return Err(SimError::EmptyCorpus);
        }
        let mut counts: BTreeMap<Vec<String>, BTreeMap<String, u64>> = BTreeMap::new();
        for sentence in sentences {
            let padded: Vec<&str> = std::iter::repeat_n(bos, order - 1)
                .chain(sentence.as_ref().iter().map(String::as_str))
                .chain(std::iter::once(eos))
                .collect();
            for j in order - 1..padded.len() {
                for len in 1..order {
                    let context = padded[j - len..j].iter().map(|s| s.to_string()).collect();
                    *counts.entry(context).or_default().entry(padded[j].to_string()).or_default() += 1;
                }
            }
        }
        Ok(Self { order, bos: bos.to_string(), eos: eos.to_string(), counts })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn eos(&self) -> &str {
        &self.eos
    }

    pub fn count(&self, context: &[&str], next: &str) -> u64 {
        let context: Vec<String> = context.iter().map(|s| s.to_string()).collect();
        self.counts.get(&context).and_then(|m| m.get(next)).copied().unwrap_or(0)
    }

    /// Most frequent successor of the longest seen suffix of `history`, ties
    /// going to the lexicographically smallest token.
    fn successor(&self, history: &[String]) -> Option<&str> {
        let longest = (self.order - 1).min(history.len());
        (1..=longest).rev().find_map(|len| {
            let successors = self.counts.get(&history[history.len() - len..])?;
            let mut best: Option<(&str, u64)> = None;
            for (token, &count) in successors {
                if best.is_none_or(|(_, c)| count > c) {
                    best = Some((token, count));
                }
            }
            best.map(|(token, _)| token)
        })
    }

    /// Greedy continuation of `prefix`, stopping at the end symbol (never
    /// included), an unseen context or `max_len` tokens.
    pub fn continue_sequence(&self, prefix: &[String], max_len: usize) -> Vec<String> {
        let mut history: Vec<String> =
            std::iter::repeat_n(self.bos.clone(), self.order - 1).chain(prefix.iter().cloned()).collect();
        let mut continuation = Vec::new();
        while continuation.len() < max_len {
            match self.successor(&history) {
                Some(token) if token != self.eos => {
                    let token = token.to_string();
                    continuation.push(token.clone());
                    history.push(token);
                }
                _ => break,
            }
        }
        continuation
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let stored = Stored {
            format: FORMAT.into(),
            order: self.order,
            bos: self.bos.clone(),
            eos: self.eos.clone(),
            entries: self
                .counts
                .iter()
                .map(|(context, next)| Entry { context: context.clone(), next: next.clone() })
                .collect(),
        };
        let mut bytes = serde_json::to_vec(&stored).expect("n-gram model serializes");
        bytes.push(b'\n');
        bytes
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SimError> {
        let stored: Stored = serde_json::from_slice(bytes).map_err(|e| SimError::Model(e.to_string()))?;
        if stored.format != FORMAT {
            return Err(SimError::Model(format!("unsupported format `{}`", stored.format)));
        }
        if stored.order < 2 {
            return Err(SimError::InvalidOrder(stored.order));
        }
        let counts = stored.entries.into_iter().map(|e| (e.context, e.next)).collect();
        Ok(Self { order: stored.order, bos: stored.bos, eos: stored.eos, counts })
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        fs::write(path, self.to_bytes())
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let bytes = fs::read(path).map_err(|e| SimError::Model(format!("{}: {e}", path.display())))?;
        Self::from_bytes(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sent(raw: &[&str]) -> Vec<String> {
        raw.iter().map(|s| s.to_string()).collect()
    }

    fn abc_abd() -> NGramModel {
        NGramModel::train(&[sent(&["a", "b", "c"]), sent(&["a", "b", "d"])], 2).unwrap()
    }

    #[test]
    fn bigram_counts() {
        let m = abc_abd();
        assert_eq!(m.count(&["a"], "b"), 2);
        assert_eq!(m.count(&["b"], "c"), 1);
        assert_eq!(m.count(&["b"], "d"), 1);
        assert_eq!(m.count(&["c"], DEFAULT_EOS), 1);
        assert_eq!(m.count(&["d"], DEFAULT_EOS), 1);
        assert_eq!(m.count(&[DEFAULT_BOS], "a"), 2);
    }

    #[test]
    fn single_token_sentence() {
        let m = NGramModel::train(&[sent(&["x"])], 2).unwrap();
        assert_eq!(m.count(&[DEFAULT_BOS], "x"), 1);
        assert_eq!(m.count(&["x"], DEFAULT_EOS), 1);
    }

    #[test]
    fn greedy_continuation_breaks_ties_lexicographically() {
        assert_eq!(abc_abd().continue_sequence(&sent(&["a"]), 10), sent(&["b", "c"]));
    }

    #[test]
    fn unseen_context_ends_continuation() {
        assert!(abc_abd().continue_sequence(&sent(&["zzz"]), 10).is_empty());
    }

    #[test]
    fn length_cap() {
        let m = NGramModel::train(&[sent(&["a", "a", "a", "a"])], 2).unwrap();
        assert_eq!(m.continue_sequence(&sent(&["a"]), 3), sent(&["a", "a", "a"]));
    }

    #[test]
    fn trigram_backs_off_to_bigram() {
        let m = NGramModel::train(&[sent(&["x", "y", "z"])], 3).unwrap();
        assert_eq!(m.count(&[DEFAULT_BOS, DEFAULT_BOS], "x"), 1);
        assert_eq!(m.count(&["x", "y"], "z"), 1);
        // [q, y] is unseen, [y] is not
        assert_eq!(m.continue_sequence(&sent(&["q", "y"]), 10), sent(&["z"]));
    }

    #[test]
    fn training_errors() {
        assert!(matches!(NGramModel::train::<Vec<String>>(&[], 2), Err(SimError::EmptyCorpus)));
        assert!(matches!(NGramModel::train(&[sent(&["a"])], 1), Err(SimError::InvalidOrder(1))));
    }

    #[test]
    fn retraining_is_deterministic_and_bytes_round_trip() {
        let a = abc_abd();
        assert_eq!(a, abc_abd());
        let bytes = a.to_bytes();
        let b = NGramModel::from_bytes(&bytes).unwrap();
        assert_eq!(a, b);
        assert_eq!(bytes, b.to_bytes());
    }
}

//! Built-in deterministic labelers.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::Processor;
use crate::error::ExternalError;
use crate::trace::TaskKind;

/// Token filling window slots that fall outside the input.
pub const PAD: &str = "<pad>";
/// Window rule slot that matches any token, including [`PAD`].
pub const WILDCARD: &str = "*";

/// Labels each token by table lookup. Classification uses the label of the
/// last input token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LookupTagger {
    pub labels: HashMap<String, String>,
    pub default: String,
}

impl LookupTagger {
    pub fn new(labels: HashMap<String, String>, default: impl Into<String>) -> Self {
        Self { labels, default: default.into() }
    }

    /// Reads `token<TAB>label` lines; blank lines and `#` comments are skipped.
    pub fn from_tsv(text: &str, default: impl Into<String>) -> Result<Self, String> {
        let mut labels = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (token, label) =
                line.split_once('\t').ok_or_else(|| format!("line {}: expected `token<TAB>label`", i + 1))?;
            labels.insert(token.to_string(), label.trim().to_string());
        }
        Ok(Self::new(labels, default))
    }

    fn label_of(&self, token: &str) -> String {
        self.labels.get(token).unwrap_or(&self.default).clone()
    }
}

impl Processor for LookupTagger {
    fn label(&mut self, tokens: &[String], task: TaskKind) -> Result<Vec<String>, ExternalError> {
        Ok(match task {
            TaskKind::Tagging => tokens.iter().map(|t| self.label_of(t)).collect(),
            TaskKind::Classification => {
                vec![tokens.last().map_or_else(|| self.default.clone(), |t| self.label_of(t))]
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowRule {
    /// `left + 1 + right` tokens; [`WILDCARD`] matches anything.
    pub window: Vec<String>,
    pub label: String,
}

impl WindowRule {
    fn matches(&self, window: &[&str]) -> bool {
        self.window.len() == window.len() && self.window.iter().zip(window).all(|(p, t)| p == WILDCARD || p == t)
    }
}

/// Labels token `i` from the tokens `i - left ..= i + right` using the first
/// matching rule, falling back to `default`. Slots outside the input read as
/// [`PAD`]. Classification uses the label of the last input position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowTagger {
    #[serde(default)]
    pub left: usize,
    #[serde(default)]
    pub right: usize,
    pub default: String,
    #[serde(default, rename = "rule")]
    pub rules: Vec<WindowRule>,
}

impl WindowTagger {
    pub fn new(left: usize, right: usize, default: impl Into<String>, rules: Vec<WindowRule>) -> Result<Self, String> {
        let tagger = Self { left, right, default: default.into(), rules };
        tagger.check()?;
        Ok(tagger)
    }

    /// Parses the TOML rule-table format (`left`, `right`, `default` and
    /// `[[rule]]` entries with `window` and `label`).
    pub fn from_toml(text: &str) -> Result<Self, String> {
        let tagger: Self = toml::from_str(text).map_err(|e| e.to_string())?;
        tagger.check()?;
        Ok(tagger)
    }

    fn check(&self) -> Result<(), String> {
        let width = self.left + 1 + self.right;
        match self.rules.iter().position(|r| r.window.len() != width) {
            Some(i) => {
                Err(format!("rule {} has {} tokens, window width is {width}", i + 1, self.rules[i].window.len()))
            }
            None => Ok(()),
        }
    }

    pub fn is_causal(&self) -> bool {
        self.right == 0
    }

    fn label_at(&self, tokens: &[String], i: usize) -> String {
        let window: Vec<&str> = (0..self.left + 1 + self.right)
            .map(|k| (i + k).checked_sub(self.left).and_then(|j| tokens.get(j)).map_or(PAD, String::as_str))
            .collect();
        self.rules.iter().find(|r| r.matches(&window)).map_or_else(|| self.default.clone(), |r| r.label.clone())
    }
}

impl Processor for WindowTagger {
    fn label(&mut self, tokens: &[String], task: TaskKind) -> Result<Vec<String>, ExternalError> {
        Ok(match task {
            TaskKind::Tagging => (0..tokens.len()).map(|i| self.label_at(tokens, i)).collect(),
            TaskKind::Classification => {
                vec![match tokens.len() {
                    0 => self.default.clone(),
                    len => self.label_at(tokens, len - 1),
                }]
            }
        })
    }
}

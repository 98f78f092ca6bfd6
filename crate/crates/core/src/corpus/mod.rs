//! Corpora and trace files: CoNLL-style tagging corpora, tab-separated
//! classification corpora, trace JSONL, seeded truncation and corpus BLEU.

mod bleu;
mod conll;
mod trace_io;
mod truncate;

use std::fs;
use std::path::Path;

pub use bleu::corpus_bleu;
pub use conll::{read_classification, read_conll, write_classification, write_conll};
pub use trace_io::{read_traces, trace_to_json, write_traces};
pub use truncate::{truncate_corpus, truncation_rng};

use crate::error::CorpusError;
use crate::trace::{GoldAnnotation, LabelScheme, TaskKind, TokenSequence};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusEntry {
    pub tokens: TokenSequence,
    pub gold: Option<GoldAnnotation>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub task: TaskKind,
    pub scheme: LabelScheme,
    pub entries: Vec<CorpusEntry>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sentences(&self) -> impl Iterator<Item = &TokenSequence> {
        self.entries.iter().map(|e| &e.tokens)
    }

    /// Reads the tagging or classification format depending on `task`.
    pub fn read(text: &str, task: TaskKind) -> Result<Self, CorpusError> {
        match task {
            TaskKind::Tagging => read_conll(text),
            TaskKind::Classification => read_classification(text),
        }
    }

    pub fn read_path(path: &Path, task: TaskKind) -> Result<Self, CorpusError> {
        Self::read(&fs::read_to_string(path)?, task)
    }

    pub fn write(&self) -> String {
        match self.task {
            TaskKind::Tagging => write_conll(self),
            TaskKind::Classification => write_classification(self),
        }
    }

    /// Gold labels per sentence; `None` where a sentence is unannotated.
    pub fn gold_labels(&self) -> Vec<Option<Vec<String>>> {
        self.entries.iter().map(|e| e.gold.as_ref().map(|g| g.labels().to_vec())).collect()
    }
}

/// Stable ids assigned to sentences in file order.
pub(crate) fn sentence_id(index: usize) -> String {
    format!("s{}", index + 1)
}

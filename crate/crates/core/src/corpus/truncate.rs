use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Corpus, CorpusEntry};
use crate::trace::{GoldAnnotation, TaskKind, TokenSequence};

/// Generator for sentence `index` under `seed`. Each sentence owns a separate
/// stream, so results do not depend on processing order.
pub fn truncation_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Cuts every sentence to a length drawn uniformly from `1..=n`. Tagging
/// labels are cut along with the tokens; classification labels are kept.
pub fn truncate_corpus(corpus: &Corpus, seed: u64) -> Corpus {
    let entries = corpus
        .entries
        .iter()
        .enumerate()
        .map(|(i, entry)| {
            let n = entry.tokens.len();
            let keep = truncation_rng(seed, i).gen_range(1..=n);
            let tokens = TokenSequence::new(entry.tokens.id(), entry.tokens.prefix(keep).to_vec())
                .expect("kept at least one token");
            let gold = entry.gold.as_ref().map(|g| match corpus.task {
                TaskKind::Tagging => GoldAnnotation::new(g.labels()[..keep].to_vec(), g.scheme(), corpus.task, keep)
                    .expect("prefix of a valid annotation"),
                TaskKind::Classification => g.clone(),
            });
            CorpusEntry { tokens, gold }
        })
        .collect();
    Corpus { task: corpus.task, scheme: corpus.scheme, entries }
}

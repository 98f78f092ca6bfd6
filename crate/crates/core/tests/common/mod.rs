//! Seeded generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use diachron::corpus::{Corpus, CorpusEntry};
use diachron::simulator::{LookupTagger, WindowRule, WindowTagger};
use diachron::{GoldAnnotation, IncrementalTrace, LabelScheme, StepOutput, TaskKind, TokenSequence};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const VOCAB: &[&str] = &["the", "cat", "sat", "on", "a", "mat", "dog", "ran", "to", "Paris", "John", "home"];
pub const BIO: &[&str] = &["O", "B-PER", "I-PER", "B-LOC", "I-LOC"];
pub const LABELS: &[&str] = &["A", "B", "C"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn strings(raw: &[&str]) -> Vec<String> {
    raw.iter().map(|s| s.to_string()).collect()
}

pub fn pick(rng: &mut impl Rng, from: &[&str]) -> String {
    from.choose(rng).unwrap().to_string()
}

pub fn sentence(rng: &mut impl Rng, id: impl Into<String>, max_n: usize) -> TokenSequence {
    let n = rng.gen_range(1..=max_n);
    TokenSequence::new(id, (0..n).map(|_| pick(rng, VOCAB)).collect()).unwrap()
}

pub fn bio_labels(rng: &mut impl Rng, n: usize) -> Vec<String> {
    (0..n).map(|_| pick(rng, BIO)).collect()
}

/// A well-formed trace whose labels are mostly carried over from the previous
/// step, so both stable and revised labels occur.
pub fn trace(rng: &mut impl Rng, task: TaskKind, max_n: usize) -> IncrementalTrace {
    let tokens = sentence(rng, "r", max_n);
    let mut steps: Vec<StepOutput> = Vec::new();
    for t in 1..=tokens.len() {
        let width = task.labels_at_step(t);
        let prev = steps.last().map(|s| s.labels().to_vec()).unwrap_or_default();
        let labels = (0..width)
            .map(|i| match prev.get(i) {
                Some(label) if rng.gen_bool(0.7) => label.clone(),
                _ => pick(rng, LABELS),
            })
            .collect();
        steps.push(StepOutput(labels));
    }
    IncrementalTrace::new(task, tokens, steps, None).unwrap()
}

pub fn any_task(rng: &mut impl Rng) -> TaskKind {
    if rng.gen_bool(0.5) {
        TaskKind::Tagging
    } else {
        TaskKind::Classification
    }
}

pub fn lookup_tagger() -> LookupTagger {
    let labels: HashMap<String, String> = [("Paris", "B-LOC"), ("John", "B-PER"), ("cat", "B-ANIMAL")]
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    LookupTagger::new(labels, "O")
}

/// Looks `b` tokens ahead: the label of token `i` names token `i + b`, so it
/// changes once that token arrives.
pub fn window_tagger(b: usize) -> WindowTagger {
    let rules = VOCAB
        .iter()
        .map(|word| {
            let mut window = vec!["*".to_string(); b];
            window.push(word.to_string());
            WindowRule { window, label: format!("NEXT-{word}") }
        })
        .collect();
    WindowTagger::new(0, b, "END", rules).unwrap()
}

pub fn tagging_corpus(rng: &mut impl Rng, sentences: usize, max_n: usize) -> Corpus {
    let entries = (0..sentences)
        .map(|i| {
            let tokens = sentence(rng, format!("s{}", i + 1), max_n);
            let labels = bio_labels(rng, tokens.len());
            let gold = GoldAnnotation::new(labels, LabelScheme::Bio, TaskKind::Tagging, tokens.len()).unwrap();
            CorpusEntry { tokens, gold: Some(gold) }
        })
        .collect();
    Corpus { task: TaskKind::Tagging, scheme: LabelScheme::Bio, entries }
}

pub fn classification_corpus(rng: &mut impl Rng, sentences: usize, max_n: usize) -> Corpus {
    let entries = (0..sentences)
        .map(|i| {
            let tokens = sentence(rng, format!("s{}", i + 1), max_n);
            let gold = GoldAnnotation::new(
                vec![pick(rng, &["pos", "neg"])],
                LabelScheme::Plain,
                TaskKind::Classification,
                tokens.len(),
            )
            .unwrap();
            CorpusEntry { tokens, gold: Some(gold) }
        })
        .collect();
    Corpus { task: TaskKind::Classification, scheme: LabelScheme::Plain, entries }
}

/// Brute-force span oracle: tries every `(start, end)` pair and keeps the
/// ones that are a `B-x` followed by `I-x` labels up to a boundary.
pub fn oracle_spans(labels: &[String]) -> Vec<(String, usize, usize)> {
    let n = labels.len();
    let mut spans = Vec::new();
    for start in 0..n {
        let Some(ty) = labels[start].strip_prefix("B-") else { continue };
        let inside = format!("I-{ty}");
        for end in start..n {
            let body = labels[start + 1..=end].iter().all(|l| *l == inside);
            let closed = end + 1 == n || labels[end + 1] != inside;
            if body && closed {
                spans.push((ty.to_string(), start + 1, end + 1));
            }
        }
    }
    spans
}

/// Span counts `(true positives, predicted, gold)` from [`oracle_spans`].
pub fn oracle_counts(preds: &[Vec<String>], golds: &[Vec<String>]) -> (usize, usize, usize) {
    let mut counts = (0, 0, 0);
    for (p, g) in preds.iter().zip(golds) {
        let ps = oracle_spans(p);
        let gs = oracle_spans(g);
        counts.0 += ps.iter().filter(|s| gs.contains(s)).count();
        counts.1 += ps.len();
        counts.2 += gs.len();
    }
    counts
}

/// Naive delayed emission at 1-based step `t`, written out from the
/// definition rather than through the library.
pub fn naive_emission(trace: &IncrementalTrace, d: usize, t: usize) -> Vec<String> {
    let n = trace.n();
    let step = trace.step(t);
    if t == n {
        return step.to_vec();
    }
    match trace.task {
        TaskKind::Tagging => step[..t.saturating_sub(d)].to_vec(),
        TaskKind::Classification if t > d => step.to_vec(),
        TaskKind::Classification => Vec::new(),
    }
}

pub type Fraction = diachron::metrics::Fraction;

fn frac(num: usize, den: usize) -> Fraction {
    Fraction::new(num as u64, den as u64)
}

/// `(eo, rc)` at delay `d`.
pub fn naive_eo_rc(trace: &IncrementalTrace, d: usize) -> (Fraction, Fraction) {
    let n = trace.n();
    let emissions: Vec<Vec<String>> = (1..=n).map(|t| naive_emission(trace, d, t)).collect();
    let mut substitutions = 0;
    for pair in emissions.windows(2) {
        substitutions += pair[0].iter().zip(&pair[1]).filter(|(a, b)| a != b).count();
    }
    let necessary = match trace.task {
        TaskKind::Tagging => n,
        TaskKind::Classification => 1,
    };
    let final_output = trace.final_output();
    let correct = emissions.iter().filter(|e| final_output.starts_with(e)).count();
    (frac(substitutions, necessary + substitutions), frac(correct, n))
}

pub fn naive_ct(trace: &IncrementalTrace) -> Fraction {
    let n = trace.n();
    if n == 1 {
        return frac(0, 1);
    }
    let final_output = trace.final_output();
    let settle = |i: usize, first: usize| {
        (first..=n).find(|&s| (s..=n).all(|later| trace.step(later)[i] == final_output[i])).unwrap()
    };
    match trace.task {
        TaskKind::Tagging => {
            let delays: usize = (1..=n).map(|i| settle(i - 1, i) - i).sum();
            frac(delays, n * (n - 1) / 2)
        }
        TaskKind::Classification => frac(settle(0, 1) - 1, n - 1),
    }
}

use std::collections::HashMap;

use crate::error::CorpusError;

const MAX_ORDER: usize = 4;

fn ngram_counts(tokens: &[String], order: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    for gram in tokens.windows(order) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Corpus-level BLEU: clipped n-gram precisions of orders 1..=4 pooled over
/// all pairs, uniform weights, brevity penalty, no smoothing. Orders for
/// which no candidate has any n-gram are left out of the mean.
pub fn corpus_bleu<C, R>(candidates: &[C], references: &[R]) -> Result<f64, CorpusError>
where
    C: AsRef<[String]>,
    R: AsRef<[String]>,
{
    if candidates.len() != references.len() {
        return Err(CorpusError::Unaligned { candidates: candidates.len(), references: references.len() });
    }
    if candidates.is_empty() {
        return Err(CorpusError::NoCandidates);
    }

    let mut matches = [0usize; MAX_ORDER];
    let mut totals = [0usize; MAX_ORDER];
    let (mut cand_len, mut ref_len) = (0usize, 0usize);
    for (cand, reference) in candidates.iter().zip(references) {
        let (cand, reference) = (cand.as_ref(), reference.as_ref());
        cand_len += cand.len();
        ref_len += reference.len();
        for order in 1..=MAX_ORDER {
            let ref_counts = ngram_counts(reference, order);
            for (gram, count) in ngram_counts(cand, order) {
                matches[order - 1] += count.min(ref_counts.get(gram).copied().unwrap_or(0));
                totals[order - 1] += count;
            }
        }
    }

    let orders: Vec<usize> = (0..MAX_ORDER).filter(|&k| totals[k] > 0).collect();
    if orders.is_empty() || orders.iter().any(|&k| matches[k] == 0) {
        return Ok(0.0);
    }
    let log_precision: f64 =
        orders.iter().map(|&k| (matches[k] as f64 / totals[k] as f64).ln()).sum::<f64>() / orders.len() as f64;
    let brevity = if cand_len > ref_len { 1.0 } else { (1.0 - ref_len as f64 / cand_len as f64).exp() };
    Ok(brevity * log_precision.exp())
}

use std::collections::HashSet;

use serde::Serialize;

use crate::error::MetricsError;
use crate::trace::{is_bio_label, LabelScheme, TaskKind};

/// A labeled span, 1-based with inclusive bounds.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub label: String,
    pub start: usize,
    pub end: usize,
}

/// Maximal `B-x (I-x)*` runs. An `I-x` that does not continue a run of the
/// same type opens nothing.
pub fn extract_spans(labels: &[String]) -> Vec<Span> {
    let mut spans = Vec::new();
    let mut open: Option<Span> = None;
    for (i, label) in labels.iter().enumerate() {
        let position = i + 1;
        if let Some(ty) = label.strip_prefix("I-") {
            if let Some(span) = open.as_mut().filter(|s| s.label == ty) {
                span.end = position;
                continue;
            }
        }
        spans.extend(open.take());
        if let Some(ty) = label.strip_prefix("B-") {
            open = Some(Span { label: ty.to_string(), start: position, end: position });
        }
    }
    spans.extend(open);
    spans
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GoldMetric {
    SpanF1,
    TokenAccuracy,
    LabelAccuracy,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoldScores {
    pub metric: GoldMetric,
    pub value: f64,
    /// Span precision and recall; only set for span F1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recall: Option<f64>,
    #[serde(skip)]
    pub correct: Vec<bool>,
    /// Share of sequences whose labels are all correct.
    pub sentence_accuracy: f64,
}

fn safe_div(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Scores final outputs against gold labels: micro span F1 for BIO tagging,
/// token accuracy for plain tagging and label accuracy for classification.
pub fn gold_scores(
    predictions: &[&[String]],
    golds: &[&[String]],
    task: TaskKind,
    scheme: LabelScheme,
) -> Result<GoldScores, MetricsError> {
    if predictions.len() != golds.len() {
        return Err(MetricsError::CountMismatch { count: predictions.len(), golds: golds.len() });
    }
    if predictions.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    for (index, (pred, gold)) in predictions.iter().zip(golds).enumerate() {
        if pred.len() != gold.len() {
            return Err(MetricsError::LengthMismatch { index, expected: gold.len(), found: pred.len() });
        }
    }

    let correct: Vec<bool> = predictions.iter().zip(golds).map(|(p, g)| p == g).collect();
    let sentence_accuracy = safe_div(correct.iter().filter(|&&c| c).count(), correct.len());

    let span_f1 = task == TaskKind::Tagging && scheme == LabelScheme::Bio;
    if !span_f1 {
        let total: usize = golds.iter().map(|g| g.len()).sum();
        let hits: usize =
            predictions.iter().zip(golds).map(|(p, g)| p.iter().zip(g.iter()).filter(|(a, b)| a == b).count()).sum();
        let metric = match task {
            TaskKind::Tagging => GoldMetric::TokenAccuracy,
            TaskKind::Classification => GoldMetric::LabelAccuracy,
        };
        return Ok(GoldScores {
            metric,
            value: safe_div(hits, total),
            precision: None,
            recall: None,
            correct,
            sentence_accuracy,
        });
    }

    let (mut tp, mut predicted, mut expected) = (0, 0, 0);
    for (index, (pred, gold)) in predictions.iter().zip(golds).enumerate() {
        if let Some(bad) = pred.iter().chain(gold.iter()).find(|l| !is_bio_label(l)) {
            return Err(MetricsError::InvalidLabel { index, label: bad.clone() });
        }
        let gold_spans: HashSet<Span> = extract_spans(gold).into_iter().collect();
        let pred_spans = extract_spans(pred);
        tp += pred_spans.iter().filter(|s| gold_spans.contains(s)).count();
        predicted += pred_spans.len();
        expected += gold_spans.len();
    }
    let precision = safe_div(tp, predicted);
    let recall = safe_div(tp, expected);
    let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    Ok(GoldScores {
        metric: GoldMetric::SpanF1,
        value: f1,
        precision: Some(precision),
        recall: Some(recall),
        correct,
        sentence_accuracy,
    })
}

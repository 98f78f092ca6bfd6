use serde::Serialize;

use super::{correction_time_score, edit_overhead, gold_scores, relative_correctness, stable_mean, GoldMetric};
use crate::error::MetricsError;
use crate::trace::{Delay, IncrementalTrace, LabelScheme};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DelayMetrics {
    pub delay: usize,
    pub eo: f64,
    pub rc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceMetrics {
    pub sequence_id: String,
    pub n: usize,
    pub delays: Vec<DelayMetrics>,
    pub ct: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_correct: Option<bool>,
}

impl SequenceMetrics {
    /// `delays` is expected sorted and deduplicated.
    pub fn compute(trace: &IncrementalTrace, delays: &[Delay]) -> Result<Self, MetricsError> {
        let delays = delays
            .iter()
            .map(|&d| {
                Ok(DelayMetrics { delay: d.get(), eo: edit_overhead(trace, d)?, rc: relative_correctness(trace, d)? })
            })
            .collect::<Result<Vec<_>, MetricsError>>()?;
        Ok(Self {
            sequence_id: trace.sequence_id().to_string(),
            n: trace.n(),
            delays,
            ct: correction_time_score(trace)?,
            final_correct: trace.gold.as_deref().map(|g| g == trace.final_output()),
        })
    }

    pub fn at(&self, delay: Delay) -> Option<&DelayMetrics> {
        self.delays.iter().find(|m| m.delay == delay.get())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DelayMeans {
    pub delay: usize,
    pub mean_eo: f64,
    pub mean_rc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoldSummary {
    pub scheme: LabelScheme,
    pub metric: GoldMetric,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recall: Option<f64>,
    pub sentence_accuracy: f64,
    pub correct_sequences: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusMetrics {
    pub sequences: usize,
    pub tokens: usize,
    pub delays: Vec<DelayMeans>,
    pub mean_ct: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gold: Option<GoldSummary>,
}

impl CorpusMetrics {
    pub fn at(&self, delay: Delay) -> Option<&DelayMeans> {
        self.delays.iter().find(|m| m.delay == delay.get())
    }
}

/// Per-sequence records plus their unweighted means.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusReport {
    pub summary: CorpusMetrics,
    pub sequences: Vec<SequenceMetrics>,
}

/// Gold-dependent fields are filled only when every trace carries gold
/// labels. `scheme` defaults to detection over the gold labels.
pub fn corpus_report(
    traces: &[IncrementalTrace],
    delays: &[Delay],
    scheme: Option<LabelScheme>,
) -> Result<CorpusReport, MetricsError> {
    if traces.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    if delays.is_empty() {
        return Err(MetricsError::NoDelays);
    }
    let mut delays = delays.to_vec();
    delays.sort();
    delays.dedup();

    let sequences = traces.iter().map(|t| SequenceMetrics::compute(t, &delays)).collect::<Result<Vec<_>, _>>()?;

    let means = delays
        .iter()
        .enumerate()
        .map(|(i, d)| DelayMeans {
            delay: d.get(),
            mean_eo: stable_mean(sequences.iter().map(|s| s.delays[i].eo)),
            mean_rc: stable_mean(sequences.iter().map(|s| s.delays[i].rc)),
        })
        .collect();

    let gold = if traces.iter().any(|t| t.gold.is_some()) { Some(summarize_gold(traces, scheme)?) } else { None };

    Ok(CorpusReport {
        summary: CorpusMetrics {
            sequences: traces.len(),
            tokens: traces.iter().map(IncrementalTrace::n).sum(),
            delays: means,
            mean_ct: stable_mean(sequences.iter().map(|s| s.ct)),
            gold,
        },
        sequences,
    })
}

fn summarize_gold(traces: &[IncrementalTrace], scheme: Option<LabelScheme>) -> Result<GoldSummary, MetricsError> {
    let golds = traces
        .iter()
        .map(|t| {
            t.gold.as_deref().ok_or_else(|| MetricsError::MissingGold { sequence_id: t.sequence_id().to_string() })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let predictions: Vec<&[String]> = traces.iter().map(IncrementalTrace::final_output).collect();
    let scheme = scheme.unwrap_or_else(|| LabelScheme::detect(golds.iter().flat_map(|g| g.iter().map(String::as_str))));
    let task = traces[0].task;
    let scores = gold_scores(&predictions, &golds, task, scheme)?;
    Ok(GoldSummary {
        scheme,
        metric: scores.metric,
        value: scores.value,
        precision: scores.precision,
        recall: scores.recall,
        sentence_accuracy: scores.sentence_accuracy,
        correct_sequences: scores.correct.iter().filter(|&&c| c).count(),
    })
}

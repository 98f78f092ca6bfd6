//! Diachronic metrics over incremental traces.
//!
//! * edit overhead (EO): unnecessary edits (substitutions) over all edits;
//! * correction time score (CT): summed settling time of each label over the
//!   number of opportunities it had to change;
//! * relative correctness (RC): share of time steps whose output is a prefix
//!   of the final output.
//!
//! Every metric has an exact rational form (`*_exact`) and an `f64` form.

mod curves;
mod gold;
mod report;
mod streaming;

pub use curves::{eo_over_time, partial_edit_overhead, CurvePoint, EoCurves, Group};
pub use gold::{extract_spans, gold_scores, GoldMetric, GoldScores, Span};
pub use report::{corpus_report, CorpusMetrics, CorpusReport, DelayMeans, DelayMetrics, GoldSummary, SequenceMetrics};
pub use streaming::{StreamingMetrics, StreamingResult};

use num_rational::Ratio;

use crate::editops::{apply_delay, edit_counts};
use crate::error::MetricsError;
use crate::trace::{validate_trace, Delay, IncrementalTrace, TaskKind};
use crate::TraceError;

/// Exact metric value.
pub type Fraction = Ratio<u64>;

pub fn to_f64(value: Fraction) -> f64 {
    *value.numer() as f64 / *value.denom() as f64
}

fn ratio(num: usize, den: usize) -> Fraction {
    if num == 0 || den == 0 {
        Fraction::from_integer(0)
    } else {
        Fraction::new(num as u64, den as u64)
    }
}

fn check(trace: &IncrementalTrace) -> Result<(), MetricsError> {
    validate_trace(trace).map_err(|violations| {
        MetricsError::Trace(TraceError::Invalid { sequence_id: trace.sequence_id().to_string(), violations })
    })
}

pub fn edit_overhead_exact(trace: &IncrementalTrace, delay: Delay) -> Result<Fraction, MetricsError> {
    let counts = edit_counts(&apply_delay(trace, delay)?)?;
    let necessary = trace.task.necessary_edits(trace.n());
    Ok(ratio(counts.substitutions, necessary + counts.substitutions))
}

pub fn edit_overhead(trace: &IncrementalTrace, delay: Delay) -> Result<f64, MetricsError> {
    edit_overhead_exact(trace, delay).map(to_f64)
}

/// Earliest step `t >= first` from which slot `slot` (0-based) holds its
/// final label at every later step.
fn settling_step(trace: &IncrementalTrace, slot: usize, first: usize) -> usize {
    let n = trace.n();
    let final_label = &trace.step(n)[slot];
    let mut settled = n;
    while settled > first && &trace.step(settled - 1)[slot] == final_label {
        settled -= 1;
    }
    settled
}

/// CT is computed on the undelayed trace only.
pub fn correction_time_exact(trace: &IncrementalTrace) -> Result<Fraction, MetricsError> {
    check(trace)?;
    let n = trace.n();
    if n == 1 {
        return Ok(Fraction::from_integer(0));
    }
    let (total_delay, opportunities) = match trace.task {
        TaskKind::Tagging => {
            let fd: usize = (1..=n).map(|i| settling_step(trace, i - 1, i) - i).sum();
            (fd, n * (n - 1) / 2)
        }
        TaskKind::Classification => (settling_step(trace, 0, 1) - 1, n - 1),
    };
    Ok(ratio(total_delay, opportunities))
}

pub fn correction_time_score(trace: &IncrementalTrace) -> Result<f64, MetricsError> {
    correction_time_exact(trace).map(to_f64)
}

pub fn relative_correctness_exact(trace: &IncrementalTrace, delay: Delay) -> Result<Fraction, MetricsError> {
    let view = apply_delay(trace, delay)?;
    let final_output = trace.final_output();
    let correct = view.emissions().iter().filter(|emission| final_output.starts_with(emission)).count();
    Ok(ratio(correct, trace.n()))
}

pub fn relative_correctness(trace: &IncrementalTrace, delay: Delay) -> Result<f64, MetricsError> {
    relative_correctness_exact(trace, delay).map(to_f64)
}

/// Arithmetic mean that does not depend on the order of `values`.
pub(crate) fn stable_mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut values: Vec<f64> = values.into_iter().collect();
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    values.iter().sum::<f64>() / values.len() as f64
}

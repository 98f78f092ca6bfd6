use serde::Serialize;

use super::{ratio, stable_mean, to_f64, Fraction};
use crate::editops::apply_delay;
use crate::error::MetricsError;
use crate::trace::{Delay, IncrementalTrace};

/// Cumulative EO after each step of the undelayed trace: substitutions so far
/// over all edits so far.
pub fn partial_edit_overhead(trace: &IncrementalTrace) -> Result<Vec<Fraction>, MetricsError> {
    let view = apply_delay(trace, Delay::NONE)?;
    let mut prev: &[String] = &[];
    let (mut subs, mut edits) = (0usize, 0usize);
    let mut curve = Vec::with_capacity(trace.n());
    for &emission in view.emissions() {
        let changed = prev.iter().zip(emission).filter(|(a, b)| a != b).count();
        subs += changed;
        edits += changed + emission.len().saturating_sub(prev.len());
        curve.push(ratio(subs, edits));
        prev = emission;
    }
    Ok(curve)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Correct,
    Incorrect,
}

impl Group {
    pub fn as_str(self) -> &'static str {
        match self {
            Group::Correct => "correct",
            Group::Incorrect => "incorrect",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    /// Absolute 1-based time step.
    pub step: usize,
    pub mean_eo: f64,
    /// Number of sequences with at least `step` tokens.
    pub support: usize,
}

/// Mean partial EO per absolute step, split by whether the final output
/// matches the gold labels exactly.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EoCurves {
    pub correct: Vec<CurvePoint>,
    pub incorrect: Vec<CurvePoint>,
}

impl EoCurves {
    pub fn group(&self, group: Group) -> &[CurvePoint] {
        match group {
            Group::Correct => &self.correct,
            Group::Incorrect => &self.incorrect,
        }
    }

    /// `(step, group, mean_eo, support)` rows, correct group first.
    pub fn rows(&self) -> impl Iterator<Item = (Group, &CurvePoint)> {
        self.correct.iter().map(|p| (Group::Correct, p)).chain(self.incorrect.iter().map(|p| (Group::Incorrect, p)))
    }
}

fn average(curves: &[Vec<f64>]) -> Vec<CurvePoint> {
    let longest = curves.iter().map(Vec::len).max().unwrap_or(0);
    (0..longest)
        .map(|i| {
            let values: Vec<f64> = curves.iter().filter_map(|c| c.get(i).copied()).collect();
            CurvePoint { step: i + 1, support: values.len(), mean_eo: stable_mean(values) }
        })
        .collect()
}

/// Every trace must carry gold labels.
pub fn eo_over_time(traces: &[IncrementalTrace]) -> Result<EoCurves, MetricsError> {
    let mut correct = Vec::new();
    let mut incorrect = Vec::new();
    for trace in traces {
        let gold = trace
            .gold
            .as_deref()
            .ok_or_else(|| MetricsError::MissingGold { sequence_id: trace.sequence_id().to_string() })?;
        let curve: Vec<f64> = partial_edit_overhead(trace)?.into_iter().map(to_f64).collect();
        if trace.final_output() == gold {
            correct.push(curve);
        } else {
            incorrect.push(curve);
        }
    }
    Ok(EoCurves { correct: average(&correct), incorrect: average(&incorrect) })
}

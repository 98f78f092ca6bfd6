//! Edit scripts between successive outputs and delayed views of a trace.
//!
//! Outputs are positionally aligned, so diffing two outputs is a label-wise
//! comparison over the shared prefix plus additions for the new tail.

use std::fmt;

use serde::Serialize;

use crate::error::EditError;
use crate::trace::{validate_trace, Delay, IncrementalTrace, TaskKind};
use crate::TraceError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EditKind {
    Addition,
    Substitution,
    /// Never produced by this crate; shrinking outputs are rejected instead.
    Revocation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Edit {
    pub kind: EditKind,
    /// 1-based token position; always 1 for classification.
    pub position: usize,
    pub old_label: Option<String>,
    pub new_label: Option<String>,
}

impl Edit {
    pub fn addition(position: usize, label: &str) -> Self {
        Edit { kind: EditKind::Addition, position, old_label: None, new_label: Some(label.into()) }
    }

    pub fn substitution(position: usize, old: &str, new: &str) -> Self {
        Edit { kind: EditKind::Substitution, position, old_label: Some(old.into()), new_label: Some(new.into()) }
    }
}

impl fmt::Display for Edit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let old = self.old_label.as_deref().unwrap_or("");
        let new = self.new_label.as_deref().unwrap_or("");
        match self.kind {
            EditKind::Addition => write!(f, "Add({}, {new})", self.position),
            EditKind::Substitution => write!(f, "Sub({}, {old}->{new})", self.position),
            EditKind::Revocation => write!(f, "Rev({}, {old})", self.position),
        }
    }
}

/// The edits performed at one time step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EditScript {
    pub step: usize,
    pub edits: Vec<Edit>,
}

impl EditScript {
    pub fn count(&self, kind: EditKind) -> usize {
        self.edits.iter().filter(|e| e.kind == kind).count()
    }
}

/// The outputs a consumer would see when labels are withheld until `delay`
/// further tokens have been read. The final step always emits everything.
#[derive(Debug, Clone)]
pub struct DelayedView<'a> {
    trace: &'a IncrementalTrace,
    delay: Delay,
    emissions: Vec<&'a [String]>,
}

impl<'a> DelayedView<'a> {
    pub fn trace(&self) -> &'a IncrementalTrace {
        self.trace
    }

    pub fn delay(&self) -> Delay {
        self.delay
    }

    /// Emissions for steps 1..=n, in order.
    pub fn emissions(&self) -> &[&'a [String]] {
        &self.emissions
    }

    /// Emission at 1-based step `t`.
    pub fn emission(&self, t: usize) -> &'a [String] {
        self.emissions[t - 1]
    }
}

/// Number of labels visible at step `t` of an `n`-step trace under `delay`.
pub fn emitted_len(task: TaskKind, t: usize, n: usize, delay: Delay) -> usize {
    let committed = t.saturating_sub(delay.get());
    match task {
        _ if t == n => task.labels_at_step(n),
        TaskKind::Tagging => committed,
        TaskKind::Classification => committed.min(1),
    }
}

pub fn apply_delay(trace: &IncrementalTrace, delay: Delay) -> Result<DelayedView<'_>, EditError> {
    validate_trace(trace)
        .map_err(|violations| TraceError::Invalid { sequence_id: trace.sequence_id().to_string(), violations })?;
    let n = trace.n();
    let emissions = trace
        .steps
        .iter()
        .enumerate()
        .map(|(i, step)| &step.labels()[..emitted_len(trace.task, i + 1, n, delay)])
        .collect();
    Ok(DelayedView { trace, delay, emissions })
}

/// Edits turning `prev` into `next` at step `step`.
pub fn diff_outputs(step: usize, prev: &[String], next: &[String]) -> Result<EditScript, EditError> {
    if next.len() < prev.len() {
        return Err(EditError::Shrinking { step, from: prev.len(), to: next.len() });
    }
    let mut edits: Vec<Edit> = prev
        .iter()
        .zip(next)
        .enumerate()
        .filter(|(_, (old, new))| old != new)
        .map(|(i, (old, new))| Edit::substitution(i + 1, old, new))
        .collect();
    edits.extend(next.iter().enumerate().skip(prev.len()).map(|(i, label)| Edit::addition(i + 1, label)));
    Ok(EditScript { step, edits })
}

/// One script per step whose emission differs from the previous one.
pub fn edit_scripts(view: &DelayedView<'_>) -> Result<Vec<EditScript>, EditError> {
    let mut scripts = Vec::new();
    let mut prev: &[String] = &[];
    for (i, &emission) in view.emissions.iter().enumerate() {
        let script = diff_outputs(i + 1, prev, emission)?;
        if !script.edits.is_empty() {
            scripts.push(script);
        }
        prev = emission;
    }
    Ok(scripts)
}

/// Additions and substitutions across the whole view, without materializing
/// the scripts.
pub fn edit_counts(view: &DelayedView<'_>) -> Result<EditCounts, EditError> {
    let mut counts = EditCounts::default();
    let mut prev: &[String] = &[];
    for (i, &emission) in view.emissions.iter().enumerate() {
        if emission.len() < prev.len() {
            return Err(EditError::Shrinking { step: i + 1, from: prev.len(), to: emission.len() });
        }
        counts.substitutions += prev.iter().zip(emission).filter(|(a, b)| a != b).count();
        counts.additions += emission.len() - prev.len();
        prev = emission;
    }
    Ok(counts)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EditCounts {
    pub additions: usize,
    pub substitutions: usize,
}

/// Rebuilds an output by replaying scripts from an empty output.
pub fn replay(scripts: &[EditScript]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for edit in scripts.iter().flat_map(|s| &s.edits) {
        let idx = edit.position - 1;
        match edit.kind {
            EditKind::Addition | EditKind::Substitution => {
                let label = edit.new_label.clone().unwrap_or_default();
                if idx < out.len() {
                    out[idx] = label;
                } else {
                    out.resize(idx, String::new());
                    out.push(label);
                }
            }
            EditKind::Revocation => {
                out.truncate(idx);
            }
        }
    }
    out
}

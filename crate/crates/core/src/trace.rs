//! Domain types shared by every module: token sequences, per-step outputs and
//! the incremental trace that all metrics consume.
//!
//! Time steps are 1-based. Token `i` is first labeled at step `i`, and
//! `steps[t - 1]` holds the output produced after consuming `t` tokens.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::TraceError;

/// Whether a processor labels every token or the sequence as a whole.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Tagging,
    Classification,
}

impl TaskKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::Tagging => "tagging",
            TaskKind::Classification => "classification",
        }
    }

    /// Number of necessary edits (additions) for a sequence of `n` tokens.
    pub fn necessary_edits(self, n: usize) -> usize {
        match self {
            TaskKind::Tagging => n,
            TaskKind::Classification => 1,
        }
    }

    /// Label count expected in the undelayed output at step `t`.
    pub fn labels_at_step(self, t: usize) -> usize {
        match self {
            TaskKind::Tagging => t,
            TaskKind::Classification => 1,
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tagging" => Ok(TaskKind::Tagging),
            "classification" => Ok(TaskKind::Classification),
            other => Err(format!("unknown task kind `{other}` (expected tagging or classification)")),
        }
    }
}

/// A non-empty sequence of tokens with an opaque identifier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSequence {
    id: String,
    tokens: Vec<String>,
}

impl TokenSequence {
    pub fn new(id: impl Into<String>, tokens: Vec<String>) -> Result<Self, TraceError> {
        let id = id.into();
        if tokens.is_empty() {
            return Err(TraceError::EmptySequence { sequence_id: id });
        }
        Ok(Self { id, tokens })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Sequence length `n`.
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    /// Always false; kept for API symmetry with slices.
    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn prefix(&self, t: usize) -> &[String] {
        &self.tokens[..t]
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.tokens
    }
}

/// Labels emitted by a processor at one time step.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StepOutput(pub Vec<String>);

impl StepOutput {
    pub fn labels(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<String>> for StepOutput {
    fn from(labels: Vec<String>) -> Self {
        StepOutput(labels)
    }
}

impl<'a> From<&[&'a str]> for StepOutput {
    fn from(labels: &[&'a str]) -> Self {
        StepOutput(labels.iter().map(|s| s.to_string()).collect())
    }
}

/// Label encoding of a gold annotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelScheme {
    Bio,
    Plain,
}

impl LabelScheme {
    /// `Bio` when every label follows the `O | (B|I)-<type>` grammar and at
    /// least one label opens or continues a span, otherwise `Plain`.
    pub fn detect<'a>(labels: impl IntoIterator<Item = &'a str>) -> Self {
        let mut any_span = false;
        for label in labels {
            if !is_bio_label(label) {
                return LabelScheme::Plain;
            }
            any_span |= label != "O";
        }
        if any_span {
            LabelScheme::Bio
        } else {
            LabelScheme::Plain
        }
    }
}

impl std::str::FromStr for LabelScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bio" => Ok(LabelScheme::Bio),
            "plain" => Ok(LabelScheme::Plain),
            other => Err(format!("unknown label scheme `{other}` (expected bio or plain)")),
        }
    }
}

/// True for `O`, `B-<type>` and `I-<type>` with a non-empty type.
pub fn is_bio_label(label: &str) -> bool {
    label == "O" || label.strip_prefix("B-").or_else(|| label.strip_prefix("I-")).is_some_and(|ty| !ty.is_empty())
}

/// Reference labels for one sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldAnnotation {
    labels: Vec<String>,
    scheme: LabelScheme,
}

impl GoldAnnotation {
    /// Checks the label count against the task and, for BIO, the label grammar.
    pub fn new(labels: Vec<String>, scheme: LabelScheme, task: TaskKind, n: usize) -> Result<Self, TraceError> {
        let expected = match task {
            TaskKind::Tagging => n,
            TaskKind::Classification => 1,
        };
        if labels.len() != expected {
            return Err(TraceError::GoldLength { expected, found: labels.len() });
        }
        if scheme == LabelScheme::Bio {
            if let Some((i, bad)) = labels.iter().enumerate().find(|(_, l)| !is_bio_label(l)) {
                return Err(TraceError::InvalidBioLabel { position: i + 1, label: bad.clone() });
            }
        }
        Ok(Self { labels, scheme })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn scheme(&self) -> LabelScheme {
        self.scheme
    }
}

/// Number of right-context tokens observed before a label is first emitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Delay(pub usize);

impl Delay {
    pub const NONE: Delay = Delay(0);

    pub fn get(self) -> usize {
        self.0
    }
}

impl fmt::Display for Delay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Partial outputs of one sequence, one entry per consumed token.
///
/// Steps are stored undelayed; delayed views are derived on demand by
/// [`crate::editops::apply_delay`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncrementalTrace {
    pub task: TaskKind,
    pub tokens: TokenSequence,
    pub steps: Vec<StepOutput>,
    /// Optional reference labels carried alongside the trace.
    pub gold: Option<Vec<String>>,
}

impl IncrementalTrace {
    /// Builds a trace and rejects it unless [`validate_trace`] passes.
    pub fn new(
        task: TaskKind,
        tokens: TokenSequence,
        steps: Vec<StepOutput>,
        gold: Option<Vec<String>>,
    ) -> Result<Self, TraceError> {
        let trace = Self { task, tokens, steps, gold };
        validate_trace(&trace)
            .map_err(|violations| TraceError::Invalid { sequence_id: trace.sequence_id().to_string(), violations })?;
        Ok(trace)
    }

    pub fn sequence_id(&self) -> &str {
        self.tokens.id()
    }

    pub fn n(&self) -> usize {
        self.tokens.len()
    }

    /// Output at 1-based step `t`.
    pub fn step(&self, t: usize) -> &[String] {
        self.steps[t - 1].labels()
    }

    /// The last step, identical to the non-incremental output.
    pub fn final_output(&self) -> &[String] {
        self.steps.last().map(StepOutput::labels).unwrap_or(&[])
    }
}

/// A broken trace invariant. `step` is 1-based when the violation belongs to
/// a single step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub step: Option<usize>,
    pub reason: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.step {
            Some(t) => write!(f, "step {t}: {}", self.reason),
            None => f.write_str(&self.reason),
        }
    }
}

/// Checks every trace invariant and reports all violations found.
pub fn validate_trace(trace: &IncrementalTrace) -> Result<(), Vec<Violation>> {
    let mut violations = Vec::new();
    let n = trace.tokens.len();

    if n == 0 {
        violations.push(Violation { step: None, reason: "sequence has no tokens".into() });
    }
    if trace.steps.len() != n {
        violations.push(Violation { step: None, reason: format!("expected {n} steps, found {}", trace.steps.len()) });
    }
    for (i, step) in trace.steps.iter().enumerate() {
        let t = i + 1;
        let expected = trace.task.labels_at_step(t);
        if step.len() != expected {
            let noun = if expected == 1 { "label" } else { "labels" };
            violations
                .push(Violation { step: Some(t), reason: format!("expected {expected} {noun}, found {}", step.len()) });
        }
    }
    if let Some(gold) = &trace.gold {
        let expected = trace.task.necessary_edits(n);
        if gold.len() != expected {
            violations
                .push(Violation { step: None, reason: format!("gold has {} labels, expected {expected}", gold.len()) });
        }
    }

    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

//! Online metric computation: feed undelayed outputs one step at a time and
//! read EO, RC and CT once the sequence ends.
//!
//! Each slot keeps only the runs of distinct labels it went through, so the
//! state is linear in the number of changes instead of quadratic in `n`.

use super::{ratio, Fraction};
use crate::editops::emitted_len;
use crate::error::{EditError, MetricsError};
use crate::trace::{Delay, TaskKind, Violation};
use crate::TraceError;

/// A label held by one slot from step `start` until the next run begins.
#[derive(Debug, Clone)]
struct Run {
    start: usize,
    label: String,
}

#[derive(Debug, Clone, Default)]
struct DelayState {
    runs: Vec<Vec<Run>>,
    substitutions: usize,
}

impl DelayState {
    fn emitted(&self) -> usize {
        self.runs.len()
    }

    fn observe(&mut self, step: usize, emission: &[String]) -> Result<(), EditError> {
        if emission.len() < self.emitted() {
            return Err(EditError::Shrinking { step, from: self.emitted(), to: emission.len() });
        }
        for (slot, label) in emission.iter().enumerate() {
            match self.runs.get_mut(slot) {
                Some(runs) => {
                    if runs.last().is_some_and(|r| &r.label != label) {
                        self.substitutions += 1;
                        runs.push(Run { start: step, label: label.clone() });
                    }
                }
                None => self.runs.push(vec![Run { start: step, label: label.clone() }]),
            }
        }
        Ok(())
    }

    /// Steps at which the emission was a prefix of the final output.
    fn correct_steps(&self, n: usize) -> usize {
        // +1 at the first wrong step of a run, -1 after its last step
        let mut marks = vec![0i64; n + 2];
        for runs in &self.runs {
            let final_label = &runs.last().expect("slot has a run").label;
            for (k, run) in runs.iter().enumerate() {
                if &run.label != final_label {
                    let end = runs.get(k + 1).map_or(n, |next| next.start - 1);
                    marks[run.start] += 1;
                    marks[end + 1] -= 1;
                }
            }
        }
        let mut open = 0i64;
        (1..=n)
            .filter(|&t| {
                open += marks[t];
                open == 0
            })
            .count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamingResult {
    pub n: usize,
    /// `(delay, eo, rc)` in the order the delays were given.
    pub by_delay: Vec<(Delay, Fraction, Fraction)>,
    pub ct: Fraction,
}

impl StreamingResult {
    pub fn at(&self, delay: Delay) -> Option<(Fraction, Fraction)> {
        self.by_delay.iter().find(|(d, _, _)| *d == delay).map(|&(_, eo, rc)| (eo, rc))
    }
}

/// The last pushed step is held back until the next push or [`finish`], since
/// the final step emits the complete output regardless of delay.
///
/// [`finish`]: StreamingMetrics::finish
#[derive(Debug, Clone)]
pub struct StreamingMetrics {
    task: TaskKind,
    delays: Vec<Delay>,
    states: Vec<DelayState>,
    undelayed: DelayState,
    pending: Option<Vec<String>>,
    steps: usize,
}

impl StreamingMetrics {
    pub fn new(task: TaskKind, delays: &[Delay]) -> Self {
        Self {
            task,
            delays: delays.to_vec(),
            states: vec![DelayState::default(); delays.len()],
            undelayed: DelayState::default(),
            pending: None,
            steps: 0,
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Accepts the undelayed output of the next step.
    pub fn push(&mut self, labels: &[String]) -> Result<(), MetricsError> {
        let t = self.steps + 1;
        let expected = self.task.labels_at_step(t);
        if labels.len() != expected {
            let noun = if expected == 1 { "label" } else { "labels" };
            return Err(MetricsError::Trace(TraceError::Invalid {
                sequence_id: String::new(),
                violations: vec![Violation {
                    step: Some(t),
                    reason: format!("expected {expected} {noun}, found {}", labels.len()),
                }],
            }));
        }
        if let Some(prev) = self.pending.take() {
            self.observe(self.steps, &prev, false)?;
        }
        self.pending = Some(labels.to_vec());
        self.steps = t;
        Ok(())
    }

    fn observe(&mut self, t: usize, labels: &[String], last: bool) -> Result<(), MetricsError> {
        // `n` only matters for the final step, where `t == n`
        let n = if last { t } else { usize::MAX };
        for (state, &delay) in self.states.iter_mut().zip(&self.delays) {
            state.observe(t, &labels[..emitted_len(self.task, t, n, delay)])?;
        }
        self.undelayed.observe(t, labels)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<StreamingResult, MetricsError> {
        let last = self.pending.take().ok_or(MetricsError::EmptyCorpus)?;
        let n = self.steps;
        self.observe(n, &last, true)?;

        let necessary = self.task.necessary_edits(n);
        let by_delay = self
            .delays
            .iter()
            .zip(&self.states)
            .map(|(&d, s)| {
                let eo = ratio(s.substitutions, necessary + s.substitutions);
                (d, eo, ratio(s.correct_steps(n), n))
            })
            .collect();

        let first_seen = |slot: usize| match self.task {
            TaskKind::Tagging => slot + 1,
            TaskKind::Classification => 1,
        };
        let settle: usize = self
            .undelayed
            .runs
            .iter()
            .enumerate()
            .map(|(slot, runs)| runs.last().map_or(0, |r| r.start - first_seen(slot)))
            .sum();
        let opportunities = match self.task {
            TaskKind::Tagging => n * (n - 1) / 2,
            TaskKind::Classification => n - 1,
        };
        Ok(StreamingResult { n, by_delay, ct: ratio(settle, opportunities) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::fixtures::{e1, e2};
    use crate::trace::IncrementalTrace;

    fn stream(t: &IncrementalTrace, delays: &[Delay]) -> StreamingResult {
        let mut s = StreamingMetrics::new(t.task, delays);
        for step in &t.steps {
            s.push(step.labels()).unwrap();
        }
        s.finish().unwrap()
    }

    #[test]
    fn e1_streamed() {
        let r = stream(&e1(), &[Delay(0), Delay(1), Delay(2)]);
        assert_eq!(r.at(Delay(0)), Some((Fraction::new(1, 4), Fraction::new(1, 3))));
        assert_eq!(r.at(Delay(1)), Some((Fraction::new(1, 4), Fraction::new(2, 3))));
        assert_eq!(r.at(Delay(2)), Some((Fraction::from_integer(0), Fraction::from_integer(1))));
        assert_eq!(r.ct, Fraction::new(2, 3));
    }

    #[test]
    fn e2_streamed() {
        let r = stream(&e2(), &[Delay(0)]);
        assert_eq!(r.at(Delay(0)), Some((Fraction::new(1, 2), Fraction::new(1, 2))));
        assert_eq!(r.ct, Fraction::new(2, 3));
    }

    #[test]
    fn wrong_step_length_is_rejected() {
        let mut s = StreamingMetrics::new(TaskKind::Tagging, &[Delay(0)]);
        s.push(&["A".to_string()]).unwrap();
        assert!(s.push(&["A".to_string()]).is_err());
    }

    #[test]
    fn finishing_an_empty_stream_fails() {
        assert!(StreamingMetrics::new(TaskKind::Tagging, &[]).finish().is_err());
    }
}

//! Trace JSONL: one object per line with `sequence_id`, `task`, `tokens`,
//! optional `gold` and `steps`.

use std::io::{BufRead, Write};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::CorpusError;
use crate::trace::{validate_trace, IncrementalTrace, StepOutput, TaskKind, TokenSequence};
use crate::TraceError;

#[derive(Serialize)]
struct TraceRecord<'a> {
    sequence_id: &'a str,
    task: TaskKind,
    tokens: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    gold: Option<&'a [String]>,
    steps: &'a [StepOutput],
}

pub fn trace_to_json(trace: &IncrementalTrace) -> String {
    serde_json::to_string(&TraceRecord {
        sequence_id: trace.sequence_id(),
        task: trace.task,
        tokens: trace.tokens.tokens(),
        gold: trace.gold.as_deref(),
        steps: &trace.steps,
    })
    .expect("trace records serialize")
}

/// Writes one line per trace; invalid traces are refused before anything is
/// written for them.
pub fn write_traces<W: Write>(mut out: W, traces: &[IncrementalTrace]) -> Result<(), CorpusError> {
    for trace in traces {
        validate_trace(trace).map_err(|violations| CorpusError::InvalidTrace {
            sequence_id: trace.sequence_id().to_string(),
            source: TraceError::Invalid { sequence_id: trace.sequence_id().to_string(), violations },
        })?;
        writeln!(out, "{}", trace_to_json(trace))?;
    }
    out.flush()?;
    Ok(())
}

struct LineParser {
    line: usize,
}

impl LineParser {
    fn schema(&self, path: impl Into<String>, reason: impl Into<String>) -> CorpusError {
        CorpusError::Schema { line: self.line, path: path.into(), reason: reason.into() }
    }

    fn field<'v>(&self, obj: &'v Map<String, Value>, name: &str) -> Result<&'v Value, CorpusError> {
        obj.get(name).ok_or_else(|| self.schema(name, "missing field"))
    }

    fn string(&self, value: &Value, path: &str) -> Result<String, CorpusError> {
        value.as_str().map(String::from).ok_or_else(|| self.schema(path, "expected a string"))
    }

    fn strings(&self, value: &Value, path: &str) -> Result<Vec<String>, CorpusError> {
        let items = value.as_array().ok_or_else(|| self.schema(path, "expected an array of strings"))?;
        items.iter().enumerate().map(|(i, v)| self.string(v, &format!("{path}[{i}]"))).collect()
    }

    fn parse(&self, text: &str) -> Result<IncrementalTrace, CorpusError> {
        let value: Value = serde_json::from_str(text).map_err(|e| self.schema("$", e.to_string()))?;
        let obj = value.as_object().ok_or_else(|| self.schema("$", "expected a JSON object"))?;

        let sequence_id = self.string(self.field(obj, "sequence_id")?, "sequence_id")?;
        let task: TaskKind =
            self.string(self.field(obj, "task")?, "task")?.parse().map_err(|e: String| self.schema("task", e))?;
        let tokens = self.strings(self.field(obj, "tokens")?, "tokens")?;
        let gold = match obj.get("gold") {
            None | Some(Value::Null) => None,
            Some(v) => Some(self.strings(v, "gold")?),
        };
        let steps = self
            .field(obj, "steps")?
            .as_array()
            .ok_or_else(|| self.schema("steps", "expected an array of label arrays"))?
            .iter()
            .enumerate()
            .map(|(i, v)| self.strings(v, &format!("steps[{i}]")).map(StepOutput))
            .collect::<Result<Vec<_>, _>>()?;

        let tokens = TokenSequence::new(sequence_id, tokens).map_err(|_| self.schema("tokens", "empty"))?;
        IncrementalTrace::new(task, tokens, steps, gold)
            .map_err(|source| CorpusError::Trace { line: self.line, source })
    }
}

/// Reads and validates every non-blank line. Errors carry the 1-based line
/// number and, for schema problems, the offending field path.
pub fn read_traces<R: BufRead>(input: R) -> Result<Vec<IncrementalTrace>, CorpusError> {
    let mut traces = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        traces.push(LineParser { line: i + 1 }.parse(&line)?);
    }
    Ok(traces)
}

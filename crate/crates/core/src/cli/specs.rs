use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use super::CliError;
use crate::simulator::{
    ContinuationSpec, Endpoint, ExternalSpec, LookupTagger, NGramModel, ProcessorSpec, WindowTagger,
};
use crate::trace::Delay;

pub fn parse_delays(raw: &str) -> Result<Delay, String> {
    raw.trim().parse::<usize>().map(Delay).map_err(|_| format!("`{raw}` is not a non-negative integer delay"))
}

fn external(target: &str, timeout: f64) -> Result<ExternalSpec, CliError> {
    if target.is_empty() {
        return Err(CliError::Usage("external endpoint is empty".into()));
    }
    if !(timeout.is_finite() && timeout > 0.0) {
        return Err(CliError::Usage(format!("timeout must be positive, got {timeout}")));
    }
    Ok(ExternalSpec { endpoint: Endpoint::parse(target), timeout: Duration::from_secs_f64(timeout) })
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::input(path, e))
}

/// Parses `lookup:PATH`, `window:PATH` or `external:TARGET`. Returns the spec
/// and the file it was read from, if any.
pub fn parse_processor(
    raw: &str,
    default_label: &str,
    timeout: f64,
) -> Result<(ProcessorSpec, Option<PathBuf>), CliError> {
    let (kind, arg) =
        raw.split_once(':').ok_or_else(|| CliError::Usage(format!("processor `{raw}` must look like KIND:ARG")))?;
    match kind {
        "lookup" => {
            let path = PathBuf::from(arg);
            let tagger = LookupTagger::from_tsv(&read(&path)?, default_label).map_err(|e| CliError::input(&path, e))?;
            Ok((ProcessorSpec::Lookup(tagger), Some(path)))
        }
        "window" => {
            let path = PathBuf::from(arg);
            let tagger = WindowTagger::from_toml(&read(&path)?).map_err(|e| CliError::input(&path, e))?;
            Ok((ProcessorSpec::Window(tagger), Some(path)))
        }
        "external" => Ok((ProcessorSpec::External(external(arg, timeout)?), None)),
        other => Err(CliError::Usage(format!("unknown processor kind `{other}`"))),
    }
}

/// Parses `none`, `repeat-last`, `ngram:PATH` or `external:TARGET`.
pub fn parse_prophecy(
    raw: &str,
    max_len: usize,
    timeout: f64,
) -> Result<(ContinuationSpec, Option<PathBuf>), CliError> {
    match raw {
        "none" => return Ok((ContinuationSpec::None, None)),
        "repeat-last" => return Ok((ContinuationSpec::RepeatLast, None)),
        _ => {}
    }
    match raw.split_once(':') {
        Some(("ngram", arg)) => {
            let path = PathBuf::from(arg);
            let model = NGramModel::load(&path).map_err(|e| CliError::input(&path, e))?;
            Ok((ContinuationSpec::NGram { model: Arc::new(model), max_len }, Some(path)))
        }
        Some(("external", arg)) => Ok((ContinuationSpec::External(external(arg, timeout)?), None)),
        _ => Err(CliError::Usage(format!(
            "unknown prophecy `{raw}` (expected none, repeat-last, ngram:PATH or external:TARGET)"
        ))),
    }
}

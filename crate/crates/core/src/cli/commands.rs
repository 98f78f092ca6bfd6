use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::specs::{parse_processor, parse_prophecy};
use super::{CliError, DiffArgs, EvaluateArgs, ProphecyEvalArgs, SimulateArgs, TrainNgramArgs, TruncateArgs};
use crate::corpus::{corpus_bleu, read_traces, trace_to_json, truncate_corpus, Corpus};
use crate::editops::{apply_delay, edit_scripts};
use crate::metrics::{corpus_report, eo_over_time};
use crate::simulator::{ContinuationSpec, NGramModel, ProcessorSpec, Simulator};
use crate::trace::{Delay, IncrementalTrace, TaskKind};

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::input(path, e))
}

fn read_corpus(path: &Path, task: TaskKind) -> Result<(Corpus, String), CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::input(path, e))?;
    let digest = hex::encode(Sha256::digest(&bytes));
    let text = String::from_utf8(bytes).map_err(|e| CliError::input(path, e))?;
    let corpus = Corpus::read(&text, task).map_err(|e| CliError::input(path, e))?;
    Ok((corpus, digest))
}

fn digest_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::input(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn read_trace_file(path: &Path) -> Result<Vec<IncrementalTrace>, CliError> {
    let file = File::open(path).map_err(|e| CliError::input(path, e))?;
    let traces = read_traces(BufReader::new(file)).map_err(|e| CliError::input(path, e))?;
    if traces.is_empty() {
        return Err(CliError::input(path, "no traces"));
    }
    Ok(traces)
}

/// Applies `work` to every item on `jobs` threads, each owning a state built
/// by `init`. Results come back in input order.
fn parallel_map<T, S, R, I, F>(items: &[T], jobs: usize, init: I, work: F) -> Result<Vec<R>, CliError>
where
    T: Sync,
    R: Send,
    I: Fn() -> Result<S, CliError> + Sync,
    F: Fn(&mut S, &T) -> R + Sync,
{
    let jobs = jobs.clamp(1, items.len().max(1));
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<R>>> = Mutex::new(items.iter().map(|_| None).collect());
    thread::scope(|scope| {
        let workers: Vec<_> = (0..jobs)
            .map(|_| {
                scope.spawn(|| -> Result<(), CliError> {
                    let mut state = init()?;
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        let Some(item) = items.get(i) else { return Ok(()) };
                        let result = work(&mut state, item);
                        results.lock().expect("no worker panicked")[i] = Some(result);
                    }
                })
            })
            .collect();
        workers.into_iter().map(|w| w.join().expect("worker thread panicked")).collect::<Result<Vec<()>, CliError>>()
    })?;
    Ok(results
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .map(|r| r.expect("every item processed"))
        .collect())
}

#[derive(Serialize)]
struct InputDigest {
    role: &'static str,
    path: PathBuf,
    sha256: String,
}

#[derive(Serialize)]
struct SimulateConfig<'a> {
    task: TaskKind,
    processor: &'a str,
    processor_description: String,
    prophecy: &'a str,
    prophecy_description: String,
    default_label: &'a str,
    max_continuation: usize,
    timeout_secs: f64,
    jobs: usize,
}

#[derive(Serialize)]
struct SentenceFailure {
    index: usize,
    sequence_id: String,
    error: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'static str,
    config: SimulateConfig<'a>,
    inputs: Vec<InputDigest>,
    output: &'a Path,
    sentences: usize,
    traces_written: usize,
    failures: Vec<SentenceFailure>,
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let (corpus, corpus_digest) = read_corpus(&args.corpus, args.task)?;
    let (processor, processor_path) = parse_processor(&args.processor, &args.default_label, args.timeout)?;
    let (prophecy, prophecy_path) = parse_prophecy(&args.prophecy, args.max_continuation, args.timeout)?;

    let mut inputs = vec![InputDigest { role: "corpus", path: args.corpus.clone(), sha256: corpus_digest }];
    for (role, path) in [("processor", processor_path), ("prophecy", prophecy_path)] {
        if let Some(path) = path {
            let sha256 = digest_file(&path)?;
            inputs.push(InputDigest { role, path, sha256 });
        }
    }

    let results = simulate_corpus(&corpus, args.task, &processor, &prophecy, args.jobs)?;

    let mut lines = String::new();
    let mut failures = Vec::new();
    for (index, (entry, result)) in corpus.entries.iter().zip(results).enumerate() {
        match result {
            Ok(mut trace) => {
                trace.gold = entry.gold.as_ref().map(|g| g.labels().to_vec());
                lines.push_str(&trace_to_json(&trace));
                lines.push('\n');
            }
            Err(error) => failures.push(SentenceFailure { index, sequence_id: entry.tokens.id().to_string(), error }),
        }
    }
    write_file(&args.out, lines.as_bytes())?;

    let manifest_path = args.manifest.clone().unwrap_or_else(|| {
        let mut name = args.out.clone().into_os_string();
        name.push(".manifest.json");
        PathBuf::from(name)
    });
    let failed = failures.len();
    let manifest = Manifest {
        command: "simulate",
        config: SimulateConfig {
            task: args.task,
            processor: &args.processor,
            processor_description: processor.describe(),
            prophecy: &args.prophecy,
            prophecy_description: prophecy.describe(),
            default_label: &args.default_label,
            max_continuation: args.max_continuation,
            timeout_secs: args.timeout,
            jobs: args.jobs,
        },
        inputs,
        output: &args.out,
        sentences: corpus.len(),
        traces_written: corpus.len() - failed,
        failures,
    };
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    write_file(&manifest_path, json.as_bytes())?;

    if failed > 0 {
        return Err(CliError::SentenceFailures { failed, total: corpus.len(), manifest: manifest_path });
    }
    Ok(())
}

/// One result per sentence; errors are rendered to strings for the manifest.
pub(crate) fn simulate_corpus(
    corpus: &Corpus,
    task: TaskKind,
    processor: &ProcessorSpec,
    prophecy: &ContinuationSpec,
    jobs: usize,
) -> Result<Vec<Result<IncrementalTrace, String>>, CliError> {
    parallel_map(
        &corpus.entries,
        jobs,
        || Simulator::new(processor, prophecy).map_err(|e| CliError::Usage(format!("cannot start simulator: {e}"))),
        |sim, entry| sim.run(&entry.tokens, task).map_err(|e| e.to_string()),
    )
}

fn attach_gold(traces: &mut [IncrementalTrace], path: &Path) -> Result<(), CliError> {
    let task = traces[0].task;
    let (corpus, _) = read_corpus(path, task)?;
    if corpus.len() != traces.len() {
        return Err(CliError::input(path, format!("{} gold sentences for {} traces", corpus.len(), traces.len())));
    }
    for (i, (trace, entry)) in traces.iter_mut().zip(&corpus.entries).enumerate() {
        if trace.tokens.tokens() != entry.tokens.tokens() {
            return Err(CliError::input(
                path,
                format!("sentence {} does not match trace `{}`", i + 1, trace.sequence_id()),
            ));
        }
        trace.gold = entry.gold.as_ref().map(|g| g.labels().to_vec());
    }
    Ok(())
}

pub fn evaluate(args: &EvaluateArgs) -> Result<(), CliError> {
    let mut traces = read_trace_file(&args.traces)?;
    if let Some(task) = traces.iter().map(|t| t.task).find(|&t| t != traces[0].task) {
        return Err(CliError::input(&args.traces, format!("mixed task kinds ({} and {task})", traces[0].task)));
    }
    if let Some(gold) = &args.gold {
        attach_gold(&mut traces, gold)?;
    }

    let report = corpus_report(&traces, &args.delays, args.scheme).map_err(|e| CliError::input(&args.traces, e))?;
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    match &args.report {
        Some(path) => write_file(path, json.as_bytes())?,
        None => print!("{json}"),
    }

    if let Some(path) = &args.csv {
        let mut csv = String::from("metric,delay,value\n");
        for m in &report.summary.delays {
            writeln!(csv, "eo,{},{}", m.delay, m.mean_eo).unwrap();
            writeln!(csv, "rc,{},{}", m.delay, m.mean_rc).unwrap();
        }
        writeln!(csv, "ct,,{}", report.summary.mean_ct).unwrap();
        write_file(path, csv.as_bytes())?;
    }

    if let Some(path) = &args.curves {
        let curves = eo_over_time(&traces)
            .map_err(|e| CliError::Usage(format!("EO curves need gold labels (use --gold): {e}")))?;
        let mut csv = String::from("step,group,mean_eo,support\n");
        for (group, point) in curves.rows() {
            writeln!(csv, "{},{},{},{}", point.step, group.as_str(), point.mean_eo, point.support).unwrap();
        }
        write_file(path, csv.as_bytes())?;
    }
    Ok(())
}

pub fn truncate(args: &TruncateArgs) -> Result<(), CliError> {
    let (corpus, _) = read_corpus(&args.corpus, args.task)?;
    write_file(&args.out, truncate_corpus(&corpus, args.seed).write().as_bytes())
}

pub fn diff(args: &DiffArgs) -> Result<(), CliError> {
    let traces = read_trace_file(&args.traces)?;
    let trace = match &args.sequence {
        Some(id) => traces
            .iter()
            .find(|t| t.sequence_id() == id)
            .ok_or_else(|| CliError::input(&args.traces, format!("no sequence `{id}`")))?,
        None => &traces[0],
    };
    print!("{}", render_diff(trace, Delay(args.delay)));
    Ok(())
}

pub(crate) fn render_diff(trace: &IncrementalTrace, delay: Delay) -> String {
    let view = apply_delay(trace, delay).expect("traces are validated on read");
    let scripts = edit_scripts(&view).expect("delayed views never shrink");
    let mut out = format!("{} ({}, n={}, delay {})\n", trace.sequence_id(), trace.task, trace.n(), delay);
    let width = view.emissions().iter().map(|e| e.join(" ").len()).max().unwrap_or(0);
    for (i, emission) in view.emissions().iter().enumerate() {
        let t = i + 1;
        let token = &trace.tokens.tokens()[i];
        let edits = scripts
            .iter()
            .find(|s| s.step == t)
            .map(|s| s.edits.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "))
            .unwrap_or_default();
        let line = format!("t={t:<3} {token:<12} {:<width$} | {edits}", emission.join(" "));
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn split_tokens(s: &str) -> Vec<String> {
    s.split_whitespace().map(String::from).collect()
}

pub fn prophecy_eval(args: &ProphecyEvalArgs) -> Result<(), CliError> {
    let (candidates, references) = match (&args.pairs, &args.corpus, &args.prophecy) {
        (Some(path), _, _) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::input(path, e))?;
            let mut cands = Vec::new();
            let mut refs = Vec::new();
            for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
                let (c, r) = line.split_once('\t').ok_or_else(|| {
                    CliError::input(path, format!("line {}: expected `prophecy<TAB>reference`", i + 1))
                })?;
                cands.push(split_tokens(c));
                refs.push(split_tokens(r));
            }
            (cands, refs)
        }
        (None, Some(corpus_path), Some(prophecy)) => {
            let (corpus, _) = read_corpus(corpus_path, args.task)?;
            let (spec, _) = parse_prophecy(prophecy, args.max_continuation, args.timeout)?;
            let mut generator =
                spec.instantiate().map_err(|e| CliError::Usage(format!("cannot start prophecy source: {e}")))?;
            let mut cands = Vec::new();
            let mut refs = Vec::new();
            for sentence in corpus.sentences() {
                for t in 1..sentence.len() {
                    let prophecy = generator
                        .continue_prefix(sentence.prefix(t))
                        .map_err(|e| CliError::Usage(format!("{} step {t}: {e}", sentence.id())))?;
                    cands.push(prophecy);
                    refs.push(sentence.tokens()[t..].to_vec());
                }
            }
            (cands, refs)
        }
        _ => return Err(CliError::Usage("give either --pairs or --corpus with --prophecy".into())),
    };

    if let Some(path) = &args.write_pairs {
        let mut out = BufWriter::new(File::create(path).map_err(|e| CliError::input(path, e))?);
        for (c, r) in candidates.iter().zip(&references) {
            writeln!(out, "{}\t{}", c.join(" "), r.join(" ")).map_err(|e| CliError::input(path, e))?;
        }
        out.flush().map_err(|e| CliError::input(path, e))?;
    }

    let bleu = corpus_bleu(&candidates, &references).map_err(|e| CliError::Usage(e.to_string()))?;
    println!("{}", serde_json::json!({ "pairs": candidates.len(), "bleu": bleu }));
    Ok(())
}

pub fn train_ngram(args: &TrainNgramArgs) -> Result<(), CliError> {
    let (corpus, _) = read_corpus(&args.corpus, args.task)?;
    let sentences: Vec<&[String]> = corpus.sentences().map(|s| s.tokens()).collect();
    let model = NGramModel::train(&sentences, args.order).map_err(|e| CliError::Usage(e.to_string()))?;
    write_file(&args.out, &model.to_bytes())
}

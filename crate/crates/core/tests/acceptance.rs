//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit status
//! if any fails.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use diachron::corpus::{read_traces, truncate_corpus, write_traces, Corpus, CorpusEntry};
use diachron::editops::{apply_delay, edit_counts};
use diachron::metrics::{
    correction_time_exact, correction_time_score, edit_overhead, edit_overhead_exact, eo_over_time, extract_spans,
    gold_scores, partial_edit_overhead, relative_correctness, relative_correctness_exact, StreamingMetrics,
};
use diachron::simulator::{ContinuationSpec, NGramModel, Processor, ProcessorSpec, Simulator};
use diachron::{validate_trace, Delay, IncrementalTrace, LabelScheme, StepOutput, TaskKind, TokenSequence};
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    };
}

fn handmade(task: TaskKind, steps: &[&[&str]]) -> IncrementalTrace {
    let tokens = TokenSequence::new("t", (1..=steps.len()).map(|i| format!("w{i}")).collect()).unwrap();
    IncrementalTrace::new(task, tokens, steps.iter().map(|s| StepOutput(strings(s))).collect(), None).unwrap()
}

fn e1() -> IncrementalTrace {
    handmade(TaskKind::Tagging, &[&["A"], &["A", "B"], &["C", "B", "D"]])
}

fn e2() -> IncrementalTrace {
    handmade(TaskKind::Classification, &[&["X"], &["X"], &["Y"], &["Y"]])
}

fn simulate(
    processor: &ProcessorSpec,
    prophecy: &ContinuationSpec,
    tokens: &TokenSequence,
    task: TaskKind,
) -> IncrementalTrace {
    Simulator::new(processor, prophecy).unwrap().run(tokens, task).unwrap()
}

fn causal_processor_law() -> Outcome {
    let mut rng = rng(1);
    let spec = ProcessorSpec::Lookup(lookup_tagger());
    for i in 0..200 {
        let tokens = sentence(&mut rng, format!("s{i}"), 25);
        let trace = simulate(&spec, &ContinuationSpec::None, &tokens, TaskKind::Tagging);
        let eo = edit_overhead_exact(&trace, Delay(0)).unwrap();
        let ct = correction_time_exact(&trace).unwrap();
        let rc = relative_correctness_exact(&trace, Delay(0)).unwrap();
        ensure!(eo == 0.into() && ct == 0.into() && rc == 1.into(), "{:?}: eo {eo}, ct {ct}, rc {rc}", tokens.tokens());
    }
    Ok("200 sentences: EO 0, CT 0, RC 1".into())
}

fn window_law() -> Outcome {
    let mut rng = rng(2);
    let sentences: Vec<_> = (0..200).map(|i| sentence(&mut rng, format!("s{i}"), 25)).collect();
    for b in 1..=2 {
        let spec = ProcessorSpec::Window(window_tagger(b));
        let traces: Vec<_> =
            sentences.iter().map(|s| simulate(&spec, &ContinuationSpec::None, s, TaskKind::Tagging)).collect();
        for d in b..=b + 2 {
            if let Some(t) = traces.iter().find(|t| edit_overhead(t, Delay(d)).unwrap() != 0.0) {
                return Err(format!("b={b}, d={d}: EO > 0 for {:?}", t.tokens.tokens()));
            }
        }
        for d in 0..b {
            ensure!(
                traces.iter().any(|t| edit_overhead(t, Delay(d)).unwrap() > 0.0),
                "b={b}, d={d}: no sentence with EO > 0"
            );
        }
    }
    Ok("b=1,2: EO 0 for d >= b, positive for some sentence at d < b".into())
}

fn delay_monotonicity() -> Outcome {
    let mut rng = rng(3);
    let (mut strict_eo, mut strict_rc) = (0, 0);
    for _ in 0..1000 {
        let task = any_task(&mut rng);
        let trace = trace(&mut rng, task, 12);
        for d in 0..2 {
            let (eo0, eo1) =
                (edit_overhead_exact(&trace, Delay(d)).unwrap(), edit_overhead_exact(&trace, Delay(d + 1)).unwrap());
            let (rc0, rc1) = (
                relative_correctness_exact(&trace, Delay(d)).unwrap(),
                relative_correctness_exact(&trace, Delay(d + 1)).unwrap(),
            );
            ensure!(eo1 <= eo0, "EO rose from {eo0} to {eo1} at d={d} for {:?}", trace.steps);
            ensure!(rc1 >= rc0, "RC fell from {rc0} to {rc1} at d={d} for {:?}", trace.steps);
            strict_eo += usize::from(eo1 < eo0);
            strict_rc += usize::from(rc1 > rc0);
        }
    }
    ensure!(strict_eo > 0 && strict_rc > 0, "no strict change seen (eo {strict_eo}, rc {strict_rc})");
    Ok(format!("1000 traces; strict EO drops {strict_eo}, strict RC rises {strict_rc}"))
}

fn worked_examples() -> Outcome {
    let close = |got: f64, want: f64| (got - want).abs() <= 1e-12;
    let (e1, e2) = (e1(), e2());
    let checks = [
        ("E1 EO(0)", edit_overhead(&e1, Delay(0)).unwrap(), 0.25),
        ("E1 EO(1)", edit_overhead(&e1, Delay(1)).unwrap(), 0.25),
        ("E1 EO(2)", edit_overhead(&e1, Delay(2)).unwrap(), 0.0),
        ("E1 CT", correction_time_score(&e1).unwrap(), 2.0 / 3.0),
        ("E1 RC(0)", relative_correctness(&e1, Delay(0)).unwrap(), 1.0 / 3.0),
        ("E1 RC(1)", relative_correctness(&e1, Delay(1)).unwrap(), 2.0 / 3.0),
        ("E1 RC(2)", relative_correctness(&e1, Delay(2)).unwrap(), 1.0),
        ("E2 EO(0)", edit_overhead(&e2, Delay(0)).unwrap(), 0.5),
        ("E2 CT", correction_time_score(&e2).unwrap(), 2.0 / 3.0),
        ("E2 RC(0)", relative_correctness(&e2, Delay(0)).unwrap(), 0.5),
    ];
    for (name, got, want) in checks {
        ensure!(close(got, want), "{name}: {got} vs {want}");
    }
    // The hand values agree with the naive oracle as well.
    for d in 0..=2 {
        ensure!(
            naive_eo_rc(&e1, d)
                == (edit_overhead_exact(&e1, Delay(d)).unwrap(), relative_correctness_exact(&e1, Delay(d)).unwrap()),
            "E1 oracle mismatch at d={d}"
        );
    }
    ensure!(naive_ct(&e2) == correction_time_exact(&e2).unwrap(), "E2 CT oracle mismatch");
    Ok(format!("{} values within 1e-12", checks.len()))
}

/// Rewrites every label at every step, the most revisions a trace can have.
fn thrashing(task: TaskKind, n: usize) -> IncrementalTrace {
    let tokens = TokenSequence::new("x", (0..n).map(|i| format!("w{i}")).collect()).unwrap();
    let steps = (1..=n).map(|t| StepOutput(vec![format!("L{t}"); task.labels_at_step(t)])).collect();
    IncrementalTrace::new(task, tokens, steps, None).unwrap()
}

fn bounds() -> Outcome {
    let mut rng = rng(5);
    let mut traces: Vec<_> = (0..1000)
        .map(|_| {
            let task = any_task(&mut rng);
            trace(&mut rng, task, 15)
        })
        .collect();
    for n in 1..=15 {
        traces.push(thrashing(TaskKind::Tagging, n));
        traces.push(thrashing(TaskKind::Classification, n));
    }
    let mut tight = 0;
    for trace in &traces {
        let n = trace.n();
        let (max_subs, max_eo) = match trace.task {
            TaskKind::Tagging => (n * (n - 1) / 2, Fraction::new(n as u64 - 1, n as u64 + 1)),
            TaskKind::Classification => (n - 1, Fraction::new(n as u64 - 1, n as u64)),
        };
        for d in 0..=3 {
            let subs = edit_counts(&apply_delay(trace, Delay(d)).unwrap()).unwrap().substitutions;
            let eo = edit_overhead_exact(trace, Delay(d)).unwrap();
            ensure!(subs <= max_subs, "{} substitutions > {max_subs} for n={n}", subs);
            ensure!(eo <= max_eo, "EO {eo} > {max_eo} for n={n}");
            tight += usize::from(n > 1 && d == 0 && subs == max_subs);
        }
    }
    ensure!(tight >= 28, "bound reached only {tight} times");
    Ok(format!("{} traces within bounds; bound attained {tight} times", traces.len()))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = rng(6);
    let delays: Vec<Delay> = (0..=3).map(Delay).collect();
    for _ in 0..500 {
        let task = any_task(&mut rng);
        let trace = trace(&mut rng, task, 20);
        let mut stream = StreamingMetrics::new(task, &delays);
        for step in &trace.steps {
            stream.push(step.labels()).unwrap();
        }
        let result = stream.finish().unwrap();
        ensure!(result.ct == correction_time_exact(&trace).unwrap(), "CT differs for {:?}", trace.steps);
        ensure!(result.ct == naive_ct(&trace), "CT differs from the naive oracle for {:?}", trace.steps);
        for &d in &delays {
            let brute = (edit_overhead_exact(&trace, d).unwrap(), relative_correctness_exact(&trace, d).unwrap());
            ensure!(result.at(d) == Some(brute), "d={d}: stream {:?} vs {brute:?} for {:?}", result.at(d), trace.steps);
            ensure!(naive_eo_rc(&trace, d.get()) == brute, "d={d}: naive oracle disagrees for {:?}", trace.steps);
        }
    }
    Ok("500 traces, delays 0..=3, exact rational equality".into())
}

fn span_f1() -> Outcome {
    let mut rng = rng(7);
    let mut preds = Vec::new();
    let mut golds = Vec::new();
    for _ in 0..500 {
        let n = rng.gen_range(1..=15);
        let (p, g) = (bio_labels(&mut rng, n), bio_labels(&mut rng, n));
        let got: Vec<_> = extract_spans(&p).into_iter().map(|s| (s.label, s.start, s.end)).collect();
        ensure!(got == oracle_spans(&p), "spans of {p:?}: {got:?} vs {:?}", oracle_spans(&p));
        preds.push(p);
        golds.push(g);
    }
    let f1 = |preds: &[Vec<String>], golds: &[Vec<String>]| {
        let p: Vec<&[String]> = preds.iter().map(Vec::as_slice).collect();
        let g: Vec<&[String]> = golds.iter().map(Vec::as_slice).collect();
        gold_scores(&p, &g, TaskKind::Tagging, LabelScheme::Bio).unwrap()
    };
    let scores = f1(&preds, &golds);
    let (tp, predicted, expected) = oracle_counts(&preds, &golds);
    let oracle = 2.0 * tp as f64 / (predicted + expected) as f64;
    ensure!((scores.value - oracle).abs() <= 1e-12, "micro F1 {} vs oracle {oracle}", scores.value);
    ensure!(scores.precision == Some(tp as f64 / predicted as f64), "precision differs");
    ensure!(scores.recall == Some(tp as f64 / expected as f64), "recall differs");

    let examples: [(&[&str], &[&str], f64); 3] = [
        (&["B-NP", "I-NP", "O"], &["B-NP", "I-NP", "O"], 1.0),
        (&["B-NP", "I-NP", "O"], &["B-NP", "I-NP", "B-VP"], 2.0 / 3.0),
        (&["B-NP", "O", "O"], &["B-NP", "I-NP", "O"], 0.0),
    ];
    for (pred, gold, want) in examples {
        let got = f1(&[strings(pred)], &[strings(gold)]).value;
        ensure!((got - want).abs() <= 1e-12, "{pred:?} vs {gold:?}: {got} != {want}");
    }
    Ok(format!("500 sequences match the brute-force extractor; micro F1 {:.4}; 3 examples", scores.value))
}

fn eo_curves() -> Outcome {
    let mut rng = rng(8);
    for i in 0..300 {
        let task = any_task(&mut rng);
        let mut trace = trace(&mut rng, task, 15);
        trace.gold =
            Some(if i % 2 == 0 { trace.final_output().to_vec() } else { vec!["Z".into(); trace.final_output().len()] });
        let curves = eo_over_time(std::slice::from_ref(&trace)).unwrap();
        let points: Vec<_> = curves.rows().map(|(_, p)| p).collect();
        ensure!(points.len() == trace.n(), "{} curve points for n={}", points.len(), trace.n());
        let last = points.last().unwrap().mean_eo;
        let eo = edit_overhead(&trace, Delay(0)).unwrap();
        ensure!((last - eo).abs() <= 1e-12, "final curve value {last} vs EO {eo}");
    }
    let e1 = e1();
    let curve: Vec<f64> = partial_edit_overhead(&e1).unwrap().into_iter().map(diachron::metrics::to_f64).collect();
    ensure!(curve == [0.0, 0.0, 0.25], "E1 curve {curve:?}");
    Ok("300 single-sequence corpora; E1 curve [0, 0, 0.25]".into())
}

fn round_trips() -> Outcome {
    let mut rng = rng(9);
    let traces: Vec<_> = (0..300)
        .map(|i| {
            let task = any_task(&mut rng);
            let mut t = trace(&mut rng, task, 12);
            if i % 3 == 0 {
                t.gold = Some(t.final_output().to_vec());
            }
            t
        })
        .collect();
    let mut buf = Vec::new();
    write_traces(&mut buf, &traces).unwrap();
    ensure!(read_traces(buf.as_slice()).unwrap() == traces, "trace JSONL round trip differs");

    for corpus in [tagging_corpus(&mut rng, 200, 20), classification_corpus(&mut rng, 200, 20)] {
        let back = Corpus::read(&corpus.write(), corpus.task).unwrap();
        ensure!(back == corpus, "{} corpus round trip differs", corpus.task);
        let cut = truncate_corpus(&corpus, 17);
        ensure!(cut == truncate_corpus(&corpus, 17), "truncation with a fixed seed is not reproducible");
        ensure!(cut != truncate_corpus(&corpus, 18), "seed has no effect");
    }

    const N: usize = 8;
    const DRAWS: usize = 10_000;
    let tokens = TokenSequence::new("u", (0..N).map(|i| format!("w{i}")).collect()).unwrap();
    let corpus = Corpus {
        task: TaskKind::Tagging,
        scheme: LabelScheme::Plain,
        entries: vec![CorpusEntry { tokens, gold: None }; DRAWS],
    };
    let mut observed = [0usize; N];
    for entry in truncate_corpus(&corpus, 2024).entries {
        observed[entry.tokens.len() - 1] += 1;
    }
    let expected = DRAWS as f64 / N as f64;
    let statistic: f64 = observed.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
    let p = ChiSquared::new((N - 1) as f64).unwrap().sf(statistic);
    ensure!(p > 0.01, "chi-square {statistic:.3}, p {p:.4}, counts {observed:?}");
    Ok(format!("JSONL and CoNLL identity; truncation reproducible; chi-square {statistic:.2}, p {p:.3}"))
}

fn prophecy_contract() -> Outcome {
    let mut rng = rng(10);
    let training = tagging_corpus(&mut rng, 300, 15);
    let sentences: Vec<&[String]> = training.sentences().map(TokenSequence::tokens).collect();
    let model = std::sync::Arc::new(NGramModel::train(&sentences, 3).unwrap());
    let processors = [
        ProcessorSpec::Lookup(lookup_tagger()),
        ProcessorSpec::Window(window_tagger(1)),
        ProcessorSpec::Window(window_tagger(2)),
    ];
    let prophecies = [
        ContinuationSpec::None,
        ContinuationSpec::RepeatLast,
        ContinuationSpec::NGram { model: model.clone(), max_len: 50 },
        ContinuationSpec::NGram { model, max_len: 1 },
    ];
    let mut checked = 0;
    for processor in &processors {
        for prophecy in &prophecies {
            let mut sim = Simulator::new(processor, prophecy).unwrap();
            let mut bare = processor.instantiate().unwrap();
            for task in [TaskKind::Tagging, TaskKind::Classification] {
                for i in 0..40 {
                    let tokens = sentence(&mut rng, format!("s{i}"), 20);
                    let trace = sim.run(&tokens, task).unwrap();
                    ensure!(validate_trace(&trace).is_ok(), "invalid trace from {}", prophecy.describe());
                    let full = bare.label(tokens.tokens(), task).unwrap();
                    ensure!(
                        trace.final_output() == full.as_slice(),
                        "{} / {}: final step {:?} vs bare {full:?}",
                        processor.describe(),
                        prophecy.describe(),
                        trace.final_output()
                    );
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} traces over 3 processors and 4 prophecy sources"))
}

struct Criterion {
    id: u8,
    name: &'static str,
    budget: Option<Duration>,
    check: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: 1,
            name: "causal processor law",
            budget: Some(Duration::from_secs(5)),
            check: causal_processor_law,
        },
        Criterion { id: 2, name: "window law", budget: Some(Duration::from_secs(5)), check: window_law },
        Criterion {
            id: 3,
            name: "delay monotonicity",
            budget: Some(Duration::from_secs(10)),
            check: delay_monotonicity,
        },
        Criterion { id: 4, name: "worked examples", budget: None, check: worked_examples },
        Criterion { id: 5, name: "edit bounds", budget: None, check: bounds },
        Criterion { id: 6, name: "streaming equals brute force", budget: None, check: oracle_equivalence },
        Criterion { id: 7, name: "span F1 against brute-force spans", budget: None, check: span_f1 },
        Criterion { id: 8, name: "EO over time", budget: None, check: eo_curves },
        Criterion { id: 9, name: "round trips and truncation", budget: None, check: round_trips },
        Criterion { id: 10, name: "prophecy final-step contract", budget: None, check: prophecy_contract },
    ];

    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(c.check))
            .unwrap_or_else(|e| {
                let msg =
                    e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
                Err(format!("panicked: {}", msg.unwrap_or_default()))
            })
            .and_then(|detail| match c.budget {
                Some(budget) if start.elapsed() > budget => {
                    Err(format!("took {:.2?}, budget {budget:?} ({detail})", start.elapsed()))
                }
                _ => Ok(detail),
            });
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {} [{elapsed:.2?}]: {detail}", c.id, c.name),
            Err(reason) => {
                failed += 1;
                println!("FAIL {:>2} {} [{elapsed:.2?}]: {reason}", c.id, c.name);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

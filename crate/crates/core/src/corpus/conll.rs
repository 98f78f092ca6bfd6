use super::{sentence_id, Corpus, CorpusEntry};
use crate::error::{CorpusError, TraceError};
use crate::trace::{GoldAnnotation, LabelScheme, TaskKind, TokenSequence};

fn build_tagging_corpus(sentences: Vec<(Vec<String>, Vec<String>)>) -> Result<Corpus, CorpusError> {
    if sentences.is_empty() {
        return Err(CorpusError::Empty);
    }
    let scheme = LabelScheme::detect(sentences.iter().flat_map(|(_, l)| l.iter().map(String::as_str)));
    let entries = sentences
        .into_iter()
        .enumerate()
        .map(|(i, (tokens, labels))| {
            let n = tokens.len();
            Ok(CorpusEntry {
                tokens: TokenSequence::new(sentence_id(i), tokens)?,
                gold: Some(GoldAnnotation::new(labels, scheme, TaskKind::Tagging, n)?),
            })
        })
        .collect::<Result<Vec<_>, TraceError>>()
        .map_err(|e| CorpusError::Parse { line: 0, reason: e.to_string() })?;
    Ok(Corpus { task: TaskKind::Tagging, scheme, entries })
}

/// One `token ... label` line per token, columns split on tabs or runs of
/// spaces, blank lines between sentences. `-DOCSTART-` lines are skipped.
pub fn read_conll(text: &str) -> Result<Corpus, CorpusError> {
    let mut sentences = Vec::new();
    let mut tokens = Vec::new();
    let mut labels = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let columns: Vec<&str> = line.split_whitespace().collect();
        match columns.as_slice() {
            [] => {
                if !tokens.is_empty() {
                    sentences.push((std::mem::take(&mut tokens), std::mem::take(&mut labels)));
                }
            }
            [first, ..] if *first == "-DOCSTART-" => {}
            [_] => {
                return Err(CorpusError::Parse {
                    line: i + 1,
                    reason: "expected at least two columns (token and label)".into(),
                })
            }
            [token, .., label] => {
                tokens.push(token.to_string());
                labels.push(label.to_string());
            }
        }
    }
    if !tokens.is_empty() {
        sentences.push((tokens, labels));
    }
    build_tagging_corpus(sentences)
}

/// Writes `token<TAB>label` lines with a blank line after each sentence.
/// Unannotated sentences get `O` labels.
pub fn write_conll(corpus: &Corpus) -> String {
    let mut out = String::new();
    for entry in &corpus.entries {
        for (i, token) in entry.tokens.tokens().iter().enumerate() {
            let label = entry.gold.as_ref().map_or("O", |g| g.labels()[i].as_str());
            out.push_str(token);
            out.push('\t');
            out.push_str(label);
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

/// `label<TAB>token token ...`, one sentence per line.
pub fn read_classification(text: &str) -> Result<Corpus, CorpusError> {
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parse = |reason: &str| CorpusError::Parse { line: i + 1, reason: reason.into() };
        let (label, sentence) = line.split_once('\t').ok_or_else(|| parse("expected `label<TAB>tokens`"))?;
        let label = label.trim();
        if label.is_empty() {
            return Err(parse("empty label"));
        }
        let tokens: Vec<String> = sentence.split_whitespace().map(String::from).collect();
        let n = tokens.len();
        let tokens = TokenSequence::new(sentence_id(entries.len()), tokens).map_err(|_| parse("no tokens"))?;
        let gold = GoldAnnotation::new(vec![label.to_string()], LabelScheme::Plain, TaskKind::Classification, n)
            .map_err(|e| parse(&e.to_string()))?;
        entries.push(CorpusEntry { tokens, gold: Some(gold) });
    }
    if entries.is_empty() {
        return Err(CorpusError::Empty);
    }
    Ok(Corpus { task: TaskKind::Classification, scheme: LabelScheme::Plain, entries })
}

pub fn write_classification(corpus: &Corpus) -> String {
    let mut out = String::new();
    for entry in &corpus.entries {
        let label = entry.gold.as_ref().map_or("", |g| g.labels()[0].as_str());
        out.push_str(label);
        out.push('\t');
        out.push_str(&entry.tokens.tokens().join(" "));
        out.push('\n');
    }
    out
}

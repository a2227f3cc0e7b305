use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Corpus, ParseRecord, SentenceEntry};
use crate::error::{Error, Result};

pub const CORPUS_FORMAT: &str = "forest-corpus";
pub const CORPUS_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
}

/// On-disk record; `weight` may be omitted and defaults to `1/|corpus|`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    sentence_id: String,
    tokens: Vec<String>,
    #[serde(default)]
    weight: Option<f64>,
    #[serde(default)]
    gold_index: Option<usize>,
    parses: Vec<ParseRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadOptions {
    /// Drop sentences with more parses than this.
    pub max_parses: Option<usize>,
    pub normalize_weights: bool,
    /// Merge entries with identical tokens and parse sets.
    pub aggregate_duplicates: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            max_parses: None,
            normalize_weights: true,
            aggregate_duplicates: false,
        }
    }
}

pub fn load_corpus(path: impl AsRef<Path>, options: LoadOptions) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus(BufReader::new(file), options).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn read_corpus(reader: impl BufRead, options: LoadOptions) -> Result<Corpus> {
    let mut lines = reader.lines().enumerate();
    let header = loop {
        match lines.next() {
            None => return Err(Error::malformed(1, "header", "missing format header")),
            Some((i, line)) => {
                let line = line.map_err(|e| Error::io("<corpus>", e))?;
                if line.trim().is_empty() {
                    continue;
                }
                break serde_json::from_str::<Header>(&line)
                    .map_err(|e| Error::malformed(i + 1, "header", e))?;
            }
        }
    };
    if header.format != CORPUS_FORMAT || header.version != CORPUS_VERSION {
        return Err(Error::malformed(
            1,
            "header",
            format!(
                "unsupported format {:?} version {}",
                header.format, header.version
            ),
        ));
    }

    let mut raw = Vec::new();
    let mut ids = HashSet::new();
    for (i, line) in lines {
        let line = line.map_err(|e| Error::io("<corpus>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 1;
        let r: RawEntry =
            serde_json::from_str(&line).map_err(|e| Error::malformed(lineno, "record", e))?;
        if !ids.insert(r.sentence_id.clone()) {
            return Err(Error::DuplicateSentence(r.sentence_id));
        }
        let entry = SentenceEntry {
            sentence_id: r.sentence_id,
            tokens: r.tokens,
            weight: r.weight.unwrap_or(f64::NAN),
            gold_index: r.gold_index,
            parses: r.parses,
        };
        // validate with a placeholder weight when absent
        let mut probe = entry.clone();
        if probe.weight.is_nan() {
            probe.weight = 1.0;
        }
        probe
            .validate()
            .map_err(|(field, msg)| Error::malformed(lineno, field, msg))?;
        raw.push(entry);
    }
    if raw.is_empty() {
        return Err(Error::EmptyCorpus(""));
    }
    let default_weight = 1.0 / raw.len() as f64;
    for e in &mut raw {
        if e.weight.is_nan() {
            e.weight = default_weight;
        }
    }

    let mut corpus = Corpus::new(raw)?;
    if let Some(max) = options.max_parses {
        corpus = corpus.filter_ambiguity(max)?;
    }
    if options.aggregate_duplicates {
        corpus = corpus.aggregate_duplicates()?;
    }
    if options.normalize_weights {
        corpus = corpus.normalize_weights();
    }
    Ok(corpus)
}

pub fn write_corpus(corpus: &Corpus, mut w: impl Write) -> Result<()> {
    let io = |e| Error::io("<corpus>", e);
    let header = Header {
        format: CORPUS_FORMAT.into(),
        version: CORPUS_VERSION,
    };
    let ser = |e: serde_json::Error| Error::Consistency(e.to_string());
    writeln!(w, "{}", serde_json::to_string(&header).map_err(ser)?).map_err(io)?;
    for e in corpus.entries() {
        writeln!(w, "{}", serde_json::to_string(e).map_err(ser)?).map_err(io)?;
    }
    w.flush().map_err(io)
}

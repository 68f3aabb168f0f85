//! Record data model and the line-delimited JSON dataset format.
//!
//! Every non-empty line of a dataset file is one object:
//!
//! ```text
//! {"id":"r1","gold":"way","hypotheses":[{"word":"way","p":0.4}],"contexts":[{"label":"street","p":0.6}]}
//! ```
//!
//! Unknown keys are ignored. Words, gold transcriptions and context labels
//! are normalized on ingest, so every downstream comparison works on
//! normalized tokens.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rerank::ScoredHypothesis;

/// Largest hypothesis-list length in the evaluated range; longer lists are
/// accepted with a warning.
pub const MAX_SUPPORTED_K: usize = 9;

/// Lowercases and trims a raw token. Internal characters, digits and
/// punctuation included, are kept as they are.
///
/// Returns `None` when nothing is left, which marks the token unusable.
pub fn normalize_token(raw: &str) -> Option<String> {
    let token = raw.trim().to_lowercase();
    // Lowercasing can expose new surrounding whitespace for a few exotic
    // code points, so trim once more to stay idempotent.
    let token = token.trim();
    if token.is_empty() {
        None
    } else {
        Some(token.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub word: String,
    pub score: f64,
}

/// One image's k-best list, kept sorted non-increasing by baseline score.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HypothesisSet {
    hypotheses: Vec<Hypothesis>,
}

impl HypothesisSet {
    /// Sorts by descending score. The sort is stable, so ties keep their
    /// input order.
    pub fn new(mut hypotheses: Vec<Hypothesis>) -> Self {
        hypotheses.sort_by(|a, b| b.score.total_cmp(&a.score));
        HypothesisSet { hypotheses }
    }

    pub fn k(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn as_slice(&self) -> &[Hypothesis] {
        &self.hypotheses
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Hypothesis> {
        self.hypotheses.iter()
    }

    /// The first `k` hypotheses, or all of them when the list is shorter.
    pub fn top(&self, k: usize) -> &[Hypothesis] {
        &self.hypotheses[..k.min(self.hypotheses.len())]
    }

    /// Baseline rank (0-based) of `word`, if present.
    pub fn position(&self, word: &str) -> Option<usize> {
        self.hypotheses.iter().position(|h| h.word == word)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VisualContext {
    pub label: String,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    pub id: String,
    pub gold: String,
    pub hypotheses: HypothesisSet,
    pub contexts: Vec<VisualContext>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawHypothesis {
    word: String,
    p: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawContext {
    label: String,
    p: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawRecord {
    id: String,
    gold: String,
    hypotheses: Vec<RawHypothesis>,
    #[serde(default)]
    contexts: Vec<RawContext>,
}

fn check_probability(line: usize, what: &str, p: f64) -> Result<()> {
    if p.is_finite() && (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::validation(
            line,
            format!("{what} probability {p} outside [0, 1]"),
        ))
    }
}

fn normalized(line: usize, what: &str, raw: &str) -> Result<String> {
    normalize_token(raw)
        .ok_or_else(|| Error::validation(line, format!("{what} {raw:?} is empty after normalization")))
}

impl RawRecord {
    fn into_record(self, line: usize) -> Result<EvalRecord> {
        let gold = normalized(line, "gold", &self.gold)?;
        if self.hypotheses.is_empty() {
            return Err(Error::validation(line, "record has no hypotheses"));
        }
        let mut hypotheses = Vec::with_capacity(self.hypotheses.len());
        for h in self.hypotheses {
            check_probability(line, "hypothesis", h.p)?;
            hypotheses.push(Hypothesis {
                word: normalized(line, "hypothesis word", &h.word)?,
                score: h.p,
            });
        }
        let mut contexts = Vec::with_capacity(self.contexts.len());
        for c in self.contexts {
            check_probability(line, "context", c.p)?;
            contexts.push(VisualContext {
                label: normalized(line, "context label", &c.label)?,
                confidence: c.p,
            });
        }
        Ok(EvalRecord {
            id: self.id,
            gold,
            hypotheses: HypothesisSet::new(hypotheses),
            contexts,
        })
    }

    fn from_record(record: &EvalRecord) -> Self {
        RawRecord {
            id: record.id.clone(),
            gold: record.gold.clone(),
            hypotheses: record
                .hypotheses
                .iter()
                .map(|h| RawHypothesis {
                    word: h.word.clone(),
                    p: h.score,
                })
                .collect(),
            contexts: record
                .contexts
                .iter()
                .map(|c| RawContext {
                    label: c.label.clone(),
                    p: c.confidence,
                })
                .collect(),
        }
    }
}

/// Streams records from a line-delimited dataset, one per non-empty line.
///
/// Id uniqueness is a whole-file property and is only checked by
/// [`parse_records`].
pub struct RecordReader<R> {
    reader: R,
    line: usize,
    buf: String,
    warned_large_k: bool,
}

impl<R: BufRead> RecordReader<R> {
    pub fn new(reader: R) -> Self {
        RecordReader {
            reader,
            line: 0,
            buf: String::new(),
            warned_large_k: false,
        }
    }
}

impl<R: BufRead> Iterator for RecordReader<R> {
    type Item = Result<EvalRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.reader.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(e.into())),
            }
            self.line += 1;
            let text = self.buf.trim();
            if text.is_empty() {
                continue;
            }
            let line = self.line;
            let record = serde_json::from_str::<RawRecord>(text)
                .map_err(|e| Error::parse(line, e.to_string()))
                .and_then(|raw| raw.into_record(line));
            if let Ok(r) = &record {
                if r.hypotheses.k() > MAX_SUPPORTED_K && !self.warned_large_k {
                    log::warn!(
                        "line {line}: record {:?} has k={} hypotheses, above the evaluated range 1..={MAX_SUPPORTED_K}",
                        r.id,
                        r.hypotheses.k()
                    );
                    self.warned_large_k = true;
                }
            }
            return Some(record);
        }
    }
}

/// Parses a whole dataset, rejecting duplicate ids.
pub fn parse_records<R: BufRead>(reader: R) -> Result<Vec<EvalRecord>> {
    let mut reader = RecordReader::new(reader);
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    while let Some(record) = reader.next() {
        let record = record?;
        if !seen.insert(record.id.clone()) {
            return Err(Error::validation(
                reader.line,
                format!("duplicate record id {:?}", record.id),
            ));
        }
        records.push(record);
    }
    Ok(records)
}

pub fn write_record<W: Write>(mut out: W, record: &EvalRecord) -> Result<()> {
    serde_json::to_writer(&mut out, &RawRecord::from_record(record)).map_err(std::io::Error::from)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn write_records<W: Write>(mut out: W, records: &[EvalRecord]) -> Result<()> {
    for record in records {
        write_record(&mut out, record)?;
    }
    Ok(())
}

/// One line of a re-ranker output file: the input record plus the
/// re-ranked list with its per-re-ranker score breakdown.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRecord {
    pub record: EvalRecord,
    pub cascade: String,
    pub reranked: Vec<ScoredHypothesis>,
}

#[derive(Serialize)]
struct RawPredictionOut<'a> {
    #[serde(flatten)]
    record: RawRecord,
    cascade: &'a str,
    reranked: &'a [ScoredHypothesis],
}

#[derive(Deserialize)]
struct RawPredictionIn {
    #[serde(flatten)]
    record: RawRecord,
    cascade: String,
    reranked: Vec<ScoredHypothesis>,
}

pub fn write_prediction<W: Write>(
    mut out: W,
    record: &EvalRecord,
    cascade: &str,
    reranked: &[ScoredHypothesis],
) -> Result<()> {
    let raw = RawPredictionOut {
        record: RawRecord::from_record(record),
        cascade,
        reranked,
    };
    serde_json::to_writer(&mut out, &raw).map_err(std::io::Error::from)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn parse_predictions<R: BufRead>(reader: R) -> Result<Vec<PredictionRecord>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let raw: RawPredictionIn =
            serde_json::from_str(text).map_err(|e| Error::parse(line_no, e.to_string()))?;
        out.push(PredictionRecord {
            record: raw.record.into_record(line_no)?,
            cascade: raw.cascade,
            reranked: raw.reranked,
        });
    }
    Ok(out)
}

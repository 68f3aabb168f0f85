//! Word-given-context probabilities estimated from image-level
//! co-occurrence in annotated training records.

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};

use crate::dataset::EvalRecord;
use crate::error::{Error, Result};

const MAGIC: &str = "TDP1";
const CONTEXTS_SECTION: &str = "#contexts";

pub const DEFAULT_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct TdpTable {
    /// context -> word -> number of records pairing them
    pair_counts: HashMap<String, HashMap<String, u64>>,
    context_counts: HashMap<String, u64>,
    floor: f64,
}

impl Default for TdpTable {
    fn default() -> Self {
        TdpTable {
            pair_counts: HashMap::new(),
            context_counts: HashMap::new(),
            floor: DEFAULT_FLOOR,
        }
    }
}

impl TdpTable {
    /// Counts, for every context label, the records that contain it and the
    /// records whose gold word co-occurs with it. A label repeated within one
    /// record counts once.
    pub fn fit<'a>(training: impl IntoIterator<Item = &'a EvalRecord>) -> Self {
        let mut table = TdpTable::default();
        for record in training {
            let labels: BTreeSet<&str> = record.contexts.iter().map(|c| c.label.as_str()).collect();
            for label in labels {
                *table.context_counts.entry(label.to_string()).or_insert(0) += 1;
                *table
                    .pair_counts
                    .entry(label.to_string())
                    .or_default()
                    .entry(record.gold.clone())
                    .or_insert(0) += 1;
            }
        }
        table
    }

    pub fn with_floor(mut self, floor: f64) -> Result<Self> {
        if !(floor.is_finite() && floor > 0.0 && floor <= 1.0) {
            return Err(Error::config(format!("TDP floor {floor} must lie in (0, 1]")));
        }
        self.floor = floor;
        Ok(self)
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn pair_count(&self, w: &str, c: &str) -> u64 {
        self.pair_counts
            .get(c)
            .and_then(|words| words.get(w))
            .copied()
            .unwrap_or(0)
    }

    pub fn context_count(&self, c: &str) -> u64 {
        self.context_counts.get(c).copied().unwrap_or(0)
    }

    pub fn num_pairs(&self) -> usize {
        self.pair_counts.values().map(HashMap::len).sum()
    }

    pub fn num_contexts(&self) -> usize {
        self.context_counts.len()
    }

    /// `count(w, c) / count(c)` for a seen pair, the floor otherwise.
    pub fn prob(&self, w: &str, c: &str) -> f64 {
        let pair = self.pair_count(w, c);
        if pair == 0 {
            return self.floor;
        }
        pair as f64 / self.context_count(c) as f64
    }

    /// Writes the `TDP1` text format, sorted for reproducible output.
    pub fn save<W: Write>(&self, mut out: W) -> Result<()> {
        let check = |t: &str| {
            if t.contains(['\t', '\n', '\r']) || t.starts_with('#') {
                Err(Error::format(format!("token {t:?} cannot be stored")))
            } else {
                Ok(())
            }
        };
        writeln!(out, "{MAGIC} {}", self.floor)?;
        let mut pairs: Vec<(&str, &str, u64)> = self
            .pair_counts
            .iter()
            .flat_map(|(c, words)| words.iter().map(move |(w, n)| (w.as_str(), c.as_str(), *n)))
            .collect();
        pairs.sort_unstable();
        for (w, c, n) in pairs {
            check(w)?;
            check(c)?;
            writeln!(out, "{w}\t{c}\t{n}")?;
        }
        writeln!(out, "{CONTEXTS_SECTION}")?;
        let mut contexts: Vec<_> = self.context_counts.iter().collect();
        contexts.sort_unstable();
        for (c, n) in contexts {
            writeln!(out, "{c}\t{n}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn load<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines.next().ok_or_else(|| Error::format("empty TDP file"))??;
        let floor = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
            [MAGIC, floor] => floor
                .parse::<f64>()
                .map_err(|_| Error::format(format!("bad floor in header {header:?}")))?,
            _ => return Err(Error::format(format!("expected `{MAGIC} <floor>`, found {header:?}"))),
        };
        let mut table = TdpTable::default().with_floor(floor)?;
        let mut in_contexts = false;
        for (idx, line) in lines.enumerate() {
            let line_no = idx + 2;
            let line = line?;
            if line.is_empty() {
                continue;
            }
            if line == CONTEXTS_SECTION {
                in_contexts = true;
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let count = |s: &str| {
                s.parse::<u64>()
                    .map_err(|_| Error::parse(line_no, format!("bad count {s:?}")))
            };
            match (in_contexts, fields.as_slice()) {
                (false, [w, c, n]) => {
                    table
                        .pair_counts
                        .entry(c.to_string())
                        .or_default()
                        .insert(w.to_string(), count(n)?);
                }
                (true, [c, n]) => {
                    table.context_counts.insert(c.to_string(), count(n)?);
                }
                _ => return Err(Error::parse(line_no, "wrong number of fields")),
            }
        }
        if !in_contexts {
            return Err(Error::format("missing #contexts section"));
        }
        for (c, words) in &table.pair_counts {
            let total = table.context_count(c);
            if let Some((w, &n)) = words.iter().find(|(_, &n)| n > total) {
                return Err(Error::format(format!(
                    "pair ({w}, {c}) count {n} exceeds context count {total}"
                )));
            }
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Hypothesis, HypothesisSet, VisualContext};

    fn rec(id: usize, gold: &str, contexts: &[&str]) -> EvalRecord {
        EvalRecord {
            id: id.to_string(),
            gold: gold.to_string(),
            hypotheses: HypothesisSet::new(vec![Hypothesis {
                word: gold.to_string(),
                score: 1.0,
            }]),
            contexts: contexts
                .iter()
                .map(|l| VisualContext {
                    label: l.to_string(),
                    confidence: 0.9,
                })
                .collect(),
        }
    }

    fn toy() -> TdpTable {
        let recs = [
            rec(0, "way", &["street"]),
            rec(1, "way", &["street"]),
            rec(2, "stop", &["street"]),
            rec(3, "way", &["sign"]),
        ];
        TdpTable::fit(&recs)
    }

    #[test]
    fn toy_conditionals() {
        let t = toy();
        assert!((t.prob("way", "street") - 2.0 / 3.0).abs() < 1e-9);
        assert_eq!(t.prob("stop", "street"), 1.0 / 3.0);
        assert_eq!(t.prob("way", "sign"), 1.0);
        assert_eq!(t.prob("way", "racket"), t.floor());
        assert_eq!(t.prob("never", "street"), DEFAULT_FLOOR);
    }

    #[test]
    fn single_record() {
        let t = TdpTable::fit(&[rec(0, "kt", &["racket"])]);
        assert_eq!(t.prob("kt", "racket"), 1.0);
    }

    #[test]
    fn repeated_label_counts_once() {
        let t = TdpTable::fit(&[rec(0, "kt", &["racket", "racket"]), rec(1, "ball", &["racket"])]);
        assert_eq!(t.context_count("racket"), 2);
        assert_eq!(t.prob("kt", "racket"), 0.5);
    }

    #[test]
    fn empty_training_set() {
        let t = TdpTable::fit(&[]);
        assert_eq!(t.prob("a", "b"), DEFAULT_FLOOR);
    }

    #[test]
    fn save_load_round_trip() {
        let t = toy().with_floor(1e-4).unwrap();
        let mut buf = Vec::new();
        t.save(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text,
            "TDP1 0.0001\nstop\tstreet\t1\nway\tsign\t1\nway\tstreet\t2\n#contexts\nsign\t1\nstreet\t3\n"
        );
        assert_eq!(TdpTable::load(buf.as_slice()).unwrap(), t);
    }

    #[test]
    fn bad_files() {
        assert!(matches!(TdpTable::load("TDP2 0.1\n#contexts\n".as_bytes()), Err(Error::Format(_))));
        assert!(matches!(TdpTable::load("TDP1 0.1\na\tb\t1\n".as_bytes()), Err(Error::Format(_))));
        assert!(matches!(
            TdpTable::load("TDP1 0.1\na\tb\t3\n#contexts\nb\t1\n".as_bytes()),
            Err(Error::Format(_))
        ));
    }
}

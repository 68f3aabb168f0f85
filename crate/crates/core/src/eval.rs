//! Accuracy over all records (full), over records whose gold word is in a
//! lexicon (dictionary), and over records whose gold word is in the baseline
//! top-k list (list).
//!
//! A prediction is correct when the best re-ranked hypothesis among the
//! baseline top k equals the gold word after normalization. Short and
//! non-alphanumeric gold words are evaluated like any other; records whose
//! gold word cannot be produced at all count as wrong in the full view.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::dataset::{normalize_token, EvalRecord};
use crate::error::{Error, Result};
use crate::rerank::{Cascade, Models, RerankConfig, ScoredHypothesis, Scorer};

/// Token set for the dictionary view.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    words: HashSet<String>,
}

impl Lexicon {
    pub fn load<R: BufRead>(reader: R) -> Result<Self> {
        let mut words = HashSet::new();
        for line in reader.lines() {
            if let Some(w) = normalize_token(&line?) {
                words.insert(w);
            }
        }
        Ok(Lexicon { words })
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for Lexicon {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Lexicon {
            words: iter
                .into_iter()
                .filter_map(|w| normalize_token(&w.into()))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalCounts {
    pub full_correct: usize,
    pub full_total: usize,
    pub dict_correct: usize,
    pub dict_total: usize,
    pub list_correct: usize,
    pub list_total: usize,
}

impl EvalCounts {
    fn merge(mut self, other: EvalCounts) -> EvalCounts {
        self.full_correct += other.full_correct;
        self.full_total += other.full_total;
        self.dict_correct += other.dict_correct;
        self.dict_total += other.dict_total;
        self.list_correct += other.list_correct;
        self.list_total += other.list_total;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub cascade: String,
    pub k: usize,
    pub full_acc: f64,
    /// `None` when no lexicon was supplied.
    pub dict_acc: Option<f64>,
    pub list_acc: f64,
    pub counts: EvalCounts,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Best re-ranked hypothesis whose baseline rank is below `k`.
pub fn top_prediction(reranked: &[ScoredHypothesis], k: usize) -> Option<&ScoredHypothesis> {
    reranked.iter().find(|h| h.rank < k)
}

fn tally(record: &EvalRecord, reranked: &[ScoredHypothesis], k: usize, lexicon: Option<&Lexicon>) -> EvalCounts {
    let gold = normalize_token(&record.gold);
    let correct = match (gold.as_deref(), top_prediction(reranked, k)) {
        (Some(g), Some(h)) => normalize_token(&h.word).as_deref() == Some(g),
        _ => false,
    };
    let in_list = gold
        .as_deref()
        .is_some_and(|g| record.hypotheses.top(k).iter().any(|h| h.word == g));
    let in_dict = match (lexicon, gold.as_deref()) {
        (Some(lex), Some(g)) => lex.contains(g),
        _ => false,
    };
    EvalCounts {
        full_correct: correct as usize,
        full_total: 1,
        dict_correct: (in_dict && correct) as usize,
        dict_total: in_dict as usize,
        list_correct: (in_list && correct) as usize,
        list_total: in_list as usize,
    }
}

/// Scores one re-ranked output per record at cutoff `k`. `records` and
/// `reranked` are aligned by position.
pub fn evaluate(
    cascade: &str,
    records: &[EvalRecord],
    reranked: &[Vec<ScoredHypothesis>],
    k: usize,
    lexicon: Option<&Lexicon>,
) -> Result<EvalReport> {
    if records.len() != reranked.len() {
        return Err(Error::Mismatch(format!(
            "{} records but {} re-ranked outputs",
            records.len(),
            reranked.len()
        )));
    }
    if k == 0 {
        return Err(Error::config("k must be at least 1"));
    }
    let counts = records
        .par_iter()
        .zip(reranked.par_iter())
        .map(|(r, out)| tally(r, out, k, lexicon))
        .reduce(EvalCounts::default, EvalCounts::merge);
    Ok(EvalReport {
        cascade: cascade.to_string(),
        k,
        full_acc: ratio(counts.full_correct, counts.full_total),
        dict_acc: lexicon.map(|_| ratio(counts.dict_correct, counts.dict_total)),
        list_acc: ratio(counts.list_correct, counts.list_total),
        counts,
    })
}

/// Re-ranks and evaluates every record for each cascade and each `k`.
/// Reports come out grouped by cascade, in the order given.
pub fn sweep_k(
    records: &[EvalRecord],
    models: &Models,
    base: &RerankConfig,
    cascades: &[Cascade],
    ks: &[usize],
    lexicon: Option<&Lexicon>,
    jobs: usize,
) -> Result<Vec<EvalReport>> {
    let mut reports = Vec::with_capacity(cascades.len() * ks.len());
    for &cascade in cascades {
        let cfg = RerankConfig {
            rerankers: cascade.rerankers().to_vec(),
            ..base.clone()
        };
        let scorer = Scorer::new(models, &cfg)?;
        for &k in ks {
            let outputs = scorer.rerank_all(records, Some(k), jobs);
            reports.push(evaluate(cascade.name(), records, &outputs, k, lexicon)?);
        }
    }
    Ok(reports)
}

const TSV_HEADER: &str =
    "cascade\tk\tfull_acc\tfull_correct\tfull_total\tdict_acc\tdict_correct\tdict_total\tlist_acc\tlist_correct\tlist_total";

/// Machine-readable report: a header row, then one tab-separated row per
/// (cascade, k). Absent dictionary figures are written as `-`.
pub fn write_tsv<W: Write>(mut out: W, reports: &[EvalReport]) -> Result<()> {
    writeln!(out, "{TSV_HEADER}")?;
    for r in reports {
        let c = &r.counts;
        let (dict_acc, dict_correct, dict_total) = match r.dict_acc {
            Some(acc) => (format!("{acc:.6}"), c.dict_correct.to_string(), c.dict_total.to_string()),
            None => ("-".into(), "-".into(), "-".into()),
        };
        writeln!(
            out,
            "{}\t{}\t{:.6}\t{}\t{}\t{}\t{}\t{}\t{:.6}\t{}\t{}",
            r.cascade,
            r.k,
            r.full_acc,
            c.full_correct,
            c.full_total,
            dict_acc,
            dict_correct,
            dict_total,
            r.list_acc,
            c.list_correct,
            c.list_total
        )?;
    }
    Ok(())
}

/// Aligned text table with accuracies in percent.
pub fn render_table(reports: &[EvalReport]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<8} {:>3} {:>8} {:>8} {:>8} {:>7} {:>7}", "cascade", "k", "full%", "dict%", "list%", "n_dict", "n_list");
    for r in reports {
        let dict = r
            .dict_acc
            .map_or_else(|| "-".to_string(), |a| format!("{:.2}", 100.0 * a));
        let n_dict = r
            .dict_acc
            .map_or_else(|| "-".to_string(), |_| r.counts.dict_total.to_string());
        let _ = writeln!(
            s,
            "{:<8} {:>3} {:>8.2} {:>8} {:>8.2} {:>7} {:>7}",
            r.cascade,
            r.k,
            100.0 * r.full_acc,
            dict,
            100.0 * r.list_acc,
            n_dict,
            r.counts.list_total
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Hypothesis, HypothesisSet};

    fn rec(gold: &str, hyps: &[&str]) -> EvalRecord {
        EvalRecord {
            id: gold.into(),
            gold: gold.into(),
            hypotheses: HypothesisSet::new(
                hyps.iter()
                    .enumerate()
                    .map(|(i, w)| Hypothesis {
                        word: w.to_string(),
                        score: 0.9 - 0.1 * i as f64,
                    })
                    .collect(),
            ),
            contexts: vec![],
        }
    }

    fn baseline(records: &[EvalRecord]) -> Vec<Vec<ScoredHypothesis>> {
        let models = Models::default();
        let cfg = RerankConfig::default();
        let scorer = Scorer::new(&models, &cfg).unwrap();
        records.iter().map(|r| scorer.rerank(r, None)).collect()
    }

    #[test]
    fn full_accuracy_ratio() {
        let records = [rec("a", &["a", "x"]), rec("b", &["b", "x"]), rec("c", &["c"]), rec("d", &["x", "d"])];
        let report = evaluate("bl", &records, &baseline(&records), 2, None).unwrap();
        assert_eq!(report.full_acc, 0.75);
        assert_eq!(report.dict_acc, None);
    }

    #[test]
    fn dictionary_and_list_denominators() {
        let records = [rec("a", &["a", "x"]), rec("b", &["b", "x"]), rec("c", &["x", "c"]), rec("d", &["x", "y", "d"])];
        let lex: Lexicon = ["a", "b"].into_iter().collect();
        let report = evaluate("bl", &records, &baseline(&records), 2, Some(&lex)).unwrap();
        assert_eq!(report.dict_acc, Some(1.0));
        assert_eq!(report.counts.dict_total, 2);
        assert_eq!(report.counts.list_total, 3);
        assert_eq!(report.full_acc, 0.5);
        assert!((report.list_acc - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn record_count_mismatch() {
        let records = [rec("a", &["a"])];
        assert!(matches!(evaluate("bl", &records, &[], 1, None), Err(Error::Mismatch(_))));
    }

    #[test]
    fn prediction_respects_cutoff() {
        let list = vec![
            ScoredHypothesis { rank: 2, ..baseline(&[rec("z", &["z"])])[0][0].clone() },
            ScoredHypothesis { rank: 0, word: "w".into(), ..baseline(&[rec("z", &["z"])])[0][0].clone() },
        ];
        assert_eq!(top_prediction(&list, 3).unwrap().rank, 2);
        assert_eq!(top_prediction(&list, 2).unwrap().word, "w");
    }

    #[test]
    fn tsv_and_table_render() {
        let records = [rec("a", &["a", "x"])];
        let report = evaluate("bl", &records, &baseline(&records), 2, None).unwrap();
        let mut buf = Vec::new();
        write_tsv(&mut buf, std::slice::from_ref(&report)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "bl\t2\t1.000000\t1\t1\t-\t-\t-\t1.000000\t1\t1");
        assert!(render_table(&[report]).contains("100.00"));
    }
}

//! Unigram language model: relative word frequencies over one or more
//! plain-text corpora.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::dataset::normalize_token;
use crate::error::{Error, Result};

const MAGIC: &str = "ULM1";

/// Floor used when a model has no counts at all and no explicit floor.
pub const EMPTY_MODEL_FLOOR: f64 = 1e-12;

/// Incremental counter; feed it any number of corpora, then [`finish`](Self::finish).
#[derive(Debug, Default, Clone)]
pub struct UnigramBuilder {
    counts: HashMap<String, u64>,
}

impl UnigramBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_token(&mut self, raw: &str) {
        if let Some(token) = normalize_token(raw) {
            *self.counts.entry(token).or_insert(0) += 1;
        }
    }

    pub fn add_text(&mut self, text: &str) {
        for raw in text.split_whitespace() {
            self.add_token(raw);
        }
    }

    pub fn add_reader<R: BufRead>(&mut self, mut reader: R) -> Result<()> {
        let mut line = String::new();
        loop {
            line.clear();
            if reader.read_line(&mut line)? == 0 {
                return Ok(());
            }
            self.add_text(&line);
        }
    }

    /// Additive merge, so shards can be counted independently.
    pub fn merge(&mut self, other: UnigramBuilder) {
        for (token, count) in other.counts {
            *self.counts.entry(token).or_insert(0) += count;
        }
    }

    pub fn finish(self) -> UnigramModel {
        UnigramModel::from_counts(self.counts)
    }
}

/// Word-frequency model. In-vocabulary probability is `count / total`;
/// unseen words get `oov_floor`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnigramModel {
    counts: HashMap<String, u64>,
    total: u64,
    oov_floor: f64,
    short_word_discount: f64,
}

impl UnigramModel {
    /// Builds a model with the default floor `1 / (10 * total)`.
    pub fn from_counts(counts: HashMap<String, u64>) -> Self {
        let counts: HashMap<_, _> = counts.into_iter().filter(|(_, c)| *c > 0).collect();
        let total = counts.values().sum();
        UnigramModel {
            oov_floor: default_floor(total),
            counts,
            total,
            short_word_discount: 1.0,
        }
    }

    pub fn build_from_texts<'a>(texts: impl IntoIterator<Item = &'a str>) -> Self {
        let mut builder = UnigramBuilder::new();
        for text in texts {
            builder.add_text(text);
        }
        builder.finish()
    }

    pub fn with_oov_floor(mut self, floor: f64) -> Result<Self> {
        if !(floor.is_finite() && floor > 0.0 && floor < 1.0) {
            return Err(Error::config(format!("oov floor {floor} must lie in (0, 1)")));
        }
        self.oov_floor = floor;
        Ok(self)
    }

    /// Multiplies the probability of words shorter than three characters by
    /// `d^(3 - len)`. `d = 1` disables the adjustment.
    pub fn with_short_word_discount(mut self, d: f64) -> Result<Self> {
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::config(format!("short-word discount {d} must be positive")));
        }
        self.short_word_discount = d;
        Ok(self)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn vocab_size(&self) -> usize {
        self.counts.len()
    }

    pub fn oov_floor(&self) -> f64 {
        self.oov_floor
    }

    pub fn short_word_discount(&self) -> f64 {
        self.short_word_discount
    }

    pub fn count(&self, token: &str) -> u64 {
        self.counts.get(token).copied().unwrap_or(0)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.counts.contains_key(token)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(t, c)| (t.as_str(), *c))
    }

    /// Unadjusted relative frequency, or the floor for unseen tokens.
    pub fn raw_prob(&self, token: &str) -> f64 {
        match self.counts.get(token) {
            Some(&c) => c as f64 / self.total as f64,
            None => self.oov_floor,
        }
    }

    /// Probability used for scoring: [`raw_prob`](Self::raw_prob) times the
    /// short-word factor. Always strictly positive.
    pub fn prob(&self, token: &str) -> f64 {
        let p = self.raw_prob(token);
        if self.short_word_discount == 1.0 {
            return p;
        }
        let short_by = 3usize.saturating_sub(token.chars().count());
        p * self.short_word_discount.powi(short_by as i32)
    }

    /// Writes the `ULM1` text format. The header carries a fifth field only
    /// when a short-word discount is set.
    pub fn save<W: Write>(&self, mut out: W) -> Result<()> {
        write!(out, "{MAGIC} {} {} {}", self.total, self.counts.len(), self.oov_floor)?;
        if self.short_word_discount != 1.0 {
            write!(out, " {}", self.short_word_discount)?;
        }
        out.write_all(b"\n")?;
        let mut entries: Vec<_> = self.counts.iter().collect();
        entries.sort_unstable_by(|a, b| a.0.as_bytes().cmp(b.0.as_bytes()));
        for (token, count) in entries {
            if token.contains(['\t', '\n', '\r']) {
                return Err(Error::format(format!("token {token:?} cannot be stored")));
            }
            writeln!(out, "{token}\t{count}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn load<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::format("empty model file"))??;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.first() != Some(&MAGIC) {
            return Err(Error::format(format!("expected {MAGIC} header, found {header:?}")));
        }
        if !(fields.len() == 4 || fields.len() == 5) {
            return Err(Error::format(format!("malformed header {header:?}")));
        }
        let bad = |what: &str| Error::format(format!("bad {what} in header {header:?}"));
        let total: u64 = fields[1].parse().map_err(|_| bad("total"))?;
        let vocab_size: usize = fields[2].parse().map_err(|_| bad("vocab size"))?;
        let oov_floor: f64 = fields[3].parse().map_err(|_| bad("oov floor"))?;
        let short_word_discount: f64 = match fields.get(4) {
            Some(f) => f.parse().map_err(|_| bad("short-word discount"))?,
            None => 1.0,
        };

        let mut counts = HashMap::with_capacity(vocab_size);
        let mut sum = 0u64;
        for (idx, line) in lines.enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let line_no = idx + 2;
            let (token, count) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(line_no, "expected token<TAB>count"))?;
            let count: u64 = count
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad count {count:?}")))?;
            if counts.insert(token.to_string(), count).is_some() {
                return Err(Error::parse(line_no, format!("duplicate token {token:?}")));
            }
            sum += count;
        }
        if counts.len() != vocab_size || sum != total {
            return Err(Error::format(format!(
                "header declares total={total} vocab={vocab_size}, body has total={sum} vocab={}",
                counts.len()
            )));
        }
        let model = UnigramModel {
            counts,
            total,
            oov_floor,
            short_word_discount: 1.0,
        };
        let model = model.with_oov_floor(oov_floor)?;
        model.with_short_word_discount(short_word_discount)
    }
}

fn default_floor(total: u64) -> f64 {
    if total == 0 {
        EMPTY_MODEL_FLOOR
    } else {
        1.0 / (10.0 * total as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toy() -> UnigramModel {
        UnigramModel::build_from_texts(["a b b a a"])
    }

    #[test]
    fn toy_counts() {
        let m = toy();
        assert_eq!(m.count("a"), 3);
        assert_eq!(m.count("b"), 2);
        assert_eq!(m.total(), 5);
        assert_eq!(m.prob("a"), 0.6);
        assert_eq!(m.prob("zzz"), m.oov_floor());
        assert_eq!(m.oov_floor(), 1.0 / 50.0);
    }

    #[test]
    fn corpora_merge_additively() {
        let m = UnigramModel::build_from_texts(["a", "a b"]);
        assert_eq!((m.count("a"), m.count("b"), m.total()), (2, 1, 3));
    }

    #[test]
    fn empty_corpus() {
        let m = UnigramModel::build_from_texts([""]);
        assert_eq!(m.vocab_size(), 0);
        assert_eq!(m.prob("anything"), m.oov_floor());
        assert!(m.oov_floor() > 0.0);
    }

    #[test]
    fn tokens_are_normalized() {
        let m = UnigramModel::build_from_texts(["Way way  WAY\n24:7"]);
        assert_eq!(m.count("way"), 3);
        assert_eq!(m.count("24:7"), 1);
    }

    #[test]
    fn save_format_is_sorted_and_round_trips() {
        let m = toy();
        let mut buf = Vec::new();
        m.save(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "ULM1 5 2 0.02\na\t3\nb\t2\n");
        let back = UnigramModel::load(buf.as_slice()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.prob("a"), 0.6);
    }

    #[test]
    fn wrong_magic_is_format_error() {
        let err = UnigramModel::load("ULM9 5 2 0.02\na\t3\nb\t2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Format(_)));
    }

    #[test]
    fn inconsistent_header_is_format_error() {
        let err = UnigramModel::load("ULM1 6 2 0.02\na\t3\nb\t2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Format(_)));
    }

    #[test]
    fn short_word_discount() {
        let m = UnigramModel::build_from_texts(["to to the house"])
            .with_short_word_discount(0.5)
            .unwrap();
        assert_eq!(m.prob("to"), 0.5 * 0.5);
        assert_eq!(m.prob("the"), 0.25);
        let mut buf = Vec::new();
        m.save(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("ULM1 4 3 0.025 0.5\n"));
        assert_eq!(UnigramModel::load(buf.as_slice()).unwrap(), m);
    }

    fn arb_corpus() -> impl Strategy<Value = Vec<String>> {
        prop::collection::vec("[a-e]{1,3}", 0..60)
    }

    proptest! {
        #[test]
        fn probabilities_sum_to_one(tokens in arb_corpus()) {
            let m = UnigramModel::build_from_texts([tokens.join(" ").as_str()]);
            if m.vocab_size() > 0 {
                let sum: f64 = m.iter().map(|(t, _)| m.prob(t)).sum();
                prop_assert!((sum - 1.0).abs() < 1e-9);
                let min = m.iter().map(|(t, _)| m.prob(t)).fold(f64::INFINITY, f64::min);
                prop_assert!(m.oov_floor() < min);
            }
        }

        #[test]
        fn merge_is_order_independent(a in arb_corpus(), b in arb_corpus()) {
            let (a, b) = (a.join(" "), b.join(" "));
            let ab = UnigramModel::build_from_texts([a.as_str(), b.as_str()]);
            let ba = UnigramModel::build_from_texts([b.as_str(), a.as_str()]);
            prop_assert_eq!(ab, ba);
        }

        #[test]
        fn adding_occurrences_never_lowers_count_mass(tokens in arb_corpus(), extra in "[a-e]{1,3}") {
            let text = tokens.join(" ");
            let before = UnigramModel::build_from_texts([text.as_str()]);
            let after = UnigramModel::build_from_texts([text.as_str(), extra.as_str()]);
            let mass = |m: &UnigramModel| m.raw_prob(&extra) * m.total() as f64;
            prop_assert!(mass(&after) >= mass(&before) || before.count(&extra) == 0);
            prop_assert!(after.count(&extra) > before.count(&extra));
        }
    }
}

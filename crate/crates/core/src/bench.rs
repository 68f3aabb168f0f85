//! Deterministic synthetic datasets with planted word–context correlations.
//!
//! The generated vocabulary is split into context groups. Every word has one
//! planted context whose embedding has an exactly known cosine with the
//! word's embedding; words and contexts from other groups are orthogonal.
//! Each evaluation record carries the gold word's planted context with
//! probability `correlation_strength`, and a random other context otherwise.
//! Distractor hypotheses are either nonsense strings absent from every model
//! or real words from other groups.

use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{write_records, EvalRecord, Hypothesis, HypothesisSet, VisualContext};
use crate::embedding::EmbeddingTable;
use crate::error::{Error, Result};

const CONTEXT_LABELS: [&str; 20] = [
    "street",
    "parking_lot",
    "racket",
    "umbrella",
    "restaurant",
    "bus",
    "train_station",
    "shop",
    "bottle",
    "stadium",
    "bookstore",
    "kitchen",
    "highway",
    "pharmacy",
    "beach",
    "airport",
    "church",
    "laptop",
    "bakery",
    "traffic_light",
];

const WORDS_PER_CONTEXT: usize = 3;

/// Smallest and largest planted cosine between a word and its context.
const MIN_PLANTED_COSINE: f64 = 0.55;
const MAX_PLANTED_COSINE: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSpec {
    pub n_records: usize,
    pub k: usize,
    /// Exact fraction (rounded to a whole record count) of records whose gold
    /// word is the baseline's top hypothesis.
    pub gold_top1_rate: f64,
    /// Probability that a record carries the gold word's planted context.
    pub correlation_strength: f64,
    pub seed: u64,
}

impl Default for BenchSpec {
    fn default() -> Self {
        BenchSpec {
            n_records: 200,
            k: 3,
            gold_top1_rate: 0.4,
            correlation_strength: 0.9,
            seed: 7,
        }
    }
}

impl BenchSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_records == 0 {
            return Err(Error::config("n_records must be positive"));
        }
        if self.k == 0 || self.k > 1 + (CONTEXT_LABELS.len() - 1) * WORDS_PER_CONTEXT {
            return Err(Error::config(format!("k = {} unsupported", self.k)));
        }
        for (name, v) in [
            ("gold_top1_rate", self.gold_top1_rate),
            ("correlation_strength", self.correlation_strength),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(format!("{name} {v} outside [0, 1]")));
            }
        }
        if self.k == 1 && self.gold_top1_rate < 1.0 {
            return Err(Error::config("with k = 1 the gold word is always top-1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct BenchWord {
    pub word: String,
    pub context: usize,
    pub planted_cosine: f64,
    pub corpus_count: u64,
}

/// Everything a benchmark run needs.
#[derive(Debug, Clone)]
pub struct BenchData {
    pub dataset: Vec<EvalRecord>,
    /// Disjoint split for fitting TDP tables and training embeddings.
    pub training: Vec<EvalRecord>,
    pub embeddings: EmbeddingTable,
    pub corpus: String,
    pub vocabulary: Vec<BenchWord>,
    pub contexts: Vec<String>,
}

impl BenchData {
    /// Writes `dataset.jsonl`, `train.jsonl`, `embeddings.vec`, `corpus.txt`
    /// and `lexicon.txt` into `dir`, creating it if needed.
    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut out = BufWriter::new(File::create(dir.join("dataset.jsonl"))?);
        write_records(&mut out, &self.dataset)?;
        out.flush()?;
        let mut out = BufWriter::new(File::create(dir.join("train.jsonl"))?);
        write_records(&mut out, &self.training)?;
        out.flush()?;
        self.embeddings
            .save(BufWriter::new(File::create(dir.join("embeddings.vec"))?))?;
        fs::write(dir.join("corpus.txt"), &self.corpus)?;
        let mut lexicon = String::new();
        for w in &self.vocabulary {
            lexicon.push_str(&w.word);
            lexicon.push('\n');
        }
        fs::write(dir.join("lexicon.txt"), lexicon)?;
        Ok(())
    }
}

const CONSONANTS: &[u8] = b"bcdfglmnprstv";
const VOWELS: &[u8] = b"aeiou";
const NONSENSE: &[u8] = b"qxzjkwy";

fn pronounceable(rng: &mut impl Rng) -> String {
    let syllables = rng.gen_range(2..=3);
    let mut s = String::new();
    for _ in 0..syllables {
        s.push(*CONSONANTS.choose(rng).unwrap() as char);
        s.push(*VOWELS.choose(rng).unwrap() as char);
    }
    if rng.gen_bool(0.5) {
        s.push(*CONSONANTS.choose(rng).unwrap() as char);
    }
    s
}

fn nonsense(rng: &mut impl Rng) -> String {
    let len = rng.gen_range(2..=6);
    (0..len)
        .map(|_| *NONSENSE.choose(rng).unwrap() as char)
        .collect()
}

fn build_vocabulary(rng: &mut ChaCha8Rng) -> Vec<BenchWord> {
    let n = CONTEXT_LABELS.len() * WORDS_PER_CONTEXT;
    let mut seen = HashSet::new();
    let mut cosines: Vec<f64> = (0..n)
        .map(|i| MIN_PLANTED_COSINE + (MAX_PLANTED_COSINE - MIN_PLANTED_COSINE) * i as f64 / (n - 1) as f64)
        .collect();
    cosines.shuffle(rng);
    (0..n)
        .map(|i| {
            let word = loop {
                let w = pronounceable(rng);
                if seen.insert(w.clone()) {
                    break w;
                }
            };
            // log-uniform over [20, 400]
            let corpus_count = (20.0f64 * 20f64.powf(rng.gen::<f64>())).round() as u64;
            BenchWord {
                word,
                context: i / WORDS_PER_CONTEXT,
                planted_cosine: cosines[i],
                corpus_count,
            }
        })
        .collect()
}

/// Contexts occupy the first axes, each word gets a private axis, so a word's
/// cosine is its planted value with its own context and zero elsewhere.
fn build_embeddings(vocab: &[BenchWord]) -> EmbeddingTable {
    let n_ctx = CONTEXT_LABELS.len();
    let dim = n_ctx + vocab.len();
    let mut table = EmbeddingTable::new(dim);
    let mut v = vec![0.0; dim];
    for (j, label) in CONTEXT_LABELS.iter().enumerate() {
        v.fill(0.0);
        v[j] = 1.0;
        table.insert(label, &v).expect("valid vector");
    }
    for (i, w) in vocab.iter().enumerate() {
        v.fill(0.0);
        v[w.context] = w.planted_cosine;
        v[n_ctx + i] = (1.0 - w.planted_cosine * w.planted_cosine).sqrt();
        table.insert(&w.word, &v).expect("valid vector");
    }
    table
}

fn build_corpus(vocab: &[BenchWord], rng: &mut ChaCha8Rng) -> String {
    let mut tokens: Vec<&str> = vocab
        .iter()
        .flat_map(|w| std::iter::repeat_n(w.word.as_str(), w.corpus_count as usize))
        .collect();
    tokens.shuffle(rng);
    let mut corpus = String::new();
    for line in tokens.chunks(12) {
        corpus.push_str(&line.join(" "));
        corpus.push('\n');
    }
    corpus
}

struct Generator<'a> {
    spec: &'a BenchSpec,
    vocab: &'a [BenchWord],
    known: HashSet<&'a str>,
}

impl Generator<'_> {
    fn record(&self, id: String, gold_rank: usize, rng: &mut ChaCha8Rng) -> EvalRecord {
        let k = self.spec.k;
        let n_ctx = CONTEXT_LABELS.len();
        let gold = &self.vocab[rng.gen_range(0..self.vocab.len())];

        let mut words: Vec<String> = Vec::with_capacity(k);
        let mut used: HashSet<String> = HashSet::from([gold.word.clone()]);
        while words.len() + 1 < k {
            let candidate = if rng.gen_bool(0.5) {
                let s = nonsense(rng);
                if self.known.contains(s.as_str()) {
                    continue;
                }
                s
            } else {
                let w = &self.vocab[rng.gen_range(0..self.vocab.len())];
                if w.context == gold.context {
                    continue;
                }
                w.word.clone()
            };
            if used.insert(candidate.clone()) {
                words.push(candidate);
            }
        }
        words.insert(gold_rank, gold.word.clone());

        let mut scores: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
        scores.sort_by(|a, b| b.total_cmp(a));
        // Break exact ties so the gold rank is unambiguous.
        for i in 1..k {
            if scores[i] >= scores[i - 1] {
                scores[i] = scores[i - 1] * 0.99;
            }
        }
        let mass: f64 = rng.gen_range(0.5..0.95);
        let sum: f64 = scores.iter().sum();
        let hypotheses = words
            .into_iter()
            .zip(scores)
            .map(|(word, s)| Hypothesis {
                word,
                score: s * mass / sum,
            })
            .collect();

        let main_context = if rng.gen_bool(self.spec.correlation_strength) {
            gold.context
        } else {
            let mut c = rng.gen_range(0..n_ctx - 1);
            if c >= gold.context {
                c += 1;
            }
            c
        };
        let mut contexts = vec![VisualContext {
            label: CONTEXT_LABELS[main_context].to_string(),
            confidence: rng.gen_range(0.4..0.95),
        }];
        for _ in 0..rng.gen_range(0..=2) {
            let c = rng.gen_range(0..n_ctx);
            if c != main_context && contexts.iter().all(|x| x.label != CONTEXT_LABELS[c]) {
                contexts.push(VisualContext {
                    label: CONTEXT_LABELS[c].to_string(),
                    confidence: rng.gen_range(0.0..0.2),
                });
            }
        }

        EvalRecord {
            id,
            gold: gold.word.clone(),
            hypotheses: HypothesisSet::new(hypotheses),
            contexts,
        }
    }

    fn split(&self, prefix: &str, rng: &mut ChaCha8Rng) -> Vec<EvalRecord> {
        let n = self.spec.n_records;
        let k = self.spec.k;
        let n_top1 = (self.spec.gold_top1_rate * n as f64).round() as usize;
        let mut ranks: Vec<usize> = (0..n)
            .map(|i| if i < n_top1 { 0 } else { 1 + i % (k - 1).max(1) })
            .collect();
        ranks.shuffle(rng);
        ranks
            .into_iter()
            .enumerate()
            .map(|(i, rank)| self.record(format!("{prefix}{i:05}"), rank, rng))
            .collect()
    }
}

/// Generates a benchmark. Identical specs give identical data.
pub fn generate(spec: &BenchSpec) -> Result<BenchData> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let vocabulary = build_vocabulary(&mut rng);
    let embeddings = build_embeddings(&vocabulary);
    let corpus = build_corpus(&vocabulary, &mut rng);
    let generator = Generator {
        spec,
        vocab: &vocabulary,
        known: vocabulary
            .iter()
            .map(|w| w.word.as_str())
            .chain(CONTEXT_LABELS)
            .collect(),
    };
    let dataset = generator.split("eval-", &mut rng);
    let training = generator.split("train-", &mut rng);
    Ok(BenchData {
        dataset,
        training,
        embeddings,
        corpus,
        contexts: CONTEXT_LABELS.iter().map(|s| s.to_string()).collect(),
        vocabulary,
    })
}

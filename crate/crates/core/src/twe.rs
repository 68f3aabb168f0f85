//! Task-specific embeddings trained on two-token (gold word, context label)
//! sentences with skip-gram and negative sampling.
//!
//! Vocabulary is shared between the word and context sides and no token is
//! filtered or subsampled. Training can start from random vectors or from a
//! general-purpose embedding table; in the latter case covered tokens start
//! from their pretrained vectors on both sides.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use rand::distributions::{Distribution, Uniform, WeightedIndex};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::EvalRecord;
use crate::embedding::{cosine, dot, EmbeddingTable};
use crate::error::{Error, Result};

/// Which vectors are compared when scoring a (word, context) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pairing {
    /// Word-side vector of the word against context-side vector of the label.
    #[default]
    InputOutput,
    /// Word-side vectors for both.
    InputInput,
}

/// Training hyperparameters. Apart from the window of one, the defaults are
/// common skip-gram conventions rather than tuned values.
#[derive(Debug, Clone, PartialEq)]
pub struct SkipGramConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Lower bound of the linearly decaying learning rate.
    pub min_learning_rate: f64,
    /// Exponent applied to context counts for the negative-sampling
    /// distribution.
    pub sampling_power: f64,
    pub seed: u64,
    pub pairing: Pairing,
}

impl Default for SkipGramConfig {
    fn default() -> Self {
        SkipGramConfig {
            dim: 300,
            window: 1,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.025,
            min_learning_rate: 0.025 * 1e-4,
            sampling_power: 0.75,
            seed: 1,
            pairing: Pairing::InputOutput,
        }
    }
}

impl SkipGramConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::config("dim must be positive"));
        }
        if self.window != 1 {
            return Err(Error::config(
                "two-token sentences only admit window = 1",
            ));
        }
        if !(self.learning_rate > 0.0 && self.min_learning_rate > 0.0) {
            return Err(Error::config("learning rates must be positive"));
        }
        if self.min_learning_rate > self.learning_rate {
            return Err(Error::config("min_learning_rate exceeds learning_rate"));
        }
        Ok(())
    }
}

/// Gradients of the negative-sampling loss with respect to each vector it
/// touches.
#[derive(Debug, Clone, PartialEq)]
pub struct SgnsGradients {
    pub word: Vec<f64>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `-ln(sigmoid(x))`, stable for large |x|.
fn neg_log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

/// Loss `-ln σ(u_c·v_w) - Σ_n ln σ(-u_n·v_w)` for one positive pair and its
/// negatives, with analytic gradients.
///
/// `word` is the word-side vector `v_w`, `context` the context-side vector
/// `u_c` and `negatives` the context-side vectors `u_n`.
pub fn sgns_loss_and_grad(word: &[f64], context: &[f64], negatives: &[&[f64]]) -> (f64, SgnsGradients) {
    let dim = word.len();
    let mut grad_word = vec![0.0; dim];

    let pos = dot(context, word);
    let mut loss = neg_log_sigmoid(pos);
    // d/dx of -ln σ(x) is σ(x) - 1
    let g = sigmoid(pos) - 1.0;
    let grad_context: Vec<f64> = word.iter().map(|w| g * w).collect();
    for (gw, c) in grad_word.iter_mut().zip(context) {
        *gw += g * c;
    }

    let mut grad_negatives = Vec::with_capacity(negatives.len());
    for &neg in negatives {
        let s = dot(neg, word);
        loss += neg_log_sigmoid(-s);
        let g = sigmoid(s);
        grad_negatives.push(word.iter().map(|w| g * w).collect());
        for (gw, n) in grad_word.iter_mut().zip(neg) {
            *gw += g * n;
        }
    }

    (
        loss,
        SgnsGradients {
            word: grad_word,
            context: grad_context,
            negatives: grad_negatives,
        },
    )
}

/// Word-side and context-side tables produced by training.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedEmbeddings {
    pub input: EmbeddingTable,
    pub output: EmbeddingTable,
    pub pairing: Pairing,
}

impl TrainedEmbeddings {
    pub fn dim(&self) -> usize {
        self.input.dim()
    }

    /// Cosine between `w` and context label `c` under the configured pairing.
    pub fn similarity(&self, w: &str, c: &str) -> Option<f64> {
        let wv = self.input.get(w)?;
        let cv = match self.pairing {
            Pairing::InputOutput => self.output.get(c)?,
            Pairing::InputInput => self.input.get(c)?,
        };
        cosine(wv, cv)
    }

    pub fn side_paths(prefix: &Path) -> (PathBuf, PathBuf) {
        let with = |ext: &str| {
            let mut s = prefix.as_os_str().to_os_string();
            s.push(ext);
            PathBuf::from(s)
        };
        (with(".in"), with(".out"))
    }

    /// Writes `<prefix>.in` and `<prefix>.out` in the text vector format.
    pub fn save(&self, prefix: &Path) -> Result<()> {
        let (in_path, out_path) = Self::side_paths(prefix);
        self.input.save(BufWriter::new(File::create(in_path)?))?;
        self.output.save(BufWriter::new(File::create(out_path)?))?;
        Ok(())
    }

    pub fn load(prefix: &Path, pairing: Pairing) -> Result<Self> {
        let (in_path, out_path) = Self::side_paths(prefix);
        let input = EmbeddingTable::load(BufReader::new(File::open(in_path)?))?;
        let output = EmbeddingTable::load(BufReader::new(File::open(out_path)?))?;
        if input.dim() != output.dim() {
            return Err(Error::format(format!(
                "word side has dim {}, context side has dim {}",
                input.dim(),
                output.dim()
            )));
        }
        Ok(TrainedEmbeddings { input, output, pairing })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mean loss per positive pair, one entry per epoch.
    pub epoch_losses: Vec<f64>,
}

/// (gold word, context label) sentences from annotated records, one per
/// distinct label in each record.
pub fn training_pairs<'a>(records: impl IntoIterator<Item = &'a EvalRecord>) -> Vec<(String, String)> {
    let mut pairs = Vec::new();
    for record in records {
        let labels: BTreeSet<&str> = record.contexts.iter().map(|c| c.label.as_str()).collect();
        pairs.extend(labels.into_iter().map(|l| (record.gold.clone(), l.to_string())));
    }
    pairs
}

/// Dense parameters during training. Row `i` of each side belongs to
/// `tokens[i]`.
struct SkipGramParams {
    dim: usize,
    tokens: Vec<String>,
    input: Vec<f64>,
    output: Vec<f64>,
}

impl SkipGramParams {
    fn row(v: &[f64], dim: usize, i: usize) -> &[f64] {
        &v[i * dim..(i + 1) * dim]
    }

    fn into_tables(self, pairing: Pairing) -> Result<TrainedEmbeddings> {
        let mut input = EmbeddingTable::new(self.dim);
        let mut output = EmbeddingTable::new(self.dim);
        for (i, token) in self.tokens.iter().enumerate() {
            for (table, data, side) in [(&mut input, &self.input, "word"), (&mut output, &self.output, "context")] {
                if !table.insert(token, Self::row(data, self.dim, i))? {
                    log::warn!("{side}-side vector for {token:?} collapsed to zero and was dropped");
                }
            }
        }
        Ok(TrainedEmbeddings { input, output, pairing })
    }
}

/// Trains word and context vectors on `pairs`.
///
/// Serial and deterministic for a given seed. When `init` is given its
/// dimensionality must equal `config.dim`.
pub fn train_twe(
    pairs: &[(String, String)],
    config: &SkipGramConfig,
    init: Option<&EmbeddingTable>,
) -> Result<(TrainedEmbeddings, TrainReport)> {
    config.validate()?;
    if pairs.is_empty() {
        return Err(Error::config("no training pairs"));
    }
    if let Some(init) = init {
        if init.dim() != config.dim {
            return Err(Error::config(format!(
                "initial embeddings have dim {}, config asks for {}",
                init.dim(),
                config.dim
            )));
        }
    }
    let dim = config.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut tokens: Vec<String> = Vec::new();
    let mut context_counts: Vec<u64> = Vec::new();
    let mut encoded = Vec::with_capacity(pairs.len());
    for (w, c) in pairs {
        let mut ids = [0usize; 2];
        for (slot, t) in ids.iter_mut().zip([w.as_str(), c.as_str()]) {
            *slot = *index.entry(t).or_insert_with(|| {
                tokens.push(t.to_string());
                context_counts.push(0);
                tokens.len() - 1
            });
        }
        let [wi, ci] = ids;
        context_counts[ci] += 1;
        encoded.push((wi, ci));
    }

    let n = tokens.len();
    let mut input = vec![0.0; n * dim];
    let mut output = vec![0.0; n * dim];
    let init_range = Uniform::new_inclusive(-0.5 / dim as f64, 0.5 / dim as f64);
    for (i, token) in tokens.iter().enumerate() {
        let rows = i * dim..(i + 1) * dim;
        match init.and_then(|t| t.get(token)) {
            Some(v) => {
                input[rows.clone()].copy_from_slice(v);
                output[rows].copy_from_slice(v);
            }
            None => {
                for x in &mut input[rows.clone()] {
                    *x = init_range.sample(&mut rng);
                }
                for x in &mut output[rows] {
                    *x = init_range.sample(&mut rng);
                }
            }
        }
    }

    let weights: Vec<f64> = context_counts
        .iter()
        .map(|&c| (c as f64).powf(config.sampling_power))
        .collect();
    let negative_dist = WeightedIndex::new(&weights)
        .map_err(|e| Error::config(format!("negative-sampling distribution: {e}")))?;

    let total_steps = (config.epochs * encoded.len()).max(1) as f64;
    let mut step = 0usize;
    let mut order: Vec<usize> = (0..encoded.len()).collect();
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut negs: Vec<usize> = Vec::with_capacity(config.negatives);
    let mut word_vec = vec![0.0; dim];

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for &p in &order {
            let (wi, ci) = encoded[p];
            let lr = (config.learning_rate * (1.0 - step as f64 / total_steps)).max(config.min_learning_rate);
            step += 1;

            negs.clear();
            for _ in 0..config.negatives {
                let n = negative_dist.sample(&mut rng);
                if n != ci {
                    negs.push(n);
                }
            }

            word_vec.copy_from_slice(SkipGramParams::row(&input, dim, wi));
            let neg_rows: Vec<&[f64]> = negs.iter().map(|&n| SkipGramParams::row(&output, dim, n)).collect();
            let (loss, grads) = sgns_loss_and_grad(
                &word_vec,
                SkipGramParams::row(&output, dim, ci),
                &neg_rows,
            );
            epoch_loss += loss;

            for (x, g) in output[ci * dim..(ci + 1) * dim].iter_mut().zip(&grads.context) {
                *x -= lr * g;
            }
            for (&n, g) in negs.iter().zip(&grads.negatives) {
                for (x, g) in output[n * dim..(n + 1) * dim].iter_mut().zip(g) {
                    *x -= lr * g;
                }
            }
            for (x, g) in input[wi * dim..(wi + 1) * dim].iter_mut().zip(&grads.word) {
                *x -= lr * g;
            }
        }
        let mean = epoch_loss / encoded.len() as f64;
        if !mean.is_finite() {
            return Err(Error::config(format!("training diverged: epoch loss {mean}")));
        }
        log::info!("epoch {}: mean loss {mean:.6}", epoch_losses.len() + 1);
        epoch_losses.push(mean);
    }

    let params = SkipGramParams {
        dim,
        tokens,
        input,
        output,
    };
    Ok((params.into_tables(config.pairing)?, TrainReport { epoch_losses }))
}

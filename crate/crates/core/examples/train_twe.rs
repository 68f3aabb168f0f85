//! Trains task embeddings on (gold word, context label) pairs from the
//! synthetic benchmark and prints a few similarities.
//!
//! cargo run --release --example train_twe

use scene_rerank::bench::{self, BenchSpec};
use scene_rerank::twe::{train_twe, training_pairs, Pairing, SkipGramConfig};

fn main() -> anyhow::Result<()> {
    let data = bench::generate(&BenchSpec::default())?;
    let pairs = training_pairs(&data.training);
    let cfg = SkipGramConfig {
        dim: 32,
        epochs: 200,
        seed: 1,
        ..Default::default()
    };
    let (mut emb, report) = train_twe(&pairs, &cfg, None)?;
    println!("{} pairs, loss every 20 epochs:", pairs.len());
    for (i, l) in report.epoch_losses.iter().enumerate().step_by(20) {
        println!("  {:>2} {l:.4}", i + 1);
    }

    let word = &data.vocabulary[0];
    let own = &data.contexts[word.context];
    let other = &data.contexts[(word.context + 1) % data.contexts.len()];
    for pairing in [Pairing::InputOutput, Pairing::InputInput] {
        emb.pairing = pairing;
        println!(
            "{pairing:?}: sim({}, {own}) = {:.3}, sim({}, {other}) = {:.3}",
            word.word,
            emb.similarity(&word.word, own).unwrap_or(f64::NAN),
            word.word,
            emb.similarity(&word.word, other).unwrap_or(f64::NAN),
        );
    }
    Ok(())
}

//! Counts a unigram language model from text, saves it and reads it back.
//!
//! cargo run --example build_lm -- [corpus.txt ...]

use std::fs::File;
use std::io::BufReader;

use scene_rerank::unigram::{UnigramBuilder, UnigramModel};

fn main() -> anyhow::Result<()> {
    let paths: Vec<String> = std::env::args().skip(1).collect();
    let mut builder = UnigramBuilder::new();
    if paths.is_empty() {
        builder.add_text("The way to the station is closed. Stop at the sign and pay at the door.");
    }
    for p in &paths {
        builder.add_reader(BufReader::new(File::open(p)?))?;
    }
    let lm = builder.finish();
    println!("{} tokens, {} types, OOV floor {:.3e}", lm.total(), lm.vocab_size(), lm.oov_floor());
    for w in ["the", "way", "stop", "tq"] {
        println!("  P({w}) = {:.5}", lm.prob(w));
    }

    let mut bytes = Vec::new();
    lm.save(&mut bytes)?;
    let back = UnigramModel::load(bytes.as_slice())?;
    assert_eq!(back, lm);
    println!("saved {} bytes, reloaded identical model", bytes.len());
    Ok(())
}

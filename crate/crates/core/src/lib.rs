//! Re-ranking of k-best scene-text hypotheses.
//!
//! A text recognizer proposes the k most likely transcriptions of a cropped
//! word image together with softmax scores. This crate rescores that list
//! with evidence the recognizer never saw:
//!
//! * word frequency from a unigram language model ([`unigram`]),
//! * semantic relatedness between each candidate and the objects or scenes
//!   detected in the surrounding image, measured with general word
//!   embeddings ([`embedding`]), with co-occurrence statistics from annotated
//!   training images ([`tdp`]), or with embeddings trained on those
//!   annotations ([`twe`]).
//!
//! [`rerank`] turns each source into a factor and multiplies any combination
//! of them into the baseline score. [`eval`] measures top-1 accuracy over the
//! full, dictionary and list views for one or more hypothesis-list cutoffs,
//! and [`bench`] produces synthetic data with planted correlations for
//! end-to-end checks. [`cli`] backs the `scene-rerank` binary.
//!
//! ```
//! use scene_rerank::dataset::parse_records;
//! use scene_rerank::rerank::{Cascade, Models, RerankConfig, Scorer};
//! use scene_rerank::unigram::UnigramModel;
//!
//! let line = r#"{"id":"1","gold":"to","hypotheses":[{"word":"tq","p":0.5},{"word":"to","p":0.4}]}"#;
//! let records = parse_records(line.as_bytes()).unwrap();
//! let models = Models {
//!     ulm: Some(UnigramModel::build_from_texts(["go to the shop to buy"])),
//!     ..Default::default()
//! };
//! let cfg = RerankConfig::for_cascade(Cascade::P1);
//! let scorer = Scorer::new(&models, &cfg).unwrap();
//! assert_eq!(scorer.rerank(&records[0], None)[0].word, "to");
//! ```

pub mod bench;
pub mod cli;
pub mod dataset;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod rerank;
pub mod tdp;
pub mod twe;
pub mod unigram;

pub use error::{Error, Result};

/// Toolkit and file-format versions, as printed by `--version`.
pub const VERSION_INFO: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (formats: records=jsonl-v1 lm=ULM1 tdp=TDP1 vectors=text)"
);

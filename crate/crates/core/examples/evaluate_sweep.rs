//! Accuracy of every cascade over several hypothesis-list cutoffs on a
//! synthetic 9-best benchmark, printed as a table and as TSV.
//!
//! cargo run --release --example evaluate_sweep

use scene_rerank::bench::{self, BenchSpec};
use scene_rerank::eval::{render_table, sweep_k, write_tsv, Lexicon};
use scene_rerank::rerank::{Cascade, Models, RerankConfig};
use scene_rerank::tdp::TdpTable;
use scene_rerank::twe::{train_twe, training_pairs, SkipGramConfig};
use scene_rerank::unigram::UnigramModel;

fn main() -> anyhow::Result<()> {
    let data = bench::generate(&BenchSpec {
        n_records: 300,
        k: 9,
        ..Default::default()
    })?;
    let twe_cfg = SkipGramConfig {
        dim: 16,
        epochs: 5,
        ..Default::default()
    };
    let models = Models {
        ulm: Some(UnigramModel::build_from_texts([data.corpus.as_str()])),
        embeddings: Some(data.embeddings.clone()),
        tdp: Some(TdpTable::fit(&data.training)),
        twe: Some(train_twe(&training_pairs(&data.training), &twe_cfg, None)?.0),
    };
    let lexicon: Lexicon = data.vocabulary.iter().map(|w| w.word.clone()).collect();
    let reports = sweep_k(
        &data.dataset,
        &models,
        &RerankConfig::default(),
        &Cascade::ALL,
        &[1, 2, 3, 5, 9],
        Some(&lexicon),
        4,
    )?;
    print!("{}", render_table(&reports));
    println!();
    write_tsv(std::io::stdout().lock(), &reports)?;
    Ok(())
}

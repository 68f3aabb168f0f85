//! Generates the synthetic benchmark with planted word-context correlations,
//! optionally writes it to disk, and reports baseline and re-ranked accuracy.
//!
//! cargo run --example synthetic_bench -- [out_dir] [strength]

use std::path::PathBuf;

use scene_rerank::bench::{self, BenchSpec};
use scene_rerank::eval::evaluate;
use scene_rerank::rerank::{Cascade, Models, RerankConfig, Scorer};
use scene_rerank::tdp::TdpTable;
use scene_rerank::unigram::UnigramModel;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let out: Option<PathBuf> = args.next().map(PathBuf::from);
    let strength: f64 = args.next().map_or(Ok(0.9), |s| s.parse())?;
    let spec = BenchSpec {
        correlation_strength: strength,
        ..Default::default()
    };
    let data = bench::generate(&spec)?;
    if let Some(dir) = &out {
        data.write_to_dir(dir)?;
        println!("wrote benchmark to {}", dir.display());
    }
    println!(
        "{} eval records, {} training records, {} words over {} contexts, strength {strength}",
        data.dataset.len(),
        data.training.len(),
        data.vocabulary.len(),
        data.contexts.len()
    );

    let models = Models {
        ulm: Some(UnigramModel::build_from_texts([data.corpus.as_str()])),
        embeddings: Some(data.embeddings.clone()),
        tdp: Some(TdpTable::fit(&data.training)),
        twe: None,
    };
    for cascade in [Cascade::Baseline, Cascade::P1, Cascade::P2, Cascade::P3, Cascade::P5] {
        let cfg = RerankConfig::for_cascade(cascade);
        let outputs = Scorer::new(&models, &cfg)?.rerank_all(&data.dataset, None, 1);
        let r = evaluate(cascade.name(), &data.dataset, &outputs, spec.k, None)?;
        println!("  {:<3} {:6.2}%", cascade.name(), 100.0 * r.full_acc);
    }
    Ok(())
}

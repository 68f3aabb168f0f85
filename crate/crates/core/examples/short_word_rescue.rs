//! A frequent two-letter word ranked behind an unseen string is promoted by
//! the unigram re-ranker.

use scene_rerank::dataset::parse_records;
use scene_rerank::rerank::{Cascade, Models, RerankConfig, Scorer};
use scene_rerank::unigram::UnigramModel;

fn main() -> anyhow::Result<()> {
    let line = r#"{"id":"sign-17","gold":"to","hypotheses":[{"word":"tq","p":0.55},{"word":"to","p":0.35},{"word":"ta","p":0.10}]}"#;
    let record = &parse_records(line.as_bytes())?[0];
    let models = Models {
        ulm: Some(UnigramModel::build_from_texts(["walk to the end of the road to get to the gate"])),
        ..Default::default()
    };
    for cascade in [Cascade::Baseline, Cascade::P1] {
        let cfg = RerankConfig::for_cascade(cascade);
        let out = Scorer::new(&models, &cfg)?.rerank(record, None);
        let list: Vec<String> = out.iter().map(|h| format!("{}={:.2e}", h.word, h.combined)).collect();
        println!("{:>3}: {}", cascade.name(), list.join("  "));
    }
    Ok(())
}

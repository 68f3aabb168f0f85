//! One record through every cascade, showing each factor and the context it
//! was computed against.

use scene_rerank::dataset::parse_records;
use scene_rerank::embedding::EmbeddingTable;
use scene_rerank::rerank::{Cascade, Models, RerankConfig, Scorer};
use scene_rerank::tdp::TdpTable;
use scene_rerank::twe::{train_twe, training_pairs, SkipGramConfig};
use scene_rerank::unigram::UnigramModel;

const RECORD: &str = r#"{"id":"q","gold":"wine","hypotheses":[{"word":"wina","p":0.5},{"word":"wine","p":0.3},{"word":"vine","p":0.2}],"contexts":[{"label":"wine_glass","p":0.7},{"label":"table","p":0.2},{"label":"person","p":0.01}]}"#;

const TRAIN: &str = r#"{"id":"t1","gold":"wine","hypotheses":[{"word":"wine","p":1}],"contexts":[{"label":"wine_glass","p":0.9}]}
{"id":"t2","gold":"wine","hypotheses":[{"word":"wine","p":1}],"contexts":[{"label":"wine_glass","p":0.8},{"label":"table","p":0.4}]}
{"id":"t3","gold":"vine","hypotheses":[{"word":"vine","p":1}],"contexts":[{"label":"table","p":0.5}]}
"#;

const VECTORS: &str = "wine 0.9 0.3 0.1
glass 0.7 0.6 0.0
vine 0.2 0.1 0.9
table 0.1 0.9 0.2
";

fn main() -> anyhow::Result<()> {
    let record = &parse_records(RECORD.as_bytes())?[0];
    let training = parse_records(TRAIN.as_bytes())?;
    let cfg = SkipGramConfig {
        dim: 8,
        epochs: 20,
        ..Default::default()
    };
    let models = Models {
        ulm: Some(UnigramModel::build_from_texts(["a glass of wine on the table", "wine and vine"])),
        embeddings: Some(EmbeddingTable::load(VECTORS.as_bytes())?),
        tdp: Some(TdpTable::fit(&training)),
        twe: Some(train_twe(&training_pairs(&training), &cfg, None)?.0),
    };
    let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.3e}"));
    for cascade in Cascade::ALL {
        let rc = RerankConfig::for_cascade(cascade);
        let out = Scorer::new(&models, &rc)?.rerank(record, None);
        println!("{} -> {}", cascade.name(), out[0].word);
        for h in &out {
            println!(
                "    {:<5} combined {:.3e}  ulm {}  swe {} [{}]  tdp {} [{}]  twe {} [{}]",
                h.word,
                h.combined,
                opt(h.ulm),
                opt(h.swe),
                h.swe_context.as_deref().unwrap_or("-"),
                opt(h.tdp),
                h.tdp_context.as_deref().unwrap_or("-"),
                opt(h.twe),
                h.twe_context.as_deref().unwrap_or("-"),
            );
        }
    }
    Ok(())
}

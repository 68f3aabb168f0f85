//! Word-given-context probabilities counted on annotated records.

use scene_rerank::dataset::parse_records;
use scene_rerank::tdp::TdpTable;

const TRAIN: &str = r#"{"id":"1","gold":"kt","hypotheses":[{"word":"kt","p":0.9}],"contexts":[{"label":"racket","p":0.8}]}
{"id":"2","gold":"kt","hypotheses":[{"word":"kt","p":0.9}],"contexts":[{"label":"racket","p":0.6},{"label":"court","p":0.3}]}
{"id":"3","gold":"wilson","hypotheses":[{"word":"wilson","p":0.9}],"contexts":[{"label":"racket","p":0.7}]}
{"id":"4","gold":"exit","hypotheses":[{"word":"exit","p":0.9}],"contexts":[{"label":"door","p":0.9}]}
"#;

fn main() -> anyhow::Result<()> {
    let records = parse_records(TRAIN.as_bytes())?;
    let table = TdpTable::fit(&records);
    println!("{} pairs over {} contexts", table.num_pairs(), table.num_contexts());
    for (w, c) in [("kt", "racket"), ("wilson", "racket"), ("exit", "racket"), ("exit", "door")] {
        println!("  P({w} | {c}) = {:.4}", table.prob(w, c));
    }
    let mut text = Vec::new();
    table.save(&mut text)?;
    print!("{}", String::from_utf8(text)?);
    Ok(())
}

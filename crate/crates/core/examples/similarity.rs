//! Word-to-context cosine from a text vector file, including compound labels.
//!
//! cargo run --example similarity -- vectors.vec glass wine_glass

use scene_rerank::embedding::EmbeddingTable;

const DEMO: &str = "5 3
glass 0.8 0.6 0.0
wine 0.7 0.7 0.1
bottle 1.0 0.0 0.0
racket 0.0 0.1 1.0
kt 0.1 0.0 0.9
";

fn main() -> anyhow::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (table, pairs) = match args.as_slice() {
        [path, w, c] => {
            let t = EmbeddingTable::load(std::io::BufReader::new(std::fs::File::open(path)?))?;
            (t, vec![(w.clone(), c.clone())])
        }
        _ => {
            let t = EmbeddingTable::load(DEMO.as_bytes())?;
            let pairs = [("glass", "bottle"), ("glass", "wine_glass"), ("kt", "racket"), ("kt", "tennis court")];
            (t, pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect())
        }
    };
    for (w, c) in pairs {
        match table.label_similarity(&w, &c) {
            Some(s) => println!("{w:>8} ~ {c:<14} {s:.4}"),
            None => println!("{w:>8} ~ {c:<14} absent"),
        }
    }
    Ok(())
}

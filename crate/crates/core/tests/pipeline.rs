use std::io::Write;
use std::time::Instant;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use scene_rerank::bench::{self, BenchData, BenchSpec};
use scene_rerank::dataset::{EvalRecord, Hypothesis, HypothesisSet, VisualContext};
use scene_rerank::embedding::EmbeddingTable;
use scene_rerank::eval::{self, sweep_k};
use scene_rerank::rerank::{Cascade, Models, RerankConfig, Reranker, Scorer};
use scene_rerank::tdp::TdpTable;
use scene_rerank::twe::{train_twe, training_pairs, SkipGramConfig};
use scene_rerank::unigram::UnigramModel;

fn models_for(data: &BenchData, with_twe: bool) -> Models {
    let twe = with_twe.then(|| {
        let cfg = SkipGramConfig {
            dim: 12,
            epochs: 2,
            seed: 4,
            ..Default::default()
        };
        train_twe(&training_pairs(&data.training), &cfg, None).unwrap().0
    });
    Models {
        ulm: Some(UnigramModel::build_from_texts([data.corpus.as_str()])),
        embeddings: Some(data.embeddings.clone()),
        tdp: Some(TdpTable::fit(&data.training)),
        twe,
    }
}

#[test]
fn sweep_reports_every_cascade_and_cutoff() {
    let data = bench::generate(&BenchSpec {
        n_records: 80,
        k: 9,
        ..Default::default()
    })
    .unwrap();
    let models = models_for(&data, true);
    let ks = [2, 3, 5, 9];
    let reports = sweep_k(
        &data.dataset,
        &models,
        &RerankConfig::default(),
        &Cascade::ALL,
        &ks,
        None,
        1,
    )
    .unwrap();
    assert_eq!(reports.len(), Cascade::ALL.len() * ks.len());
    for (chunk, cascade) in reports.chunks(ks.len()).zip(Cascade::ALL) {
        let got: Vec<usize> = chunk.iter().map(|r| r.k).collect();
        assert_eq!(got, ks);
        assert!(chunk.iter().all(|r| r.cascade == cascade.name()));
        // the list denominator never shrinks as k grows
        assert!(chunk.windows(2).all(|w| w[0].counts.list_total <= w[1].counts.list_total));
        assert!(chunk.iter().all(|r| r.list_acc >= r.full_acc));
    }
    // every gold is somewhere in a 9-best list
    assert!(reports.iter().filter(|r| r.k == 9).all(|r| r.counts.list_total == 80));
}

#[test]
fn parallel_sweep_matches_serial() {
    let data = bench::generate(&BenchSpec::default()).unwrap();
    let models = models_for(&data, true);
    let run = |jobs| sweep_k(&data.dataset, &models, &RerankConfig::default(), &Cascade::ALL, &[1, 3], None, jobs).unwrap();
    assert_eq!(run(1), run(4));
}

#[test]
fn cutoff_one_is_baseline_for_every_cascade() {
    let data = bench::generate(&BenchSpec::default()).unwrap();
    let models = models_for(&data, true);
    let reports = sweep_k(&data.dataset, &models, &RerankConfig::default(), &Cascade::ALL, &[1], None, 1).unwrap();
    assert!(reports.iter().all(|r| r.full_acc == 0.4), "{reports:?}");
}

fn full_acc(data: &BenchData, models: &Models, cascade: Cascade) -> f64 {
    let cfg = RerankConfig::for_cascade(cascade);
    let outputs = Scorer::new(models, &cfg).unwrap().rerank_all(&data.dataset, None, 1);
    eval::evaluate(cascade.name(), &data.dataset, &outputs, 3, None).unwrap().full_acc
}

#[test]
fn uncorrelated_contexts_do_not_hurt_beyond_noise() {
    let n = 400;
    let data = bench::generate(&BenchSpec {
        n_records: n,
        correlation_strength: 0.0,
        seed: 21,
        ..Default::default()
    })
    .unwrap();
    let models = models_for(&data, false);
    let p1 = full_acc(&data, &models, Cascade::P1);
    let p2 = full_acc(&data, &models, Cascade::P2);
    let se = (p1 * (1.0 - p1) / n as f64).sqrt();
    assert!(p2 >= p1 - 3.0 * se, "p1 {p1}, p2 {p2}, se {se}");
}

#[test]
fn stronger_correlation_helps_more() {
    let acc = |strength| {
        let data = bench::generate(&BenchSpec {
            correlation_strength: strength,
            ..Default::default()
        })
        .unwrap();
        full_acc(&data, &models_for(&data, false), Cascade::P2)
    };
    let (weak, strong) = (acc(0.3), acc(1.0));
    assert!(strong > weak, "weak {weak}, strong {strong}");
}

#[test]
fn zero_epochs_leave_init_vectors_untouched() {
    let mut init = EmbeddingTable::new(3);
    init.insert("way", &[0.2, -0.4, 0.1]).unwrap();
    init.insert("street", &[0.5, 0.5, 0.0]).unwrap();
    let pairs = vec![("way".to_string(), "street".to_string()), ("stop".to_string(), "street".to_string())];
    let cfg = SkipGramConfig {
        dim: 3,
        epochs: 0,
        ..Default::default()
    };
    let (emb, report) = train_twe(&pairs, &cfg, Some(&init)).unwrap();
    assert!(report.epoch_losses.is_empty());
    for t in ["way", "street"] {
        assert_eq!(emb.input.get(t), init.get(t));
        assert_eq!(emb.output.get(t), init.get(t));
    }
    assert!(emb.input.contains("stop"));
}

#[test]
fn training_is_bit_identical_for_a_seed() {
    let data = bench::generate(&BenchSpec::default()).unwrap();
    let pairs = training_pairs(&data.training);
    let cfg = SkipGramConfig {
        dim: 10,
        epochs: 3,
        seed: 42,
        ..Default::default()
    };
    let (a, ra) = train_twe(&pairs, &cfg, None).unwrap();
    let (b, rb) = train_twe(&pairs, &cfg, None).unwrap();
    assert_eq!(a, b);
    assert_eq!(ra, rb);
    let (c, _) = train_twe(&pairs, &SkipGramConfig { seed: 43, ..cfg }, None).unwrap();
    assert_ne!(a, c);
}

#[test]
fn loss_falls_over_epochs() {
    let mut pairs = vec![("a".to_string(), "x".to_string()); 300];
    pairs.extend(vec![("b".to_string(), "y".to_string()); 300]);
    let cfg = SkipGramConfig {
        dim: 20,
        epochs: 4,
        ..Default::default()
    };
    let (_, report) = train_twe(&pairs, &cfg, None).unwrap();
    assert!(report.epoch_losses.first() > report.epoch_losses.last(), "{:?}", report.epoch_losses);
}

#[test]
fn large_embedding_file_loads() {
    let (n, dim) = (10_000, 300);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut file = tempfile::NamedTempFile::new().unwrap();
    {
        let mut w = std::io::BufWriter::new(file.as_file_mut());
        writeln!(w, "{n} {dim}").unwrap();
        for i in 0..n {
            write!(w, "w{i}").unwrap();
            for _ in 0..dim {
                write!(w, " {:.5}", rng.gen_range(-1.0..1.0)).unwrap();
            }
            writeln!(w).unwrap();
        }
    }
    let start = Instant::now();
    let table = EmbeddingTable::load(std::io::BufReader::new(std::fs::File::open(file.path()).unwrap())).unwrap();
    let elapsed = start.elapsed();
    assert_eq!((table.len(), table.dim()), (n, dim));
    assert!(table.similarity("w1", "w9999").is_some());
    assert!(elapsed.as_secs_f64() < 10.0, "{elapsed:?}");
}

// ---------------------------------------------------------------------------
// invariants over random records

const WORDS: [&str; 8] = ["way", "wav", "stop", "step", "kt", "to", "tq", "pay"];
const LABELS: [&str; 4] = ["street", "sign", "racket", "parking"];

fn world() -> Models {
    let mut emb = EmbeddingTable::new(4);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for t in WORDS.iter().chain(&LABELS) {
        emb.insert(t, &(0..4).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>()).unwrap();
    }
    let training: Vec<EvalRecord> = (0..30)
        .map(|i| EvalRecord {
            id: i.to_string(),
            gold: WORDS[i % 5].to_string(),
            hypotheses: HypothesisSet::new(vec![Hypothesis {
                word: WORDS[i % 5].to_string(),
                score: 1.0,
            }]),
            contexts: vec![VisualContext {
                label: LABELS[i % 3].to_string(),
                confidence: 0.9,
            }],
        })
        .collect();
    let cfg = SkipGramConfig {
        dim: 4,
        epochs: 2,
        ..Default::default()
    };
    Models {
        ulm: Some(UnigramModel::build_from_texts(["the way to stop at the way to pay"])),
        embeddings: Some(emb),
        tdp: Some(TdpTable::fit(&training)),
        twe: Some(train_twe(&training_pairs(&training), &cfg, None).unwrap().0),
    }
}

fn record_strategy() -> impl Strategy<Value = EvalRecord> {
    (
        proptest::sample::subsequence(WORDS.to_vec(), 1..=WORDS.len()),
        proptest::collection::vec(0.001f64..1.0, WORDS.len()),
        proptest::collection::vec((0..LABELS.len(), 0.0f64..=1.0), 0..4),
    )
        .prop_map(|(words, scores, ctx)| EvalRecord {
            id: "r".into(),
            gold: words[0].to_string(),
            hypotheses: HypothesisSet::new(
                words
                    .iter()
                    .zip(&scores)
                    .map(|(w, &score)| Hypothesis { word: w.to_string(), score })
                    .collect(),
            ),
            contexts: ctx
                .into_iter()
                .map(|(l, confidence)| VisualContext {
                    label: LABELS[l].to_string(),
                    confidence,
                })
                .collect(),
        })
}

proptest! {
    #[test]
    fn combined_is_baseline_times_factors(record in record_strategy(), c in 0usize..8) {
        let models = world();
        let cascade = Cascade::ALL[c];
        let cfg = RerankConfig::for_cascade(cascade);
        let out = Scorer::new(&models, &cfg).unwrap().rerank(&record, None);
        prop_assert_eq!(out.len(), record.hypotheses.k());
        for h in &out {
            let product = cascade
                .rerankers()
                .iter()
                .fold(h.baseline, |acc, &r| acc * h.factor(r).unwrap());
            prop_assert!((h.combined - product).abs() <= 1e-12 * product.abs());
            prop_assert!(h.combined > 0.0);
        }
        prop_assert!(out.windows(2).all(|w| w[0].combined >= w[1].combined));
    }

    #[test]
    fn swe_never_lowers_the_unigram_factor(record in record_strategy()) {
        let models = world();
        let lm = models.ulm.as_ref().unwrap();
        let cfg = RerankConfig::for_cascade(Cascade::P2);
        for h in Scorer::new(&models, &cfg).unwrap().rerank(&record, None) {
            prop_assert!(h.swe.unwrap() >= lm.prob(&h.word));
        }
    }

    #[test]
    fn low_confidence_contexts_are_ignored(record in record_strategy()) {
        let models = world();
        let cfg = RerankConfig::for_cascade(Cascade::P7);
        let scorer = Scorer::new(&models, &cfg).unwrap();
        let mut stripped = record.clone();
        stripped.contexts.retain(|c| c.confidence >= cfg.beta);
        prop_assert_eq!(scorer.rerank(&record, None), scorer.rerank(&stripped, None));
    }

    #[test]
    fn one_shot_equals_sequential(record in record_strategy(), c in 0usize..8) {
        let models = world();
        let cascade = Cascade::ALL[c];
        let cfg = RerankConfig::for_cascade(cascade);
        let scorer = Scorer::new(&models, &cfg).unwrap();
        let mut seq = scorer.baseline(&record, None);
        for &r in cascade.rerankers() {
            scorer.apply(r, &record, &mut seq);
        }
        let one = scorer.rerank(&record, None);
        let words = |l: &[scene_rerank::rerank::ScoredHypothesis]| l.iter().map(|h| h.word.clone()).collect::<Vec<_>>();
        prop_assert_eq!(words(&seq), words(&one));
        for (a, b) in seq.iter().zip(&one) {
            prop_assert!((a.combined - b.combined).abs() <= 1e-12 * b.combined.abs());
        }
    }

    #[test]
    fn neutral_without_contexts(mut record in record_strategy()) {
        record.contexts.clear();
        let models = world();
        let cfg = RerankConfig::for_cascade(Cascade::P6);
        for h in Scorer::new(&models, &cfg).unwrap().rerank(&record, None) {
            prop_assert_eq!(h.factor(Reranker::Tdp), Some(1.0));
            prop_assert_eq!(h.factor(Reranker::Twe), Some(1.0));
        }
    }
}

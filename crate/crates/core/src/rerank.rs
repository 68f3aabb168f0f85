//! Re-ranker scores and their multiplicative cascades.
//!
//! Every hypothesis ends up with `combined = baseline × Π factor`, one factor
//! per active re-ranker:
//!
//! | re-ranker | factor                                                      | without usable context |
//! |-----------|-------------------------------------------------------------|------------------------|
//! | ULM       | `P(w)`                                                      | n/a                    |
//! | SWE       | `P(w)^α`, `α = ((1 - sim) / (1 + sim))^(1 - P(c))`          | `P(w)`                 |
//! | TDP       | `count(w, c) / count(c)`                                    | `1`                    |
//! | TWE       | `(tanh(sim) + 1) / (2 P(c))`                                | `1`                    |
//!
//! Combined scores are not renormalized and the TWE factor can exceed one,
//! so `combined` is a ranking key, not a probability.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{EvalRecord, VisualContext};
use crate::embedding::EmbeddingTable;
use crate::error::{Error, Result};
use crate::tdp::TdpTable;
use crate::twe::TrainedEmbeddings;
use crate::unigram::UnigramModel;

pub const DEFAULT_BETA: f64 = 0.05;
pub const DEFAULT_MAX_CONTEXTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reranker {
    Ulm,
    Swe,
    Tdp,
    Twe,
}

impl Reranker {
    pub fn name(self) -> &'static str {
        match self {
            Reranker::Ulm => "ulm",
            Reranker::Swe => "swe",
            Reranker::Tdp => "tdp",
            Reranker::Twe => "twe",
        }
    }
}

impl fmt::Display for Reranker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The evaluated combinations. `Baseline` applies no re-ranker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cascade {
    Baseline,
    /// BL × ULM
    P1,
    /// BL × SWE
    P2,
    /// BL × TDP
    P3,
    /// BL × TWE
    P4,
    /// BL × SWE × TDP
    P5,
    /// BL × TDP × TWE
    P6,
    /// BL × SWE × TDP × TWE
    P7,
}

impl Cascade {
    pub const ALL: [Cascade; 8] = [
        Cascade::Baseline,
        Cascade::P1,
        Cascade::P2,
        Cascade::P3,
        Cascade::P4,
        Cascade::P5,
        Cascade::P6,
        Cascade::P7,
    ];

    pub fn rerankers(self) -> &'static [Reranker] {
        use Reranker::*;
        match self {
            Cascade::Baseline => &[],
            Cascade::P1 => &[Ulm],
            Cascade::P2 => &[Swe],
            Cascade::P3 => &[Tdp],
            Cascade::P4 => &[Twe],
            Cascade::P5 => &[Swe, Tdp],
            Cascade::P6 => &[Tdp, Twe],
            Cascade::P7 => &[Swe, Tdp, Twe],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Cascade::Baseline => "bl",
            Cascade::P1 => "p1",
            Cascade::P2 => "p2",
            Cascade::P3 => "p3",
            Cascade::P4 => "p4",
            Cascade::P5 => "p5",
            Cascade::P6 => "p6",
            Cascade::P7 => "p7",
        }
    }
}

impl fmt::Display for Cascade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Cascade {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Cascade::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::config(format!("unknown cascade {s:?}; expected bl or p1..p7")))
    }
}

/// How TDP and TWE choose their context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ContextMode {
    /// Each re-ranker picks the surviving context most related to the word
    /// under its own measure.
    #[default]
    PerReranker,
    /// TDP and TWE reuse the context SWE's embedding similarity picked.
    Shared,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RerankConfig {
    /// Minimum classifier confidence for a context to be considered.
    pub beta: f64,
    /// At most this many highest-confidence contexts survive the threshold.
    pub max_contexts: usize,
    pub rerankers: Vec<Reranker>,
    /// Clamp negative cosines to zero before computing the SWE exponent.
    pub clamp_negative_sim: bool,
    pub context_mode: ContextMode,
}

impl Default for RerankConfig {
    fn default() -> Self {
        RerankConfig {
            beta: DEFAULT_BETA,
            max_contexts: DEFAULT_MAX_CONTEXTS,
            rerankers: Vec::new(),
            clamp_negative_sim: true,
            context_mode: ContextMode::PerReranker,
        }
    }
}

impl RerankConfig {
    pub fn for_cascade(cascade: Cascade) -> Self {
        RerankConfig {
            rerankers: cascade.rerankers().to_vec(),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::config(format!("beta {} outside [0, 1]", self.beta)));
        }
        if self.max_contexts == 0 {
            return Err(Error::config("max_contexts must be at least 1"));
        }
        Ok(())
    }
}

/// Models a cascade may draw on. Only those needed by the configured
/// re-rankers have to be present.
#[derive(Debug, Clone, Default)]
pub struct Models {
    pub ulm: Option<UnigramModel>,
    pub embeddings: Option<EmbeddingTable>,
    pub tdp: Option<TdpTable>,
    pub twe: Option<TrainedEmbeddings>,
}

/// One re-ranked hypothesis with its full score breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredHypothesis {
    pub word: String,
    /// Product of the baseline score and every active factor.
    #[serde(rename = "score")]
    pub combined: f64,
    /// 0-based position in the baseline list.
    pub rank: usize,
    pub baseline: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ulm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub swe: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tdp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twe: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub swe_context: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tdp_context: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twe_context: Option<String>,
}

impl ScoredHypothesis {
    fn baseline_only(word: &str, rank: usize, baseline: f64) -> Self {
        ScoredHypothesis {
            word: word.to_string(),
            combined: baseline,
            rank,
            baseline,
            ulm: None,
            swe: None,
            tdp: None,
            twe: None,
            swe_context: None,
            tdp_context: None,
            twe_context: None,
        }
    }

    pub fn factor(&self, reranker: Reranker) -> Option<f64> {
        match reranker {
            Reranker::Ulm => self.ulm,
            Reranker::Swe => self.swe,
            Reranker::Tdp => self.tdp,
            Reranker::Twe => self.twe,
        }
    }

    fn record_factor(&mut self, reranker: Reranker, factor: Factor) {
        let (slot, context) = match reranker {
            Reranker::Ulm => (&mut self.ulm, None),
            Reranker::Swe => (&mut self.swe, Some(&mut self.swe_context)),
            Reranker::Tdp => (&mut self.tdp, Some(&mut self.tdp_context)),
            Reranker::Twe => (&mut self.twe, Some(&mut self.twe_context)),
        };
        *slot = Some(factor.value);
        if let Some(context) = context {
            *context = factor.context;
        }
    }
}

/// Descending by combined score, then by baseline score; the sort is stable so
/// remaining ties keep baseline order.
pub fn sort_scored(list: &mut [ScoredHypothesis]) {
    list.sort_by(|a, b| {
        b.combined
            .total_cmp(&a.combined)
            .then(b.baseline.total_cmp(&a.baseline))
    });
}

/// Contexts with confidence of at least `beta`, highest confidence first,
/// capped at `max_contexts`.
pub fn surviving_contexts(contexts: &[VisualContext], beta: f64, max_contexts: usize) -> Vec<&VisualContext> {
    let mut survivors: Vec<&VisualContext> = contexts.iter().filter(|c| c.confidence >= beta).collect();
    survivors.sort_by(|a, b| b.confidence.total_cmp(&a.confidence));
    survivors.truncate(max_contexts);
    survivors
}

/// Picks the surviving context most related to the word. Contexts whose
/// relatedness is unknown never win; if none is known the result is `None`.
/// Ties go to the higher-confidence context.
pub fn select_context(
    contexts: &[VisualContext],
    relatedness: impl Fn(&str) -> Option<f64>,
    beta: f64,
    max_contexts: usize,
) -> Option<(&VisualContext, f64)> {
    let mut best: Option<(&VisualContext, f64)> = None;
    for ctx in surviving_contexts(contexts, beta, max_contexts) {
        if let Some(r) = relatedness(&ctx.label) {
            if best.is_none_or(|(_, b)| r > b) {
                best = Some((ctx, r));
            }
        }
    }
    best
}

/// `P(w)^α` with `α = ((1 - sim) / (1 + sim))^(1 - P(c))`.
///
/// With `clamp_negative` the similarity is clamped to `[0, 1]`, so the result
/// is never below `P(w)`. Without it only `[-1, 1]` is enforced.
pub fn swe_probability(p_word: f64, sim: f64, p_context: f64, clamp_negative: bool) -> f64 {
    let sim = if clamp_negative {
        sim.clamp(0.0, 1.0)
    } else {
        sim.clamp(-1.0, 1.0)
    };
    if sim >= 1.0 {
        return 1.0;
    }
    if sim == 0.0 {
        return p_word;
    }
    let alpha = ((1.0 - sim) / (1.0 + sim)).powf(1.0 - p_context);
    p_word.powf(alpha)
}

/// `(tanh(sim) + 1) / (2 P(c))`. Not bounded by one.
pub fn twe_probability(sim: f64, p_context: f64) -> f64 {
    (sim.tanh() + 1.0) / (2.0 * p_context)
}

/// A factor together with the context it was computed against.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub value: f64,
    pub context: Option<String>,
}

impl Factor {
    fn plain(value: f64) -> Self {
        Factor { value, context: None }
    }

    fn against(value: f64, ctx: &VisualContext) -> Self {
        Factor {
            value,
            context: Some(ctx.label.clone()),
        }
    }
}

/// Validated pairing of models and configuration; scores records.
#[derive(Debug, Clone, Copy)]
pub struct Scorer<'a> {
    models: &'a Models,
    cfg: &'a RerankConfig,
}

fn missing(reranker: Reranker, model: &str) -> Error {
    Error::config(format!("{reranker} re-ranker needs {model}"))
}

impl<'a> Scorer<'a> {
    pub fn new(models: &'a Models, cfg: &'a RerankConfig) -> Result<Self> {
        cfg.validate()?;
        for &r in &cfg.rerankers {
            match r {
                Reranker::Ulm if models.ulm.is_none() => return Err(missing(r, "a unigram model")),
                Reranker::Swe if models.ulm.is_none() => return Err(missing(r, "a unigram model")),
                Reranker::Swe if models.embeddings.is_none() => return Err(missing(r, "word embeddings")),
                Reranker::Tdp if models.tdp.is_none() => return Err(missing(r, "a TDP table")),
                Reranker::Twe if models.twe.is_none() => return Err(missing(r, "trained embeddings")),
                _ => {}
            }
        }
        if cfg.context_mode == ContextMode::Shared && models.embeddings.is_none() {
            return Err(Error::config("shared context selection needs word embeddings"));
        }
        Ok(Scorer { models, cfg })
    }

    pub fn config(&self) -> &RerankConfig {
        self.cfg
    }

    fn select<'c>(
        &self,
        contexts: &'c [VisualContext],
        relatedness: impl Fn(&str) -> Option<f64>,
    ) -> Option<(&'c VisualContext, f64)> {
        select_context(contexts, relatedness, self.cfg.beta, self.cfg.max_contexts)
    }

    fn ulm(&self) -> &UnigramModel {
        self.models.ulm.as_ref().expect("validated")
    }

    /// Context chosen by embedding similarity, used by SWE and by the shared
    /// context mode.
    fn embedding_choice<'c>(&self, word: &str, contexts: &'c [VisualContext]) -> Option<(&'c VisualContext, f64)> {
        let emb = self.models.embeddings.as_ref()?;
        self.select(contexts, |label| emb.label_similarity(word, label))
    }

    /// The factor `reranker` assigns to `word` given the record's contexts.
    pub fn factor(&self, reranker: Reranker, word: &str, contexts: &[VisualContext]) -> Factor {
        let shared = self.cfg.context_mode == ContextMode::Shared;
        match reranker {
            Reranker::Ulm => Factor::plain(self.ulm().prob(word)),
            Reranker::Swe => {
                let p_word = self.ulm().prob(word);
                match self.embedding_choice(word, contexts) {
                    Some((ctx, sim)) => Factor::against(
                        swe_probability(p_word, sim, ctx.confidence, self.cfg.clamp_negative_sim),
                        ctx,
                    ),
                    None => Factor::plain(p_word),
                }
            }
            Reranker::Tdp => {
                let tdp = self.models.tdp.as_ref().expect("validated");
                let choice = if shared {
                    self.embedding_choice(word, contexts)
                        .map(|(ctx, _)| (ctx, tdp.prob(word, &ctx.label)))
                } else {
                    self.select(contexts, |label| Some(tdp.prob(word, label)))
                };
                match choice {
                    Some((ctx, p)) => Factor::against(p, ctx),
                    None => Factor::plain(1.0),
                }
            }
            Reranker::Twe => {
                let twe = self.models.twe.as_ref().expect("validated");
                let choice = if shared {
                    self.embedding_choice(word, contexts)
                        .and_then(|(ctx, _)| twe.similarity(word, &ctx.label).map(|s| (ctx, s)))
                } else {
                    self.select(contexts, |label| twe.similarity(word, label))
                };
                match choice {
                    Some((ctx, _)) if ctx.confidence <= 0.0 => {
                        log::debug!("TWE context {:?} has zero confidence; using neutral factor", ctx.label);
                        Factor::plain(1.0)
                    }
                    Some((ctx, sim)) => Factor::against(twe_probability(sim, ctx.confidence), ctx),
                    None => Factor::plain(1.0),
                }
            }
        }
    }

    /// The top `k` baseline hypotheses (all when `k` is `None`) with no factor
    /// applied, in baseline order.
    pub fn baseline(&self, record: &EvalRecord, k: Option<usize>) -> Vec<ScoredHypothesis> {
        let hyps = match k {
            Some(k) => record.hypotheses.top(k),
            None => record.hypotheses.as_slice(),
        };
        hyps.iter()
            .enumerate()
            .map(|(rank, h)| ScoredHypothesis::baseline_only(&h.word, rank, h.score))
            .collect()
    }

    /// Multiplies one more re-ranker into an already scored list and re-sorts.
    pub fn apply(&self, reranker: Reranker, record: &EvalRecord, list: &mut [ScoredHypothesis]) {
        for h in list.iter_mut() {
            let f = self.factor(reranker, &h.word, &record.contexts);
            h.combined *= f.value;
            h.record_factor(reranker, f);
        }
        sort_scored(list);
    }

    /// Scores the top `k` hypotheses with every configured re-ranker in one
    /// product and returns them best first.
    pub fn rerank(&self, record: &EvalRecord, k: Option<usize>) -> Vec<ScoredHypothesis> {
        let mut list = self.baseline(record, k);
        for h in &mut list {
            let mut combined = h.baseline;
            for &r in &self.cfg.rerankers {
                let f = self.factor(r, &h.word, &record.contexts);
                combined *= f.value;
                h.record_factor(r, f);
            }
            h.combined = combined;
        }
        sort_scored(&mut list);
        list
    }

    /// Re-ranks every record. `jobs > 1` spreads records over a thread pool;
    /// output order and content do not depend on `jobs`.
    pub fn rerank_all(&self, records: &[EvalRecord], k: Option<usize>, jobs: usize) -> Vec<Vec<ScoredHypothesis>> {
        if jobs <= 1 {
            return records.iter().map(|r| self.rerank(r, k)).collect();
        }
        let run = || records.par_iter().map(|r| self.rerank(r, k)).collect();
        match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            Ok(pool) => pool.install(run),
            Err(e) => {
                log::warn!("thread pool unavailable ({e}); re-ranking serially");
                records.iter().map(|r| self.rerank(r, k)).collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Hypothesis, HypothesisSet};

    fn ctx(label: &str, confidence: f64) -> VisualContext {
        VisualContext {
            label: label.to_string(),
            confidence,
        }
    }

    fn record(hyps: &[(&str, f64)], contexts: Vec<VisualContext>) -> EvalRecord {
        EvalRecord {
            id: "r".into(),
            gold: hyps[0].0.into(),
            hypotheses: HypothesisSet::new(
                hyps.iter()
                    .map(|(w, p)| Hypothesis {
                        word: w.to_string(),
                        score: *p,
                    })
                    .collect(),
            ),
            contexts,
        }
    }

    #[test]
    fn select_context_picks_most_related_survivor() {
        let contexts = vec![ctx("street", 0.6), ctx("umbrella", 0.3), ctx("sky", 0.05)];
        let sims = |l: &str| match l {
            "street" => Some(0.17),
            "umbrella" => Some(0.02),
            "sky" => Some(0.9),
            _ => None,
        };
        let (c, s) = select_context(&contexts, sims, 0.1, 5).unwrap();
        assert_eq!((c.label.as_str(), s), ("street", 0.17));

        assert!(select_context(&contexts, sims, 0.7, 5).is_none());
        let (c, _) = select_context(&contexts, |_| Some(-0.9), 0.5, 5).unwrap();
        assert_eq!(c.label, "street");
        assert!(select_context(&contexts, |_| None, 0.0, 5).is_none());
        // Only the highest-confidence context survives the cap.
        let (c, _) = select_context(&contexts, sims, 0.0, 1).unwrap();
        assert_eq!(c.label, "street");
    }

    #[test]
    fn absent_relatedness_never_wins() {
        let contexts = vec![ctx("a", 0.9), ctx("b", 0.5)];
        let (c, _) = select_context(&contexts, |l| (l == "b").then_some(-0.5), 0.1, 5).unwrap();
        assert_eq!(c.label, "b");
    }

    #[test]
    fn swe_examples() {
        assert_eq!(swe_probability(0.5, 0.0, 0.8, true), 0.5);
        assert_eq!(swe_probability(0.3, 1.0, 0.2, true), 1.0);
        let alpha = (1.0f64 / 3.0).powf(0.3);
        assert!((alpha - 0.71923).abs() < 1e-5);
        assert!((swe_probability(0.01, 0.5, 0.7, true) - 0.03644).abs() < 1e-5);
    }

    #[test]
    fn negative_similarity_clamping() {
        assert_eq!(swe_probability(0.2, -0.4, 0.5, true), 0.2);
        assert!(swe_probability(0.2, -0.4, 0.5, false) < 0.2);
    }

    #[test]
    fn twe_examples() {
        assert!((twe_probability(0.5, 0.5) - 1.462117).abs() < 1e-6);
        assert_eq!(twe_probability(0.0, 0.5), 1.0);
    }

    fn ulm_models() -> Models {
        // w2 is 10^4 times commoner than w1
        let mut text = String::from("w1 ");
        text.push_str(&"w2 ".repeat(10_000));
        Models {
            ulm: Some(UnigramModel::build_from_texts([text.as_str()])),
            ..Default::default()
        }
    }

    #[test]
    fn ulm_cascade_promotes_common_word() {
        let models = ulm_models();
        let cfg = RerankConfig::for_cascade(Cascade::P1);
        let scorer = Scorer::new(&models, &cfg).unwrap();
        let out = scorer.rerank(&record(&[("w1", 0.5), ("w2", 0.4)], vec![]), None);
        assert_eq!(out[0].word, "w2");
        assert_eq!(out[0].rank, 1);
        assert_eq!(out[0].combined, 0.4 * out[0].ulm.unwrap());
    }

    #[test]
    fn identity_cascade_keeps_baseline_order() {
        let models = Models::default();
        let cfg = RerankConfig::for_cascade(Cascade::Baseline);
        let scorer = Scorer::new(&models, &cfg).unwrap();
        let rec = record(&[("a", 0.2), ("b", 0.5), ("c", 0.2)], vec![]);
        let words: Vec<_> = scorer.rerank(&rec, None).into_iter().map(|h| h.word).collect();
        assert_eq!(words, ["b", "a", "c"]);
    }

    #[test]
    fn swe_without_contexts_equals_ulm() {
        let mut models = ulm_models();
        let mut emb = EmbeddingTable::new(2);
        emb.insert("w1", &[1.0, 0.0]).unwrap();
        emb.insert("street", &[1.0, 0.1]).unwrap();
        models.embeddings = Some(emb);
        let rec = record(&[("w1", 0.5), ("w2", 0.4), ("zz", 0.1)], vec![]);
        let p1_cfg = RerankConfig::for_cascade(Cascade::P1);
        let p2_cfg = RerankConfig::for_cascade(Cascade::P2);
        let p1 = Scorer::new(&models, &p1_cfg).unwrap().rerank(&rec, None);
        let p2 = Scorer::new(&models, &p2_cfg).unwrap().rerank(&rec, None);
        assert_eq!(
            p1.iter().map(|h| (&h.word, h.combined)).collect::<Vec<_>>(),
            p2.iter().map(|h| (&h.word, h.combined)).collect::<Vec<_>>()
        );
    }

    #[test]
    fn missing_models_rejected() {
        let models = Models::default();
        for c in [Cascade::P1, Cascade::P2, Cascade::P3, Cascade::P4] {
            assert!(Scorer::new(&models, &RerankConfig::for_cascade(c)).is_err(), "{c}");
        }
        let bad_beta = RerankConfig {
            beta: 1.5,
            ..Default::default()
        };
        assert!(Scorer::new(&models, &bad_beta).is_err());
    }

    #[test]
    fn tdp_and_twe_neutral_without_context() {
        let models = Models {
            tdp: Some(TdpTable::default()),
            twe: Some(TrainedEmbeddings {
                input: EmbeddingTable::new(2),
                output: EmbeddingTable::new(2),
                pairing: Default::default(),
            }),
            ..Default::default()
        };
        let cfg = RerankConfig::for_cascade(Cascade::P6);
        let scorer = Scorer::new(&models, &cfg).unwrap();
        let rec = record(&[("a", 0.6), ("b", 0.3)], vec![ctx("low", 0.01)]);
        let out = scorer.rerank(&rec, None);
        assert_eq!(out[0].combined, 0.6);
        assert_eq!(out[0].tdp, Some(1.0));
        assert_eq!(out[0].twe, Some(1.0));
        assert_eq!(out[0].tdp_context, None);
    }

    #[test]
    fn shared_context_reuses_embedding_choice() {
        let mut emb = EmbeddingTable::new(2);
        emb.insert("way", &[1.0, 0.0]).unwrap();
        emb.insert("street", &[1.0, 0.2]).unwrap();
        emb.insert("sign", &[0.0, 1.0]).unwrap();
        let train = [record(&[("way", 1.0)], vec![ctx("sign", 0.9)])];
        let models = Models {
            embeddings: Some(emb),
            tdp: Some(TdpTable::fit(&train)),
            ..Default::default()
        };
        let rec = record(&[("way", 0.5)], vec![ctx("street", 0.8), ctx("sign", 0.6)]);
        let per = RerankConfig::for_cascade(Cascade::P3);
        let shared = RerankConfig {
            context_mode: ContextMode::Shared,
            ..per.clone()
        };
        let a = Scorer::new(&models, &per).unwrap().rerank(&rec, None);
        let b = Scorer::new(&models, &shared).unwrap().rerank(&rec, None);
        assert_eq!(a[0].tdp_context.as_deref(), Some("sign"));
        assert_eq!(a[0].tdp, Some(1.0));
        assert_eq!(b[0].tdp_context.as_deref(), Some("street"));
        assert_eq!(b[0].tdp, Some(crate::tdp::DEFAULT_FLOOR));
    }

    #[test]
    fn cascade_names_parse() {
        for c in Cascade::ALL {
            assert_eq!(c.name().parse::<Cascade>().unwrap(), c);
        }
        assert_eq!("P5".parse::<Cascade>().unwrap(), Cascade::P5);
        assert!("p8".parse::<Cascade>().is_err());
    }

    #[test]
    fn scored_hypothesis_json_round_trip() {
        let models = ulm_models();
        let cfg = RerankConfig::for_cascade(Cascade::P1);
        let out = Scorer::new(&models, &cfg)
            .unwrap()
            .rerank(&record(&[("w1", 0.5), ("w2", 0.4)], vec![]), None);
        let json = serde_json::to_string(&out).unwrap();
        assert!(json.contains("\"score\""));
        assert!(!json.contains("swe"));
        let back: Vec<ScoredHypothesis> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, out);
    }
}

//! Corpus-scale pair generation and the random augmentation baseline.
//!
//! Every pair draws from its own ChaCha8 stream seeded by mixing the corpus
//! seed with the sentence index and the attempt number, so output does not
//! depend on how sentences are spread over worker threads.

use std::collections::{BTreeMap, BTreeSet};

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rules::{apply_rule, candidates, RuleContext, RuleResources};
use crate::tagging::{identify_roles, RoleSpans};
use crate::text::{diff_edits, normalize_edits, CorpusPair, EditSpan, ErrorType, FineType, TaggedSentence};
use crate::{Error, Result};

pub const AUGMENT_RULE_ID: &str = "random-augment";

/// Sentences handed to the worker pool at a time.
const BATCH: usize = 2048;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the stream used for attempt `attempt` on sentence `index`.
pub fn derive_seed(seed: u64, index: u64, attempt: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ index) ^ attempt)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub seed: u64,
    pub enabled_rules: BTreeSet<FineType>,
    pub per_sentence: usize,
    pub combine_max: usize,
    /// Rules absent from the map weigh 1.
    pub rule_weights: BTreeMap<FineType, f64>,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            enabled_rules: FineType::ALL.into_iter().collect(),
            per_sentence: 1,
            combine_max: 1,
            rule_weights: BTreeMap::new(),
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.combine_max == 0 {
            return Err(Error::Config("combine_max must be at least 1".into()));
        }
        if self.per_sentence == 0 {
            return Err(Error::Config("per_sentence must be at least 1".into()));
        }
        if self.enabled_rules.is_empty() {
            return Err(Error::Config("no rule is enabled".into()));
        }
        if let Some((rule, w)) = self.rule_weights.iter().find(|(_, w)| !w.is_finite() || **w < 0.0) {
            return Err(Error::Config(format!("weight of {rule} must be a finite number >= 0, got {w}")));
        }
        Ok(())
    }

    pub fn weight(&self, rule: FineType) -> f64 {
        self.rule_weights.get(&rule).copied().unwrap_or(1.0)
    }
}

/// Enabled rules with positive weight that have at least one site in `sentence`.
fn applicable(
    sentence: &TaggedSentence,
    roles: &RoleSpans,
    resources: &RuleResources,
    config: &GenConfig,
    exclude: &[FineType],
) -> Vec<(FineType, f64)> {
    let ctx = RuleContext {
        sentence,
        roles,
        resources,
    };
    config
        .enabled_rules
        .iter()
        .map(|&r| (r, config.weight(r)))
        .filter(|&(r, w)| w > 0.0 && !exclude.contains(&r) && !candidates(r, &ctx).is_empty())
        .collect()
}

/// Generates the first pair for `sentence`.
pub fn generate_pair(
    sentence: &TaggedSentence,
    roles: &RoleSpans,
    resources: &RuleResources,
    config: &GenConfig,
    sentence_index: u64,
) -> Option<CorpusPair> {
    generate_attempt(sentence, roles, resources, config, sentence_index, 0)
}

/// Generates pair number `attempt` for `sentence`: up to `combine_max`
/// distinct rules, drawn by weight among those that can fire on the current
/// text, applied one after another with re-tagging in between.
pub fn generate_attempt(
    sentence: &TaggedSentence,
    roles: &RoleSpans,
    resources: &RuleResources,
    config: &GenConfig,
    sentence_index: u64,
    attempt: u64,
) -> Option<CorpusPair> {
    if sentence.is_empty() {
        return None;
    }
    let seed = derive_seed(config.seed, sentence_index, attempt);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fired: Vec<FineType> = Vec::new();
    let mut types: Vec<ErrorType> = Vec::new();
    let mut edits: Vec<EditSpan> = Vec::new();
    let mut current = sentence.clone();
    let mut current_roles = roles.clone();
    while fired.len() < config.combine_max {
        let options = applicable(&current, &current_roles, resources, config, &fired);
        if options.is_empty() {
            break;
        }
        let rule = if options.len() == 1 {
            options[0].0
        } else {
            let dist = WeightedIndex::new(options.iter().map(|o| o.1)).expect("positive weights");
            options[dist.sample(&mut rng)].0
        };
        let outcome = apply_rule(rule, &current, &current_roles, resources, &mut rng)?;
        fired.push(rule);
        types.push(outcome.fine_type);
        edits = outcome.edits.clone();
        current = outcome.tagged();
        current_roles = identify_roles(&current);
    }
    if fired.is_empty() {
        return None;
    }
    if fired.len() > 1 {
        edits = diff_edits(&current.text, &sentence.text);
    }
    Some(CorpusPair {
        id: format!("{sentence_index}-{attempt}"),
        incorrect: current.text,
        correct: sentence.text.clone(),
        edits,
        error_types: types,
        rule_id: fired.iter().map(|f| f.as_str()).collect::<Vec<_>>().join("+"),
        seed,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationReport {
    pub sentences_read: u64,
    pub pairs_emitted: u64,
    /// Applications per rule id; a combined pair counts once for each of its rules.
    pub rule_counts: BTreeMap<String, u64>,
    /// Attempts that produced no pair.
    pub skipped: u64,
}

impl GenerationReport {
    fn record(&mut self, pair: &CorpusPair) {
        self.pairs_emitted += 1;
        for t in &pair.error_types {
            *self.rule_counts.entry(t.fine.as_str().to_string()).or_default() += 1;
        }
    }

    pub fn merge(&mut self, other: GenerationReport) {
        self.sentences_read += other.sentences_read;
        self.pairs_emitted += other.pairs_emitted;
        self.skipped += other.skipped;
        for (k, v) in other.rule_counts {
            *self.rule_counts.entry(k).or_default() += v;
        }
    }
}

/// A worker pool of `workers` threads (`0` = one per core).
pub fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))
}

/// Reads sentences in batches, generates in parallel and hands pairs to `sink`
/// in input order. `workers == 0` uses one thread per core.
pub fn generate_corpus<I, F>(
    corpus: I,
    config: &GenConfig,
    resources: &RuleResources,
    workers: usize,
    mut sink: F,
) -> Result<GenerationReport>
where
    I: IntoIterator<Item = Result<TaggedSentence>>,
    F: FnMut(&CorpusPair) -> Result<()>,
{
    config.validate()?;
    let pool = thread_pool(workers)?;
    let mut report = GenerationReport::default();
    let mut input = corpus.into_iter();
    let mut batch: Vec<TaggedSentence> = Vec::with_capacity(BATCH);
    loop {
        batch.clear();
        for item in input.by_ref() {
            batch.push(item?);
            if batch.len() == BATCH {
                break;
            }
        }
        if batch.is_empty() {
            break;
        }
        let base = report.sentences_read;
        let results: Vec<Vec<Option<CorpusPair>>> = pool.install(|| {
            batch
                .par_iter()
                .enumerate()
                .map(|(k, s)| {
                    let roles = identify_roles(s);
                    (0..config.per_sentence as u64)
                        .map(|j| generate_attempt(s, &roles, resources, config, base + k as u64, j))
                        .collect()
                })
                .collect()
        });
        report.sentences_read += batch.len() as u64;
        for pair in results.into_iter().flatten() {
            match pair {
                Some(p) => {
                    sink(&p)?;
                    report.record(&p);
                }
                None => report.skipped += 1,
            }
        }
    }
    Ok(report)
}

/// In-memory convenience wrapper around [`generate_corpus`].
pub fn generate_all(
    corpus: &[TaggedSentence],
    config: &GenConfig,
    resources: &RuleResources,
    workers: usize,
) -> Result<(Vec<CorpusPair>, GenerationReport)> {
    let mut pairs = Vec::new();
    let report = generate_corpus(corpus.iter().cloned().map(Ok), config, resources, workers, |p| {
        pairs.push(p.clone());
        Ok(())
    })?;
    Ok((pairs, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentConfig {
    pub p_keep: f64,
    pub p_insert: f64,
    pub p_replace: f64,
    pub p_delete: f64,
    pub word_pool: Vec<String>,
    pub seed: u64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            p_keep: 0.7,
            p_insert: 0.1,
            p_replace: 0.1,
            p_delete: 0.1,
            word_pool: Vec::new(),
            seed: 0,
        }
    }
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<()> {
        let ps = [self.p_keep, self.p_insert, self.p_replace, self.p_delete];
        if ps.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Config(format!("augmentation probabilities must lie in [0, 1], got {ps:?}")));
        }
        let sum: f64 = ps.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("augmentation probabilities sum to {sum}, expected 1")));
        }
        if self.word_pool.is_empty() && (self.p_insert > 0.0 || self.p_replace > 0.0) {
            return Err(Error::Config("word pool is empty but insert/replace probability is nonzero".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AugmentOp {
    Keep,
    Insert,
    Replace,
    Delete,
}

impl AugmentOp {
    fn draw(u: f64, c: &AugmentConfig) -> AugmentOp {
        if u < c.p_keep {
            AugmentOp::Keep
        } else if u < c.p_keep + c.p_insert {
            AugmentOp::Insert
        } else if u < c.p_keep + c.p_insert + c.p_replace {
            AugmentOp::Replace
        } else {
            AugmentOp::Delete
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentCounts {
    pub keep: u64,
    pub insert: u64,
    pub replace: u64,
    pub delete: u64,
}

impl AugmentCounts {
    fn add(&mut self, op: AugmentOp) {
        match op {
            AugmentOp::Keep => self.keep += 1,
            AugmentOp::Insert => self.insert += 1,
            AugmentOp::Replace => self.replace += 1,
            AugmentOp::Delete => self.delete += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.keep + self.insert + self.replace + self.delete
    }

    pub fn merge(&mut self, other: AugmentCounts) {
        self.keep += other.keep;
        self.insert += other.insert;
        self.replace += other.replace;
        self.delete += other.delete;
    }
}

/// Corrupts each word independently: keep it, insert a pool word before it,
/// replace it with a pool word, or delete it.
pub fn random_augment(sentence: &TaggedSentence, config: &AugmentConfig, sentence_index: u64) -> Result<CorpusPair> {
    config.validate()?;
    Ok(augment_counted(sentence, config, sentence_index).0)
}

/// [`random_augment`] without validation, also returning the drawn operations.
pub fn augment_counted(sentence: &TaggedSentence, config: &AugmentConfig, sentence_index: u64) -> (CorpusPair, AugmentCounts) {
    let seed = derive_seed(config.seed, sentence_index, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = AugmentCounts::default();
    let mut incorrect = String::with_capacity(sentence.text.len() + 8);
    let mut pos = 0;
    let mut edits = Vec::new();
    for t in &sentence.tokens {
        let op = AugmentOp::draw(rng.gen::<f64>(), config);
        counts.add(op);
        let len = t.char_len();
        match op {
            AugmentOp::Keep => {
                incorrect.push_str(&t.surface);
                pos += len;
            }
            AugmentOp::Insert => {
                let w = &config.word_pool[rng.gen_range(0..config.word_pool.len())];
                let n = w.chars().count();
                edits.push(EditSpan::deletion(pos, pos + n));
                incorrect.push_str(w);
                incorrect.push_str(&t.surface);
                pos += n + len;
            }
            AugmentOp::Replace => {
                let w = &config.word_pool[rng.gen_range(0..config.word_pool.len())];
                let n = w.chars().count();
                if *w != t.surface {
                    edits.push(EditSpan::new(pos, pos + n, t.surface.clone()));
                }
                incorrect.push_str(w);
                pos += n;
            }
            AugmentOp::Delete => edits.push(EditSpan::insertion(pos, t.surface.clone())),
        }
    }
    let edits = normalize_edits(edits);
    let pair = CorpusPair {
        id: format!("{sentence_index}-0"),
        incorrect,
        correct: sentence.text.clone(),
        edits,
        error_types: Vec::new(),
        rule_id: AUGMENT_RULE_ID.to_string(),
        seed,
    };
    (pair, counts)
}

/// Parallel, order-preserving [`random_augment`] over a sentence stream.
pub fn augment_corpus<I, F>(corpus: I, config: &AugmentConfig, workers: usize, mut sink: F) -> Result<AugmentCounts>
where
    I: IntoIterator<Item = Result<TaggedSentence>>,
    F: FnMut(&CorpusPair) -> Result<()>,
{
    config.validate()?;
    let pool = thread_pool(workers)?;
    let mut counts = AugmentCounts::default();
    let mut index = 0u64;
    let mut input = corpus.into_iter();
    let mut batch: Vec<TaggedSentence> = Vec::with_capacity(BATCH);
    loop {
        batch.clear();
        for item in input.by_ref() {
            batch.push(item?);
            if batch.len() == BATCH {
                break;
            }
        }
        if batch.is_empty() {
            break;
        }
        let results: Vec<(CorpusPair, AugmentCounts)> = pool.install(|| {
            batch
                .par_iter()
                .enumerate()
                .map(|(k, s)| augment_counted(s, config, index + k as u64))
                .collect()
        });
        index += batch.len() as u64;
        for (pair, c) in results {
            sink(&pair)?;
            counts.merge(c);
        }
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{apply_edits, CoarseType, PosTag};
    use PosTag::*;

    fn sentence(parts: &[(&str, PosTag)]) -> TaggedSentence {
        TaggedSentence::from_parts(parts.iter().map(|&(w, t)| (w, t)))
    }

    fn generate(s: &TaggedSentence, config: &GenConfig, index: u64) -> Option<CorpusPair> {
        generate_pair(s, &identify_roles(s), &RuleResources::seed(), config, index)
    }

    #[test]
    fn redundant_only_sentence() {
        let s = sentence(&[("非常", Adv)]);
        for index in 0..10 {
            let p = generate(&s, &GenConfig::default(), index).unwrap();
            assert_eq!(p.error_types, vec![FineType::MultiWords.error_type()]);
            assert_eq!(p.error_types[0].coarse, CoarseType::RedundantComponent);
            assert_eq!(p.rule_id, "MultiWords");
            assert_eq!(apply_edits(&p.incorrect, &p.edits).unwrap(), "非常");
        }
    }

    #[test]
    fn nothing_applies() {
        let s = sentence(&[("嗯", X)]);
        assert!(generate(&s, &GenConfig::default(), 0).is_none());
        assert!(generate(&TaggedSentence::default(), &GenConfig::default(), 0).is_none());
    }

    #[test]
    fn two_rules_stacked() {
        let s = sentence(&[("他", Pron), ("非常", Adv), ("喜欢", Verb), ("苹果", Noun)]);
        let config = GenConfig {
            combine_max: 2,
            enabled_rules: [FineType::MultiWords, FineType::LackSubject].into_iter().collect(),
            ..GenConfig::default()
        };
        let p = generate(&s, &config, 3).unwrap();
        assert_eq!(p.error_types.len(), 2);
        assert_eq!(apply_edits(&p.incorrect, &p.edits).unwrap(), s.text);
        let ids: BTreeSet<&str> = p.rule_id.split('+').collect();
        assert_eq!(ids, ["LackSubject", "MultiWords"].into_iter().collect());
        assert!(!p.incorrect.contains('他'));
    }

    #[test]
    fn config_validation() {
        assert!(GenConfig::default().validate().is_ok());
        let bad = GenConfig {
            combine_max: 0,
            ..GenConfig::default()
        };
        assert_eq!(bad.validate().unwrap_err().kind(), crate::ErrorKind::Config);
        let mut weights = GenConfig::default();
        weights.rule_weights.insert(FineType::LackObject, -1.0);
        assert!(weights.validate().is_err());
    }

    #[test]
    fn zero_weight_disables() {
        let s = sentence(&[("非常", Adv)]);
        let mut config = GenConfig::default();
        config.rule_weights.insert(FineType::MultiWords, 0.0);
        assert!(generate(&s, &config, 0).is_none());
    }

    #[test]
    fn empty_corpus_report() {
        let (pairs, report) = generate_all(&[], &GenConfig::default(), &RuleResources::seed(), 2).unwrap();
        assert!(pairs.is_empty());
        assert_eq!(report, GenerationReport::default());
    }

    fn augment_config(p: [f64; 4]) -> AugmentConfig {
        AugmentConfig {
            p_keep: p[0],
            p_insert: p[1],
            p_replace: p[2],
            p_delete: p[3],
            word_pool: vec!["书".into(), "跑步".into()],
            seed: 9,
        }
    }

    #[test]
    fn augment_all_keep() {
        let s = sentence(&[("他", Pron), ("喜欢", Verb), ("苹果", Noun)]);
        let p = random_augment(&s, &augment_config([1.0, 0.0, 0.0, 0.0]), 0).unwrap();
        assert_eq!(p.incorrect, p.correct);
        assert!(p.edits.is_empty());
        assert!(p.error_types.is_empty());
        assert_eq!(p.rule_id, AUGMENT_RULE_ID);
    }

    #[test]
    fn augment_single_word_delete() {
        let s = sentence(&[("苹果", Noun)]);
        let p = random_augment(&s, &augment_config([0.0, 0.0, 0.0, 1.0]), 4).unwrap();
        assert_eq!(p.incorrect, "");
        assert_eq!(p.edits, vec![EditSpan::insertion(0, "苹果")]);
    }

    #[test]
    fn augment_round_trip_and_pool_check() {
        let s = sentence(&[("他", Pron), ("喜欢", Verb), ("苹果", Noun), ("。", Punct)]);
        let config = augment_config([0.25, 0.25, 0.25, 0.25]);
        for i in 0..200 {
            let p = random_augment(&s, &config, i).unwrap();
            assert_eq!(apply_edits(&p.incorrect, &p.edits).unwrap(), s.text, "{p:?}");
        }
        let empty = AugmentConfig::default();
        assert_eq!(random_augment(&s, &empty, 0).unwrap_err().kind(), crate::ErrorKind::Config);
        let uneven = augment_config([0.5, 0.1, 0.1, 0.1]);
        assert!(uneven.validate().is_err());
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(42, 0, 0), derive_seed(42, 1, 0));
        assert_ne!(derive_seed(42, 0, 0), derive_seed(42, 0, 1));
        assert_ne!(derive_seed(42, 0, 0), derive_seed(43, 0, 0));
        assert_eq!(derive_seed(42, 7, 1), derive_seed(42, 7, 1));
    }
}

use std::collections::BTreeMap;
use std::path::PathBuf;

use clg_core::generator::{augment_counted, generate_all, generate_pair, AugmentConfig, GenConfig};
use clg_core::rules::{candidates, RuleContext, RuleResources};
use clg_core::tagging::{identify_roles, parse_pretagged, TagMapping};
use clg_core::text::{FineType, PosTag, TaggedSentence};

fn fixture() -> Vec<TaggedSentence> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("resources/fixtures/corpus.tagged");
    let mapping = TagMapping::identity();
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| parse_pretagged(l, &mapping).unwrap())
        .collect()
}

#[test]
fn fixture_generation_is_repeatable() {
    let corpus = fixture();
    let resources = RuleResources::seed();
    let config = GenConfig {
        seed: 42,
        ..GenConfig::default()
    };
    let (a, ra) = generate_all(&corpus, &config, &resources, 2).unwrap();
    let (b, rb) = generate_all(&corpus, &config, &resources, 3).unwrap();
    let lines = |v: &[clg_core::text::CorpusPair]| v.iter().map(|p| p.to_json_line()).collect::<Vec<_>>().join("\n");
    assert_eq!(lines(&a), lines(&b));
    assert_eq!(ra, rb);
    assert_eq!(ra.sentences_read, 50);
    assert_eq!(ra.pairs_emitted as usize, a.len());
    assert!(a.iter().all(|p| p.validate().is_ok()));
}

#[test]
fn single_enabled_rule() {
    let corpus = fixture();
    let config = GenConfig {
        seed: 7,
        enabled_rules: [FineType::LackObject].into_iter().collect(),
        ..GenConfig::default()
    };
    let (pairs, report) = generate_all(&corpus, &config, &RuleResources::seed(), 1).unwrap();
    assert!(!pairs.is_empty());
    assert!(pairs.iter().all(|p| p.rule_id == "LackObject"));
    assert_eq!(report.rule_counts.keys().collect::<Vec<_>>(), vec!["LackObject"]);
}

#[test]
fn applicable_rules_are_chosen_uniformly() {
    let resources = RuleResources::seed();
    let corpus = fixture();
    let config = GenConfig::default();
    let mut checked = 0;
    for s in corpus.iter().take(10) {
        let roles = identify_roles(s);
        let ctx = RuleContext {
            sentence: s,
            roles: &roles,
            resources: &resources,
        };
        let applicable: Vec<FineType> = FineType::ALL.into_iter().filter(|&f| !candidates(f, &ctx).is_empty()).collect();
        if applicable.len() < 3 {
            continue;
        }
        let n = 6000;
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for index in 0..n {
            let p = generate_pair(s, &roles, &resources, &config, index).unwrap();
            *counts.entry(p.rule_id).or_default() += 1;
        }
        assert_eq!(counts.len(), applicable.len(), "{}", s.text);
        let expected = 1.0 / applicable.len() as f64;
        for (rule, c) in &counts {
            let rate = *c as f64 / n as f64;
            assert!((rate - expected).abs() <= 0.03, "{}: {rule} {rate} vs {expected}", s.text);
        }
        checked += 1;
    }
    assert!(checked >= 3);
}

#[test]
fn augmentation_operation_frequencies() {
    let config = AugmentConfig {
        word_pool: vec!["书".into(), "我们".into(), "跑".into()],
        seed: 2024,
        ..AugmentConfig::default()
    };
    let sentence = TaggedSentence::from_parts((0..100).map(|i| (["他", "喜欢", "苹果", "。"][i % 4], PosTag::Noun)));
    let mut total = clg_core::generator::AugmentCounts::default();
    for index in 0..1000 {
        let (pair, counts) = augment_counted(&sentence, &config, index);
        assert!(pair.validate().is_ok());
        total.merge(counts);
    }
    assert_eq!(total.total(), 100_000);
    let rate = |c: u64| c as f64 / total.total() as f64;
    assert!((rate(total.keep) - 0.7).abs() <= 0.01);
    for c in [total.insert, total.replace, total.delete] {
        assert!((rate(c) - 0.1).abs() <= 0.01);
    }
}

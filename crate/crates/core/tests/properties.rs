mod support;

use std::path::PathBuf;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use clg_core::generator::{generate_all, GenConfig};
use clg_core::lm::{train_lm, LmConfig};
use clg_core::metrics::{extract_system_edits, levenshtein, parse_m2, precision_recall_f, score_corpus, ScoreParams};
use clg_core::rules::{apply_rule, RuleResources};
use clg_core::tagging::{identify_roles, parse_pretagged, TagMapping};
use clg_core::text::{apply_edits, diff_edits, normalize_edits, FineType, TaggedSentence};
use support::oracles::{levenshtein_rec, oracle_score, oracle_system_edits, random_m2_case};

fn fixture() -> Vec<TaggedSentence> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("resources/fixtures/corpus.tagged");
    let mapping = TagMapping::identity();
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| parse_pretagged(l, &mapping).unwrap())
        .collect()
}

fn text() -> impl Strategy<Value = String> {
    proptest::collection::vec(prop::sample::select(vec!['a', 'b', 'c', '他', '的', '。']), 0..12)
        .prop_map(|v| v.into_iter().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn diff_restores_correct(a in text(), b in text()) {
        let edits = diff_edits(&a, &b);
        prop_assert_eq!(apply_edits(&a, &edits).unwrap(), b.clone());
        prop_assert_eq!(normalize_edits(edits.clone()), edits.clone());
        let cost: usize = edits.iter().map(|e| (e.end - e.start).max(e.replacement.chars().count())).sum();
        prop_assert_eq!(cost, levenshtein(&a, &b).distance);
    }

    #[test]
    fn levenshtein_matches_recursion(a in text(), b in text()) {
        let ops = levenshtein(&a, &b);
        let ac: Vec<char> = a.chars().collect();
        let bc: Vec<char> = b.chars().collect();
        prop_assert_eq!(ops.distance, levenshtein_rec(&ac, &bc));
        prop_assert_eq!(ops.replace + ops.insert + ops.delete, ops.distance);
        prop_assert_eq!(ops.insert as i64 - ops.delete as i64, bc.len() as i64 - ac.len() as i64);
        prop_assert_eq!(levenshtein(&b, &a).distance, ops.distance);
    }

    #[test]
    fn m2_matches_enumeration(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (m2, hyps) = random_m2_case(&mut rng, 3);
        let gold = parse_m2(&m2, "case").unwrap();
        let hyp_tokens: Vec<Vec<String>> = hyps.iter().map(|h| h.split_whitespace().map(String::from).collect()).collect();
        for (sentence, hyp) in gold.iter().zip(&hyp_tokens) {
            for &a in sentence.annotators.keys() {
                let g = sentence.gold_edits(a);
                prop_assert_eq!(
                    extract_system_edits(&sentence.source, hyp, &g, 2),
                    oracle_system_edits(&sentence.source, hyp, &g, 2)
                );
            }
        }
        let report = score_corpus(&hyps, &gold, None, &ScoreParams::default()).unwrap();
        let expected = oracle_score(&hyp_tokens, &gold, 2, 0.5);
        prop_assert_eq!((report.tp, report.fp, report.fn_), (expected.tp, expected.fp, expected.fn_));
        let (p, r, f) = precision_recall_f(expected, 0.5);
        prop_assert!((report.precision - p).abs() < 1e-12 && (report.recall - r).abs() < 1e-12 && (report.f_beta - f).abs() < 1e-12);
    }

    #[test]
    fn lm_rows_sum_to_one(corpus in proptest::collection::vec(text(), 1..6), alpha in 0.1f64..2.0) {
        let model = train_lm(&corpus, &LmConfig { order: 3, alpha }).unwrap();
        let symbols = model.symbols();
        let contexts: Vec<Vec<u32>> = model.contexts().map(|c| c.to_vec()).collect();
        for history in contexts {
            let total: f64 = symbols.iter().map(|&s| model.prob(&history, s)).sum();
            prop_assert!((total - 1.0).abs() < 1e-9, "{total}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rules_round_trip_on_fixture(index in 0usize..50, rule in 0usize..26, seed in any::<u64>()) {
        let corpus = fixture();
        let s = &corpus[index];
        let fine = FineType::ALL[rule];
        let resources = RuleResources::seed();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if let Some(o) = apply_rule(fine, s, &identify_roles(s), &resources, &mut rng) {
            prop_assert_eq!(apply_edits(&o.incorrect, &o.edits).unwrap(), s.text.clone());
            prop_assert_eq!(o.fine_type, fine.error_type());
            prop_assert_ne!(o.incorrect, s.text.clone());
        }
    }

    #[test]
    fn generation_ignores_worker_count(seed in any::<u64>(), combine_max in 1usize..4, per_sentence in 1usize..3) {
        let corpus = fixture();
        let resources = RuleResources::seed();
        let config = GenConfig { seed, combine_max, per_sentence, ..GenConfig::default() };
        let (one, report_one) = generate_all(&corpus, &config, &resources, 1).unwrap();
        let (many, report_many) = generate_all(&corpus, &config, &resources, 4).unwrap();
        prop_assert_eq!(&one, &many);
        prop_assert_eq!(&report_one, &report_many);
        let applications: usize = one.iter().map(|p| p.error_types.len()).sum();
        prop_assert_eq!(report_one.rule_counts.values().sum::<u64>() as usize, applications);
        prop_assert_eq!(report_one.pairs_emitted + report_one.skipped, (corpus.len() * per_sentence) as u64);
        for p in &one {
            prop_assert!(p.validate().is_ok());
            prop_assert!(p.error_types.len() <= combine_max);
            prop_assert_eq!(p.rule_id.split('+').count(), p.error_types.len());
        }
    }
}

use std::collections::BTreeMap;
use std::path::PathBuf;

use clg_core::metrics::levenshtein;
use clg_core::rules::{build_outcome, candidates, RuleContext, RuleResources};
use clg_core::tagging::{identify_roles, parse_pretagged, segment_and_tag, Lexicon, RoleSpans, TagMapping};
use clg_core::text::{apply_edits, CoarseType, FineType, SyntacticRole, TaggedSentence};

fn resources_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("resources")
}

fn tagged_corpus() -> Vec<TaggedSentence> {
    let text = std::fs::read_to_string(resources_dir().join("fixtures/corpus.tagged")).unwrap();
    let mapping = TagMapping::identity();
    text.lines().map(|l| parse_pretagged(l, &mapping).unwrap()).collect()
}

#[test]
fn lexicon_reproduces_pretagged_corpus() {
    let lexicon = Lexicon::load(&resources_dir().join("seed/lexicon.tsv"), &TagMapping::thulac()).unwrap();
    let raw = std::fs::read_to_string(resources_dir().join("fixtures/corpus.txt")).unwrap();
    let tagged = tagged_corpus();
    assert_eq!(raw.lines().count(), 50);
    for (line, expected) in raw.lines().zip(&tagged) {
        assert_eq!(&segment_and_tag(line, &lexicon), expected, "{line}");
    }
}

#[test]
fn role_heuristic_against_hand_labels() {
    let labels = std::fs::read_to_string(resources_dir().join("fixtures/roles.tsv")).unwrap();
    let corpus = tagged_corpus();
    let mut agree: BTreeMap<SyntacticRole, usize> = BTreeMap::new();
    let mut total = 0;
    for line in labels.lines().filter(|l| !l.starts_with('#')) {
        let (index, compact) = line.split_once('\t').unwrap();
        let sentence = &corpus[index.parse::<usize>().unwrap()];
        let gold = RoleSpans::from_compact(compact).unwrap();
        let predicted = identify_roles(sentence);
        for role in SyntacticRole::ALL {
            let mut g = gold.get(role).to_vec();
            let mut p = predicted.get(role).to_vec();
            g.sort_by_key(|r| (r.start, r.end));
            p.sort_by_key(|r| (r.start, r.end));
            if g == p {
                *agree.entry(role).or_default() += 1;
            }
        }
        total += 1;
    }
    assert_eq!(total, 50);
    for role in SyntacticRole::ALL {
        let n = agree.get(&role).copied().unwrap_or(0);
        println!("{role:?}: {n}/{total} sentences match the hand labels");
    }
    let rate = |r: SyntacticRole| agree.get(&r).copied().unwrap_or(0) as f64 / total as f64;
    assert!(rate(SyntacticRole::Subject) >= 0.8);
    assert!(rate(SyntacticRole::Predicate) >= 0.8);
    assert!(rate(SyntacticRole::Object) >= 0.75);
}

/// Every variant at every site of every rule on the fixture corpus.
#[test]
fn every_rule_fires_and_round_trips() {
    let resources = RuleResources::seed();
    let corpus = tagged_corpus();
    let mut fired: BTreeMap<FineType, usize> = BTreeMap::new();
    for sentence in &corpus {
        let roles = identify_roles(sentence);
        let ctx = RuleContext {
            sentence,
            roles: &roles,
            resources: &resources,
        };
        for fine in FineType::ALL {
            for candidate in candidates(fine, &ctx) {
                for splices in &candidate.variants {
                    let o = build_outcome(sentence, splices.clone(), fine, candidate.site.clone());
                    assert_ne!(o.incorrect, sentence.text, "{fine:?}");
                    assert_eq!(apply_edits(&o.incorrect, &o.edits).unwrap(), sentence.text, "{fine:?}");
                    assert_eq!(o.fine_type.coarse, fine.coarse());
                    let distance = levenshtein(&o.incorrect, &sentence.text).distance;
                    assert!(distance >= 1);
                    if matches!(fine.coarse(), CoarseType::MissingComponent | CoarseType::RedundantComponent) {
                        let changed = o.edits.iter().map(|e| e.replacement.chars().count() + e.end - e.start).sum::<usize>();
                        assert_eq!(distance, changed, "{fine:?} {}", o.incorrect);
                    }
                    *fired.entry(fine).or_default() += 1;
                }
            }
        }
    }
    let missing: Vec<_> = FineType::ALL.iter().filter(|f| !fired.contains_key(f)).collect();
    assert!(missing.is_empty(), "rules that never fire: {missing:?}");
}

use std::ops::Range;

use super::{contains, find_runs, Candidate, CollocationKind, RuleContext, Splice};
use crate::tagging::clause_bounds;
use crate::text::{FineType, SyntacticRole};

pub(super) fn candidates(fine: FineType, ctx: &RuleContext) -> Vec<Candidate> {
    let kind = match fine {
        FineType::SubjectPredicate => CollocationKind::SubjectPredicate,
        FineType::PredicateObject => CollocationKind::PredicateObject,
        FineType::SubjectObject => CollocationKind::SubjectObject,
        FineType::ModifierHeadWord => CollocationKind::ModifierHead,
        FineType::Connectives => return connectives(ctx),
        _ => return Vec::new(),
    };
    let s = ctx.sentence;
    let mut out = Vec::new();
    for entry in ctx.resources.collocations.iter().filter(|c| c.kind == kind) {
        for target in find_runs(s, &entry.target, 0..s.len()) {
            for anchor in find_runs(s, &entry.anchor, 0..s.len()) {
                if target.start < anchor.end && anchor.start < target.end {
                    continue;
                }
                if !roles_match(ctx, kind, &target, &anchor) {
                    continue;
                }
                let tag = s.tokens[target.start].tag;
                let variants = entry
                    .wrong
                    .iter()
                    .map(|w| {
                        vec![Splice {
                            start: target.start,
                            end: target.end,
                            parts: vec![(w.clone(), tag)],
                        }]
                    })
                    .collect();
                let site = target.start.min(anchor.start)..target.end.max(anchor.end);
                out.push(Candidate { site, variants });
            }
        }
    }
    out
}

fn in_role(ctx: &RuleContext, role: SyntacticRole, r: &Range<usize>) -> bool {
    ctx.roles.get(role).iter().any(|span| contains(span, r))
}

/// Whether target and anchor sit in the two components the collocation links,
/// in either order.
fn roles_match(ctx: &RuleContext, kind: CollocationKind, target: &Range<usize>, anchor: &Range<usize>) -> bool {
    use SyntacticRole::*;
    let pair = |a: SyntacticRole, b: SyntacticRole| {
        (in_role(ctx, a, target) && in_role(ctx, b, anchor)) || (in_role(ctx, b, target) && in_role(ctx, a, anchor))
    };
    match kind {
        CollocationKind::SubjectPredicate => pair(Subject, Predicate),
        CollocationKind::PredicateObject => pair(Predicate, Object),
        CollocationKind::SubjectObject => pair(Subject, Object),
        CollocationKind::ModifierHead => {
            let modifiers: Vec<&Range<usize>> = ctx
                .roles
                .get(Attribute)
                .iter()
                .chain(ctx.roles.get(Adverbial))
                .collect();
            let inside = |r: &Range<usize>| modifiers.iter().find(|m| contains(m, r)).copied();
            let same_clause =
                clause_bounds(&ctx.sentence.tokens, target.start) == clause_bounds(&ctx.sentence.tokens, anchor.start);
            match (inside(target), inside(anchor)) {
                (Some(m), None) | (None, Some(m)) => same_clause && !(contains(m, target) && contains(m, anchor)),
                _ => false,
            }
        }
    }
}

/// Replaces the second member of a correlative connective pair.
fn connectives(ctx: &RuleContext) -> Vec<Candidate> {
    let s = ctx.sentence;
    let mut out = Vec::new();
    for pair in &ctx.resources.connectives {
        for first in find_runs(s, &pair.first, 0..s.len()) {
            for second in find_runs(s, &pair.second, first.end..s.len()) {
                let tag = s.tokens[second.start].tag;
                let variants = pair
                    .wrong
                    .iter()
                    .map(|w| {
                        vec![Splice {
                            start: second.start,
                            end: second.end,
                            parts: vec![(w.clone(), tag)],
                        }]
                    })
                    .collect();
                out.push(Candidate {
                    site: first.start..second.end,
                    variants,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{apply_rule, Collocation, RuleResources};
    use crate::tagging::identify_roles;
    use crate::text::{apply_edits, EditSpan, PosTag, TaggedSentence};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use PosTag::*;

    const SILK_ROAD: [(&str, PosTag); 9] = [
        ("丝绸之路", Propn),
        ("谱写", Verb),
        ("了", Part),
        ("千古", Noun),
        ("传诵", Verb),
        ("的", Part),
        ("壮美", Adj),
        ("篇章", Noun),
        ("。", Punct),
    ];

    fn apply(fine: FineType, parts: &[(&str, PosTag)], r: &RuleResources, seed: u64) -> Option<(String, Vec<EditSpan>)> {
        let s = TaggedSentence::from_parts(parts.iter().map(|&(w, t)| (w, t)));
        let o = apply_rule(fine, &s, &identify_roles(&s), r, &mut ChaCha8Rng::seed_from_u64(seed))?;
        assert_eq!(apply_edits(&o.incorrect, &o.edits).unwrap(), s.text);
        Some((o.incorrect, o.edits))
    }

    #[test]
    fn silk_road_collocation() {
        let mut r = RuleResources::seed();
        r.collocations.retain(|c| c.target == "谱写");
        r.collocations[0].wrong = vec!["开拓".into()];
        let (incorrect, edits) = apply(FineType::PredicateObject, &SILK_ROAD, &r, 0).unwrap();
        assert_eq!(incorrect, "丝绸之路开拓了千古传诵的壮美篇章。");
        assert_eq!(edits, vec![EditSpan::new(4, 6, "谱写")]);
    }

    #[test]
    fn wrong_candidate_follows_first_draw() {
        let mut r = RuleResources::default();
        r.collocations.push(Collocation {
            kind: CollocationKind::PredicateObject,
            target: "谱写".into(),
            anchor: "篇章".into(),
            wrong: vec!["开拓".into(), "开辟".into()],
        });
        for seed in 0..8 {
            let expected = ["开拓", "开辟"][ChaCha8Rng::seed_from_u64(seed).gen_range(0..2)];
            let (incorrect, _) = apply(FineType::PredicateObject, &SILK_ROAD, &r, seed).unwrap();
            assert!(incorrect.starts_with(&format!("丝绸之路{expected}")), "{seed}: {incorrect}");
        }
    }

    #[test]
    fn no_collocation_match() {
        let parts = [("他", Pron), ("喜欢", Verb), ("苹果", Noun)];
        for fine in FineType::SubjectPredicate.coarse().fine_types() {
            assert!(apply(fine, &parts, &RuleResources::seed(), 1).is_none());
        }
    }

    #[test]
    fn correlative_partner_replaced() {
        let parts = [
            ("只有", Cconj),
            ("努力", Adj),
            ("，", Punct),
            ("才", Adv),
            ("能", X),
            ("成功", Verb),
            ("。", Punct),
        ];
        let (incorrect, edits) = apply(FineType::Connectives, &parts, &RuleResources::seed(), 2).unwrap();
        assert!(incorrect.starts_with("只有努力，"));
        assert_ne!(incorrect, "只有努力，才能成功。");
        assert_eq!(edits.len(), 1);
        assert_eq!(edits[0].replacement, "才");
    }
}

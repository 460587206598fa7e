use super::{find_runs, Anchor, Candidate, MixedKind, RuleContext, Splice};
use crate::tagging::{clause_bounds, phrase_backward};
use crate::text::{FineType, PosTag, TaggedSentence};

pub(super) fn candidates(fine: FineType, ctx: &RuleContext) -> Vec<Candidate> {
    match fine {
        FineType::MixedPatterns => spliced(ctx, MixedKind::Pattern),
        FineType::MixedSentences => spliced(ctx, MixedKind::Sentence),
        FineType::MixedSubjects => mixed_subjects(ctx.sentence),
        _ => Vec::new(),
    }
}

/// Index just past the last non-punctuation token.
fn content_end(sentence: &TaggedSentence) -> usize {
    sentence
        .tokens
        .iter()
        .rposition(|t| t.tag != PosTag::Punct)
        .map_or(0, |i| i + 1)
}

fn spliced(ctx: &RuleContext, kind: MixedKind) -> Vec<Candidate> {
    let s = ctx.sentence;
    let mut out = Vec::new();
    for entry in ctx.resources.mixed_patterns.iter().filter(|e| e.kind == kind) {
        for run in find_runs(s, &entry.trigger, 0..s.len()) {
            let at = match (kind, &entry.anchor) {
                (MixedKind::Sentence, _) => Some(content_end(s)),
                (MixedKind::Pattern, Anchor::ClauseEnd) => Some(clause_bounds(&s.tokens, run.start).end),
                (MixedKind::Pattern, Anchor::Word(w)) => {
                    let clause = clause_bounds(&s.tokens, run.start);
                    find_runs(s, w, run.end..clause.end).first().map(|r| r.end)
                }
            };
            let Some(at) = at.filter(|&at| at > run.end) else { continue };
            if s.span_text(run.end, at).ends_with(entry.splice.as_str()) {
                continue;
            }
            out.push(Candidate::single(
                run.start..at,
                vec![Splice::insert(at, vec![(entry.splice.clone(), PosTag::Other)])],
            ));
        }
    }
    out
}

/// Copies the noun phrase head closing one clause to the start of the next,
/// subjectless clause.
fn mixed_subjects(s: &TaggedSentence) -> Vec<Candidate> {
    let tokens = &s.tokens;
    let mut out = Vec::new();
    for (p, t) in tokens.iter().enumerate() {
        if t.tag != PosTag::Punct || p == 0 || p + 1 >= tokens.len() {
            continue;
        }
        let next = &tokens[p + 1];
        if !matches!(next.tag, PosTag::Verb | PosTag::Adv | PosTag::X) {
            continue;
        }
        let previous = clause_bounds(tokens, p - 1);
        let Some(phrase) = phrase_backward(tokens, p, previous.start) else { continue };
        let head = &tokens[phrase.end - 1];
        out.push(Candidate::single(
            phrase.start..p + 2,
            vec![Splice::insert(p + 1, vec![(head.surface.clone(), head.tag)])],
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{apply_rule, RuleResources};
    use crate::tagging::identify_roles;
    use crate::text::{apply_edits, EditSpan};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use PosTag::*;

    fn apply(fine: FineType, parts: &[(&str, PosTag)], resources: &RuleResources) -> Option<(String, Vec<EditSpan>)> {
        let s = TaggedSentence::from_parts(parts.iter().map(|&(w, t)| (w, t)));
        let roles = identify_roles(&s);
        let o = apply_rule(fine, &s, &roles, resources, &mut ChaCha8Rng::seed_from_u64(7))?;
        assert_eq!(apply_edits(&o.incorrect, &o.edits).unwrap(), s.text);
        Some((o.incorrect, o.edits))
    }

    #[test]
    fn clause_end_splice() {
        let r = RuleResources::seed();
        let parts = [
            ("食用", Verb),
            ("水果", Noun),
            ("前", Noun),
            ("应该", X),
            ("洗净", Verb),
            ("削皮", Verb),
            ("。", Punct),
        ];
        let (incorrect, edits) = apply(FineType::MixedPatterns, &parts, &r).unwrap();
        assert_eq!(incorrect, "食用水果前应该洗净削皮较为安全。");
        assert_eq!(edits, vec![EditSpan::deletion(11, 15)]);
    }

    #[test]
    fn toy_sentence_with_fixture_entry() {
        let mut r = RuleResources::default();
        r.mixed_patterns.push(crate::rules::MixedPattern {
            kind: MixedKind::Pattern,
            trigger: "喜欢".into(),
            anchor: Anchor::ClauseEnd,
            splice: "的是".into(),
        });
        let (incorrect, edits) = apply(FineType::MixedPatterns, &[("他", Pron), ("喜欢", Verb), ("苹果", Noun)], &r).unwrap();
        assert_eq!(incorrect, "他喜欢苹果的是");
        assert_eq!(edits, vec![EditSpan::deletion(5, 7)]);
    }

    #[test]
    fn no_matching_pattern() {
        let r = RuleResources::seed();
        assert!(apply(FineType::MixedPatterns, &[("他", Pron), ("喜欢", Verb), ("苹果", Noun)], &r).is_none());
        assert!(apply(FineType::MixedSentences, &[("他", Pron), ("喜欢", Verb), ("苹果", Noun)], &r).is_none());
    }

    #[test]
    fn subject_copied_into_next_clause() {
        let r = RuleResources::seed();
        let parts = [
            ("他", Pron),
            ("买", Verb),
            ("了", Part),
            ("一本", Num),
            ("书", Noun),
            ("，", Punct),
            ("看", Verb),
            ("了", Part),
            ("一个", Num),
            ("下午", Noun),
            ("。", Punct),
        ];
        let (incorrect, _) = apply(FineType::MixedSubjects, &parts, &r).unwrap();
        assert_eq!(incorrect, "他买了一本书，书看了一个下午。");
    }
}

//! Corruption rules for the 26 fine-grained error types.
//!
//! Every rule inspects a tagged sentence and its [`RoleSpans`], lists the
//! sites where it could fire, and rewrites one site chosen with the supplied
//! rng. A rewrite is a set of token-level [`Splice`]s; the outcome carries the
//! corrupted text, the new token sequence (so callers can stack rules without
//! re-segmenting) and character edits that restore the original sentence.

mod collocation;
mod logic;
mod missing;
mod redundant;
pub mod resources;
mod structural;
mod word_order;

use std::ops::Range;

use rand::{Rng, RngCore};
use serde::Serialize;

use crate::tagging::RoleSpans;
use crate::text::{normalize_edits, CoarseType, EditSpan, ErrorType, FineType, PosTag, TaggedSentence};

pub use resources::{
    Anchor, Collocation, CollocationKind, ConnectivePair, FunctionWords, LogicKind, LogicPattern, MixedKind,
    MixedPattern, RuleResources, RESOURCE_FILES,
};

pub type Part = (String, PosTag);

/// Replaces tokens `[start, end)` with `parts`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Splice {
    pub start: usize,
    pub end: usize,
    pub parts: Vec<Part>,
}

impl Splice {
    pub fn insert(at: usize, parts: Vec<Part>) -> Self {
        Splice { start: at, end: at, parts }
    }

    pub fn delete(range: Range<usize>) -> Self {
        Splice {
            start: range.start,
            end: range.end,
            parts: Vec::new(),
        }
    }

    pub fn replace(at: usize, word: &str, tag: PosTag) -> Self {
        Splice {
            start: at,
            end: at + 1,
            parts: vec![(word.to_string(), tag)],
        }
    }
}

/// One place a rule can fire, with the alternative rewrites available there.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub site: Range<usize>,
    pub variants: Vec<Vec<Splice>>,
}

impl Candidate {
    pub fn single(site: Range<usize>, splices: Vec<Splice>) -> Self {
        Candidate {
            site,
            variants: vec![splices],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleOutcome {
    pub incorrect: String,
    /// Edits on `incorrect` that restore the original sentence.
    pub edits: Vec<EditSpan>,
    pub fine_type: ErrorType,
    /// Token range of the original sentence the rule fired on.
    pub match_site: Range<usize>,
    pub tokens: Vec<Part>,
}

impl RuleOutcome {
    pub fn tagged(&self) -> TaggedSentence {
        TaggedSentence::from_parts(self.tokens.iter().cloned())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleDescriptor {
    pub rule_id: &'static str,
    pub fine: FineType,
    pub coarse: CoarseType,
    pub weight: f64,
}

/// All 26 rules, weight 1, in taxonomy order.
pub fn registry() -> Vec<RuleDescriptor> {
    FineType::ALL
        .iter()
        .map(|&fine| RuleDescriptor {
            rule_id: fine.as_str(),
            fine,
            coarse: fine.coarse(),
            weight: 1.0,
        })
        .collect()
}

pub struct RuleContext<'a> {
    pub sentence: &'a TaggedSentence,
    pub roles: &'a RoleSpans,
    pub resources: &'a RuleResources,
}

/// Every site `fine` could fire on, variants that would leave the text
/// unchanged removed.
pub fn candidates(fine: FineType, ctx: &RuleContext) -> Vec<Candidate> {
    if ctx.sentence.is_empty() {
        return Vec::new();
    }
    let raw = match fine.coarse() {
        CoarseType::StructuralConfusion => structural::candidates(fine, ctx),
        CoarseType::ImproperLogicality => logic::candidates(fine, ctx),
        CoarseType::MissingComponent => missing::candidates(fine, ctx),
        CoarseType::RedundantComponent => redundant::candidates(fine, ctx),
        CoarseType::ImproperCollocation => collocation::candidates(fine, ctx),
        CoarseType::ImproperWordOrder => word_order::candidates(fine, ctx),
    };
    raw.into_iter()
        .filter_map(|mut c| {
            c.variants.retain(|v| changes_text(ctx.sentence, v));
            (!c.variants.is_empty()).then_some(c)
        })
        .collect()
}

fn changes_text(sentence: &TaggedSentence, splices: &[Splice]) -> bool {
    splices.iter().any(|s| {
        let new: String = s.parts.iter().map(|p| p.0.as_str()).collect();
        new != sentence.span_text(s.start, s.end)
    })
}

fn pick(rng: &mut dyn RngCore, n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        rng.gen_range(0..n)
    }
}

fn choose(ctx: &RuleContext, fine: FineType, mut found: Vec<Candidate>, rng: &mut dyn RngCore) -> Option<RuleOutcome> {
    if found.is_empty() {
        return None;
    }
    let site = pick(rng, found.len());
    let mut candidate = found.swap_remove(site);
    let variant = pick(rng, candidate.variants.len());
    let splices = candidate.variants.swap_remove(variant);
    Some(build_outcome(ctx.sentence, splices, fine, candidate.site))
}

/// Applies one fine-grained rule at an rng-chosen site.
pub fn apply_rule(
    fine: FineType,
    sentence: &TaggedSentence,
    roles: &RoleSpans,
    resources: &RuleResources,
    rng: &mut dyn RngCore,
) -> Option<RuleOutcome> {
    let ctx = RuleContext {
        sentence,
        roles,
        resources,
    };
    choose(&ctx, fine, candidates(fine, &ctx), rng)
}

/// Applies a rule of the given coarse category: picks uniformly among its fine
/// types that can fire, then a site.
pub fn corrupt(
    coarse: CoarseType,
    sentence: &TaggedSentence,
    roles: &RoleSpans,
    resources: &RuleResources,
    rng: &mut dyn RngCore,
) -> Option<RuleOutcome> {
    let ctx = RuleContext {
        sentence,
        roles,
        resources,
    };
    let mut options: Vec<(FineType, Vec<Candidate>)> = coarse
        .fine_types()
        .map(|f| (f, candidates(f, &ctx)))
        .filter(|(_, c)| !c.is_empty())
        .collect();
    if options.is_empty() {
        return None;
    }
    let (fine, found) = options.swap_remove(pick(rng, options.len()));
    choose(&ctx, fine, found, rng)
}

macro_rules! category_fn {
    ($name:ident, $coarse:ident) => {
        pub fn $name(
            sentence: &TaggedSentence,
            roles: &RoleSpans,
            resources: &RuleResources,
            rng: &mut dyn RngCore,
        ) -> Option<RuleOutcome> {
            corrupt(CoarseType::$coarse, sentence, roles, resources, rng)
        }
    };
}

category_fn!(corrupt_structural_confusion, StructuralConfusion);
category_fn!(corrupt_improper_logicality, ImproperLogicality);
category_fn!(corrupt_missing_component, MissingComponent);
category_fn!(corrupt_redundant_component, RedundantComponent);
category_fn!(corrupt_improper_collocation, ImproperCollocation);
category_fn!(corrupt_improper_word_order, ImproperWordOrder);

/// Applies `splices` to `sentence` and derives restoring character edits,
/// trimmed to the part of each splice that actually changed.
pub fn build_outcome(sentence: &TaggedSentence, mut splices: Vec<Splice>, fine: FineType, site: Range<usize>) -> RuleOutcome {
    splices.sort_by_key(|s| (s.start, s.end));
    let mut tokens: Vec<Part> = Vec::with_capacity(sentence.len() + 2);
    let mut edits = Vec::new();
    let mut pos = 0;
    let mut offset = 0;
    for s in splices {
        for t in &sentence.tokens[pos..s.start] {
            tokens.push((t.surface.clone(), t.tag));
            offset += t.char_len();
        }
        let old: Vec<char> = sentence.span_text(s.start, s.end).chars().collect();
        let new: Vec<char> = s.parts.iter().flat_map(|p| p.0.chars()).collect();
        let prefix = old.iter().zip(&new).take_while(|(a, b)| a == b).count();
        let room = old.len().min(new.len()) - prefix;
        let suffix = old
            .iter()
            .rev()
            .zip(new.iter().rev())
            .take(room)
            .take_while(|(a, b)| a == b)
            .count();
        if old != new {
            edits.push(EditSpan::new(
                offset + prefix,
                offset + new.len() - suffix,
                old[prefix..old.len() - suffix].iter().collect::<String>(),
            ));
        }
        offset += new.len();
        tokens.extend(s.parts.into_iter().filter(|p| !p.0.is_empty()));
        pos = s.end;
    }
    for t in &sentence.tokens[pos..] {
        tokens.push((t.surface.clone(), t.tag));
    }
    let incorrect: String = tokens.iter().map(|p| p.0.as_str()).collect();
    RuleOutcome {
        incorrect,
        edits: normalize_edits(edits),
        fine_type: fine.error_type(),
        match_site: site,
        tokens,
    }
}

/// Token ranges whose concatenated surfaces equal `text`, within `within`.
pub(crate) fn find_runs(sentence: &TaggedSentence, text: &str, within: Range<usize>) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    if text.is_empty() {
        return out;
    }
    for start in within.clone() {
        let mut acc = String::new();
        for end in start..within.end {
            acc.push_str(&sentence.tokens[end].surface);
            if acc.len() >= text.len() {
                if acc == text {
                    out.push(start..end + 1);
                }
                break;
            }
            if !text.starts_with(acc.as_str()) {
                break;
            }
        }
    }
    out
}

pub(crate) fn parts_of(sentence: &TaggedSentence, range: Range<usize>) -> Vec<Part> {
    sentence.tokens[range]
        .iter()
        .map(|t| (t.surface.clone(), t.tag))
        .collect()
}

/// Exchanges two non-overlapping ranges, `a` before `b`.
pub(crate) fn swap_ranges(sentence: &TaggedSentence, a: Range<usize>, b: Range<usize>) -> Splice {
    debug_assert!(a.end <= b.start);
    let mut parts = parts_of(sentence, b.clone());
    parts.extend(parts_of(sentence, a.end..b.start));
    parts.extend(parts_of(sentence, a.clone()));
    Splice {
        start: a.start,
        end: b.end,
        parts,
    }
}

/// Moves `range` so that it starts at token boundary `to` (outside the range).
pub(crate) fn move_range(sentence: &TaggedSentence, range: Range<usize>, to: usize) -> Splice {
    if to <= range.start {
        swap_ranges(sentence, to..range.start, range)
    } else {
        debug_assert!(to >= range.end);
        swap_ranges(sentence, range.clone(), range.end..to)
    }
}

pub(crate) fn contains(outer: &Range<usize>, inner: &Range<usize>) -> bool {
    outer.start <= inner.start && inner.end <= outer.end
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tagging::identify_roles;
    use crate::text::apply_edits;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sentence(parts: &[(&str, PosTag)]) -> TaggedSentence {
        TaggedSentence::from_parts(parts.iter().map(|&(s, t)| (s, t)))
    }

    fn run(fine: FineType, s: &TaggedSentence, seed: u64) -> Option<RuleOutcome> {
        let resources = RuleResources::seed();
        let roles = identify_roles(s);
        apply_rule(fine, s, &roles, &resources, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    fn assert_round_trip(s: &TaggedSentence, o: &RuleOutcome) {
        assert_ne!(o.incorrect, s.text);
        assert_eq!(apply_edits(&o.incorrect, &o.edits).unwrap(), s.text);
        assert_eq!(o.tagged().text, o.incorrect);
        assert_eq!(o.fine_type.fine.coarse(), o.fine_type.coarse);
    }

    #[test]
    fn registry_has_every_fine_type_once() {
        let reg = registry();
        assert_eq!(reg.len(), 26);
        let ids: std::collections::BTreeSet<_> = reg.iter().map(|d| d.rule_id).collect();
        assert_eq!(ids.len(), 26);
        assert!(reg.iter().all(|d| d.fine.coarse() == d.coarse && d.weight == 1.0));
    }

    #[test]
    fn build_outcome_trims_edits() {
        use PosTag::*;
        let s = sentence(&[("我", Pron), ("非常", Adv), ("喜欢", Verb), ("苹果", Noun)]);
        let o = build_outcome(
            &s,
            vec![Splice {
                start: 1,
                end: 2,
                parts: vec![("非常".into(), Adv), ("十分".into(), Adv)],
            }],
            FineType::MultiWords,
            1..2,
        );
        assert_eq!(o.incorrect, "我非常十分喜欢苹果");
        assert_eq!(o.edits, vec![EditSpan::deletion(3, 5)]);
        assert_round_trip(&s, &o);
    }

    #[test]
    fn empty_sentence_never_fires() {
        let s = TaggedSentence::default();
        for fine in FineType::ALL {
            assert!(run(fine, &s, 1).is_none(), "{fine:?}");
        }
    }

    #[test]
    fn single_token_sentence_has_no_missing_or_order_rules() {
        let s = sentence(&[("苹果", PosTag::Noun)]);
        for fine in FineType::ALL {
            let c = fine.coarse();
            if c == CoarseType::MissingComponent || c == CoarseType::ImproperWordOrder {
                assert!(run(fine, &s, 3).is_none(), "{fine:?}");
            }
        }
    }

    #[test]
    fn find_runs_matches_token_boundaries_only() {
        use PosTag::*;
        let s = sentence(&[("社会", Noun), ("各界", Noun), ("人士", Noun), ("社会", Noun)]);
        assert_eq!(find_runs(&s, "社会各界人士", 0..4), vec![0..3]);
        assert_eq!(find_runs(&s, "社会", 0..4), vec![0..1, 3..4]);
        assert!(find_runs(&s, "会各", 0..4).is_empty());
    }

    #[test]
    fn swap_and_move() {
        use PosTag::*;
        let s = sentence(&[("a", Noun), ("b", Noun), ("c", Noun), ("d", Noun)]);
        let o = build_outcome(&s, vec![swap_ranges(&s, 0..1, 2..4)], FineType::MultiAttributives, 0..4);
        assert_eq!(o.incorrect, "cdba");
        assert_round_trip(&s, &o);
        let o = build_outcome(&s, vec![move_range(&s, 2..3, 0)], FineType::AssociatedWords, 0..3);
        assert_eq!(o.incorrect, "cabd");
        let o = build_outcome(&s, vec![move_range(&s, 0..1, 3)], FineType::AssociatedWords, 0..3);
        assert_eq!(o.incorrect, "bcad");
    }
}

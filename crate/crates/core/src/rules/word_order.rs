use std::ops::Range;

use super::{contains, move_range, swap_ranges, Candidate, RuleContext};
use crate::tagging::{clause_bounds, is_aspect, phrase_forward};
use crate::text::{FineType, PosTag, SyntacticRole};

pub(super) fn candidates(fine: FineType, ctx: &RuleContext) -> Vec<Candidate> {
    if ctx.sentence.len() < 2 {
        return Vec::new();
    }
    match fine {
        FineType::MultiAttributives => adjacent_swaps(ctx, SyntacticRole::Attribute),
        FineType::MultiAdverbials => adjacent_swaps(ctx, SyntacticRole::Adverbial),
        FineType::AttributiveHeadWord => attribute_head(ctx),
        FineType::Prepositions => prepositions(ctx),
        FineType::ConnectivesSubject => connective_subject(ctx),
        FineType::AssociatedWords => associated_words(ctx),
        FineType::AdverbialAttributives => adverbial_attributive(ctx),
        _ => Vec::new(),
    }
}

fn swap(ctx: &RuleContext, a: Range<usize>, b: Range<usize>) -> Candidate {
    Candidate::single(a.start..b.end, vec![swap_ranges(ctx.sentence, a, b)])
}

/// Two modifiers of the same kind that touch exchange places.
fn adjacent_swaps(ctx: &RuleContext, role: SyntacticRole) -> Vec<Candidate> {
    let mut spans = ctx.roles.get(role).to_vec();
    spans.sort_by_key(|r| r.start);
    spans
        .windows(2)
        .filter(|w| w[0].end == w[1].start)
        .map(|w| swap(ctx, w[0].clone(), w[1].clone()))
        .collect()
}

/// The last attribute of a noun phrase moves behind its head.
fn attribute_head(ctx: &RuleContext) -> Vec<Candidate> {
    let attributes = ctx.roles.get(SyntacticRole::Attribute);
    let mut out = Vec::new();
    for phrase in ctx.roles.subject().into_iter().chain(ctx.roles.object()) {
        let last = attributes
            .iter()
            .filter(|a| contains(&phrase, a) && a.end < phrase.end)
            .max_by_key(|a| a.end);
        if let Some(a) = last {
            out.push(swap(ctx, a.clone(), a.end..phrase.end));
        }
    }
    out
}

/// A preposition-led adverbial moves behind the predicate.
fn prepositions(ctx: &RuleContext) -> Vec<Candidate> {
    let s = ctx.sentence;
    let Some(p) = ctx.roles.predicate() else {
        return Vec::new();
    };
    let prepositions = &ctx.resources.function_words.prepositions;
    let mut to = p.end;
    while to < s.len() && is_aspect(&s.tokens[to]) {
        to += 1;
    }
    ctx.roles
        .get(SyntacticRole::Adverbial)
        .iter()
        .filter(|a| {
            let lead = &s.tokens[a.start];
            a.len() >= 2 && a.end <= p.start && (lead.tag == PosTag::Adp || prepositions.contains(&lead.surface))
        })
        .map(|a| Candidate::single(a.start..to, vec![move_range(s, a.clone(), to)]))
        .collect()
}

/// A clause-initial connective trades places with the noun phrase after it.
fn connective_subject(ctx: &RuleContext) -> Vec<Candidate> {
    let s = ctx.sentence;
    let tokens = &s.tokens;
    let connectives = &ctx.resources.connectives;
    let mut out = Vec::new();
    for i in 0..tokens.len() {
        let clause_start = i == 0 || tokens[i - 1].tag == PosTag::Punct;
        let t = &tokens[i];
        let is_connective = t.tag == PosTag::Cconj || connectives.iter().any(|c| c.first == t.surface);
        if !clause_start || !is_connective {
            continue;
        }
        let clause = clause_bounds(tokens, i);
        if let Some(phrase) = phrase_forward(tokens, i + 1, clause.end) {
            if phrase.end < clause.end {
                out.push(swap(ctx, i..i + 1, phrase));
            }
        }
    }
    out
}

/// An adverb modifying a later verb moves in front of the main predicate, or
/// an adverb right before the predicate moves behind it.
fn associated_words(ctx: &RuleContext) -> Vec<Candidate> {
    let s = ctx.sentence;
    let tokens = &s.tokens;
    let Some(p) = ctx.roles.predicate() else {
        return Vec::new();
    };
    let clause = clause_bounds(tokens, p.start);
    let mut out = Vec::new();
    for i in p.end..clause.end {
        if tokens[i].tag == PosTag::Adv && tokens[i + 1..clause.end].iter().any(|t| t.tag == PosTag::Verb) {
            out.push(Candidate::single(p.start..i + 1, vec![move_range(s, i..i + 1, p.start)]));
        }
    }
    if p.start > clause.start && tokens[p.start - 1].tag == PosTag::Adv && p.end < clause.end {
        let adv = p.start - 1..p.start;
        out.push(Candidate::single(adv.start..p.end, vec![move_range(s, adv, p.end)]));
    }
    out
}

/// An adverbial moves into attribute position, right before the head of an
/// object that already carries attributes.
fn adverbial_attributive(ctx: &RuleContext) -> Vec<Candidate> {
    let s = ctx.sentence;
    let Some(object) = ctx.roles.object() else {
        return Vec::new();
    };
    let attributes = ctx.roles.get(SyntacticRole::Attribute);
    if !attributes.iter().any(|a| contains(&object, a)) {
        return Vec::new();
    }
    let head = object.end - 1;
    ctx.roles
        .get(SyntacticRole::Adverbial)
        .iter()
        .filter(|adv| s.tokens[adv.start].tag != PosTag::Adp && adv.end <= object.start)
        .map(|adv| Candidate::single(adv.start..object.end, vec![move_range(s, adv.clone(), head)]))
        .collect()
}

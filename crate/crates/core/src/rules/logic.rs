use super::{find_runs, Candidate, LogicKind, RuleContext, Splice};
use crate::tagging::clause_bounds;
use crate::text::{FineType, PosTag, TaggedSentence};

pub(super) fn candidates(fine: FineType, ctx: &RuleContext) -> Vec<Candidate> {
    match fine {
        FineType::MeasureWord => measure_word(ctx),
        FineType::Unreasonable => unreasonable(ctx),
        FineType::ImproperNegation => negation(ctx),
        FineType::ReverseHostGuest => host_guest(ctx),
        FineType::ImposingCauseAndEffect => cause_effect(ctx),
        _ => Vec::new(),
    }
}

fn entries<'a>(ctx: &'a RuleContext, kind: LogicKind) -> impl Iterator<Item = (&'a str, &'a str)> + 'a {
    ctx.resources
        .logic_patterns
        .iter()
        .filter(move |p| p.kind == kind)
        .map(|p| (p.condition.as_str(), p.template.as_str()))
}

/// Approximators next to an exact quantity: a NUM token followed by a
/// measure word (or ending in one).
fn measure_word(ctx: &RuleContext) -> Vec<Candidate> {
    let s = ctx.sentence;
    let tokens = &s.tokens;
    let measure = &ctx.resources.function_words.measure_words;
    let approximators: Vec<&str> = entries(ctx, LogicKind::Measure).map(|(_, t)| t).collect();
    let is_measure = |w: &str| measure.iter().any(|m| m == w);
    let mut out = Vec::new();
    for (i, t) in tokens.iter().enumerate() {
        if t.tag != PosTag::Num {
            continue;
        }
        let phrase_end = if tokens.get(i + 1).is_some_and(|n| is_measure(&n.surface)) {
            i + 2
        } else if measure.iter().any(|m| t.surface.len() > m.len() && t.surface.ends_with(m.as_str())) {
            i + 1
        } else {
            continue;
        };
        let before = i.checked_sub(1).map(|p| tokens[p].surface.as_str());
        let after = tokens.get(phrase_end).map(|n| n.surface.as_str());
        if before.is_some_and(|w| approximators.contains(&w)) || after.is_some_and(|w| approximators.contains(&w)) {
            continue;
        }
        let variants: Vec<Vec<Splice>> = entries(ctx, LogicKind::Measure)
            .map(|(position, word)| {
                let at = if position == "before" { i } else { phrase_end };
                vec![Splice::insert(at, vec![(word.to_string(), PosTag::Adv)])]
            })
            .collect();
        if !variants.is_empty() {
            out.push(Candidate {
                site: i..phrase_end,
                variants,
            });
        }
    }
    out
}

/// Conjoins a subsumed concept to the noun phrase that already covers it.
fn unreasonable(ctx: &RuleContext) -> Vec<Candidate> {
    let s = ctx.sentence;
    let mut out = Vec::new();
    for (broad, narrow) in entries(ctx, LogicKind::Unreasonable) {
        for run in find_runs(s, broad, 0..s.len()) {
            out.push(Candidate::single(
                run.clone(),
                vec![Splice::insert(
                    run.end,
                    vec![("、".to_string(), PosTag::Cconj), (narrow.to_string(), PosTag::Noun)],
                )],
            ));
        }
    }
    out
}

/// Inserts a negator before the first verb governed by a negative-meaning word.
fn negation(ctx: &RuleContext) -> Vec<Candidate> {
    let s = ctx.sentence;
    let mut out = Vec::new();
    for (word, negator) in entries(ctx, LogicKind::Negation) {
        for run in find_runs(s, word, 0..s.len()) {
            let clause = clause_bounds(&s.tokens, run.start);
            let Some(v) = (run.end..clause.end).find(|&j| s.tokens[j].tag == PosTag::Verb) else {
                continue;
            };
            if v > 0 && s.tokens[v - 1].surface == negator {
                continue;
            }
            out.push(Candidate::single(
                run.start..v + 1,
                vec![Splice::insert(v, vec![(negator.to_string(), PosTag::Adv)])],
            ));
        }
    }
    out
}

/// Swaps subject and object around a relational predicate.
fn host_guest(ctx: &RuleContext) -> Vec<Candidate> {
    let s = ctx.sentence;
    let (Some(p), Some(subject), Some(object)) = (ctx.roles.predicate(), ctx.roles.subject(), ctx.roles.object()) else {
        return Vec::new();
    };
    let verb = s.span_text(p.start, p.end);
    if !entries(ctx, LogicKind::HostGuest).any(|(v, _)| v == verb) {
        return Vec::new();
    }
    vec![Candidate::single(
        subject.start..object.end,
        vec![super::swap_ranges(s, subject, object)],
    )]
}

fn clause_starts(s: &TaggedSentence) -> Vec<usize> {
    let mut starts = vec![0];
    for (i, t) in s.tokens.iter().enumerate() {
        if t.tag == PosTag::Punct && i + 1 < s.len() && s.tokens[i + 1].tag != PosTag::Punct {
            starts.push(i + 1);
        }
    }
    starts
}

/// Joins two clauses with a cause/effect connective pair they do not warrant.
fn cause_effect(ctx: &RuleContext) -> Vec<Candidate> {
    let s = ctx.sentence;
    let starts = clause_starts(s);
    if starts.len() < 2 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (trigger, template) in entries(ctx, LogicKind::Cause) {
        let Some((first, second)) = template.split_once(',') else { continue };
        let (first, second) = (first.trim(), second.trim());
        if s.tokens.iter().any(|t| t.surface == first || t.surface == second) {
            continue;
        }
        for run in find_runs(s, trigger, starts[1]..s.len()) {
            let clause_start = *starts.iter().filter(|&&c| c <= run.start).max().unwrap_or(&0);
            if clause_start == 0 {
                continue;
            }
            out.push(Candidate::single(
                0..run.end,
                vec![
                    Splice::insert(0, vec![(first.to_string(), PosTag::Cconj)]),
                    Splice::insert(clause_start, vec![(second.to_string(), PosTag::Cconj)]),
                ],
            ));
        }
    }
    out
}

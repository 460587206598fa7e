use super::{Candidate, RuleContext, Splice};
use crate::text::{FineType, PosTag};

fn is_notional_or_connective(tag: PosTag) -> bool {
    matches!(
        tag,
        PosTag::Noun | PosTag::Propn | PosTag::Verb | PosTag::Adj | PosTag::Adv | PosTag::Cconj
    )
}

/// MultiWords inserts a near-synonym right after the word; MultiMeanings
/// inserts, right before it, a word whose meaning the word already contains.
pub(super) fn candidates(fine: FineType, ctx: &RuleContext) -> Vec<Candidate> {
    let s = ctx.sentence;
    let (table, after) = match fine {
        FineType::MultiWords => (&ctx.resources.synonyms, true),
        FineType::MultiMeanings => (&ctx.resources.subsumers, false),
        _ => return Vec::new(),
    };
    let mut out = Vec::new();
    for (i, t) in s.tokens.iter().enumerate() {
        if !is_notional_or_connective(t.tag) {
            continue;
        }
        let Some(words) = table.get(&t.surface) else { continue };
        let neighbour = if after { s.tokens.get(i + 1) } else { i.checked_sub(1).map(|p| &s.tokens[p]) };
        let variants: Vec<Vec<Splice>> = words
            .iter()
            .filter(|w| neighbour.is_none_or(|n| &n.surface != *w))
            .map(|w| {
                let at = if after { i + 1 } else { i };
                let tag = if after { t.tag } else { PosTag::Adv };
                vec![Splice::insert(at, vec![(w.clone(), tag)])]
            })
            .collect();
        if !variants.is_empty() {
            out.push(Candidate { site: i..i + 1, variants });
        }
    }
    out
}

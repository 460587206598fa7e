use super::{Candidate, RuleContext, Splice};
use crate::tagging::is_de;
use crate::text::{FineType, SyntacticRole};

pub(super) fn candidates(fine: FineType, ctx: &RuleContext) -> Vec<Candidate> {
    let roles = ctx.roles;
    let Some(p) = roles.predicate() else {
        return Vec::new();
    };
    let s = ctx.sentence;
    let delete = |r: std::ops::Range<usize>| vec![Candidate::single(r.clone(), vec![Splice::delete(r)])];
    match fine {
        FineType::LackSubject => roles.subject().map(delete).unwrap_or_default(),
        FineType::LackPredicate => {
            if roles.subject().is_none() && roles.object().is_none() {
                return Vec::new();
            }
            let aux = &ctx.resources.function_words.auxiliaries;
            let mut end = p.end;
            while end < s.len() && aux.contains(&s.tokens[end].surface) && s.tokens[end].surface != "的" {
                end += 1;
            }
            delete(p.start..end)
        }
        FineType::LackObject => {
            let Some(object) = roles.object() else {
                return Vec::new();
            };
            let head = (object.start + 1..object.end - 1)
                .rev()
                .find(|&i| is_de(&s.tokens[i]))
                .map_or(object.clone(), |d| d..object.end);
            delete(head)
        }
        FineType::LackModifier => {
            let essential = &ctx.resources.function_words.essential_modifiers;
            roles
                .get(SyntacticRole::Attribute)
                .iter()
                .chain(roles.get(SyntacticRole::Adverbial))
                .filter(|r| s.tokens[(*r).clone()].iter().any(|t| essential.contains(&t.surface)))
                .flat_map(|r| delete(r.clone()))
                .collect()
        }
        _ => Vec::new(),
    }
}

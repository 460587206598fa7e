//! Segmentation, POS tagging and shallow identification of sentence components.
//!
//! Two tagging paths are supported: a greedy longest-match lexicon tagger and a
//! pre-tagged input reader for the output of any external tagger. Tags from
//! either source pass through a [`TagMapping`] into the closed [`PosTag`] set.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::text::{PosTag, SyntacticRole, TaggedSentence, Token};
use crate::{Error, Result};

/// Default mapping from THULAC tags onto the universal-style tag set.
pub const THULAC_TAG_MAPPING: &str = include_str!("../resources/seed/tag_mapping.tsv");

/// External tag name → [`PosTag`]. Tags absent from the table are parsed as
/// `PosTag` names, falling back to `OTHER`.
#[derive(Debug, Clone, Default)]
pub struct TagMapping {
    table: HashMap<String, PosTag>,
}

impl TagMapping {
    pub fn identity() -> Self {
        TagMapping::default()
    }

    pub fn thulac() -> Self {
        TagMapping::parse(THULAC_TAG_MAPPING, "<builtin tag mapping>")
            .expect("builtin tag mapping is well formed")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        TagMapping::parse(&content, &path.display().to_string())
    }

    /// Parses `external<TAB>TAG` lines. `#` lines and blank lines are skipped.
    pub fn parse(content: &str, origin: &str) -> Result<Self> {
        let mut table = HashMap::new();
        for (n, line) in content.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (external, tag) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(origin, n + 1, "expected `external<TAB>TAG`"))?;
            let tag: PosTag = tag.trim().parse().map_err(|_| {
                Error::parse(origin, n + 1, format!("`{}` is not a known tag", tag.trim()))
            })?;
            table.entry(external.trim().to_string()).or_insert(tag);
        }
        Ok(TagMapping { table })
    }

    pub fn map(&self, external: &str) -> PosTag {
        self.table
            .get(external)
            .copied()
            .unwrap_or_else(|| PosTag::parse_or_other(external))
    }
}

/// Surface → tag dictionary for greedy longest-match segmentation.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: HashMap<String, PosTag>,
    max_chars: usize,
}

impl Lexicon {
    /// Builds a lexicon; on duplicate surfaces the first entry wins.
    pub fn from_entries<S: Into<String>>(entries: impl IntoIterator<Item = (S, PosTag)>) -> Self {
        let mut lexicon = Lexicon::default();
        for (surface, tag) in entries {
            lexicon.insert(surface.into(), tag);
        }
        lexicon
    }

    fn insert(&mut self, surface: String, tag: PosTag) {
        let len = surface.chars().count();
        if len == 0 {
            return;
        }
        self.max_chars = self.max_chars.max(len);
        self.entries.entry(surface).or_insert(tag);
    }

    pub fn load(path: &Path, mapping: &TagMapping) -> Result<Self> {
        let content = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read lexicon {}: {e}", path.display())))?;
        Lexicon::parse(&content, &path.display().to_string(), mapping)
    }

    /// Parses `surface<TAB>tag` lines; tags pass through `mapping`.
    pub fn parse(content: &str, origin: &str, mapping: &TagMapping) -> Result<Self> {
        let mut lexicon = Lexicon::default();
        for (n, line) in content.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (surface, tag) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(origin, n + 1, "expected `surface<TAB>tag`"))?;
            if surface.is_empty() {
                return Err(Error::parse(origin, n + 1, "empty surface"));
            }
            lexicon.insert(surface.to_string(), mapping.map(tag.trim()));
        }
        Ok(lexicon)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, surface: &str) -> Option<PosTag> {
        self.entries.get(surface).copied()
    }

    /// All surfaces, sorted.
    pub fn surfaces(&self) -> Vec<String> {
        let mut words: Vec<String> = self.entries.keys().cloned().collect();
        words.sort();
        words
    }
}

/// Greedy longest-match segmentation. Characters not covered by any lexicon
/// entry become single-character `OTHER` tokens.
pub fn segment_and_tag(raw: &str, lexicon: &Lexicon) -> TaggedSentence {
    let chars: Vec<char> = raw.chars().collect();
    let mut parts = Vec::new();
    let mut i = 0;
    let mut buf = String::new();
    while i < chars.len() {
        let longest = lexicon.max_chars.min(chars.len() - i);
        let mut matched = None;
        for len in (1..=longest).rev() {
            buf.clear();
            buf.extend(&chars[i..i + len]);
            if let Some(tag) = lexicon.get(&buf) {
                matched = Some((len, tag));
                break;
            }
        }
        let (len, tag) = matched.unwrap_or((1, PosTag::Other));
        parts.push((chars[i..i + len].iter().collect::<String>(), tag));
        i += len;
    }
    TaggedSentence::from_parts(parts)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PretagError {
    #[error("item {item} `{text}` has no `/` tag separator")]
    MissingSeparator { item: usize, text: String },
    #[error("item {item} `{text}` has an empty surface")]
    EmptySurface { item: usize, text: String },
}

/// Parses one line of space-separated `surface/TAG` items.
pub fn parse_pretagged(line: &str, mapping: &TagMapping) -> std::result::Result<TaggedSentence, PretagError> {
    let mut parts = Vec::new();
    for (item, text) in line.split_whitespace().enumerate() {
        let (surface, tag) = text.rsplit_once('/').ok_or_else(|| PretagError::MissingSeparator {
            item,
            text: text.to_string(),
        })?;
        if surface.is_empty() {
            return Err(PretagError::EmptySurface {
                item,
                text: text.to_string(),
            });
        }
        parts.push((surface.to_string(), mapping.map(tag)));
    }
    Ok(TaggedSentence::from_parts(parts))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaggerMode {
    BuiltinLexicon,
    PretaggedInput,
}

#[derive(Debug, Clone)]
pub struct TaggerConfig {
    pub mode: TaggerMode,
    pub lexicon_path: Option<PathBuf>,
    /// Falls back to the builtin THULAC mapping when absent.
    pub tag_mapping_path: Option<PathBuf>,
}

/// A loaded tagging pipeline. Read-only once built.
#[derive(Debug, Clone)]
pub struct Tagger {
    mode: TaggerMode,
    lexicon: Lexicon,
    mapping: TagMapping,
}

impl Tagger {
    pub fn from_config(config: &TaggerConfig) -> Result<Self> {
        let mapping = match &config.tag_mapping_path {
            Some(path) => TagMapping::load(path)?,
            None => TagMapping::thulac(),
        };
        let lexicon = match (config.mode, &config.lexicon_path) {
            (TaggerMode::BuiltinLexicon, Some(path)) => Lexicon::load(path, &mapping)?,
            (TaggerMode::BuiltinLexicon, None) => {
                return Err(Error::Config("builtin-lexicon mode requires a lexicon file".into()))
            }
            (TaggerMode::PretaggedInput, Some(path)) => Lexicon::load(path, &mapping)?,
            (TaggerMode::PretaggedInput, None) => Lexicon::default(),
        };
        Ok(Tagger {
            mode: config.mode,
            lexicon,
            mapping,
        })
    }

    pub fn builtin(lexicon: Lexicon) -> Self {
        Tagger {
            mode: TaggerMode::BuiltinLexicon,
            lexicon,
            mapping: TagMapping::thulac(),
        }
    }

    pub fn pretagged(mapping: TagMapping) -> Self {
        Tagger {
            mode: TaggerMode::PretaggedInput,
            lexicon: Lexicon::default(),
            mapping,
        }
    }

    pub fn mode(&self) -> TaggerMode {
        self.mode
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn mapping(&self) -> &TagMapping {
        &self.mapping
    }

    /// Tags one input line according to the configured mode.
    pub fn tag_line(&self, line: &str) -> std::result::Result<TaggedSentence, PretagError> {
        match self.mode {
            TaggerMode::BuiltinLexicon => Ok(segment_and_tag(line.trim(), &self.lexicon)),
            TaggerMode::PretaggedInput => parse_pretagged(line, &self.mapping),
        }
    }
}

/// Token ranges assigned to each of the six sentence components.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RoleSpans {
    ranges: [Vec<Range<usize>>; 6],
}

fn role_index(role: SyntacticRole) -> usize {
    match role {
        SyntacticRole::Subject => 0,
        SyntacticRole::Predicate => 1,
        SyntacticRole::Object => 2,
        SyntacticRole::Attribute => 3,
        SyntacticRole::Adverbial => 4,
        SyntacticRole::Complement => 5,
    }
}

const ROLE_CODES: [(SyntacticRole, &str); 6] = [
    (SyntacticRole::Subject, "S"),
    (SyntacticRole::Predicate, "P"),
    (SyntacticRole::Object, "O"),
    (SyntacticRole::Attribute, "AT"),
    (SyntacticRole::Adverbial, "AD"),
    (SyntacticRole::Complement, "C"),
];

impl RoleSpans {
    pub fn get(&self, role: SyntacticRole) -> &[Range<usize>] {
        &self.ranges[role_index(role)]
    }

    pub fn push(&mut self, role: SyntacticRole, range: Range<usize>) {
        self.ranges[role_index(role)].push(range);
    }

    pub fn predicate(&self) -> Option<Range<usize>> {
        self.get(SyntacticRole::Predicate).first().cloned()
    }

    pub fn subject(&self) -> Option<Range<usize>> {
        self.get(SyntacticRole::Subject).first().cloned()
    }

    pub fn object(&self) -> Option<Range<usize>> {
        self.get(SyntacticRole::Object).first().cloned()
    }

    /// Compact form such as `S=0-1 P=1-2 O=2-3 AT= AD= C=`.
    pub fn to_compact(&self) -> String {
        ROLE_CODES
            .iter()
            .map(|(role, code)| {
                let ranges: Vec<String> = self
                    .get(*role)
                    .iter()
                    .map(|r| format!("{}-{}", r.start, r.end))
                    .collect();
                format!("{code}={}", ranges.join(","))
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn from_compact(s: &str) -> Option<RoleSpans> {
        let mut spans = RoleSpans::default();
        for field in s.split_whitespace() {
            let (code, ranges) = field.split_once('=')?;
            let role = ROLE_CODES.iter().find(|(_, c)| *c == code)?.0;
            for r in ranges.split(',').filter(|r| !r.is_empty()) {
                let (a, b) = r.split_once('-')?;
                spans.push(role, a.parse().ok()?..b.parse().ok()?);
            }
        }
        Some(spans)
    }
}

impl fmt::Display for RoleSpans {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_compact())
    }
}

pub(crate) fn is_de(t: &Token) -> bool {
    t.surface == "的"
}

fn is_di(t: &Token) -> bool {
    t.surface == "地"
}

fn is_de_at(tokens: &[Token], i: usize) -> bool {
    tokens.get(i).is_some_and(is_de)
}

pub(crate) fn is_aspect(t: &Token) -> bool {
    t.tag == PosTag::Part && matches!(t.surface.as_str(), "了" | "着" | "过")
}

/// Tokens that can sit inside a noun phrase: nominals, numerals, adjectives,
/// 的, and verbs heading a 的 relative clause.
fn phrase_compatible(tokens: &[Token], i: usize) -> bool {
    let t = &tokens[i];
    matches!(
        t.tag,
        PosTag::Noun | PosTag::Pron | PosTag::Propn | PosTag::Num | PosTag::Adj
    ) || is_de(t)
        || (t.tag == PosTag::Verb && is_de_at(tokens, i + 1))
}

/// `[start, end)` of the clause containing token `i`; clauses are delimited by PUNCT.
pub(crate) fn clause_bounds(tokens: &[Token], i: usize) -> Range<usize> {
    let start = tokens[..i]
        .iter()
        .rposition(|t| t.tag == PosTag::Punct)
        .map_or(0, |p| p + 1);
    let end = tokens[i..]
        .iter()
        .position(|t| t.tag == PosTag::Punct)
        .map_or(tokens.len(), |p| i + p);
    start..end
}

/// Tokens that can head a noun phrase: nominals and numerals.
fn is_head(t: &Token) -> bool {
    t.tag.is_nominal() || t.tag == PosTag::Num
}

/// Noun phrase starting at `from`, ending at its last head-capable token.
pub(crate) fn phrase_forward(tokens: &[Token], from: usize, limit: usize) -> Option<Range<usize>> {
    let mut last_nominal = None;
    let mut i = from;
    while i < limit && phrase_compatible(tokens, i) {
        if is_head(&tokens[i]) {
            last_nominal = Some(i);
        }
        i += 1;
    }
    last_nominal.map(|h| from..h + 1)
}

/// Noun phrase ending just before `end`, which must close on a head-capable token.
pub(crate) fn phrase_backward(tokens: &[Token], end: usize, limit: usize) -> Option<Range<usize>> {
    if end <= limit || !is_head(&tokens[end - 1]) {
        return None;
    }
    let mut start = end - 1;
    while start > limit && phrase_compatible(tokens, start - 1) {
        start -= 1;
    }
    while start < end && is_de(&tokens[start]) {
        start += 1;
    }
    Some(start..end)
}

/// Modifiers inside a noun phrase: segments closed by 的 before the head, and
/// bare ADJ/NUM tokens directly before a nominal.
fn phrase_attributes(tokens: &[Token], phrase: &Range<usize>) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut seg = phrase.start;
    for i in phrase.clone() {
        let t = &tokens[i];
        if i + 1 >= phrase.end {
            break;
        }
        if is_de(t) {
            if i > seg {
                out.push(seg..i + 1);
            }
            seg = i + 1;
        } else if matches!(t.tag, PosTag::Adj | PosTag::Num)
            && i == seg
            && is_head(&tokens[i + 1])
        {
            out.push(i..i + 1);
            seg = i + 1;
        }
    }
    out
}

fn find_predicate(tokens: &[Token]) -> Option<usize> {
    (0..tokens.len()).find(|&i| {
        tokens[i].tag == PosTag::Verb
            && !(i > 0 && is_de(&tokens[i - 1]))
            && !is_de_at(tokens, i + 1)
    })
}

/// Heuristic component identification.
///
/// * Predicate: the first VERB that neither follows nor precedes 的.
/// * Adverbial: ADV tokens, `X地` pairs and ADP-led phrases in the contiguous
///   zone right before the predicate (modal `X` tokens are skipped over).
/// * Subject: the noun phrase ending right before that zone.
/// * Complement: a 得-led tail right after the predicate.
/// * Object: otherwise, the noun phrase after the predicate (aspect particles skipped).
/// * Attribute: modifiers inside the subject and object phrases.
///
/// Without a predicate, the first noun phrase is taken as the subject.
pub fn identify_roles(sentence: &TaggedSentence) -> RoleSpans {
    let tokens = &sentence.tokens;
    let mut spans = RoleSpans::default();
    if tokens.is_empty() {
        return spans;
    }

    let Some(p) = find_predicate(tokens) else {
        let clause = clause_bounds(tokens, 0);
        let start = (clause.start..clause.end).find(|&i| phrase_compatible(tokens, i));
        if let Some(phrase) = start.and_then(|s| phrase_forward(tokens, s, clause.end)) {
            for a in phrase_attributes(tokens, &phrase) {
                spans.push(SyntacticRole::Attribute, a);
            }
            spans.push(SyntacticRole::Subject, phrase);
        }
        return spans;
    };
    let clause = clause_bounds(tokens, p);
    spans.push(SyntacticRole::Predicate, p..p + 1);

    let mut adverbials = Vec::new();
    let mut k = p;
    while k > clause.start {
        let i = k - 1;
        let t = &tokens[i];
        if t.tag == PosTag::Adv || t.tag == PosTag::Adp {
            adverbials.push(i..i + 1);
            k = i;
        } else if t.tag == PosTag::X {
            k = i;
        } else if is_di(t) && i > clause.start {
            adverbials.push(i - 1..i + 1);
            k = i - 1;
        } else if phrase_compatible(tokens, i) {
            let mut a = i;
            while a > clause.start && phrase_compatible(tokens, a - 1) {
                a -= 1;
            }
            if a > clause.start && tokens[a - 1].tag == PosTag::Adp {
                adverbials.push(a - 1..i + 1);
                k = a - 1;
            } else {
                break;
            }
        } else {
            break;
        }
    }
    adverbials.reverse();

    let mut attributes = Vec::new();
    if let Some(subject) = phrase_backward(tokens, k, clause.start) {
        attributes.extend(phrase_attributes(tokens, &subject));
        spans.push(SyntacticRole::Subject, subject);
    }

    let mut o = p + 1;
    if o < clause.end && tokens[o].surface == "得" {
        spans.push(SyntacticRole::Complement, o..clause.end);
    } else {
        while o < clause.end && is_aspect(&tokens[o]) {
            o += 1;
        }
        if let Some(object) = phrase_forward(tokens, o, clause.end) {
            attributes.extend(phrase_attributes(tokens, &object));
            spans.push(SyntacticRole::Object, object);
        }
    }
    for a in attributes {
        spans.push(SyntacticRole::Attribute, a);
    }
    for a in adverbials {
        spans.push(SyntacticRole::Adverbial, a);
    }
    spans
}

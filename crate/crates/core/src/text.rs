//! Foundational text types: tokens, tagged sentences, the error taxonomy,
//! character-offset edits and the corpus pair record.
//!
//! All offsets are Unicode scalar value indices, never byte offsets.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Part-of-speech tag from a closed, universal-style tag set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PosTag {
    Noun,
    Verb,
    Adj,
    Adv,
    Pron,
    Cconj,
    Adp,
    Part,
    /// Auxiliary (modal) verb.
    X,
    Num,
    Propn,
    Punct,
    Other,
}

impl PosTag {
    pub const ALL: [PosTag; 13] = [
        PosTag::Noun,
        PosTag::Verb,
        PosTag::Adj,
        PosTag::Adv,
        PosTag::Pron,
        PosTag::Cconj,
        PosTag::Adp,
        PosTag::Part,
        PosTag::X,
        PosTag::Num,
        PosTag::Propn,
        PosTag::Punct,
        PosTag::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PosTag::Noun => "NOUN",
            PosTag::Verb => "VERB",
            PosTag::Adj => "ADJ",
            PosTag::Adv => "ADV",
            PosTag::Pron => "PRON",
            PosTag::Cconj => "CCONJ",
            PosTag::Adp => "ADP",
            PosTag::Part => "PART",
            PosTag::X => "X",
            PosTag::Num => "NUM",
            PosTag::Propn => "PROPN",
            PosTag::Punct => "PUNCT",
            PosTag::Other => "OTHER",
        }
    }

    /// Parses a tag name, mapping anything outside the closed set to `OTHER`.
    pub fn parse_or_other(s: &str) -> PosTag {
        s.parse().unwrap_or(PosTag::Other)
    }

    /// NOUN, PRON or PROPN.
    pub fn is_nominal(self) -> bool {
        matches!(self, PosTag::Noun | PosTag::Pron | PosTag::Propn)
    }
}

impl FromStr for PosTag {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PosTag::ALL
            .iter()
            .copied()
            .find(|t| t.as_str() == s)
            .ok_or(())
    }
}

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub tag: PosTag,
    pub char_start: usize,
    pub char_end: usize,
}

impl Token {
    pub fn char_len(&self) -> usize {
        self.char_end - self.char_start
    }
}

/// A segmented, tagged sentence. Token surfaces concatenate to `text`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TaggedSentence {
    pub text: String,
    pub tokens: Vec<Token>,
}

impl TaggedSentence {
    /// Builds a sentence from `(surface, tag)` pairs, computing offsets by
    /// concatenation. Empty surfaces are dropped.
    pub fn from_parts<S: Into<String>>(parts: impl IntoIterator<Item = (S, PosTag)>) -> Self {
        let mut text = String::new();
        let mut tokens = Vec::new();
        let mut offset = 0;
        for (surface, tag) in parts {
            let surface = surface.into();
            let len = surface.chars().count();
            if len == 0 {
                continue;
            }
            text.push_str(&surface);
            tokens.push(Token {
                surface,
                tag,
                char_start: offset,
                char_end: offset + len,
            });
            offset += len;
        }
        TaggedSentence { text, tokens }
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn char_len(&self) -> usize {
        self.tokens.last().map_or(0, |t| t.char_end)
    }

    /// Character offset where token `i` starts; `len()` maps to the end of the text.
    pub fn char_offset(&self, i: usize) -> usize {
        if i < self.tokens.len() {
            self.tokens[i].char_start
        } else {
            self.char_len()
        }
    }

    /// Surface text of tokens `[start, end)`.
    pub fn span_text(&self, start: usize, end: usize) -> String {
        self.tokens[start..end]
            .iter()
            .map(|t| t.surface.as_str())
            .collect()
    }

    pub fn parts(&self) -> Vec<(String, PosTag)> {
        self.tokens
            .iter()
            .map(|t| (t.surface.clone(), t.tag))
            .collect()
    }

    /// `surface/TAG` items joined by single spaces.
    pub fn to_pretagged(&self) -> String {
        let items: Vec<String> = self
            .tokens
            .iter()
            .map(|t| format!("{}/{}", t.surface, t.tag))
            .collect();
        items.join(" ")
    }
}

/// The six sentence components rules match against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SyntacticRole {
    Subject,
    Predicate,
    Object,
    Attribute,
    Adverbial,
    Complement,
}

impl SyntacticRole {
    pub const ALL: [SyntacticRole; 6] = [
        SyntacticRole::Subject,
        SyntacticRole::Predicate,
        SyntacticRole::Object,
        SyntacticRole::Attribute,
        SyntacticRole::Adverbial,
        SyntacticRole::Complement,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CoarseType {
    StructuralConfusion,
    ImproperLogicality,
    MissingComponent,
    RedundantComponent,
    ImproperCollocation,
    ImproperWordOrder,
}

impl CoarseType {
    pub const ALL: [CoarseType; 6] = [
        CoarseType::StructuralConfusion,
        CoarseType::ImproperLogicality,
        CoarseType::MissingComponent,
        CoarseType::RedundantComponent,
        CoarseType::ImproperCollocation,
        CoarseType::ImproperWordOrder,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CoarseType::StructuralConfusion => "StructuralConfusion",
            CoarseType::ImproperLogicality => "ImproperLogicality",
            CoarseType::MissingComponent => "MissingComponent",
            CoarseType::RedundantComponent => "RedundantComponent",
            CoarseType::ImproperCollocation => "ImproperCollocation",
            CoarseType::ImproperWordOrder => "ImproperWordOrder",
        }
    }

    /// Human-readable label, e.g. "Structural Confusion".
    pub fn label(self) -> &'static str {
        match self {
            CoarseType::StructuralConfusion => "Structural Confusion",
            CoarseType::ImproperLogicality => "Improper Logicality",
            CoarseType::MissingComponent => "Missing Component",
            CoarseType::RedundantComponent => "Redundant Component",
            CoarseType::ImproperCollocation => "Improper Collocation",
            CoarseType::ImproperWordOrder => "Improper Word Order",
        }
    }

    pub fn fine_types(self) -> impl Iterator<Item = FineType> {
        FineType::ALL.into_iter().filter(move |f| f.coarse() == self)
    }
}

impl fmt::Display for CoarseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The 26 fine-grained error types. The identifier doubles as the rule id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FineType {
    MixedPatterns,
    MixedSubjects,
    MixedSentences,
    MeasureWord,
    Unreasonable,
    ImproperNegation,
    ReverseHostGuest,
    ImposingCauseAndEffect,
    LackSubject,
    LackPredicate,
    LackObject,
    LackModifier,
    MultiWords,
    MultiMeanings,
    SubjectPredicate,
    PredicateObject,
    SubjectObject,
    ModifierHeadWord,
    Connectives,
    MultiAttributives,
    MultiAdverbials,
    AttributiveHeadWord,
    Prepositions,
    ConnectivesSubject,
    AssociatedWords,
    AdverbialAttributives,
}

impl FineType {
    pub const ALL: [FineType; 26] = [
        FineType::MixedPatterns,
        FineType::MixedSubjects,
        FineType::MixedSentences,
        FineType::MeasureWord,
        FineType::Unreasonable,
        FineType::ImproperNegation,
        FineType::ReverseHostGuest,
        FineType::ImposingCauseAndEffect,
        FineType::LackSubject,
        FineType::LackPredicate,
        FineType::LackObject,
        FineType::LackModifier,
        FineType::MultiWords,
        FineType::MultiMeanings,
        FineType::SubjectPredicate,
        FineType::PredicateObject,
        FineType::SubjectObject,
        FineType::ModifierHeadWord,
        FineType::Connectives,
        FineType::MultiAttributives,
        FineType::MultiAdverbials,
        FineType::AttributiveHeadWord,
        FineType::Prepositions,
        FineType::ConnectivesSubject,
        FineType::AssociatedWords,
        FineType::AdverbialAttributives,
    ];

    pub fn coarse(self) -> CoarseType {
        use FineType::*;
        match self {
            MixedPatterns | MixedSubjects | MixedSentences => CoarseType::StructuralConfusion,
            MeasureWord | Unreasonable | ImproperNegation | ReverseHostGuest
            | ImposingCauseAndEffect => CoarseType::ImproperLogicality,
            LackSubject | LackPredicate | LackObject | LackModifier => CoarseType::MissingComponent,
            MultiWords | MultiMeanings => CoarseType::RedundantComponent,
            SubjectPredicate | PredicateObject | SubjectObject | ModifierHeadWord | Connectives => {
                CoarseType::ImproperCollocation
            }
            MultiAttributives | MultiAdverbials | AttributiveHeadWord | Prepositions
            | ConnectivesSubject | AssociatedWords | AdverbialAttributives => {
                CoarseType::ImproperWordOrder
            }
        }
    }

    pub fn as_str(self) -> &'static str {
        use FineType::*;
        match self {
            MixedPatterns => "MixedPatterns",
            MixedSubjects => "MixedSubjects",
            MixedSentences => "MixedSentences",
            MeasureWord => "MeasureWord",
            Unreasonable => "Unreasonable",
            ImproperNegation => "ImproperNegation",
            ReverseHostGuest => "ReverseHostGuest",
            ImposingCauseAndEffect => "ImposingCauseAndEffect",
            LackSubject => "LackSubject",
            LackPredicate => "LackPredicate",
            LackObject => "LackObject",
            LackModifier => "LackModifier",
            MultiWords => "MultiWords",
            MultiMeanings => "MultiMeanings",
            SubjectPredicate => "SubjectPredicate",
            PredicateObject => "PredicateObject",
            SubjectObject => "SubjectObject",
            ModifierHeadWord => "ModifierHeadWord",
            Connectives => "Connectives",
            MultiAttributives => "MultiAttributives",
            MultiAdverbials => "MultiAdverbials",
            AttributiveHeadWord => "AttributiveHeadWord",
            Prepositions => "Prepositions",
            ConnectivesSubject => "ConnectivesSubject",
            AssociatedWords => "AssociatedWords",
            AdverbialAttributives => "AdverbialAttributives",
        }
    }

    pub fn error_type(self) -> ErrorType {
        ErrorType {
            coarse: self.coarse(),
            fine: self,
        }
    }
}

impl FromStr for FineType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FineType::ALL
            .iter()
            .copied()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown rule id `{s}`"))
    }
}

impl fmt::Display for FineType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ErrorType {
    pub coarse: CoarseType,
    pub fine: FineType,
}

impl ErrorType {
    pub fn is_consistent(&self) -> bool {
        self.fine.coarse() == self.coarse
    }
}

/// Replace characters `[start, end)` of the incorrect text with `replacement`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditSpan {
    pub start: usize,
    pub end: usize,
    pub replacement: String,
}

impl EditSpan {
    pub fn new(start: usize, end: usize, replacement: impl Into<String>) -> Self {
        EditSpan {
            start,
            end,
            replacement: replacement.into(),
        }
    }

    pub fn insertion(at: usize, text: impl Into<String>) -> Self {
        EditSpan::new(at, at, text)
    }

    pub fn deletion(start: usize, end: usize) -> Self {
        EditSpan::new(start, end, "")
    }
}

impl fmt::Display for EditSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}) -> {:?}", self.start, self.end, self.replacement)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EditError {
    #[error("edit #{index} {span} is out of bounds for text of {len} characters")]
    OutOfBounds {
        index: usize,
        span: EditSpan,
        len: usize,
    },
    #[error("edit #{index} {span} overlaps or precedes the previous edit ending at {previous_end}")]
    Overlap {
        index: usize,
        span: EditSpan,
        previous_end: usize,
    },
}

impl From<EditError> for crate::Error {
    fn from(e: EditError) -> Self {
        crate::Error::Validation(e.to_string())
    }
}

/// Checks that `edits` are in bounds, sorted by start and pairwise non-overlapping.
pub fn validate_edits(len: usize, edits: &[EditSpan]) -> Result<(), EditError> {
    let mut previous_end = 0;
    for (index, e) in edits.iter().enumerate() {
        if e.start > e.end || e.end > len {
            return Err(EditError::OutOfBounds {
                index,
                span: e.clone(),
                len,
            });
        }
        if index > 0 && e.start < previous_end {
            return Err(EditError::Overlap {
                index,
                span: e.clone(),
                previous_end,
            });
        }
        previous_end = e.end;
    }
    Ok(())
}

/// Applies sorted, non-overlapping edits to `incorrect`, right to left.
pub fn apply_edits(incorrect: &str, edits: &[EditSpan]) -> Result<String, EditError> {
    let mut chars: Vec<char> = incorrect.chars().collect();
    validate_edits(chars.len(), edits)?;
    for e in edits.iter().rev() {
        chars.splice(e.start..e.end, e.replacement.chars());
    }
    Ok(chars.into_iter().collect())
}

/// Sorts edits and merges spans that touch into one span.
pub fn normalize_edits(mut edits: Vec<EditSpan>) -> Vec<EditSpan> {
    edits.sort_by_key(|e| (e.start, e.end));
    let mut out: Vec<EditSpan> = Vec::with_capacity(edits.len());
    for e in edits {
        match out.last_mut() {
            Some(last) if last.end == e.start => {
                last.end = e.end;
                last.replacement.push_str(&e.replacement);
            }
            _ => out.push(e),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DiffOp {
    Keep,
    Replace,
    Delete,
    Insert,
}

/// Minimal-cost character edit script turning `incorrect` into `correct`,
/// with touching atomic operations grouped into maximal spans.
pub fn diff_edits(incorrect: &str, correct: &str) -> Vec<EditSpan> {
    let a: Vec<char> = incorrect.chars().collect();
    let b: Vec<char> = correct.chars().collect();
    let (m, n) = (a.len(), b.len());
    let width = n + 1;
    let mut dp = vec![0usize; (m + 1) * width];
    for i in 0..=m {
        dp[i * width] = i;
    }
    for j in 0..=n {
        dp[j] = j;
    }
    for i in 1..=m {
        for j in 1..=n {
            let diag = dp[(i - 1) * width + j - 1] + usize::from(a[i - 1] != b[j - 1]);
            let up = dp[(i - 1) * width + j] + 1;
            let left = dp[i * width + j - 1] + 1;
            dp[i * width + j] = diag.min(up).min(left);
        }
    }

    let mut ops = Vec::with_capacity(m.max(n));
    let (mut i, mut j) = (m, n);
    while i > 0 || j > 0 {
        let here = dp[i * width + j];
        if i > 0 && j > 0 && a[i - 1] == b[j - 1] && here == dp[(i - 1) * width + j - 1] {
            ops.push(DiffOp::Keep);
            i -= 1;
            j -= 1;
        } else if i > 0 && j > 0 && here == dp[(i - 1) * width + j - 1] + 1 {
            ops.push(DiffOp::Replace);
            i -= 1;
            j -= 1;
        } else if i > 0 && here == dp[(i - 1) * width + j] + 1 {
            ops.push(DiffOp::Delete);
            i -= 1;
        } else {
            ops.push(DiffOp::Insert);
            j -= 1;
        }
    }
    ops.reverse();

    let mut edits = Vec::new();
    let (mut i, mut j) = (0, 0);
    let mut current: Option<EditSpan> = None;
    for op in ops {
        match op {
            DiffOp::Keep => {
                edits.extend(current.take());
                i += 1;
                j += 1;
            }
            DiffOp::Replace | DiffOp::Delete | DiffOp::Insert => {
                let span = current.get_or_insert_with(|| EditSpan::new(i, i, ""));
                if op != DiffOp::Insert {
                    i += 1;
                    span.end = i;
                }
                if op != DiffOp::Delete {
                    span.replacement.push(b[j]);
                    j += 1;
                }
            }
        }
    }
    edits.extend(current);
    edits
}

/// One training sample. Field order is fixed for byte-reproducible JSON lines.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusPair {
    pub id: String,
    pub incorrect: String,
    pub correct: String,
    pub edits: Vec<EditSpan>,
    pub error_types: Vec<ErrorType>,
    pub rule_id: String,
    pub seed: u64,
}

impl CorpusPair {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("corpus pair serializes")
    }

    pub fn from_json_line(line: &str) -> serde_json::Result<Self> {
        serde_json::from_str(line)
    }

    /// Checks the edit round trip and taxonomy consistency.
    pub fn validate(&self) -> crate::Result<()> {
        let restored = apply_edits(&self.incorrect, &self.edits)?;
        if restored != self.correct {
            return Err(crate::Error::Validation(format!(
                "pair {}: edits do not restore the correct text",
                self.id
            )));
        }
        if let Some(t) = self.error_types.iter().find(|t| !t.is_consistent()) {
            return Err(crate::Error::Validation(format!(
                "pair {}: {} is not a subtype of {}",
                self.id, t.fine, t.coarse
            )));
        }
        Ok(())
    }
}

//! Rule resource tables.
//!
//! Six UTF-8 TSV files, `#` comment lines and blank lines ignored:
//!
//! | file | columns |
//! |------|---------|
//! | `mixed_patterns.tsv` | `kind` (`pattern` or `sentence`), `trigger`, `anchor`, `splice` |
//! | `logic_patterns.tsv` | `kind` (`measure`, `unreasonable`, `negation`, `hostguest`, `cause`), `condition`, `template` |
//! | `collocations.tsv` | `kind` (`subject_predicate`, `predicate_object`, `subject_object`, `modifier_head`), `target`, `anchor`, `wrong1,wrong2,...` |
//! | `synonyms.tsv` | `word`, `cand1,cand2,...`, optional relation (`synonym` or `subsume`) |
//! | `connectives.tsv` | `first`, `second`, `wrong1,wrong2,...` |
//! | `function_words.tsv` | category (`prepositions`, `auxiliaries`, `measure_words`, `essential_modifiers`), `w1,w2,...` |
//!
//! `anchor` in `mixed_patterns.tsv` is `$` (end of the trigger's clause) or a
//! word after the trigger that the splice follows. In `logic_patterns.tsv`:
//! `measure` rows have condition `before`/`after` and an approximator as
//! template; `unreasonable` rows map a broad noun phrase to a subsumed one;
//! `negation` rows pair a negative-meaning word with the negator to insert;
//! `hostguest` rows list relational verbs (template `-`); `cause` rows list a
//! second-clause trigger and the `因为,所以`-style connective pair.

use std::collections::BTreeMap;
use std::path::Path;

use crate::{Error, Result};

pub const RESOURCE_FILES: [&str; 6] = [
    "mixed_patterns.tsv",
    "logic_patterns.tsv",
    "collocations.tsv",
    "synonyms.tsv",
    "connectives.tsv",
    "function_words.tsv",
];

const SEED: [&str; 6] = [
    include_str!("../../resources/seed/mixed_patterns.tsv"),
    include_str!("../../resources/seed/logic_patterns.tsv"),
    include_str!("../../resources/seed/collocations.tsv"),
    include_str!("../../resources/seed/synonyms.tsv"),
    include_str!("../../resources/seed/connectives.tsv"),
    include_str!("../../resources/seed/function_words.tsv"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixedKind {
    Pattern,
    Sentence,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Anchor {
    ClauseEnd,
    Word(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedPattern {
    pub kind: MixedKind,
    pub trigger: String,
    pub anchor: Anchor,
    pub splice: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogicKind {
    Measure,
    Unreasonable,
    Negation,
    HostGuest,
    Cause,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicPattern {
    pub kind: LogicKind,
    pub condition: String,
    pub template: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CollocationKind {
    SubjectPredicate,
    PredicateObject,
    SubjectObject,
    ModifierHead,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Collocation {
    pub kind: CollocationKind,
    pub target: String,
    pub anchor: String,
    pub wrong: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectivePair {
    pub first: String,
    pub second: String,
    pub wrong: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FunctionWords {
    pub prepositions: Vec<String>,
    pub auxiliaries: Vec<String>,
    pub measure_words: Vec<String>,
    pub essential_modifiers: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleResources {
    pub mixed_patterns: Vec<MixedPattern>,
    pub logic_patterns: Vec<LogicPattern>,
    pub collocations: Vec<Collocation>,
    /// word → near-synonyms
    pub synonyms: BTreeMap<String, Vec<String>>,
    /// word → words whose meaning it already contains
    pub subsumers: BTreeMap<String, Vec<String>>,
    pub connectives: Vec<ConnectivePair>,
    pub function_words: FunctionWords,
}

/// Non-comment lines with their 1-based numbers, split on tabs.
fn rows<'a>(content: &'a str) -> impl Iterator<Item = (usize, Vec<&'a str>)> + 'a {
    content.lines().enumerate().filter_map(|(n, line)| {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            None
        } else {
            Some((n + 1, line.split('\t').map(str::trim).collect()))
        }
    })
}

fn list(field: &str) -> Vec<String> {
    field
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

fn merge_into(target: &mut Vec<String>, extra: Vec<String>) {
    for w in extra {
        if !target.contains(&w) {
            target.push(w);
        }
    }
}

struct Table<'a> {
    origin: &'a str,
}

impl Table<'_> {
    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::parse(self.origin, line, msg)
    }

    fn columns<'r>(&self, line: usize, cols: &'r [&'r str], min: usize, max: usize) -> Result<&'r [&'r str]> {
        if cols.len() < min || cols.len() > max {
            let expected = if min == max { min.to_string() } else { format!("{min}-{max}") };
            return Err(self.err(line, format!("expected {expected} columns, found {}", cols.len())));
        }
        if let Some(i) = cols.iter().position(|c| c.is_empty()) {
            return Err(self.err(line, format!("column {} is empty", i + 1)));
        }
        Ok(cols)
    }
}

impl RuleResources {
    /// The bundle shipped with the crate.
    pub fn seed() -> Self {
        Self::parse_all(SEED.map(String::from)).expect("shipped seed resources are valid")
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let mut contents: [String; 6] = Default::default();
        for (slot, name) in contents.iter_mut().zip(RESOURCE_FILES) {
            let path = dir.join(name);
            *slot = std::fs::read_to_string(&path).map_err(|e| {
                Error::Config(format!("cannot read resource file {}: {e}", path.display()))
            })?;
        }
        let mut resources = Self::default();
        for (i, content) in contents.iter().enumerate() {
            let origin = dir.join(RESOURCE_FILES[i]).display().to_string();
            resources.parse_file(i, content, &origin)?;
        }
        resources.check_non_empty()?;
        Ok(resources)
    }

    fn parse_all(contents: [String; 6]) -> Result<Self> {
        let mut resources = Self::default();
        for (i, content) in contents.iter().enumerate() {
            resources.parse_file(i, content, RESOURCE_FILES[i])?;
        }
        resources.check_non_empty()?;
        Ok(resources)
    }

    fn check_non_empty(&self) -> Result<()> {
        let empty = [
            (self.mixed_patterns.is_empty(), RESOURCE_FILES[0]),
            (self.logic_patterns.is_empty(), RESOURCE_FILES[1]),
            (self.collocations.is_empty(), RESOURCE_FILES[2]),
            (self.synonyms.is_empty() && self.subsumers.is_empty(), RESOURCE_FILES[3]),
            (self.connectives.is_empty(), RESOURCE_FILES[4]),
            (self.function_words == FunctionWords::default(), RESOURCE_FILES[5]),
        ];
        match empty.iter().find(|(e, _)| *e) {
            Some((_, name)) => Err(Error::Config(format!("resource file {name} has no entries"))),
            None => Ok(()),
        }
    }

    fn parse_file(&mut self, index: usize, content: &str, origin: &str) -> Result<()> {
        let t = Table { origin };
        for (line, cols) in rows(content) {
            match index {
                0 => self.mixed_row(&t, line, &cols)?,
                1 => self.logic_row(&t, line, &cols)?,
                2 => self.collocation_row(&t, line, &cols)?,
                3 => self.synonym_row(&t, line, &cols)?,
                4 => self.connective_row(&t, line, &cols)?,
                _ => self.function_row(&t, line, &cols)?,
            }
        }
        Ok(())
    }

    fn mixed_row(&mut self, t: &Table, line: usize, cols: &[&str]) -> Result<()> {
        let c = t.columns(line, cols, 4, 4)?;
        let kind = match c[0] {
            "pattern" => MixedKind::Pattern,
            "sentence" => MixedKind::Sentence,
            other => return Err(t.err(line, format!("unknown kind `{other}`"))),
        };
        let anchor = match c[2] {
            "$" => Anchor::ClauseEnd,
            w => Anchor::Word(w.to_string()),
        };
        self.mixed_patterns.push(MixedPattern {
            kind,
            trigger: c[1].to_string(),
            anchor,
            splice: c[3].to_string(),
        });
        Ok(())
    }

    fn logic_row(&mut self, t: &Table, line: usize, cols: &[&str]) -> Result<()> {
        let c = t.columns(line, cols, 3, 3)?;
        let kind = match c[0] {
            "measure" => LogicKind::Measure,
            "unreasonable" => LogicKind::Unreasonable,
            "negation" => LogicKind::Negation,
            "hostguest" => LogicKind::HostGuest,
            "cause" => LogicKind::Cause,
            other => return Err(t.err(line, format!("unknown kind `{other}`"))),
        };
        match kind {
            LogicKind::Measure if !matches!(c[1], "before" | "after") => {
                return Err(t.err(line, "measure condition must be `before` or `after`"));
            }
            LogicKind::Cause if list(c[2]).len() != 2 => {
                return Err(t.err(line, "cause template must list two connectives"));
            }
            _ => {}
        }
        self.logic_patterns.push(LogicPattern {
            kind,
            condition: c[1].to_string(),
            template: c[2].to_string(),
        });
        Ok(())
    }

    fn collocation_row(&mut self, t: &Table, line: usize, cols: &[&str]) -> Result<()> {
        let c = t.columns(line, cols, 4, 4)?;
        let kind = match c[0] {
            "subject_predicate" => CollocationKind::SubjectPredicate,
            "predicate_object" => CollocationKind::PredicateObject,
            "subject_object" => CollocationKind::SubjectObject,
            "modifier_head" => CollocationKind::ModifierHead,
            other => return Err(t.err(line, format!("unknown kind `{other}`"))),
        };
        let wrong = list(c[3]);
        if wrong.iter().any(|w| w == c[1]) {
            return Err(t.err(line, "wrong candidates must not contain the target"));
        }
        if wrong.is_empty() {
            return Err(t.err(line, "no wrong candidates"));
        }
        if let Some(existing) = self
            .collocations
            .iter_mut()
            .find(|e| e.kind == kind && e.target == c[1] && e.anchor == c[2])
        {
            merge_into(&mut existing.wrong, wrong);
        } else {
            self.collocations.push(Collocation {
                kind,
                target: c[1].to_string(),
                anchor: c[2].to_string(),
                wrong,
            });
        }
        Ok(())
    }

    fn synonym_row(&mut self, t: &Table, line: usize, cols: &[&str]) -> Result<()> {
        let c = t.columns(line, cols, 2, 3)?;
        let table = match c.get(2).copied().unwrap_or("synonym") {
            "synonym" => &mut self.synonyms,
            "subsume" => &mut self.subsumers,
            other => return Err(t.err(line, format!("unknown relation `{other}`"))),
        };
        let candidates: Vec<String> = list(c[1]).into_iter().filter(|w| w != c[0]).collect();
        if candidates.is_empty() {
            return Err(t.err(line, "no candidates besides the word itself"));
        }
        merge_into(table.entry(c[0].to_string()).or_default(), candidates);
        Ok(())
    }

    fn connective_row(&mut self, t: &Table, line: usize, cols: &[&str]) -> Result<()> {
        let c = t.columns(line, cols, 3, 3)?;
        let wrong = list(c[2]);
        if wrong.is_empty() || wrong.iter().any(|w| w == c[1]) {
            return Err(t.err(line, "wrong partners must be non-empty and differ from the correct one"));
        }
        if let Some(existing) = self
            .connectives
            .iter_mut()
            .find(|e| e.first == c[0] && e.second == c[1])
        {
            merge_into(&mut existing.wrong, wrong);
        } else {
            self.connectives.push(ConnectivePair {
                first: c[0].to_string(),
                second: c[1].to_string(),
                wrong,
            });
        }
        Ok(())
    }

    fn function_row(&mut self, t: &Table, line: usize, cols: &[&str]) -> Result<()> {
        let c = t.columns(line, cols, 2, 2)?;
        let target = match c[0] {
            "prepositions" => &mut self.function_words.prepositions,
            "auxiliaries" => &mut self.function_words.auxiliaries,
            "measure_words" => &mut self.function_words.measure_words,
            "essential_modifiers" => &mut self.function_words.essential_modifiers,
            other => return Err(t.err(line, format!("unknown category `{other}`"))),
        };
        merge_into(target, list(c[1]));
        Ok(())
    }
}

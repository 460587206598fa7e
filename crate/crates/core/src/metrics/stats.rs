use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::levenshtein::levenshtein;
use crate::text::{CoarseType, CorpusPair};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsReport {
    pub number_of_sentences: usize,
    pub erroneous_sentences: usize,
    pub number_of_references: usize,
    pub average_length_chars: f64,
    pub average_edit_distance_chars: f64,
    pub references_per_sentence: f64,
    /// Set only for an empty input stream.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub empty: bool,
}

impl StatsReport {
    pub const LABELS: [&'static str; 6] = [
        "Number of Sentences",
        "Erroneous Sentences",
        "Number of References",
        "Average Length (Char.)",
        "Edit Distance (Char.)",
        "References / Sentence",
    ];

    /// Table rows as `(label, formatted value)`.
    pub fn rows(&self) -> Vec<(&'static str, String)> {
        let values = [
            self.number_of_sentences.to_string(),
            self.erroneous_sentences.to_string(),
            self.number_of_references.to_string(),
            format!("{:.2}", self.average_length_chars),
            format!("{:.2}", self.average_edit_distance_chars),
            format!("{:.2}", self.references_per_sentence),
        ];
        Self::LABELS.into_iter().zip(values).collect()
    }

    pub fn to_table(&self) -> String {
        self.rows()
            .into_iter()
            .map(|(label, value)| format!("{label}\t{value}\n"))
            .collect()
    }
}

/// Streaming accumulator behind [`corpus_stats`].
#[derive(Debug, Clone, Default)]
pub struct StatsAccumulator {
    sentences: usize,
    erroneous: usize,
    references: usize,
    length_sum: usize,
    distance_sum: usize,
}

impl StatsAccumulator {
    pub fn add(&mut self, pair: &CorpusPair) {
        self.sentences += 1;
        self.references += 1;
        self.erroneous += usize::from(pair.incorrect != pair.correct);
        self.length_sum += pair.incorrect.chars().count();
        self.distance_sum += levenshtein(&pair.incorrect, &pair.correct).distance;
    }

    pub fn finish(&self) -> StatsReport {
        if self.sentences == 0 {
            return StatsReport {
                number_of_sentences: 0,
                erroneous_sentences: 0,
                number_of_references: 0,
                average_length_chars: 0.0,
                average_edit_distance_chars: 0.0,
                references_per_sentence: 0.0,
                empty: true,
            };
        }
        let n = self.sentences as f64;
        StatsReport {
            number_of_sentences: self.sentences,
            erroneous_sentences: self.erroneous,
            number_of_references: self.references,
            average_length_chars: self.length_sum as f64 / n,
            average_edit_distance_chars: self.distance_sum as f64 / n,
            references_per_sentence: self.references as f64 / n,
            empty: false,
        }
    }
}

/// Corpus statistics; every pair is one sentence with one reference.
pub fn corpus_stats<'a>(pairs: impl IntoIterator<Item = &'a CorpusPair>) -> StatsReport {
    let mut acc = StatsAccumulator::default();
    for pair in pairs {
        acc.add(pair);
    }
    acc.finish()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TypeEditRow {
    #[serde(rename = "Replace")]
    pub replace: f64,
    #[serde(rename = "Insert")]
    pub insert: f64,
    #[serde(rename = "Delete")]
    pub delete: f64,
    #[serde(rename = "Total")]
    pub total: f64,
    #[serde(skip)]
    pub pairs: usize,
}

#[derive(Debug, Clone, Default)]
pub struct TypeEditAccumulator {
    sums: BTreeMap<CoarseType, (usize, [usize; 4])>,
}

impl TypeEditAccumulator {
    pub fn add(&mut self, pair: &CorpusPair) {
        let coarse: BTreeSet<CoarseType> = pair.error_types.iter().map(|t| t.coarse).collect();
        if coarse.is_empty() {
            return;
        }
        let ops = levenshtein(&pair.incorrect, &pair.correct);
        for c in coarse {
            let (n, sums) = self.sums.entry(c).or_default();
            *n += 1;
            sums[0] += ops.replace;
            sums[1] += ops.insert;
            sums[2] += ops.delete;
            sums[3] += ops.distance;
        }
    }

    pub fn finish(&self) -> BTreeMap<CoarseType, TypeEditRow> {
        self.sums
            .iter()
            .map(|(&c, &(n, s))| {
                let n_f = n as f64;
                let row = TypeEditRow {
                    replace: s[0] as f64 / n_f,
                    insert: s[1] as f64 / n_f,
                    delete: s[2] as f64 / n_f,
                    total: s[3] as f64 / n_f,
                    pairs: n,
                };
                (c, row)
            })
            .collect()
    }
}

/// Average Replace/Insert/Delete/Total character operations turning the
/// incorrect text into the correct one, per coarse error type. A pair with
/// several coarse types counts once towards each.
pub fn per_type_edit_stats<'a>(pairs: impl IntoIterator<Item = &'a CorpusPair>) -> BTreeMap<CoarseType, TypeEditRow> {
    let mut acc = TypeEditAccumulator::default();
    for pair in pairs {
        acc.add(pair);
    }
    acc.finish()
}

pub fn type_table(rows: &BTreeMap<CoarseType, TypeEditRow>) -> String {
    let mut out = String::from("Type\tReplace\tInsert\tDelete\tTotal\n");
    for (c, r) in rows {
        out.push_str(&format!(
            "{}\t{:.2}\t{:.2}\t{:.2}\t{:.2}\n",
            c.label(),
            r.replace,
            r.insert,
            r.delete,
            r.total
        ));
    }
    out
}

//! Edit distance, MaxMatch scoring, corpus statistics and inter-annotator agreement.

mod kappa;
mod levenshtein;
pub mod m2;
mod stats;

pub use kappa::fleiss_kappa;
pub use levenshtein::{levenshtein, levenshtein_seq, EditOps};
pub use m2::{
    extract_system_edits, f_beta, pairs_to_m2, parse_m2, precision_recall_f, score_corpus, Counts, Edit, GoldEdit, M2Sentence,
    ScoreParams, ScoreReport,
};
pub use stats::{
    corpus_stats, per_type_edit_stats, type_table, StatsAccumulator, StatsReport, TypeEditAccumulator, TypeEditRow,
};

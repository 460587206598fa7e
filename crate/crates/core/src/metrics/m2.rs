//! MaxMatch (M²) evaluation: gold file parsing, system edit extraction over
//! the lattice of minimal alignments, and corpus-level P/R/F_β.
//!
//! # Gold file format
//!
//! ```text
//! S tok1 tok2 tok3
//! A 1 2|||R|||x|||REQUIRED|||-NONE-|||0
//!
//! S ...
//! ```
//!
//! `A` fields are `start end|||type|||correction|||required|||comment|||annotator`.
//! An annotation whose span is `-1 -1`, whose type is `noop`, or whose
//! correction is `-NONE-` records that the annotator left the sentence as is.
//! A sentence without `A` lines has one implicit annotator (id 0) with no edits.

use std::collections::{BTreeMap, HashSet};
use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::text::{diff_edits, CorpusPair};
use crate::{Error, Result};

/// A token-level edit: replace source tokens `[start, end)` with `correction`
/// (space-joined tokens, empty for a deletion).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Edit {
    pub start: usize,
    pub end: usize,
    pub correction: String,
}

impl Edit {
    pub fn new(start: usize, end: usize, correction: impl Into<String>) -> Self {
        Edit {
            start,
            end,
            correction: correction.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldEdit {
    pub start_token: usize,
    pub end_token: usize,
    pub correction: String,
    pub annotator_id: usize,
}

impl GoldEdit {
    pub fn edit(&self) -> Edit {
        Edit::new(self.start_token, self.end_token, self.correction.clone())
    }
}

/// One `S` block: source tokens and gold edits per annotator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct M2Sentence {
    pub source: Vec<String>,
    pub annotators: BTreeMap<usize, Vec<GoldEdit>>,
}

impl M2Sentence {
    pub fn gold_edits(&self, annotator: usize) -> Vec<Edit> {
        self.annotators
            .get(&annotator)
            .map(|edits| edits.iter().map(GoldEdit::edit).collect())
            .unwrap_or_default()
    }

    /// Source tokens with annotator `annotator`'s edits applied.
    pub fn corrected(&self, annotator: usize) -> Vec<String> {
        let mut edits = self.gold_edits(annotator);
        edits.sort();
        let mut out = Vec::new();
        let mut pos = 0;
        for e in edits {
            out.extend(self.source[pos..e.start].iter().cloned());
            out.extend(e.correction.split_whitespace().map(str::to_string));
            pos = e.end;
        }
        out.extend(self.source[pos..].iter().cloned());
        out
    }
}

pub fn parse_m2(content: &str, origin: &str) -> Result<Vec<M2Sentence>> {
    let mut sentences: Vec<M2Sentence> = Vec::new();
    let mut open = false;
    for (n, line) in content.lines().enumerate() {
        let line_no = n + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            open = false;
            continue;
        }
        if let Some(rest) = line.strip_prefix('S').filter(|r| r.is_empty() || r.starts_with(' ')) {
            sentences.push(M2Sentence {
                source: rest.split_whitespace().map(str::to_string).collect(),
                annotators: BTreeMap::new(),
            });
            open = true;
        } else if line.starts_with("A ") {
            let sentence = match sentences.last_mut() {
                Some(s) if open => s,
                _ => return Err(Error::parse(origin, line_no, "`A` line outside of a sentence block")),
            };
            parse_annotation(line, sentence, origin, line_no)?;
        } else {
            return Err(Error::parse(origin, line_no, "expected an `S` or `A` line"));
        }
    }
    for s in &mut sentences {
        if s.annotators.is_empty() {
            s.annotators.insert(0, Vec::new());
        }
    }
    Ok(sentences)
}

fn parse_annotation(line: &str, sentence: &mut M2Sentence, origin: &str, line_no: usize) -> Result<()> {
    let fields: Vec<&str> = line[2..].split("|||").collect();
    if fields.len() != 6 {
        return Err(Error::parse(
            origin,
            line_no,
            format!("expected 6 `|||`-separated fields, found {}", fields.len()),
        ));
    }
    let bad = |msg: &str| Error::parse(origin, line_no, msg.to_string());
    let mut span = fields[0].split_whitespace();
    let start: i64 = span.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("bad start offset"))?;
    let end: i64 = span.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("bad end offset"))?;
    if span.next().is_some() {
        return Err(bad("trailing data after span"));
    }
    let annotator: usize = fields[5]
        .trim()
        .parse()
        .map_err(|_| bad("bad annotator id"))?;
    let noop = (start, end) == (-1, -1) || fields[1] == "noop" || fields[2] == "-NONE-";
    let edits = sentence.annotators.entry(annotator).or_default();
    if noop {
        return Ok(());
    }
    if start < 0 || end < 0 {
        return Err(bad("negative offsets are only allowed as `-1 -1`"));
    }
    if start > end {
        return Err(bad("start offset exceeds end offset"));
    }
    if end as usize > sentence.source.len() {
        return Err(bad("span exceeds the source length"));
    }
    edits.push(GoldEdit {
        start_token: start as usize,
        end_token: end as usize,
        correction: fields[2].split_whitespace().collect::<Vec<_>>().join(" "),
        annotator_id: annotator,
    });
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreParams {
    pub beta: f64,
    pub max_unchanged: usize,
    pub char_tokenize: bool,
}

impl Default for ScoreParams {
    fn default() -> Self {
        ScoreParams {
            beta: 0.5,
            max_unchanged: 2,
            char_tokenize: false,
        }
    }
}

/// Alignment lattice node: `(source position, hypothesis position)`.
type Node = (usize, usize);

struct Lattice {
    width: usize,
    /// Forward minimal cost per node.
    cost: Vec<usize>,
    on_path: Vec<bool>,
    /// Unit steps `(target, is_match)` along minimal alignments.
    steps: Vec<Vec<(Node, bool)>>,
}

impl Lattice {
    fn build(src: &[String], hyp: &[String]) -> Lattice {
        let (m, n) = (src.len(), hyp.len());
        let w = n + 1;
        let idx = |i: usize, j: usize| i * w + j;
        let mut fwd = vec![usize::MAX; (m + 1) * w];
        let mut bwd = vec![usize::MAX; (m + 1) * w];
        for i in 0..=m {
            for j in 0..=n {
                fwd[idx(i, j)] = if i == 0 && j == 0 {
                    0
                } else {
                    let mut best = usize::MAX;
                    if i > 0 && j > 0 {
                        best = best.min(fwd[idx(i - 1, j - 1)] + usize::from(src[i - 1] != hyp[j - 1]));
                    }
                    if i > 0 {
                        best = best.min(fwd[idx(i - 1, j)] + 1);
                    }
                    if j > 0 {
                        best = best.min(fwd[idx(i, j - 1)] + 1);
                    }
                    best
                };
            }
        }
        for i in (0..=m).rev() {
            for j in (0..=n).rev() {
                bwd[idx(i, j)] = if i == m && j == n {
                    0
                } else {
                    let mut best = usize::MAX;
                    if i < m && j < n {
                        best = best.min(bwd[idx(i + 1, j + 1)] + usize::from(src[i] != hyp[j]));
                    }
                    if i < m {
                        best = best.min(bwd[idx(i + 1, j)] + 1);
                    }
                    if j < n {
                        best = best.min(bwd[idx(i, j + 1)] + 1);
                    }
                    best
                };
            }
        }
        let total = fwd[idx(m, n)];
        let on_path: Vec<bool> = (0..fwd.len()).map(|k| fwd[k] + bwd[k] == total).collect();
        let mut steps = vec![Vec::new(); fwd.len()];
        for i in 0..=m {
            for j in 0..=n {
                let here = idx(i, j);
                if !on_path[here] {
                    continue;
                }
                let mut push = |ti: usize, tj: usize, step_cost: usize, is_match: bool| {
                    let t = idx(ti, tj);
                    if on_path[t] && fwd[t] == fwd[here] + step_cost {
                        steps[here].push(((ti, tj), is_match));
                    }
                };
                if i < m && j < n {
                    let same = src[i] == hyp[j];
                    push(i + 1, j + 1, usize::from(!same), same);
                }
                if i < m {
                    push(i + 1, j, 1, false);
                }
                if j < n {
                    push(i, j + 1, 1, false);
                }
            }
        }
        Lattice {
            width: w,
            cost: fwd,
            on_path,
            steps,
        }
    }

    fn idx(&self, (i, j): Node) -> usize {
        i * self.width + j
    }

    /// Nodes reachable from `from` with at most `max_unchanged` match steps,
    /// with the fewest matches needed to reach each.
    fn reachable(&self, from: Node, max_unchanged: usize) -> Vec<(Node, usize)> {
        let mut best: BTreeMap<(usize, usize, usize), usize> = BTreeMap::new();
        // key ordered by i + j so that every node is final before expansion
        best.insert((from.0 + from.1, from.0, from.1), 0);
        let mut out = Vec::new();
        while let Some((&(d, i, j), &matches)) = best.iter().next() {
            best.remove(&(d, i, j));
            out.push(((i, j), matches));
            for &(next, is_match) in &self.steps[self.idx((i, j))] {
                let m = matches + usize::from(is_match);
                if m > max_unchanged {
                    continue;
                }
                let key = (next.0 + next.1, next.0, next.1);
                let slot = best.entry(key).or_insert(m);
                *slot = (*slot).min(m);
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
struct Best {
    tp: usize,
    edits: Vec<Edit>,
}

fn better(tp: usize, first: Option<&Edit>, rest: &[Edit], current: &Best) -> bool {
    let count = rest.len() + usize::from(first.is_some());
    match tp.cmp(&current.tp) {
        Ordering::Greater => return true,
        Ordering::Less => return false,
        Ordering::Equal => {}
    }
    match count.cmp(&current.edits.len()) {
        Ordering::Less => return true,
        Ordering::Greater => return false,
        Ordering::Equal => {}
    }
    let candidate = first.into_iter().chain(rest.iter()).map(|e| (e.start, e.end));
    let incumbent = current.edits.iter().map(|e| (e.start, e.end));
    candidate.lt(incumbent)
}

/// MaxMatch system edit extraction.
///
/// Among all segmentations of minimal-cost token alignments into edits
/// (runs of alignment steps containing at least one change and at most
/// `max_unchanged` unchanged tokens), returns the edit list that maximizes
/// the number of edits found in `gold`, then minimizes the number of edits,
/// then prefers the lexicographically smallest span sequence. Two adjacent
/// pure insertions at the same position are always merged.
pub fn extract_system_edits(
    source: &[String],
    hypothesis: &[String],
    gold: &[Edit],
    max_unchanged: usize,
) -> Vec<Edit> {
    if source == hypothesis {
        return Vec::new();
    }
    let gold: HashSet<&Edit> = gold.iter().collect();
    let lattice = Lattice::build(source, hypothesis);
    let (m, n) = (source.len(), hypothesis.len());

    let mut nodes: Vec<Node> = (0..=m)
        .flat_map(|i| (0..=n).map(move |j| (i, j)))
        .filter(|&node| lattice.on_path[lattice.idx(node)])
        .collect();
    nodes.sort_by_key(|&(i, j)| std::cmp::Reverse((i + j, i)));

    // best[k]: best suffix from node k; no_insert[k]: same, but not starting
    // with a pure insertion.
    let mut best: Vec<Option<Best>> = vec![None; lattice.cost.len()];
    let mut no_insert: Vec<Option<Best>> = vec![None; lattice.cost.len()];
    let end = lattice.idx((m, n));
    best[end] = Some(Best { tp: 0, edits: Vec::new() });
    no_insert[end] = best[end].clone();

    for &u in &nodes {
        let ui = lattice.idx(u);
        if ui == end {
            continue;
        }
        let mut overall: Option<Best> = None;
        let mut without_insert: Option<Best> = None;
        let offer = |slot: &mut Option<Best>, tp: usize, first: Option<&Edit>, rest: &[Edit]| {
            let replace = match slot {
                None => true,
                Some(cur) => better(tp, first, rest, cur),
            };
            if replace {
                let mut edits = Vec::with_capacity(rest.len() + 1);
                edits.extend(first.cloned());
                edits.extend_from_slice(rest);
                *slot = Some(Best { tp, edits });
            }
        };

        for &(v, is_match) in &lattice.steps[ui] {
            if is_match {
                if let Some(suffix) = &best[lattice.idx(v)] {
                    offer(&mut overall, suffix.tp, None, &suffix.edits);
                    offer(&mut without_insert, suffix.tp, None, &suffix.edits);
                }
            }
        }
        for (v, _) in lattice.reachable(u, max_unchanged) {
            let vi = lattice.idx(v);
            if lattice.cost[vi] == lattice.cost[ui] {
                continue;
            }
            let edit = Edit::new(u.0, v.0, hypothesis[u.1..v.1].join(" "));
            let pure_insert = u.0 == v.0;
            let suffix = if pure_insert { &no_insert[vi] } else { &best[vi] };
            let Some(suffix) = suffix else { continue };
            let tp = suffix.tp + usize::from(gold.contains(&edit));
            offer(&mut overall, tp, Some(&edit), &suffix.edits);
            if !pure_insert {
                offer(&mut without_insert, tp, Some(&edit), &suffix.edits);
            }
        }
        best[ui] = overall;
        no_insert[ui] = without_insert;
    }
    best[lattice.idx((0, 0))]
        .take()
        .map(|b| b.edits)
        .unwrap_or_default()
}

/// Counts of one comparison between a system edit set and a gold set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Counts {
    pub fn between(system: &[Edit], gold: &[Edit]) -> Counts {
        let gold: HashSet<&Edit> = gold.iter().collect();
        let system: HashSet<&Edit> = system.iter().collect();
        let tp = system.intersection(&gold).count();
        Counts {
            tp,
            fp: system.len() - tp,
            fn_: gold.len() - tp,
        }
    }
}

impl std::ops::Add for Counts {
    type Output = Counts;

    fn add(self, o: Counts) -> Counts {
        Counts {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
        }
    }
}

/// F_β from precision and recall; 0 when either is 0.
pub fn f_beta(precision: f64, recall: f64, beta: f64) -> f64 {
    let b2 = beta * beta;
    if precision * recall == 0.0 {
        0.0
    } else {
        (1.0 + b2) * precision * recall / (b2 * precision + recall)
    }
}

/// Precision, recall and F_β with the empty-set conventions
/// P = 1 when nothing was proposed, R = 1 when nothing was expected.
pub fn precision_recall_f(counts: Counts, beta: f64) -> (f64, f64, f64) {
    let Counts { tp, fp, fn_ } = counts;
    let p = if tp + fp == 0 { 1.0 } else { tp as f64 / (tp + fp) as f64 };
    let r = if tp + fn_ == 0 { 1.0 } else { tp as f64 / (tp + fn_) as f64 };
    (p, r, f_beta(p, r, beta))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreReport {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_beta: f64,
    pub beta: f64,
    pub char_tokenize: bool,
    pub chosen_annotators: Vec<usize>,
}

impl ScoreReport {
    /// `Precision : x`, `Recall : x`, `F_β : x` lines with four decimals.
    pub fn summary_lines(&self) -> String {
        format!(
            "Precision : {:.4}\nRecall : {:.4}\nF_{} : {:.4}\n",
            self.precision, self.recall, self.beta, self.f_beta
        )
    }
}

pub fn tokenize(line: &str, char_tokenize: bool) -> Vec<String> {
    if char_tokenize {
        line.chars()
            .filter(|c| !c.is_whitespace())
            .map(String::from)
            .collect()
    } else {
        line.split_whitespace().map(str::to_string).collect()
    }
}

/// Per-sentence, per-annotator counts for a hypothesis.
pub fn sentence_counts(sentence: &M2Sentence, hypothesis: &[String], max_unchanged: usize) -> Vec<(usize, Counts)> {
    sentence
        .annotators
        .keys()
        .map(|&a| {
            let gold = sentence.gold_edits(a);
            let system = extract_system_edits(&sentence.source, hypothesis, &gold, max_unchanged);
            (a, Counts::between(&system, &gold))
        })
        .collect()
}

/// Picks, for each sentence in order, the annotator that maximizes the
/// running corpus F_β (ties go to the lowest annotator id) and sums counts.
pub fn select_annotators(per_sentence: &[Vec<(usize, Counts)>], beta: f64) -> (Counts, Vec<usize>) {
    let mut total = Counts::default();
    let mut chosen = Vec::with_capacity(per_sentence.len());
    for options in per_sentence {
        let mut pick: Option<(usize, Counts, f64)> = None;
        for &(annotator, counts) in options {
            let f = precision_recall_f(total + counts, beta).2;
            if pick.as_ref().is_none_or(|(_, _, best)| f > *best) {
                pick = Some((annotator, counts, f));
            }
        }
        if let Some((annotator, counts, _)) = pick {
            total = total + counts;
            chosen.push(annotator);
        }
    }
    (total, chosen)
}

/// Scores hypotheses against an M² gold file.
///
/// `sources`, when given, must tokenize exactly like the gold `S` lines.
pub fn score_corpus(
    hypotheses: &[String],
    gold: &[M2Sentence],
    sources: Option<&[String]>,
    params: &ScoreParams,
) -> Result<ScoreReport> {
    if params.beta.partial_cmp(&0.0) != Some(Ordering::Greater) {
        return Err(Error::Config(format!("beta must be positive, got {}", params.beta)));
    }
    if hypotheses.len() != gold.len() {
        return Err(Error::Validation(format!(
            "{} hypotheses but {} gold sentences",
            hypotheses.len(),
            gold.len()
        )));
    }
    if params.char_tokenize {
        if let Some(i) = gold
            .iter()
            .position(|s| s.source.iter().any(|t| t.chars().count() != 1))
        {
            return Err(Error::Validation(format!(
                "character tokenization requested but gold sentence {} is word-tokenized",
                i + 1
            )));
        }
    }
    if let Some(sources) = sources {
        if sources.len() != gold.len() {
            return Err(Error::Validation(format!(
                "{} source sentences but {} gold sentences",
                sources.len(),
                gold.len()
            )));
        }
        for (i, (src, g)) in sources.iter().zip(gold).enumerate() {
            if tokenize(src, params.char_tokenize) != g.source {
                return Err(Error::Validation(format!(
                    "source sentence {} does not match the gold `S` line tokenization",
                    i + 1
                )));
            }
        }
    }

    let per_sentence: Vec<Vec<(usize, Counts)>> = hypotheses
        .par_iter()
        .zip(gold.par_iter())
        .map(|(hyp, sentence)| {
            let hyp = tokenize(hyp, params.char_tokenize);
            sentence_counts(sentence, &hyp, params.max_unchanged)
        })
        .collect();
    let (total, chosen_annotators) = select_annotators(&per_sentence, params.beta);
    let (precision, recall, f) = precision_recall_f(total, params.beta);
    Ok(ScoreReport {
        tp: total.tp,
        fp: total.fp,
        fn_: total.fn_,
        precision,
        recall,
        f_beta: f,
        beta: params.beta,
        char_tokenize: params.char_tokenize,
        chosen_annotators,
    })
}

/// Writes generated pairs as character-tokenized M² gold, one annotator per
/// pair. Score against it with `char_tokenize` set.
///
/// The written edits are the minimal character alignment of `incorrect` to
/// `correct` rather than the pair's stored edits: a rule's edit may rewrite a
/// whole span (a swap, say), and such an edit lies on no minimal alignment,
/// so no system could ever match it.
pub fn pairs_to_m2(pairs: &[CorpusPair]) -> Result<String> {
    let mut out = String::new();
    for p in pairs {
        if p.incorrect.chars().chain(p.correct.chars()).any(char::is_whitespace) {
            return Err(Error::Validation(format!("pair {}: whitespace cannot be written as M² characters", p.id)));
        }
        let chars: Vec<String> = p.incorrect.chars().map(String::from).collect();
        out.push_str("S ");
        out.push_str(&chars.join(" "));
        out.push('\n');
        let edits = diff_edits(&p.incorrect, &p.correct);
        if edits.is_empty() {
            out.push_str("A -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||0\n");
        }
        for e in &edits {
            let correction: Vec<String> = e.replacement.chars().map(String::from).collect();
            out.push_str(&format!(
                "A {} {}|||{}|||{}|||REQUIRED|||-NONE-|||0\n",
                e.start,
                e.end,
                p.rule_id,
                correction.join(" ")
            ));
        }
        out.push('\n');
    }
    Ok(out)
}

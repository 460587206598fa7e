//! Character n-gram language model with additive smoothing, and the
//! perplexity-percentile filter used to select fluent source sentences.
//!
//! Sentences are padded with `order - 1` boundary symbols on the left and one
//! on the right; the same boundary symbol serves as start and end marker. The
//! context table counts how often each history was followed by a prediction,
//! so smoothed distributions normalize exactly over the vocabulary.
//!
//! # Model file format
//!
//! A line-oriented UTF-8 file:
//!
//! ```text
//! clg-ngram-model 1
//! order <n>
//! alpha <float>
//! vocab <k>
//! <k space-separated hex code points>
//! ngrams <m>
//! <n space-separated hex symbols><TAB><count>     (m lines)
//! contexts <c>
//! <n-1 space-separated hex symbols><TAB><count>   (c lines)
//! ```
//!
//! The boundary symbol is written as `110000`. Entry lines are sorted.

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::{Error, Result};

const BOUNDARY: u32 = 0x11_0000;
const UNK: u32 = 0x11_0001;
const FORMAT_HEADER: &str = "clg-ngram-model 1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmConfig {
    pub order: usize,
    pub alpha: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        LmConfig {
            order: 3,
            alpha: 1.0,
        }
    }
}

impl LmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.order < 1 {
            return Err(Error::Config("n-gram order must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!(
                "smoothing constant must be positive, got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Mergeable partial counts; turn into a model with [`NGramCounter::finish`].
#[derive(Debug, Clone)]
pub struct NGramCounter {
    order: usize,
    sentences: usize,
    vocab: BTreeSet<char>,
    ngrams: HashMap<Vec<u32>, u64>,
    contexts: HashMap<Vec<u32>, u64>,
}

impl NGramCounter {
    pub fn new(order: usize) -> Self {
        NGramCounter {
            order,
            sentences: 0,
            vocab: BTreeSet::new(),
            ngrams: HashMap::new(),
            contexts: HashMap::new(),
        }
    }

    pub fn add_sentence(&mut self, sentence: &str) {
        self.sentences += 1;
        self.vocab.extend(sentence.chars());
        let padded = pad(sentence.chars().map(|c| c as u32), self.order);
        for window in padded.windows(self.order) {
            *self.ngrams.entry(window.to_vec()).or_insert(0) += 1;
            *self
                .contexts
                .entry(window[..self.order - 1].to_vec())
                .or_insert(0) += 1;
        }
    }

    pub fn merge(&mut self, other: NGramCounter) {
        assert_eq!(self.order, other.order, "cannot merge counts of different orders");
        self.sentences += other.sentences;
        self.vocab.extend(other.vocab);
        for (k, v) in other.ngrams {
            *self.ngrams.entry(k).or_insert(0) += v;
        }
        for (k, v) in other.contexts {
            *self.contexts.entry(k).or_insert(0) += v;
        }
    }

    pub fn finish(self, config: &LmConfig) -> Result<NGramModel> {
        config.validate()?;
        if config.order != self.order {
            return Err(Error::Config(format!(
                "counts were collected for order {}, config asks for {}",
                self.order, config.order
            )));
        }
        if self.sentences == 0 {
            return Err(Error::Config("cannot train a language model on an empty corpus".into()));
        }
        Ok(NGramModel {
            order: self.order,
            alpha: config.alpha,
            vocab: self.vocab,
            ngrams: self.ngrams,
            contexts: self.contexts,
        })
    }
}

fn pad(symbols: impl Iterator<Item = u32>, order: usize) -> Vec<u32> {
    let mut padded = vec![BOUNDARY; order - 1];
    padded.extend(symbols);
    padded.push(BOUNDARY);
    padded
}

#[derive(Debug, Clone, PartialEq)]
pub struct NGramModel {
    order: usize,
    alpha: f64,
    vocab: BTreeSet<char>,
    ngrams: HashMap<Vec<u32>, u64>,
    contexts: HashMap<Vec<u32>, u64>,
}

/// Counts n-grams over the corpus. Counts do not depend on input order.
pub fn train_lm<I, S>(corpus: I, config: &LmConfig) -> Result<NGramModel>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    config.validate()?;
    let mut counter = NGramCounter::new(config.order);
    for sentence in corpus {
        counter.add_sentence(sentence.as_ref());
    }
    counter.finish(config)
}

impl NGramModel {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Training characters plus UNK and the boundary symbol.
    pub fn vocab_size(&self) -> usize {
        self.vocab.len() + 2
    }

    /// Every symbol a prediction can produce.
    pub fn symbols(&self) -> Vec<u32> {
        let mut s: Vec<u32> = self.vocab.iter().map(|&c| c as u32).collect();
        s.push(UNK);
        s.push(BOUNDARY);
        s
    }

    pub fn contexts(&self) -> impl Iterator<Item = &[u32]> {
        self.contexts.keys().map(Vec::as_slice)
    }

    pub fn ngram_count(&self, ngram: &[u32]) -> u64 {
        self.ngrams.get(ngram).copied().unwrap_or(0)
    }

    pub fn context_count(&self, history: &[u32]) -> u64 {
        self.contexts.get(history).copied().unwrap_or(0)
    }

    pub fn boundary_symbol() -> u32 {
        BOUNDARY
    }

    pub fn unk_symbol() -> u32 {
        UNK
    }

    /// Maps a character to its symbol, or UNK when unseen in training.
    pub fn symbol(&self, c: char) -> u32 {
        if self.vocab.contains(&c) {
            c as u32
        } else {
            UNK
        }
    }

    /// Smoothed `p(next | history)`; `history` has `order - 1` symbols.
    pub fn prob(&self, history: &[u32], next: u32) -> f64 {
        debug_assert_eq!(history.len(), self.order - 1);
        let mut key = Vec::with_capacity(self.order);
        key.extend_from_slice(history);
        key.push(next);
        let count = self.ngram_count(&key) as f64;
        let context = self.context_count(history) as f64;
        (count + self.alpha) / (context + self.alpha * self.vocab_size() as f64)
    }

    /// Natural-log probability summed over all prediction events, and the event count.
    pub fn log_prob(&self, sentence: &str) -> (f64, usize) {
        let padded = pad(sentence.chars().map(|c| self.symbol(c)), self.order);
        let mut total = 0.0;
        let mut events = 0;
        for window in padded.windows(self.order) {
            let (history, next) = window.split_at(self.order - 1);
            total += self.prob(history, next[0]).ln();
            events += 1;
        }
        (total, events)
    }

    pub fn perplexity(&self, sentence: &str) -> f64 {
        let (log_prob, events) = self.log_prob(sentence);
        (-log_prob / events as f64).exp()
    }

    pub fn save<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{FORMAT_HEADER}")?;
        writeln!(out, "order {}", self.order)?;
        writeln!(out, "alpha {:?}", self.alpha)?;
        writeln!(out, "vocab {}", self.vocab.len())?;
        let vocab: Vec<String> = self.vocab.iter().map(|&c| format!("{:x}", c as u32)).collect();
        writeln!(out, "{}", vocab.join(" "))?;
        for (name, table) in [("ngrams", &self.ngrams), ("contexts", &self.contexts)] {
            let mut entries: Vec<(&Vec<u32>, &u64)> = table.iter().collect();
            entries.sort();
            writeln!(out, "{name} {}", entries.len())?;
            for (key, count) in entries {
                let key: Vec<String> = key.iter().map(|s| format!("{s:x}")).collect();
                writeln!(out, "{}\t{count}", key.join(" "))?;
            }
        }
        Ok(())
    }

    pub fn load<R: BufRead>(input: R, origin: &str) -> Result<Self> {
        let mut lines = input.lines().enumerate().map(|(n, l)| {
            l.map(|l| (n + 1, l))
                .map_err(|e| Error::io(origin, e))
        });
        let mut next_line = |what: &str| -> Result<(usize, String)> {
            lines
                .next()
                .transpose()?
                .ok_or_else(|| Error::parse(origin, 0, format!("unexpected end of file, expected {what}")))
        };
        let (n, header) = next_line("header")?;
        if header.trim() != FORMAT_HEADER {
            return Err(Error::parse(origin, n, "not a clg n-gram model file"));
        }
        let order: usize = header_value(&mut next_line, origin, "order")?;
        let alpha: f64 = header_value(&mut next_line, origin, "alpha")?;
        let vocab_len: usize = header_value(&mut next_line, origin, "vocab")?;
        let (n, vocab_line) = next_line("vocabulary")?;
        let vocab: BTreeSet<char> = vocab_line
            .split_whitespace()
            .map(|h| {
                u32::from_str_radix(h, 16)
                    .ok()
                    .and_then(char::from_u32)
                    .ok_or_else(|| Error::parse(origin, n, format!("bad code point `{h}`")))
            })
            .collect::<Result<_>>()?;
        if vocab.len() != vocab_len {
            return Err(Error::parse(origin, n, "vocabulary size mismatch"));
        }
        let mut tables = Vec::new();
        for (name, width) in [("ngrams", order), ("contexts", order - 1)] {
            let entries: usize = header_value(&mut next_line, origin, name)?;
            let mut table = HashMap::with_capacity(entries);
            for _ in 0..entries {
                let (n, line) = next_line(name)?;
                let (key, count) = line
                    .split_once('\t')
                    .ok_or_else(|| Error::parse(origin, n, "expected `symbols<TAB>count`"))?;
                let key: Vec<u32> = key
                    .split_whitespace()
                    .map(|h| u32::from_str_radix(h, 16))
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::parse(origin, n, "bad symbol"))?;
                if key.len() != width {
                    return Err(Error::parse(origin, n, format!("expected {width} symbols")));
                }
                let count: u64 = count
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(origin, n, "bad count"))?;
                table.insert(key, count);
            }
            tables.push(table);
        }
        let contexts = tables.pop().unwrap_or_default();
        let ngrams = tables.pop().unwrap_or_default();
        let model = NGramModel {
            order,
            alpha,
            vocab,
            ngrams,
            contexts,
        };
        LmConfig { order, alpha }.validate()?;
        Ok(model)
    }
}

fn header_value<T: std::str::FromStr>(
    next_line: &mut impl FnMut(&str) -> Result<(usize, String)>,
    origin: &str,
    key: &str,
) -> Result<T> {
    let (n, line) = next_line(key)?;
    line.strip_prefix(key)
        .and_then(|rest| rest.trim().parse().ok())
        .ok_or_else(|| Error::parse(origin, n, format!("expected `{key} <value>`")))
}

pub fn perplexity(model: &NGramModel, sentence: &str) -> f64 {
    model.perplexity(sentence)
}

/// Number of sentences kept out of `count` for `keep_percent`.
pub fn keep_count(count: usize, keep_percent: f64) -> usize {
    let exact = keep_percent * count as f64 / 100.0;
    // absorb representation error so that e.g. 90% of 10 is 9, not 10
    ((exact - 1e-9).ceil().max(0.0) as usize).min(count)
}

/// Indices (ascending) of the lowest-perplexity `ceil(keep_percent% · n)`
/// sentences. Ties at the threshold keep the earlier sentence.
pub fn filter_percentile_indices<S: AsRef<str> + Sync>(
    corpus: &[S],
    model: &NGramModel,
    keep_percent: f64,
) -> Result<Vec<usize>> {
    check_keep_percent(keep_percent)?;
    lowest_indices(&perplexities(corpus, model), keep_percent)
}

fn check_keep_percent(keep_percent: f64) -> Result<()> {
    if !(keep_percent > 0.0 && keep_percent <= 100.0) {
        return Err(Error::Config(format!(
            "keep percentage must be in (0, 100], got {keep_percent}"
        )));
    }
    Ok(())
}

/// Perplexity of every sentence, computed in parallel.
pub fn perplexities<S: AsRef<str> + Sync>(corpus: &[S], model: &NGramModel) -> Vec<f64> {
    corpus.par_iter().map(|s| model.perplexity(s.as_ref())).collect()
}

/// [`filter_percentile_indices`] over precomputed scores.
pub fn lowest_indices(scores: &[f64], keep_percent: f64) -> Result<Vec<usize>> {
    check_keep_percent(keep_percent)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
    order.truncate(keep_count(scores.len(), keep_percent));
    order.sort_unstable();
    Ok(order)
}

/// Keeps the lowest-perplexity sentences, preserving corpus order.
pub fn filter_percentile<S: AsRef<str> + Sync + Clone>(
    corpus: &[S],
    model: &NGramModel,
    keep_percent: f64,
) -> Result<Vec<S>> {
    Ok(filter_percentile_indices(corpus, model, keep_percent)?
        .into_iter()
        .map(|i| corpus[i].clone())
        .collect())
}

/// Uniform sample of `k` items without replacement (reservoir sampling),
/// returned with their original indices in input order.
pub fn audit_sample<I, T>(items: I, k: usize, seed: u64) -> Vec<(usize, T)>
where
    I: IntoIterator<Item = T>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reservoir: Vec<(usize, T)> = Vec::with_capacity(k);
    for (i, item) in items.into_iter().enumerate() {
        if reservoir.len() < k {
            reservoir.push((i, item));
        } else if k > 0 {
            let j = rng.gen_range(0..=i);
            if j < k {
                reservoir[j] = (i, item);
            }
        }
    }
    reservoir.sort_by_key(|(i, _)| *i);
    reservoir
}

//! Brute-force reference implementations used as test oracles.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use clg_core::metrics::{precision_recall_f, Counts, Edit, M2Sentence};

/// Top-down recursive edit distance, memoized on suffix positions.
pub fn levenshtein_rec(a: &[char], b: &[char]) -> usize {
    fn go(a: &[char], b: &[char], i: usize, j: usize, memo: &mut HashMap<(usize, usize), usize>) -> usize {
        if i == a.len() {
            return b.len() - j;
        }
        if j == b.len() {
            return a.len() - i;
        }
        if let Some(&d) = memo.get(&(i, j)) {
            return d;
        }
        let d = if a[i] == b[j] {
            go(a, b, i + 1, j + 1, memo)
        } else {
            1 + go(a, b, i + 1, j + 1, memo)
                .min(go(a, b, i + 1, j, memo))
                .min(go(a, b, i, j + 1, memo))
        };
        memo.insert((i, j), d);
        d
    }
    go(a, b, 0, 0, &mut HashMap::new())
}

type Node = (usize, usize);

/// Every candidate system edit list for `src → hyp`, enumerated explicitly:
/// walk every minimal-cost alignment and group its steps into edits in every
/// allowed way.
pub struct M2Oracle<'a> {
    src: &'a [String],
    hyp: &'a [String],
    max_unchanged: usize,
    prefix: HashMap<(usize, usize), usize>,
    suffix: HashMap<(usize, usize), usize>,
    memo: HashMap<(Node, bool), Vec<Vec<Edit>>>,
}

fn dist(a: &[String], b: &[String]) -> usize {
    let a: Vec<char> = a.iter().map(|t| char::from_u32(0xE000 + intern(t)).unwrap()).collect();
    let b: Vec<char> = b.iter().map(|t| char::from_u32(0xE000 + intern(t)).unwrap()).collect();
    levenshtein_rec(&a, &b)
}

fn intern(t: &str) -> u32 {
    thread_local! {
        static TABLE: std::cell::RefCell<HashMap<String, u32>> = std::cell::RefCell::new(HashMap::new());
    }
    TABLE.with(|table| {
        let mut table = table.borrow_mut();
        let n = table.len() as u32;
        *table.entry(t.to_string()).or_insert(n)
    })
}

impl<'a> M2Oracle<'a> {
    pub fn new(src: &'a [String], hyp: &'a [String], max_unchanged: usize) -> Self {
        let mut prefix = HashMap::new();
        let mut suffix = HashMap::new();
        for i in 0..=src.len() {
            for j in 0..=hyp.len() {
                prefix.insert((i, j), dist(&src[..i], &hyp[..j]));
                suffix.insert((i, j), dist(&src[i..], &hyp[j..]));
            }
        }
        M2Oracle {
            src,
            hyp,
            max_unchanged,
            prefix,
            suffix,
            memo: HashMap::new(),
        }
    }

    fn total(&self) -> usize {
        self.prefix[&(self.src.len(), self.hyp.len())]
    }

    fn on_path(&self, node: (usize, usize)) -> bool {
        self.prefix[&node] + self.suffix[&node] == self.total()
    }

    /// Unit steps along minimal alignments: `(target, is_match)`.
    fn steps(&self, (i, j): (usize, usize)) -> Vec<((usize, usize), bool)> {
        let mut out = Vec::new();
        let mut consider = |v: (usize, usize), cost: usize, is_match: bool| {
            if self.on_path(v) && self.prefix[&v] == self.prefix[&(i, j)] + cost {
                out.push((v, is_match));
            }
        };
        if i < self.src.len() && j < self.hyp.len() {
            let same = self.src[i] == self.hyp[j];
            consider((i + 1, j + 1), usize::from(!same), same);
        }
        if i < self.src.len() {
            consider((i + 1, j), 1, false);
        }
        if j < self.hyp.len() {
            consider((i, j + 1), 1, false);
        }
        out
    }

    /// Ends of step walks from `u` with at most `max_unchanged` matches that
    /// include at least one change.
    fn edit_ends(&self, u: (usize, usize)) -> Vec<(usize, usize)> {
        let mut ends = Vec::new();
        let mut stack = vec![(u, 0usize, false)];
        while let Some((node, matches, changed)) = stack.pop() {
            if changed && !ends.contains(&node) {
                ends.push(node);
            }
            for (v, is_match) in self.steps(node) {
                let m = matches + usize::from(is_match);
                if m <= self.max_unchanged {
                    stack.push((v, m, changed || !is_match));
                }
            }
        }
        ends
    }

    fn lists(&mut self, u: (usize, usize), after_insert: bool) -> Vec<Vec<Edit>> {
        if u == (self.src.len(), self.hyp.len()) {
            return vec![Vec::new()];
        }
        if let Some(v) = self.memo.get(&(u, after_insert)) {
            return v.clone();
        }
        let mut out = Vec::new();
        for (v, is_match) in self.steps(u) {
            if is_match {
                out.extend(self.lists(v, false));
            }
        }
        for v in self.edit_ends(u) {
            let pure_insert = u.0 == v.0;
            if pure_insert && after_insert {
                continue;
            }
            let edit = Edit::new(u.0, v.0, self.hyp[u.1..v.1].join(" "));
            for rest in self.lists(v, pure_insert) {
                let mut list = vec![edit.clone()];
                list.extend(rest);
                out.push(list);
            }
        }
        out.sort();
        out.dedup();
        self.memo.insert((u, after_insert), out.clone());
        out
    }

    pub fn all_lists(&mut self) -> Vec<Vec<Edit>> {
        self.lists((0, 0), false)
    }
}

/// The candidate list with the most gold matches, then the fewest edits, then
/// the smallest span sequence.
pub fn oracle_system_edits(src: &[String], hyp: &[String], gold: &[Edit], max_unchanged: usize) -> Vec<Edit> {
    let lists = M2Oracle::new(src, hyp, max_unchanged).all_lists();
    lists
        .into_iter()
        .min_by(|a, b| {
            let tp = |l: &Vec<Edit>| l.iter().filter(|e| gold.contains(e)).count();
            let spans = |l: &Vec<Edit>| l.iter().map(|e| (e.start, e.end)).collect::<Vec<_>>();
            tp(b).cmp(&tp(a))
                .then(a.len().cmp(&b.len()))
                .then(spans(a).cmp(&spans(b)))
        })
        .unwrap_or_default()
}

pub fn oracle_counts(system: &[Edit], gold: &[Edit]) -> Counts {
    let mut system = system.to_vec();
    system.sort();
    system.dedup();
    let mut gold = gold.to_vec();
    gold.sort();
    gold.dedup();
    let tp = system.iter().filter(|e| gold.contains(e)).count();
    Counts {
        tp,
        fp: system.len() - tp,
        fn_: gold.len() - tp,
    }
}

/// Corpus counts with per-sentence greedy annotator choice by running F.
pub fn oracle_score(hyps: &[Vec<String>], gold: &[M2Sentence], max_unchanged: usize, beta: f64) -> Counts {
    let mut total = Counts::default();
    for (hyp, sentence) in hyps.iter().zip(gold) {
        let per: BTreeMap<usize, Counts> = sentence
            .annotators
            .keys()
            .map(|&a| {
                let g = sentence.gold_edits(a);
                let sys = oracle_system_edits(&sentence.source, hyp, &g, max_unchanged);
                (a, oracle_counts(&sys, &g))
            })
            .collect();
        let mut best: Option<(f64, Counts)> = None;
        for c in per.values() {
            let f = precision_recall_f(total + *c, beta).2;
            if best.is_none_or(|(bf, _)| f > bf) {
                best = Some((f, *c));
            }
        }
        if let Some((_, c)) = best {
            total = total + c;
        }
    }
    total
}

const ALPHABET: [&str; 4] = ["a", "b", "c", "d"];

fn random_tokens(rng: &mut impl rand::Rng, min: usize, max: usize) -> Vec<String> {
    let n = rng.gen_range(min..=max);
    (0..n).map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())].to_string()).collect()
}

/// `tokens` with up to three random insertions, deletions or substitutions,
/// kept at most `max_len` long.
pub fn perturb(rng: &mut impl rand::Rng, tokens: &[String], max_len: usize) -> Vec<String> {
    let mut out = tokens.to_vec();
    for _ in 0..rng.gen_range(0..=3) {
        let word = ALPHABET[rng.gen_range(0..ALPHABET.len())].to_string();
        match rng.gen_range(0..3) {
            0 if out.len() < max_len => out.insert(rng.gen_range(0..=out.len()), word),
            1 if !out.is_empty() => {
                out.remove(rng.gen_range(0..out.len()));
            }
            _ if !out.is_empty() => {
                let i = rng.gen_range(0..out.len());
                out[i] = word;
            }
            _ => {}
        }
    }
    out
}

/// A random M² document of `sentences` sentences (sources of 1 to 8 tokens,
/// 1 to 3 annotators) and one hypothesis line per sentence.
pub fn random_m2_case(rng: &mut impl rand::Rng, sentences: usize) -> (String, Vec<String>) {
    let mut m2 = String::new();
    let mut hyps = Vec::new();
    for _ in 0..sentences {
        let src = random_tokens(rng, 1, 8);
        let hyp = if rng.gen_bool(0.8) { perturb(rng, &src, 8) } else { random_tokens(rng, 0, 8) };
        m2.push_str(&format!("S {}\n", src.join(" ")));
        for annotator in 0..rng.gen_range(1..=3) {
            let target = if rng.gen_bool(0.5) { hyp.clone() } else { perturb(rng, &src, 8) };
            let lists = M2Oracle::new(&src, &target, 2).all_lists();
            let edits = &lists[rng.gen_range(0..lists.len())];
            if edits.is_empty() {
                m2.push_str(&format!("A -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||{annotator}\n"));
            }
            for e in edits {
                m2.push_str(&format!(
                    "A {} {}|||R|||{}|||REQUIRED|||-NONE-|||{annotator}\n",
                    e.start, e.end, e.correction
                ));
            }
        }
        m2.push('\n');
        hyps.push(hyp.join(" "));
    }
    (m2, hyps)
}

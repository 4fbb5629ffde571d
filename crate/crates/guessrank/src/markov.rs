//! Order-k character Markov models over password corpora.
//!
//! A model of order k stores raw occurrence counts: how many training
//! entries have each length, and how often each k-long symbol window
//! occurs when every entry is left-padded with k-1 boundary symbols.
//! Probabilities are ratios of these counts, formed at query time, so a
//! holdout evaluation can subtract one occurrence with exact integer
//! arithmetic and reproduce a fresh retrain bit for bit.
//!
//! There is no smoothing. A window that never occurred in training has
//! probability exactly zero and makes the whole string unreachable.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::escape::{escape_str, escape_syms, unescape_str, unescape_syms};
use crate::corpus::Corpus;

/// Largest order accepted without an explicit override; the count table
/// grows like |charset|^k.
pub const DEFAULT_MAX_ORDER: usize = 8;

/// Name and version of the model text format.
pub const MODEL_FORMAT: &str = "MKPW 1";

/// One symbol of a padded string: the reserved boundary marker or a real
/// character. Boundary sorts before every character.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sym {
    Boundary,
    Ch(char),
}

/// Log-domain probability: a finite natural log, or exactly zero
/// probability (the model can never produce the string).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogProb {
    Finite(f64),
    Unreachable,
}

impl LogProb {
    pub fn is_unreachable(self) -> bool {
        matches!(self, LogProb::Unreachable)
    }

    pub fn ln_value(self) -> Option<f64> {
        match self {
            LogProb::Finite(v) => Some(v),
            LogProb::Unreachable => None,
        }
    }

    /// Back to linear domain; Unreachable is 0.
    pub fn linear(self) -> f64 {
        match self {
            LogProb::Finite(v) => v.exp(),
            LogProb::Unreachable => 0.0,
        }
    }
}

/// The k-long windows of a string after boundary padding, one per
/// character position. The empty string has no windows.
pub fn windows(k: usize, s: &str) -> Vec<Vec<Sym>> {
    let chars: Vec<char> = s.chars().collect();
    let mut padded: Vec<Sym> = Vec::with_capacity(k - 1 + chars.len());
    padded.resize(k - 1, Sym::Boundary);
    padded.extend(chars.iter().map(|&c| Sym::Ch(c)));
    (0..chars.len()).map(|i| padded[i..i + k].to_vec()).collect()
}

fn boundary_placement_ok(gram: &[Sym]) -> bool {
    let mut seen_char = false;
    for sym in gram {
        match sym {
            Sym::Boundary if seen_char => return false,
            Sym::Boundary => {}
            Sym::Ch(_) => seen_char = true,
        }
    }
    true
}

#[derive(Debug, Clone)]
pub struct MarkovModel {
    k: usize,
    charset: BTreeSet<char>,
    /// Length -> number of training entries of that length. Zero counts are
    /// never stored.
    length_counts: BTreeMap<usize, u64>,
    /// Padded k-window -> occurrence count. Zero counts are never stored.
    gram_counts: HashMap<Vec<Sym>, u64>,
    /// (k-1)-context -> total continuations, equal to the sum of
    /// gram_counts over every extension of the context.
    context_totals: HashMap<Vec<Sym>, u64>,
    /// Sum of length_counts.
    total: u64,
    /// Fingerprint of the training corpus; absent on models read back from
    /// a file.
    trained_from: Option<String>,
}

impl MarkovModel {
    pub fn train(corpus: &Corpus, k: usize) -> Result<MarkovModel> {
        Self::train_with_max_order(corpus, k, DEFAULT_MAX_ORDER)
    }

    pub fn train_with_max_order(corpus: &Corpus, k: usize, max: usize) -> Result<MarkovModel> {
        if k < 1 {
            return Err(Error::OrderTooSmall);
        }
        if k > max {
            return Err(Error::OrderTooLarge { order: k, max });
        }
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut length_counts: BTreeMap<usize, u64> = BTreeMap::new();
        let mut gram_counts: HashMap<Vec<Sym>, u64> = HashMap::new();
        let mut context_totals: HashMap<Vec<Sym>, u64> = HashMap::new();
        for (entry, mult) in corpus.entries() {
            let len = entry.chars().count();
            *length_counts.entry(len).or_insert(0) += mult;
            for gram in windows(k, entry) {
                *context_totals.entry(gram[..k - 1].to_vec()).or_insert(0) += mult;
                *gram_counts.entry(gram).or_insert(0) += mult;
            }
        }
        Ok(MarkovModel {
            k,
            charset: corpus.charset().collect(),
            length_counts,
            gram_counts,
            context_totals,
            total: corpus.total_count(),
            trained_from: Some(corpus.fingerprint()),
        })
    }

    pub fn order(&self) -> usize {
        self.k
    }

    pub fn charset(&self) -> impl Iterator<Item = char> + '_ {
        self.charset.iter().copied()
    }

    pub fn charset_size(&self) -> usize {
        self.charset.len()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn trained_from(&self) -> Option<&str> {
        self.trained_from.as_deref()
    }

    pub fn length_counts(&self) -> &BTreeMap<usize, u64> {
        &self.length_counts
    }

    pub fn grams(&self) -> impl Iterator<Item = (&[Sym], u64)> {
        self.gram_counts.iter().map(|(g, &c)| (g.as_slice(), c))
    }

    pub fn gram_count(&self, gram: &[Sym]) -> u64 {
        self.gram_counts.get(gram).copied().unwrap_or(0)
    }

    pub fn context_total(&self, ctx: &[Sym]) -> u64 {
        self.context_totals.get(ctx).copied().unwrap_or(0)
    }

    pub fn length_prob(&self, len: usize) -> f64 {
        match self.length_counts.get(&len) {
            Some(&count) => count as f64 / self.total as f64,
            None => 0.0,
        }
    }

    /// Probability of the last symbol of `gram` given its k-1 preceding
    /// symbols. Zero when the window or its context was never observed.
    pub fn cond_prob(&self, gram: &[Sym]) -> Result<f64> {
        if gram.len() != self.k {
            return Err(Error::MalformedGram {
                message: format!("expected {} symbols, got {}", self.k, gram.len()),
            });
        }
        if !boundary_placement_ok(gram) {
            return Err(Error::MalformedGram {
                message: "boundary symbol after a character".into(),
            });
        }
        let num = self.gram_count(gram);
        let den = self.context_total(&gram[..self.k - 1]);
        if num == 0 || den == 0 {
            return Ok(0.0);
        }
        Ok(num as f64 / den as f64)
    }

    /// Model probability of `s` in log domain: the length term plus one
    /// conditional term per character, left to right. This exact sequence
    /// of float operations is the reference arithmetic path; the holdout
    /// variant reproduces it on residual counts.
    pub fn log_score(&self, s: &str) -> LogProb {
        let len = s.chars().count();
        let len_count = match self.length_counts.get(&len) {
            Some(&c) => c,
            None => return LogProb::Unreachable,
        };
        let mut acc = (len_count as f64 / self.total as f64).ln();
        for gram in windows(self.k, s) {
            let num = self.gram_count(&gram);
            let den = self.context_total(&gram[..self.k - 1]);
            if num == 0 || den == 0 {
                return LogProb::Unreachable;
            }
            acc += (num as f64 / den as f64).ln();
        }
        LogProb::Finite(acc)
    }

    /// Scores `s` as if one occurrence of it were removed from the
    /// training corpus. Equal, bit for bit, to retraining on the reduced
    /// corpus and calling log_score.
    pub fn log_score_holdout(&self, s: &str) -> Result<LogProb> {
        Ok(self.residual_without(s)?.log_score(s))
    }

    /// The model retrained on the training corpus minus one occurrence of
    /// `s`, built by exact count subtraction.
    ///
    /// Membership of `s` is checked against the stored counts (the entry
    /// list itself is not retained): the length count and every window
    /// count of `s` must cover one removal. A string that merely reuses
    /// windows of other entries at full length cannot pass unless the
    /// counts allow it.
    pub fn residual_without(&self, s: &str) -> Result<MarkovModel> {
        let len = s.chars().count();
        if self.length_counts.get(&len).copied().unwrap_or(0) == 0 {
            return Err(Error::NotInTrainingCorpus);
        }
        let wins = windows(self.k, s);
        let mut within: HashMap<&[Sym], u64> = HashMap::new();
        for gram in &wins {
            *within.entry(gram.as_slice()).or_insert(0) += 1;
        }
        for (gram, &need) in &within {
            if self.gram_count(gram) < need {
                return Err(Error::NotInTrainingCorpus);
            }
        }

        let mut length_counts = self.length_counts.clone();
        match length_counts.get_mut(&len) {
            Some(c) if *c > 1 => *c -= 1,
            _ => {
                length_counts.remove(&len);
            }
        }
        let mut gram_counts = self.gram_counts.clone();
        let mut context_totals = self.context_totals.clone();
        for (gram, &need) in &within {
            let slot = gram_counts.get_mut(*gram).expect("checked above");
            *slot -= need;
            if *slot == 0 {
                gram_counts.remove(*gram);
            }
            let ctx = &gram[..self.k - 1];
            let slot = context_totals.get_mut(ctx).expect("context covers gram");
            *slot -= need;
            if *slot == 0 {
                context_totals.remove(ctx);
            }
        }
        let mut charset = BTreeSet::new();
        for gram in gram_counts.keys() {
            charset.extend(gram.iter().filter_map(|sym| match sym {
                Sym::Ch(c) => Some(*c),
                Sym::Boundary => None,
            }));
        }
        Ok(MarkovModel {
            k: self.k,
            charset,
            length_counts,
            gram_counts,
            context_totals,
            total: self.total - 1,
            trained_from: None,
        })
    }

    /// Pinned text format, versioned as MKPW 1. Round-trips bit-exactly:
    /// parse(to_text(m)) re-serializes to the same bytes.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{MODEL_FORMAT} k={}", self.k);
        let charset: String = self.charset.iter().collect();
        if charset.is_empty() {
            out.push_str("CHARSET\n");
        } else {
            let _ = writeln!(out, "CHARSET {}", escape_str(&charset));
        }
        for (len, count) in &self.length_counts {
            let _ = writeln!(out, "LEN {len} {count}");
        }
        let mut grams: Vec<(String, u64)> = self
            .gram_counts
            .iter()
            .map(|(gram, &count)| (escape_syms(gram), count))
            .collect();
        grams.sort_by(|a, b| a.0.cmp(&b.0));
        for (gram, count) in grams {
            let _ = writeln!(out, "NGRAM {gram} {count}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<MarkovModel> {
        let fail = |line: usize, message: &str| Error::ModelFormat {
            line,
            message: message.to_string(),
        };
        let mut lines = text.lines().enumerate();

        let (n, header) = lines.next().ok_or_else(|| fail(1, "empty file"))?;
        let parts: Vec<&str> = header.split(' ').collect();
        if parts.len() != 3 || parts[0] != "MKPW" {
            return Err(fail(n + 1, "expected `MKPW <version> k=<k>`"));
        }
        if parts[1] != "1" {
            return Err(fail(n + 1, &format!("unsupported version {}", parts[1])));
        }
        let k: usize = parts[2]
            .strip_prefix("k=")
            .and_then(|v| v.parse().ok())
            .filter(|&k| k >= 1)
            .ok_or_else(|| fail(n + 1, "bad order field"))?;

        let (n, charset_line) = lines.next().ok_or_else(|| fail(2, "missing CHARSET"))?;
        let charset_text = if charset_line == "CHARSET" {
            String::new()
        } else {
            let payload = charset_line
                .strip_prefix("CHARSET ")
                .ok_or_else(|| fail(n + 1, "expected CHARSET line"))?;
            unescape_str(payload).map_err(|e| fail(n + 1, &e.to_string()))?
        };
        let mut charset = BTreeSet::new();
        for c in charset_text.chars() {
            if !charset.insert(c) {
                return Err(fail(n + 1, "duplicate character in charset"));
            }
        }

        let mut length_counts: BTreeMap<usize, u64> = BTreeMap::new();
        let mut gram_counts: HashMap<Vec<Sym>, u64> = HashMap::new();
        let mut context_totals: HashMap<Vec<Sym>, u64> = HashMap::new();
        for (n, line) in lines {
            let lineno = n + 1;
            let parts: Vec<&str> = line.split(' ').collect();
            match parts.as_slice() {
                ["LEN", len, count] => {
                    let len: usize = len.parse().map_err(|_| fail(lineno, "bad length"))?;
                    let count: u64 = count
                        .parse()
                        .ok()
                        .filter(|&c| c > 0)
                        .ok_or_else(|| fail(lineno, "bad count"))?;
                    if length_counts.insert(len, count).is_some() {
                        return Err(fail(lineno, "duplicate LEN line"));
                    }
                }
                ["NGRAM", gram, count] => {
                    let gram = unescape_syms(gram).map_err(|e| fail(lineno, &e.to_string()))?;
                    let count: u64 = count
                        .parse()
                        .ok()
                        .filter(|&c| c > 0)
                        .ok_or_else(|| fail(lineno, "bad count"))?;
                    if gram.len() != k {
                        return Err(fail(lineno, "gram length does not match order"));
                    }
                    if !boundary_placement_ok(&gram) {
                        return Err(fail(lineno, "boundary symbol after a character"));
                    }
                    match gram.last() {
                        Some(Sym::Ch(c)) if charset.contains(c) => {}
                        Some(Sym::Ch(_)) => {
                            return Err(fail(lineno, "gram character not in charset"))
                        }
                        _ => return Err(fail(lineno, "gram must end with a character")),
                    }
                    for sym in &gram {
                        if let Sym::Ch(c) = sym {
                            if !charset.contains(c) {
                                return Err(fail(lineno, "gram character not in charset"));
                            }
                        }
                    }
                    *context_totals.entry(gram[..k - 1].to_vec()).or_insert(0) += count;
                    if gram_counts.insert(gram, count).is_some() {
                        return Err(fail(lineno, "duplicate NGRAM line"));
                    }
                }
                _ => return Err(fail(lineno, "unrecognized line")),
            }
        }
        if length_counts.is_empty() {
            return Err(fail(0, "model has no LEN lines"));
        }
        let total: u64 = length_counts.values().sum();
        let window_total: u128 = gram_counts.values().map(|&c| c as u128).sum();
        let expected: u128 = length_counts
            .iter()
            .map(|(&len, &count)| len as u128 * count as u128)
            .sum();
        if window_total != expected {
            return Err(fail(0, "gram counts do not cover the stated lengths"));
        }
        Ok(MarkovModel {
            k,
            charset,
            length_counts,
            gram_counts,
            context_totals,
            total,
            trained_from: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::DedupPolicy;

    fn corpus(lines: &[&str]) -> Corpus {
        Corpus::from_lines(lines.iter().copied(), DedupPolicy::KeepMultiset)
    }

    fn ab_model(k: usize) -> MarkovModel {
        MarkovModel::train(&corpus(&["aa", "ab"]), k).unwrap()
    }

    fn assert_prob(lp: LogProb, expected: f64) {
        match lp {
            LogProb::Finite(v) => assert!(
                (v.exp() - expected).abs() < 1e-12,
                "expected {expected}, got {}",
                v.exp()
            ),
            LogProb::Unreachable => panic!("expected {expected}, got Unreachable"),
        }
    }

    #[test]
    fn order_one_conditionals() {
        let m = ab_model(1);
        assert_eq!(m.cond_prob(&[Sym::Ch('a')]).unwrap(), 0.75);
        assert_eq!(m.cond_prob(&[Sym::Ch('b')]).unwrap(), 0.25);
        assert_eq!(m.length_prob(2), 1.0);
        assert_eq!(m.length_prob(7), 0.0);
    }

    #[test]
    fn order_two_conditionals() {
        let m = ab_model(2);
        assert_eq!(m.cond_prob(&[Sym::Boundary, Sym::Ch('a')]).unwrap(), 1.0);
        assert_eq!(m.cond_prob(&[Sym::Ch('a'), Sym::Ch('a')]).unwrap(), 0.5);
        assert_eq!(m.cond_prob(&[Sym::Ch('a'), Sym::Ch('b')]).unwrap(), 0.5);
        // Unseen context.
        assert_eq!(m.cond_prob(&[Sym::Ch('z'), Sym::Ch('a')]).unwrap(), 0.0);
    }

    #[test]
    fn malformed_gram_is_rejected() {
        let m = ab_model(2);
        assert!(matches!(
            m.cond_prob(&[Sym::Ch('a'), Sym::Boundary]),
            Err(Error::MalformedGram { .. })
        ));
        assert!(matches!(
            m.cond_prob(&[Sym::Ch('a')]),
            Err(Error::MalformedGram { .. })
        ));
    }

    #[test]
    fn score_fixtures() {
        assert_prob(ab_model(1).log_score("aa"), 0.5625);
        assert_prob(ab_model(1).log_score("ab"), 0.1875);
        assert_prob(ab_model(1).log_score("ba"), 0.1875);
        assert_prob(ab_model(2).log_score("ab"), 0.5);
        assert_prob(ab_model(2).log_score("aa"), 0.5);
    }

    #[test]
    fn deterministic_single_entry_model() {
        for k in 1..=3 {
            let m = MarkovModel::train(&corpus(&["x"]), k).unwrap();
            assert_prob(m.log_score("x"), 1.0);
        }
    }

    #[test]
    fn foreign_character_is_unreachable_not_an_error() {
        let m = ab_model(1);
        assert!(m.log_score("az").is_unreachable());
        assert!(m.log_score("aaa").is_unreachable());
    }

    #[test]
    fn empty_string_scores_by_length_term() {
        let m = MarkovModel::train(&corpus(&["", "a"]), 1).unwrap();
        assert_prob(m.log_score(""), 0.5);
    }

    #[test]
    fn holdout_fixtures() {
        let lp = ab_model(1).log_score_holdout("aa").unwrap();
        assert_prob(lp, 0.25);
        assert!(ab_model(2).log_score_holdout("ab").unwrap().is_unreachable());
        let m = MarkovModel::train(&corpus(&["x", "x"]), 1).unwrap();
        assert_prob(m.log_score_holdout("x").unwrap(), 1.0);
    }

    #[test]
    fn holdout_requires_membership() {
        let m = ab_model(1);
        assert!(matches!(
            m.log_score_holdout("zz"),
            Err(Error::NotInTrainingCorpus)
        ));
        // "ba" has length 2 and both characters occur, but not at the
        // multiplicities a removal would need under k=2.
        let m = ab_model(2);
        assert!(matches!(
            m.log_score_holdout("bb"),
            Err(Error::NotInTrainingCorpus)
        ));
    }

    #[test]
    fn holdout_matches_fresh_retrain_bit_exactly() {
        let big = corpus(&["aa", "ab", "ba", "aab", "aa"]);
        let for_removal = ["aa", "ab", "ba", "aab"];
        for k in 1..=3 {
            let m = MarkovModel::train(&big, k).unwrap();
            for s in for_removal {
                let mut lines: Vec<&str> = vec!["aa", "ab", "ba", "aab", "aa"];
                let pos = lines.iter().position(|e| e == &s).unwrap();
                lines.remove(pos);
                let retrained = MarkovModel::train(&corpus(&lines), k).unwrap();
                assert_eq!(
                    m.log_score_holdout(s).unwrap(),
                    retrained.log_score(s),
                    "k={k} s={s}"
                );
            }
        }
    }

    #[test]
    fn conditionals_sum_to_one_per_context() {
        let m = MarkovModel::train(&corpus(&["hello", "help", "hold"]), 2).unwrap();
        let mut contexts: Vec<Vec<Sym>> = m.grams().map(|(g, _)| g[..1].to_vec()).collect();
        contexts.sort();
        contexts.dedup();
        for ctx in contexts {
            let mut sum = 0.0;
            for c in m.charset().collect::<Vec<_>>() {
                let mut gram = ctx.clone();
                gram.push(Sym::Ch(c));
                sum += m.cond_prob(&gram).unwrap();
            }
            assert!((sum - 1.0).abs() < 1e-12, "context {ctx:?} sums to {sum}");
        }
    }

    #[test]
    fn length_probs_sum_to_one() {
        let m = MarkovModel::train(&corpus(&["a", "bb", "bb", "ccc"]), 1).unwrap();
        let sum: f64 = m.length_counts().keys().map(|&l| m.length_prob(l)).sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert_eq!(m.length_prob(1), 0.25);
        assert_eq!(m.length_prob(2), 0.5);
    }

    #[test]
    fn fully_connected_model_sums_to_one_over_all_strings() {
        // Every string of lengths 1..=3 over {a,b} is a training entry, so
        // every context continues to both characters and total probability
        // mass over the support is 1.
        let mut lines = Vec::new();
        for len in 1..=3usize {
            for i in 0..(1u32 << len) {
                let s: String = (0..len)
                    .map(|bit| if i >> bit & 1 == 0 { 'a' } else { 'b' })
                    .collect();
                lines.push(s);
            }
        }
        let refs: Vec<&str> = lines.iter().map(|s| s.as_str()).collect();
        let c = corpus(&refs);
        for k in 1..=3 {
            let m = MarkovModel::train(&c, k).unwrap();
            let mut sum = 0.0;
            for s in &lines {
                sum += m.log_score(s).linear();
            }
            assert!((sum - 1.0).abs() < 1e-9, "k={k} sum={sum}");
        }
    }

    #[test]
    fn order_bounds() {
        let c = corpus(&["ab"]);
        assert!(matches!(
            MarkovModel::train(&c, 0),
            Err(Error::OrderTooSmall)
        ));
        assert!(matches!(
            MarkovModel::train(&c, 9),
            Err(Error::OrderTooLarge { order: 9, max: 8 })
        ));
        assert!(MarkovModel::train_with_max_order(&c, 9, 12).is_ok());
        let c = Corpus::from_lines(Vec::<String>::new(), DedupPolicy::KeepMultiset);
        assert!(matches!(
            MarkovModel::train(&c, 1),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn serialization_round_trips_bit_exactly() {
        for k in 1..=3 {
            let m = MarkovModel::train(&corpus(&["aa", "ab", "b c", "aa"]), k).unwrap();
            let text = m.to_text();
            let parsed = MarkovModel::parse(&text).unwrap();
            assert_eq!(parsed.to_text(), text, "k={k}");
            for s in ["aa", "ab", "b c", "zz", ""] {
                assert_eq!(m.log_score(s), parsed.log_score(s), "k={k} s={s}");
            }
            assert_eq!(
                m.log_score_holdout("aa").unwrap(),
                parsed.log_score_holdout("aa").unwrap()
            );
        }
    }

    #[test]
    fn serialized_shape_is_pinned() {
        let m = ab_model(2);
        let text = m.to_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "MKPW 1 k=2");
        assert_eq!(lines[1], "CHARSET ab");
        assert_eq!(lines[2], "LEN 2 2");
        assert_eq!(lines[3], "NGRAM \\Ba 2");
        assert_eq!(lines[4], "NGRAM aa 1");
        assert_eq!(lines[5], "NGRAM ab 1");
        assert_eq!(lines.len(), 6);
    }

    #[test]
    fn parse_rejects_corrupt_files() {
        let good = ab_model(2).to_text();
        assert!(MarkovModel::parse(&good).is_ok());
        for (bad, why) in [
            ("", "empty"),
            ("MKPW 2 k=2\nCHARSET ab\nLEN 2 2", "version"),
            ("MKPW 1 k=0\nCHARSET ab\nLEN 2 2", "order"),
            ("MKPW 1 k=1\nCHARSET \\B\nLEN 1 1\nNGRAM a 1", "charset escape"),
            ("MKPW 1 k=1\nCHARSET aa\nLEN 1 1\nNGRAM a 1", "dup charset"),
            ("MKPW 1 k=1\nCHARSET ab\nNGRAM a 1", "no LEN"),
            (
                "MKPW 1 k=1\nCHARSET ab\nLEN 1 1\nLEN 1 2\nNGRAM a 1",
                "dup LEN",
            ),
            (
                "MKPW 1 k=1\nCHARSET ab\nLEN 1 1\nNGRAM a 1\nNGRAM a 1",
                "dup NGRAM",
            ),
            ("MKPW 1 k=1\nCHARSET ab\nLEN 1 1\nNGRAM z 1", "foreign gram"),
            ("MKPW 1 k=1\nCHARSET ab\nLEN 1 1\nNGRAM ab 1", "gram length"),
            ("MKPW 1 k=2\nCHARSET ab\nLEN 1 1\nNGRAM a\\B 1", "gram shape"),
            (
                "MKPW 1 k=1\nCHARSET ab\nLEN 2 1\nNGRAM a 1",
                "coverage mismatch",
            ),
            ("MKPW 1 k=1\nCHARSET ab\nLEN 1 1\nNGRAM a 0", "zero count"),
            ("MKPW 1 k=1\nCHARSET ab\nLEN 1 1\nBOGUS x 1", "unknown line"),
        ] {
            assert!(MarkovModel::parse(bad).is_err(), "accepted: {why}");
        }
    }

    #[test]
    fn boundary_in_charset_line_is_rejected() {
        // \B unescapes to the boundary symbol, which is reserved.
        let text = "MKPW 1 k=1\nCHARSET a\\B\nLEN 1 1\nNGRAM a 1";
        assert!(MarkovModel::parse(text).is_err());
    }

    #[test]
    fn charset_can_be_empty() {
        let m = MarkovModel::train(&corpus(&["", ""]), 1).unwrap();
        let text = m.to_text();
        assert_eq!(text, "MKPW 1 k=1\nCHARSET\nLEN 0 2\n");
        let parsed = MarkovModel::parse(&text).unwrap();
        assert_eq!(parsed.to_text(), text);
        assert_prob(parsed.log_score(""), 1.0);
    }

    #[test]
    fn residual_removes_exactly_one_occurrence() {
        let m = MarkovModel::train(&corpus(&["aa", "aa", "ab"]), 1).unwrap();
        let residual = m.residual_without("aa").unwrap();
        assert_eq!(residual.total(), 2);
        assert_eq!(residual.gram_count(&[Sym::Ch('a')]), 3);
        assert_eq!(residual.gram_count(&[Sym::Ch('b')]), 1);
    }

    #[test]
    fn windows_pad_with_boundaries() {
        let w = windows(3, "ab");
        assert_eq!(
            w,
            vec![
                vec![Sym::Boundary, Sym::Boundary, Sym::Ch('a')],
                vec![Sym::Boundary, Sym::Ch('a'), Sym::Ch('b')],
            ]
        );
        assert!(windows(3, "").is_empty());
    }
}

//! Dictionary attacks: wordlists, mangling rules, and yield statistics.
//!
//! A dictionary is an ordered list of unique words; order is
//! first-occurrence order across its sources, which matters because real
//! wordlists are frequency-ranked. The attack statistic of interest is
//! the guess probability, found_fraction / size: the chance that one
//! random word from the dictionary matches one random account. It is kept
//! as an exact rational so the defining identity survives arithmetic.

use std::collections::HashSet;

use num::rational::BigRational;
use num::{BigInt, ToPrimitive};

use crate::corpus::Corpus;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dictionary {
    words: Vec<String>,
    index: HashSet<String>,
    provenance: Vec<String>,
}

impl Dictionary {
    pub fn from_words<I, S>(label: &str, words: I) -> Dictionary
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut dict = Dictionary {
            words: Vec::new(),
            index: HashSet::new(),
            provenance: vec![label.to_string()],
        };
        for word in words {
            dict.push(word.into());
        }
        dict
    }

    /// Concatenates sources with first-occurrence dedup. Each source is
    /// framed like a corpus file: LF lines, one trailing CR stripped.
    pub fn from_sources(sources: &[(String, Vec<u8>)]) -> Result<Dictionary> {
        let mut dict = Dictionary {
            words: Vec::new(),
            index: HashSet::new(),
            provenance: Vec::new(),
        };
        for (label, bytes) in sources {
            dict.provenance.push(label.clone());
            let corpus_lines = split_word_lines(bytes, label)?;
            for word in corpus_lines {
                dict.push(word);
            }
        }
        Ok(dict)
    }

    /// First-occurrence union, provenance concatenated.
    pub fn union(dicts: &[&Dictionary]) -> Dictionary {
        let mut out = Dictionary {
            words: Vec::new(),
            index: HashSet::new(),
            provenance: Vec::new(),
        };
        for d in dicts {
            out.provenance.extend(d.provenance.iter().cloned());
            for w in &d.words {
                out.push(w.clone());
            }
        }
        out
    }

    fn push(&mut self, word: String) {
        if self.index.insert(word.clone()) {
            self.words.push(word);
        }
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn provenance(&self) -> &[String] {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains(word)
    }
}

fn split_word_lines(bytes: &[u8], label: &str) -> Result<Vec<String>> {
    let mut raw: Vec<&[u8]> = bytes.split(|&b| b == b'\n').collect();
    if bytes.is_empty() || bytes.ends_with(b"\n") {
        raw.pop();
    }
    let mut out = Vec::with_capacity(raw.len());
    for (idx, line) in raw.into_iter().enumerate() {
        let line = line.strip_suffix(b"\r").unwrap_or(line);
        let word = std::str::from_utf8(line).map_err(|_| Error::InvalidUtf8 {
            source_name: label.to_string(),
            line: idx + 1,
        })?;
        out.push(word.to_string());
    }
    Ok(out)
}

/// The built-in mangling vocabulary. Digit rules expand word-major: every
/// variant of one word before the next word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MangleRule {
    Identity,
    AppendDigit,
    PrependDigit,
    CapitalizeFirst,
    UppercaseAll,
    AppendTwoDigits,
    JuxtaposePairs,
}

impl MangleRule {
    pub fn name(self) -> &'static str {
        match self {
            MangleRule::Identity => "identity",
            MangleRule::AppendDigit => "append-digit",
            MangleRule::PrependDigit => "prepend-digit",
            MangleRule::CapitalizeFirst => "capitalize-first",
            MangleRule::UppercaseAll => "uppercase-all",
            MangleRule::AppendTwoDigits => "append-two-digits",
            MangleRule::JuxtaposePairs => "juxtapose-pairs",
        }
    }

    pub fn parse(name: &str) -> Option<MangleRule> {
        Some(match name {
            "identity" => MangleRule::Identity,
            "append-digit" => MangleRule::AppendDigit,
            "prepend-digit" => MangleRule::PrependDigit,
            "capitalize-first" => MangleRule::CapitalizeFirst,
            "uppercase-all" => MangleRule::UppercaseAll,
            "append-two-digits" => MangleRule::AppendTwoDigits,
            "juxtapose-pairs" => MangleRule::JuxtaposePairs,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone)]
pub struct MangleOptions {
    /// Whether juxtapose-pairs may glue a word to itself.
    pub include_self_pairs: bool,
    /// Word-count ceiling for juxtapose-pairs; the expansion is quadratic.
    pub juxtapose_cap: usize,
}

impl Default for MangleOptions {
    fn default() -> MangleOptions {
        MangleOptions {
            include_self_pairs: false,
            juxtapose_cap: 2000,
        }
    }
}

fn capitalize_first(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Expands a dictionary in rule-major order: all outputs of the first
/// rule, then the second, each deduped against everything emitted so far.
pub fn apply_mangling(
    d: &Dictionary,
    rules: &[MangleRule],
    opts: &MangleOptions,
) -> Result<Dictionary> {
    let mut label = String::from("mangled(");
    label.push_str(
        &rules
            .iter()
            .map(|r| r.name())
            .collect::<Vec<_>>()
            .join(","),
    );
    label.push(')');
    let mut provenance = d.provenance.to_vec();
    provenance.push(label);
    let mut out = Dictionary {
        words: Vec::new(),
        index: HashSet::new(),
        provenance,
    };
    for rule in rules {
        match rule {
            MangleRule::Identity => {
                for w in &d.words {
                    out.push(w.clone());
                }
            }
            MangleRule::AppendDigit => {
                for w in &d.words {
                    for digit in 0..10 {
                        out.push(format!("{w}{digit}"));
                    }
                }
            }
            MangleRule::PrependDigit => {
                for w in &d.words {
                    for digit in 0..10 {
                        out.push(format!("{digit}{w}"));
                    }
                }
            }
            MangleRule::CapitalizeFirst => {
                for w in &d.words {
                    out.push(capitalize_first(w));
                }
            }
            MangleRule::UppercaseAll => {
                for w in &d.words {
                    out.push(w.to_uppercase());
                }
            }
            MangleRule::AppendTwoDigits => {
                for w in &d.words {
                    for n in 0..100 {
                        out.push(format!("{w}{n:02}"));
                    }
                }
            }
            MangleRule::JuxtaposePairs => {
                if d.words.len() > opts.juxtapose_cap {
                    return Err(Error::JuxtaposeTooLarge {
                        size: d.words.len(),
                        cap: opts.juxtapose_cap,
                    });
                }
                for w1 in &d.words {
                    for w2 in &d.words {
                        if w1 == w2 && !opts.include_self_pairs {
                            continue;
                        }
                        out.push(format!("{w1}{w2}"));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// How found_fraction weights the evaluation corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    /// Per account: multiplicities count (default; repeated passwords are
    /// repeatedly found).
    Accounts,
    /// Per unique password.
    UniquePasswords,
}

#[derive(Debug, Clone)]
pub struct DictReport {
    pub label: String,
    pub size: u64,
    pub found_count: u64,
    pub eval_total: u64,
    pub found_fraction: BigRational,
    pub guess_probability: BigRational,
}

impl DictReport {
    /// Builds the report from raw tallies; the two rationals are derived
    /// here so guess_probability * size == found_fraction holds exactly.
    pub fn from_counts(label: &str, size: u64, found_count: u64, eval_total: u64) -> DictReport {
        let found_fraction = BigRational::new(BigInt::from(found_count), BigInt::from(eval_total));
        let guess_probability = &found_fraction / BigInt::from(size);
        DictReport {
            label: label.to_string(),
            size,
            found_count,
            eval_total,
            found_fraction,
            guess_probability,
        }
    }

    pub fn found_fraction_f64(&self) -> f64 {
        self.found_fraction.to_f64().unwrap_or(f64::NAN)
    }

    pub fn guess_probability_f64(&self) -> f64 {
        self.guess_probability.to_f64().unwrap_or(f64::NAN)
    }
}

/// Fraction of the evaluation corpus found verbatim in the dictionary,
/// and the per-guess yield that implies.
pub fn dictionary_attack(
    d: &Dictionary,
    label: &str,
    eval: &Corpus,
    weighting: Weighting,
) -> Result<DictReport> {
    if d.is_empty() {
        return Err(Error::EmptyDictionary);
    }
    if eval.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut found = 0u64;
    let mut total = 0u64;
    for (entry, mult) in eval.entries() {
        let weight = match weighting {
            Weighting::Accounts => mult,
            Weighting::UniquePasswords => 1,
        };
        total += weight;
        if d.contains(entry) {
            found += weight;
        }
    }
    Ok(DictReport::from_counts(label, d.len() as u64, found, total))
}
